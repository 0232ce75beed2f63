//! The book's chapters, one module each, so `cargo test -p cusign-guide`
//! compiles and runs every listing. A failing doctest names the module, and
//! the module names the chapter.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/residuals.md")]
pub mod residuals {}
#[doc = include_str!("../../../book/src/cusign.md")]
pub mod cusign {}
#[doc = include_str!("../../../book/src/alarm-rate.md")]
pub mod alarm_rate {}
#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}
#[doc = include_str!("../../../book/src/cusum-attacks.md")]
pub mod cusum_attacks {}
#[doc = include_str!("../../../book/src/vehicle.md")]
pub mod vehicle {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
