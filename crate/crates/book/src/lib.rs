//! Each book chapter is a module here so `cargo test` runs its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/words.md")]
pub mod words {}
#[doc = include_str!("../../../book/src/marked_graphs.md")]
pub mod marked_graphs {}
#[doc = include_str!("../../../book/src/currents.md")]
pub mod currents {}
#[doc = include_str!("../../../book/src/intersection.md")]
pub mod intersection {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/splittings.md")]
pub mod splittings {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
