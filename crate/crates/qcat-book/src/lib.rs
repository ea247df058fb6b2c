//! Code snippets of the guide in `book/src`, compiled and run as doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/categories.md")]
pub mod categories {}

#[doc = include_str!("../../../book/src/morphisms.md")]
pub mod morphisms {}

#[doc = include_str!("../../../book/src/qsystems.md")]
pub mod qsystems {}

#[doc = include_str!("../../../book/src/decomposition.md")]
pub mod decomposition {}

#[doc = include_str!("../../../book/src/braided.md")]
pub mod braided {}

#[doc = include_str!("../../../book/src/modules.md")]
pub mod modules {}

#[doc = include_str!("../../../book/src/boundary.md")]
pub mod boundary {}

#[doc = include_str!("../../../book/src/reports.md")]
pub mod reports {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
