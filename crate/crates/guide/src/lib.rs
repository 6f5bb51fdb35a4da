//! The chapters of `book/` as doc-tests, so `cargo test` runs every Rust snippet in the guide.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/potentials.md")]
pub mod potentials {}
#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}
#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
