//! The chapters of the book, compiled as doctests so every listing runs under
//! `cargo test`. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/index.md")]
pub mod index {}
#[doc = include_str!("../../../book/src/grid.md")]
pub mod grid {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/wgeom.md")]
pub mod wgeom {}
#[doc = include_str!("../../../book/src/madelung.md")]
pub mod madelung {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/transport.md")]
pub mod transport {}
#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
