//! Numerical laboratory for the Schrödinger equation and its hydrodynamic
//! twin, the Madelung flow, on a periodic interval.
//!
//! Fields live on a uniform [`Grid`] with Fourier-pseudospectral calculus.
//! On top of it sit densities and wave functions ([`fields`]), the
//! Wasserstein calculus of densities ([`wgeom`]), the Madelung transform
//! between the two pictures ([`madelung`]), time integrators
//! ([`dynamics`]), one-dimensional optimal transport ([`transport`]) and a
//! declarative scenario runner ([`scenario`]).
//!
//! ```
//! use madelung::{fields, states, Grid, PhysicsConstants, PotentialField};
//!
//! let grid = Grid::periodic(128)?;
//! let c = PhysicsConstants::new(1.0)?;
//! let psi = states::plane_wave(&grid, 2)?;
//! let h = madelung::madelung::hamiltonian_hs(&psi, &PotentialField::zero(&grid), &c)?;
//! assert!((h - 2.0).abs() < 1e-12);
//! # let _ = fields::DENSITY_FLOOR;
//! # Ok::<(), madelung::Error>(())
//! ```

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod grid;
pub mod madelung;
pub mod scenario;
pub mod states;
pub mod transport;
pub mod wgeom;

pub use error::{Error, Result};
pub use fields::{DensityField, Gauge, PhaseField, PhysicsConstants, PotentialField, WaveField};
pub use grid::{ComplexField, Grid, RealField};
pub use wgeom::{StandardVectorFieldSpec, TangentBundlePoint, TangentVector};
