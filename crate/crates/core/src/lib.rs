//! Numerical laboratory for horocycle orbits on the modular surface.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic piece:
//!
//! * [`sieve`]: Möbius/totient tables, the truncated divisor sum `Λ_R`, the
//!   pseudo-random weight `ν = Λ_R² / log R` and numeric checks of the
//!   classical identities that control their averages.
//! * [`psl2`]: kinematics of `PSL₂(ℝ)`: Iwasawa coordinates, Möbius action,
//!   geodesic and horocycle flows, a left-invariant metric and Haar density.
//! * [`modular`]: everything specific to `PSL₂(ℤ)`: fundamental-domain
//!   reduction, lattice reduction, invariant height, the fundamental period
//!   `y_T`, distance to the base point and the `r` parameter.
//! * [`approx`]: peak parametrisation of a horocycle segment and its
//!   approximation by a closed horocycle.
//! * [`observable`], [`orbit`], [`experiment`]: test functions with known
//!   integrals, orbit sums along the horocycle and the discrepancy experiments.
//!
//! IO, the command line and file formats live in the companion `horolab` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod approx;
pub mod error;
pub mod experiment;
pub mod modular;
pub mod numeric;
pub mod observable;
pub mod orbit;
pub mod psl2;
pub mod sieve;

pub use error::{Error, Result};
pub use modular::{PeriodData, SurfacePoint};
pub use psl2::{GroupElement, IwasawaCoords};
pub use sieve::{SieveLevel, SieveTable};
