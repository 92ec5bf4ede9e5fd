//! Rotating Bose-Einstein condensates in anisotropic harmonic traps, reduced
//! to the lowest Landau level and minimized there.
//!
//! The pipeline runs from trap parameters to a symplectic change of
//! variables ([`symplectic`]), its quantization ([`metaplectic`]), the
//! Fock-space model of the lowest Landau level ([`fock`]), the reduced
//! energy ([`energy`]) and its minimization ([`minimizer`]). Theta-function
//! lattices live in [`theta`], vortex detection in [`vortex`].
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example symplectic_reduction
//! cargo run --example metaplectic_segal
//! cargo run --example bargmann_projection
//! cargo run --example abrikosov_lattice
//! cargo run --release --example weak_regime
//! cargo run --release --example strong_regime
//! cargo run --release --example scenario_pipeline -- figure1 out/figure1
//! ```

pub mod cli;
pub mod energy;
pub mod error;
pub mod fock;
pub mod grid;
pub mod metaplectic;
pub mod minimizer;
pub mod symplectic;
pub mod theta;
pub mod vortex;

pub use error::{Error, Result};
