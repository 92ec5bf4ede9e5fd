//! Strong anisotropy: the condensate becomes a vortex-free strip whose energy
//! approaches the one-dimensional limit problem.
//!
//! ```bash
//! cargo run --release --example strong_regime
//! ```

use lll_gp::energy::{classify_regime, strong_asymptote, strong_limit_1d, strong_profile_error, ReducedParams};
use lll_gp::fock::synthesize;
use lll_gp::grid::Grid2;
use lll_gp::minimizer::{minimize_energy, MinimizerOptions};
use lll_gp::symplectic::{derive_parameters, TrapParams};

fn main() -> lll_gp::Result<()> {
    let trap = TrapParams::from_nu_eps(0.73, 0.002f64.sqrt(), 1.0)?;
    let rp = ReducedParams::from(&derive_parameters(&trap)?);
    println!("regime {:?}", classify_regime(&rp).tag);

    let lim = strong_limit_1d(rp.g0)?;
    println!("1D problem: support radius {:.4}, J = {:.6}", lim.r, lim.j);

    let res = minimize_energy(&rp, 768, &MinimizerOptions::default())?;
    let a = strong_asymptote(&rp)?;
    println!("E = {:.6}  floor = {:.6}  prediction = {:.6}", res.energy.total, a.floor, a.prediction);
    println!("(E - floor) / (eps^(2/3) J) = {:.4}", (res.energy.total - a.floor) / (rp.eps.powf(2.0 / 3.0) * a.j));

    // Wide along x1, a few magnetic lengths across.
    let half = 1.2 * lim.r / rp.eps.powf(2.0 / 3.0);
    let grid = Grid2::centered(half.min(15.0), 512, 3.0, 128)?;
    let u = synthesize(&res.coeffs, &grid);
    println!("profile error against the 1D limit: {:.4}", strong_profile_error(&u, &rp)?);
    Ok(())
}
