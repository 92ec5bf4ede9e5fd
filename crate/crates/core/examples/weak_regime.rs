//! Weak anisotropy: minimize the reduced energy, compare it with the
//! Thomas-Fermi bracket, and measure the vortex lattice.
//!
//! ```bash
//! cargo run --release --example weak_regime
//! ```

use lll_gp::energy::{classify_regime, thomas_fermi, weak_bounds, ReducedParams};
use lll_gp::minimizer::{minimize_energy, MinimizerOptions};
use lll_gp::symplectic::{derive_parameters, TrapParams};
use lll_gp::vortex::{detect_vortices, lattice_stats, BULK_MARGIN};
use lll_gp::grid::Grid2;

fn main() -> lll_gp::Result<()> {
    let trap = TrapParams::from_nu_eps(0.03, 0.002f64.sqrt(), 1.0)?;
    let rp = ReducedParams::from(&derive_parameters(&trap)?);
    let regime = classify_regime(&rp);
    println!("eps = {:.5}  kappa = {:.5}  g0 = {:.4}  regime {:?} ({:.3})", rp.eps, rp.kappa, rp.g0, regime.tag, regime.ratio);

    let res = minimize_energy(&rp, 256, &MinimizerOptions::default())?;
    let wb = weak_bounds(&rp);
    println!(
        "E = {:.6} after {} iterations (converged: {})",
        res.energy.total, res.iterations, res.converged
    );
    println!("bracket [{:.6}, {:.6}], b = {:.4}", wb.lower, wb.upper, wb.b);

    let tf = thomas_fermi(&rp);
    println!("Thomas-Fermi radii {:.3} x {:.3}", tf.r1, tf.r2);
    let grid = Grid2::centered(tf.r1 * 1.1, 256, tf.r2 * 1.1, 256)?;
    let zeros = detect_vortices(&res.coeffs, &grid, Some(&tf), BULK_MARGIN);
    println!("{} zeros, {} in the bulk", zeros.zeros.len(), zeros.bulk_count());
    let stats = lattice_stats(&zeros)?;
    println!(
        "nearest neighbour {:.4} (cv {:.3}), six-fold order {:.4}",
        stats.nn_mean, stats.nn_cv, stats.six_fold_order
    );
    Ok(())
}
