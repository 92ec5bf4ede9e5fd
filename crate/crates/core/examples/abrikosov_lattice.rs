//! The Abrikosov parameter of theta-function lattice states, its minimum at
//! the hexagonal lattice, and the Euler-Lagrange check of that lattice.
//!
//! ```bash
//! cargo run --example abrikosov_lattice
//! ```

use lll_gp::theta::{
    abrikosov_el_residual, gamma_tau, optimize_tau, zeros_per_cell, LatticeTau, LatticeWindow, TauScan,
};
use num_complex::Complex64;

fn main() -> lll_gp::Result<()> {
    let hex = LatticeTau::hexagonal();
    println!("gamma(hexagonal) = {:.6}", gamma_tau(&hex));
    println!("gamma(square)    = {:.6}", gamma_tau(&LatticeTau::square()));

    let opt = optimize_tau(&TauScan::default(), 40)?;
    println!("optimum tau = {:.6}  gamma = {:.6}  ({} evaluations)", opt.tau.tau, opt.gamma, opt.evaluations);
    println!("zeros per cell: {}", zeros_per_cell(&hex, Complex64::new(-0.37, -0.41), 64));

    for cells in [8.0, 10.0, 12.0] {
        let r = abrikosov_el_residual(&hex, &LatticeWindow::new(cells), None)?;
        println!(
            "window {cells:4.1} cells: lambda = {:.6}  residual = {:.2e}  (unscaled {:.2})",
            r.lambda, r.residual, r.residual_without_multiplier
        );
    }
    Ok(())
}
