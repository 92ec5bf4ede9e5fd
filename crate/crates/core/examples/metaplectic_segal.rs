//! Apply the metaplectic operator of the reduction map to Gaussians and check
//! unitarity, the Segal covariance of Weyl symbols, and the oscillator ground
//! energy.
//!
//! ```bash
//! cargo run --example metaplectic_segal
//! ```

use std::f64::consts::PI;

use lll_gp::grid::{ComplexField, Grid2};
use lll_gp::metaplectic::{apply_metaplectic, apply_metaplectic_adjoint, oscillator_ground_state, weyl_expectation};
use lll_gp::symplectic::{build_reduction_map, build_trap_quadratic_form, derive_parameters, TrapParams};
use num_complex::Complex64;

fn main() -> lll_gp::Result<()> {
    let trap = TrapParams::from_omega_nu(0.8, 0.4, 1.0)?;
    let dp = derive_parameters(&trap)?;
    let q = build_trap_quadratic_form(&trap);
    let chi = build_reduction_map(&dp)?.chi;
    let grid = Grid2::square(8.0, 256)?;

    let v = ComplexField::from_fn(grid, |y1, y2| Complex64::new((-PI * (y1 * y1 / 1.69 + y2 * y2 / 0.64)).exp(), 0.0))
        .normalized();
    let mv = apply_metaplectic(&dp, &v)?;
    let back = apply_metaplectic_adjoint(&dp, &mv)?;
    println!("||Mv|| - 1         = {:.2e}", mv.norm() - 1.0);
    println!("||M*Mv - v||       = {:.2e}", back.sub(&v).norm());

    let lhs = weyl_expectation(&q.q, &mv);
    let rhs = weyl_expectation(&(chi.transpose() * q.q * chi), &v);
    println!("<q Mv, Mv>         = {lhs:.10}");
    println!("<(q o chi) v, v>   = {rhs:.10}");

    let ground = apply_metaplectic(&dp, &oscillator_ground_state(dp.mu1, dp.mu2, &grid))?;
    println!(
        "ground energy      = {:.10}  (mu1 + mu2)/2pi = {:.10}",
        weyl_expectation(&q.q, &ground),
        (dp.mu1 + dp.mu2) / (2.0 * PI)
    );
    println!("output grid        = [{:.2}, {:.2}] x [{:.2}, {:.2}]", mv.grid.x1_min, mv.grid.x1_max, mv.grid.x2_min, mv.grid.x2_max);
    Ok(())
}
