//! Derive the normal-mode frequencies and the reduction map of a rotating
//! anisotropic trap, then check that the map really is symplectic and
//! diagonalizes the trap form.
//!
//! ```bash
//! cargo run --example symplectic_reduction -- 0.03 0.002
//! ```
//! Arguments are `nu` and `eps^2`; omega follows from the constraint.

use nalgebra::{Vector2, Vector4};
use lll_gp::symplectic::{
    build_reduction_map, build_trap_quadratic_form, derive_parameters, frequencies_by_eigensolver, normal_form_value,
    TrapParams,
};

fn main() -> lll_gp::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let nu = args.first().copied().unwrap_or(0.03);
    let eps2 = args.get(1).copied().unwrap_or(0.002);
    let trap = TrapParams::from_nu_eps(nu, eps2.sqrt(), 1.0)?;
    let dp = derive_parameters(&trap)?;
    println!("omega = {:.6}  nu = {nu}  eps = {:.6}", trap.omega, trap.eps);
    println!("mu1 = {:.6e}  mu2 = {:.6}", dp.mu1, dp.mu2);
    let q = build_trap_quadratic_form(&trap);
    let (e1, e2) = frequencies_by_eigensolver(&q)?;
    println!("eigensolver   {e1:.6e}  {e2:.6}");
    println!("kappa = {:.6}  g0 = {:.6}", dp.kappa, dp.g0);

    let m = build_reduction_map(&dp)?;
    println!("symplectic residual      {:.2e}", m.symplectic_residual());
    println!("diagonalization residual {:.2e}", m.diagonalization_residual(&q, dp.mu1, dp.mu2));
    println!("factorization residual   {:.2e}", m.factorization_residual());
    let (x, eta) = (Vector2::new(0.4, -1.1), Vector2::new(0.7, 0.2));
    println!("generating function      {:.2e}", m.generating_function_residual(&x, &eta));

    // The trap energy written as a sum of squares of the new coordinates.
    let pt = Vector4::new(0.4, -1.1, 0.7, 0.2);
    println!("q(pt) = {:.12}  sum of squares = {:.12}", q.value(&pt), normal_form_value(&dp, &pt));
    Ok(())
}
