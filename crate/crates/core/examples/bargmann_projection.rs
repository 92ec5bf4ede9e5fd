//! Project fields onto the lowest Landau level two ways, through the Fock
//! expansion and through the explicit kernel, and look at the two facts the
//! strong-regime analysis rests on.
//!
//! ```bash
//! cargo run --example bargmann_projection
//! ```

use std::f64::consts::PI;

use lll_gp::fock::{carlen_check, project_field, project_kernel_oracle, x2sq_rayleigh, FockCoefficients};
use lll_gp::grid::{ComplexField, Grid2};
use num_complex::Complex64;

fn main() -> lll_gp::Result<()> {
    let g = Grid2::square(4.0, 64)?;
    // A wave packet with momentum is not holomorphic; projection removes mass.
    let u = ComplexField::from_fn(g, |x1, x2| {
        Complex64::new(0.0, 2.0 * x1).exp() * (-PI * ((x1 - 0.4).powi(2) + (x2 + 0.3).powi(2)) / 1.5).exp()
    });
    let fock = project_field(&u, 80)?;
    let kernel = project_kernel_oracle(&u)?;
    println!("||u||^2 = {:.6}  ||P u||^2 = {:.6}", u.norm_sq(), fock.norm_sq());
    println!("Fock vs kernel projector: {:.2e}", kernel.sub(&fock).norm() / fock.norm());
    println!("idempotence: {:.2e}", project_field(&fock, 80)?.sub(&fock).norm());

    let cg = Grid2::square(6.0, 256)?;
    let c = FockCoefficients::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.3, 0.2),
    ])?
    .normalized();
    let r = carlen_check(&c, &cg);
    println!("Carlen: int |grad |u||^2 = {:.6}, pi int |u|^2 = {:.6}", r.lhs, r.rhs);

    // <x2^2> over the LLL never drops below 1/(4 pi); strip windows approach it.
    println!("x2^2 floor 1/(4 pi) = {:.6}", 1.0 / (4.0 * PI));
    for n in [16, 64, 256, 1024] {
        println!("  window N = {n:4}: {:.6}", x2sq_rayleigh(&FockCoefficients::strip_window(n)));
    }
    Ok(())
}
