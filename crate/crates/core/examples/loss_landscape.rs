//! Compare the proportion losses as a prediction drifts toward the wrong
//! vertex of the simplex.
//!
//! ```text
//! cargo run --example loss_landscape
//! ```

use llp_forge::losses::{kl_proportion_loss, tv_distance, tv_star_loss};
use llp_forge::simplex::{make_simplex, SimplexVector};

fn main() -> llp_forge::Result<()> {
    let rho = SimplexVector::vertex(0, 2)?;
    println!("{:>10} {:>12} {:>10} {:>10} {:>10}", "rho~_0", "kl", "tv", "tv* a=1", "tv* a=2");
    for k in [1, 2, 4, 6, 8, 10, 12] {
        let eps = 10f64.powi(-k);
        let q = make_simplex(&[eps, 1.0 - eps])?;
        println!(
            "{:>10.0e} {:>12.4} {:>10.6} {:>10.6} {:>10.6}",
            eps,
            kl_proportion_loss(&rho, &q)?,
            tv_distance(&rho, &q)?,
            tv_star_loss(&rho, &q, 1.0)?,
            tv_star_loss(&rho, &q, 2.0)?,
        );
    }

    // Larger exponents shrink the loss for a fixed pair.
    let a = make_simplex(&[0.5, 0.3, 0.2])?;
    let b = make_simplex(&[0.2, 0.2, 0.6])?;
    for alpha in [0.5, 1.0, 2.0, 3.5] {
        println!("alpha {alpha:>3}: tv* = {:.6}", tv_star_loss(&a, &b, alpha)?);
    }
    Ok(())
}
