//! Numerical audits of the loss inequalities and the generalization bound.
//!
//! ```text
//! cargo run --release --example theory_audit
//! ```

use llp_forge::simplex::RngSeed;
use llp_forge::theory::{
    kl_slope_sequence, lipschitz_probe, monotonicity_audit, pinsker_audit, symmetry_audit, theorem_mc_audit,
    theorem_rhs, tv_star_max_audit, tv_star_slope_sequence, TheoremAuditConfig,
};

fn main() -> llp_forge::Result<()> {
    let p = pinsker_audit(100_000, 4, RngSeed(1));
    println!("pinsker: {} violations, min slack {:.3e}", p.violations, p.min_slack);

    let classes = [2, 3, 5];
    for alpha in [1.0, 2.0, 3.5] {
        println!("max tv* at alpha {alpha}: {:.6}", tv_star_max_audit(200_000, &classes, alpha, RngSeed(2)));
    }
    println!("asymmetric pairs: {}", symmetry_audit(100_000, &classes, 2.0, RngSeed(3)));
    println!("monotonicity violations: {}", monotonicity_audit(100_000, &classes, &[0.5, 1.0, 2.0, 3.5], RngSeed(4)));

    let eps = [1e-2, 1e-4, 1e-6, 1e-8];
    println!("kl slopes toward a vertex:  {:?}", kl_slope_sequence(&eps));
    println!("tv* slopes toward a vertex: {:?}", tv_star_slope_sequence(&eps, 1.0));
    for alpha in [1.0, 2.0] {
        let l = lipschitz_probe(alpha, 20_000, 4, RngSeed(5))?;
        println!("alpha {alpha}: value slope {:.4}, gradient slope {:.2}", l.max_value_slope, l.max_gradient_slope);
    }

    for m in [100, 1000, 10_000] {
        println!("bound complexity term at m = {m}: {:.4}", theorem_rhs(1, m, 0.05, 1.0)?);
    }
    let (report, _) = theorem_mc_audit(&TheoremAuditConfig::default())?;
    println!(
        "bound: {} / {} trials violated, mean slack {:.4}, rhs {:.4}",
        report.violations, report.trials, report.mean_slack, report.rhs
    );
    Ok(())
}
