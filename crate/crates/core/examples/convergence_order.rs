//! Global convergence order of the two schemes against the reference
//! oracle: the forward scheme is order one, the variational scheme order
//! two.

use deltavar::{convergence_order, Problem, Result, Scheme};

fn main() -> Result<()> {
    let p = Problem::Harmonic.potential();
    let h_list = [0.1, 0.05, 0.025, 0.0125];

    for scheme in [Scheme::Differential, Scheme::Variational] {
        let report = convergence_order(scheme, &p, (0.0, 1.0), 1.0, 0.0, &h_list)?;
        println!("{scheme} scheme, harmonic oscillator on [0, 1]:");
        println!("  {:>8}  {:>12}", "h", "max error");
        for (&h, &e) in report.steps.iter().zip(&report.errors) {
            println!("  {h:>8}  {e:>12.4e}");
        }
        println!("  slope = {:.4}\n", report.slope.unwrap());
    }

    Ok(())
}
