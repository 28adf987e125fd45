//! Side-by-side trajectories: both schemes against the reference on the
//! same grid, from the same startup data.

use deltavar::{
    reference_solution, solve_differential_scheme, solve_variational, NewtonParams, Problem,
    Result, TimeScale, REFERENCE_RTOL,
};

fn main() -> Result<()> {
    let ts = TimeScale::uniform(0.0, 10.0, 100)?;
    let p = Problem::Harmonic.potential();
    let l = Problem::Harmonic.lagrangian();

    let reference = reference_solution(&p, 1.0, 0.0, ts.points(), REFERENCE_RTOL)?;
    let x1 = reference.values()[1];
    let dtr = solve_differential_scheme(&ts, &p, 1.0, x1)?;
    let vtr = solve_variational(&ts, &l, 1.0, x1, NewtonParams::default())?;

    println!("harmonic oscillator, h = 0.1, t in [0, 10]\n");
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>11} {:>11}",
        "t", "differential", "variational", "reference", "err_diff", "err_var"
    );
    for k in (0..=100).step_by(20) {
        let (d, v, r) = (dtr.x.values()[k], vtr.x.values()[k], reference.values()[k]);
        println!(
            "{:>5.1} {d:>12.6} {v:>12.6} {r:>12.6} {:>11.3e} {:>11.3e}",
            ts.points()[k],
            (d - r).abs(),
            (v - r).abs()
        );
    }

    let max = |x: &deltavar::GridFunction| {
        x.values()
            .iter()
            .zip(reference.values())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0_f64, f64::max)
    };
    println!(
        "\nmax errors: differential {:.3e}, variational {:.3e}",
        max(&dtr.x),
        max(&vtr.x)
    );

    Ok(())
}
