//! Long-run energy behavior: the variational scheme's energy oscillates in
//! a bounded band, the forward scheme's energy grows without bound.

use deltavar::{
    energy_series, reference_solution, solve_differential_scheme, solve_variational, NewtonParams,
    Problem, Result, TimeScale, REFERENCE_RTOL,
};

fn main() -> Result<()> {
    let ts = TimeScale::uniform(0.0, 100.0, 10_000)?;
    let p = Problem::Harmonic.potential();
    let l = Problem::Harmonic.lagrangian();

    // consistent startup for both schemes from the reference
    let x1 = reference_solution(&p, 1.0, 0.0, &ts.points()[..2], REFERENCE_RTOL)?.values()[1];
    let vtr = solve_variational(&ts, &l, 1.0, x1, NewtonParams::default())?;
    let dtr = solve_differential_scheme(&ts, &p, 1.0, x1)?;

    let ve = energy_series(&vtr, &l)?;
    let de = energy_series(&dtr, &l)?;
    println!(
        "harmonic oscillator, h = 0.01, t in [0, 100], E_0 = {:+.6}\n",
        ve.e[0]
    );
    println!(
        "variational drift   = {:.4e}  (bounded oscillation)",
        ve.drift
    );
    println!("differential drift  = {:.4e}  (secular growth)", de.drift);
    println!("ratio               = {:.1}\n", de.drift / ve.drift);

    // windowed drift: the variational band does not widen with time
    println!("max |E - E_0| per window of 25 time units:");
    println!(
        "  {:>10} {:>14} {:>14}",
        "window", "variational", "differential"
    );
    for w in 0..4 {
        let range = (w * 2500)..((w + 1) * 2500);
        let vmax = range
            .clone()
            .map(|k| (ve.e[k] - ve.e[0]).abs())
            .fold(0.0_f64, f64::max);
        let dmax = range
            .map(|k| (de.e[k] - de.e[0]).abs())
            .fold(0.0_f64, f64::max);
        println!(
            "  [{:>3},{:>3}) {vmax:>14.4e} {dmax:>14.4e}",
            w * 25,
            (w + 1) * 25
        );
    }

    Ok(())
}
