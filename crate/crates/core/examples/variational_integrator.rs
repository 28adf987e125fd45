//! Stepping the discrete Euler-Lagrange equation on an irregular scale and
//! verifying that the result is stationary for the discrete action.

use deltavar::{
    action_gradient, random_scale, residual_integral, solve_variational, CEstimateMode,
    NewtonParams, Problem, Result,
};

fn main() -> Result<()> {
    // 50 points, gaps drawn from [0.01, 0.05], reproducible by seed
    let ts = random_scale(50, 0.01, 0.05, 7)?;
    let l = Problem::Pendulum.lagrangian();

    let tr = solve_variational(&ts, &l, 0.8, 0.8, NewtonParams::default())?;
    println!(
        "pendulum on a random scale over [{:.3}, {:.3}], {} points",
        ts.a(),
        ts.b(),
        ts.len()
    );
    println!("\nfirst rows of the trajectory:");
    for k in 0..6 {
        println!(
            "  t = {:>6.4}  x = {:+.6}",
            ts.points()[k],
            tr.x.values()[k]
        );
    }

    // stationarity, two ways: the integral-form residual and the gradient
    // of the discrete action both vanish to solver tolerance
    let r = residual_integral(&ts, &l, &tr.x, CEstimateMode::First)?;
    let g = action_gradient(&ts, &l, &tr.x)?;
    println!("\nintegral residual inf-norm = {:.3e}", r.inf_norm());
    println!("action gradient inf-norm   = {:.3e}", g.inf_norm());
    println!("(both at rounding level: the integrator IS the stationarity equation)");

    Ok(())
}
