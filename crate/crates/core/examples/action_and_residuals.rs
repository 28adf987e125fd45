//! The discrete action and the three Euler-Lagrange residuals evaluated
//! along one trajectory, with the identities connecting them.

use deltavar::{
    action, action_gradient, action_usual, residual_differential, residual_integral,
    residual_variational_backward, CEstimateMode, GridFunction, Problem, Result, TimeScale,
};

fn main() -> Result<()> {
    let ts = TimeScale::from_points(vec![0.0, 0.2, 0.3, 0.55, 0.8, 0.9, 1.2, 1.5])?;
    let l = Problem::Harmonic.lagrangian();
    let x = GridFunction::sample(&ts, |t| t.cos());

    println!("harmonic oscillator, x = cos t sampled on an irregular scale\n");
    println!("action            = {:+.6}", action(&ts, &l, &x)?);
    println!(
        "action (usual)    = {:+.6}  (sigma-composed variant)",
        action_usual(&ts, &l, &x)?
    );

    let rd = residual_differential(&ts, &l, &x)?;
    let rv = residual_variational_backward(&ts, &l, &x)?;
    let ri = residual_integral(&ts, &l, &x, CEstimateMode::First)?;
    println!("\nresidual inf-norms for the sampled (non-stationary) curve:");
    println!("  differential          {:.4e}", rd.inf_norm());
    println!("  variational_backward  {:.4e}", rv.inf_norm());
    println!(
        "  integral              {:.4e}  (c = {:+.6})",
        ri.inf_norm(),
        ri.c_estimate.unwrap()
    );

    // identity 1: the action gradient is -mu_k times the backward residual
    let g = action_gradient(&ts, &l, &x)?;
    let max_defect = g
        .values()
        .iter()
        .zip(rv.values.values())
        .enumerate()
        .map(|(j, (&gk, &rk))| (gk + ts.mu(j + 1).unwrap() * rk).abs())
        .fold(0.0_f64, f64::max);
    println!("\ngradient identity  max |g_k + mu_k r_k|        = {max_defect:.2e}");

    // identity 2: differencing the integral residual gives the backward one
    let r = ri.values.values();
    let max_defect = rv
        .values
        .values()
        .iter()
        .enumerate()
        .map(|(j, &rk)| {
            let k = j + 1;
            (rk - (r[k] - r[k - 1]) / ts.mu(k).unwrap()).abs()
        })
        .fold(0.0_f64, f64::max);
    println!("difference identity max |r^v_k - (dr^i/mu)_k|  = {max_defect:.2e}");

    Ok(())
}
