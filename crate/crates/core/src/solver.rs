//! Trajectory generation under the discrete schemes, a high-accuracy
//! continuous reference, and the convergence/energy diagnostics built on
//! them.
//!
//! Two schemes step the discrete dynamics forward from a startup pair
//! `(x0, x1)`:
//!
//! * `solve_differential_scheme`: the forward-difference recurrence
//!   `x_{k+2} = 2x_{k+1} - x_k - h^2 U'(x_k)`, defined on uniform scales
//!   only;
//! * `solve_variational`: Newton steps on the stationarity equation
//!   `p_k = p_{k-1} + mu_k d2_k`, valid on any scale. Its trajectories
//!   satisfy the integral-form equation to Newton tolerance by
//!   construction.
//!
//! The reference oracle integrates `x'' = -U'(x)` with classical
//! fourth-order Runge-Kutta on fixed substeps sized so the error per unit
//! time stays below `rtol`; it supplies "exact" values for convergence
//! measurement and startup seeding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{mechanical, Lagrangian, Potential};
use crate::timescale::{GridFunction, TimeScale};

/// Default oracle accuracy: error per unit time, chosen so oracle error is
/// negligible against scheme error at every tested step size.
pub const REFERENCE_RTOL: f64 = 1e-10;

/// Which generator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Differential,
    Variational,
    Reference,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Differential => "differential",
            Scheme::Variational => "variational",
            Scheme::Reference => "reference",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "differential" => Ok(Scheme::Differential),
            "variational" => Ok(Scheme::Variational),
            "reference" => Ok(Scheme::Reference),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?}; expected differential, variational, or reference"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial data a trajectory was started from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SeedData {
    /// Startup pair for the two-step recurrences.
    Pair { x0: f64, x1: f64 },
    /// Position and velocity for the reference oracle.
    Initial { x0: f64, v0: f64 },
}

/// A solution sequence on its scale, tagged with how it was made.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub ts: TimeScale,
    pub x: GridFunction,
    pub scheme: Scheme,
    /// Registry name when the problem came from the registry.
    pub problem: Option<String>,
    pub seed_data: SeedData,
}

/// Newton controls for the variational step equation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewtonParams {
    /// Accept when the step-equation residual falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// Forward-difference recurrence `x_{k+2} = 2x_{k+1} - x_k - h^2 U'(x_k)`,
/// seeded with `(x0, x1)`. Defined on uniform scales only.
pub fn solve_differential_scheme(
    ts: &TimeScale,
    p: &Potential,
    x0: f64,
    x1: f64,
) -> Result<Trajectory> {
    let h = ts.uniform_step().map_err(|_| {
        Error::Validation(
            "the differential scheme is defined on uniform scales only; \
             use the variational scheme on nonuniform scales"
                .into(),
        )
    })?;
    let n = ts.len();
    let mut x = Vec::with_capacity(n);
    x.push(x0);
    x.push(x1);
    for k in 0..n - 2 {
        x.push(2.0 * x[k + 1] - x[k] - h * h * p.du(x[k]));
    }
    Ok(Trajectory {
        ts: ts.clone(),
        x: GridFunction::full(x),
        scheme: Scheme::Differential,
        problem: None,
        seed_data: SeedData::Pair { x0, x1 },
    })
}

/// Steps the stationarity equation
/// `d3(t_k, x_k, v_k) = d3(t_{k-1}, x_{k-1}, v_{k-1}) + mu_k d2(t_k, x_k, v_k)`
/// forward in `x_{k+1}` by Newton iteration, predictor `x_k + mu_k v_{k-1}`.
///
/// For mechanical Lagrangians the equation is linear in `x_{k+1}` and each
/// step closes in one iteration.
pub fn solve_variational(
    ts: &TimeScale,
    l: &Lagrangian,
    x0: f64,
    x1: f64,
    newton: NewtonParams,
) -> Result<Trajectory> {
    if !(newton.tol > 0.0) || newton.max_iter == 0 {
        return Err(Error::Validation(format!(
            "newton parameters need tol > 0 and max_iter > 0, got tol {} and max_iter {}",
            newton.tol, newton.max_iter
        )));
    }
    let n = ts.len();
    let t = ts.points();
    let mut x = Vec::with_capacity(n);
    x.push(x0);
    x.push(x1);
    for k in 1..n - 1 {
        let mu_prev = ts.mu_at(k - 1);
        let mu = ts.mu_at(k);
        let v_prev = (x[k] - x[k - 1]) / mu_prev;
        let p_prev = l.d3(t[k - 1], x[k - 1], v_prev);
        let mut xn = x[k] + mu * v_prev;
        let mut converged = false;
        let mut last_residual = f64::NAN;
        for _ in 0..newton.max_iter {
            let v = (xn - x[k]) / mu;
            let f = l.d3(t[k], x[k], v) - p_prev - mu * l.d2(t[k], x[k], v);
            last_residual = f.abs();
            if last_residual <= newton.tol {
                converged = true;
                break;
            }
            let fp = (l.d33(t[k], x[k], v) - mu * l.d23(t[k], x[k], v)) / mu;
            if !fp.is_finite() || fp.abs() <= 1e-12 {
                return Err(Error::Solver {
                    step: k,
                    message: format!(
                        "near-zero Newton derivative {fp:e}; the step equation is degenerate \
                         (d33 - mu*d23 vanishes)"
                    ),
                });
            }
            xn -= f / fp;
        }
        if !converged {
            return Err(Error::Solver {
                step: k,
                message: format!(
                    "Newton did not reach tol {:e} in {} iterations; last residual {:e}",
                    newton.tol, newton.max_iter, last_residual
                ),
            });
        }
        x.push(xn);
    }
    Ok(Trajectory {
        ts: ts.clone(),
        x: GridFunction::full(x),
        scheme: Scheme::Variational,
        problem: None,
        seed_data: SeedData::Pair { x0, x1 },
    })
}

/// One classical RK4 step of the system `x' = v`, `v' = -U'(x)`.
fn rk4_step(p: &Potential, x: f64, v: f64, h: f64) -> (f64, f64) {
    let a = |x: f64| -p.du(x);
    let (k1x, k1v) = (v, a(x));
    let (k2x, k2v) = (v + 0.5 * h * k1v, a(x + 0.5 * h * k1x));
    let (k3x, k3v) = (v + 0.5 * h * k2v, a(x + 0.5 * h * k2x));
    let (k4x, k4v) = (v + h * k3v, a(x + h * k3x));
    (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Integrates `x'' = -U'(x)` from `(x0, v0)` at `t_grid[0]`, returning
/// `(x, v)` at every grid point.
///
/// Fixed substepping: each gap is covered by equal substeps no longer than
/// `0.5 * rtol^(1/4)`, which keeps the accumulated RK4 error per unit time
/// at roughly `h^4/120`, two orders below `rtol`. Deterministic: equal
/// inputs give bit-identical outputs.
pub fn reference_states(
    p: &Potential,
    x0: f64,
    v0: f64,
    t_grid: &[f64],
    rtol: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(rtol > 0.0) {
        return Err(Error::Validation(format!(
            "reference oracle needs rtol > 0, got {rtol}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::Validation(
            "reference oracle needs a nonempty grid".into(),
        ));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation(
            "reference oracle needs a finite, strictly increasing grid".into(),
        ));
    }
    let h_max = 0.5 * rtol.powf(0.25);
    let mut states = Vec::with_capacity(t_grid.len());
    let (mut x, mut v) = (x0, v0);
    states.push((x, v));
    for w in t_grid.windows(2) {
        let gap = w[1] - w[0];
        let m = (gap / h_max).ceil().max(1.0) as usize;
        let h = gap / m as f64;
        for _ in 0..m {
            (x, v) = rk4_step(p, x, v, h);
        }
        states.push((x, v));
    }
    Ok(states)
}

/// Positions from [`reference_states`] as a full-domain grid function.
pub fn reference_solution(
    p: &Potential,
    x0: f64,
    v0: f64,
    t_grid: &[f64],
    rtol: f64,
) -> Result<GridFunction> {
    let states = reference_states(p, x0, v0, t_grid, rtol)?;
    Ok(GridFunction::full(
        states.into_iter().map(|(x, _)| x).collect(),
    ))
}

/// Reference trajectory on a scale, for side-by-side comparison output.
pub fn reference_trajectory(
    ts: &TimeScale,
    p: &Potential,
    x0: f64,
    v0: f64,
    rtol: f64,
) -> Result<Trajectory> {
    let x = reference_solution(p, x0, v0, ts.points(), rtol)?;
    Ok(Trajectory {
        ts: ts.clone(),
        x,
        scheme: Scheme::Reference,
        problem: None,
        seed_data: SeedData::Initial { x0, v0 },
    })
}

/// Max-norm errors against the reference over a list of step sizes, with a
/// least-squares slope of log error vs log h.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub problem: Option<String>,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Absent when the fit is degenerate.
    pub slope: Option<f64>,
    /// Errors at rounding level; a log-log fit would be meaningless.
    pub degenerate: bool,
}

/// Runs `scheme` on uniform grids over `interval` for each step in
/// `h_list`, measuring the max-norm error against the reference oracle.
///
/// `x1` is seeded from the reference at `t_1` so startup error does not
/// pollute the order measurement. `h_list` must be strictly decreasing with
/// at least 3 entries, span at least half a decade, and each step must
/// divide the interval length.
pub fn convergence_order(
    scheme: Scheme,
    p: &Potential,
    interval: (f64, f64),
    x0: f64,
    v0: f64,
    h_list: &[f64],
) -> Result<ConvergenceReport> {
    let (a, b) = interval;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Validation(format!(
            "convergence interval needs finite b > a, got ({a}, {b})"
        )));
    }
    if h_list.len() < 3 {
        return Err(Error::Validation(format!(
            "convergence_order needs at least 3 step sizes, got {}",
            h_list.len()
        )));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) || h_list.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Validation(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    let span = h_list[0] / h_list[h_list.len() - 1];
    if span < 10.0_f64.sqrt() {
        return Err(Error::Validation(format!(
            "step sizes span a factor of {span:.3}; need at least sqrt(10) for a stable fit"
        )));
    }
    let length = b - a;
    let l = mechanical(p);
    let mut errors = Vec::with_capacity(h_list.len());
    let mut ref_scale = 1.0_f64;
    for &h in h_list {
        let n = (length / h).round();
        if n < 2.0 || ((n * h - length) / length).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "step {h} does not divide the interval length {length}"
            )));
        }
        let ts = TimeScale::uniform(a, b, n as usize)?;
        let reference = reference_solution(p, x0, v0, ts.points(), REFERENCE_RTOL)?;
        let x1 = reference.values()[1];
        let tr = match scheme {
            Scheme::Differential => solve_differential_scheme(&ts, p, x0, x1)?,
            Scheme::Variational => solve_variational(&ts, &l, x0, x1, NewtonParams::default())?,
            Scheme::Reference => {
                return Err(Error::Validation(
                    "convergence_order measures the discrete schemes, not the reference".into(),
                ))
            }
        };
        let err =
            tr.x.values()
                .iter()
                .zip(reference.values())
                .map(|(&xi, &ri)| (xi - ri).abs())
                .fold(0.0_f64, f64::max);
        ref_scale = ref_scale.max(reference.inf_norm());
        errors.push(err);
    }

    // exact schemes leave only rounding noise: flag instead of fitting
    let degenerate = errors
        .iter()
        .all(|&e| e <= 100.0 * f64::EPSILON * ref_scale);
    let slope = if degenerate {
        None
    } else {
        let lx: Vec<f64> = h_list.iter().map(|&h| h.ln()).collect();
        let ly: Vec<f64> = errors
            .iter()
            .map(|&e| e.max(f64::MIN_POSITIVE).ln())
            .collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let sxx: f64 = lx.iter().map(|&v| (v - mx) * (v - mx)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(&u, &w)| (u - mx) * (w - my)).sum();
        Some(sxy / sxx)
    };

    Ok(ConvergenceReport {
        scheme,
        problem: None,
        steps: h_list.to_vec(),
        errors,
        slope,
        degenerate,
    })
}

/// Energy along a trajectory in the Legendre form
/// `E_k = v_k d3(t_k, x_k, v_k) - L(t_k, x_k, v_k)` with the forward delta
/// derivative as velocity (equals `v^2/2 + U(x)` for mechanical `L`).
#[derive(Debug, Clone, Serialize)]
pub struct EnergySeries {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
    /// `max_k |E_k - E_0|`.
    pub drift: f64,
}

pub fn energy_series(tr: &Trajectory, l: &Lagrangian) -> Result<EnergySeries> {
    let dx = tr.ts.delta_derivative(&tr.x)?;
    let t_all = tr.ts.points();
    let e: Vec<f64> = dx
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let (t, x) = (t_all[k], tr.x.values()[k]);
            v * l.d3(t, x, v) - l.eval(t, x, v)
        })
        .collect();
    let drift = e.iter().map(|&ek| (ek - e[0]).abs()).fold(0.0, f64::max);
    Ok(EnergySeries {
        t: t_all[..t_all.len() - 1].to_vec(),
        e,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{
        residual_differential, residual_integral, residual_variational_backward, CEstimateMode,
    };
    use crate::lagrangian::Problem;

    fn nonuniform_scale(seed: u64, n_gaps: usize, mu_min: f64, mu_max: f64) -> TimeScale {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut t = 0.0;
        let mut points = vec![t];
        for _ in 0..n_gaps {
            t += mu_min + (mu_max - mu_min) * next();
            points.push(t);
        }
        TimeScale::from_points(points).unwrap()
    }

    #[test]
    fn differential_free_particle_is_the_exact_line() {
        // dyadic h keeps every operation exact
        let ts = TimeScale::uniform(0.0, 1.0, 8).unwrap();
        let h = 0.125;
        let p = Problem::Free.potential();
        let tr = solve_differential_scheme(&ts, &p, 0.0, h).unwrap();
        for (k, &xk) in tr.x.values().iter().enumerate() {
            assert_eq!(xk, k as f64 * h);
        }
    }

    #[test]
    fn differential_hand_step() {
        // x_2 = 2*(1 - 0.005) - 1 - 0.01*1 = 0.98
        let ts = TimeScale::uniform(0.0, 0.2, 2).unwrap();
        let p = Problem::Harmonic.potential();
        let tr = solve_differential_scheme(&ts, &p, 1.0, 0.995).unwrap();
        assert!((tr.x.values()[2] - 0.98).abs() <= 1e-15);
    }

    #[test]
    fn differential_rejects_nonuniform() {
        let ts = TimeScale::from_points(vec![0.0, 0.1, 0.4, 1.0]).unwrap();
        let p = Problem::Harmonic.potential();
        let err = solve_differential_scheme(&ts, &p, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn variational_free_particle_tracks_the_scale() {
        let ts = nonuniform_scale(9, 12, 0.05, 0.5);
        let l = Problem::Free.lagrangian();
        let tr = solve_variational(
            &ts,
            &l,
            ts.points()[0],
            ts.points()[1],
            NewtonParams::default(),
        )
        .unwrap();
        for (k, &xk) in tr.x.values().iter().enumerate() {
            assert_eq!(xk, ts.points()[k], "k={k}");
        }
    }

    #[test]
    fn variational_matches_explicit_recurrence_on_uniform() {
        let n = 10;
        let ts = TimeScale::uniform(0.0, 1.0, n).unwrap();
        let h = ts.uniform_step().unwrap();
        let l = Problem::Harmonic.lagrangian();
        let tr = solve_variational(&ts, &l, 1.0, 0.995, NewtonParams::default()).unwrap();
        let mut expected = vec![1.0, 0.995];
        for k in 1..n {
            let xk = expected[k];
            let xkm = expected[k - 1];
            expected.push(2.0 * xk - xkm - h * h * xk);
        }
        for (k, (&got, &want)) in tr.x.values().iter().zip(&expected).enumerate() {
            assert!((got - want).abs() <= 1e-12, "k={k}: {got} vs {want}");
        }
        let rv = residual_variational_backward(&ts, &l, &tr.x).unwrap();
        assert!(rv.inf_norm() <= 1e-10);
    }

    #[test]
    fn variational_trajectory_is_coherent_on_nonuniform_scale() {
        let ts = nonuniform_scale(21, 49, 0.01, 0.05);
        for problem in [Problem::Harmonic, Problem::Quartic, Problem::Pendulum] {
            let l = problem.lagrangian();
            let x1 = 1.0 - 0.5 * ts.points()[1].powi(2); // roughly cos-like start
            let tr = solve_variational(&ts, &l, 1.0, x1, NewtonParams::default()).unwrap();
            let ri = residual_integral(&ts, &l, &tr.x, CEstimateMode::First).unwrap();
            assert!(ri.inf_norm() <= 1e-9, "{problem}: {}", ri.inf_norm());
            let g = crate::embedding::action_gradient(&ts, &l, &tr.x).unwrap();
            assert!(g.inf_norm() <= 1e-9, "{problem}: {}", g.inf_norm());
        }
    }

    #[test]
    fn variational_newton_counts_stay_small_for_mechanical() {
        // mechanical step equations are linear: one iteration must suffice
        let ts = TimeScale::uniform(0.0, 2.0, 40).unwrap();
        let l = Problem::Pendulum.lagrangian();
        let tight = NewtonParams {
            tol: 1e-13,
            max_iter: 2,
        };
        assert!(solve_variational(&ts, &l, 0.5, 0.5, tight).is_ok());
    }

    #[test]
    fn variational_reports_degenerate_step_equation() {
        // d3 independent of v makes the Newton derivative vanish
        let l = Lagrangian::new(|_t, x, v| v - x * x, |_t, x, _v| -2.0 * x, |_t, _x, _v| 1.0);
        let ts = TimeScale::uniform(0.0, 1.0, 4).unwrap();
        let err = solve_variational(&ts, &l, 1.0, 1.0, NewtonParams::default()).unwrap_err();
        match err {
            Error::Solver { step, message } => {
                assert_eq!(step, 1);
                assert!(message.contains("derivative"), "{message}");
            }
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn reference_matches_closed_forms() {
        let harmonic = Problem::Harmonic.potential();
        let grid = [0.0, 0.5, 1.0, std::f64::consts::FRAC_PI_2];
        let x = reference_solution(&harmonic, 1.0, 0.0, &grid, REFERENCE_RTOL).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert!((x.values()[k] - t.cos()).abs() <= 1e-10, "t={t}");
        }
        assert!(x.values()[3].abs() <= 1e-10);

        let free = Problem::Free.potential();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let x = reference_solution(&free, 0.0, 2.0, &grid, REFERENCE_RTOL).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert!((x.values()[k] - 2.0 * t).abs() <= 1e-12);
        }
    }

    #[test]
    fn reference_conserves_quartic_energy() {
        let quartic = Problem::Quartic.potential();
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 10.0).collect();
        let states = reference_states(&quartic, 1.0, 0.0, &grid, REFERENCE_RTOL).unwrap();
        let e0 = 0.25;
        for &(x, v) in &states {
            let e = 0.5 * v * v + quartic.u(x);
            assert!((e - e0).abs() <= 1e-10, "energy drifted to {e}");
        }
    }

    #[test]
    fn reference_is_deterministic() {
        let p = Problem::Pendulum.potential();
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.07).collect();
        let a = reference_states(&p, 0.8, 0.1, &grid, REFERENCE_RTOL).unwrap();
        let b = reference_states(&p, 0.8, 0.1, &grid, REFERENCE_RTOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reference_rejects_bad_inputs() {
        let p = Problem::Free.potential();
        assert!(reference_states(&p, 0.0, 0.0, &[], 1e-10).is_err());
        assert!(reference_states(&p, 0.0, 0.0, &[0.0, 0.0], 1e-10).is_err());
        assert!(reference_states(&p, 0.0, 0.0, &[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn convergence_orders_match_the_schemes() {
        let p = Problem::Harmonic.potential();
        let h_list = [0.1, 0.05, 0.025, 0.0125];
        let d = convergence_order(Scheme::Differential, &p, (0.0, 1.0), 1.0, 0.0, &h_list).unwrap();
        let slope = d.slope.unwrap();
        assert!((0.85..=1.15).contains(&slope), "differential slope {slope}");

        let v = convergence_order(Scheme::Variational, &p, (0.0, 1.0), 1.0, 0.0, &h_list).unwrap();
        let slope = v.slope.unwrap();
        assert!((1.85..=2.15).contains(&slope), "variational slope {slope}");
        // errors shrink monotonically in both
        for r in [&d, &v] {
            assert!(r.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", r.errors);
        }
    }

    #[test]
    fn convergence_free_particle_is_degenerate() {
        let p = Problem::Free.potential();
        for scheme in [Scheme::Differential, Scheme::Variational] {
            let r = convergence_order(
                scheme,
                &p,
                (0.0, 1.0),
                0.0,
                1.0,
                &[0.1, 0.05, 0.025, 0.0125],
            )
            .unwrap();
            assert!(r.degenerate, "{scheme}: {:?}", r.errors);
            assert!(r.slope.is_none());
        }
    }

    #[test]
    fn convergence_rejects_bad_h_lists() {
        let p = Problem::Harmonic.potential();
        let e = convergence_order(Scheme::Variational, &p, (0.0, 1.0), 1.0, 0.0, &[0.1, 0.05]);
        assert!(e.is_err());
        let e = convergence_order(
            Scheme::Variational,
            &p,
            (0.0, 1.0),
            1.0,
            0.0,
            &[0.1, 0.09, 0.08],
        );
        assert!(e.is_err(), "span too small must be rejected");
        let e = convergence_order(
            Scheme::Variational,
            &p,
            (0.0, 1.0),
            1.0,
            0.0,
            &[0.4, 0.1, 0.03],
        );
        assert!(e.is_err(), "non-dividing steps must be rejected");
    }

    #[test]
    fn differential_error_in_order_h_band() {
        let p = Problem::Harmonic.potential();
        let ts = TimeScale::uniform(0.0, 1.0, 1000).unwrap();
        let reference = reference_solution(&p, 1.0, 0.0, ts.points(), REFERENCE_RTOL).unwrap();
        let tr = solve_differential_scheme(&ts, &p, 1.0, reference.values()[1]).unwrap();
        let err =
            tr.x.values()
                .iter()
                .zip(reference.values())
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
        assert!(
            err > 1e-5 && err < 5e-3,
            "error {err} outside the O(h) band"
        );
    }

    #[test]
    fn schemes_differ_within_ten_steps() {
        let ts = TimeScale::uniform(0.0, 1.0, 10).unwrap();
        let p = Problem::Harmonic.potential();
        let l = Problem::Harmonic.lagrangian();
        let d = solve_differential_scheme(&ts, &p, 1.0, 0.995).unwrap();
        let v = solve_variational(&ts, &l, 1.0, 0.995, NewtonParams::default()).unwrap();
        let gap =
            d.x.values()
                .iter()
                .zip(v.x.values())
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
        assert!(gap > 1e-6, "schemes should separate, max gap {gap}");
    }

    #[test]
    fn variational_is_time_symmetric_and_differential_is_not() {
        let n = 10;
        let ts = TimeScale::uniform(0.0, 1.0, n).unwrap();
        let p = Problem::Harmonic.potential();
        let l = Problem::Harmonic.lagrangian();

        let v = solve_variational(&ts, &l, 1.0, 0.995, NewtonParams::default()).unwrap();
        let mut reversed = v.x.values().to_vec();
        reversed.reverse();
        let rv = residual_variational_backward(&ts, &l, &GridFunction::full(reversed)).unwrap();
        assert!(
            rv.inf_norm() <= 1e-9,
            "reversed variational residual {}",
            rv.inf_norm()
        );

        let d = solve_differential_scheme(&ts, &p, 1.0, 0.995).unwrap();
        let mut reversed = d.x.values().to_vec();
        reversed.reverse();
        let rd = residual_differential(&ts, &l, &GridFunction::full(reversed)).unwrap();
        assert!(
            rd.inf_norm() > 1e-4,
            "reversed differential residual {}",
            rd.inf_norm()
        );
    }

    #[test]
    fn energy_series_examples() {
        let ts = TimeScale::uniform(0.0, 1.0, 8).unwrap();
        let l = Problem::Free.lagrangian();
        let line = GridFunction::sample(&ts, |t| 2.0 * t);
        let tr = Trajectory {
            ts: ts.clone(),
            x: line,
            scheme: Scheme::Variational,
            problem: Some("free".into()),
            seed_data: SeedData::Pair { x0: 0.0, x1: 0.25 },
        };
        let es = energy_series(&tr, &l).unwrap();
        assert_eq!(es.e.len(), 8);
        assert_eq!(es.t.len(), 8);
        for &e in &es.e {
            assert!((e - 2.0).abs() <= 1e-12);
        }
        assert!(es.drift <= 1e-12);
    }

    #[test]
    fn energy_drift_variational_vs_differential() {
        // short version of the long-run comparison: even over [0, 20] the
        // forward scheme's drift dwarfs the variational one's
        let n = 2000;
        let ts = TimeScale::uniform(0.0, 20.0, n).unwrap();
        let p = Problem::Harmonic.potential();
        let l = Problem::Harmonic.lagrangian();
        let reference = reference_solution(&p, 1.0, 0.0, ts.points(), REFERENCE_RTOL).unwrap();
        let x1 = reference.values()[1];

        let vtr = solve_variational(&ts, &l, 1.0, x1, NewtonParams::default()).unwrap();
        let ve = energy_series(&vtr, &l).unwrap();
        let dtr = solve_differential_scheme(&ts, &p, 1.0, x1).unwrap();
        let de = energy_series(&dtr, &l).unwrap();

        assert!(ve.drift < 5e-3, "variational drift {}", ve.drift);
        assert!(de.drift > 10.0 * ve.drift, "ratio {}", de.drift / ve.drift);

        // variational drift oscillates rather than trending: E - E_0
        // takes both signs
        let dev: Vec<f64> = ve.e.iter().map(|&e| e - ve.e[0]).collect();
        assert!(dev.iter().any(|&d| d > 0.0) && dev.iter().any(|&d| d < 0.0));
    }
}
