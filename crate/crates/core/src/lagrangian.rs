//! Lagrangians `L(t, x, v)` with their partial derivatives, built-in
//! mechanical problems, and finite-difference validation of user-supplied
//! derivatives.
//!
//! State is scalar: all built-in problems are one-dimensional mechanical
//! systems `L = v^2/2 - U(x)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timescale::{DomainKind, GridFunction, TimeScale};

type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step for a central difference around `x`, balanced between truncation
/// and rounding error.
fn fd_step(x: f64) -> f64 {
    f64::EPSILON.sqrt() * (1.0 + x.abs())
}

/// A Lagrangian `L(t, x, v)` bundled with its first partials
/// `d2 = dL/dx` and `d3 = dL/dv`, and optionally the second partials
/// `d33 = d²L/dv²` and `d23 = d²L/dxdv` used by Newton stepping.
///
/// The function fields are pure and immutable, so a `Lagrangian` can be
/// cloned cheaply and shared across threads.
#[derive(Clone)]
pub struct Lagrangian {
    eval: Fn3,
    d2: Fn3,
    d3: Fn3,
    d33: Option<Fn3>,
    d23: Option<Fn3>,
}

impl Lagrangian {
    pub fn new(
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lagrangian {
            eval: Arc::new(eval),
            d2: Arc::new(d2),
            d3: Arc::new(d3),
            d33: None,
            d23: None,
        }
    }

    pub fn with_d33(mut self, d33: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d33 = Some(Arc::new(d33));
        self
    }

    pub fn with_d23(mut self, d23: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d23 = Some(Arc::new(d23));
        self
    }

    /// `L(t, x, v)`.
    pub fn eval(&self, t: f64, x: f64, v: f64) -> f64 {
        (self.eval)(t, x, v)
    }

    /// `dL/dx`.
    pub fn d2(&self, t: f64, x: f64, v: f64) -> f64 {
        (self.d2)(t, x, v)
    }

    /// `dL/dv`.
    pub fn d3(&self, t: f64, x: f64, v: f64) -> f64 {
        (self.d3)(t, x, v)
    }

    /// `d²L/dv²`: analytic when supplied, otherwise a central difference
    /// of `d3` in `v`.
    pub fn d33(&self, t: f64, x: f64, v: f64) -> f64 {
        match &self.d33 {
            Some(f) => f(t, x, v),
            None => {
                let h = fd_step(v);
                (self.d3(t, x, v + h) - self.d3(t, x, v - h)) / (2.0 * h)
            }
        }
    }

    /// `d²L/dxdv`: analytic when supplied, otherwise a central difference
    /// of `d3` in `x`.
    pub fn d23(&self, t: f64, x: f64, v: f64) -> f64 {
        match &self.d23 {
            Some(f) => f(t, x, v),
            None => {
                let h = fd_step(x);
                (self.d3(t, x + h, v) - self.d3(t, x - h, v)) / (2.0 * h)
            }
        }
    }

    pub fn has_analytic_d33(&self) -> bool {
        self.d33.is_some()
    }

    pub fn has_analytic_d23(&self) -> bool {
        self.d23.is_some()
    }
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lagrangian")
            .field("d33", &self.d33.is_some())
            .field("d23", &self.d23.is_some())
            .finish()
    }
}

/// Potential energy `U(x)` with its derivative `U'(x)`.
#[derive(Clone)]
pub struct Potential {
    u: Fn1,
    du: Fn1,
}

impl Potential {
    pub fn new(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Potential {
            u: Arc::new(u),
            du: Arc::new(du),
        }
    }

    pub fn u(&self, x: f64) -> f64 {
        (self.u)(x)
    }

    pub fn du(&self, x: f64) -> f64 {
        (self.du)(x)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Potential")
    }
}

/// Mechanical Lagrangian `L(t, x, v) = v^2/2 - U(x)` with exact partials:
/// `d2 = -U'(x)`, `d3 = v`, `d33 = 1`, `d23 = 0`.
pub fn mechanical(p: &Potential) -> Lagrangian {
    let u = p.u.clone();
    let du = p.du.clone();
    Lagrangian::new(
        move |_t, x, v| 0.5 * v * v - u(x),
        move |_t, x, _v| -du(x),
        |_t, _x, v| v,
    )
    .with_d33(|_t, _x, _v| 1.0)
    .with_d23(|_t, _x, _v| 0.0)
}

/// Built-in problems addressable by name from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Free particle, `U = 0`.
    Free,
    /// Harmonic oscillator, `U = x^2/2`.
    Harmonic,
    /// Quartic oscillator, `U = x^4/4`.
    Quartic,
    /// Pendulum, `U = 1 - cos x`.
    Pendulum,
}

impl Problem {
    pub const ALL: [Problem; 4] = [
        Problem::Free,
        Problem::Harmonic,
        Problem::Quartic,
        Problem::Pendulum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Free => "free",
            Problem::Harmonic => "harmonic",
            Problem::Quartic => "quartic",
            Problem::Pendulum => "pendulum",
        }
    }

    pub fn potential(self) -> Potential {
        match self {
            Problem::Free => Potential::new(|_| 0.0, |_| 0.0),
            Problem::Harmonic => Potential::new(|x| 0.5 * x * x, |x| x),
            Problem::Quartic => Potential::new(|x| 0.25 * x.powi(4), |x| x.powi(3)),
            Problem::Pendulum => Potential::new(|x| 1.0 - x.cos(), |x| x.sin()),
        }
    }

    pub fn lagrangian(self) -> Lagrangian {
        mechanical(&self.potential())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Problem::Free),
            "harmonic" => Ok(Problem::Harmonic),
            "quartic" => Ok(Problem::Quartic),
            "pendulum" => Ok(Problem::Pendulum),
            other => Err(Error::Config(format!(
                "unknown problem {other:?}; known problems: free, harmonic, quartic, pendulum"
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest deviation between an analytic partial and its central-difference
/// check, with the tolerance it was compared against.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartialCheck {
    pub max_deviation: f64,
    pub tol: f64,
}

impl PartialCheck {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tol
    }
}

/// Outcome of [`check_partials`]: one entry per supplied partial.
#[derive(Debug, Clone, Serialize)]
pub struct PartialsReport {
    pub d2: PartialCheck,
    pub d3: PartialCheck,
    pub d33: Option<PartialCheck>,
    pub d23: Option<PartialCheck>,
    pub samples: usize,
}

impl PartialsReport {
    pub fn passed(&self) -> bool {
        self.d2.passed()
            && self.d3.passed()
            && self.d33.is_none_or(|c| c.passed())
            && self.d23.is_none_or(|c| c.passed())
    }
}

/// Compares the supplied partials of `l` against central differences of
/// `eval` (and of `d3` for the second partials) at each sample point.
///
/// Failures are carried in the report, not returned as errors.
pub fn check_partials(
    l: &Lagrangian,
    samples: &[(f64, f64, f64)],
    tol: f64,
) -> Result<PartialsReport> {
    if samples.is_empty() {
        return Err(Error::Validation(
            "check_partials needs at least one sample".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation(format!(
            "check_partials needs tol > 0, got {tol}"
        )));
    }

    let mut dev2: f64 = 0.0;
    let mut dev3: f64 = 0.0;
    let mut dev33: f64 = 0.0;
    let mut dev23: f64 = 0.0;
    for &(t, x, v) in samples {
        let hx = fd_step(x);
        let hv = fd_step(v);
        let fd2 = (l.eval(t, x + hx, v) - l.eval(t, x - hx, v)) / (2.0 * hx);
        let fd3 = (l.eval(t, x, v + hv) - l.eval(t, x, v - hv)) / (2.0 * hv);
        dev2 = dev2.max((l.d2(t, x, v) - fd2).abs());
        dev3 = dev3.max((l.d3(t, x, v) - fd3).abs());
        if l.has_analytic_d33() {
            let fd33 = (l.d3(t, x, v + hv) - l.d3(t, x, v - hv)) / (2.0 * hv);
            dev33 = dev33.max((l.d33(t, x, v) - fd33).abs());
        }
        if l.has_analytic_d23() {
            let fd23 = (l.d3(t, x + hx, v) - l.d3(t, x - hx, v)) / (2.0 * hx);
            dev23 = dev23.max((l.d23(t, x, v) - fd23).abs());
        }
    }

    Ok(PartialsReport {
        d2: PartialCheck {
            max_deviation: dev2,
            tol,
        },
        d3: PartialCheck {
            max_deviation: dev3,
            tol,
        },
        d33: l.has_analytic_d33().then_some(PartialCheck {
            max_deviation: dev33,
            tol,
        }),
        d23: l.has_analytic_d23().then_some(PartialCheck {
            max_deviation: dev23,
            tol,
        }),
        samples: samples.len(),
    })
}

/// Which component of a Lagrangian to evaluate along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianTerm {
    Eval,
    D2,
    D3,
}

/// Evaluates `term(t_k, x_k, (delta x)_k)` along a full-domain trajectory,
/// yielding a function on the trimmed scale (domain `Kappa`).
///
/// This lifts the pointwise Lagrangian to an operator on grid functions,
/// with the delta derivative standing in for the velocity argument.
pub fn apply_along(
    l: &Lagrangian,
    ts: &TimeScale,
    x: &GridFunction,
    term: LagrangianTerm,
) -> Result<GridFunction> {
    let dx = ts.delta_derivative(x)?;
    let values = dx
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let t = ts.points()[k];
            let xk = x.values()[k];
            match term {
                LagrangianTerm::Eval => l.eval(t, xk, v),
                LagrangianTerm::D2 => l.d2(t, xk, v),
                LagrangianTerm::D3 => l.d3(t, xk, v),
            }
        })
        .collect();
    Ok(GridFunction::new(values, DomainKind::Kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mechanical_partials() {
        let free = Problem::Free.lagrangian();
        assert_eq!(free.eval(0.0, 1.0, 3.0), 4.5);

        let harmonic = Problem::Harmonic.lagrangian();
        assert_eq!(harmonic.d2(0.0, 2.0, 0.0), -2.0);
        assert_eq!(harmonic.d3(0.0, 0.0, 1.5), 1.5);
        assert_eq!(harmonic.d33(0.0, 0.3, -0.7), 1.0);
        assert_eq!(harmonic.d23(0.0, 0.3, -0.7), 0.0);
    }

    #[test]
    fn builtin_partials_pass_validation() {
        // deterministic pseudo-random samples in [-3, 3]^3, where the
        // central-difference oracle stays well-conditioned at tol 1e-6
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
        };
        let samples: Vec<(f64, f64, f64)> = (0..100).map(|_| (next(), next(), next())).collect();
        for problem in Problem::ALL {
            let report = check_partials(&problem.lagrangian(), &samples, 1e-6).unwrap();
            assert!(report.passed(), "{problem}: {report:?}");
        }
    }

    #[test]
    fn check_partials_detects_wrong_sign() {
        let p = Problem::Harmonic.potential();
        let broken = Lagrangian::new(
            {
                let u = p.clone();
                move |_t, x, v| 0.5 * v * v - u.u(x)
            },
            move |_t, x, _v| p.du(x), // sign flipped
            |_t, _x, v| v,
        );
        let report = check_partials(&broken, &[(0.0, 2.0, 1.0)], 1e-6).unwrap();
        assert!(!report.passed());
        // deviation is |d2 - (-d2)| = 2|d2| = 2*|x| at the sample
        assert!((report.d2.max_deviation - 4.0).abs() < 1e-4);
        assert!(report.d3.passed());
    }

    #[test]
    fn check_partials_rejects_bad_preconditions() {
        let l = Problem::Free.lagrangian();
        assert!(check_partials(&l, &[], 1e-6).is_err());
        assert!(check_partials(&l, &[(0.0, 0.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn finite_difference_fallback_for_second_partials() {
        // plain constructor: no analytic d33/d23
        let l = Lagrangian::new(
            |_t, x, v| 0.5 * v * v - 0.5 * x * x,
            |_t, x, _v| -x,
            |_t, _x, v| v,
        );
        assert!(!l.has_analytic_d33());
        assert!((l.d33(0.0, 0.4, 1.3) - 1.0).abs() < 1e-6);
        assert!(l.d23(0.0, 0.4, 1.3).abs() < 1e-6);
    }

    #[test]
    fn apply_along_examples() {
        let ts = TimeScale::uniform(0.0, 1.0, 4).unwrap();
        let x = GridFunction::sample(&ts, |t| t);

        let free = Problem::Free.lagrangian();
        let g = apply_along(&free, &ts, &x, LagrangianTerm::Eval).unwrap();
        assert_eq!(g.domain(), DomainKind::Kappa);
        for &v in g.values() {
            assert!((v - 0.5).abs() < 1e-12);
        }

        let harmonic = Problem::Harmonic.lagrangian();
        let zero = GridFunction::sample(&ts, |_| 0.0);
        let d2 = apply_along(&harmonic, &ts, &zero, LagrangianTerm::D2).unwrap();
        assert!(d2.values().iter().all(|&v| v == 0.0));

        let ts2 = TimeScale::uniform(0.0, 1.0, 2).unwrap();
        let x2 = GridFunction::sample(&ts2, |t| t);
        let d3 = apply_along(&harmonic, &ts2, &x2, LagrangianTerm::D3).unwrap();
        for &v in d3.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn problem_names_round_trip() {
        for p in Problem::ALL {
            assert_eq!(p.name().parse::<Problem>().unwrap(), p);
        }
        assert!("lorenz".parse::<Problem>().is_err());
    }
}
