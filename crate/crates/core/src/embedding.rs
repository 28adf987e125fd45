//! The three discrete embeddings of the Euler-Lagrange equation, plus the
//! discrete action and its gradient.
//!
//! All three residuals measure "left side minus right side" of a stationarity
//! condition along a trajectory `x` on the full scale:
//!
//! * differential: forward-difference the momentum, `(p_{k+1} - p_k)/mu_k - d2_k`;
//! * variational/backward: backward-difference it, `(p_k - p_{k-1})/mu_k - d2_k`;
//! * integral: momentum minus running integral of `d2`, up to an unknown
//!   constant `c` estimated from the trajectory.
//!
//! Here `p_k = d3(t_k, x_k, (delta x)_k)` is the discrete momentum. The
//! variational and integral forms are two faces of the same equation (their
//! values are related by exact differencing), while the differential form is
//! a genuinely different scheme.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{apply_along, Lagrangian, LagrangianTerm};
use crate::timescale::{DomainKind, GridFunction, TimeScale};

/// Which embedding a residual came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Differential,
    VariationalBackward,
    Integral,
}

impl ResidualKind {
    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::Differential => "differential",
            ResidualKind::VariationalBackward => "variational_backward",
            ResidualKind::Integral => "integral",
        }
    }

    /// Trimmed domain the residual values live on.
    pub fn domain(self) -> DomainKind {
        match self {
            ResidualKind::Differential => DomainKind::Kappa2,
            ResidualKind::VariationalBackward => DomainKind::KappaKappa,
            ResidualKind::Integral => DomainKind::Kappa,
        }
    }
}

/// How to estimate the integral form's unknown constant from the raw values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CEstimateMode {
    /// `c = raw_0`: pins the residual to zero at the initial point.
    #[default]
    First,
    /// `c = mean(raw)`: least-squares-style centering.
    Mean,
}

impl std::str::FromStr for CEstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(CEstimateMode::First),
            "mean" => Ok(CEstimateMode::Mean),
            other => Err(Error::Config(format!(
                "unknown c-estimate mode {other:?}; expected first or mean"
            ))),
        }
    }
}

impl std::fmt::Display for CEstimateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CEstimateMode::First => "first",
            CEstimateMode::Mean => "mean",
        })
    }
}

/// Residual of one embedded Euler-Lagrange equation along a trajectory.
///
/// `values` lives on `kind.domain()`; `c_estimate` is set only for the
/// integral form.
#[derive(Debug, Clone)]
pub struct Residual {
    pub values: GridFunction,
    pub kind: ResidualKind,
    pub c_estimate: Option<f64>,
}

impl Residual {
    pub fn inf_norm(&self) -> f64 {
        self.values.inf_norm()
    }

    /// `sqrt(sum mu_k r_k^2)` with weights taken at each value's grid index.
    pub fn l2_norm_weighted(&self, ts: &TimeScale) -> Result<f64> {
        self.values.check_against(ts, "l2_norm_weighted")?;
        let k0 = self.values.first_grid_index();
        let mut sum = 0.0;
        for (j, &r) in self.values.values().iter().enumerate() {
            let mu = ts.mu(k0 + j)?;
            sum += mu * r * r;
        }
        Ok(sum.sqrt())
    }
}

/// Discrete momentum `p_k = d3(t_k, x_k, (delta x)_k)` and force term
/// `d2_k`, both on the once-trimmed scale.
fn momentum_and_force(
    ts: &TimeScale,
    l: &Lagrangian,
    x: &GridFunction,
) -> Result<(GridFunction, GridFunction)> {
    let p = apply_along(l, ts, x, LagrangianTerm::D3)?;
    let d2 = apply_along(l, ts, x, LagrangianTerm::D2)?;
    Ok((p, d2))
}

/// Forward-difference scheme: `r_k = (p_{k+1} - p_k)/mu_k - d2_k` on the
/// twice-trimmed scale.
pub fn residual_differential(ts: &TimeScale, l: &Lagrangian, x: &GridFunction) -> Result<Residual> {
    let (p, d2) = momentum_and_force(ts, l, x)?;
    let p = p.values();
    let d2 = d2.values();
    let values = (0..ts.len() - 2)
        .map(|k| (p[k + 1] - p[k]) / ts.mu_at(k) - d2[k])
        .collect();
    Ok(Residual {
        values: GridFunction::new(values, DomainKind::Kappa2),
        kind: ResidualKind::Differential,
        c_estimate: None,
    })
}

/// Backward-difference scheme: `r_k = (p_k - p_{k-1})/mu_k - d2_k` at
/// interior points.
pub fn residual_variational_backward(
    ts: &TimeScale,
    l: &Lagrangian,
    x: &GridFunction,
) -> Result<Residual> {
    let (p, d2) = momentum_and_force(ts, l, x)?;
    let p = p.values();
    let d2 = d2.values();
    let values = (1..ts.len() - 1)
        .map(|k| (p[k] - p[k - 1]) / ts.mu_at(k) - d2[k])
        .collect();
    Ok(Residual {
        values: GridFunction::new(values, DomainKind::KappaKappa),
        kind: ResidualKind::VariationalBackward,
        c_estimate: None,
    })
}

/// Integral scheme: `raw_k = p_k - integral of d2 up to sigma(t_k)`, then
/// `r_k = raw_k - c` with `c` estimated per `c_mode`.
pub fn residual_integral(
    ts: &TimeScale,
    l: &Lagrangian,
    x: &GridFunction,
    c_mode: CEstimateMode,
) -> Result<Residual> {
    let (p, d2) = momentum_and_force(ts, l, x)?;
    let p = p.values();
    let raw: Vec<f64> = (0..ts.len() - 1)
        .map(|k| Ok(p[k] - ts.integrate_to_sigma(&d2, k)?))
        .collect::<Result<_>>()?;
    let c = match c_mode {
        CEstimateMode::First => raw[0],
        CEstimateMode::Mean => raw.iter().sum::<f64>() / raw.len() as f64,
    };
    let values = raw.iter().map(|&r| r - c).collect();
    Ok(Residual {
        values: GridFunction::new(values, DomainKind::Kappa),
        kind: ResidualKind::Integral,
        c_estimate: Some(c),
    })
}

/// Discrete action `sum mu_k L(t_k, x_k, (delta x)_k)`.
pub fn action(ts: &TimeScale, l: &Lagrangian, x: &GridFunction) -> Result<f64> {
    let lagr = apply_along(l, ts, x, LagrangianTerm::Eval)?;
    ts.delta_integral(&lagr, 0, ts.len() - 1)
}

/// The sigma-composed functional `sum mu_k L(t_k, x_{k+1}, (delta x)_k)`
/// found elsewhere in the literature; provided for comparison only.
pub fn action_usual(ts: &TimeScale, l: &Lagrangian, x: &GridFunction) -> Result<f64> {
    let dx = ts.delta_derivative(x)?;
    let sum = dx
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| ts.mu_at(k) * l.eval(ts.points()[k], x.values()[k + 1], v))
        .sum();
    Ok(sum)
}

/// Gradient of [`action`] with respect to the interior values `x_k`
/// (endpoints held fixed):
/// `g_k = mu_k d2_k + p_{k-1} - p_k`.
///
/// Identically `-mu_k` times the backward residual, which is how
/// stationarity of the action and the integral-form equation say the
/// same thing.
pub fn action_gradient(ts: &TimeScale, l: &Lagrangian, x: &GridFunction) -> Result<GridFunction> {
    let (p, d2) = momentum_and_force(ts, l, x)?;
    let p = p.values();
    let d2 = d2.values();
    let values = (1..ts.len() - 1)
        .map(|k| ts.mu_at(k) * d2[k] + p[k - 1] - p[k])
        .collect();
    Ok(GridFunction::new(values, DomainKind::KappaKappa))
}
