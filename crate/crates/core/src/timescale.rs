//! Bounded discrete time scales and the delta calculus.
//!
//! A time scale is represented as a finite, strictly increasing point
//! sequence `t_0 < t_1 < ... < t_N`. Every point is isolated (except that
//! the maximum is its own forward jump), so the jump operators, graininess,
//! delta derivative, and delta integral are all exact finite formulas
//! rather than approximations. Dense stretches of a genuine time scale are
//! approximated by fine grids.
//!
//! Indices, not real time values, are the canonical handles: `sigma`,
//! `rho`, and `mu` take the index `k` of a point and real values are
//! derived from it. This avoids floating-point lookup ambiguity.

use crate::error::{Error, Result};

/// Strictly increasing finite point sequence `t_0 < ... < t_N` with
/// `N >= 2`, so that the twice-trimmed scale is nonempty.
///
/// `t_0 = a` is the minimum and `t_N = b` the maximum of the scale. The
/// graininess is positive at every index except `N`, where it is zero by
/// the convention `sigma(b) = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    points: Vec<f64>,
}

impl TimeScale {
    /// Builds a scale from an explicit point sequence.
    ///
    /// Rejects sequences that are shorter than 3 points, contain
    /// non-finite values, or are not strictly increasing.
    pub fn from_points(points: impl Into<Vec<f64>>) -> Result<Self> {
        let points = points.into();
        if points.len() < 3 {
            return Err(Error::Validation(format!(
                "a time scale needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Validation(format!(
                "time scale points must be finite, got {p}"
            )));
        }
        for k in 0..points.len() - 1 {
            if points[k + 1] <= points[k] {
                return Err(Error::Validation(format!(
                    "time scale points must be strictly increasing, \
                     points[{}] = {} and points[{}] = {}",
                    k,
                    points[k],
                    k + 1,
                    points[k + 1]
                )));
            }
        }
        Ok(TimeScale { points })
    }

    /// Uniform scale `t_k = a + k h` with `h = (b - a) / n` and `n >= 2`
    /// intervals. The last point is pinned to `b` exactly.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Validation(format!(
                "uniform scale needs finite b > a, got a = {a}, b = {b}"
            )));
        }
        if n < 2 {
            return Err(Error::Validation(format!(
                "uniform scale needs at least 2 intervals, got {n}"
            )));
        }
        let h = (b - a) / n as f64;
        let mut points: Vec<f64> = (0..=n).map(|k| a + k as f64 * h).collect();
        points[n] = b;
        Self::from_points(points)
    }

    /// Quantum scale `t_j = q^j` for `j = k_min ..= k_max`, `q > 1`.
    /// Its graininess is `mu(t_j) = (q - 1) t_j` at interior indices.
    pub fn qscale(q: f64, k_min: u32, k_max: u32) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::Validation(format!(
                "quantum scale needs q > 1, got {q}"
            )));
        }
        if k_max < k_min + 2 {
            return Err(Error::Validation(format!(
                "quantum scale needs at least 3 points, got k_min = {k_min}, k_max = {k_max}"
            )));
        }
        let points: Vec<f64> = (k_min..=k_max).map(|j| q.powi(j as i32)).collect();
        Self::from_points(points)
    }

    /// Number of points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least 3 points
    }

    /// Number of intervals, `N`.
    pub fn num_intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Minimum of the scale, `t_0`.
    pub fn a(&self) -> f64 {
        self.points[0]
    }

    /// Maximum of the scale, `t_N`.
    pub fn b(&self) -> f64 {
        *self.points.last().unwrap()
    }

    fn check_index(&self, k: usize, context: &'static str) -> Result<()> {
        if k >= self.points.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.points.len(),
                context,
            });
        }
        Ok(())
    }

    /// Forward jump: index and value of the next point, `(k, t_k)` itself
    /// at the maximum.
    pub fn sigma(&self, k: usize) -> Result<(usize, f64)> {
        self.check_index(k, "sigma")?;
        let j = (k + 1).min(self.points.len() - 1);
        Ok((j, self.points[j]))
    }

    /// Backward jump: index and value of the previous point, `(0, t_0)` at
    /// the minimum.
    pub fn rho(&self, k: usize) -> Result<(usize, f64)> {
        self.check_index(k, "rho")?;
        let j = k.saturating_sub(1);
        Ok((j, self.points[j]))
    }

    /// Graininess `mu(t_k) = sigma(t_k) - t_k`; zero at the last index.
    pub fn mu(&self, k: usize) -> Result<f64> {
        self.check_index(k, "mu")?;
        Ok(self.mu_at(k))
    }

    /// Unchecked graininess for internal loops with known-good indices.
    #[inline]
    pub(crate) fn mu_at(&self, k: usize) -> f64 {
        let j = (k + 1).min(self.points.len() - 1);
        self.points[j] - self.points[k]
    }

    /// True when all interval widths agree with `(b - a) / N` to a relative
    /// tolerance of `1e-9`, which absorbs the rounding noise of grids built
    /// by repeated addition.
    pub fn is_uniform(&self) -> bool {
        let h = (self.b() - self.a()) / self.num_intervals() as f64;
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    }

    /// Uniform step `h`, or a validation error for non-uniform scales.
    pub fn uniform_step(&self) -> Result<f64> {
        if !self.is_uniform() {
            return Err(Error::Validation("scale is not uniform".to_string()));
        }
        Ok((self.b() - self.a()) / self.num_intervals() as f64)
    }

    /// Delta derivative `(delta f)_k = (f_{k+1} - f_k) / mu(t_k)` of a
    /// full-domain grid function; defined on the trimmed scale (domain
    /// `Kappa`), i.e. everywhere except the last point.
    pub fn delta_derivative(&self, f: &GridFunction) -> Result<GridFunction> {
        f.check_against(self, "delta_derivative")?;
        if f.domain() != DomainKind::Full {
            return Err(Error::DomainMismatch(format!(
                "delta_derivative needs a full-domain function, got {:?}",
                f.domain()
            )));
        }
        let values = f
            .values()
            .windows(2)
            .enumerate()
            .map(|(k, w)| (w[1] - w[0]) / self.mu_at(k))
            .collect();
        Ok(GridFunction::new(values, DomainKind::Kappa))
    }

    /// Delta integral over `[t_from, t_to)`: the mu-weighted left-endpoint
    /// sum `sum_{k=from}^{to-1} mu(t_k) f_k`, which is the exact delta
    /// integral on a discrete scale. An empty range yields zero.
    pub fn delta_integral(
        &self,
        f: &GridFunction,
        from: usize,
        to_exclusive: usize,
    ) -> Result<f64> {
        f.check_against(self, "delta_integral")?;
        if from > to_exclusive {
            return Err(Error::Validation(format!(
                "delta_integral needs from <= to, got {from} > {to_exclusive}"
            )));
        }
        if to_exclusive > self.num_intervals() {
            return Err(Error::IndexOutOfRange {
                index: to_exclusive,
                len: self.num_intervals() + 1,
                context: "delta_integral",
            });
        }
        let lo = f.first_grid_index();
        if from < lo || to_exclusive > lo + f.len() {
            return Err(Error::DomainMismatch(format!(
                "delta_integral over {from}..{to_exclusive} but values cover {lo}..{}",
                lo + f.len()
            )));
        }
        let mut acc = 0.0;
        for k in from..to_exclusive {
            acc += self.mu_at(k) * f.values()[k - lo];
        }
        Ok(acc)
    }

    /// Delta integral from `a` up to `sigma(t_k)`, i.e. including the cell
    /// at `t_k`: `delta_integral(f, 0, k) + mu(t_k) f_k`. Valid for
    /// `k <= N - 1`.
    pub fn integrate_to_sigma(&self, f: &GridFunction, k: usize) -> Result<f64> {
        if k >= self.num_intervals() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.num_intervals(),
                context: "integrate_to_sigma",
            });
        }
        Ok(self.delta_integral(f, 0, k)? + self.mu_at(k) * f.values()[k - f.first_grid_index()])
    }
}

/// The trimmed index sets a grid function can live on.
///
/// On a scale with points `0..=N`: `Full` covers `0..=N`, `Kappa` drops the
/// last point, `Kappa2` the last two, and `KappaKappa` the first and last.
/// First derivatives live on `Kappa`, second-order difference equations on
/// `Kappa2`, and the backward-form equations on `KappaKappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Full,
    Kappa,
    Kappa2,
    KappaKappa,
}

impl DomainKind {
    /// Number of values a function on this domain carries over a scale
    /// with `n_points` points.
    pub fn expected_len(self, n_points: usize) -> usize {
        match self {
            DomainKind::Full => n_points,
            DomainKind::Kappa => n_points - 1,
            DomainKind::Kappa2 | DomainKind::KappaKappa => n_points - 2,
        }
    }

    /// Grid index of the first covered point.
    pub fn first_grid_index(self) -> usize {
        match self {
            DomainKind::KappaKappa => 1,
            _ => 0,
        }
    }
}

/// Real values sampled at time-scale points; the carrier of trajectories,
/// residuals, and energies.
///
/// `values[i]` belongs to grid index `first_grid_index() + i` of the scale
/// the function is paired with. Pairing is checked by every operation that
/// takes both a scale and a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    domain: DomainKind,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, domain: DomainKind) -> Self {
        GridFunction { values, domain }
    }

    /// Full-domain function from explicit values.
    pub fn full(values: Vec<f64>) -> Self {
        Self::new(values, DomainKind::Full)
    }

    /// Samples `f` at every point of the scale (full domain).
    pub fn sample(ts: &TimeScale, f: impl Fn(f64) -> f64) -> Self {
        Self::full(ts.points().iter().map(|&t| f(t)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid index of the first value.
    pub fn first_grid_index(&self) -> usize {
        self.domain.first_grid_index()
    }

    /// Largest absolute value; zero for an empty function.
    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_against(&self, ts: &TimeScale, context: &str) -> Result<()> {
        let expected = self.domain.expected_len(ts.len());
        if self.values.len() != expected {
            return Err(Error::DomainMismatch(format!(
                "{context}: {:?}-domain function over {} points needs {} values, got {}",
                self.domain,
                ts.len(),
                expected,
                self.values.len()
            )));
        }
        Ok(())
    }
}
