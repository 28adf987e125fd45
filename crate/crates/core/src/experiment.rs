//! Reproducible experiment plumbing: scale specifications, seeded random
//! scales, layered configuration, and the five command runners behind the
//! CLI.
//!
//! Configuration is resolved in three layers: built-in defaults, then an
//! optional JSON config file, then command-line flags, later layers
//! overriding earlier ones. Identical resolved configs (including random
//! seeds) produce byte-identical output files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{
    action_gradient, residual_differential, residual_integral, residual_variational_backward,
    CEstimateMode,
};
use crate::error::{Error, Result};
use crate::io;
use crate::lagrangian::Problem;
use crate::solver::{
    convergence_order, energy_series, reference_solution, reference_trajectory,
    solve_differential_scheme, solve_variational, NewtonParams, Scheme, Trajectory, REFERENCE_RTOL,
};
use crate::timescale::{GridFunction, TimeScale};

/// Numerical thresholds with their defaults; every value can be overridden
/// from a config file.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Newton acceptance on the variational step equation.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Pass bound on gradient and integral-residual norms in coherence runs.
    pub coherence_threshold: f64,
    /// Reference oracle error per unit time.
    pub reference_rtol: f64,
    /// Accepted slope band for the differential scheme (order one).
    pub band_differential: [f64; 2],
    /// Accepted slope band for the variational scheme (order two).
    pub band_variational: [f64; 2],
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton_tol: 1e-12,
            newton_max_iter: 50,
            coherence_threshold: 1e-9,
            reference_rtol: REFERENCE_RTOL,
            band_differential: [0.85, 1.15],
            band_variational: [1.85, 2.15],
        }
    }
}

impl Tolerances {
    pub fn newton(&self) -> NewtonParams {
        NewtonParams {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
        }
    }

    pub fn band(&self, scheme: Scheme) -> Option<[f64; 2]> {
        match scheme {
            Scheme::Differential => Some(self.band_differential),
            Scheme::Variational => Some(self.band_variational),
            Scheme::Reference => None,
        }
    }
}

/// The five experiment commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Order,
    Coherence,
    Energy,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Order => "order",
            Command::Coherence => "coherence",
            Command::Energy => "energy",
            Command::Compare => "compare",
        }
    }
}

/// How to build the time scale: `uniform:a,b,N`, `qscale:q,kmin,kmax`,
/// `random:n,mumin,mumax,seed`, or `file:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleSpec {
    Uniform {
        a: f64,
        b: f64,
        n: usize,
    },
    QScale {
        q: f64,
        k_min: u32,
        k_max: u32,
    },
    Random {
        n: usize,
        mu_min: f64,
        mu_max: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

impl ScaleSpec {
    pub fn build(&self) -> Result<TimeScale> {
        match self {
            ScaleSpec::Uniform { a, b, n } => TimeScale::uniform(*a, *b, *n),
            ScaleSpec::QScale { q, k_min, k_max } => TimeScale::qscale(*q, *k_min, *k_max),
            ScaleSpec::Random {
                n,
                mu_min,
                mu_max,
                seed,
            } => random_scale(*n, *mu_min, *mu_max, *seed),
            ScaleSpec::File { path } => io::read_timescale(path),
        }
    }
}

impl FromStr for ScaleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            Error::Config(format!(
                "bad scale spec {s:?}; expected uniform:a,b,N | qscale:q,kmin,kmax | \
                 random:n,mumin,mumax,seed | file:PATH"
            ))
        })?;
        let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
        let parse = |i: usize, what: &str| -> Result<f64> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad {what} in scale spec {s:?}")))
        };
        match kind {
            "uniform" => {
                if fields.len() != 3 {
                    return Err(Error::Config(format!(
                        "uniform scale spec needs a,b,N: {s:?}"
                    )));
                }
                let n = fields[2]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad N in scale spec {s:?}")))?;
                Ok(ScaleSpec::Uniform {
                    a: parse(0, "a")?,
                    b: parse(1, "b")?,
                    n,
                })
            }
            "qscale" => {
                if fields.len() != 3 {
                    return Err(Error::Config(format!(
                        "qscale spec needs q,kmin,kmax: {s:?}"
                    )));
                }
                let k_min = fields[1]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad kmin in scale spec {s:?}")))?;
                let k_max = fields[2]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad kmax in scale spec {s:?}")))?;
                Ok(ScaleSpec::QScale {
                    q: parse(0, "q")?,
                    k_min,
                    k_max,
                })
            }
            "random" => {
                if fields.len() != 4 {
                    return Err(Error::Config(format!(
                        "random scale spec needs n,mumin,mumax,seed: {s:?}"
                    )));
                }
                let n = fields[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad n in scale spec {s:?}")))?;
                let seed = fields[3]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed in scale spec {s:?}")))?;
                Ok(ScaleSpec::Random {
                    n,
                    mu_min: parse(1, "mumin")?,
                    mu_max: parse(2, "mumax")?,
                    seed,
                })
            }
            "file" => Ok(ScaleSpec::File {
                path: PathBuf::from(rest),
            }),
            other => Err(Error::Config(format!(
                "unknown scale kind {other:?} in {s:?}"
            ))),
        }
    }
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleSpec::Uniform { a, b, n } => write!(f, "uniform:{a},{b},{n}"),
            ScaleSpec::QScale { q, k_min, k_max } => write!(f, "qscale:{q},{k_min},{k_max}"),
            ScaleSpec::Random {
                n,
                mu_min,
                mu_max,
                seed,
            } => {
                write!(f, "random:{n},{mu_min},{mu_max},{seed}")
            }
            ScaleSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl Serialize for ScaleSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Scale with `n` points starting at 0, graininesses drawn uniformly from
/// `[mu_min, mu_max]` by a seeded generator. Fully determined by `seed`.
pub fn random_scale(n: usize, mu_min: f64, mu_max: f64, seed: u64) -> Result<TimeScale> {
    if n < 3 {
        return Err(Error::Validation(format!(
            "random scale needs at least 3 points, got {n}"
        )));
    }
    if !(mu_min > 0.0) || !(mu_max >= mu_min) || !mu_max.is_finite() {
        return Err(Error::Validation(format!(
            "random scale needs 0 < mumin <= mumax, got [{mu_min}, {mu_max}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    let mut points = Vec::with_capacity(n);
    points.push(t);
    for _ in 1..n {
        t += rng.random_range(mu_min..=mu_max);
        points.push(t);
    }
    TimeScale::from_points(points)
}

/// Adds seeded uniform noise in `[-magnitude, magnitude]` to every interior
/// value, leaving the endpoints fixed.
pub fn perturb_interior(x: &GridFunction, magnitude: f64, seed: u64) -> Result<GridFunction> {
    if !(magnitude > 0.0) || !magnitude.is_finite() {
        return Err(Error::Validation(format!(
            "perturbation magnitude must be positive and finite, got {magnitude}"
        )));
    }
    if x.len() < 3 {
        return Err(Error::Validation(
            "perturbation needs at least one interior point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = x.values().to_vec();
    let last = values.len() - 1;
    for v in &mut values[1..last] {
        *v += rng.random_range(-magnitude..=magnitude);
    }
    Ok(GridFunction::new(values, x.domain()))
}

/// Partial tolerance overrides from a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesPatch {
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub coherence_threshold: Option<f64>,
    pub reference_rtol: Option<f64>,
    pub band_differential: Option<[f64; 2]>,
    pub band_variational: Option<[f64; 2]>,
}

impl TolerancesPatch {
    fn apply(&self, t: &mut Tolerances) {
        if let Some(v) = self.newton_tol {
            t.newton_tol = v;
        }
        if let Some(v) = self.newton_max_iter {
            t.newton_max_iter = v;
        }
        if let Some(v) = self.coherence_threshold {
            t.coherence_threshold = v;
        }
        if let Some(v) = self.reference_rtol {
            t.reference_rtol = v;
        }
        if let Some(v) = self.band_differential {
            t.band_differential = v;
        }
        if let Some(v) = self.band_variational {
            t.band_variational = v;
        }
    }
}

/// One configuration layer: every field optional, unset fields defer to
/// lower layers. This is both the config-file schema and the shape of the
/// command-line flag set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub problem: Option<String>,
    pub scale: Option<String>,
    pub scheme: Option<String>,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub v0: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    /// Shorthand: Newton tolerance, except for the coherence command where
    /// it sets the pass threshold.
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub perturb: Option<f64>,
    pub c_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub tolerances: Option<TolerancesPatch>,
}

impl ConfigPatch {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config file {}: {e}", path.display())))
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub problem: Problem,
    pub scale: ScaleSpec,
    pub scheme: Scheme,
    pub x0: f64,
    /// Unset means: seed from the reference solution at `t_1`.
    pub x1: Option<f64>,
    pub v0: f64,
    pub h_list: Vec<f64>,
    pub seed: u64,
    pub perturb: Option<f64>,
    pub c_mode: CEstimateMode,
    pub out_dir: PathBuf,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Defaults, then each patch in order (later wins).
    pub fn resolve(command: Command, layers: &[&ConfigPatch]) -> Result<Self> {
        let mut problem = "harmonic".to_string();
        let mut scale = "uniform:0,1,100".to_string();
        let mut scheme = "variational".to_string();
        let mut x0 = 1.0;
        let mut x1 = None;
        let mut v0 = 0.0;
        let mut h_list = vec![0.1, 0.05, 0.025, 0.0125];
        let mut seed = 0;
        let mut perturb = None;
        let mut c_mode = "first".to_string();
        let mut out_dir = PathBuf::from("out");
        let mut tolerances = Tolerances::default();
        let mut tol_shorthand = None;

        for layer in layers {
            if let Some(v) = &layer.problem {
                problem = v.clone();
            }
            if let Some(v) = &layer.scale {
                scale = v.clone();
            }
            if let Some(v) = &layer.scheme {
                scheme = v.clone();
            }
            if let Some(v) = layer.x0 {
                x0 = v;
            }
            if let Some(v) = layer.x1 {
                x1 = Some(v);
            }
            if let Some(v) = layer.v0 {
                v0 = v;
            }
            if let Some(v) = &layer.h_list {
                h_list = v.clone();
            }
            if let Some(v) = layer.tol {
                tol_shorthand = Some(v);
            }
            if let Some(v) = layer.seed {
                seed = v;
            }
            if let Some(v) = layer.perturb {
                perturb = Some(v);
            }
            if let Some(v) = &layer.c_mode {
                c_mode = v.clone();
            }
            if let Some(v) = &layer.out {
                out_dir = v.clone();
            }
            if let Some(t) = &layer.tolerances {
                t.apply(&mut tolerances);
            }
        }

        if let Some(tol) = tol_shorthand {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("--tol must be positive, got {tol}")));
            }
            if command == Command::Coherence {
                tolerances.coherence_threshold = tol;
            } else {
                tolerances.newton_tol = tol;
            }
        }

        Ok(ExperimentConfig {
            command,
            problem: problem.parse()?,
            scale: scale.parse()?,
            scheme: scheme.parse()?,
            x0,
            x1,
            v0,
            h_list,
            seed,
            perturb,
            c_mode: c_mode.parse()?,
            out_dir,
            tolerances,
        })
    }

    /// Resolves the startup value: explicit `x1` wins, otherwise the
    /// reference solution at `t_1`.
    fn resolve_x1(&self, ts: &TimeScale) -> Result<f64> {
        if let Some(x1) = self.x1 {
            return Ok(x1);
        }
        let grid = [ts.points()[0], ts.points()[1]];
        let x = reference_solution(
            &self.problem.potential(),
            self.x0,
            self.v0,
            &grid,
            self.tolerances.reference_rtol,
        )?;
        Ok(x.values()[1])
    }

    fn ensure_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }

    fn solve(&self, ts: &TimeScale) -> Result<Trajectory> {
        let x1 = self.resolve_x1(ts)?;
        let mut tr = match self.scheme {
            Scheme::Differential => {
                solve_differential_scheme(ts, &self.problem.potential(), self.x0, x1)?
            }
            Scheme::Variational => solve_variational(
                ts,
                &self.problem.lagrangian(),
                self.x0,
                x1,
                self.tolerances.newton(),
            )?,
            Scheme::Reference => reference_trajectory(
                ts,
                &self.problem.potential(),
                self.x0,
                self.v0,
                self.tolerances.reference_rtol,
            )?,
        };
        tr.problem = Some(self.problem.name().to_string());
        Ok(tr)
    }
}

/// What a command run produced, for exit-code mapping and console output.
#[derive(Debug)]
pub enum Outcome {
    Simulate(SimulateOutcome),
    Order(OrderOutcome),
    Coherence(CoherenceOutcome),
    Energy(EnergyOutcome),
    Compare(CompareOutcome),
}

impl Outcome {
    /// 0 on success, 3 when a configured acceptance band or threshold was
    /// missed (validation and solver failures surface as errors instead).
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Order(o) if o.in_band == Some(false) => 3,
            Outcome::Coherence(o) if !o.pass => 3,
            _ => 0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Outcome::Simulate(o) => {
                let norms: Vec<String> = o
                    .residuals
                    .iter()
                    .map(|r| format!("{} {:.3e}", r.kind, r.inf_norm))
                    .collect();
                format!(
                    "simulate: {} points, residual inf-norms: {}",
                    o.points,
                    norms.join(", ")
                )
            }
            Outcome::Order(o) => match (o.degenerate, o.slope, o.in_band) {
                (true, _, _) => {
                    "order: errors at rounding level, slope fit degenerate (warning)".to_string()
                }
                (_, Some(s), Some(true)) => {
                    format!("order: slope {s:.4} within band [{}, {}]", o.band[0], o.band[1])
                }
                (_, Some(s), _) => {
                    format!("order: slope {s:.4} OUTSIDE band [{}, {}]", o.band[0], o.band[1])
                }
                _ => "order: no slope".to_string(),
            },
            Outcome::Coherence(o) => format!(
                "coherence: gradient {:.3e}, integral {:.3e}, differential {:.3e}, threshold {:.1e} => {}",
                o.gradient_inf_norm,
                o.integral_inf_norm,
                o.differential_inf_norm,
                o.threshold,
                if o.pass { "pass" } else { "FAIL" }
            ),
            Outcome::Energy(o) => match o.ratio {
                Some(r) => format!(
                    "energy: drift differential {:.3e}, variational {:.3e}, ratio {r:.1}",
                    o.drift_differential, o.drift_variational
                ),
                None => format!(
                    "energy: drift differential {:.3e}, variational {:.3e} (no drift, ratio undefined)",
                    o.drift_differential, o.drift_variational
                ),
            },
            Outcome::Compare(o) => format!(
                "compare: max errors differential {:.3e}, variational {:.3e}",
                o.max_err_differential, o.max_err_variational
            ),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateOutcome {
    pub command: Command,
    pub problem: Problem,
    pub scale: ScaleSpec,
    pub scheme: Scheme,
    pub x0: f64,
    pub x1: f64,
    pub points: usize,
    pub residuals: Vec<io::ResidualSummary>,
}

/// Runs the selected scheme and writes `trajectory.csv`, one residual CSV
/// per embedding, and `summary.json`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutcome> {
    let ts = cfg.scale.build()?;
    let l = cfg.problem.lagrangian();
    let tr = cfg.solve(&ts)?;
    cfg.ensure_out_dir()?;
    io::write_trajectory_csv(&cfg.out_dir.join("trajectory.csv"), &tr, &l)?;

    let rd = residual_differential(&ts, &l, &tr.x)?;
    let rv = residual_variational_backward(&ts, &l, &tr.x)?;
    let ri = residual_integral(&ts, &l, &tr.x, cfg.c_mode)?;
    io::write_residual_csv(&cfg.out_dir.join("residual_differential.csv"), &ts, &rd)?;
    io::write_residual_csv(
        &cfg.out_dir.join("residual_variational_backward.csv"),
        &ts,
        &rv,
    )?;
    io::write_residual_csv(&cfg.out_dir.join("residual_integral.csv"), &ts, &ri)?;

    let outcome = SimulateOutcome {
        command: cfg.command,
        problem: cfg.problem,
        scale: cfg.scale.clone(),
        scheme: cfg.scheme,
        x0: tr.x.values()[0],
        x1: tr.x.values()[1],
        points: ts.len(),
        residuals: vec![
            io::residual_summary(&rd, &ts)?,
            io::residual_summary(&rv, &ts)?,
            io::residual_summary(&ri, &ts)?,
        ],
    };
    io::write_json(&cfg.out_dir.join("summary.json"), &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
pub struct OrderOutcome {
    pub scheme: Scheme,
    pub problem: Problem,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: Option<f64>,
    pub degenerate: bool,
    pub band: [f64; 2],
    /// Absent when the fit is degenerate.
    pub in_band: Option<bool>,
}

/// Measures the convergence order on the interval of the (uniform) scale
/// spec; writes `order_report.json` and `order_loglog.csv`.
pub fn run_order(cfg: &ExperimentConfig) -> Result<OrderOutcome> {
    let ScaleSpec::Uniform { a, b, .. } = cfg.scale else {
        return Err(Error::Validation(
            "the order command takes its interval from a uniform scale spec; \
             pass --scale uniform:a,b,N"
                .into(),
        ));
    };
    let band = cfg.tolerances.band(cfg.scheme).ok_or_else(|| {
        Error::Validation(
            "the order command measures differential or variational, not reference".into(),
        )
    })?;
    let mut report = convergence_order(
        cfg.scheme,
        &cfg.problem.potential(),
        (a, b),
        cfg.x0,
        cfg.v0,
        &cfg.h_list,
    )?;
    report.problem = Some(cfg.problem.name().to_string());

    let in_band = report.slope.map(|s| s >= band[0] && s <= band[1]);
    let outcome = OrderOutcome {
        scheme: report.scheme,
        problem: cfg.problem,
        steps: report.steps.clone(),
        errors: report.errors.clone(),
        slope: report.slope,
        degenerate: report.degenerate,
        band,
        in_band,
    };
    cfg.ensure_out_dir()?;
    io::write_json(&cfg.out_dir.join("order_report.json"), &outcome)?;
    io::write_loglog_csv(&cfg.out_dir.join("order_loglog.csv"), &report)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
pub struct CoherenceOutcome {
    pub problem: Problem,
    pub scale: ScaleSpec,
    pub threshold: f64,
    pub perturb: Option<f64>,
    pub gradient_inf_norm: f64,
    pub integral_inf_norm: f64,
    pub differential_inf_norm: f64,
    /// Gradient and integral norms both under the threshold.
    pub pass: bool,
}

/// Solves variationally, then checks that the action gradient and the
/// integral residual vanish together; also records the differential
/// residual, which does not vanish. Writes `coherence_report.json`.
pub fn run_coherence(cfg: &ExperimentConfig) -> Result<CoherenceOutcome> {
    let ts = cfg.scale.build()?;
    let l = cfg.problem.lagrangian();
    let x1 = cfg.resolve_x1(&ts)?;
    let tr = solve_variational(&ts, &l, cfg.x0, x1, cfg.tolerances.newton())?;
    let x = match cfg.perturb {
        Some(mag) => perturb_interior(&tr.x, mag, cfg.seed)?,
        None => tr.x,
    };

    let g = action_gradient(&ts, &l, &x)?;
    let ri = residual_integral(&ts, &l, &x, cfg.c_mode)?;
    let rd = residual_differential(&ts, &l, &x)?;
    let threshold = cfg.tolerances.coherence_threshold;
    let outcome = CoherenceOutcome {
        problem: cfg.problem,
        scale: cfg.scale.clone(),
        threshold,
        perturb: cfg.perturb,
        gradient_inf_norm: g.inf_norm(),
        integral_inf_norm: ri.inf_norm(),
        differential_inf_norm: rd.inf_norm(),
        pass: g.inf_norm() <= threshold && ri.inf_norm() <= threshold,
    };
    cfg.ensure_out_dir()?;
    io::write_json(&cfg.out_dir.join("coherence_report.json"), &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
pub struct EnergyOutcome {
    pub problem: Problem,
    pub scale: ScaleSpec,
    pub drift_differential: f64,
    pub drift_variational: f64,
    /// `drift_differential / drift_variational`; absent when the
    /// variational drift is exactly zero.
    pub ratio: Option<f64>,
}

/// Runs both schemes from the same startup data and writes one energy CSV
/// per scheme plus `energy_report.json`.
pub fn run_energy(cfg: &ExperimentConfig) -> Result<EnergyOutcome> {
    let ts = cfg.scale.build()?;
    let p = cfg.problem.potential();
    let l = cfg.problem.lagrangian();
    let x1 = cfg.resolve_x1(&ts)?;

    let dtr = solve_differential_scheme(&ts, &p, cfg.x0, x1)?;
    let vtr = solve_variational(&ts, &l, cfg.x0, x1, cfg.tolerances.newton())?;
    let de = energy_series(&dtr, &l)?;
    let ve = energy_series(&vtr, &l)?;

    let outcome = EnergyOutcome {
        problem: cfg.problem,
        scale: cfg.scale.clone(),
        drift_differential: de.drift,
        drift_variational: ve.drift,
        ratio: (ve.drift != 0.0).then(|| de.drift / ve.drift),
    };
    cfg.ensure_out_dir()?;
    io::write_energy_csv(&cfg.out_dir.join("energy_differential.csv"), &de)?;
    io::write_energy_csv(&cfg.out_dir.join("energy_variational.csv"), &ve)?;
    io::write_json(&cfg.out_dir.join("energy_report.json"), &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
pub struct CompareOutcome {
    pub problem: Problem,
    pub scale: ScaleSpec,
    pub max_err_differential: f64,
    pub max_err_variational: f64,
}

/// Runs both schemes and the reference from the same startup data and
/// writes the side-by-side `compare.csv`.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareOutcome> {
    let ts = cfg.scale.build()?;
    let p = cfg.problem.potential();
    let l = cfg.problem.lagrangian();
    let x1 = cfg.resolve_x1(&ts)?;

    let dtr = solve_differential_scheme(&ts, &p, cfg.x0, x1)?;
    let vtr = solve_variational(&ts, &l, cfg.x0, x1, cfg.tolerances.newton())?;
    let reference = reference_solution(
        &p,
        cfg.x0,
        cfg.v0,
        ts.points(),
        cfg.tolerances.reference_rtol,
    )?;

    let max_err = |x: &GridFunction| {
        x.values()
            .iter()
            .zip(reference.values())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0_f64, f64::max)
    };
    let outcome = CompareOutcome {
        problem: cfg.problem,
        scale: cfg.scale.clone(),
        max_err_differential: max_err(&dtr.x),
        max_err_variational: max_err(&vtr.x),
    };
    cfg.ensure_out_dir()?;
    io::write_compare_csv(
        &cfg.out_dir.join("compare.csv"),
        &ts,
        &dtr.x,
        &vtr.x,
        &reference,
    )?;
    Ok(outcome)
}

/// Dispatches on the command in the resolved config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    Ok(match cfg.command {
        Command::Simulate => Outcome::Simulate(run_simulate(cfg)?),
        Command::Order => Outcome::Order(run_order(cfg)?),
        Command::Coherence => Outcome::Coherence(run_coherence(cfg)?),
        Command::Energy => Outcome::Energy(run_energy(cfg)?),
        Command::Compare => Outcome::Compare(run_compare(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(json: &str) -> ConfigPatch {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn scale_specs_parse_and_round_trip() {
        let cases = [
            "uniform:0,1,100",
            "qscale:2,0,4",
            "random:50,0.01,0.05,7",
            "file:scales/my scale.csv",
        ];
        for s in cases {
            let spec: ScaleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.to_string().parse::<ScaleSpec>().unwrap(), spec);
        }
        assert!("uniform:0,1".parse::<ScaleSpec>().is_err());
        assert!("uniform:0,1,x".parse::<ScaleSpec>().is_err());
        assert!("grid:0,1,5".parse::<ScaleSpec>().is_err());
        assert!("uniform".parse::<ScaleSpec>().is_err());
    }

    #[test]
    fn random_scale_is_seeded_and_bounded() {
        let a = random_scale(50, 0.01, 0.05, 7).unwrap();
        let b = random_scale(50, 0.01, 0.05, 7).unwrap();
        assert_eq!(a.points(), b.points());
        let c = random_scale(50, 0.01, 0.05, 8).unwrap();
        assert_ne!(a.points(), c.points());

        assert_eq!(a.len(), 50);
        assert_eq!(a.points()[0], 0.0);
        for k in 0..a.len() - 1 {
            let mu = a.mu(k).unwrap();
            assert!((0.01..=0.05).contains(&mu), "mu_{k} = {mu}");
        }
        assert!(random_scale(2, 0.01, 0.05, 0).is_err());
        assert!(random_scale(10, 0.0, 0.05, 0).is_err());
    }

    #[test]
    fn perturbation_keeps_endpoints() {
        let ts = TimeScale::uniform(0.0, 1.0, 10).unwrap();
        let x = GridFunction::sample(&ts, |t| t);
        let y = perturb_interior(&x, 1e-3, 3).unwrap();
        assert_eq!(y.values()[0], x.values()[0]);
        assert_eq!(y.values()[10], x.values()[10]);
        let moved = x
            .values()
            .iter()
            .zip(y.values())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(moved, 9);
        let z = perturb_interior(&x, 1e-3, 3).unwrap();
        assert_eq!(y.values(), z.values());
    }

    #[test]
    fn config_layers_apply_in_order() {
        let file = patch(r#"{"problem": "quartic", "x0": 2.0, "seed": 5}"#);
        let cli = patch(r#"{"x0": 3.0}"#);
        let cfg = ExperimentConfig::resolve(Command::Simulate, &[&file, &cli]).unwrap();
        assert_eq!(cfg.problem, Problem::Quartic); // from file
        assert_eq!(cfg.x0, 3.0); // CLI wins
        assert_eq!(cfg.seed, 5); // from file
        assert_eq!(cfg.scheme, Scheme::Variational); // default
        assert_eq!(cfg.h_list, vec![0.1, 0.05, 0.025, 0.0125]); // default
    }

    #[test]
    fn tol_shorthand_targets_depend_on_command() {
        let cli = patch(r#"{"tol": 1e-7}"#);
        let sim = ExperimentConfig::resolve(Command::Simulate, &[&cli]).unwrap();
        assert_eq!(sim.tolerances.newton_tol, 1e-7);
        assert_eq!(sim.tolerances.coherence_threshold, 1e-9);
        let coh = ExperimentConfig::resolve(Command::Coherence, &[&cli]).unwrap();
        assert_eq!(coh.tolerances.coherence_threshold, 1e-7);
        assert_eq!(coh.tolerances.newton_tol, 1e-12);
    }

    #[test]
    fn config_rejects_unknown_fields_and_bad_values() {
        assert!(serde_json::from_str::<ConfigPatch>(r#"{"probblem": "free"}"#).is_err());
        let bad = patch(r#"{"problem": "lorenz"}"#);
        assert!(ExperimentConfig::resolve(Command::Simulate, &[&bad]).is_err());
        let bad_tol = patch(r#"{"tol": -1.0}"#);
        assert!(ExperimentConfig::resolve(Command::Simulate, &[&bad_tol]).is_err());
    }

    #[test]
    fn simulate_writes_coherent_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cli = patch(&format!(r#"{{"out": {:?}}}"#, dir.path().to_str().unwrap()));
        let cfg = ExperimentConfig::resolve(Command::Simulate, &[&cli]).unwrap();
        let outcome = run_simulate(&cfg).unwrap();
        // variational trajectory: integral residual vanishes to tolerance
        let integral = outcome
            .residuals
            .iter()
            .find(|r| r.kind == "integral")
            .unwrap();
        assert!(
            integral.inf_norm <= 1e-9,
            "integral norm {}",
            integral.inf_norm
        );
        for name in [
            "trajectory.csv",
            "residual_differential.csv",
            "residual_variational_backward.csv",
            "residual_integral.csv",
            "summary.json",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
    }

    #[test]
    fn order_flags_degenerate_free_particle() {
        let dir = tempfile::tempdir().unwrap();
        let cli = patch(&format!(
            r#"{{"problem": "free", "x0": 0.0, "v0": 1.0, "out": {:?}}}"#,
            dir.path().to_str().unwrap()
        ));
        let cfg = ExperimentConfig::resolve(Command::Order, &[&cli]).unwrap();
        let outcome = run_order(&cfg).unwrap();
        assert!(outcome.degenerate);
        assert_eq!(outcome.in_band, None);
        assert_eq!(Outcome::Order(outcome).exit_code(), 0);
    }

    #[test]
    fn coherence_passes_clean_and_fails_perturbed() {
        let dir = tempfile::tempdir().unwrap();
        let base = format!(
            r#"{{"scale": "random:50,0.01,0.05,7", "out": {:?}}}"#,
            dir.path().to_str().unwrap()
        );
        let cfg = ExperimentConfig::resolve(Command::Coherence, &[&patch(&base)]).unwrap();
        let clean = run_coherence(&cfg).unwrap();
        assert!(clean.pass, "{clean:?}");
        assert!(clean.differential_inf_norm >= 1e-3, "{clean:?}");

        let perturbed_patch = patch(r#"{"perturb": 1e-3}"#);
        let cfg = ExperimentConfig::resolve(Command::Coherence, &[&patch(&base), &perturbed_patch])
            .unwrap();
        let perturbed = run_coherence(&cfg).unwrap();
        assert!(!perturbed.pass);
        assert!(perturbed.gradient_inf_norm > 1e-6);
        assert!(perturbed.integral_inf_norm > 1e-6);
        assert_eq!(Outcome::Coherence(perturbed).exit_code(), 3);
    }

    #[test]
    fn energy_free_particle_has_zero_drift() {
        let dir = tempfile::tempdir().unwrap();
        let cli = patch(&format!(
            r#"{{"problem": "free", "x0": 1.0, "v0": 0.0, "out": {:?}}}"#,
            dir.path().to_str().unwrap()
        ));
        let cfg = ExperimentConfig::resolve(Command::Energy, &[&cli]).unwrap();
        let outcome = run_energy(&cfg).unwrap();
        assert!(outcome.drift_differential <= 1e-12);
        assert!(outcome.drift_variational <= 1e-12);
        assert!(dir.path().join("energy_report.json").exists());
    }

    #[test]
    fn compare_rejects_nonuniform_scale() {
        let cli = patch(r#"{"scale": "random:20,0.01,0.05,1"}"#);
        let cfg = ExperimentConfig::resolve(Command::Compare, &[&cli]).unwrap();
        let err = run_compare(&cfg).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }

    #[test]
    fn compare_variational_beats_differential() {
        let dir = tempfile::tempdir().unwrap();
        let cli = patch(&format!(
            r#"{{"scale": "uniform:0,10,100", "out": {:?}}}"#,
            dir.path().to_str().unwrap()
        ));
        let cfg = ExperimentConfig::resolve(Command::Compare, &[&cli]).unwrap();
        let outcome = run_compare(&cfg).unwrap();
        assert!(outcome.max_err_variational < outcome.max_err_differential);
        let text = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
        assert!(text.starts_with(
            "t,x_differential,x_variational,x_reference,err_differential,err_variational\n"
        ));
    }

    #[test]
    fn identical_configs_give_byte_identical_outputs() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        for d in [&d1, &d2] {
            let cli = patch(&format!(
                r#"{{"scale": "random:30,0.01,0.05,9", "out": {:?}}}"#,
                d.path().to_str().unwrap()
            ));
            let cfg = ExperimentConfig::resolve(Command::Simulate, &[&cli]).unwrap();
            run_simulate(&cfg).unwrap();
        }
        for name in ["trajectory.csv", "summary.json", "residual_integral.csv"] {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
}
