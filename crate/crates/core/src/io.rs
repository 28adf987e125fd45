//! CSV and JSON serialization for scales, grid functions, trajectories,
//! residuals, and reports.
//!
//! Numbers in CSV are printed with 17 significant digits so every value
//! round-trips exactly; JSON goes through serde_json, whose shortest
//! representation also round-trips. All writers are deterministic: the
//! same data produces byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::Residual;
use crate::error::{Error, Result};
use crate::solver::{ConvergenceReport, EnergySeries, Trajectory};
use crate::timescale::{GridFunction, TimeScale};

/// Exact decimal printing: 17 significant digits round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize, Deserialize)]
struct TimeScaleJson {
    points: Vec<f64>,
}

pub fn timescale_to_json(ts: &TimeScale) -> String {
    let mut s = serde_json::to_string_pretty(&TimeScaleJson {
        points: ts.points().to_vec(),
    })
    .expect("timescale serialization cannot fail");
    s.push('\n');
    s
}

pub fn write_timescale_json(path: &Path, ts: &TimeScale) -> Result<()> {
    fs::write(path, timescale_to_json(ts))?;
    Ok(())
}

pub fn write_timescale_csv(path: &Path, ts: &TimeScale) -> Result<()> {
    let mut out = String::from("t\n");
    for &t in ts.points() {
        out.push_str(&fmt_f64(t));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a scale from JSON (`{"points": [..]}`) when the extension is
/// `.json`, otherwise from a single-column CSV whose optional first line
/// may be a header.
pub fn read_timescale(path: &Path) -> Result<TimeScale> {
    let text = fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        let parsed: TimeScaleJson = serde_json::from_str(&text).map_err(|e| {
            Error::Validation(format!("bad time scale JSON in {}: {e}", path.display()))
        })?;
        return TimeScale::from_points(parsed.points);
    }
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => points.push(v),
            Err(_) if i == 0 => continue, // header
            Err(e) => {
                return Err(Error::Validation(format!(
                    "bad time scale CSV in {} line {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    TimeScale::from_points(points)
}

/// `(index, t, value)` rows; `index` is the absolute grid index, so trimmed
/// domains start at their first grid point.
pub fn write_grid_csv(path: &Path, ts: &TimeScale, g: &GridFunction) -> Result<()> {
    let k0 = g.first_grid_index();
    let mut out = String::from("index,t,value\n");
    for (j, &v) in g.values().iter().enumerate() {
        let k = k0 + j;
        out.push_str(&format!("{k},{},{}\n", fmt_f64(ts.points()[k]), fmt_f64(v)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// `(index, t, x, v_forward, E)` rows. The forward velocity and energy
/// need the next point, so the final row leaves those fields empty.
pub fn write_trajectory_csv(
    path: &Path,
    tr: &Trajectory,
    l: &crate::lagrangian::Lagrangian,
) -> Result<()> {
    let dx = tr.ts.delta_derivative(&tr.x)?;
    let t = tr.ts.points();
    let x = tr.x.values();
    let mut out = String::from("index,t,x,v_forward,E\n");
    for k in 0..x.len() {
        if k < dx.len() {
            let v = dx.values()[k];
            let e = v * l.d3(t[k], x[k], v) - l.eval(t[k], x[k], v);
            out.push_str(&format!(
                "{k},{},{},{},{}\n",
                fmt_f64(t[k]),
                fmt_f64(x[k]),
                fmt_f64(v),
                fmt_f64(e)
            ));
        } else {
            out.push_str(&format!("{k},{},{},,\n", fmt_f64(t[k]), fmt_f64(x[k])));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// The four-number residual summary used inside JSON reports.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSummary {
    pub kind: String,
    pub c_estimate: Option<f64>,
    pub inf_norm: f64,
    pub l2_norm_weighted: f64,
}

pub fn residual_summary(r: &Residual, ts: &TimeScale) -> Result<ResidualSummary> {
    Ok(ResidualSummary {
        kind: r.kind.name().to_string(),
        c_estimate: r.c_estimate,
        inf_norm: r.inf_norm(),
        l2_norm_weighted: r.l2_norm_weighted(ts)?,
    })
}

pub fn write_residual_csv(path: &Path, ts: &TimeScale, r: &Residual) -> Result<()> {
    write_grid_csv(path, ts, &r.values)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Validation(format!("serialization failed: {e}")))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn write_convergence_json(path: &Path, report: &ConvergenceReport) -> Result<()> {
    write_json(path, report)
}

/// Two plot-ready columns: `log10_h, log10_error`.
pub fn write_loglog_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut out = String::from("log10_h,log10_error\n");
    for (&h, &e) in report.steps.iter().zip(&report.errors) {
        out.push_str(&format!(
            "{},{}\n",
            fmt_f64(h.log10()),
            fmt_f64(e.max(f64::MIN_POSITIVE).log10())
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// `(index, t, e)` rows for one scheme's energy series.
pub fn write_energy_csv(path: &Path, series: &EnergySeries) -> Result<()> {
    let mut out = String::from("index,t,e\n");
    for (k, (&t, &e)) in series.t.iter().zip(&series.e).enumerate() {
        out.push_str(&format!("{k},{},{}\n", fmt_f64(t), fmt_f64(e)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Side-by-side comparison of both schemes against the reference.
pub fn write_compare_csv(
    path: &Path,
    ts: &TimeScale,
    differential: &GridFunction,
    variational: &GridFunction,
    reference: &GridFunction,
) -> Result<()> {
    let mut out = String::from(
        "t,x_differential,x_variational,x_reference,err_differential,err_variational\n",
    );
    for (k, &t) in ts.points().iter().enumerate() {
        let (d, v, r) = (
            differential.values()[k],
            variational.values()[k],
            reference.values()[k],
        );
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(t),
            fmt_f64(d),
            fmt_f64(v),
            fmt_f64(r),
            fmt_f64((d - r).abs()),
            fmt_f64((v - r).abs())
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{residual_integral, CEstimateMode};
    use crate::lagrangian::Problem;
    use crate::solver::{solve_variational, NewtonParams};

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, -2.5e-17, 1.0 / 3.0, 12345.6789, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn timescale_round_trips_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeScale::from_points(vec![0.0, 0.1, 0.4, 1.0]).unwrap();

        let jp = dir.path().join("scale.json");
        write_timescale_json(&jp, &ts).unwrap();
        let back = read_timescale(&jp).unwrap();
        assert_eq!(back.points(), ts.points());

        let cp = dir.path().join("scale.csv");
        write_timescale_csv(&cp, &ts).unwrap();
        let back = read_timescale(&cp).unwrap();
        assert_eq!(back.points(), ts.points());
    }

    #[test]
    fn read_timescale_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "t\n0.0\nnot-a-number\n").unwrap();
        assert!(read_timescale(&p).is_err());
        let p2 = dir.path().join("bad.json");
        std::fs::write(&p2, "{\"points\": \"nope\"}").unwrap();
        assert!(read_timescale(&p2).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeScale::uniform(0.0, 1.0, 4).unwrap();
        let l = Problem::Harmonic.lagrangian();
        let tr = solve_variational(&ts, &l, 1.0, 0.97, NewtonParams::default()).unwrap();
        let p = dir.path().join("trajectory.csv");
        write_trajectory_csv(&p, &tr, &l).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,t,x,v_forward,E");
        assert_eq!(lines.len(), 6);
        // interior rows carry five numbers, the last row leaves v and E empty
        assert_eq!(lines[1].split(',').count(), 5);
        assert!(lines[5].ends_with(",,"));
        // values round-trip
        let x1: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(x1, tr.x.values()[1]);
    }

    #[test]
    fn residual_csv_uses_absolute_indices() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeScale::uniform(0.0, 1.0, 5).unwrap();
        let l = Problem::Harmonic.lagrangian();
        let x = GridFunction::sample(&ts, |t| t.cos());
        let r = crate::embedding::residual_variational_backward(&ts, &l, &x).unwrap();
        let p = dir.path().join("r.csv");
        write_residual_csv(&p, &ts, &r).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let first_data = text.lines().nth(1).unwrap();
        assert!(
            first_data.starts_with("1,"),
            "backward residual starts at grid index 1"
        );
    }

    #[test]
    fn residual_summary_fields() {
        let ts = TimeScale::uniform(0.0, 1.0, 6).unwrap();
        let l = Problem::Harmonic.lagrangian();
        let x = GridFunction::sample(&ts, |t| t.cos());
        let r = residual_integral(&ts, &l, &x, CEstimateMode::First).unwrap();
        let s = residual_summary(&r, &ts).unwrap();
        assert_eq!(s.kind, "integral");
        assert!(s.c_estimate.is_some());
        assert!(s.inf_norm > 0.0 && s.l2_norm_weighted > 0.0);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"l2_norm_weighted\""));
    }

    #[test]
    fn writers_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeScale::uniform(0.0, 2.0, 7).unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_timescale_csv(&a, &ts).unwrap();
        write_timescale_csv(&b, &ts).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}
