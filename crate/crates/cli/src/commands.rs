use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use bellctx::format::{parse_model, write_model, FORMAT_VERSION};
use bellctx::global_assignment::{chsh_max, chsh_values, noncontextual_fraction};
use bellctx::nelson::{
    condition_ensemble, em_step, sample_initial, simulate, Ensemble, GaussianTwoParticleState, MomentRow, Noise,
    SimulationParams,
};
use bellctx::numeric::FLOAT_VERDICT_TOL;
use bellctx::quantum::{born_model, TwoQubitState};
use bellctx::scenario::{check_no_signalling, validate_model, EmpiricalModel, DEFAULT_NORM_TOL};
use bellctx::stats::{moments, within_3se, Histogram, Moment};
use bellctx::{NelsonError, Number, Rational};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{ConditionArgs, ModelArgs, QuantumArgs, SimulateArgs, StateArgs, StateName};
use crate::manifest::{ManifestError, OutputDir};
use crate::{CliError, Outcome, EXIT_CONTEXTUAL, EXIT_OK};

/// Generator recorded in manifests so runs can be reproduced bit for bit.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), per-chunk streams; normals via rand_distr 0.5 StandardNormal";

pub fn read_model(path: &Path) -> Result<EmpiricalModel, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    let model = parse_model(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let violations = validate_model(&model, DEFAULT_NORM_TOL);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Input(format!("{}: {}", path.display(), msg.join("; "))));
    }
    Ok(model)
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn verdict(feasible: bool) -> i32 {
    if feasible {
        EXIT_OK
    } else {
        EXIT_CONTEXTUAL
    }
}

pub fn check(args: &ModelArgs) -> Result<Outcome, CliError> {
    let model = read_model(&args.model)?;
    // Signalling models have no global joint, whatever their CHSH value.
    for v in check_no_signalling(&model, DEFAULT_NORM_TOL) {
        eprintln!(
            "warning: contexts {} and {} disagree on the marginal of {} (distance {})",
            v.contexts.0,
            v.contexts.1,
            v.shared.join(","),
            v.distance
        );
    }
    let report = noncontextual_fraction(&model)?;
    Ok(Outcome::new(pretty(&report), verdict(report.feasible)))
}

pub fn fraction(args: &ModelArgs) -> Result<Outcome, CliError> {
    let model = read_model(&args.model)?;
    let report = noncontextual_fraction(&model)?;
    let out = json!({
        "feasible": report.feasible,
        "noncontextual_fraction": report.noncontextual_fraction,
        "contextual_fraction": report.contextual_fraction,
    });
    Ok(Outcome::new(pretty(&out), verdict(report.feasible)))
}

/// Exit 3 when the maximum exceeds the local bound 2.
pub fn chsh(args: &ModelArgs) -> Result<Outcome, CliError> {
    let model = read_model(&args.model)?;
    let values = chsh_values(&model)?;
    let max = chsh_max(&model)?;
    let above = match &max.value {
        Number::Exact(q) => *q > Rational::from_integer(2.into()),
        Number::Float(x) => *x > 2.0 + FLOAT_VERDICT_TOL,
    };
    let out = json!({ "values": values, "max": max, "exceeds_local_bound": above });
    Ok(Outcome::new(pretty(&out), verdict(!above)))
}

/// Parses `1.25`, `pi`, `-pi/2`, `3pi/4` or `0.5pi`.
pub fn parse_angle(text: &str) -> Result<f64, CliError> {
    let bad = || CliError::Input(format!("bad angle `{text}`"));
    let t = text.trim().to_ascii_lowercase();
    let value = match t.split_once("pi") {
        None => t.parse::<f64>().map_err(|_| bad())?,
        Some((coef, rest)) => {
            let coef = match coef.trim_end_matches('*') {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let den = match rest {
                "" => 1.0,
                r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
            };
            coef * PI / den
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

pub fn quantum(args: &QuantumArgs) -> Result<Outcome, CliError> {
    if args.angles.len() != 4 {
        return Err(CliError::Input(format!(
            "--angles needs 4 values a,a',b,b', got {}",
            args.angles.len()
        )));
    }
    let mut angles = [0.0; 4];
    for (slot, text) in angles.iter_mut().zip(&args.angles) {
        *slot = parse_angle(text)?;
    }
    let state = match &args.amplitudes {
        Some(v) if v.len() == 8 => {
            let amps = std::array::from_fn(|k| Complex64::new(v[2 * k], v[2 * k + 1]));
            TwoQubitState::new(amps).map_err(|e| CliError::Input(e.to_string()))?
        }
        Some(v) => {
            return Err(CliError::Input(format!(
                "--amplitudes needs 8 numbers (re,im for 4 basis states), got {}",
                v.len()
            )))
        }
        None => match args.state {
            StateName::Singlet => TwoQubitState::singlet(),
            StateName::PhiPlus => TwoQubitState::phi_plus(),
            StateName::Product => TwoQubitState::product_zero(),
        },
    };
    let model = born_model(&state, angles).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Outcome::new(write_model(&model), EXIT_OK))
}

fn gaussian(s: &StateArgs) -> Result<GaussianTwoParticleState, CliError> {
    GaussianTwoParticleState::new(s.sigma, s.big_sigma, s.nu).map_err(CliError::from)
}

fn state_json(s: &StateArgs) -> Value {
    json!({ "sigma": s.sigma, "Sigma": s.big_sigma, "nu": s.nu })
}

pub const MOMENT_HEADER: &str = "t,mean_x1,mean_x2,var_u,var_s,cov_x1x2";

pub fn moments_csv(rows: &[MomentRow]) -> String {
    let mut s = String::from(MOMENT_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.t, r.mean_x1, r.mean_x2, r.var_u, r.var_s, r.cov_x1x2);
    }
    s
}

pub fn snapshot_csv(ens: &Ensemble) -> String {
    let mut s = String::with_capacity(ens.len() * 40 + 6);
    s.push_str("x1,x2\n");
    for p in &ens.points {
        let _ = writeln!(s, "{},{}", p[0], p[1]);
    }
    s
}

pub fn snapshot_name(step: u64) -> String {
    format!("snapshots/step_{step:06}.csv")
}

pub fn simulate_cmd(args: &SimulateArgs, argv: Vec<String>) -> Result<Outcome, CliError> {
    let state = gaussian(&args.state)?;
    if args.record_every == 0 {
        return Err(CliError::Input("--record-every must be at least 1".into()));
    }
    if args.snapshot_every > 0 && !args.snapshot_every.is_multiple_of(args.record_every) {
        return Err(CliError::Input("--snapshot-every must be a multiple of --record-every".into()));
    }
    let params = SimulationParams {
        n: args.n,
        dt: args.dt,
        steps: args.steps,
        seed: args.seed,
        record_every: args.record_every,
    };
    let mut out = OutputDir::create(&args.out.out)?;
    let mut write_err: Option<ManifestError> = None;
    let (_, rows) = simulate(&state, &params, |ens| {
        let keep = ens.steps == 0
            || ens.steps == args.steps
            || (args.snapshot_every > 0 && ens.steps % args.snapshot_every == 0);
        if keep && write_err.is_none() {
            if let Err(e) = out.write(&snapshot_name(ens.steps), snapshot_csv(ens).as_bytes()) {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    out.write("moments.csv", moments_csv(&rows).as_bytes())?;
    let mut p = state_json(&args.state);
    p["n"] = json!(args.n);
    p["dt"] = json!(args.dt);
    p["steps"] = json!(args.steps);
    p["record_every"] = json!(args.record_every);
    p["snapshot_every"] = json!(args.snapshot_every);
    p["generator"] = json!(GENERATOR);
    let dir = out.root().to_path_buf();
    let manifest = out.finish("simulate", argv, Some(args.seed), p)?;
    let summary = json!({
        "out": dir,
        "manifest": manifest,
        "rows": rows.len(),
        "final": rows.last(),
    });
    Ok(Outcome::new(pretty(&summary), EXIT_OK))
}

/// Half-width that would capture `min(k, n)` points around `y`.
pub fn suggest_delta(ens: &Ensemble, y: f64, k: usize) -> f64 {
    let mut d: Vec<f64> = ens.points.iter().map(|p| (p[0] - y).abs()).collect();
    let idx = k.min(d.len()).saturating_sub(1);
    d.select_nth_unstable_by(idx, f64::total_cmp);
    d[idx]
}

/// Sub-ensembles smaller than this get a statistical error.
const MIN_CONDITIONED: usize = 2;

pub fn condition_cmd(args: &ConditionArgs, argv: Vec<String>) -> Result<Outcome, CliError> {
    let state = gaussian(&args.state)?;
    if args.delta.is_nan() || args.delta <= 0.0 {
        return Err(CliError::Input(format!("--delta must be positive, got {}", args.delta)));
    }
    if !args.y.is_finite() {
        return Err(CliError::Input(format!("--y must be finite, got {}", args.y)));
    }
    if args.bins == 0 {
        return Err(CliError::Input("--bins must be at least 1".into()));
    }
    let mut ens = sample_initial(&state, args.n, args.seed)?;
    let field = state.velocity_field();
    for _ in 0..args.steps {
        ens = em_step(&ens, &field, args.dt, Noise::Wiener(args.seed))?;
    }
    let too_few = |found: usize| CliError::Statistical {
        message: format!(
            "only {found} of {} points satisfy |x1 - {}| <= {}; widen --delta or increase --n",
            ens.len(),
            args.y,
            args.delta
        ),
        detail: json!({
            "error": "empty_sub_ensemble",
            "y": args.y,
            "delta": args.delta,
            "n": ens.len(),
            "found": found,
            "suggested_delta": suggest_delta(&ens, args.y, 100),
        }),
    };
    let sub = match condition_ensemble(&ens, args.y, args.delta) {
        Ok(sub) => sub,
        Err(NelsonError::EmptySubEnsemble { .. }) => return Err(too_few(0)),
        Err(e) => return Err(e.into()),
    };
    if sub.len() < MIN_CONDITIONED {
        return Err(too_few(sub.len()));
    }
    let x2 = sub.x2();
    let m = moments(&x2)?;
    let law = state.condition_analytic(args.y);
    let sd = law.variance.sqrt();
    let (lo, hi) = (law.mean - 5.0 * sd, law.mean + 5.0 * sd);
    let hist = Histogram::uniform(lo, hi, args.bins, &x2)?;

    let mut csv = String::from("bin_lo,bin_hi,count,density,analytic_density\n");
    for ((w, c), d) in hist.edges.windows(2).zip(&hist.counts).zip(hist.densities()) {
        let _ = writeln!(csv, "{},{},{},{},{}", w[0], w[1], c, d, law.density(0.5 * (w[0] + w[1])));
    }
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "y": args.y,
        "delta": args.delta,
        "mean": law.mean,
        "variance": law.variance,
        "empirical": {
            "n": m.n,
            "mean": m.mean,
            "variance": m.variance,
            "se_mean": m.se_mean,
            "se_variance": m.se_variance,
            "mean_within_3se": within_3se(&m, law.mean, Moment::Mean),
            "variance_within_3se": within_3se(&m, law.variance, Moment::Variance),
        },
        "histogram": { "bins": args.bins, "lo": lo, "hi": hi, "inside": hist.total, "outside": hist.outside },
    });
    let mut out = OutputDir::create(&args.out.out)?;
    out.write("condition_histogram.csv", csv.as_bytes())?;
    out.write("condition_law.json", pretty(&doc).as_bytes())?;
    let mut p = state_json(&args.state);
    p["y"] = json!(args.y);
    p["delta"] = json!(args.delta);
    p["n"] = json!(args.n);
    p["steps"] = json!(args.steps);
    p["dt"] = json!(args.dt);
    p["bins"] = json!(args.bins);
    p["generator"] = json!(GENERATOR);
    out.finish("condition", argv, Some(args.seed), p)?;
    Ok(Outcome::new(pretty(&doc), EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle(" 1.25 ").unwrap(), 1.25);
        for bad in ["", "pie", "pi/", "x", "inf", "pi/0"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn moment_csv_layout() {
        let row = MomentRow {
            t: 0.5,
            mean_x1: 0.0,
            mean_x2: -1.0,
            var_u: 1.0,
            var_s: 4.0,
            cov_x1x2: 0.75,
        };
        assert_eq!(moments_csv(&[row]), format!("{MOMENT_HEADER}\n0.5,0,-1,1,4,0.75\n"));
    }
}
