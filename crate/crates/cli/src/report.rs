//! `report`: reruns the headline checks and writes one summary document.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use bellctx::global_assignment::{
    chsh_max, chsh_values, enumerate_assignments, has_global_joint, noncontextual_fraction,
};
use bellctx::models::{all_deterministic, pr_box, random_no_signalling};
use bellctx::nelson::{
    condition_ensemble, pool_conditioned_x2, sample_initial, simulate, GaussianTwoParticleState, PolarWavefunction,
    SimulationParams, VelocityField,
};
use bellctx::quantum::{born_model, TwoQubitState};
use bellctx::scenario::MeasurementScenario;
use bellctx::stats::{moments, two_sample_test, within_3se, Moment};
use bellctx::{LpError, Number, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::ReportArgs;
use crate::commands::GENERATOR;
use crate::manifest::OutputDir;
use crate::{CliError, Outcome, EXIT_OK, EXIT_STATISTICAL};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

fn q(n: i64, d: i64) -> Number {
    Number::Exact(Rational::new(n.into(), d.into()))
}

fn pr_box_check() -> Result<Check, CliError> {
    let r = noncontextual_fraction(&pr_box())?;
    let smax = r.chsh_max().map(|c| c.value.clone());
    Ok(Check {
        name: "pr_box",
        pass: !r.feasible && r.contextual_fraction == q(1, 1) && smax == Some(q(4, 1)),
        detail: json!({ "contextual_fraction": r.contextual_fraction, "chsh_max": smax }),
    })
}

fn tsirelson_check() -> Result<Check, CliError> {
    let m = born_model(&TwoQubitState::singlet(), [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4])
        .map_err(|e| CliError::Input(e.to_string()))?;
    let s = chsh_max(&m)?.value.to_f64();
    let r = noncontextual_fraction(&m)?;
    let cf = r.contextual_fraction.to_f64();
    Ok(Check {
        name: "tsirelson",
        pass: (s - 2.0 * SQRT_2).abs() < 1e-9 && !r.feasible && (cf - (SQRT_2 - 1.0)).abs() < 1e-6,
        detail: json!({ "chsh_max": s, "contextual_fraction": cf }),
    })
}

fn fine_check(models: usize, seed: u64) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two = Rational::from_integer(2.into());
    let mut mismatches = 0;
    for _ in 0..models {
        let m = random_no_signalling(&mut rng);
        let local = match chsh_max(&m)?.value {
            Number::Exact(v) => v <= two,
            Number::Float(_) => unreachable!("generator is exact"),
        };
        if has_global_joint(&m)? != local {
            mismatches += 1;
        }
    }
    Ok(Check {
        name: "fine_equivalence",
        pass: mismatches == 0,
        detail: json!({ "models": models, "mismatches": mismatches }),
    })
}

fn deterministic_check() -> Result<Check, CliError> {
    let s = MeasurementScenario::chsh();
    let models = all_deterministic(&s);
    let mut pass = models.len() == enumerate_assignments(&s).map_err(LpError::from)?.count();
    for m in &models {
        let r = noncontextual_fraction(m)?;
        pass &= r.feasible && r.contextual_fraction == q(0, 1);
        pass &= chsh_values(m)?.iter().all(|v| v.value == q(2, 1) || v.value == q(-2, 1));
    }
    Ok(Check {
        name: "deterministic_models",
        pass,
        detail: json!({ "models": models.len() }),
    })
}

fn stationarity_check(state: &GaussianTwoParticleState, args: &ReportArgs) -> Result<Check, CliError> {
    let params = SimulationParams {
        n: args.n,
        dt: args.dt,
        steps: args.steps,
        seed: args.seed,
        record_every: 10,
    };
    let (su, ss) = (state.sigma().powi(2), state.big_sigma().powi(2));
    let mut failures = Vec::new();
    let mut snapshots = 0;
    let mut stat_err = None;
    simulate(state, &params, |ens| {
        snapshots += 1;
        match (moments(&ens.relative()), moments(&ens.center())) {
            (Ok(u), Ok(s)) => {
                if !(within_3se(&u, su, Moment::Variance) && within_3se(&s, ss, Moment::Variance)) {
                    failures.push(json!({ "t": ens.time, "var_u": u.variance, "var_s": s.variance }));
                }
            }
            (Err(e), _) | (_, Err(e)) => stat_err = Some(e),
        }
    })?;
    if let Some(e) = stat_err {
        return Err(e.into());
    }
    Ok(Check {
        name: "stationarity",
        pass: failures.is_empty(),
        detail: json!({ "snapshots": snapshots, "failures": failures }),
    })
}

fn conditioning_check(state: &GaussianTwoParticleState, n: usize, seed: u64) -> Result<Check, CliError> {
    let ens = sample_initial(state, n, seed)?;
    let sub = condition_ensemble(&ens, 1.0, 0.05)?;
    let m = moments(&sub.x2())?;
    let law = state.condition_analytic(1.0);
    Ok(Check {
        name: "conditioning",
        pass: within_3se(&m, law.mean, Moment::Mean) && within_3se(&m, law.variance, Moment::Variance),
        detail: json!({ "analytic": law, "empirical": m }),
    })
}

fn marginal_check(state: &GaussianTwoParticleState, n: usize, seed_a: u64, seed_b: u64) -> Result<Check, CliError> {
    let a = sample_initial(state, n, seed_a)?.x2();
    let pooled = pool_conditioned_x2(&sample_initial(state, n, seed_b)?, 0.05)?;
    let ks = two_sample_test(&a, &pooled, 0.01)?;
    let m = moments(&pooled)?;
    let target = state.marginal_variance();
    Ok(Check {
        name: "no_signalling_marginal",
        pass: !ks.reject && within_3se(&m, target, Moment::Variance),
        detail: json!({ "ks": ks, "variance": m.variance, "se_variance": m.se_variance, "target": target }),
    })
}

fn field_check(state: &GaussianTwoParticleState, seed: u64) -> Result<Check, CliError> {
    let s = *state;
    let psi = PolarWavefunction::new(move |p| s.wavefunction(p[0], p[1]), |_| 0.0, s.nu(), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let (fd, exact) = (psi.osmotic(p), s.osmotic(p[0], p[1]));
        let scale = exact[0].abs().max(exact[1].abs()).max(1e-3);
        worst = worst.max((fd[0] - exact[0]).abs().max((fd[1] - exact[1]).abs()) / scale);
    }
    let law = s.condition_analytic(1.0);
    let at_mean = s.conditional_velocity(1.0, law.mean);
    Ok(Check {
        name: "field_identities",
        pass: worst < 1e-6 && at_mean.abs() < 1e-12,
        detail: json!({ "max_relative_error": worst, "conditional_velocity_at_mean": at_mean }),
    })
}

pub fn report_cmd(args: &ReportArgs, argv: Vec<String>) -> Result<Outcome, CliError> {
    let state = GaussianTwoParticleState::new(args.state.sigma, args.state.big_sigma, args.state.nu)?;
    let seed = args.seed;
    let checks = vec![
        pr_box_check()?,
        tsirelson_check()?,
        fine_check(args.models, seed)?,
        deterministic_check()?,
        stationarity_check(&state, args)?,
        conditioning_check(&state, args.condition_n, seed.wrapping_add(1))?,
        marginal_check(&state, args.condition_n, seed.wrapping_add(2), seed.wrapping_add(3))?,
        field_check(&state, seed)?,
    ];
    let pass = checks.iter().all(|c| c.pass);
    let doc = json!({
        "format_version": bellctx::format::FORMAT_VERSION,
        "pass": pass,
        "checks": checks,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    let mut out = OutputDir::create(&args.out.out)?;
    out.write("report.json", text.as_bytes())?;
    let params = json!({
        "sigma": args.state.sigma,
        "Sigma": args.state.big_sigma,
        "nu": args.state.nu,
        "n": args.n,
        "steps": args.steps,
        "dt": args.dt,
        "condition_n": args.condition_n,
        "models": args.models,
        "seeds": [seed, seed.wrapping_add(1), seed.wrapping_add(2), seed.wrapping_add(3)],
        "generator": GENERATOR,
    });
    out.finish("report", argv, Some(seed), params)?;
    Ok(Outcome::new(text, if pass { EXIT_OK } else { EXIT_STATISTICAL }))
}
