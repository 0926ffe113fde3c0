use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use natp_core::classical::{
    appendix, bipartite_transport, complex_norm_small, kantorovich_real,
    support_restricted_complex_inf, Complex64, SolverOptions, TRANSPORT_MAX_POINTS,
};
use natp_core::gen::generate_instance;
use natp_core::graev::{graev_norm, graev_threshold_oracle, tk_usp_compare};
use natp_core::instance::{certificate_from_json, certificate_to_json, load_instance, Instance};
use natp_core::na::{
    na_norm, na_norm_bruteforce, na_norm_pointed, verify_certificate, ExtensionOptions,
};
use natp_core::rational::{format_rational, rational_to_f64};
use natp_core::{Cost, FieldKind, FieldSpec, Scalar};

#[derive(Parser)]
#[command(
    name = "natp",
    version,
    about = "Transportation norms over valued fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Input {
    /// Instance file, or a directory of `*.json` instances.
    #[arg(long)]
    instance: PathBuf,
    /// Process a directory's files on several threads.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Max-cost norm over a non-archimedean field, with certificate.
    Norm {
        #[command(flatten)]
        input: Input,
        /// Basepoint for placing the zero point of unbalanced vectors.
        #[arg(long)]
        basepoint: Option<String>,
        /// Norm without the zero point (balanced vectors only).
        #[arg(long)]
        pointed: bool,
    },
    /// Sum-cost norm over the reals (exact) or the complex numbers.
    Classical {
        #[command(flatten)]
        input: Input,
        /// Accuracy target for the complex solver.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Brute-force search over bounded plans, compared with `norm`.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Integer combinations `Σ m_k λ_k` use `|m_k| ≤ budget`.
        #[arg(long, default_value_t = 3)]
        budget: u32,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Graev norm of an integer vector.
    Graev {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Checks a certificate printed by `norm` against its instance.
    Certify {
        #[arg(long)]
        instance: PathBuf,
        /// Certificate file; `-` reads standard input.
        #[arg(long, default_value = "-")]
        certificate: PathBuf,
    },
    /// Random ultrametric instance from a random dendrogram.
    Gen {
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        scales: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `trivial`, `p-adic:P`, `finite:P`, `levi-civita[:BASE]`.
        #[arg(long, default_value = "p-adic:2")]
        field: String,
    },
    /// Complex cube-roots example: support-only infimum against the full norm.
    Appendix {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

enum Failure {
    Input(anyhow::Error),
    Internal(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("values serialize");
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal verification failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Norm {
            input,
            basepoint,
            pointed,
        } => batch(&input, |inst| cmd_norm(inst, basepoint.as_deref(), pointed)),
        Command::Classical { input, tol } => batch(&input, |inst| cmd_classical(inst, tol)),
        Command::Oracle {
            input,
            budget,
            basepoint,
        } => batch(&input, |inst| {
            cmd_oracle(inst, budget, basepoint.as_deref())
        }),
        Command::Graev { input, basepoint } => {
            batch(&input, |inst| cmd_graev(inst, basepoint.as_deref()))
        }
        Command::Certify {
            instance,
            certificate,
        } => cmd_certify(&instance, &certificate),
        Command::Gen {
            points,
            scales,
            seed,
            field,
        } => {
            if points == 0 || scales == 0 {
                return Err(anyhow!("--points and --scales must be positive").into());
            }
            Ok(generate_instance(
                seed,
                points,
                scales,
                &parse_field(&field)?,
            ))
        }
        Command::Appendix { tol } => cmd_appendix(tol),
    }
}

/// Runs `f` on one instance, or on every `*.json` file of a directory in
/// name order, keyed by file name.
fn batch(input: &Input, f: impl Fn(&Instance) -> Outcome + Sync) -> Outcome {
    let load = |p: &Path| -> Outcome {
        let inst = load_instance(p).map_err(|e| anyhow!("{}:\n{e}", p.display()))?;
        f(&inst)
    };
    if !input.instance.is_dir() {
        return load(&input.instance);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&input.instance)
        .with_context(|| format!("reading {}", input.instance.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let results: Vec<Outcome> = if input.parallel {
        files.par_iter().map(|p| load(p)).collect()
    } else {
        files.iter().map(|p| load(p)).collect()
    };
    let mut out = serde_json::Map::new();
    for (p, r) in files.iter().zip(results) {
        let name = p.file_name().expect("file").to_string_lossy().into_owned();
        out.insert(name, r?);
    }
    Ok(Value::Object(out))
}

fn parse_field(text: &str) -> anyhow::Result<FieldSpec> {
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    let kind: FieldKind = serde_json::from_value(Value::String(kind.to_string()))
        .map_err(|_| anyhow!("unknown field kind {kind}"))?;
    let field = match kind {
        FieldKind::PAdicRational | FieldKind::FiniteField => {
            let p = arg
                .ok_or_else(|| anyhow!("{text}: give the prime as KIND:P"))?
                .parse()
                .with_context(|| format!("{text}: bad prime"))?;
            FieldSpec::new(kind, Some(p), None)?
        }
        FieldKind::LeviCivita => {
            let base = arg.map(natp_core::rational::parse_rational).transpose()?;
            FieldSpec::new(kind, None, base)?
        }
        _ => FieldSpec::new(kind, None, None)?,
    };
    if !field.is_non_archimedean() {
        bail!("gen builds non-archimedean instances; {text} is archimedean");
    }
    Ok(field)
}

fn options_for(inst: &Instance, basepoint: Option<&str>) -> ExtensionOptions {
    let mut options = inst.options.clone();
    if let Some(b) = basepoint {
        options.basepoint = Some(b.to_string());
    }
    options
}

fn cost_json(c: &Cost) -> Value {
    serde_json::to_value(c.to_json()).expect("costs serialize")
}

fn plan_json(entries: &[(String, String, Scalar)]) -> Value {
    entries
        .iter()
        .map(|(a, b, c)| json!({"from": a, "to": b, "coeff": c.to_json()}))
        .collect()
}

fn ultra(inst: &Instance) -> anyhow::Result<&natp_core::ultrametric::UltraSpace> {
    inst.ultra()
        .ok_or_else(|| anyhow!("field {} is archimedean; use `natp classical`", inst.field))
}

fn cmd_norm(inst: &Instance, basepoint: Option<&str>, pointed: bool) -> Outcome {
    let space = ultra(inst)?;
    let options = options_for(inst, basepoint);
    let cert = if pointed {
        na_norm_pointed(space, &inst.vector, &inst.field)
    } else {
        na_norm(space, &inst.vector, &inst.field, &options)
    }
    .map_err(anyhow::Error::from)?;
    if let Some(w) = cert.extension.as_ref().and_then(|e| e.warning.as_ref()) {
        eprintln!("warning: {w}");
    }
    let report = verify_certificate(&cert, space, &inst.vector, &options);
    if !report.passed() {
        let msg: Vec<String> = report
            .failures()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        return Err(Failure::Internal(msg.join("; ")));
    }
    Ok(certificate_to_json(&cert))
}

fn cmd_certify(instance: &Path, certificate: &Path) -> Outcome {
    let inst = load_instance(instance).map_err(|e| anyhow!("{}:\n{e}", instance.display()))?;
    let text = if certificate == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).context("reading certificate from stdin")?
    } else {
        std::fs::read_to_string(certificate)
            .with_context(|| format!("reading {}", certificate.display()))?
    };
    let value: Value = serde_json::from_str(&text).context("certificate is not JSON")?;
    let cert = certificate_from_json(&value).map_err(|e| anyhow!("certificate:\n{e}"))?;
    let report = verify_certificate(&cert, ultra(&inst)?, &inst.vector, &inst.options);
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    if !report.passed() {
        let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&json!({"passed": false, "checks": checks}))
                .expect("json")
        );
        return Err(anyhow!("certificate rejected: {}", failed.join(", ")).into());
    }
    Ok(json!({"passed": true, "checks": checks}))
}

fn cmd_oracle(inst: &Instance, budget: u32, basepoint: Option<&str>) -> Outcome {
    let space = ultra(inst)?;
    let options = options_for(inst, basepoint);
    let (value, plan) = na_norm_bruteforce(space, &inst.vector, &inst.field, budget, &options)
        .map_err(anyhow::Error::from)?;
    let cert = na_norm(space, &inst.vector, &inst.field, &options).map_err(anyhow::Error::from)?;
    Ok(json!({
        "value": cost_json(&value),
        "plan": plan_json(&plan),
        "budget": budget,
        "norm": cost_json(&cert.value),
        "agrees": value == cert.value,
    }))
}

fn cmd_graev(inst: &Instance, basepoint: Option<&str>) -> Outcome {
    let space = ultra(inst)?;
    let options = options_for(inst, basepoint);
    let cert = graev_norm(space, &inst.vector, &options).map_err(anyhow::Error::from)?;
    let threshold =
        graev_threshold_oracle(space, &inst.vector, &options).map_err(anyhow::Error::from)?;
    let mut out = json!({
        "value": cost_json(&cert.value),
        "threshold_oracle": format_rational(&threshold),
        "witness": plan_json(&cert.witness_triples()),
    });
    if inst.field.has_char_zero() {
        let r = tk_usp_compare(space, &inst.vector, &inst.field, &options)
            .map_err(anyhow::Error::from)?;
        out["comparison"] = json!({
            "field": serde_json::to_value(&r.field).expect("json"),
            "field_norm": cost_json(&r.field_norm),
            "group_norm": cost_json(&r.group_norm),
            "equal": r.equal,
            "expect_equal": r.expect_equal,
        });
    }
    Ok(out)
}

fn complex_pairs(inst: &Instance) -> Vec<(String, Complex64)> {
    inst.vector
        .terms()
        .iter()
        .map(|(l, s)| {
            let (re, im) = s.to_complex_f64().expect("archimedean scalars");
            (l.clone(), Complex64::new(re, im))
        })
        .collect()
}

fn cmd_classical(inst: &Instance, tol: f64) -> Outcome {
    if !(tol > 0.0) {
        return Err(anyhow!("--tol must be positive").into());
    }
    let space = inst.metric();
    match inst.field.kind() {
        FieldKind::Real => {
            let (value, plan) =
                kantorovich_real(&space, &inst.vector).map_err(anyhow::Error::from)?;
            let mut out = json!({
                "value": format_rational(&value),
                "approx": rational_to_f64(&value),
                "plan": plan
                    .entries
                    .iter()
                    .map(|(a, b, c)| json!({"from": a, "to": b, "coeff": format_rational(c)}))
                    .collect::<Vec<_>>(),
            });
            if inst.vector.len() <= TRANSPORT_MAX_POINTS {
                let t = bipartite_transport(&space, &inst.vector).map_err(anyhow::Error::from)?;
                out["bipartite"] = Value::String(format_rational(&t));
                if t != value {
                    return Err(Failure::Internal(format!(
                        "flow value {} differs from transportation value {}",
                        format_rational(&value),
                        format_rational(&t)
                    )));
                }
            }
            Ok(out)
        }
        FieldKind::Complex => {
            let opts = SolverOptions {
                tol,
                ..SolverOptions::default()
            };
            let u = complex_pairs(inst);
            let full = complex_norm_small(&space, &u, &opts).map_err(anyhow::Error::from)?;
            let restricted =
                support_restricted_complex_inf(&space, &u, &opts).map_err(anyhow::Error::from)?;
            Ok(json!({
                "value": full.value,
                "lower_bound": full.lower_bound,
                "support_restricted": restricted.value,
                "plan": full
                    .plan
                    .entries
                    .iter()
                    .map(|(a, b, c)| json!({"from": a, "to": b, "coeff": [c.re, c.im]}))
                    .collect::<Vec<_>>(),
            }))
        }
        _ => Err(anyhow!("field {} is non-archimedean; use `natp norm`", inst.field).into()),
    }
}

fn cmd_appendix(tol: f64) -> Outcome {
    if !(tol > 0.0) {
        return Err(anyhow!("--tol must be positive").into());
    }
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    let r = appendix(&opts).map_err(anyhow::Error::from)?;
    Ok(json!({
        "support_restricted": r.support_restricted,
        "full": r.full,
        "full_lower_bound": r.full_lower_bound,
        "fermat_point": [r.fermat_point.re, r.fermat_point.im],
        "full_plan": r
            .full_plan
            .entries
            .iter()
            .map(|(a, b, c)| json!({"from": a, "to": b, "coeff": [c.re, c.im]}))
            .collect::<Vec<_>>(),
        "gaussian_rationals": {
            "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            "fermat_point": [r.qi_fermat_point.re, r.qi_fermat_point.im],
            "fermat_value": r.qi_fermat_value,
            "sequence": r
                .qi_sequence
                .iter()
                .map(|(re, im, cost)| json!({"t": [format_rational(re), format_rational(im)], "cost": cost}))
                .collect::<Vec<_>>(),
        },
    }))
}
