mod input;
mod output;
mod selftest;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qaspace::embeddings::{
    check_seq_conditions, equivalence, omega_n, tau, CandidateShape, Curve, SequenceSpec,
};
use qaspace::logspace::{linear_grid, log_grid};
use qaspace::qanorm::StrategyRegistry;
use qaspace::witness::{
    build_witness, lower_bound_value, witness_lorentz_norm, witness_qa_upper, WitnessSpec,
};
use qaspace::{lorentz_norm, qa_bounds, qa_upper, ShapeFunction, StepFunction};

use output::{csv_document, emit, json_document};

/// Residual tolerance for witness invariants.
const WITNESS_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "qaspace", version, about = "Lorentz and QA quasi-norm toolkit for step functions on [0, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Shapes {
    /// Shape spec for φ: inline JSON or a file path.
    #[arg(long, default_value = r#"{"family":"qa_phi"}"#)]
    phi: String,
    /// Shape spec for ψ: inline JSON or a file path.
    #[arg(long, default_value = r#"{"family":"qa_psi"}"#)]
    psi: String,
}

impl Shapes {
    fn load(&self) -> Result<(ShapeFunction, ShapeFunction), CliError> {
        Ok((input::load("phi", &self.phi)?, input::load("psi", &self.psi)?))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GridKind {
    Log,
    Linear,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decreasing rearrangement of a step function.
    Rearrange {
        #[arg(long)]
        input: String,
        #[arg(long)]
        output: Option<String>,
    },
    /// Lorentz norm of a step function.
    LorentzNorm {
        #[arg(long, default_value = r#"{"family":"qa_phi"}"#)]
        phi: String,
        #[arg(long)]
        input: String,
        #[arg(long)]
        output: Option<String>,
    },
    /// Lower and upper bounds on the quasi-norm.
    QaBounds {
        #[command(flatten)]
        shapes: Shapes,
        #[arg(long)]
        input: String,
        /// Registered strategy name, or `auto` for exhaustive when feasible.
        #[arg(long, default_value = "auto")]
        strategy: String,
        #[arg(long)]
        output: Option<String>,
    },
    /// Table of τ, φ and τ/φ on a log grid.
    Tau {
        #[command(flatten)]
        shapes: Shapes,
        #[arg(long, default_value_t = 1e-12)]
        tmin: f64,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
        #[arg(long)]
        output: Option<String>,
    },
    /// Grid check of the conditions under which φ_s and α_s are equivalent.
    CheckSeq {
        #[command(flatten)]
        shapes: Shapes,
        /// Sequence spec, e.g. {"kind":"reciprocal"}.
        #[arg(long)]
        seq: String,
        #[arg(long, default_value_t = 1.0)]
        xmin: f64,
        #[arg(long, default_value_t = 1e4)]
        xmax: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, value_enum, default_value = "log")]
        grid: GridKind,
        #[arg(long)]
        output: Option<String>,
    },
    /// Ratio statistics of two curves on a log grid.
    Equivalence {
        #[command(flatten)]
        shapes: Shapes,
        /// Curve spec, e.g. {"curve":"tau"}.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1e-12)]
        tmin: f64,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
        #[arg(long)]
        output: Option<String>,
    },
    /// Extremal witness function and its bounds.
    Witness {
        #[command(flatten)]
        shapes: Shapes,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        mu1: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
        #[arg(long)]
        output: Option<String>,
    },
    /// ω_N of a candidate fundamental function over a range of N.
    Omega {
        #[command(flatten)]
        shapes: Shapes,
        /// Candidate spec, e.g. {"kind":"gamma_power","theta":0.9}.
        #[arg(long, default_value = r#"{"kind":"same"}"#)]
        candidate: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long)]
        output: Option<String>,
    },
    /// Seeded sweep over the invariant families.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long)]
        output: Option<String>,
    },
}

/// Failure of a run, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage { kind: String, message: String },
    /// An invariant check failed; the report has already been emitted.
    Invariant(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            kind: "usage".into(),
            message: message.into(),
        }
    }
}

impl From<qaspace::Error> for CliError {
    fn from(e: qaspace::Error) -> Self {
        CliError::Usage {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn shape_config(command: &str, phi: &ShapeFunction, psi: &ShapeFunction) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("phi".into(), to_value(phi));
    m.insert("psi".into(), to_value(psi));
    m
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rearrange { input, output } => {
            let f: StepFunction = input::load("input", &input)?;
            let config = json!({"command": "rearrange", "input": f});
            let star = f.rearrange();
            emit(&json_document(config, json!({"rearranged": star})), output.as_deref())
        }
        Command::LorentzNorm { phi, input, output } => {
            let phi: ShapeFunction = input::load("phi", &phi)?;
            let f: StepFunction = input::load("input", &input)?;
            let norm = lorentz_norm(&f, &phi)?;
            let config = json!({"command": "lorentz-norm", "phi": phi, "input": f});
            emit(&json_document(config, to_value(&norm)), output.as_deref())
        }
        Command::QaBounds {
            shapes,
            input,
            strategy,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            let f: StepFunction = input::load("input", &input)?;
            let bounds = if strategy == "auto" {
                qa_bounds(&f, &phi, &psi)?
            } else {
                let s = StrategyRegistry::with_defaults().get(&strategy)?;
                qa_upper(&f, &phi, &psi, s.as_ref())?
            };
            let mut config = shape_config("qa-bounds", &phi, &psi);
            config.insert("input".into(), to_value(&f));
            config.insert("strategy".into(), json!(strategy));
            let result = json!({
                "lower": bounds.lower,
                "upper": bounds.upper,
                "ratio": bounds.ratio(),
                "lower_source": bounds.lower_source,
                "strategy": bounds.strategy,
                "witness": bounds.upper_witness.pieces,
                "layer_blocks": bounds.upper_witness.layer_blocks,
            });
            emit(&json_document(Value::Object(config), result), output.as_deref())
        }
        Command::Tau {
            shapes,
            tmin,
            tmax,
            points,
            out,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            if !(tmin > 0.0 && tmin <= tmax && tmax <= 1.0) || points == 0 {
                return Err(CliError::usage("need 0 < tmin <= tmax <= 1 and points > 0"));
            }
            let mut config = shape_config("tau", &phi, &psi);
            config.insert("tmin".into(), json!(tmin));
            config.insert("tmax".into(), json!(tmax));
            config.insert("points".into(), json!(points));
            let mut rows = Vec::with_capacity(points);
            for t in log_grid(tmin, tmax, points) {
                let (ta, ph) = (tau(&phi, &psi, t)?, phi.eval(t)?);
                rows.push(vec![t, ta, ph, ta / ph]);
            }
            let config = Value::Object(config);
            let text = match out {
                Format::Csv => csv_document(&config, &["t", "tau", "phi", "ratio"], &rows),
                Format::Json => {
                    let column = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
                    json_document(
                        config,
                        json!({"t": column(0), "tau": column(1), "phi": column(2), "ratio": column(3)}),
                    )
                }
            };
            emit(&text, output.as_deref())
        }
        Command::CheckSeq {
            shapes,
            seq,
            xmin,
            xmax,
            points,
            grid,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            let seq: SequenceSpec = input::load("seq", &seq)?;
            seq.validate()?;
            if !(xmin > 0.0 && xmin < xmax) {
                return Err(CliError::usage("need 0 < xmin < xmax"));
            }
            let xs = match grid {
                GridKind::Log => log_grid(xmin, xmax, points),
                GridKind::Linear => linear_grid(xmin, xmax, points),
            };
            let report = check_seq_conditions(&phi, &psi, &seq, &xs)?;
            let mut config = shape_config("check-seq", &phi, &psi);
            config.insert("seq".into(), to_value(&seq));
            config.insert("xmin".into(), json!(xmin));
            config.insert("xmax".into(), json!(xmax));
            config.insert("points".into(), json!(points));
            config.insert("grid".into(), json!(format!("{grid:?}").to_lowercase()));
            emit(&json_document(Value::Object(config), to_value(&report)), output.as_deref())
        }
        Command::Equivalence {
            shapes,
            a,
            b,
            tmin,
            tmax,
            points,
            threshold,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            let (a, b): (Curve, Curve) = (input::load("curve a", &a)?, input::load("curve b", &b)?);
            if !(tmin > 0.0 && tmin <= tmax && tmax <= 1.0) {
                return Err(CliError::usage("need 0 < tmin <= tmax <= 1"));
            }
            let report = equivalence(
                |t| a.eval(&phi, &psi, t),
                |t| b.eval(&phi, &psi, t),
                tmin,
                tmax,
                points,
                threshold,
            )?;
            let mut config = shape_config("equivalence", &phi, &psi);
            config.insert("a".into(), to_value(&a));
            config.insert("b".into(), to_value(&b));
            config.insert("tmin".into(), json!(tmin));
            config.insert("tmax".into(), json!(tmax));
            config.insert("points".into(), json!(points));
            config.insert("threshold".into(), json!(threshold));
            emit(&json_document(Value::Object(config), to_value(&report)), output.as_deref())
        }
        Command::Witness {
            shapes,
            c,
            p,
            n,
            mu1,
            out,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            let mut spec = WitnessSpec::new(phi, psi, n, c, p);
            if let Some(m) = mu1 {
                spec = spec.with_mu1(m);
            }
            let w = build_witness(&spec)?;
            let check = w.verify()?;
            let norm = witness_lorentz_norm(&w)?;
            let upper = witness_qa_upper(&w)?;
            let bound = lower_bound_value(&spec)?;
            let psi_n = spec.psi.eval(n as f64)?;
            let config = json!({
                "command": "witness",
                "spec": spec,
                "mu1": w.log_mu[0].exp(),
            });
            let ok = check.passed(WITNESS_TOL) && upper.value >= bound;
            let text = match out {
                Format::Json => json_document(
                    config,
                    json!({
                        "log_mu": w.log_mu,
                        "log_a": w.log_a,
                        "lorentz_norm": norm,
                        "qa_upper": upper.value,
                        "qa_upper_log": upper.log_value,
                        "qa_upper_strategy": upper.strategy,
                        "qa_upper_blocks": upper.layer_blocks,
                        "lower_bound": bound,
                        "ratios": {
                            "qa_upper_over_lower_bound": upper.value / bound,
                            "qa_upper_over_psi_n": upper.value / psi_n,
                            "qa_upper_over_lorentz_norm": upper.value / norm,
                        },
                        "check": check,
                        "passed": ok,
                    }),
                ),
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = (0..w.len())
                        .map(|j| vec![(j + 1) as f64, w.log_mu[j], w.log_a[j]])
                        .collect();
                    csv_document(&config, &["j", "log_mu", "log_a"], &rows)
                }
            };
            emit(&text, output.as_deref())?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Invariant(format!("witness invariants failed: {check:?}")))
            }
        }
        Command::Omega {
            shapes,
            candidate,
            c,
            p,
            n_min,
            n_max,
            output,
        } => {
            let (phi, psi) = shapes.load()?;
            let candidate: CandidateShape = input::load("candidate", &candidate)?;
            if n_min < 1 || n_min > n_max {
                return Err(CliError::usage("need 1 <= n-min <= n-max"));
            }
            let mut rows = Vec::new();
            for n in n_min..=n_max {
                let w = build_witness(&WitnessSpec::new(phi.clone(), psi.clone(), n, c, p))?;
                let omega = omega_n(&candidate, &w)?;
                let psi_n = psi.eval(n as f64)?;
                rows.push(json!({"N": n, "omega": omega, "psi_N": psi_n, "omega_over_psi_N": omega / psi_n}));
            }
            let mut config = shape_config("omega", &phi, &psi);
            config.insert("candidate".into(), to_value(&candidate));
            config.insert("c".into(), json!(c));
            config.insert("p".into(), json!(p));
            config.insert("n_min".into(), json!(n_min));
            config.insert("n_max".into(), json!(n_max));
            emit(&json_document(Value::Object(config), json!({"rows": rows})), output.as_deref())
        }
        Command::Selftest { seed, cases, output } => {
            let report = selftest::run(seed, cases)?;
            let config = json!({"command": "selftest", "seed": seed, "cases": cases});
            let passed = report.all_passed;
            emit(&json_document(config, to_value(&report)), output.as_deref())?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Invariant("selftest found violations".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invariant(message)) => {
            eprintln!("{}", json!({"error": "invariant_failure", "message": message}));
            ExitCode::from(1)
        }
        Err(CliError::Usage { kind, message }) => {
            eprintln!("{}", json!({"error": kind, "message": message}));
            ExitCode::from(2)
        }
    }
}
