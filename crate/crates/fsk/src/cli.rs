//! The `fsk` command line.
//!
//! Exit codes: 0 for independent, separated, before or clean; 1 for the
//! negative verdict or a violation; 2 for usage and model errors; 3 when
//! a capacity limit is hit.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fsk_core::bayes::d_separated;
use fsk_core::distribution::{completeness_witness, cond_indep_vars, DEFAULT_TRIALS};
use fsk_core::history::Conditioning;
use fsk_core::relations::{strictly_before, structurally_before, structurally_independent};
use fsk_core::space::parse_shape;
use fsk_core::{FactoredSpace, FactorizingDistribution, IndexSubset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus;
use crate::model::{self, Model, ModelError, ModelFile};
use crate::verify::{self, Suite, SuiteReport};

#[derive(Debug, Parser)]
#[command(
    name = "fsk",
    version,
    about = "Query and verify factored space models"
)]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the history of a variable, optionally given events.
    History {
        #[arg(long)]
        model: PathBuf,
        /// Variable name, factor label, or comma-separated list of them.
        var: String,
        /// Event name or NAME=VALUE; repeated flags intersect.
        #[arg(long)]
        given: Vec<String>,
    },
    /// Decide structural independence of two variables.
    Indep {
        #[arg(long)]
        model: PathBuf,
        x: String,
        y: String,
        /// Conditioning variable.
        #[arg(long)]
        given: Option<String>,
        /// Search for a factorizing distribution violating independence.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Decide whether X comes structurally before Y.
    Before {
        #[arg(long)]
        model: PathBuf,
        x: String,
        y: String,
        /// Require strict precedence.
        #[arg(long)]
        strict: bool,
    },
    /// Decide d-separation of two node sets in the model's DAG.
    Dsep {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated node names.
        a: String,
        b: String,
        #[arg(long)]
        given: Option<String>,
    },
    /// Emit the factored space model constructed from the model's DAG.
    FromDag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the model file in canonical form.
    Fmt {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run a verification suite on a model or on random material.
    Verify {
        suite: Suite,
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        model: Option<PathBuf>,
        /// Shape such as 3x2x2: factor cardinalities, or node cardinalities
        /// for the dsep and tau suites.
        #[arg(long)]
        random: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distributions sampled per instance.
        #[arg(long)]
        trials: Option<usize>,
        /// Random instances when the model does not fix them.
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Core(#[from] fsk_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let capacity = match self {
            CliError::Model(e) => e.is_capacity(),
            CliError::Core(e) => matches!(e, fsk_core::Error::Capacity { .. }),
            _ => false,
        };
        if capacity {
            3
        } else {
            2
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing to
/// `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn verdict(
    out: &mut dyn Write,
    json: bool,
    key: &str,
    yes: bool,
    words: (&str, &str),
) -> Result<i32, CliError> {
    if json {
        writeln!(out, "{}", json!({ key: yes }))?;
    } else {
        writeln!(out, "{}", if yes { words.0 } else { words.1 })?;
    }
    Ok(if yes { 0 } else { 1 })
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::History { model, var, given } => {
            let m = model::load(model)?;
            let x = m.resolve(var)?;
            let c = m.given_event(given)?;
            let h = fsk_core::history::history(&x, &c)?;
            let labels: Vec<&str> = h.iter().map(|i| m.space.label(i)).collect();
            if cli.json {
                writeln!(out, "{}", json!({ "history": labels }))?;
            } else {
                writeln!(out, "{}", m.space.format_subset(h))?;
            }
            Ok(0)
        }
        Command::Indep {
            model,
            x,
            y,
            given,
            witness,
            seed,
            trials,
        } => {
            let m = model::load(model)?;
            let xv = m.resolve(x)?;
            let yv = m.resolve(y)?;
            let zv = given.as_deref().map(|z| m.resolve(z)).transpose()?;
            let independent = structurally_independent(&xv, &yv, zv.as_ref())?;
            let mut found = None;
            if *witness && !independent {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                if let Some(p) = completeness_witness(&xv, &yv, zv.as_ref(), *trials, &mut rng)? {
                    let at = cond_indep_vars(&p, &xv, &yv, zv.as_ref())?
                        .witness()
                        .expect("witness distributions violate independence");
                    found = Some((p, at));
                }
            }
            if cli.json {
                let mut v = json!({ "independent": independent });
                if let Some((p, (a, b, c))) = &found {
                    v["witness"] = json!({
                        "factors": factor_map(&m.space, p),
                        "at": { "x": a, "y": b, "z": c },
                    });
                } else if *witness && !independent {
                    v["witness"] = serde_json::Value::Null;
                }
                writeln!(out, "{v}")?;
            } else {
                writeln!(
                    out,
                    "{}",
                    if independent {
                        "structurally independent"
                    } else {
                        "structurally dependent"
                    }
                )?;
                match &found {
                    Some((p, (a, b, c))) => {
                        let at = match given {
                            Some(_) => format!("x={a}, y={b}, z={c}"),
                            None => format!("x={a}, y={b}"),
                        };
                        writeln!(out, "witness: statistically dependent at {at} under")?;
                        for (label, row) in factor_rows(&m.space, p) {
                            writeln!(out, "  {label}: {row}")?;
                        }
                    }
                    None if *witness && !independent => {
                        writeln!(out, "no witness found in {trials} trials")?;
                    }
                    None => {}
                }
            }
            Ok(if independent { 0 } else { 1 })
        }
        Command::Before {
            model,
            x,
            y,
            strict,
        } => {
            let m = model::load(model)?;
            let (xv, yv) = (m.resolve(x)?, m.resolve(y)?);
            if *strict {
                let yes = strictly_before(&xv, &yv)?;
                verdict(
                    out,
                    cli.json,
                    "strictly_before",
                    yes,
                    ("strictly before", "not strictly before"),
                )
            } else {
                let yes = structurally_before(&xv, &yv)?;
                verdict(
                    out,
                    cli.json,
                    "before",
                    yes,
                    ("structurally before", "not structurally before"),
                )
            }
        }
        Command::Dsep { model, a, b, given } => {
            let m = model::load(model)?;
            let g = &m.dag()?.dag;
            let nodes = |spec: &str| -> Result<IndexSubset, CliError> {
                spec.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|n| {
                        g.node_by_name(n)
                            .ok_or_else(|| CliError::Usage(format!("unknown node '{n}'")))
                    })
                    .collect()
            };
            let v3 = match given {
                Some(s) => nodes(s)?,
                None => IndexSubset::EMPTY,
            };
            let yes = d_separated(g, nodes(a)?, nodes(b)?, v3)?;
            verdict(
                out,
                cli.json,
                "d_separated",
                yes,
                ("d-separated", "not d-separated"),
            )
        }
        Command::FromDag { model, output } => {
            let m = model::load(model)?;
            let text = model::from_dag(&m)?.emit();
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Fmt { model } => {
            out.write_all(ModelFile::read(model)?.emit().as_bytes())?;
            Ok(0)
        }
        Command::Verify {
            suite,
            model,
            random,
            seed,
            trials,
            instances,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let material = match (model, random) {
                (Some(path), _) => Material::Model(Box::new(model::load(path)?)),
                (None, Some(shape)) => Material::Shape(parse_shape(shape)?),
                (None, None) => return Err(CliError::Usage("give --model or --random".into())),
            };
            let report = run_suite(*suite, &material, *trials, *instances, &mut rng)?;
            print_report(out, &report, cli.json)?;
            Ok(if report.is_clean() { 0 } else { 1 })
        }
    }
}

enum Material {
    Model(Box<Model>),
    Shape(Vec<usize>),
}

/// Ordered tuples over at most this many named variables are enumerated
/// exhaustively; larger models are sampled.
const EXHAUSTIVE_VARIABLES: usize = 12;

fn run_suite(
    suite: Suite,
    material: &Material,
    trials: Option<usize>,
    instances: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteReport, CliError> {
    let space_of = |cards: &[usize]| -> Result<Arc<FactoredSpace>, CliError> {
        Ok(Arc::new(FactoredSpace::from_cardinalities(cards)?))
    };
    match suite {
        Suite::Soundness | Suite::Completeness => {
            let triples = match material {
                Material::Model(m) => {
                    let vars = model_variables(m, rng);
                    verify::all_triples(&vars)
                }
                Material::Shape(cards) => verify::random_triples(rng, &space_of(cards)?, instances),
            };
            let trials = trials.unwrap_or(DEFAULT_TRIALS);
            if suite == Suite::Soundness {
                let fixed: Vec<(String, FactorizingDistribution)> = match material {
                    Material::Model(m) => m
                        .distributions
                        .iter()
                        .filter_map(|(n, d)| match d {
                            model::ModelDistribution::Factorizing(p) => {
                                Some((n.clone(), p.clone()))
                            }
                            model::ModelDistribution::General(_) => None,
                        })
                        .collect(),
                    Material::Shape(_) => Vec::new(),
                };
                verify::soundness(&triples, &fixed, trials, rng)
            } else {
                verify::completeness(&triples, trials, rng)
            }
        }
        Suite::Axioms => {
            let quads = match material {
                Material::Model(m) => {
                    let mut vars = model_variables(m, rng);
                    vars.push(verify::constant(&m.space));
                    verify::all_quads(&vars)
                }
                Material::Shape(cards) => verify::random_quads(rng, &space_of(cards)?, instances),
            };
            verify::axioms(&quads)
        }
        Suite::Dsep | Suite::Tau => {
            let g = match material {
                Material::Model(m) => m.dag()?.dag.clone(),
                Material::Shape(cards) => {
                    if let Some(&c) = cards.iter().find(|&&c| c < 2) {
                        return Err(CliError::Usage(format!("node cardinality {c} is below 2")));
                    }
                    corpus::random_dag(rng, cards)
                }
            };
            if suite == Suite::Dsep {
                verify::dsep(&g)
            } else {
                verify::tau(&g, trials.unwrap_or(100), rng)
            }
        }
    }
}

/// The model's variables, subsampled when there are too many to enumerate
/// all ordered tuples.
fn model_variables(m: &Model, rng: &mut ChaCha8Rng) -> Vec<verify::Named> {
    let mut vars = m.variables.clone();
    if vars.len() > EXHAUSTIVE_VARIABLES {
        use rand::seq::SliceRandom;
        vars.shuffle(rng);
        vars.truncate(EXHAUSTIVE_VARIABLES);
    }
    vars
}

fn factor_rows(space: &FactoredSpace, p: &FactorizingDistribution) -> Vec<(String, String)> {
    (0..space.num_factors())
        .map(|i| {
            let row: Vec<String> = p.factor(i).iter().map(|r| r.to_string()).collect();
            (space.label(i).to_string(), row.join(" "))
        })
        .collect()
}

fn factor_map(space: &FactoredSpace, p: &FactorizingDistribution) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for i in 0..space.num_factors() {
        let row: Vec<String> = p.factor(i).iter().map(|r| r.to_string()).collect();
        map.insert(space.label(i).to_string(), json!(row));
    }
    serde_json::Value::Object(map)
}

fn print_report(out: &mut dyn Write, report: &SuiteReport, json: bool) -> Result<(), CliError> {
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string(report).expect("reports serialize")
        )?;
        return Ok(());
    }
    let name = serde_json::to_value(report.suite).expect("suite names serialize");
    writeln!(out, "suite: {}", name.as_str().unwrap_or_default())?;
    writeln!(out, "checked: {}", report.checked)?;
    writeln!(out, "violations: {}", report.violations)?;
    for (k, v) in &report.notes {
        writeln!(out, "{k}: {v}")?;
    }
    for (k, c) in report.counterexamples.iter().enumerate() {
        writeln!(out, "counterexample {}: {}", k + 1, c.description)?;
        writeln!(out, "rerun: {}", c.rerun)?;
        out.write_all(c.model.emit().as_bytes())?;
    }
    Ok(())
}

/// Histories of `vars` given `C`, sharing one partition computation.
pub fn histories(m: &Model, vars: &[&str], given: &[String]) -> Result<Vec<IndexSubset>, CliError> {
    let cond = Conditioning::new(&m.given_event(given)?);
    vars.iter()
        .map(|v| Ok(cond.history(&m.resolve(v)?)?))
        .collect()
}
