//! Verification suites over the library oracles.
//!
//! Each suite counts checked instances and violations. A violation comes
//! with a self-contained model file which reproduces it when passed back
//! to `fsk verify` with the printed command.

use std::collections::BTreeMap;
use std::sync::Arc;

use fsk_core::bayes::{build_fsm, FsmConstruction};
use fsk_core::distribution::{
    completeness_witness, cond_indep_vars, sample_factorizing, DEFAULT_DENOMINATOR_BOUND,
};
use fsk_core::relations::{check_axiom, structurally_independent};
use fsk_core::{Axiom, Dag, FactoredSpace, FactorizingDistribution, Variable};
use rand::Rng;
use serde::Serialize;

use crate::model::{
    DagDecl, DistributionDecl, FactorDecl, Fraction, ModelFile, NodeDecl, VariableDecl,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Soundness,
    Completeness,
    Axioms,
    Dsep,
    Tau,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub description: String,
    pub rerun: String,
    pub model: ModelFile,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checked: usize,
    pub violations: usize,
    /// Extra counters, e.g. instances where a premise held.
    pub notes: BTreeMap<String, usize>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checked: 0,
            violations: 0,
            notes: BTreeMap::new(),
            counterexamples: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    fn note(&mut self, key: &str) {
        *self.notes.entry(key.to_string()).or_default() += 1;
    }

    fn violation(&mut self, c: Counterexample) {
        self.violations += 1;
        // keep reports readable when something is badly wrong
        if self.counterexamples.len() < 10 {
            self.counterexamples.push(c);
        }
    }
}

pub type Named = (String, Variable);

/// `X ⊥ Y | Z` with `Z` optional.
#[derive(Clone, Debug)]
pub struct Triple {
    pub x: Named,
    pub y: Named,
    pub z: Option<Named>,
}

impl Triple {
    fn describe(&self) -> String {
        match &self.z {
            Some(z) => format!("{} vs {} given {}", self.x.0, self.y.0, z.0),
            None => format!("{} vs {}", self.x.0, self.y.0),
        }
    }

    fn vars(&self) -> Vec<&Named> {
        let mut out = vec![&self.x, &self.y];
        out.extend(self.z.as_ref());
        out
    }
}

/// Every ordered triple over `vars`, `Z` ranging over "none" and `vars`.
pub fn all_triples(vars: &[Named]) -> Vec<Triple> {
    let mut out = Vec::new();
    for x in vars {
        for y in vars {
            out.push(Triple {
                x: x.clone(),
                y: y.clone(),
                z: None,
            });
            for z in vars {
                out.push(Triple {
                    x: x.clone(),
                    y: y.clone(),
                    z: Some(z.clone()),
                });
            }
        }
    }
    out
}

/// `count` triples of fresh random variables on `space`.
pub fn random_triples<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FactoredSpace>,
    count: usize,
) -> Vec<Triple> {
    (0..count)
        .map(|_| {
            let mut var =
                |name: &str| (name.to_string(), crate::corpus::random_variable(rng, space));
            let x = var("X");
            let y = var("Y");
            let z = var("Z");
            Triple { x, y, z: Some(z) }
        })
        .collect()
}

fn space_decls(space: &FactoredSpace) -> Vec<FactorDecl> {
    (0..space.num_factors())
        .map(|i| FactorDecl {
            label: space.label(i).to_string(),
            card: space.cardinality(i),
        })
        .collect()
}

fn table_decl((name, v): &Named) -> VariableDecl {
    VariableDecl {
        name: name.clone(),
        expr: None,
        values: Some(v.num_values()),
        table: Some(v.table().to_vec()),
    }
}

fn factorizing_decl(name: &str, p: &FactorizingDistribution) -> DistributionDecl {
    DistributionDecl {
        name: name.to_string(),
        factors: Some(
            p.factors()
                .iter()
                .map(|row| row.iter().cloned().map(Fraction).collect())
                .collect(),
        ),
        points: None,
    }
}

/// A model holding `vars` as tables, plus optional distributions.
pub fn variables_model(
    space: &FactoredSpace,
    vars: &[&Named],
    distributions: &[(&str, &FactorizingDistribution)],
) -> ModelFile {
    let mut seen: Vec<&str> = Vec::new();
    let mut variables = Vec::new();
    for v in vars {
        if !seen.contains(&v.0.as_str()) {
            seen.push(&v.0);
            variables.push(table_decl(v));
        }
    }
    ModelFile {
        space: space_decls(space),
        variables,
        events: Vec::new(),
        distributions: distributions
            .iter()
            .map(|(n, p)| factorizing_decl(n, p))
            .collect(),
        dag: None,
    }
}

/// The DAG section describing `g`, without CPTs.
pub fn dag_model(g: &Dag) -> ModelFile {
    ModelFile {
        dag: Some(DagDecl {
            nodes: (0..g.num_nodes())
                .map(|v| NodeDecl {
                    name: g.name(v).to_string(),
                    card: g.cardinality(v),
                    cpt: None,
                })
                .collect(),
            edges: g
                .edges()
                .into_iter()
                .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
                .collect(),
        }),
        ..ModelFile::default()
    }
}

fn core_err(e: fsk_core::Error) -> crate::cli::CliError {
    crate::cli::CliError::Core(e)
}

type SuiteResult = Result<SuiteReport, crate::cli::CliError>;

/// Structural independence implies statistical independence under
/// `trials` sampled factorizing distributions and under every `fixed` one.
pub fn soundness<R: Rng + ?Sized>(
    triples: &[Triple],
    fixed: &[(String, FactorizingDistribution)],
    trials: usize,
    rng: &mut R,
) -> SuiteResult {
    let mut report = SuiteReport::new(Suite::Soundness);
    for t in triples {
        report.checked += 1;
        let z = t.z.as_ref().map(|z| &z.1);
        if !structurally_independent(&t.x.1, &t.y.1, z).map_err(core_err)? {
            continue;
        }
        report.note("structurally-independent");
        let space = t.x.1.space().clone();
        let sampled =
            (0..trials).map(|_| sample_factorizing(&space, rng, DEFAULT_DENOMINATOR_BOUND));
        let fixed = fixed.iter().map(|(_, p)| p.clone());
        for p in fixed.chain(sampled) {
            report.note("distributions");
            let verdict = cond_indep_vars(&p, &t.x.1, &t.y.1, z).map_err(core_err)?;
            if !verdict.is_independent() {
                report.violation(Counterexample {
                    description: format!(
                        "{}: structurally independent but dependent under 'p'",
                        t.describe()
                    ),
                    rerun: "fsk verify soundness --model FILE --trials 0".into(),
                    model: variables_model(&space, &t.vars(), &[("p", &p)]),
                });
                break;
            }
        }
    }
    Ok(report)
}

/// Every structurally dependent triple has a violating factorizing
/// distribution among `trials` samples.
pub fn completeness<R: Rng + ?Sized>(
    triples: &[Triple],
    trials: usize,
    rng: &mut R,
) -> SuiteResult {
    let mut report = SuiteReport::new(Suite::Completeness);
    for t in triples {
        report.checked += 1;
        let z = t.z.as_ref().map(|z| &z.1);
        if structurally_independent(&t.x.1, &t.y.1, z).map_err(core_err)? {
            continue;
        }
        report.note("structurally-dependent");
        if completeness_witness(&t.x.1, &t.y.1, z, trials, rng)
            .map_err(core_err)?
            .is_none()
        {
            report.violation(Counterexample {
                description: format!(
                    "{}: structurally dependent but no witness in {trials} trials",
                    t.describe()
                ),
                rerun: format!("fsk verify completeness --model FILE --trials {trials}"),
                model: variables_model(t.x.1.space(), &t.vars(), &[]),
            });
        } else {
            report.note("witnesses");
        }
    }
    Ok(report)
}

/// Instances `(X, Y, Z, W)` of every axiom. Failures of the intersection
/// axiom are expected and only counted as notes.
pub fn axioms(quads: &[[Named; 4]]) -> SuiteResult {
    let mut report = SuiteReport::new(Suite::Axioms);
    for q in quads {
        for axiom in Axiom::ALL {
            report.checked += 1;
            let r = check_axiom(axiom, &q[0].1, &q[1].1, &q[2].1, &q[3].1).map_err(core_err)?;
            if r.holds() {
                continue;
            }
            if axiom == Axiom::Intersection {
                report.note("intersection-failures");
                continue;
            }
            report.violation(Counterexample {
                description: format!(
                    "{axiom} fails for X={}, Y={}, Z={}, W={}",
                    q[0].0, q[1].0, q[2].0, q[3].0
                ),
                rerun: "fsk verify axioms --model FILE".into(),
                model: variables_model(q[0].1.space(), &q.iter().collect::<Vec<_>>(), &[]),
            });
        }
    }
    Ok(report)
}

/// Every ordered quadruple over `vars`.
pub fn all_quads(vars: &[Named]) -> Vec<[Named; 4]> {
    let mut out = Vec::new();
    for a in vars {
        for b in vars {
            for c in vars {
                for d in vars {
                    out.push([a.clone(), b.clone(), c.clone(), d.clone()]);
                }
            }
        }
    }
    out
}

/// `count` quadruples of fresh random variables, `W` constant half the time.
pub fn random_quads<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FactoredSpace>,
    count: usize,
) -> Vec<[Named; 4]> {
    (0..count)
        .map(|_| {
            let var = |rng: &mut R, name: &str| {
                (name.to_string(), crate::corpus::random_variable(rng, space))
            };
            let x = var(rng, "X");
            let y = var(rng, "Y");
            let z = var(rng, "Z");
            let w = if rng.gen_bool(0.5) {
                ("W".to_string(), Variable::constant(space))
            } else {
                var(rng, "W")
            };
            [x, y, z, w]
        })
        .collect()
}

/// d-separation against structural independence, and ancestry against
/// strict precedence, on the construction of `g`.
pub fn dsep(g: &Dag) -> SuiteResult {
    let fsm = build_fsm(g).map_err(core_err)?;
    let mut report = SuiteReport::new(Suite::Dsep);
    let mut r = fsm.check_separation().map_err(core_err)?;
    r.merge(fsm.check_ancestors().map_err(core_err)?);
    report.checked = r.triples_checked + r.pairs_checked;
    let names =
        |s: fsk_core::IndexSubset| s.iter().map(|v| g.name(v)).collect::<Vec<_>>().join(",");
    for (v1, v2, v3, graphical) in &r.separation_mismatches {
        report.violation(Counterexample {
            description: format!(
                "{{{}}} vs {{{}}} given {{{}}}: d-separated is {graphical}, structural independence is {}",
                names(*v1),
                names(*v2),
                names(*v3),
                !graphical
            ),
            rerun: "fsk verify dsep --model FILE".into(),
            model: dag_model(g),
        });
    }
    for (a, v, graphical) in &r.ancestor_mismatches {
        report.violation(Counterexample {
            description: format!(
                "{} ancestor of {} is {graphical}, strict precedence is {}",
                g.name(*a),
                g.name(*v),
                !graphical
            ),
            rerun: "fsk verify dsep --model FILE".into(),
            model: dag_model(g),
        });
    }
    for v in &r.history_mismatches {
        report.violation(Counterexample {
            description: format!(
                "history of {} is not the union of its ancestors' factors",
                g.name(*v)
            ),
            rerun: "fsk verify dsep --model FILE".into(),
            model: dag_model(g),
        });
    }
    Ok(report)
}

/// `τ⁻¹∘τ` and `τ∘τ⁻¹` round trips on `trials` random inputs of each kind.
pub fn tau<R: Rng + ?Sized>(g: &Dag, trials: usize, rng: &mut R) -> SuiteResult {
    let fsm: FsmConstruction = build_fsm(g).map_err(core_err)?;
    let r = fsm
        .check_tau(rng, trials, DEFAULT_DENOMINATOR_BOUND)
        .map_err(core_err)?;
    let mut report = SuiteReport::new(Suite::Tau);
    report.checked = r.tau_checked;
    for _ in 0..r.tau_failures {
        report.violation(Counterexample {
            description: "round trip through tau and its inverse changed the distribution".into(),
            rerun: format!("fsk verify tau --model FILE --trials {trials}"),
            model: dag_model(g),
        });
    }
    Ok(report)
}

/// Constant variable used as the default `W`.
pub fn constant(space: &Arc<FactoredSpace>) -> Named {
    ("const".to_string(), Variable::constant(space))
}
