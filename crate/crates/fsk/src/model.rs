//! Model files: parsing, validation, canonical emission and DAG conversion.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use fsk_core::bayes::build_fsm;
use fsk_core::distribution::Distribution;
use fsk_core::{
    Cpt, Dag, Event, FactoredSpace, FactorizingDistribution, GeneralDistribution, Point, Rational,
    Variable,
};
use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::expr::{Expr, FactorRef};

/// An exact probability written as `"num/den"` (or an integer).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fraction(pub Rational);

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let r = Rational::from_str(s.trim())
            .map_err(|_| serde::de::Error::custom(format!("'{s}' is not a fraction")))?;
        Ok(Fraction(r))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub space: Vec<FactorDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<VariableDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distributions: Vec<DistributionDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dag: Option<DagDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDecl {
    pub label: String,
    pub card: usize,
}

/// Either `expr`, or `values` together with a dense `table`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<u32>>,
}

/// Either explicit `points`, or an `expr` whose nonzero set is the event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<Expr>,
}

/// Either one vector per factor (`factors`) or one probability per point
/// in canonical order (`points`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<Fraction>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Fraction>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagDecl {
    pub nodes: Vec<NodeDecl>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

/// `cpt` has one row per parent configuration; parents are taken in
/// node order and the first parent varies slowest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub name: String,
    pub card: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpt: Option<Vec<Vec<Fraction>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("{location}: {source}")]
    Core {
        location: String,
        source: fsk_core::Error,
    },
}

impl ModelError {
    fn invalid(location: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            location: location.into(),
            message: message.into(),
        }
    }

    fn core(location: impl Into<String>) -> impl FnOnce(fsk_core::Error) -> Self {
        let location = location.into();
        move |source| ModelError::Core { location, source }
    }

    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            ModelError::Core {
                source: fsk_core::Error::Capacity { .. },
                ..
            }
        )
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Canonical text: two-space indentation; arrays of scalars and short
    /// values on one line.
    pub fn emit(&self) -> String {
        let value = serde_json::to_value(self).expect("model files serialize");
        let mut out = String::new();
        write_value(&mut out, &value, 0, 0);
        out.push('\n');
        out
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(pos) => message[..pos].to_string(),
        None => message.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

const LINE_WIDTH: usize = 80;

fn write_inline(out: &mut String, v: &Value) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_inline(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_inline(out, item);
            }
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// `column` is where the value starts on the current line.
fn write_value(out: &mut String, v: &Value, indent: usize, column: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    let mut inline = String::new();
    write_inline(&mut inline, v);
    let scalar_array = matches!(v, Value::Array(items) if items.iter().all(is_scalar));
    let fits = indent > 0 && column + inline.len() < LINE_WIDTH;
    if is_scalar(v) || scalar_array || fits {
        out.push_str(&inline);
        return;
    }
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1, 2 * indent + 2);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                let key = Value::String(key.clone()).to_string();
                let _ = write!(out, "{key}: ");
                write_value(out, item, indent + 1, 2 * indent + 4 + key.len());
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
        _ => unreachable!("scalars are written inline"),
    }
}

#[derive(Clone, Debug)]
pub enum ModelDistribution {
    Factorizing(FactorizingDistribution),
    General(GeneralDistribution),
}

impl ModelDistribution {
    pub fn as_dyn(&self) -> &dyn Distribution {
        match self {
            ModelDistribution::Factorizing(p) => p,
            ModelDistribution::General(p) => p,
        }
    }
}

/// The DAG section, with CPTs when every node has one.
#[derive(Clone, Debug)]
pub struct DagModel {
    pub dag: Dag,
    pub cpt: Option<Cpt>,
}

/// A validated model with every definition evaluated.
#[derive(Clone, Debug)]
pub struct Model {
    pub file: ModelFile,
    pub space: Arc<FactoredSpace>,
    pub variables: Vec<(String, Variable)>,
    pub events: Vec<(String, Event)>,
    pub distributions: Vec<(String, ModelDistribution)>,
    pub dag: Option<DagModel>,
}

pub fn load(path: &Path) -> Result<Model, ModelError> {
    Model::compile(ModelFile::read(path)?)
}

fn check_unique<'a>(section: &str, names: impl Iterator<Item = &'a str>) -> Result<(), ModelError> {
    let mut seen = std::collections::BTreeSet::new();
    for (k, name) in names.enumerate() {
        if !seen.insert(name) {
            return Err(ModelError::invalid(
                format!("{section}[{k}]"),
                format!("duplicate name '{name}'"),
            ));
        }
    }
    Ok(())
}

fn check_row(row: &[Fraction], location: &str) -> Result<Vec<Rational>, ModelError> {
    if let Some(f) = row.iter().find(|f| f.0.is_negative()) {
        return Err(ModelError::invalid(
            location,
            format!("negative probability {}", f.0),
        ));
    }
    let sum: Rational = row.iter().map(|f| &f.0).sum();
    if !sum.is_one() {
        return Err(ModelError::invalid(
            location,
            format!("row sums to {sum}, expected 1"),
        ));
    }
    Ok(row.iter().map(|f| f.0.clone()).collect())
}

impl Model {
    pub fn compile(file: ModelFile) -> Result<Model, ModelError> {
        let space = Arc::new(
            FactoredSpace::new(file.space.iter().map(|f| (f.label.clone(), f.card)))
                .map_err(ModelError::core("space"))?,
        );

        check_unique("variables", file.variables.iter().map(|v| v.name.as_str()))?;
        let mut variables: Vec<(String, Variable)> = Vec::new();
        for (k, decl) in file.variables.iter().enumerate() {
            let location = format!("variables[{k}] ({})", decl.name);
            let var = match (&decl.expr, &decl.values, &decl.table) {
                (Some(expr), None, None) => {
                    let lookup = |name: &str| {
                        variables
                            .iter()
                            .find(|(n, _)| n == name)
                            .map(|(_, v)| v.clone())
                    };
                    expr.compile(&space, &lookup)
                        .map_err(|m| ModelError::invalid(&location, m))?
                }
                (None, Some(values), Some(table)) => Variable::new(&space, table.clone(), *values)
                    .map_err(ModelError::core(&location))?,
                _ => {
                    return Err(ModelError::invalid(
                        location,
                        "give either 'expr' or both 'values' and 'table'",
                    ))
                }
            };
            variables.push((decl.name.clone(), var));
        }

        check_unique("events", file.events.iter().map(|e| e.name.as_str()))?;
        let mut events = Vec::new();
        for (k, decl) in file.events.iter().enumerate() {
            let location = format!("events[{k}] ({})", decl.name);
            let event = match (&decl.points, &decl.expr) {
                (Some(points), None) => {
                    let points: Vec<Point> = points.iter().map(|p| Point(p.clone())).collect();
                    Event::from_points(&space, &points).map_err(ModelError::core(&location))?
                }
                (None, Some(expr)) => {
                    let lookup = |name: &str| {
                        variables
                            .iter()
                            .find(|(n, _)| n == name)
                            .map(|(_, v)| v.clone())
                    };
                    let v = expr
                        .compile(&space, &lookup)
                        .map_err(|m| ModelError::invalid(&location, m))?;
                    Event::from_predicate(&space, |i| v.value(i) != 0)
                }
                _ => {
                    return Err(ModelError::invalid(
                        location,
                        "give either 'points' or 'expr'",
                    ))
                }
            };
            events.push((decl.name.clone(), event));
        }

        check_unique(
            "distributions",
            file.distributions.iter().map(|d| d.name.as_str()),
        )?;
        let mut distributions = Vec::new();
        for (k, decl) in file.distributions.iter().enumerate() {
            let location = format!("distributions[{k}] ({})", decl.name);
            let dist = match (&decl.factors, &decl.points) {
                (Some(factors), None) => {
                    let rows = factors
                        .iter()
                        .enumerate()
                        .map(|(i, row)| check_row(row, &format!("{location}.factors[{i}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    ModelDistribution::Factorizing(
                        FactorizingDistribution::new(&space, rows)
                            .map_err(ModelError::core(&location))?,
                    )
                }
                (None, Some(points)) => {
                    let probs = check_row(points, &format!("{location}.points"))?;
                    ModelDistribution::General(
                        GeneralDistribution::new(&space, probs)
                            .map_err(ModelError::core(&location))?,
                    )
                }
                _ => {
                    return Err(ModelError::invalid(
                        location,
                        "give either 'factors' or 'points'",
                    ))
                }
            };
            distributions.push((decl.name.clone(), dist));
        }

        let dag = file.dag.as_ref().map(compile_dag).transpose()?;
        Ok(Model {
            file,
            space,
            variables,
            events,
            distributions,
            dag,
        })
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn event(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn distribution(&self, name: &str) -> Option<&ModelDistribution> {
        self.distributions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
    }

    /// A variable by name, a factor label as its background variable, or
    /// a comma-separated list of those as their joint.
    pub fn resolve(&self, spec: &str) -> Result<Variable, ModelError> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let vars = parts
            .iter()
            .map(|name| {
                if let Some(v) = self.variable(name) {
                    Ok(v.clone())
                } else if let Some(i) = self.space.factor_by_label(name) {
                    Variable::background(&self.space, i).map_err(ModelError::core(*name))
                } else {
                    Err(ModelError::invalid(*name, "unknown variable or factor"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if vars.len() == 1 {
            return Ok(vars.into_iter().next().expect("one variable"));
        }
        let refs: Vec<&Variable> = vars.iter().collect();
        Variable::joint(&self.space, &refs).map_err(ModelError::core(spec))
    }

    /// Intersection of the events named by `specs`: each is either an
    /// event name or `NAME=VALUE`. No specs give the whole space.
    pub fn given_event(&self, specs: &[String]) -> Result<Event, ModelError> {
        let mut c = Event::full(&self.space);
        for spec in specs {
            let e = match spec.split_once('=') {
                Some((name, value)) => {
                    let v: u32 = value
                        .trim()
                        .parse()
                        .map_err(|_| ModelError::invalid(spec.as_str(), "value is not a number"))?;
                    self.resolve(name.trim())?
                        .fiber(v)
                        .map_err(ModelError::core(spec.as_str()))?
                }
                None => self
                    .event(spec.trim())
                    .cloned()
                    .ok_or_else(|| ModelError::invalid(spec.as_str(), "unknown event"))?,
            };
            c = c
                .intersection(&e)
                .map_err(ModelError::core(spec.as_str()))?;
        }
        Ok(c)
    }

    pub fn dag(&self) -> Result<&DagModel, ModelError> {
        self.dag
            .as_ref()
            .ok_or_else(|| ModelError::invalid("dag", "model has no dag section"))
    }
}

fn compile_dag(decl: &DagDecl) -> Result<DagModel, ModelError> {
    let names: Vec<&str> = decl.nodes.iter().map(|n| n.name.as_str()).collect();
    check_unique("dag.nodes", names.iter().copied())?;
    let node = |name: &str, k: usize| {
        names.iter().position(|n| *n == name).ok_or_else(|| {
            ModelError::invalid(format!("dag.edges[{k}]"), format!("unknown node '{name}'"))
        })
    };
    let edges = decl
        .edges
        .iter()
        .enumerate()
        .map(|(k, (a, b))| Ok((node(a, k)?, node(b, k)?)))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let dag = Dag::new(decl.nodes.iter().map(|n| (n.name.clone(), n.card)), &edges)
        .map_err(ModelError::core("dag"))?;

    let with_cpt = decl.nodes.iter().filter(|n| n.cpt.is_some()).count();
    let cpt = if with_cpt == 0 {
        None
    } else if with_cpt < decl.nodes.len() {
        return Err(ModelError::invalid(
            "dag.nodes",
            "either every node or no node has a cpt",
        ));
    } else {
        let mut tables = Vec::new();
        for (v, n) in decl.nodes.iter().enumerate() {
            let rows = n.cpt.as_ref().expect("checked above");
            let location = format!("dag.nodes[{v}] ({}).cpt", n.name);
            if rows.len() != dag.num_configs(v) {
                return Err(ModelError::invalid(
                    location,
                    format!(
                        "{} rows, expected one per parent configuration ({})",
                        rows.len(),
                        dag.num_configs(v)
                    ),
                ));
            }
            let mut table = Vec::new();
            for (r, row) in rows.iter().enumerate() {
                let location = format!("{location}[{r}]");
                if row.len() != n.card {
                    return Err(ModelError::invalid(
                        location,
                        format!("{} entries, node has {} values", row.len(), n.card),
                    ));
                }
                table.push(check_row(row, &location)?);
            }
            tables.push(table);
        }
        Some(Cpt::new(&dag, tables).map_err(ModelError::core("dag"))?)
    };
    Ok(DagModel { dag, cpt })
}

/// The model file of the factored space model built from the DAG section:
/// the constructed space, one variable per node, the DAG itself and, when
/// CPTs are present, their factorizing counterpart named `tau_inverse`.
pub fn from_dag(model: &Model) -> Result<ModelFile, ModelError> {
    let dm = model.dag()?;
    let fsm = build_fsm(&dm.dag).map_err(ModelError::core("dag"))?;
    let space = fsm.space();
    let g = fsm.dag();
    let factors = (0..space.num_factors())
        .map(|i| FactorDecl {
            label: space.label(i).to_string(),
            card: space.cardinality(i),
        })
        .collect();
    let variables = (0..g.num_nodes())
        .map(|v| {
            if g.parents(v).is_empty() {
                VariableDecl {
                    name: g.name(v).to_string(),
                    expr: Some(Expr::Background(FactorRef::Label(
                        space.label(fsm.factor(v, 0).0).to_string(),
                    ))),
                    values: None,
                    table: None,
                }
            } else {
                let x = fsm.node_var(v);
                VariableDecl {
                    name: g.name(v).to_string(),
                    expr: None,
                    values: Some(x.num_values()),
                    table: Some(x.table().to_vec()),
                }
            }
        })
        .collect();
    let distributions = match &dm.cpt {
        Some(cpt) => {
            let p = fsm.tau_inverse_cpt(cpt).map_err(ModelError::core("dag"))?;
            vec![DistributionDecl {
                name: "tau_inverse".into(),
                factors: Some(
                    p.factors()
                        .iter()
                        .map(|row| row.iter().cloned().map(Fraction).collect())
                        .collect(),
                ),
                points: None,
            }]
        }
        None => Vec::new(),
    };
    Ok(ModelFile {
        space: factors,
        variables,
        events: Vec::new(),
        distributions,
        dag: model.file.dag.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const COINS: &str = r#"{
        "space": [{"label": "c1", "card": 2}, {"label": "c2", "card": 2}],
        "variables": [
            {"name": "X", "expr": {"xor": [{"background": "c1"}, {"background": "c2"}]}},
            {"name": "T", "values": 2, "table": [0, 1, 1, 1]}
        ],
        "events": [{"name": "agree", "points": [[0, 0], [1, 1]]}],
        "distributions": [{"name": "fair", "factors": [["1/2", "1/2"], ["1/2", "1/2"]]}]
    }"#;

    #[test]
    fn parses_and_compiles() {
        let m = Model::compile(ModelFile::from_json(COINS).unwrap()).unwrap();
        assert_eq!(m.variable("X").unwrap().table(), [0, 1, 1, 0]);
        assert_eq!(m.event("agree").unwrap().len(), 2);
        assert_eq!(m.resolve("c1").unwrap().table(), [0, 1, 0, 1]);
        assert_eq!(m.resolve("c1, c2").unwrap().table(), [0, 2, 1, 3]);
        let c = m.given_event(&["X=0".to_string()]).unwrap();
        assert_eq!(&c, m.event("agree").unwrap());
        assert!(m.resolve("nope").is_err());
    }

    #[test]
    fn emit_round_trip() {
        let f = ModelFile::from_json(COINS).unwrap();
        let text = f.emit();
        assert_eq!(ModelFile::from_json(&text).unwrap(), f);
        assert_eq!(ModelFile::from_json(&text).unwrap().emit(), text);
        assert!(text.contains(r#""factors": [["1/2", "1/2"], ["1/2", "1/2"]]"#));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err =
            ModelFile::from_json("{\n  \"space\": [\n    {\"label\": \"a\" \"card\": 2}\n  ]\n}")
                .unwrap_err();
        match err {
            ModelError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        assert!(ModelFile::from_json(r#"{"spaces": []}"#).is_err());
    }

    #[test]
    fn cpt_row_location() {
        let text = r#"{"dag": {"nodes": [
            {"name": "a", "card": 2, "cpt": [["1/2", "1/2"]]},
            {"name": "b", "card": 2, "cpt": [["1/2", "1/2"], ["1/2", "2/5"]]}
        ], "edges": [["a", "b"]]}}"#;
        let err = Model::compile(ModelFile::from_json(text).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dag.nodes[1] (b).cpt[1]"), "{msg}");
        assert!(msg.contains("9/10"), "{msg}");
    }

    #[test]
    fn cycles_are_rejected() {
        let text = r#"{"dag": {"nodes": [{"name": "a", "card": 2}, {"name": "b", "card": 2}],
            "edges": [["a", "b"], ["b", "a"]]}}"#;
        let err = Model::compile(ModelFile::from_json(text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("cycle"));
    }

    #[test]
    fn from_dag_pair() {
        let text = r#"{"dag": {"nodes": [{"name": "v1", "card": 2}, {"name": "v2", "card": 2}],
            "edges": [["v1", "v2"]]}}"#;
        let m = Model::compile(ModelFile::from_json(text).unwrap()).unwrap();
        let out = from_dag(&m).unwrap();
        assert_eq!(out.space.len(), 3);
        let back = Model::compile(ModelFile::from_json(&out.emit()).unwrap()).unwrap();
        assert_eq!(back.space.total_size(), 8);
        assert_eq!(back.variables.len(), 2);
        let fsm = build_fsm(&back.dag().unwrap().dag).unwrap();
        assert_eq!(
            back.variable("v2").unwrap().table(),
            fsm.node_var(1).table()
        );
    }
}
