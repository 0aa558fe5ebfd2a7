//! The expression language for variables in model files.
//!
//! Expressions are JSON objects with a single key naming the form:
//!
//! ```json
//! {"background": "c1"}          the factor's coordinate
//! {"var": "Y"}                  an earlier variable
//! {"tuple": [e1, e2]}           joint value, first component most significant
//! {"eq": [e1, e2]}              1 if equal, else 0
//! {"add_mod": [3, e1, e2]}      (e1 + e2) mod 3
//! {"xor": [e1, e2]}             bitwise exclusive or
//! {"cmp_gt": [e, 0]}            1 if e > 0, else 0
//! {"table_map": [e, [1, 0]]}    table[e]
//! {"const": 0}                  a constant
//! ```

use std::sync::Arc;

use fsk_core::{FactorId, FactoredSpace, Variable};
use serde::{Deserialize, Serialize};

/// A factor, by position or by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorRef {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Background(FactorRef),
    Var(String),
    Tuple(Vec<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    AddMod(u32, Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    CmpGt(Box<Expr>, u32),
    TableMap(Box<Expr>, Vec<u32>),
    Const(u32),
}

impl Expr {
    /// Evaluates the expression at every point. `lookup` resolves `var`
    /// references. Errors are human-readable messages.
    pub fn compile(
        &self,
        space: &Arc<FactoredSpace>,
        lookup: &dyn Fn(&str) -> Option<Variable>,
    ) -> Result<Variable, String> {
        let size = space.total_size();
        let binary = |table: Vec<u32>| Variable::new(space, table, 2).map_err(|e| e.to_string());
        match self {
            Expr::Background(r) => {
                let i = match r {
                    FactorRef::Index(i) => *i,
                    FactorRef::Label(l) => {
                        space
                            .factor_by_label(l)
                            .ok_or_else(|| format!("unknown factor '{l}'"))?
                            .0
                    }
                };
                Variable::background(space, FactorId(i)).map_err(|e| e.to_string())
            }
            Expr::Var(name) => lookup(name).ok_or_else(|| format!("unknown variable '{name}'")),
            Expr::Tuple(parts) => {
                let vars = parts
                    .iter()
                    .map(|e| e.compile(space, lookup))
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&Variable> = vars.iter().collect();
                Variable::joint(space, &refs).map_err(|e| e.to_string())
            }
            Expr::Eq(a, b) => {
                let (a, b) = (a.compile(space, lookup)?, b.compile(space, lookup)?);
                binary(
                    (0..size)
                        .map(|i| u32::from(a.value(i) == b.value(i)))
                        .collect(),
                )
            }
            Expr::AddMod(k, a, b) => {
                if *k == 0 {
                    return Err("add_mod needs a positive modulus".into());
                }
                let (a, b) = (a.compile(space, lookup)?, b.compile(space, lookup)?);
                let table = (0..size)
                    .map(|i| {
                        ((u64::from(a.value(i)) + u64::from(b.value(i))) % u64::from(*k)) as u32
                    })
                    .collect();
                Variable::new(space, table, *k).map_err(|e| e.to_string())
            }
            Expr::Xor(a, b) => {
                let (a, b) = (a.compile(space, lookup)?, b.compile(space, lookup)?);
                let values = a.num_values().max(b.num_values()).next_power_of_two();
                let table = (0..size).map(|i| a.value(i) ^ b.value(i)).collect();
                Variable::new(space, table, values).map_err(|e| e.to_string())
            }
            Expr::CmpGt(e, c) => {
                let e = e.compile(space, lookup)?;
                binary((0..size).map(|i| u32::from(e.value(i) > *c)).collect())
            }
            Expr::TableMap(e, table) => {
                let e = e.compile(space, lookup)?;
                if table.len() != e.num_values() as usize {
                    return Err(format!(
                        "table_map has {} entries, its argument has {} values",
                        table.len(),
                        e.num_values()
                    ));
                }
                let values = table.iter().max().map_or(1, |m| m + 1);
                let mapped = (0..size).map(|i| table[e.value(i) as usize]).collect();
                Variable::new(space, mapped, values).map_err(|e| e.to_string())
            }
            Expr::Const(c) => {
                Variable::new(space, vec![*c; size], c + 1).map_err(|e| e.to_string())
            }
        }
    }
}
