//! Structural independence, structural time and the semigraphoid axioms.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::history::{unconditional_history, Conditioning, DEFAULT_ENUMERATION_CAP};
use crate::space::{Event, FactorId, FactoredSpace};
use crate::subset::IndexSubset;
use crate::variable::Variable;
use crate::{Error, Result};

fn check_cap(space: &FactoredSpace) -> Result<()> {
    if space.num_factors() > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "number of factors",
            requested: space.num_factors(),
            limit: DEFAULT_ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// `X ⊥ Y | Z`: the histories of `X` and `Y` given `Z = z` are disjoint for
/// every `z` with a nonempty fiber. `Z = None` compares unconditional
/// histories.
pub fn structurally_independent(x: &Variable, y: &Variable, z: Option<&Variable>) -> Result<bool> {
    let space = x.space();
    y.check_same(space)?;
    check_cap(space)?;
    match z {
        None => {
            let cond = Conditioning::new(&Event::full(space));
            Ok(cond.history(x)?.is_disjoint(cond.history(y)?))
        }
        Some(z) => {
            z.check_same(space)?;
            for value in z.realized_values() {
                let cond = Conditioning::new(&z.fiber(value)?);
                if !cond.history(x)?.is_disjoint(cond.history(y)?) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// `X ≤ Y`: `h(X) ⊆ h(Y)`.
pub fn structurally_before(x: &Variable, y: &Variable) -> Result<bool> {
    y.check_same(x.space())?;
    Ok(unconditional_history(x)?.is_subset(unconditional_history(y)?))
}

/// `X < Y`: `h(X) ⊊ h(Y)`.
pub fn strictly_before(x: &Variable, y: &Variable) -> Result<bool> {
    y.check_same(x.space())?;
    Ok(unconditional_history(x)?.is_strict_subset(unconditional_history(y)?))
}

/// Checks that `X ≤ Y` agrees with "every background variable independent
/// of `Y` is independent of `X`". Returns whether both sides agree.
pub fn time_characterization_check(x: &Variable, y: &Variable) -> Result<bool> {
    let space = x.space();
    let before = structurally_before(x, y)?;
    let mut implied = true;
    for i in 0..space.num_factors() {
        let ui = Variable::background(space, FactorId(i))?;
        if structurally_independent(y, &ui, None)? && !structurally_independent(x, &ui, None)? {
            implied = false;
            break;
        }
    }
    Ok(before == implied)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
    Composition,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Symmetry,
        Axiom::Decomposition,
        Axiom::WeakUnion,
        Axiom::Contraction,
        Axiom::Intersection,
        Axiom::Composition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Symmetry => "symmetry",
            Axiom::Decomposition => "decomposition",
            Axiom::WeakUnion => "weak-union",
            Axiom::Contraction => "contraction",
            Axiom::Intersection => "intersection",
            Axiom::Composition => "composition",
        }
    }

    pub fn from_name(name: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of evaluating one axiom instance.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub axiom: Axiom,
    /// `[X, Y, Z, W]` when the instance fails.
    pub counterexample: Option<[Variable; 4]>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluates one instance of `axiom` for structural independence, with
/// `W` as the common conditioning variable.
pub fn check_axiom(
    axiom: Axiom,
    x: &Variable,
    y: &Variable,
    z: &Variable,
    w: &Variable,
) -> Result<AxiomReport> {
    let space: &Arc<FactoredSpace> = x.space();
    for v in [y, z, w] {
        v.check_same(space)?;
    }
    let ind = |a: &Variable, b: &Variable, c: &Variable| structurally_independent(a, b, Some(c));
    let pair = |a: &Variable, b: &Variable| Variable::joint(space, &[a, b]);

    let holds = match axiom {
        Axiom::Symmetry => !ind(x, y, w)? || ind(y, x, w)?,
        Axiom::Decomposition => !ind(x, &pair(y, z)?, w)? || ind(x, y, w)?,
        Axiom::WeakUnion => !ind(x, &pair(y, z)?, w)? || ind(x, z, &pair(y, w)?)?,
        Axiom::Contraction => {
            !(ind(x, y, w)? && ind(x, z, &pair(y, w)?)?) || ind(x, &pair(y, z)?, w)?
        }
        Axiom::Intersection => {
            let premise = ind(x, y, &pair(z, w)?)? && ind(x, z, &pair(y, w)?)? && y != z;
            !premise || ind(x, &pair(y, z)?, w)?
        }
        Axiom::Composition => !(ind(x, y, w)? && ind(x, z, w)?) || ind(x, &pair(y, z)?, w)?,
    };
    Ok(AxiomReport {
        axiom,
        counterexample: (!holds).then(|| [x.clone(), y.clone(), z.clone(), w.clone()]),
    })
}

/// Histories of several variables given each realized value of `z`.
///
/// Entry `[k][v]` is `h(vars[v] | Z = values[k])`.
pub fn conditional_histories(
    vars: &[&Variable],
    z: &Variable,
) -> Result<(Vec<u32>, Vec<Vec<IndexSubset>>)> {
    let space = z.space();
    check_cap(space)?;
    let values = z.realized_values();
    let mut out = Vec::with_capacity(values.len());
    for &value in &values {
        let cond = Conditioning::new(&z.fiber(value)?);
        out.push(
            vars.iter()
                .map(|v| cond.history(v))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((values, out))
}
