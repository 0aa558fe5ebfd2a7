//! Random variables as dense tables over the canonical point encoding.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::space::{same_space, Event, FactorId, FactoredSpace};
use crate::subset::IndexSubset;
use crate::{Error, Result};

/// A total function `X: Ω → {0, .., k-1}`.
#[derive(Clone, PartialEq, Eq)]
pub struct Variable {
    space: Arc<FactoredSpace>,
    table: Vec<u32>,
    num_values: u32,
}

impl Variable {
    pub fn new(space: &Arc<FactoredSpace>, table: Vec<u32>, num_values: u32) -> Result<Self> {
        if num_values == 0 {
            return Err(Error::InvalidVariable(
                "a variable needs at least one value".into(),
            ));
        }
        if table.len() != space.total_size() {
            return Err(Error::InvalidVariable(format!(
                "table has {} entries, space has {} points",
                table.len(),
                space.total_size()
            )));
        }
        if let Some(&v) = table.iter().find(|&&v| v >= num_values) {
            return Err(Error::ValueOutOfRange {
                value: v,
                num_values,
            });
        }
        Ok(Variable {
            space: space.clone(),
            table,
            num_values,
        })
    }

    /// Builds the table by evaluating `f` at every point index.
    pub fn from_fn(
        space: &Arc<FactoredSpace>,
        num_values: u32,
        f: impl Fn(usize) -> u32,
    ) -> Result<Self> {
        Self::new(space, (0..space.total_size()).map(f).collect(), num_values)
    }

    pub fn constant(space: &Arc<FactoredSpace>) -> Self {
        Variable {
            space: space.clone(),
            table: vec![0; space.total_size()],
            num_values: 1,
        }
    }

    /// The background variable `Uᵢ(ω) = ωᵢ`.
    pub fn background(space: &Arc<FactoredSpace>, i: FactorId) -> Result<Self> {
        space.check_factor(i.0)?;
        Ok(Variable {
            space: space.clone(),
            table: (0..space.total_size())
                .map(|idx| space.coord(idx, i.0) as u32)
                .collect(),
            num_values: space.cardinality(i.0) as u32,
        })
    }

    /// `U_J`, valued in the canonical encoding of `Ω_J`. `U_∅` is constant.
    pub fn background_set(space: &Arc<FactoredSpace>, j: IndexSubset) -> Result<Self> {
        space.check_subset(j)?;
        let size: usize = j.iter().map(|i| space.cardinality(i)).product();
        Ok(Variable {
            space: space.clone(),
            table: (0..space.total_size())
                .map(|idx| space.project_index(idx, j) as u32)
                .collect(),
            num_values: size as u32,
        })
    }

    /// `(X₁, …, Xₙ)`. Values are coded lexicographically, the first
    /// component being the most significant digit. The empty joint is
    /// the constant variable.
    pub fn joint(space: &Arc<FactoredSpace>, vars: &[&Variable]) -> Result<Self> {
        let mut num_values: u64 = 1;
        for v in vars {
            if !same_space(space, &v.space) {
                return Err(Error::SpaceMismatch);
            }
            num_values *= u64::from(v.num_values);
            if num_values > u64::from(u32::MAX) {
                return Err(Error::Capacity {
                    what: "number of joint values",
                    requested: usize::MAX,
                    limit: u32::MAX as usize,
                });
            }
        }
        let mut table = vec![0u32; space.total_size()];
        for v in vars {
            for (t, &x) in table.iter_mut().zip(&v.table) {
                *t = *t * v.num_values + x;
            }
        }
        Ok(Variable {
            space: space.clone(),
            table,
            num_values: num_values as u32,
        })
    }

    /// `1_A`.
    pub fn indicator(a: &Event) -> Self {
        let space = a.space();
        let mut table = vec![0u32; space.total_size()];
        for idx in a.indices() {
            table[idx] = 1;
        }
        Variable {
            space: space.clone(),
            table,
            num_values: 2,
        }
    }

    pub fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    pub fn num_values(&self) -> u32 {
        self.num_values
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn value(&self, idx: usize) -> u32 {
        self.table[idx]
    }

    /// The event `{ω : X(ω) = x}`.
    pub fn fiber(&self, x: u32) -> Result<Event> {
        if x >= self.num_values {
            return Err(Error::ValueOutOfRange {
                value: x,
                num_values: self.num_values,
            });
        }
        Ok(Event::from_predicate(&self.space, |idx| {
            self.table[idx] == x
        }))
    }

    /// Values with a nonempty fiber, in increasing order.
    pub fn realized_values(&self) -> Vec<u32> {
        let mut seen = vec![false; self.num_values as usize];
        for &x in &self.table {
            seen[x as usize] = true;
        }
        (0..self.num_values).filter(|&x| seen[x as usize]).collect()
    }

    /// Whether `self` and `other` induce the same partition of `Ω`.
    pub fn same_fibers(&self, other: &Variable) -> bool {
        same_space(&self.space, &other.space)
            && derived_on(self, other, None)
            && derived_on(other, self, None)
    }

    pub(crate) fn check_same(&self, space: &Arc<FactoredSpace>) -> Result<()> {
        if same_space(&self.space, space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Variable")
            .field("num_values", &self.num_values)
            .field("table", &self.table)
            .finish()
    }
}

/// `X ▷_C Y`: `Y` is a deterministic function of `X` on the event `C`.
///
/// One pass builds the partial map `Val(X) → Val(Y)`; an empty `C` is
/// vacuously true.
pub fn is_derived(x: &Variable, y: &Variable, c: &Event) -> Result<bool> {
    y.check_same(&x.space)?;
    if !same_space(&x.space, c.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(derived_on(x, y, Some(c)))
}

fn derived_on(x: &Variable, y: &Variable, c: Option<&Event>) -> bool {
    const UNSET: u32 = u32::MAX;
    let mut map = vec![UNSET; x.num_values as usize];
    let mut check = |idx: usize| {
        let slot = &mut map[x.table[idx] as usize];
        let yv = y.table[idx];
        if *slot == UNSET {
            *slot = yv;
            true
        } else {
            *slot == yv
        }
    };
    match c {
        Some(c) => c.indices().all(&mut check),
        None => (0..x.table.len()).all(&mut check),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;

    fn space(cards: &[usize]) -> Arc<FactoredSpace> {
        Arc::new(FactoredSpace::from_cardinalities(cards).unwrap())
    }

    fn u(s: &Arc<FactoredSpace>, i: usize) -> Variable {
        Variable::background(s, FactorId(i)).unwrap()
    }

    fn xor(s: &Arc<FactoredSpace>) -> Variable {
        Variable::from_fn(s, 2, |idx| (s.coord(idx, 0) ^ s.coord(idx, 1)) as u32).unwrap()
    }

    #[test]
    fn background_examples() {
        let s = space(&[2, 2]);
        assert_eq!(u(&s, 0).table(), [0, 1, 0, 1]);
        assert_eq!(u(&s, 1).table(), [0, 0, 1, 1]);
        let s3 = space(&[3]);
        assert_eq!(u(&s3, 0).table(), [0, 1, 2]);
        assert_eq!(u(&s3, 0).num_values(), 3);
        assert_eq!(
            Variable::background(&s, FactorId(2)),
            Err(Error::UnknownFactor(2))
        );
    }

    #[test]
    fn joint_examples() {
        let s = space(&[2, 2]);
        let j = Variable::joint(&s, &[&u(&s, 0), &u(&s, 1)]).unwrap();
        assert_eq!(j.num_values(), 4);
        // lexicographic: (u0, u1) -> 2*u0 + u1
        assert_eq!(j.table(), [0, 2, 1, 3]);
        let mut seen = j.table().to_vec();
        seen.sort();
        assert_eq!(seen, [0, 1, 2, 3]);

        let c = Variable::joint(&s, &[]).unwrap();
        assert_eq!(c.table(), [0, 0, 0, 0]);
        assert_eq!(c.num_values(), 1);

        let x = xor(&s);
        let xx = Variable::joint(&s, &[&x, &x]).unwrap();
        assert!(xx.same_fibers(&x));

        let other = space(&[2, 3]);
        assert_eq!(
            Variable::joint(&s, &[&u(&other, 0)]),
            Err(Error::SpaceMismatch)
        );
    }

    #[test]
    fn indicator_examples() {
        let s = space(&[2, 2]);
        assert_eq!(Variable::indicator(&Event::empty(&s)).table(), [0, 0, 0, 0]);
        assert_eq!(Variable::indicator(&Event::full(&s)).table(), [1, 1, 1, 1]);
        let agree = Event::from_points(&s, &[Point(vec![0, 0]), Point(vec![1, 1])]).unwrap();
        assert_eq!(Variable::indicator(&agree).table(), [1, 0, 0, 1]);
    }

    #[test]
    fn fiber_examples() {
        let s = space(&[2, 2]);
        let f = u(&s, 0).fiber(0).unwrap();
        assert_eq!(
            f,
            Event::from_points(&s, &[Point(vec![0, 0]), Point(vec![0, 1])]).unwrap()
        );
        assert_eq!(Variable::constant(&s).fiber(0).unwrap(), Event::full(&s));
        // xor = 1 at (1,0) and (0,1), i.e. indices 1 and 2
        assert_eq!(
            xor(&s).fiber(1).unwrap(),
            Event::from_indices(&s, [1, 2]).unwrap()
        );
        assert!(matches!(
            u(&s, 0).fiber(2),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn is_derived_examples() {
        let s = space(&[2, 2]);
        let full = Event::full(&s);
        assert!(is_derived(&u(&s, 0), &Variable::constant(&s), &full).unwrap());
        let both = Variable::joint(&s, &[&u(&s, 0), &u(&s, 1)]).unwrap();
        assert!(is_derived(&both, &xor(&s), &full).unwrap());
        assert!(!is_derived(&u(&s, 0), &u(&s, 1), &full).unwrap());
        let agree = Event::from_indices(&s, [0, 3]).unwrap();
        assert!(is_derived(&u(&s, 0), &u(&s, 1), &agree).unwrap());
        assert!(is_derived(&u(&s, 0), &u(&s, 1), &Event::empty(&s)).unwrap());
    }

    #[test]
    fn variable_validation() {
        let s = space(&[2]);
        assert!(Variable::new(&s, vec![0, 2], 2).is_err());
        assert!(Variable::new(&s, vec![0], 2).is_err());
        assert!(Variable::new(&s, vec![0, 0], 0).is_err());
    }
}
