//! Point probabilities scaled to integers by a common denominator.
//!
//! Every conditional-independence identity used here is homogeneous of
//! degree two in the point probabilities, so checking it on integer weights
//! is the same as checking it on the rationals. When the common denominator
//! fits in 63 bits all products fit in a `u128`; otherwise big integers
//! are used.

use alloc::vec::Vec;
use core::ops::AddAssign;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::distribution::Rational;
use crate::space::{Event, FactoredSpace};

pub(crate) trait Weight:
    Clone + Zero + One + PartialEq + for<'a> AddAssign<&'a Self>
{
    fn times(&self, other: &Self) -> Self;
}

impl Weight for u128 {
    #[inline]
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl Weight for BigUint {
    #[inline]
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

pub(crate) enum Weights {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

const SMALL_BITS: u64 = 63;

/// Integer numerators of `probs` over their least common denominator.
pub(crate) fn scale(probs: &[Rational]) -> (Vec<BigUint>, BigUint) {
    let mut lcm = BigUint::one();
    for p in probs {
        lcm = lcm.lcm(p.denom().magnitude());
    }
    let nums = probs
        .iter()
        .map(|p| p.numer().magnitude() * (&lcm / p.denom().magnitude()))
        .collect();
    (nums, lcm)
}

impl Weights {
    pub fn from_factors(space: &FactoredSpace, factors: &[Vec<Rational>]) -> Weights {
        Self::from_factors_with_denominator(space, factors, SMALL_BITS).0
    }

    /// Also returns the common denominator. `small_bits` bounds the bit
    /// length of the denominator for which `u128` is used.
    pub fn from_factors_with_denominator(
        space: &FactoredSpace,
        factors: &[Vec<Rational>],
        small_bits: u64,
    ) -> (Weights, BigUint) {
        let scaled: Vec<(Vec<BigUint>, BigUint)> = factors.iter().map(|f| scale(f)).collect();
        let bits: u64 = scaled.iter().map(|(_, d)| d.bits()).sum();
        let den: BigUint = scaled.iter().map(|(_, d)| d).product();
        let w = if bits <= small_bits {
            let nums: Vec<Vec<u128>> = scaled
                .iter()
                .map(|(n, _)| n.iter().map(|x| x.to_u128().unwrap()).collect())
                .collect();
            Weights::Small(outer_product(space, &nums))
        } else {
            let nums: Vec<Vec<BigUint>> = scaled.into_iter().map(|(n, _)| n).collect();
            Weights::Big(outer_product(space, &nums))
        };
        (w, den)
    }

    /// Sums of weights over the fibers of a table with `num_values` values.
    pub fn push_forward(&self, table: &[u32], num_values: usize) -> Vec<BigUint> {
        match self {
            Weights::Small(w) => {
                let mut out = alloc::vec![0u128; num_values];
                for (x, v) in table.iter().zip(w) {
                    out[*x as usize] += v;
                }
                out.into_iter().map(BigUint::from).collect()
            }
            Weights::Big(w) => {
                let mut out = alloc::vec![BigUint::zero(); num_values];
                for (x, v) in table.iter().zip(w) {
                    out[*x as usize] += v;
                }
                out
            }
        }
    }

    pub fn from_points(probs: &[Rational]) -> Weights {
        let (nums, lcm) = scale(probs);
        if lcm.bits() <= SMALL_BITS {
            Weights::Small(nums.iter().map(|x| x.to_u128().unwrap()).collect())
        } else {
            Weights::Big(nums)
        }
    }

    pub fn event_ci(&self, a: &Event, b: &Event, c: &Event) -> bool {
        match self {
            Weights::Small(w) => event_ci(w, a, b, c),
            Weights::Big(w) => event_ci(w, a, b, c),
        }
    }

    pub fn vars_ci(&self, x: &[u32], y: &[u32], z: Option<&[u32]>) -> Option<(u32, u32, u32)> {
        match self {
            Weights::Small(w) => vars_ci(w, x, y, z),
            Weights::Big(w) => vars_ci(w, x, y, z),
        }
    }
}

/// Weight of every point, factor 0 varying fastest.
fn outer_product<W: Weight>(space: &FactoredSpace, factors: &[Vec<W>]) -> Vec<W> {
    let mut w: Vec<W> = Vec::with_capacity(space.total_size());
    w.push(W::one());
    for f in factors {
        let len = w.len();
        let mut next = Vec::with_capacity(len * f.len());
        for c in f {
            next.extend(w.iter().map(|r| r.times(c)));
        }
        debug_assert_eq!(next.len(), len * f.len());
        w = next;
    }
    w
}

fn sum<'a, W: Weight + 'a>(w: &'a [W], idx: impl Iterator<Item = usize>) -> W {
    let mut s = W::zero();
    for i in idx {
        s += &w[i];
    }
    s
}

/// `P(A∩C)·P(B∩C) = P(A∩B∩C)·P(C)`, true whenever `P(C) = 0`.
fn event_ci<W: Weight>(w: &[W], a: &Event, b: &Event, c: &Event) -> bool {
    let pc = sum(w, c.indices());
    if pc.is_zero() {
        return true;
    }
    let pac = sum(w, c.indices().filter(|&i| a.contains(i)));
    let pbc = sum(w, c.indices().filter(|&i| b.contains(i)));
    let pabc = sum(w, c.indices().filter(|&i| a.contains(i) && b.contains(i)));
    pac.times(&pbc) == pabc.times(&pc)
}

/// First `(x, y, z)` violating `P(x,z)·P(y,z) = P(x,y,z)·P(z)`.
fn vars_ci<W: Weight>(w: &[W], x: &[u32], y: &[u32], z: Option<&[u32]>) -> Option<(u32, u32, u32)> {
    let zv = |i: usize| z.map_or(0, |z| z[i]);
    let mut keys: Vec<(u32, u32, u32, usize)> = (0..w.len())
        .filter(|&i| !w[i].is_zero())
        .map(|i| (zv(i), x[i], y[i], i))
        .collect();
    keys.sort_unstable();

    let mut start = 0;
    while start < keys.len() {
        let zval = keys[start].0;
        let end = start + keys[start..].partition_point(|k| k.0 == zval);
        let group = &keys[start..end];

        // N(x,y,z) for this z, sorted by (x, y)
        let mut xyz: Vec<((u32, u32), W)> = Vec::new();
        for k in group {
            match xyz.last_mut() {
                Some((key, acc)) if *key == (k.1, k.2) => *acc += &w[k.3],
                _ => xyz.push(((k.1, k.2), w[k.3].clone())),
            }
        }
        let mut nz = W::zero();
        let mut nx: Vec<(u32, W)> = Vec::new();
        for ((xv, _), m) in &xyz {
            nz += m;
            match nx.last_mut() {
                Some((key, acc)) if key == xv => *acc += m,
                _ => nx.push((*xv, m.clone())),
            }
        }
        let mut by_y: Vec<(u32, &W)> = xyz.iter().map(|((_, yv), m)| (*yv, m)).collect();
        by_y.sort_unstable_by_key(|e| e.0);
        let mut ny: Vec<(u32, W)> = Vec::new();
        for (yv, m) in by_y {
            match ny.last_mut() {
                Some((key, acc)) if *key == yv => *acc += m,
                _ => ny.push((yv, m.clone())),
            }
        }
        let zero = W::zero();
        for (xv, wx) in &nx {
            for (yv, wy) in &ny {
                let joint = match xyz.binary_search_by_key(&(*xv, *yv), |e| e.0) {
                    Ok(pos) => &xyz[pos].1,
                    Err(_) => &zero,
                };
                if wx.times(wy) != joint.times(&nz) {
                    return Some((*xv, *yv, zval));
                }
            }
        }
        start = end;
    }
    None
}

/// Big-integer copy of the weights, for exercising both code paths.
#[cfg(test)]
pub(crate) fn force_big(w: &Weights) -> Weights {
    match w {
        Weights::Small(v) => Weights::Big(v.iter().map(|&x| BigUint::from(x)).collect()),
        Weights::Big(v) => Weights::Big(v.clone()),
    }
}
