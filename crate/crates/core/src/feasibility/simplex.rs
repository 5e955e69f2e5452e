//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Problems here have at most a few dozen rows and columns, so the tableau is
//! rebuilt from scratch on each solve and reduced costs are recomputed every
//! iteration. The scalar type decides exactness: `f64` compares against a small
//! tolerance, `BigRational` compares exactly.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub trait LpNum: Clone + Debug + PartialOrd + Signed {
    /// Values within `eps` of zero are treated as zero.
    fn eps() -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn from_int(x: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn is_pos(&self) -> bool {
        *self > Self::eps()
    }
    fn is_neg(&self) -> bool {
        *self < -Self::eps()
    }
    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl LpNum for f64 {
    fn eps() -> Self {
        1e-11
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn from_int(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpNum for BigRational {
    fn eps() -> Self {
        BigRational::zero()
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn from_int(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<T>, value: T },
}

struct Tableau<T> {
    /// `m` rows of `ncols + 1` entries; the last is the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    ncols: usize,
}

const MAX_PIVOTS: usize = 10_000;

impl<T: LpNum> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            // keep the pivot column an exact unit vector under rounding
            row[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over the current basis. Returns false if unbounded.
    fn optimize(&mut self, cost: &[T], allowed: &[bool]) -> bool {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.ncols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        d = d - cost[b].clone() * row[j].clone();
                    }
                }
                d.is_neg()
            });
            let Some(c) = entering else {
                return true;
            };
            let rhs = self.ncols;
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[c].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
        panic!("simplex exceeded {MAX_PIVOTS} pivots");
    }

    fn value_of(&self, j: usize) -> T {
        match self.basis.iter().position(|&b| b == j) {
            Some(i) => self.rows[i][self.ncols].clone(),
            None => T::zero(),
        }
    }
}

/// Minimizes `cost · x` subject to `a x = b`, `x ≥ 0`.
pub fn minimize<T: LpNum>(a: &[Vec<T>], b: &[T], cost: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = cost.len();
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<T> = ai
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        row.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..ncols).collect(),
        ncols,
    };

    // Phase I: drive the artificial variables to zero.
    let phase1: Vec<T> = (0..ncols)
        .map(|j| if j >= n { T::one() } else { T::zero() })
        .collect();
    let all = vec![true; ncols];
    t.optimize(&phase1, &all);
    let infeasibility = (n..ncols).fold(T::zero(), |acc, j| acc + t.value_of(j));
    if infeasibility.is_pos() {
        return LpOutcome::Infeasible;
    }
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_negligible() && !t.basis.contains(&j)) {
                t.pivot(r, c);
            }
        }
    }

    // Phase II over the original columns only.
    let mut cost2 = cost.to_vec();
    cost2.extend((0..m).map(|_| T::zero()));
    let allowed: Vec<bool> = (0..ncols).map(|j| j < n).collect();
    if !t.optimize(&cost2, &allowed) {
        return LpOutcome::Unbounded;
    }
    let x: Vec<T> = (0..n)
        .map(|j| {
            let v = t.value_of(j);
            if v.is_negative() {
                T::zero()
            } else {
                v
            }
        })
        .collect();
    let value = x
        .iter()
        .zip(cost)
        .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    LpOutcome::Optimal { x, value }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
