//! Joint-distribution feasibility for target pairwise correlations of up to
//! four ±1 variables.
//!
//! A target is realizable iff some probability vector over the 2^n sign
//! assignments ("atoms") reproduces it. Two linear programs settle this:
//!
//! * the witness LP maximizes the smallest atom probability `t` subject to the
//!   targets. It is feasible iff the target is realizable, and `t > 0` iff the
//!   target lies in the relative interior (a linear image of the simplex's
//!   interior is the interior of the image), which gives the boundary flag;
//! * if the witness LP is infeasible, the separation LP finds the affine
//!   functional `f(c) = y0 + Σ y_k c_k`, `|y_k| ≤ 1`, that is non-negative on
//!   every atom and most negative at the target. Its optimum is minus the L1
//!   distance from the target to the correlation polytope; for the usual
//!   Bell facets this is exactly the facet value.

mod simplex;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use simplex::{minimize, rational, LpNum, LpOutcome};

/// Tolerance for witness reproduction and facet satisfaction in `f64`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTarget {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Single-variable mean constraints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moments {
    /// Every variable has mean 0 (fair ±1 marginals).
    #[default]
    Zero,
    /// No constraint on means.
    Free,
    /// Explicit mean per variable.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTarget {
    pub n: usize,
    pub pairs: Vec<PairTarget>,
    #[serde(default)]
    pub moments: Moments,
    /// Optional variable names used when rendering certificates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl CorrelationTarget {
    pub fn new(n: usize, pairs: &[(usize, usize, f64)]) -> Self {
        Self {
            n,
            pairs: pairs
                .iter()
                .map(|&(i, j, value)| PairTarget { i, j, value })
                .collect(),
            moments: Moments::Zero,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_moments(mut self, moments: Moments) -> Self {
        self.moments = moments;
        self
    }

    /// Three-variable target `(c01, c02, c12)`.
    pub fn triple(c01: f64, c02: f64, c12: f64) -> Self {
        Self::new(3, &[(0, 1, c01), (0, 2, c02), (1, 2, c12)])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedTarget(m));
        if !(2..=4).contains(&self.n) {
            return bad(format!("n = {} outside 2..=4", self.n));
        }
        let mut seen = BTreeSet::new();
        for p in &self.pairs {
            if p.i >= self.n || p.j >= self.n || p.i == p.j {
                return bad(format!("bad index pair ({}, {})", p.i, p.j));
            }
            if !seen.insert((p.i.min(p.j), p.i.max(p.j))) {
                return bad(format!("duplicate pair ({}, {})", p.i, p.j));
            }
            if !(p.value.is_finite() && (-1.0..=1.0).contains(&p.value)) {
                return bad(format!("pair ({}, {}) value {} outside [-1, 1]", p.i, p.j, p.value));
            }
        }
        if let Moments::Values(v) = &self.moments {
            if v.len() != self.n {
                return bad(format!("{} moments for {} variables", v.len(), self.n));
            }
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && (-1.0..=1.0).contains(*x))) {
                return bad(format!("moment {x} outside [-1, 1]"));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.n {
                return bad(format!("{} labels for {} variables", l.len(), self.n));
            }
        }
        Ok(())
    }

    fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("x{i}"),
        }
    }

    /// Linear constraints other than normalization, as (label, coefficient per atom, target).
    fn constraints(&self) -> Vec<(String, Vec<i64>, f64)> {
        let atoms = atom_signs(self.n);
        let mut out = Vec::new();
        for p in &self.pairs {
            let coeffs = atoms.iter().map(|a| (a[p.i] * a[p.j]) as i64).collect();
            out.push((format!("<{},{}>", self.label(p.i), self.label(p.j)), coeffs, p.value));
        }
        let means: Option<Vec<f64>> = match &self.moments {
            Moments::Zero => Some(vec![0.0; self.n]),
            Moments::Free => None,
            Moments::Values(v) => Some(v.clone()),
        };
        if let Some(means) = means {
            for (i, m) in means.into_iter().enumerate() {
                let coeffs = atoms.iter().map(|a| a[i] as i64).collect();
                out.push((format!("<{}>", self.label(i)), coeffs, m));
            }
        }
        out
    }
}

/// Sign assignments in atom order: bit `i` of the atom index set means variable `i` is −1.
pub fn atom_signs(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << n)
        .map(|a| (0..n).map(|i| if a >> i & 1 == 0 { 1 } else { -1 }).collect())
        .collect()
}

/// Separating functional `constant + Σ coefficient·term ≥ 0`, valid on every
/// atom and negative at the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub constant: f64,
    /// `(term label, coefficient)`, e.g. `("<P,E>", -1.0)`.
    pub terms: Vec<(String, f64)>,
    /// The functional at the target (negative).
    pub value_at_target: f64,
    /// `-value_at_target`: how far the target lies outside the polytope.
    pub violation: f64,
    pub inequality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Feasible but on the polytope boundary (no strictly positive witness).
    pub boundary: bool,
    /// Probability per atom, indexed as in [`atom_signs`].
    pub witness: Option<Vec<f64>>,
    pub certificate: Option<Certificate>,
}

impl FeasibilityResult {
    pub fn verdict(&self) -> &'static str {
        if self.feasible {
            "FEASIBLE"
        } else {
            "INFEASIBLE"
        }
    }

    /// True when the witness gives every atom the same weight.
    pub fn witness_is_uniform(&self) -> bool {
        self.witness.as_ref().is_some_and(|w| {
            let u = 1.0 / w.len() as f64;
            w.iter().all(|p| (p - u).abs() <= FEASIBILITY_TOL)
        })
    }
}

struct Solved<T> {
    witness: Option<(Vec<T>, T)>,
    separation: Option<(T, Vec<T>, T)>,
}

fn to_num<T: LpNum>(x: f64) -> Result<T> {
    T::from_f64(x).ok_or_else(|| Error::MalformedTarget(format!("non-finite value {x}")))
}

fn solve<T: LpNum>(target: &CorrelationTarget) -> Result<Solved<T>> {
    target.validate()?;
    let atoms = 1usize << target.n;
    let cons = target.constraints();

    // Witness LP over (q_0..q_{A-1}, t): p_a = q_a + t, maximize t.
    let mut a = Vec::with_capacity(cons.len() + 1);
    let mut b = Vec::with_capacity(cons.len() + 1);
    let mut row: Vec<T> = vec![T::from_int(1); atoms];
    row.push(T::from_int(atoms as i64));
    a.push(row);
    b.push(T::from_int(1));
    for (_, coeffs, value) in &cons {
        let mut row: Vec<T> = coeffs.iter().map(|&c| T::from_int(c)).collect();
        row.push(T::from_int(coeffs.iter().sum()));
        a.push(row);
        b.push(to_num(*value)?);
    }
    let mut cost = vec![T::from_int(0); atoms];
    cost.push(T::from_int(-1));
    if let LpOutcome::Optimal { x, .. } = minimize(&a, &b, &cost) {
        let t = x[atoms].clone();
        let p = x[..atoms].iter().map(|q| q.clone() + t.clone()).collect();
        return Ok(Solved {
            witness: Some((p, t)),
            separation: None,
        });
    }

    // Separation LP. Variables: y0+, y0-, u_k (y_k = u_k - 1), s_k (u_k + s_k = 2), slack_a.
    let k = cons.len();
    let nvars = 2 + 2 * k + atoms;
    let mut a = Vec::with_capacity(atoms + k);
    let mut b = Vec::with_capacity(atoms + k);
    for atom in 0..atoms {
        let mut row = vec![T::from_int(0); nvars];
        row[0] = T::from_int(1);
        row[1] = T::from_int(-1);
        let mut rhs = 0i64;
        for (idx, (_, coeffs, _)) in cons.iter().enumerate() {
            row[2 + idx] = T::from_int(coeffs[atom]);
            rhs += coeffs[atom];
        }
        row[2 + 2 * k + atom] = T::from_int(-1);
        a.push(row);
        b.push(T::from_int(rhs));
    }
    for idx in 0..k {
        let mut row = vec![T::from_int(0); nvars];
        row[2 + idx] = T::from_int(1);
        row[2 + k + idx] = T::from_int(1);
        a.push(row);
        b.push(T::from_int(2));
    }
    let mut cost = vec![T::from_int(0); nvars];
    cost[0] = T::from_int(1);
    cost[1] = T::from_int(-1);
    let mut offset = T::from_int(0);
    for (idx, (_, _, value)) in cons.iter().enumerate() {
        let v: T = to_num(*value)?;
        cost[2 + idx] = v.clone();
        offset = offset - v;
    }
    match minimize(&a, &b, &cost) {
        LpOutcome::Optimal { x, value } => {
            let y0 = x[0].clone() - x[1].clone();
            let ys = (0..k).map(|idx| x[2 + idx].clone() - T::from_int(1)).collect();
            Ok(Solved {
                witness: None,
                separation: Some((y0, ys, value + offset)),
            })
        }
        // The separation LP is always feasible (y = 0, y0 = 0) and bounded below
        // once the witness LP is infeasible.
        other => panic!("separation LP returned {other:?}"),
    }
}

fn render_certificate(target: &CorrelationTarget, y0: f64, ys: &[f64], value: f64) -> Certificate {
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let cons = target.constraints();
    let terms: Vec<(String, f64)> = cons
        .iter()
        .zip(ys)
        .map(|((label, _, _), &y)| (label.clone(), clean(y)))
        .filter(|(_, y)| *y != 0.0)
        .collect();
    let mut s = round_display(clean(y0));
    for (label, y) in &terms {
        let sign = if *y < 0.0 { '-' } else { '+' };
        let mag = y.abs();
        if (mag - 1.0).abs() < 1e-12 {
            let _ = write!(s, " {sign} {label}");
        } else {
            let _ = write!(s, " {sign} {}*{label}", round_display(mag));
        }
    }
    s.push_str(" >= 0");
    Certificate {
        constant: clean(y0),
        terms,
        value_at_target: value,
        violation: -value,
        inequality: s,
    }
}

fn round_display(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    format!("{r}")
}

/// Decides whether `target` is realizable by a joint distribution, returning a
/// witness distribution or a separating certificate.
pub fn joint_feasible(target: &CorrelationTarget) -> Result<FeasibilityResult> {
    let solved = solve::<f64>(target)?;
    Ok(match (solved.witness, solved.separation) {
        (Some((p, t)), _) => FeasibilityResult {
            feasible: true,
            boundary: t <= FEASIBILITY_TOL,
            witness: Some(p),
            certificate: None,
        },
        (None, Some((y0, ys, value))) => FeasibilityResult {
            feasible: false,
            boundary: false,
            witness: None,
            certificate: Some(render_certificate(target, y0, &ys, value)),
        },
        (None, None) => unreachable!(),
    })
}

/// Exact counterpart of [`joint_feasible`]: every `f64` in the target is read as
/// the rational it represents and the LPs are solved in rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFeasibility {
    pub feasible: bool,
    pub boundary: bool,
    pub witness: Option<Vec<BigRational>>,
    /// Separating functional value at the target.
    pub certificate_value: Option<BigRational>,
}

pub fn joint_feasible_exact(target: &CorrelationTarget) -> Result<ExactFeasibility> {
    use num_traits::Zero;
    let solved = solve::<BigRational>(target)?;
    Ok(match (solved.witness, solved.separation) {
        (Some((p, t)), _) => ExactFeasibility {
            feasible: true,
            boundary: t.is_zero(),
            witness: Some(p),
            certificate_value: None,
        },
        (None, Some((_, _, value))) => ExactFeasibility {
            feasible: false,
            boundary: false,
            witness: None,
            certificate_value: Some(value),
        },
        (None, None) => unreachable!(),
    })
}

/// `((i, j), ⟨X_i X_j⟩)` for every pair `i < j`.
pub type PairMoments = Vec<((usize, usize), f64)>;

/// Pairwise correlations and means reproduced by a distribution over atoms.
pub fn moments_of(n: usize, dist: &[f64]) -> (PairMoments, Vec<f64>) {
    let atoms = atom_signs(n);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = atoms
                .iter()
                .zip(dist)
                .map(|(a, p)| (a[i] * a[j]) as f64 * p)
                .sum();
            pairs.push(((i, j), c));
        }
    }
    let means = (0..n)
        .map(|i| atoms.iter().zip(dist).map(|(a, p)| a[i] as f64 * p).sum())
        .collect();
    (pairs, means)
}

/// One tetrahedron facet `1 + ε1·c01 + ε2·c02 + ε1ε2·c12 ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetCheck {
    pub eps1: i8,
    pub eps2: i8,
    pub value: f64,
    pub satisfied: bool,
    pub facet: String,
}

/// Closed-form facets of the three-variable correlation polytope.
pub fn facets_n3(target: &CorrelationTarget) -> Result<Vec<FacetCheck>> {
    target.validate()?;
    if target.n != 3 {
        return Err(Error::MalformedTarget(format!("facets need n = 3, got {}", target.n)));
    }
    if let Moments::Values(_) = target.moments {
        return Err(Error::MalformedTarget("facets take pair targets only".into()));
    }
    let get = |i: usize, j: usize| {
        target
            .pairs
            .iter()
            .find(|p| (p.i, p.j) == (i, j) || (p.i, p.j) == (j, i))
            .map(|p| p.value)
            .ok_or_else(|| Error::MalformedTarget(format!("missing pair ({i}, {j})")))
    };
    let (c01, c02, c12) = (get(0, 1)?, get(0, 2)?, get(1, 2)?);
    let sign = |e: i8| if e > 0 { '+' } else { '-' };
    let mut out = Vec::with_capacity(4);
    for eps1 in [1i8, -1] {
        for eps2 in [1i8, -1] {
            let (e1, e2) = (eps1 as f64, eps2 as f64);
            let value = 1.0 + e1 * c01 + e2 * c02 + e1 * e2 * c12;
            out.push(FacetCheck {
                eps1,
                eps2,
                value,
                satisfied: value >= -FEASIBILITY_TOL,
                facet: format!(
                    "1 {} c01 {} c02 {} c12 >= 0",
                    sign(eps1),
                    sign(eps2),
                    sign(eps1 * eps2)
                ),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
