//! Correlation estimators and the finite-length identities they satisfy.
//!
//! Every sum is accumulated as an exact integer before any division, so the
//! identity checks below are exact and independent of summation order. The
//! kernels are generic over the element type so that the identity suite can
//! feed them raw integers (including deliberately corrupted ones).

use serde::{Deserialize, Serialize};

use super::sequence::Dichotomic;
use crate::error::{Error, Result};

/// Empirical mean of elementwise products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub n: usize,
    pub std_err: f64,
    /// Exact numerator: `value == sum / n`.
    pub sum: i64,
}

impl CorrelationEstimate {
    pub fn from_sum(sum: i64, n: usize) -> Self {
        let value = sum as f64 / n as f64;
        let std_err = ((1.0 - value * value).max(0.0) / n as f64).sqrt();
        Self {
            value,
            n,
            std_err,
            sum,
        }
    }

    /// Fraction of equal entries, `(value + 1) / 2`, computed from the exact sum.
    pub fn prob_equal(&self) -> f64 {
        (self.sum + self.n as i64) as f64 / (2 * self.n) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bell3 {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chsh {
    pub s_value: f64,
    pub holds: bool,
}

fn check_lengths(lens: &[usize]) -> Result<usize> {
    let n = lens[0];
    for &m in &lens[1..] {
        if m != n {
            return Err(Error::LengthMismatch { left: n, right: m });
        }
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(n)
}

#[inline]
fn dot<T: Copy + Into<i64>>(x: &[T], y: &[T]) -> i64 {
    x.iter().zip(y).map(|(&a, &b)| a.into() * b.into()).sum()
}

pub(crate) fn sica3_residual_raw<T: Copy + Into<i64>>(x: &[T], y: &[T], z: &[T]) -> i64 {
    x.iter()
        .zip(y)
        .zip(z)
        .map(|((&x, &y), &z)| {
            let (x, y, z) = (x.into(), y.into(), z.into());
            ((x * y - x * z) - x * y * (1 - y * z)).abs()
        })
        .max()
        .unwrap_or(0)
}

/// `(Σxy, Σxz, Σyz)` and whether `|Σxy − Σxz| ≤ n − Σyz`.
pub(crate) fn bell3_raw<T: Copy + Into<i64>>(x: &[T], y: &[T], z: &[T]) -> ([i64; 3], bool) {
    let n = x.len() as i64;
    let (sxy, sxz, syz) = (dot(x, y), dot(x, z), dot(y, z));
    ([sxy, sxz, syz], (sxy - sxz).abs() <= n - syz)
}

/// `|Σxy + Σxz| + |Σwy − Σwz|` and whether it is at most `2n`.
pub(crate) fn chsh_raw<T: Copy + Into<i64>>(w: &[T], x: &[T], y: &[T], z: &[T]) -> (i64, bool) {
    let n = x.len() as i64;
    let s = (dot(x, y) + dot(x, z)).abs() + (dot(w, y) - dot(w, z)).abs();
    (s, s <= 2 * n)
}

pub fn correlation<S: AsRef<[Dichotomic]>>(x: &S, y: &S) -> Result<CorrelationEstimate> {
    let (x, y) = (x.as_ref(), y.as_ref());
    let n = check_lengths(&[x.len(), y.len()])?;
    Ok(CorrelationEstimate::from_sum(dot(x, y), n))
}

pub fn prob_equal<S: AsRef<[Dichotomic]>>(x: &S, y: &S) -> Result<f64> {
    correlation(x, y).map(|c| c.prob_equal())
}

/// Largest per-index deviation from `xy − xz = xy(1 − yz)`. Always 0 for ±1 data.
pub fn sica3_residual<S: AsRef<[Dichotomic]>>(x: &S, y: &S, z: &S) -> Result<i64> {
    let (x, y, z) = (x.as_ref(), y.as_ref(), z.as_ref());
    check_lengths(&[x.len(), y.len(), z.len()])?;
    Ok(sica3_residual_raw(x, y, z))
}

/// Three-sequence finite identity `|avg(xy) − avg(xz)| ≤ 1 − avg(yz)`.
pub fn bell3_finite<S: AsRef<[Dichotomic]>>(x: &S, y: &S, z: &S) -> Result<Bell3> {
    let (x, y, z) = (x.as_ref(), y.as_ref(), z.as_ref());
    let n = check_lengths(&[x.len(), y.len(), z.len()])?;
    let ([sxy, sxz, syz], holds) = bell3_raw(x, y, z);
    let nf = n as f64;
    Ok(Bell3 {
        lhs: (sxy - sxz).abs() as f64 / nf,
        rhs: (n as i64 - syz) as f64 / nf,
        holds,
    })
}

/// Four-sequence finite identity `|avg(xy) + avg(xz)| + |avg(wy) − avg(wz)| ≤ 2`.
pub fn chsh_finite<S: AsRef<[Dichotomic]>>(w: &S, x: &S, y: &S, z: &S) -> Result<Chsh> {
    let (w, x, y, z) = (w.as_ref(), x.as_ref(), y.as_ref(), z.as_ref());
    let n = check_lengths(&[w.len(), x.len(), y.len(), z.len()])?;
    let (s, holds) = chsh_raw(w, x, y, z);
    Ok(Chsh {
        s_value: s as f64 / n as f64,
        holds,
    })
}

/// Running mean of `x_i·y_i` over growing prefixes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningMean {
    pub trajectory: Vec<f64>,
    /// Prefix lengths at which the partial sum is exactly 0.
    pub zero_touches: usize,
    pub last_touch: Option<usize>,
}

pub fn running_mean<S: AsRef<[Dichotomic]>>(x: &S, y: &S) -> Result<RunningMean> {
    let (x, y) = (x.as_ref(), y.as_ref());
    let n = check_lengths(&[x.len(), y.len()])?;
    let mut trajectory = Vec::with_capacity(n);
    let mut sum = 0i64;
    let mut zero_touches = 0;
    let mut last_touch = None;
    for (k, (&a, &b)) in x.iter().zip(y).enumerate() {
        sum += i64::from(a) * i64::from(b);
        if sum == 0 {
            zero_touches += 1;
            last_touch = Some(k + 1);
        }
        trajectory.push(sum as f64 / (k + 1) as f64);
    }
    Ok(RunningMean {
        trajectory,
        zero_touches,
        last_touch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::DichotomicSequence;
    use proptest::prelude::*;

    fn seq(s: &str) -> DichotomicSequence {
        s.parse().unwrap()
    }

    fn seqs_of_len(len: usize) -> Vec<DichotomicSequence> {
        (0..1u32 << len)
            .map(|bits| {
                DichotomicSequence::new(
                    (0..len)
                        .map(|i| Dichotomic::from_bool(bits >> i & 1 == 1))
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn correlation_examples() {
        let x = seq("+-+--+");
        assert_eq!(correlation(&x, &x).unwrap().value, 1.0);
        assert_eq!(correlation(&x, &x.negate()).unwrap().value, -1.0);
        let c = correlation(&seq("++--"), &seq("+-+-")).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.std_err, 0.5);
        assert_eq!(prob_equal(&seq("++--"), &seq("+-+-")).unwrap(), 0.5);
        assert_eq!(prob_equal(&x, &x).unwrap(), 1.0);
        assert_eq!(prob_equal(&x, &x.negate()).unwrap(), 0.0);
    }

    #[test]
    fn length_errors() {
        let a = seq("++-");
        let b = seq("+-");
        assert_eq!(
            correlation(&a, &b),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        );
        assert!(sica3_residual(&a, &a, &b).is_err());
        assert!(bell3_finite(&a, &b, &a).is_err());
        assert!(chsh_finite(&a, &a, &a, &b).is_err());
    }

    #[test]
    fn saturation_cases() {
        let x = seq("+-++-");
        assert_eq!(
            bell3_finite(&x, &x, &x).unwrap(),
            Bell3 {
                lhs: 0.0,
                rhs: 0.0,
                holds: true
            }
        );
        let plus = seq("+++");
        let minus = seq("---");
        assert_eq!(
            bell3_finite(&plus, &minus, &plus).unwrap(),
            Bell3 {
                lhs: 2.0,
                rhs: 2.0,
                holds: true
            }
        );
        assert_eq!(
            chsh_finite(&x, &x, &x, &x).unwrap(),
            Chsh {
                s_value: 2.0,
                holds: true
            }
        );
        assert_eq!(sica3_residual(&plus, &plus, &plus).unwrap(), 0);
    }

    // Exhaustive enumeration oracle: every triple of length ≤ 4 and every
    // quadruple of length ≤ 3.
    #[test]
    fn exhaustive_small_lengths() {
        let mut triples = 0;
        for len in 1..=4 {
            let all = seqs_of_len(len);
            for x in &all {
                for y in &all {
                    for z in &all {
                        assert_eq!(sica3_residual(x, y, z).unwrap(), 0);
                        assert!(bell3_finite(x, y, z).unwrap().holds);
                        triples += 1;
                    }
                }
            }
        }
        assert_eq!(triples, 8 + 64 + 512 + 4096);
        let all = seqs_of_len(3);
        let mut quads = 0;
        for w in &all {
            for x in &all {
                for y in &all {
                    for z in &all {
                        assert!(chsh_finite(w, x, y, z).unwrap().holds);
                        quads += 1;
                    }
                }
            }
        }
        assert_eq!(quads, 4096);
    }

    #[test]
    fn corrupted_values_break_identities() {
        let x = [1i8, 1, -1];
        let y = [1i8, 2, 1];
        let z = [1i8, 1, 1];
        assert!(sica3_residual_raw(&x, &y, &z) > 0);
        let big = [3i8, 3, 3];
        assert!(!bell3_raw(&[3i8, 3, 3], &big, &[-3i8, -3, -3]).1);
        assert!(!chsh_raw(&big, &big, &big, &[-3i8, -3, -3]).1);
    }

    #[test]
    fn running_mean_touches() {
        let r = running_mean(&seq("+-+-++"), &seq("++++++")).unwrap();
        assert_eq!(r.trajectory.len(), 6);
        assert_eq!(r.zero_touches, 2);
        assert_eq!(r.last_touch, Some(4));
        assert_eq!(r.trajectory[5], 2.0 / 6.0);
    }

    fn arb_pair() -> impl Strategy<Value = (DichotomicSequence, DichotomicSequence)> {
        (1usize..64).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
            )
                .prop_map(|(a, b)| {
                    let f = |v: Vec<bool>| {
                        DichotomicSequence::new(v.into_iter().map(Dichotomic::from_bool).collect())
                            .unwrap()
                    };
                    (f(a), f(b))
                })
        })
    }

    proptest! {
        #[test]
        fn correlation_symmetry_and_sign((x, y) in arb_pair()) {
            let c = correlation(&x, &y).unwrap();
            prop_assert_eq!(c, correlation(&y, &x).unwrap());
            prop_assert_eq!(correlation(&x.negate(), &y).unwrap().value, -c.value);
            prop_assert!((c.value * c.n as f64 - c.sum as f64).abs() < 1e-9);
            let equal = x.entries().iter().zip(y.entries()).filter(|(a, b)| a == b).count();
            prop_assert_eq!(c.prob_equal(), equal as f64 / x.len() as f64);
            let total = prob_equal(&x, &y).unwrap() + prob_equal(&x, &y.negate()).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-15);
        }
    }
}
