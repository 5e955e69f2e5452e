//! Outcome samplers.
//!
//! Each sampler draws one emitted pair (or triple) from an explicit probability
//! law; no state vectors are involved. Batch variants split the work into
//! fixed-size chunks, each on its own [`RngStream::substream`], so a batch is
//! identical under any thread count.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, CHUNK_LEN};
use crate::seqcore::{Angle, Dichotomic, DichotomicSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    /// Alice's outcome.
    pub e: Dichotomic,
    /// Bob's outcome.
    pub p: Dichotomic,
}

/// Which side's measurement happens first for each pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderTag {
    PFirst,
    EFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSample {
    pub p: Dichotomic,
    pub e: Dichotomic,
    pub e_prime: Dichotomic,
    pub order_tag: OrderTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Alice,
    Bob,
}

/// A measurement axis on a given side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub side: Side,
    pub angle: Angle,
}

impl Axis {
    pub fn alice(angle: Angle) -> Self {
        Self {
            side: Side::Alice,
            angle,
        }
    }

    pub fn bob(angle: Angle) -> Self {
        Self {
            side: Side::Bob,
            angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Singlet,
    SequentialCollapse,
    LhvCircle,
    NonlocalToy,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Singlet => "singlet",
            ModelKind::SequentialCollapse => "sequential_collapse",
            ModelKind::LhvCircle => "lhv_circle",
            ModelKind::NonlocalToy => "nonlocal_toy",
        })
    }
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, prob: f64) -> bool {
    rng.random::<f64>() < prob
}

#[inline]
fn fair_sign<R: Rng + ?Sized>(rng: &mut R) -> Dichotomic {
    Dichotomic::from_bool(rng.random::<bool>())
}

/// Copy of `d` with probability `prob`, its negation otherwise.
#[inline]
fn agree_with<R: Rng + ?Sized>(rng: &mut R, d: Dichotomic, prob: f64) -> Dichotomic {
    if bernoulli(rng, prob) {
        d
    } else {
        -d
    }
}

/// Probability that a spin prepared along one axis reads the same sign along
/// another axis at angle `delta`: cos²(δ/2).
#[inline]
fn same_sign_prob(delta: f64) -> f64 {
    (1.0 + delta.cos()) / 2.0
}

/// One singlet pair measured along `theta_e` (Alice) and `theta_p` (Bob).
///
/// Marginals are fair and `P(e = p) = (1 − cos Δθ)/2`, so the correlation is `−cos Δθ`.
pub fn singlet_sample<R: Rng + ?Sized>(theta_e: Angle, theta_p: Angle, rng: &mut R) -> PairSample {
    let delta = theta_e.radians() - theta_p.radians();
    let e = fair_sign(rng);
    // p is anti-aligned with e with probability cos²(Δ/2)
    let p = agree_with(rng, -e, same_sign_prob(delta));
    PairSample { e, p }
}

/// One pair measured first on Bob's side (`theta_p`), then twice in succession
/// on Alice's particle: along `theta_e`, then along `theta_e_prime`.
///
/// Each measurement collapses the spin it reads, so the outcomes form the chain
/// P → E → E′ with correlations `−cos(θP − θE)`, `cos(θE − θE′)` and their product.
pub fn sequential_collapse_sample<R: Rng + ?Sized>(
    theta_p: Angle,
    theta_e: Angle,
    theta_e_prime: Angle,
    rng: &mut R,
) -> TripleSample {
    let p = fair_sign(rng);
    let e = agree_with(rng, -p, same_sign_prob(theta_p.radians() - theta_e.radians()));
    let e_prime = agree_with(rng, e, same_sign_prob(theta_e.radians() - theta_e_prime.radians()));
    TripleSample {
        p,
        e,
        e_prime,
        order_tag: OrderTag::PFirst,
    }
}

/// Same law as [`sequential_collapse_sample`], generated in the order an
/// observer who sees Alice's side first would record it.
pub fn sequential_collapse_sample_e_first<R: Rng + ?Sized>(
    theta_p: Angle,
    theta_e: Angle,
    theta_e_prime: Angle,
    rng: &mut R,
) -> TripleSample {
    let e = fair_sign(rng);
    let p = agree_with(rng, -e, same_sign_prob(theta_e.radians() - theta_p.radians()));
    let e_prime = agree_with(rng, e, same_sign_prob(theta_e.radians() - theta_e_prime.radians()));
    TripleSample {
        p,
        e,
        e_prime,
        order_tag: OrderTag::EFirst,
    }
}

/// Deterministic outcome of the circle model for hidden angle `lambda`.
#[inline]
pub fn lhv_outcome(axis: Axis, lambda: f64) -> Dichotomic {
    let alice = Dichotomic::sign_of((axis.angle.radians() - lambda).cos());
    match axis.side {
        Side::Alice => alice,
        Side::Bob => -alice,
    }
}

/// Local realist circle model: one hidden angle λ, uniform on (−π, π], fixes the
/// outcome along every axis at once. Returns the measured pair and the values of
/// every axis in `extra_axes`.
pub fn lhv_circle_sample<R: Rng + ?Sized>(
    theta_e: Angle,
    theta_p: Angle,
    extra_axes: &[Axis],
    rng: &mut R,
) -> (PairSample, Vec<Dichotomic>) {
    let lambda = PI - 2.0 * PI * rng.random::<f64>();
    let pair = PairSample {
        e: lhv_outcome(Axis::alice(theta_e), lambda),
        p: lhv_outcome(Axis::bob(theta_p), lambda),
    };
    let cf = extra_axes.iter().map(|&a| lhv_outcome(a, lambda)).collect();
    (pair, cf)
}

/// Expected ⟨E,P⟩ of the circle model: the sawtooth `−(1 − 2|Δθ|/π)`.
pub fn lhv_expected_correlation(theta_e: Angle, theta_p: Angle) -> f64 {
    let d = theta_e.minus(theta_p).abs();
    -(1.0 - 2.0 * d / PI)
}

/// Sequential collapse whose second Alice reading is, with probability
/// `coupling`, overwritten by a function of Bob's setting. At coupling 0 the
/// output equals [`sequential_collapse_sample`] draw for draw.
pub fn nonlocal_toy_sample<R: Rng + ?Sized>(
    theta_e: Angle,
    theta_e_prime: Angle,
    theta_p: Angle,
    coupling: f64,
    rng: &mut R,
) -> Result<TripleSample> {
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::CouplingOutOfRange(coupling));
    }
    let mut t = sequential_collapse_sample(theta_p, theta_e, theta_e_prime, rng);
    if coupling > 0.0 && bernoulli(rng, coupling) {
        t.e_prime = t.e * Dichotomic::sign_of(theta_p.radians().cos() + 0.5);
    }
    Ok(t)
}

/// Measurement settings of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub theta_p: Angle,
    pub theta_e: Angle,
    pub theta_e_prime: Option<Angle>,
}

/// `n` samples from one model under fixed settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub model: ModelKind,
    pub seed: u64,
    pub settings: Settings,
    pub p: DichotomicSequence,
    pub e: DichotomicSequence,
    pub e_prime: Option<DichotomicSequence>,
    /// Counterfactual values along extra axes (circle model only).
    pub extra: Vec<(Axis, DichotomicSequence)>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes one row per pair: `pair_index, theta_p, theta_e[, theta_e_prime], p, e[, e_prime], model, seed`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let has_prime = self.e_prime.is_some();
        let mut header = vec!["pair_index", "theta_p", "theta_e"];
        if has_prime {
            header.push("theta_e_prime");
        }
        header.extend(["p", "e"]);
        if has_prime {
            header.push("e_prime");
        }
        header.extend(["model", "seed"]);
        w.write_record(&header)?;
        let s = &self.settings;
        let model = self.model.to_string();
        let seed = self.seed.to_string();
        let tp = s.theta_p.radians().to_string();
        let te = s.theta_e.radians().to_string();
        let tep = s.theta_e_prime.map(|a| a.radians().to_string());
        for i in 0..self.len() {
            let mut row = vec![i.to_string(), tp.clone(), te.clone()];
            if let Some(t) = &tep {
                row.push(t.clone());
            }
            row.push(self.p.entries()[i].value().to_string());
            row.push(self.e.entries()[i].value().to_string());
            if let Some(ep) = &self.e_prime {
                row.push(ep.entries()[i].value().to_string());
            }
            row.push(model.clone());
            row.push(seed.clone());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `sample` `n` times in parallel chunks, each chunk on its own substream,
/// and returns the results in index order.
fn chunked<T, F>(n: usize, stream: RngStream, sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK_LEN);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64).rng();
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            (0..len).map(|_| sample(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

fn column<T>(rows: &[T], pick: impl Fn(&T) -> Dichotomic) -> Result<DichotomicSequence> {
    DichotomicSequence::new(rows.iter().map(pick).collect())
}

pub fn singlet_batch(theta_e: Angle, theta_p: Angle, n: usize, stream: RngStream) -> Result<Batch> {
    let rows = chunked(n, stream, |rng| singlet_sample(theta_e, theta_p, rng));
    Ok(Batch {
        model: ModelKind::Singlet,
        seed: stream.seed,
        settings: Settings {
            theta_p,
            theta_e,
            theta_e_prime: None,
        },
        p: column(&rows, |r| r.p)?,
        e: column(&rows, |r| r.e)?,
        e_prime: None,
        extra: Vec::new(),
    })
}

fn triple_batch(
    model: ModelKind,
    settings: Settings,
    rows: Vec<TripleSample>,
    seed: u64,
) -> Result<Batch> {
    Ok(Batch {
        model,
        seed,
        settings,
        p: column(&rows, |r| r.p)?,
        e: column(&rows, |r| r.e)?,
        e_prime: Some(column(&rows, |r| r.e_prime)?),
        extra: Vec::new(),
    })
}

pub fn sequential_collapse_batch(
    theta_p: Angle,
    theta_e: Angle,
    theta_e_prime: Angle,
    order: OrderTag,
    n: usize,
    stream: RngStream,
) -> Result<Batch> {
    let rows = chunked(n, stream, |rng| match order {
        OrderTag::PFirst => sequential_collapse_sample(theta_p, theta_e, theta_e_prime, rng),
        OrderTag::EFirst => sequential_collapse_sample_e_first(theta_p, theta_e, theta_e_prime, rng),
    });
    let settings = Settings {
        theta_p,
        theta_e,
        theta_e_prime: Some(theta_e_prime),
    };
    triple_batch(ModelKind::SequentialCollapse, settings, rows, stream.seed)
}

pub fn nonlocal_toy_batch(
    theta_e: Angle,
    theta_e_prime: Angle,
    theta_p: Angle,
    coupling: f64,
    n: usize,
    stream: RngStream,
) -> Result<Batch> {
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::CouplingOutOfRange(coupling));
    }
    let rows = chunked(n, stream, |rng| {
        nonlocal_toy_sample(theta_e, theta_e_prime, theta_p, coupling, rng)
            .expect("coupling checked above")
    });
    let settings = Settings {
        theta_p,
        theta_e,
        theta_e_prime: Some(theta_e_prime),
    };
    triple_batch(ModelKind::NonlocalToy, settings, rows, stream.seed)
}

pub fn lhv_batch(
    theta_e: Angle,
    theta_p: Angle,
    extra_axes: &[Axis],
    n: usize,
    stream: RngStream,
) -> Result<Batch> {
    let rows = chunked(n, stream, |rng| lhv_circle_sample(theta_e, theta_p, extra_axes, rng));
    let extra = extra_axes
        .iter()
        .enumerate()
        .map(|(k, &axis)| Ok((axis, column(&rows, |r| r.1[k])?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Batch {
        model: ModelKind::LhvCircle,
        seed: stream.seed,
        settings: Settings {
            theta_p,
            theta_e,
            theta_e_prime: None,
        },
        p: column(&rows, |r| r.0.p)?,
        e: column(&rows, |r| r.0.e)?,
        e_prime: None,
        extra,
    })
}
