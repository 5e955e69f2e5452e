//! Batch verification of the finite identities: exhaustive over short
//! sequences, then seeded random trials on long ones.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identities::{bell3_raw, chsh_raw, sica3_residual_raw};
use crate::rng::RngStream;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentitySuiteConfig {
    pub n_random: usize,
    pub random_len: usize,
    pub max_exhaustive_len: usize,
    pub seed: u64,
    /// Negative control: plants a non-±1 value in the first random trial.
    #[serde(default)]
    pub inject_corruption: bool,
}

impl Default for IdentitySuiteConfig {
    fn default() -> Self {
        Self {
            n_random: 100_000,
            random_len: 1000,
            max_exhaustive_len: 4,
            seed: 0,
            inject_corruption: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IdentityKind {
    Sica3,
    Bell3,
    Chsh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub identity: IdentityKind,
    /// `"exhaustive"` or `"random"`.
    pub regime: String,
    pub case_index: u64,
    /// Raw values of each input sequence.
    pub sequences: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub exhaustive_triples: u64,
    pub exhaustive_quadruples: u64,
    pub random_triples: u64,
    pub random_quadruples: u64,
    pub violations: u64,
    pub first_counterexample: Option<Counterexample>,
}

fn unpack(bits: u64, len: usize) -> Vec<i8> {
    (0..len)
        .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// First failing identity for a triple, if any.
fn check_triple(x: &[i8], y: &[i8], z: &[i8]) -> Option<IdentityKind> {
    if sica3_residual_raw(x, y, z) != 0 {
        return Some(IdentityKind::Sica3);
    }
    if !bell3_raw(x, y, z).1 {
        return Some(IdentityKind::Bell3);
    }
    None
}

fn random_signs<R: Rng>(rng: &mut R, len: usize) -> Vec<i8> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let word: u64 = rng.random();
        let take = (len - out.len()).min(64);
        out.extend((0..take).map(|i| if word >> i & 1 == 1 { 1i8 } else { -1 }));
    }
    out
}

#[derive(Default)]
struct Tally {
    violations: u64,
    first: Option<Counterexample>,
}

impl Tally {
    fn record(&mut self, c: Counterexample) {
        self.violations += 1;
        self.keep_earliest(Some(c));
    }

    fn keep_earliest(&mut self, c: Option<Counterexample>) {
        let key = |c: &Counterexample| (c.regime.clone(), c.case_index);
        self.first = match (self.first.take(), c) {
            (Some(a), Some(b)) => Some(if key(&b) < key(&a) { b } else { a }),
            (a, b) => a.or(b),
        };
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.violations += other.violations;
        self.keep_earliest(other.first);
        self
    }
}

pub fn run_identity_suite(cfg: &IdentitySuiteConfig) -> IdentityReport {
    let mut tally = Tally::default();
    let mut exhaustive_triples = 0u64;
    let mut exhaustive_quadruples = 0u64;

    for len in 1..=cfg.max_exhaustive_len {
        let per = 1u64 << len;
        let total3 = per * per * per;
        let t = (0..total3)
            .into_par_iter()
            .fold(Tally::default, |mut t, case| {
                let (x, y, z) = (
                    unpack(case % per, len),
                    unpack(case / per % per, len),
                    unpack(case / (per * per), len),
                );
                if let Some(kind) = check_triple(&x, &y, &z) {
                    t.record(Counterexample {
                        identity: kind,
                        regime: "exhaustive".into(),
                        case_index: case,
                        sequences: vec![x, y, z],
                    });
                }
                t
            })
            .reduce(Tally::default, Tally::merge);
        tally = tally.merge(t);
        exhaustive_triples += total3;

        // Quadruples grow as 16^len; stop at length 4 (65536 cases).
        if len <= 4 {
            let total4 = total3 * per;
            let t = (0..total4)
                .into_par_iter()
                .fold(Tally::default, |mut t, case| {
                    let s: Vec<Vec<i8>> = (0..4)
                        .map(|k| unpack(case / per.pow(k) % per, len))
                        .collect();
                    if !chsh_raw(&s[0], &s[1], &s[2], &s[3]).1 {
                        t.record(Counterexample {
                            identity: IdentityKind::Chsh,
                            regime: "exhaustive".into(),
                            case_index: case,
                            sequences: s,
                        });
                    }
                    t
                })
                .reduce(Tally::default, Tally::merge);
            tally = tally.merge(t);
            exhaustive_quadruples += total4;
        }
    }

    let base = RngStream::new(cfg.seed, 0x1de7);
    let len = cfg.random_len.max(1);
    let t = (0..cfg.n_random as u64)
        .into_par_iter()
        .fold(Tally::default, |mut t, trial| {
            let mut rng = base.substream(trial).rng();
            let mut s: Vec<Vec<i8>> = (0..4).map(|_| random_signs(&mut rng, len)).collect();
            if cfg.inject_corruption && trial == 0 {
                s[1][0] = 0;
            }
            if let Some(kind) = check_triple(&s[0], &s[1], &s[2]) {
                t.record(Counterexample {
                    identity: kind,
                    regime: "random".into(),
                    case_index: trial,
                    sequences: s[..3].to_vec(),
                });
            } else if !chsh_raw(&s[0], &s[1], &s[2], &s[3]).1 {
                t.record(Counterexample {
                    identity: IdentityKind::Chsh,
                    regime: "random".into(),
                    case_index: trial,
                    sequences: s,
                });
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    tally = tally.merge(t);

    IdentityReport {
        exhaustive_triples,
        exhaustive_quadruples,
        random_triples: cfg.n_random as u64,
        random_quadruples: cfg.n_random as u64,
        violations: tally.violations,
        first_counterexample: tally.first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_clean() {
        let r = run_identity_suite(&IdentitySuiteConfig {
            n_random: 200,
            random_len: 50,
            max_exhaustive_len: 3,
            seed: 1,
            inject_corruption: false,
        });
        assert_eq!(r.violations, 0);
        assert_eq!(r.exhaustive_triples, 8 + 64 + 512);
        assert_eq!(r.exhaustive_quadruples, 16 + 256 + 4096);
        assert!(r.first_counterexample.is_none());
    }

    #[test]
    fn exhaustive_only() {
        let r = run_identity_suite(&IdentitySuiteConfig {
            n_random: 0,
            ..Default::default()
        });
        assert_eq!(r.random_triples, 0);
        assert_eq!(r.exhaustive_triples, 8 + 64 + 512 + 4096);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn corruption_is_reported() {
        let r = run_identity_suite(&IdentitySuiteConfig {
            n_random: 10,
            random_len: 20,
            max_exhaustive_len: 1,
            seed: 3,
            inject_corruption: true,
        });
        assert_eq!(r.violations, 1);
        let c = r.first_counterexample.unwrap();
        assert_eq!(c.regime, "random");
        assert_eq!(c.case_index, 0);
        assert_eq!(c.sequences[1][0], 0);
    }
}
