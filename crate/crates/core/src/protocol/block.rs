//! Exact block-level sampling for memoryless sources.
//!
//! For memoryless sources a block sum depends only on the count `K` of +1
//! values among `Q` fair draws, so a whole scan can be sampled without
//! touching individual steps: a geometric number of quiet blocks, then `K`
//! from the binomial law conditioned on `|2K − Q| ≥ P`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};

/// Binomial(Q, 1/2) probabilities restricted to counts whose block sum reaches the threshold.
#[derive(Debug, Clone)]
pub struct TriggerTable {
    pub block_len: u64,
    pub threshold: u64,
    /// Probability that one block triggers.
    pub trigger_prob: f64,
    /// Probability that one block sum is `≥ P` (one tail).
    pub upper_tail: f64,
    counts: Vec<u64>,
    cumulative: Vec<f64>,
}

fn ln_binomial_pmf_half(q: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(q as usize + 1);
    let ln2q = q as f64 * std::f64::consts::LN_2;
    let mut ln_c = 0.0f64;
    for k in 0..=q {
        if k > 0 {
            ln_c += ((q - k + 1) as f64).ln() - (k as f64).ln();
        }
        out.push(ln_c - ln2q);
    }
    out
}

impl TriggerTable {
    pub fn new(block_len: u64, threshold: u64) -> Self {
        let q = block_len;
        let ln_pmf = ln_binomial_pmf_half(q);
        let mut counts = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        let mut upper = 0.0;
        for k in 0..=q {
            let sigma = 2 * k as i64 - q as i64;
            if sigma.unsigned_abs() >= threshold {
                let p = ln_pmf[k as usize].exp();
                acc += p;
                if sigma > 0 {
                    upper += p;
                }
                counts.push(k);
                cumulative.push(acc);
            }
        }
        Self {
            block_len,
            threshold,
            trigger_prob: acc,
            upper_tail: upper,
            counts,
            cumulative,
        }
    }

    /// A count of +1 values drawn from the conditional law given a trigger.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>() * self.trigger_prob;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.counts[idx.min(self.counts.len() - 1)]
    }

    /// Number of quiet blocks before the first triggering one.
    pub fn sample_quiet_blocks<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.trigger_prob >= 1.0 {
            return 0;
        }
        Geometric::new(self.trigger_prob)
            .expect("trigger probability in (0, 1)")
            .sample(rng)
    }

    pub fn sigma(&self, count: u64) -> i64 {
        2 * count as i64 - self.block_len as i64
    }
}

pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0))
        .expect("valid binomial parameters")
        .sample(rng)
}

/// Block sum of the other source over the same window, given `count` +1 values
/// in the scanned source and per-step agreement probability `(1 + rho)/2`.
pub fn isochronous_sum<R: Rng + ?Sized>(rng: &mut R, block_len: u64, count: u64, rho: f64) -> i64 {
    let agree = (1.0 + rho) / 2.0;
    let a = binomial(rng, count, agree) as i64;
    let b = binomial(rng, block_len - count, agree) as i64;
    let (k, q) = (count as i64, block_len as i64);
    (2 * a - k) + (q - k - 2 * b)
}

/// Block sum of an independent fair window.
pub fn fresh_sum<R: Rng + ?Sized>(rng: &mut R, block_len: u64) -> i64 {
    2 * binomial(rng, block_len, 0.5) as i64 - block_len as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    // Brute-force oracle: enumerate all 2^Q windows for small Q.
    fn enumerate_trigger(q: u32, p: i64) -> (f64, f64) {
        let mut hit = 0u64;
        let mut upper = 0u64;
        for bits in 0u64..1 << q {
            let sigma = 2 * bits.count_ones() as i64 - q as i64;
            if sigma.abs() >= p {
                hit += 1;
                if sigma > 0 {
                    upper += 1;
                }
            }
        }
        let total = (1u64 << q) as f64;
        (hit as f64 / total, upper as f64 / total)
    }

    #[test]
    fn table_matches_enumeration() {
        for (q, p) in [(9u32, 3i64), (12, 4), (15, 7), (16, 1)] {
            let t = TriggerTable::new(q as u64, p as u64);
            let (hit, upper) = enumerate_trigger(q, p);
            assert!((t.trigger_prob - hit).abs() < 1e-12, "{q} {p}");
            assert!((t.upper_tail - upper).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_counts_trigger() {
        let t = TriggerTable::new(101, 30);
        let mut rng = RngStream::new(3, 3).rng();
        for _ in 0..2000 {
            let k = t.sample_count(&mut rng);
            assert!(t.sigma(k).abs() >= 30);
            assert_eq!(t.sigma(k).rem_euclid(2), 1);
        }
    }

    #[test]
    fn isochronous_sum_extremes() {
        let mut rng = RngStream::new(4, 4).rng();
        for count in [0u64, 7, 40, 101] {
            let sigma = 2 * count as i64 - 101;
            assert_eq!(isochronous_sum(&mut rng, 101, count, 1.0), sigma);
            assert_eq!(isochronous_sum(&mut rng, 101, count, -1.0), -sigma);
        }
    }
}
