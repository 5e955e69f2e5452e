use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceId {
    S0,
    S1,
}

impl SourceId {
    pub fn other(self) -> Self {
        match self {
            SourceId::S0 => SourceId::S1,
            SourceId::S1 => SourceId::S0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalStructure {
    Memoryless,
    /// S0 repeats its previous value with probability `persistence`, otherwise
    /// draws afresh. S1 follows S0 through an independent agreement draw each step.
    Markov { persistence: f64 },
}

/// Two ±1 sources with isochronous correlation `rho` and fair marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePair {
    pub rho: f64,
    pub temporal: TemporalStructure,
}

impl SourcePair {
    pub fn memoryless(rho: f64) -> Self {
        Self {
            rho,
            temporal: TemporalStructure::Memoryless,
        }
    }

    pub fn markov(rho: f64, persistence: f64) -> Self {
        Self {
            rho,
            temporal: TemporalStructure::Markov { persistence },
        }
    }
}

/// A pair of sources advancing in lockstep, one time step per read.
pub trait DualSource {
    /// Advances one step and returns the value of `which` at that step.
    fn read(&mut self, which: SourceId) -> i8;
    /// Advances one step and returns both values at that step.
    fn read_both(&mut self) -> (i8, i8);
}

/// Step-by-step realization of a [`SourcePair`].
pub struct StepSource {
    pair: SourcePair,
    rng: ChaCha8Rng,
    prev_s0: Option<i8>,
}

impl StepSource {
    pub fn new(pair: SourcePair, stream: RngStream) -> Self {
        Self {
            pair,
            rng: stream.rng(),
            prev_s0: None,
        }
    }

    fn fair(&mut self) -> i8 {
        if self.rng.random::<bool>() {
            1
        } else {
            -1
        }
    }

    fn step(&mut self) -> (i8, i8) {
        let s0 = match (self.pair.temporal, self.prev_s0) {
            (TemporalStructure::Markov { persistence }, Some(prev))
                if self.rng.random::<f64>() < persistence =>
            {
                prev
            }
            _ => self.fair(),
        };
        self.prev_s0 = Some(s0);
        let agree = self.rng.random::<f64>() < (1.0 + self.pair.rho) / 2.0;
        (s0, if agree { s0 } else { -s0 })
    }
}

impl DualSource for StepSource {
    fn read(&mut self, which: SourceId) -> i8 {
        let (s0, s1) = self.step();
        match which {
            SourceId::S0 => s0,
            SourceId::S1 => s1,
        }
    }

    fn read_both(&mut self) -> (i8, i8) {
        self.step()
    }
}

/// Both sources stuck at fixed values.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSource {
    pub s0: i8,
    pub s1: i8,
}

impl DualSource for ConstantSource {
    fn read(&mut self, which: SourceId) -> i8 {
        match which {
            SourceId::S0 => self.s0,
            SourceId::S1 => self.s1,
        }
    }

    fn read_both(&mut self) -> (i8, i8) {
        (self.s0, self.s1)
    }
}

/// Records which sources were read at each time step.
pub struct TracingSource<S> {
    inner: S,
    /// Per step: (read S0, read S1).
    pub trace: Vec<(bool, bool)>,
}

impl<S: DualSource> TracingSource<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            trace: Vec::new(),
        }
    }

    /// Steps at which both sources were read.
    pub fn double_reads(&self) -> usize {
        self.trace.iter().filter(|(a, b)| *a && *b).count()
    }

    pub fn steps(&self) -> usize {
        self.trace.len()
    }
}

impl<S: DualSource> DualSource for TracingSource<S> {
    fn read(&mut self, which: SourceId) -> i8 {
        self.trace.push((which == SourceId::S0, which == SourceId::S1));
        self.inner.read(which)
    }

    fn read_both(&mut self) -> (i8, i8) {
        self.trace.push((true, true));
        self.inner.read_both()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(pair: SourcePair, n: usize) -> (f64, f64, f64, f64) {
        let mut src = StepSource::new(pair, RngStream::new(1, 1));
        let (mut m0, mut m1, mut c, mut lag) = (0i64, 0i64, 0i64, 0i64);
        let mut prev = 0i8;
        for _ in 0..n {
            let (a, b) = src.read_both();
            m0 += a as i64;
            m1 += b as i64;
            c += (a * b) as i64;
            lag += (a * prev) as i64;
            prev = a;
        }
        let n = n as f64;
        (m0 as f64 / n, m1 as f64 / n, c as f64 / n, lag as f64 / n)
    }

    #[test]
    fn memoryless_marginals_and_correlation() {
        let n = 400_000;
        let tol = 4.5 / (n as f64).sqrt();
        let (m0, m1, c, lag) = moments(SourcePair::memoryless(0.4), n);
        assert!(m0.abs() < tol && m1.abs() < tol);
        assert!((c - 0.4).abs() < tol);
        assert!(lag.abs() < tol);
    }

    #[test]
    fn markov_keeps_fair_marginals() {
        let n = 400_000;
        let (m0, m1, c, lag) = moments(SourcePair::markov(-0.5, 0.8), n);
        // persistence inflates the variance of the mean by (1+φ)/(1-φ) = 9
        let tol = 4.5 * 3.0 / (n as f64).sqrt();
        assert!(m0.abs() < tol && m1.abs() < tol, "{m0} {m1}");
        assert!((c + 0.5).abs() < 4.5 / (n as f64).sqrt());
        assert!((lag - 0.8).abs() < tol, "{lag}");
    }

    #[test]
    fn tracing_counts() {
        let mut t = TracingSource::new(ConstantSource { s0: 1, s1: -1 });
        assert_eq!(t.read(SourceId::S0), 1);
        assert_eq!(t.read(SourceId::S1), -1);
        assert_eq!(t.read_both(), (1, -1));
        assert_eq!(t.steps(), 3);
        assert_eq!(t.double_reads(), 1);
    }
}
