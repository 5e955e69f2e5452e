//! Block-threshold protocol for telling apart the isochronous correlation of
//! two ±1 sources.
//!
//! One trial scans disjoint blocks of `Q` steps on the reader's source until a
//! block sum σ reaches `|σ| ≥ P`, then sums one block σ′ of the other source and
//! classifies it as v ∈ {−1, 0, +1}. Over `L` trials the joint frequencies of
//! (sign σ, v) for v ≠ 0 form the four-cell signature.
//!
//! Where the other source's block sits is an explicit parameter:
//! [`Alignment::SuccessiveBlock`] reads the window right after the trigger (one
//! source per step, ever); [`Alignment::IsochronousBlock`] reads the triggering
//! window itself, which needs buffered joint access.

mod block;
mod source;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
pub use block::TriggerTable;
pub use source::{
    ConstantSource, DualSource, SourceId, SourcePair, StepSource, TemporalStructure, TracingSource,
};

/// Standard errors a signature cell may move before it counts as a difference.
pub const DISCRIMINATION_Z: f64 = 4.5;

/// Trial count for long runs.
pub const FULL_SCALE_TRIALS: u64 = 450_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    SuccessiveBlock,
    IsochronousBlock,
}

/// How trials are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Block-level sampling for memoryless sources, step-level otherwise.
    Auto,
    /// Every time step is drawn and read through [`DualSource`].
    Step,
    /// Exact block-sum sampling; memoryless sources only.
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Q
    pub block_len: u64,
    /// P
    pub threshold: u64,
    /// L
    pub trials: u64,
    pub alignment: Alignment,
    /// Source scanned for the trigger.
    pub reader: SourceId,
    /// Scan gives up after this many quiet blocks.
    pub max_blocks: u64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            block_len: 1001,
            threshold: 100,
            trials: 10_000,
            alignment: Alignment::IsochronousBlock,
            reader: SourceId::S0,
            max_blocks: 1_000_000,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.block_len == 0 {
            return bad("block length Q must be positive");
        }
        if self.threshold == 0 || self.threshold >= self.block_len {
            return bad("threshold P must satisfy 0 < P < Q");
        }
        if self.trials == 0 {
            return bad("trial count L must be at least 1");
        }
        if self.max_blocks == 0 {
            return bad("max_blocks must be at least 1");
        }
        Ok(())
    }

    fn same_experiment(&self, other: &Self) -> bool {
        self.block_len == other.block_len
            && self.threshold == other.threshold
            && self.trials == other.trials
            && self.alignment == other.alignment
    }
}

fn validate_sources(s: &SourcePair) -> Result<()> {
    if !(-1.0..=1.0).contains(&s.rho) {
        return Err(Error::InvalidParams(format!("rho {} outside [-1, 1]", s.rho)));
    }
    if let TemporalStructure::Markov { persistence } = s.temporal {
        if !(0.0..1.0).contains(&persistence) {
            return Err(Error::InvalidParams(format!(
                "persistence {persistence} outside [0, 1)"
            )));
        }
    }
    Ok(())
}

/// v = −1 for σ′ ≤ −P, 0 for |σ′| < P, +1 for σ′ ≥ P.
pub fn classify(sigma_prime: i64, threshold: u64) -> i8 {
    let p = threshold as i64;
    if sigma_prime >= p {
        1
    } else if sigma_prime <= -p {
        -1
    } else {
        0
    }
}

/// Scans consecutive blocks of `which` until `|σ| ≥ P`, reading nothing from
/// the other source. Returns σ and the 0-based index of the triggering block.
pub fn scan_until_trigger<S: DualSource>(
    source: &mut S,
    which: SourceId,
    block_len: u64,
    threshold: u64,
    max_blocks: u64,
) -> Result<(i64, u64)> {
    for block in 0..max_blocks {
        let sigma: i64 = (0..block_len).map(|_| source.read(which) as i64).sum();
        if sigma.unsigned_abs() >= threshold {
            return Ok((sigma, block));
        }
    }
    Err(Error::ScanLimitExceeded(max_blocks))
}

/// Like [`scan_until_trigger`] but reading both sources at every step; also
/// returns the other source's sum over the triggering block.
pub fn scan_until_trigger_joint<S: DualSource>(
    source: &mut S,
    which: SourceId,
    block_len: u64,
    threshold: u64,
    max_blocks: u64,
) -> Result<(i64, i64, u64)> {
    for block in 0..max_blocks {
        let (mut own, mut other) = (0i64, 0i64);
        for _ in 0..block_len {
            let (s0, s1) = source.read_both();
            let (a, b) = match which {
                SourceId::S0 => (s0, s1),
                SourceId::S1 => (s1, s0),
            };
            own += a as i64;
            other += b as i64;
        }
        if own.unsigned_abs() >= threshold {
            return Ok((own, other, block));
        }
    }
    Err(Error::ScanLimitExceeded(max_blocks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sigma: i64,
    pub sigma_prime: i64,
    pub v: i8,
    /// Index of the triggering block.
    pub block_index: u64,
}

/// One trial driven step by step through a [`DualSource`].
pub fn run_trial<S: DualSource>(source: &mut S, params: &ProtocolParams) -> Result<TrialRecord> {
    let (q, p) = (params.block_len, params.threshold);
    let (sigma, sigma_prime, block_index) = match params.alignment {
        Alignment::SuccessiveBlock => {
            let (sigma, idx) = scan_until_trigger(source, params.reader, q, p, params.max_blocks)?;
            let other = params.reader.other();
            let sigma_prime = (0..q).map(|_| source.read(other) as i64).sum();
            (sigma, sigma_prime, idx)
        }
        Alignment::IsochronousBlock => {
            scan_until_trigger_joint(source, params.reader, q, p, params.max_blocks)?
        }
    };
    Ok(TrialRecord {
        sigma,
        sigma_prime,
        v: classify(sigma_prime, p),
        block_index,
    })
}

fn block_trial(
    table: &TriggerTable,
    sources: &SourcePair,
    params: &ProtocolParams,
    stream: RngStream,
) -> Result<TrialRecord> {
    let mut rng = stream.rng();
    let quiet = table.sample_quiet_blocks(&mut rng);
    if quiet >= params.max_blocks {
        return Err(Error::ScanLimitExceeded(params.max_blocks));
    }
    let count = table.sample_count(&mut rng);
    let sigma = table.sigma(count);
    let sigma_prime = match params.alignment {
        Alignment::SuccessiveBlock => block::fresh_sum(&mut rng, params.block_len),
        Alignment::IsochronousBlock => {
            block::isochronous_sum(&mut rng, params.block_len, count, sources.rho)
        }
    };
    Ok(TrialRecord {
        sigma,
        sigma_prime,
        v: classify(sigma_prime, params.threshold),
        block_index: quiet,
    })
}

/// Cell counts indexed by (sign σ, v).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl CellCounts {
    pub fn as_array(&self) -> [u64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }
}

/// The four signature frequencies V(s, t) = count / L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cells {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl Cells {
    pub fn as_array(&self) -> [f64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            pp: a[0],
            pm: a[1],
            mp: a[2],
            mm: a[3],
        }
    }
}

pub const CELL_NAMES: [&str; 4] = ["pp", "pm", "mp", "mm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSignature {
    pub params: ProtocolParams,
    /// `None` when the trials were driven by an external [`DualSource`].
    pub sources: Option<SourcePair>,
    pub counts: CellCounts,
    pub signature: Cells,
    /// Trials that triggered (always L unless a scan failed).
    pub triggered: u64,
    /// Trials whose σ was ≥ P.
    pub sigma_positive: u64,
    /// Trials classified v = 0.
    pub v_zero: u64,
    pub mean_blocks_to_trigger: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

impl ProtocolSignature {
    /// Tallies finished trials. `records` are kept in the signature when `keep` is set.
    pub fn from_records(
        params: ProtocolParams,
        sources: Option<SourcePair>,
        records: Vec<TrialRecord>,
        keep: bool,
    ) -> Self {
        let mut counts = CellCounts::default();
        let (mut sigma_positive, mut v_zero, mut blocks) = (0u64, 0u64, 0u64);
        for r in &records {
            let pos = r.sigma > 0;
            sigma_positive += pos as u64;
            blocks += r.block_index + 1;
            match (pos, r.v) {
                (true, 1) => counts.pp += 1,
                (true, -1) => counts.pm += 1,
                (false, 1) => counts.mp += 1,
                (false, -1) => counts.mm += 1,
                _ => v_zero += 1,
            }
        }
        let l = params.trials as f64;
        let signature = Cells::from_array(counts.as_array().map(|c| c as f64 / l));
        Self {
            params,
            sources,
            counts,
            signature,
            triggered: records.len() as u64,
            sigma_positive,
            v_zero,
            mean_blocks_to_trigger: blocks as f64 / records.len().max(1) as f64,
            records: keep.then_some(records),
        }
    }

    /// Per-trial (σ, σ′, v) rows.
    pub fn write_records_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["trial", "sigma", "sigma_prime", "v", "block_index"])?;
        for (i, r) in self.records.iter().flatten().enumerate() {
            w.write_record([
                i.to_string(),
                r.sigma.to_string(),
                r.sigma_prime.to_string(),
                r.v.to_string(),
                r.block_index.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `params.trials` independent trials, trial `l` on `stream.substream(l)`.
pub fn run_protocol(sources: &SourcePair, params: &ProtocolParams, stream: RngStream) -> Result<ProtocolSignature> {
    run_protocol_with(sources, params, stream, Engine::Auto, false)
}

pub fn run_protocol_with(
    sources: &SourcePair,
    params: &ProtocolParams,
    stream: RngStream,
    engine: Engine,
    keep_records: bool,
) -> Result<ProtocolSignature> {
    params.validate()?;
    validate_sources(sources)?;
    let memoryless = sources.temporal == TemporalStructure::Memoryless;
    let use_block = match engine {
        Engine::Auto => memoryless,
        Engine::Step => false,
        Engine::Block if memoryless => true,
        Engine::Block => {
            return Err(Error::InvalidParams(
                "block engine needs memoryless sources".into(),
            ))
        }
    };
    let table = use_block.then(|| TriggerTable::new(params.block_len, params.threshold));
    let records = (0..params.trials)
        .into_par_iter()
        .map(|l| {
            let trial_stream = stream.substream(l);
            match &table {
                Some(t) => block_trial(t, sources, params, trial_stream),
                None => run_trial(&mut StepSource::new(*sources, trial_stream), params),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolSignature::from_records(*params, Some(*sources), records, keep_records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrimination {
    /// max over cells of |V_a − V_b|
    pub distance: f64,
    pub threshold: f64,
    pub distinguishable: bool,
}

/// Compares two signatures cell by cell. The threshold is
/// [`DISCRIMINATION_Z`] times the largest per-cell binomial standard error of
/// the difference at L trials.
pub fn discriminate(a: &ProtocolSignature, b: &ProtocolSignature) -> Result<Discrimination> {
    if !a.params.same_experiment(&b.params) {
        return Err(Error::ParamsMismatch);
    }
    let l = a.params.trials as f64;
    let (va, vb) = (a.signature.as_array(), b.signature.as_array());
    let mut distance = 0.0f64;
    let mut se = 0.0f64;
    for k in 0..4 {
        distance = distance.max((va[k] - vb[k]).abs());
        se = se.max(((va[k] * (1.0 - va[k]) + vb[k] * (1.0 - vb[k])) / l).sqrt());
    }
    let threshold = DISCRIMINATION_Z * se;
    Ok(Discrimination {
        distance,
        threshold,
        distinguishable: distance > threshold,
    })
}

/// Expected signature cell for a source pair whose other-source block is
/// independent of the trigger (memoryless sources in successive mode, or
/// ρ = 0 in either mode): each cell is P(σ′ ≥ P) / 2.
pub fn null_cell_probability(block_len: u64, threshold: u64) -> f64 {
    TriggerTable::new(block_len, threshold).upper_tail / 2.0
}

/// Whether every cell of `sig` lies within `z` binomial standard errors of `reference`.
pub fn within_reference(sig: &ProtocolSignature, reference: f64, z: f64) -> bool {
    let l = sig.params.trials as f64;
    let tol = z * (reference * (1.0 - reference) / l).sqrt();
    sig.signature
        .as_array()
        .iter()
        .all(|v| (v - reference).abs() <= tol)
}
