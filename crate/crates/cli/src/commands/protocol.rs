use serde_json::json;

use bell_lab::protocol::{
    discriminate, null_cell_probability, run_protocol_with, within_reference, Alignment, Engine,
    ProtocolParams, ProtocolSignature, SourceId, SourcePair, FULL_SCALE_TRIALS,
};
use bell_lab::RngStream;

use super::{sample_count, Z};
use crate::report::{Check, CsvDoc, Report, Table};
use crate::{AlignmentArg, CliError, EngineArg, ExperimentConfig, ProtocolArgs, ReaderArg, TemporalArg};

const CLAIM: &str = "block-threshold signatures separate sources by their isochronous correlation";

fn alignment_name(a: Alignment) -> &'static str {
    match a {
        Alignment::SuccessiveBlock => "successive_block",
        Alignment::IsochronousBlock => "isochronous_block",
    }
}

/// Stream id of one (repetition, alignment, source) run.
fn stream_id(rep: u64, alignment: usize, source: usize) -> u64 {
    rep << 32 | (alignment as u64) << 16 | source as u64
}

struct PairTally {
    alignment: Alignment,
    a: usize,
    b: usize,
    successes: u64,
    distance_sum: f64,
    threshold_sum: f64,
}

pub fn run(exp: &ExperimentConfig, args: &ProtocolArgs) -> Result<Report, CliError> {
    let trials = if exp.n.is_some() {
        sample_count(exp, 0)? as u64
    } else if args.full_scale {
        FULL_SCALE_TRIALS
    } else {
        10_000
    };
    if args.rho.is_empty() || args.rho.len() > u16::MAX as usize {
        return Err(CliError::Usage("--rho needs between 1 and 65535 values".into()));
    }
    if args.repetitions == 0 || args.repetitions > u32::MAX as u64 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    let alignments: Vec<Alignment> = match args.alignment {
        AlignmentArg::Successive => vec![Alignment::SuccessiveBlock],
        AlignmentArg::Isochronous => vec![Alignment::IsochronousBlock],
        AlignmentArg::Both => vec![Alignment::IsochronousBlock, Alignment::SuccessiveBlock],
    };
    let sources: Vec<SourcePair> = args
        .rho
        .iter()
        .map(|&rho| match args.temporal {
            TemporalArg::Memoryless => SourcePair::memoryless(rho),
            TemporalArg::Markov => SourcePair::markov(rho, args.persistence),
        })
        .collect();
    let engine = match args.engine {
        EngineArg::Auto => Engine::Auto,
        EngineArg::Step => Engine::Step,
        EngineArg::Block => Engine::Block,
    };
    let base = ProtocolParams {
        block_len: args.q,
        threshold: args.p,
        trials,
        alignment: Alignment::IsochronousBlock,
        reader: match args.reader {
            ReaderArg::S0 => SourceId::S0,
            ReaderArg::S1 => SourceId::S1,
        },
        max_blocks: args.max_blocks,
    };
    base.validate()?;

    let null = null_cell_probability(args.q, args.p);
    let memoryless = args.temporal == TemporalArg::Memoryless;
    let config = json!({
        "block_len": args.q,
        "threshold": args.p,
        "trials": trials,
        "rho": args.rho,
        "alignments": alignments.iter().map(|&a| alignment_name(a)).collect::<Vec<_>>(),
        "temporal": sources[0].temporal,
        "reader": base.reader,
        "engine": engine,
        "repetitions": args.repetitions,
        "max_blocks": args.max_blocks,
    });
    let mut report = Report::new("protocol", CLAIM, exp.seed, config);

    let mut tallies = Vec::new();
    for &alignment in &alignments {
        for a in 0..sources.len() {
            for b in a + 1..sources.len() {
                tallies.push(PairTally { alignment, a, b, successes: 0, distance_sum: 0.0, threshold_sum: 0.0 });
            }
        }
    }
    let mut first: Vec<(Alignment, usize, ProtocolSignature)> = Vec::new();
    let mut null_hits = vec![0u64; sources.len()];

    for rep in 0..args.repetitions {
        let mut sigs: Vec<Vec<ProtocolSignature>> = Vec::new();
        for (ai, &alignment) in alignments.iter().enumerate() {
            let params = ProtocolParams { alignment, ..base };
            let mut row = Vec::with_capacity(sources.len());
            for (k, src) in sources.iter().enumerate() {
                let stream = RngStream::new(exp.seed, stream_id(rep, ai, k));
                let keep = args.records && rep == 0;
                let sig = run_protocol_with(src, &params, stream, engine, keep)?;
                if alignment == Alignment::SuccessiveBlock && memoryless && within_reference(&sig, null, Z) {
                    null_hits[k] += 1;
                }
                row.push(sig);
            }
            sigs.push(row);
        }
        for t in tallies.iter_mut() {
            let ai = alignments.iter().position(|&x| x == t.alignment).expect("listed alignment");
            let d = discriminate(&sigs[ai][t.a], &sigs[ai][t.b])?;
            t.successes += d.distinguishable as u64;
            t.distance_sum += d.distance;
            t.threshold_sum += d.threshold;
        }
        if rep == 0 {
            for (ai, row) in sigs.into_iter().enumerate() {
                for (k, sig) in row.into_iter().enumerate() {
                    first.push((alignments[ai], k, sig));
                }
            }
        }
    }

    // exact consequences of identical or negated sources
    for (alignment, k, sig) in &first {
        if *alignment != Alignment::IsochronousBlock {
            continue;
        }
        let rho = args.rho[*k];
        let c = sig.counts;
        let l = sig.params.trials;
        if rho == 1.0 {
            report.check(Check::new(
                "identical_sources_diagonal",
                "identical sources put every trial on the diagonal",
                c.pm + c.mp == 0 && c.pp + c.mm == l,
                format!("pp {} mm {} pm {} mp {}", c.pp, c.mm, c.pm, c.mp),
            ));
        } else if rho == -1.0 {
            report.check(Check::new(
                "negated_sources_off_diagonal",
                "negated sources put every trial off the diagonal",
                c.pp + c.mm == 0 && c.pm + c.mp == l,
                format!("pp {} mm {} pm {} mp {}", c.pp, c.mm, c.pm, c.mp),
            ));
        }
    }
    if memoryless && alignments.contains(&Alignment::SuccessiveBlock) {
        let all = null_hits.iter().all(|&h| h == args.repetitions);
        report.check(Check::new(
            "successive_blind_to_rho",
            "with memoryless sources the next block carries no trace of the isochronous correlation",
            all,
            format!(
                "repetitions within {Z} standard errors of the null cell {null:.6}: {:?} of {}",
                null_hits, args.repetitions
            ),
        ));
    }

    let mut sig_table = Table::new(
        "signatures.csv",
        "signature cells V(sign sigma, v) of the first repetition",
        &["alignment", "rho", "v_pp", "v_pm", "v_mp", "v_mm", "n_pp", "n_pm", "n_mp", "n_mm", "v_zero", "mean_blocks"],
    );
    let mut signatures = Vec::new();
    for (alignment, k, sig) in &first {
        let (v, c) = (sig.signature, sig.counts);
        sig_table.push([
            alignment_name(*alignment).to_string(),
            args.rho[*k].to_string(),
            v.pp.to_string(),
            v.pm.to_string(),
            v.mp.to_string(),
            v.mm.to_string(),
            c.pp.to_string(),
            c.pm.to_string(),
            c.mp.to_string(),
            c.mm.to_string(),
            sig.v_zero.to_string(),
            sig.mean_blocks_to_trigger.to_string(),
        ]);
        signatures.push(json!({
            "alignment": alignment_name(*alignment),
            "rho": args.rho[*k],
            "counts": c,
            "signature": v,
            "v_zero": sig.v_zero,
            "sigma_positive": sig.sigma_positive,
            "mean_blocks_to_trigger": sig.mean_blocks_to_trigger,
        }));
        if let Some(records) = &sig.records {
            let file = format!("records_{}_{k}.csv", alignment_name(*alignment));
            let mut buf = Vec::new();
            sig.write_records_csv(&mut buf)?;
            report.raw(
                CsvDoc {
                    file,
                    description: format!("per-trial sums for rho = {} ({} trials)", args.rho[*k], records.len()),
                    columns: ["trial", "sigma", "sigma_prime", "v", "block_index"].map(String::from).to_vec(),
                },
                buf,
            );
        }
    }

    let reps = args.repetitions as f64;
    let mut disc_table = Table::new(
        "discrimination.csv",
        "pairwise discrimination over all repetitions",
        &["alignment", "rho_a", "rho_b", "successes", "repetitions", "mean_distance", "mean_threshold"],
    );
    let mut discrimination = Vec::new();
    for t in &tallies {
        let (ra, rb) = (args.rho[t.a], args.rho[t.b]);
        disc_table.push([
            alignment_name(t.alignment).to_string(),
            ra.to_string(),
            rb.to_string(),
            t.successes.to_string(),
            args.repetitions.to_string(),
            (t.distance_sum / reps).to_string(),
            (t.threshold_sum / reps).to_string(),
        ]);
        discrimination.push(json!({
            "alignment": alignment_name(t.alignment),
            "rho_a": ra,
            "rho_b": rb,
            "successes": t.successes,
            "repetitions": args.repetitions,
            "success_rate": t.successes as f64 / reps,
            "mean_distance": t.distance_sum / reps,
            "mean_threshold": t.threshold_sum / reps,
        }));
    }

    report.results = json!({
        "null_cell_probability": null,
        "signatures": signatures,
        "discrimination": discrimination,
    });
    report.table(sig_table);
    report.table(disc_table);
    Ok(report)
}
