//! Sampled data against the inequalities and the feasibility oracle.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use bell_lab::feasibility::{joint_feasible, CorrelationTarget, Moments};
use bell_lab::models::{
    lhv_batch, nonlocal_toy_batch, sequential_collapse_batch, singlet_batch, Axis, Batch, OrderTag,
};
use bell_lab::seqcore::{bell3_finite, chsh_finite, correlation, Angle, DichotomicSequence};
use bell_lab::RngStream;
use rand::Rng;

fn c(x: &DichotomicSequence, y: &DichotomicSequence) -> f64 {
    correlation(x, y).unwrap().value
}

fn mean(x: &DichotomicSequence) -> f64 {
    x.values().map(f64::from).sum::<f64>() / x.len() as f64
}

/// Triple (P, E, E') of one batch with its own first moments.
fn empirical_triple(b: &Batch, e_prime: &DichotomicSequence) -> CorrelationTarget {
    CorrelationTarget::new(3, &[(0, 1, c(&b.p, &b.e)), (0, 2, c(&b.p, e_prime)), (1, 2, c(&b.e, e_prime))])
        .with_moments(Moments::Values(vec![mean(&b.p), mean(&b.e), mean(e_prime)]))
}

fn canonical() -> (Angle, Angle, Angle) {
    (Angle::ZERO, Angle::pi_fraction(3.0, 4.0), Angle::pi_fraction(-3.0, 4.0))
}

#[test]
fn no_sampler_reaches_the_counterfactual_triple() {
    let (tp, te, te2) = canonical();
    let n = 200_000;
    let target = CorrelationTarget::triple(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
    assert!(!joint_feasible(&target).unwrap().feasible);

    let mut batches = Vec::new();
    for order in [OrderTag::PFirst, OrderTag::EFirst] {
        batches.push(sequential_collapse_batch(tp, te, te2, order, n, RngStream::new(1, 0)).unwrap());
    }
    for coupling in [0.0, 0.5, 1.0] {
        batches.push(nonlocal_toy_batch(te, te2, tp, coupling, n, RngStream::new(1, 1)).unwrap());
    }
    let tol = 4.5 / (n as f64).sqrt();
    for b in &batches {
        let ep = b.e_prime.as_ref().unwrap();
        assert!(joint_feasible(&empirical_triple(b, ep)).unwrap().feasible, "{}", b.model);
        let (pe, pe2, ee2) = (c(&b.p, &b.e), c(&b.p, ep), c(&b.e, ep));
        let dist = (pe - FRAC_1_SQRT_2).abs().max((pe2 - FRAC_1_SQRT_2).abs()).max(ee2.abs());
        assert!(dist > 10.0 * tol, "{} came within {dist} of the target", b.model);
    }

    let lhv = lhv_batch(te, tp, &[Axis::alice(te2)], n, RngStream::new(1, 2)).unwrap();
    let ep = &lhv.extra[0].1;
    assert!(joint_feasible(&empirical_triple(&lhv, ep)).unwrap().feasible);
}

#[test]
fn lhv_sequences_never_violate() {
    let mut axes = RngStream::new(2, 99).rng();
    for b in 0..10u64 {
        let mut draw = || Angle::from_radians(axes.random_range(-PI..PI));
        let (te, te2, tp, tp2) = (draw(), draw(), draw(), draw());
        let batch = lhv_batch(te, tp, &[Axis::alice(te2), Axis::bob(tp2)], 20_000, RngStream::new(2, b)).unwrap();
        let (e2, p2) = (&batch.extra[0].1, &batch.extra[1].1);
        assert!(bell3_finite(&batch.e, &batch.p, e2).unwrap().holds);
        assert!(chsh_finite(e2, &batch.e, &batch.p, p2).unwrap().holds);
        let t = CorrelationTarget::new(
            4,
            &[
                (0, 1, c(&batch.e, e2)),
                (0, 2, c(&batch.e, &batch.p)),
                (0, 3, c(&batch.e, p2)),
                (1, 2, c(e2, &batch.p)),
                (1, 3, c(e2, p2)),
                (2, 3, c(&batch.p, p2)),
            ],
        )
        .with_moments(Moments::Values(vec![mean(&batch.e), mean(e2), mean(&batch.p), mean(p2)]));
        assert!(joint_feasible(&t).unwrap().feasible, "batch {b}");
    }
}

#[test]
fn singlet_pairs_are_feasible_pairs() {
    let b = singlet_batch(Angle::from_degrees(20.0), Angle::ZERO, 50_000, RngStream::new(3, 0)).unwrap();
    let t = CorrelationTarget::new(2, &[(0, 1, c(&b.e, &b.p))])
        .with_moments(Moments::Values(vec![mean(&b.e), mean(&b.p)]));
    assert!(joint_feasible(&t).unwrap().feasible);
}

#[test]
fn full_coupling_breaks_orthogonal_independence() {
    let n = 1_000_000;
    let te = Angle::ZERO;
    let te2 = Angle::from_degrees(90.0);
    let tol = 4.5 / (n as f64).sqrt();
    let free = nonlocal_toy_batch(te, te2, Angle::ZERO, 0.0, n, RngStream::new(4, 0)).unwrap();
    assert!(c(&free.e, free.e_prime.as_ref().unwrap()).abs() <= tol);
    // sign(cos θP + 1/2) is +1 at θP = 0 and -1 at θP = π
    for (tp, expected) in [(0.0, 1.0), (PI, -1.0)] {
        let b = nonlocal_toy_batch(te, te2, Angle::from_radians(tp), 0.6, n, RngStream::new(4, 1)).unwrap();
        let v = c(&b.e, b.e_prime.as_ref().unwrap());
        assert!((v - 0.6 * expected).abs() <= tol, "{v}");
    }
}

#[test]
fn batches_independent_of_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let (tp, te, te2) = canonical();
                let a = sequential_collapse_batch(tp, te, te2, OrderTag::PFirst, 100_000, RngStream::new(5, 0)).unwrap();
                let b = lhv_batch(te, tp, &[Axis::bob(te2)], 100_000, RngStream::new(5, 1)).unwrap();
                (a, b)
            })
    };
    assert_eq!(run(1), run(3));
}
