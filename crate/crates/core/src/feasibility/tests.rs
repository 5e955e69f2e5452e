use super::*;
use crate::rng::RngStream;
use num_traits::Zero;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

fn check_witness(t: &CorrelationTarget, r: &FeasibilityResult) {
    let w = r.witness.as_ref().expect("witness");
    assert_eq!(w.len(), 1 << t.n);
    assert!(w.iter().all(|&p| p >= -FEASIBILITY_TOL));
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= FEASIBILITY_TOL);
    let (pairs, means) = moments_of(t.n, w);
    for p in &t.pairs {
        let key = (p.i.min(p.j), p.i.max(p.j));
        let got = pairs.iter().find(|(k, _)| *k == key).unwrap().1;
        assert!((got - p.value).abs() <= FEASIBILITY_TOL, "{key:?}: {got} vs {}", p.value);
    }
    if t.moments == Moments::Zero {
        assert!(means.iter().all(|m| m.abs() <= FEASIBILITY_TOL));
    }
}

/// The certificate must be non-negative on every atom.
fn check_certificate(t: &CorrelationTarget, r: &FeasibilityResult) {
    let c = r.certificate.as_ref().expect("certificate");
    assert!(c.value_at_target < 0.0);
    let cons = t.constraints();
    for atom in 0..1usize << t.n {
        let mut v = c.constant;
        for (label, y) in &c.terms {
            let (_, coeffs, _) = cons.iter().find(|(l, _, _)| l == label).unwrap();
            v += y * coeffs[atom] as f64;
        }
        assert!(v >= -1e-9, "atom {atom}: {v}");
    }
}

#[test]
fn zero_targets_uniform_witness() {
    let t = CorrelationTarget::triple(0.0, 0.0, 0.0);
    let r = joint_feasible(&t).unwrap();
    assert!(r.feasible);
    assert!(!r.boundary);
    assert!(r.witness_is_uniform());
    check_witness(&t, &r);
}

#[test]
fn canonical_triple_is_infeasible() {
    let t = CorrelationTarget::triple(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).with_labels(&["P", "E", "E'"]);
    let r = joint_feasible(&t).unwrap();
    assert!(!r.feasible);
    let c = r.certificate.as_ref().unwrap();
    assert!((c.value_at_target - (1.0 - SQRT_2)).abs() < 1e-9, "{}", c.value_at_target);
    assert_eq!(c.inequality, "1 - <P,E> - <P,E'> + <E,E'> >= 0");
    check_certificate(&t, &r);
}

#[test]
fn all_minus_one_is_infeasible() {
    let t = CorrelationTarget::triple(-1.0, -1.0, -1.0);
    let r = joint_feasible(&t).unwrap();
    assert!(!r.feasible);
    check_certificate(&t, &r);
    assert!((r.certificate.unwrap().violation - 2.0).abs() < 1e-9);
}

#[test]
fn saturated_targets_are_boundary() {
    let t = CorrelationTarget::triple(1.0, 1.0, 1.0);
    let r = joint_feasible(&t).unwrap();
    assert!(r.feasible && r.boundary);
    check_witness(&t, &r);
    let e = joint_feasible_exact(&t).unwrap();
    assert!(e.feasible && e.boundary);
}

#[test]
fn chsh_quadruple_is_infeasible() {
    // variables E, E', P, P'
    let a = FRAC_1_SQRT_2;
    let t = CorrelationTarget::new(4, &[(0, 2, -a), (0, 3, -a), (1, 2, -a), (1, 3, a)])
        .with_labels(&["E", "E'", "P", "P'"]);
    let r = joint_feasible(&t).unwrap();
    assert!(!r.feasible);
    let c = r.certificate.as_ref().unwrap();
    assert!((c.violation - (2.0 * SQRT_2 - 2.0)).abs() < 1e-9, "{}", c.violation);
    check_certificate(&t, &r);
}

#[test]
fn algebraic_maximum_is_infeasible() {
    let t = CorrelationTarget::new(4, &[(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, -1.0)]);
    let r = joint_feasible(&t).unwrap();
    assert!(!r.feasible);
    assert!((r.certificate.as_ref().unwrap().violation - 2.0).abs() < 1e-9);
}

#[test]
fn malformed_targets() {
    let bad = [
        CorrelationTarget::triple(1.5, 0.0, 0.0),
        CorrelationTarget::new(3, &[(0, 3, 0.0)]),
        CorrelationTarget::new(3, &[(1, 1, 0.0)]),
        CorrelationTarget::new(5, &[]),
        CorrelationTarget::new(3, &[(0, 1, 0.0), (1, 0, 0.0)]),
        CorrelationTarget::triple(f64::NAN, 0.0, 0.0),
        CorrelationTarget::triple(0.0, 0.0, 0.0).with_moments(Moments::Values(vec![0.0])),
    ];
    for t in bad {
        assert!(matches!(joint_feasible(&t), Err(Error::MalformedTarget(_))), "{t:?}");
    }
    assert!(facets_n3(&CorrelationTarget::new(4, &[])).is_err());
    assert!(facets_n3(&CorrelationTarget::new(3, &[(0, 1, 0.0)])).is_err());
}

#[test]
fn facet_examples() {
    let f = facets_n3(&CorrelationTarget::triple(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)).unwrap();
    let bad: Vec<_> = f.iter().filter(|c| !c.satisfied).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].facet, "1 - c01 - c02 + c12 >= 0");
    assert!((bad[0].value - (1.0 - SQRT_2)).abs() < 1e-12);

    assert!(facets_n3(&CorrelationTarget::triple(1.0, 1.0, 1.0))
        .unwrap()
        .iter()
        .all(|c| c.satisfied));
    assert!(facets_n3(&CorrelationTarget::triple(0.0, 0.0, 0.0))
        .unwrap()
        .iter()
        .all(|c| c.satisfied && c.value == 1.0));
}

#[test]
fn free_moments_agree_with_zero_moments_on_pairs() {
    let mut rng = RngStream::new(11, 0).rng();
    for _ in 0..300 {
        let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let t = CorrelationTarget::triple(c[0], c[1], c[2]);
        let a = joint_feasible(&t).unwrap().feasible;
        let b = joint_feasible(&t.clone().with_moments(Moments::Free)).unwrap().feasible;
        assert_eq!(a, b, "{c:?}");
    }
}

#[test]
fn nonzero_moments() {
    // all variables +1 with certainty
    let t = CorrelationTarget::triple(1.0, 1.0, 1.0).with_moments(Moments::Values(vec![1.0; 3]));
    let r = joint_feasible(&t).unwrap();
    assert!(r.feasible && r.boundary);
    assert!((r.witness.unwrap()[0] - 1.0).abs() < 1e-12);
    // perfectly correlated pair cannot have opposite means
    let t = CorrelationTarget::new(2, &[(0, 1, 1.0)]).with_moments(Moments::Values(vec![1.0, -1.0]));
    assert!(!joint_feasible(&t).unwrap().feasible);
}

#[test]
fn random_distributions_round_trip() {
    let mut rng = RngStream::new(5, 1).rng();
    for n in [2usize, 3, 4] {
        for _ in 0..500 {
            let raw: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let dist: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let (pairs, means) = moments_of(n, &dist);
            let t = CorrelationTarget {
                n,
                pairs: pairs
                    .iter()
                    .map(|&((i, j), value)| PairTarget { i, j, value })
                    .collect(),
                moments: Moments::Values(means),
                labels: None,
            };
            let r = joint_feasible(&t).unwrap();
            assert!(r.feasible);
            check_witness(&t, &r);
        }
    }
}

#[test]
fn lp_agrees_with_facets() {
    let mut rng = RngStream::new(6, 2).rng();
    for _ in 0..2000 {
        let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let t = CorrelationTarget::triple(c[0], c[1], c[2]);
        let lp = joint_feasible(&t).unwrap();
        let facets = facets_n3(&t).unwrap().iter().all(|f| f.satisfied);
        assert_eq!(lp.feasible, facets, "{c:?}");
        if lp.feasible {
            check_witness(&t, &lp);
        } else {
            check_certificate(&t, &lp);
            // minimal facet violation bounds the L1 distance from below
            let worst = facets_n3(&t).unwrap().iter().map(|f| f.value).fold(f64::INFINITY, f64::min);
            assert!(lp.certificate.unwrap().value_at_target <= worst + 1e-9);
        }
    }
}

#[test]
fn exact_and_float_agree_on_dyadic_grid() {
    // quarter-step grid hits many facets exactly
    let grid: Vec<f64> = (-4..=4).map(|k| k as f64 / 4.0).collect();
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let t = CorrelationTarget::triple(a, b, c);
                let x = joint_feasible_exact(&t).unwrap();
                let f = joint_feasible(&t).unwrap();
                assert_eq!(x.feasible, f.feasible, "({a}, {b}, {c})");
                assert_eq!(x.boundary, f.boundary, "({a}, {b}, {c})");
                let facet_min = facets_n3(&t).unwrap().iter().map(|f| f.value).fold(f64::INFINITY, f64::min);
                assert_eq!(x.feasible, facet_min >= 0.0);
                if let Some(w) = &x.witness {
                    let sum = w.iter().fold(BigRational::zero(), |s, p| s + p);
                    assert_eq!(sum, rational(1, 1));
                }
            }
        }
    }
}

#[test]
fn exact_certificate_value() {
    let t = CorrelationTarget::triple(0.75, 0.75, 0.0);
    let x = joint_feasible_exact(&t).unwrap();
    assert!(!x.feasible);
    assert_eq!(x.certificate_value, Some(rational(-1, 2)));
}

#[test]
fn target_json_round_trip() {
    let t = CorrelationTarget::triple(0.5, -0.25, 0.0).with_labels(&["a", "b", "c"]);
    let s = serde_json::to_string(&t).unwrap();
    assert_eq!(serde_json::from_str::<CorrelationTarget>(&s).unwrap(), t);
    let bare: CorrelationTarget =
        serde_json::from_str(r#"{"n":3,"pairs":[{"i":0,"j":1,"value":0.0}]}"#).unwrap();
    assert_eq!(bare.moments, Moments::Zero);
    let free: CorrelationTarget =
        serde_json::from_str(r#"{"n":2,"pairs":[],"moments":"free"}"#).unwrap();
    assert_eq!(free.moments, Moments::Free);
    let vals: CorrelationTarget =
        serde_json::from_str(r#"{"n":2,"pairs":[],"moments":{"values":[0.5,0.5]}}"#).unwrap();
    assert_eq!(vals.moments, Moments::Values(vec![0.5, 0.5]));
}
