//! Quantum correlations, the locality-derived correlation table, and the
//! three-axis (V3) and four-axis CHSH (V4) inequality evaluations.
//!
//! Variable roles are fixed by name so that no evaluation can silently permute
//! them: in V3, E and E′ are on Alice's side and P on Bob's; in V4, E/E′ are
//! Alice's and P/P′ are Bob's.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqcore::Angle;

/// Floating-point slack allowed before an evaluation is called a violation.
/// Correlations computed as ratios of exact integer sums can overshoot a
/// saturated bound by a few ulps; any physical violation is many orders larger.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Where a correlation value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `−cos Δθ` for a cross-side pair, granted values for unmeasured axes.
    QuantumPredicted,
    /// Same-side value obtained by flipping a cross-side prediction through
    /// perfect anticorrelation, which requires locality.
    LocalityDerived,
    /// Same-side value of zero for orthogonal axes, from parity symmetry.
    ParitySymmetry,
    /// Computed from sampled sequences.
    EmpiricallyEstimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub value: f64,
    pub provenance: Provenance,
}

impl Labeled {
    pub fn new(value: f64, provenance: Provenance) -> Self {
        Self { value, provenance }
    }
}

fn populated(c: Option<Labeled>, name: &'static str) -> Result<f64> {
    let c = c.ok_or(Error::Unpopulated(name))?;
    if !(-1.0..=1.0).contains(&c.value) || c.value.is_nan() {
        return Err(Error::CorrelationOutOfRange {
            name: name.to_string(),
            value: c.value,
        });
    }
    Ok(c.value)
}

/// Singlet correlation `−cos(θ1 − θ2)` between opposite sides.
pub fn qm_correlation(theta1: Angle, theta2: Angle) -> f64 {
    -(theta1.radians() - theta2.radians()).cos()
}

/// The six pairwise correlations available once outcomes along all four axes
/// are granted values and each side's outcomes are independent of the remote
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityTable {
    pub e_p: Labeled,
    pub e_p_prime: Labeled,
    pub e_prime_p: Labeled,
    pub e_prime_p_prime: Labeled,
    pub e_e_prime: Labeled,
    pub p_p_prime: Labeled,
}

pub fn locality_table(
    theta_e: Angle,
    theta_e_prime: Angle,
    theta_p: Angle,
    theta_p_prime: Angle,
) -> LocalityTable {
    let q = |a, b| Labeled::new(qm_correlation(a, b), Provenance::QuantumPredicted);
    // same side: minus the cross-side value, by perfect anticorrelation
    let same = |a, b| Labeled::new(-qm_correlation(a, b), Provenance::LocalityDerived);
    LocalityTable {
        e_p: q(theta_e, theta_p),
        e_p_prime: q(theta_e, theta_p_prime),
        e_prime_p: q(theta_e_prime, theta_p),
        e_prime_p_prime: q(theta_e_prime, theta_p_prime),
        e_e_prime: same(theta_e, theta_e_prime),
        p_p_prime: same(theta_p, theta_p_prime),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V3Scenario {
    pub theta_p: Angle,
    pub theta_e: Angle,
    pub theta_e_prime: Angle,
    pub c_ep: Option<Labeled>,
    pub c_ee_prime: Option<Labeled>,
    pub c_pe_prime: Option<Labeled>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V3Evaluation {
    /// `|⟨E,P⟩ − ⟨E,E′⟩|`
    pub lhs: f64,
    /// `1 − ⟨P,E′⟩`
    pub rhs: f64,
    pub violated: bool,
    /// The same inequality with ⟨P,E′⟩ moved left: `|⟨E,P⟩ − ⟨E,E′⟩| + ⟨P,E′⟩ ≤ 1`.
    /// For the canonical triple this reads √2 ≤ 1.
    pub combined_lhs: f64,
    pub combined_rhs: f64,
}

pub fn v3_evaluate(s: &V3Scenario) -> Result<V3Evaluation> {
    let ep = populated(s.c_ep, "c_ep")?;
    let eep = populated(s.c_ee_prime, "c_ee_prime")?;
    let pep = populated(s.c_pe_prime, "c_pe_prime")?;
    let lhs = (ep - eep).abs();
    let rhs = 1.0 - pep;
    Ok(V3Evaluation {
        lhs,
        rhs,
        violated: lhs > rhs + VIOLATION_TOL,
        combined_lhs: lhs + pep,
        combined_rhs: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V4Scenario {
    pub theta_e: Angle,
    pub theta_e_prime: Angle,
    pub theta_p: Angle,
    pub theta_p_prime: Angle,
    pub c_ep: Option<Labeled>,
    pub c_ep_prime: Option<Labeled>,
    pub c_e_prime_p: Option<Labeled>,
    pub c_e_prime_p_prime: Option<Labeled>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V4Evaluation {
    pub s_value: f64,
    pub bound: f64,
    pub violated: bool,
}

/// `|⟨E,P⟩ + ⟨E,P′⟩| + |⟨E′,P⟩ − ⟨E′,P′⟩|` against the bound 2.
pub fn v4_evaluate(s: &V4Scenario) -> Result<V4Evaluation> {
    let a = populated(s.c_ep, "c_ep")?;
    let b = populated(s.c_ep_prime, "c_ep_prime")?;
    let c = populated(s.c_e_prime_p, "c_e_prime_p")?;
    let d = populated(s.c_e_prime_p_prime, "c_e_prime_p_prime")?;
    let s_value = (a + b).abs() + (c - d).abs();
    Ok(V4Evaluation {
        s_value,
        bound: 2.0,
        violated: s_value > 2.0 + VIOLATION_TOL,
    })
}

/// Settings (θP, θE, θE′) = (0, 3π/4, −3π/4) with correlations (√2/2, 0, √2/2)
/// for (⟨E,P⟩, ⟨E,E′⟩, ⟨P,E′⟩).
pub fn v3_canonical() -> V3Scenario {
    let theta_p = Angle::ZERO;
    let theta_e = Angle::pi_fraction(3.0, 4.0);
    let theta_e_prime = Angle::pi_fraction(-3.0, 4.0);
    V3Scenario {
        theta_p,
        theta_e,
        theta_e_prime,
        c_ep: Some(Labeled::new(FRAC_1_SQRT_2, Provenance::QuantumPredicted)),
        c_ee_prime: Some(Labeled::new(0.0, Provenance::ParitySymmetry)),
        c_pe_prime: Some(Labeled::new(FRAC_1_SQRT_2, Provenance::QuantumPredicted)),
    }
}

/// V3 scenario with every correlation taken from [`qm_correlation`] and the
/// locality table, for arbitrary settings.
pub fn v3_from_angles(theta_p: Angle, theta_e: Angle, theta_e_prime: Angle) -> V3Scenario {
    let t = locality_table(theta_e, theta_e_prime, theta_p, theta_p);
    V3Scenario {
        theta_p,
        theta_e,
        theta_e_prime,
        c_ep: Some(t.e_p),
        c_ee_prime: Some(t.e_e_prime),
        c_pe_prime: Some(t.e_prime_p),
    }
}

/// Settings (θE, θE′, θP, θP′) = (π/4, 3π/4, π/2, 0) with all four cross-side
/// quantum correlations; the CHSH value is 2√2.
pub fn v4_canonical() -> V4Scenario {
    v4_from_angles(
        Angle::pi_fraction(1.0, 4.0),
        Angle::pi_fraction(3.0, 4.0),
        Angle::from_radians(PI / 2.0),
        Angle::ZERO,
    )
}

pub fn v4_from_angles(
    theta_e: Angle,
    theta_e_prime: Angle,
    theta_p: Angle,
    theta_p_prime: Angle,
) -> V4Scenario {
    let t = locality_table(theta_e, theta_e_prime, theta_p, theta_p_prime);
    V4Scenario {
        theta_e,
        theta_e_prime,
        theta_p,
        theta_p_prime,
        c_ep: Some(t.e_p),
        c_ep_prime: Some(t.e_p_prime),
        c_e_prime_p: Some(t.e_prime_p),
        c_e_prime_p_prime: Some(t.e_prime_p_prime),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    const EXACT: f64 = 1e-12;

    #[test]
    fn qm_examples() {
        assert_eq!(qm_correlation(Angle::ZERO, Angle::ZERO), -1.0);
        assert!((qm_correlation(Angle::pi_fraction(3.0, 4.0), Angle::ZERO) - FRAC_1_SQRT_2).abs() < EXACT);
        assert!(qm_correlation(Angle::pi_fraction(1.0, 2.0), Angle::ZERO).abs() < EXACT);
    }

    #[test]
    fn locality_table_examples() {
        let t = locality_table(
            Angle::pi_fraction(3.0, 4.0),
            Angle::pi_fraction(-3.0, 4.0),
            Angle::ZERO,
            Angle::ZERO,
        );
        assert!(t.e_e_prime.value.abs() < EXACT);
        assert_eq!(t.e_e_prime.provenance, Provenance::LocalityDerived);
        assert_eq!(t.p_p_prime.value, 1.0);

        let c = v4_canonical();
        let t = locality_table(c.theta_e, c.theta_e_prime, c.theta_p, c.theta_p_prime);
        for v in [t.e_p, t.e_p_prime, t.e_prime_p, t.e_prime_p_prime] {
            assert!((v.value.abs() - FRAC_1_SQRT_2).abs() < EXACT);
            assert_eq!(v.provenance, Provenance::QuantumPredicted);
        }
        assert!((t.e_prime_p_prime.value - FRAC_1_SQRT_2).abs() < EXACT);
        assert!((t.e_p.value + FRAC_1_SQRT_2).abs() < EXACT);
    }

    #[test]
    fn v3_examples() {
        let r = v3_evaluate(&v3_canonical()).unwrap();
        assert!((r.lhs - FRAC_1_SQRT_2).abs() < EXACT);
        assert!((r.rhs - (1.0 - FRAC_1_SQRT_2)).abs() < EXACT);
        assert!(r.violated);
        assert!((r.combined_lhs - SQRT_2).abs() < EXACT);
        assert_eq!(r.combined_rhs, 1.0);

        let zero = Some(Labeled::new(0.0, Provenance::EmpiricallyEstimated));
        let s = V3Scenario {
            c_ep: zero,
            c_ee_prime: zero,
            c_pe_prime: zero,
            ..v3_canonical()
        };
        let r = v3_evaluate(&s).unwrap();
        assert_eq!((r.lhs, r.rhs, r.violated), (0.0, 1.0, false));
    }

    #[test]
    fn v3_canonical_matches_angles() {
        let c = v3_canonical();
        let derived = v3_from_angles(c.theta_p, c.theta_e, c.theta_e_prime);
        assert!((derived.c_ep.unwrap().value - c.c_ep.unwrap().value).abs() < EXACT);
        assert!((derived.c_pe_prime.unwrap().value - c.c_pe_prime.unwrap().value).abs() < EXACT);
        assert!(derived.c_ee_prime.unwrap().value.abs() < EXACT);
    }

    #[test]
    fn v4_examples() {
        let r = v4_evaluate(&v4_canonical()).unwrap();
        assert!((r.s_value - 2.0 * SQRT_2).abs() < EXACT);
        assert!(r.violated);

        let l = |v| Some(Labeled::new(v, Provenance::EmpiricallyEstimated));
        let s = V4Scenario {
            c_ep: l(0.0),
            c_ep_prime: l(0.0),
            c_e_prime_p: l(0.0),
            c_e_prime_p_prime: l(0.0),
            ..v4_canonical()
        };
        let r = v4_evaluate(&s).unwrap();
        assert_eq!((r.s_value, r.violated), (0.0, false));
        let s = V4Scenario {
            c_ep: l(1.0),
            c_ep_prime: l(1.0),
            c_e_prime_p: l(1.0),
            c_e_prime_p_prime: l(-1.0),
            ..s
        };
        let r = v4_evaluate(&s).unwrap();
        assert_eq!((r.s_value, r.violated), (4.0, true));
    }

    #[test]
    fn unpopulated_and_out_of_range() {
        let s = V3Scenario {
            c_ee_prime: None,
            ..v3_canonical()
        };
        assert_eq!(v3_evaluate(&s), Err(Error::Unpopulated("c_ee_prime")));
        let s = V4Scenario {
            c_ep: Some(Labeled::new(1.5, Provenance::QuantumPredicted)),
            ..v4_canonical()
        };
        assert!(matches!(v4_evaluate(&s), Err(Error::CorrelationOutOfRange { .. })));
    }

    proptest! {
        #[test]
        fn qm_symmetric_and_rotation_invariant(a in -10.0f64..10.0, b in -10.0f64..10.0, phi in -10.0f64..10.0) {
            let (x, y) = (Angle::from_radians(a), Angle::from_radians(b));
            prop_assert!((qm_correlation(x, y) - qm_correlation(y, x)).abs() < 1e-15);
            prop_assert!((qm_correlation(x.rotate(phi), y.rotate(phi)) - qm_correlation(x, y)).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&qm_correlation(x, y)));
        }

        #[test]
        fn v3_parity_invariant(p in -PI..PI, e in -PI..PI, ep in -PI..PI) {
            let (p, e, ep) = (Angle::from_radians(p), Angle::from_radians(e), Angle::from_radians(ep));
            let a = v3_evaluate(&v3_from_angles(p, e, ep)).unwrap();
            let b = v3_evaluate(&v3_from_angles(p.reflect(), e.reflect(), ep.reflect())).unwrap();
            prop_assert!((a.lhs - b.lhs).abs() < 1e-12);
            prop_assert!((a.rhs - b.rhs).abs() < 1e-12);
            prop_assert_eq!(a.violated, b.violated);
        }
    }
}
