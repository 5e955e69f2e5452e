use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Oriented measurement axis, as an angle from the reference axis, kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

/// Maps any real onto (−π, π]. The half-open end at −π folds onto +π.
pub fn canonicalize(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = (theta + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

impl Angle {
    /// The reference axis.
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(theta: f64) -> Self {
        Angle(canonicalize(theta))
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    /// `num·π/den`, the form most settings are quoted in.
    pub fn pi_fraction(num: f64, den: f64) -> Self {
        Self::from_radians(num * PI / den)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Mirror image about the reference axis.
    pub fn reflect(self) -> Self {
        Self::from_radians(-self.0)
    }

    /// Same axis, opposite orientation.
    pub fn opposite(self) -> Self {
        if self.0 > 0.0 {
            Angle(self.0 - PI)
        } else {
            Angle(self.0 + PI)
        }
    }

    /// Rotation by `phi`.
    pub fn rotate(self, phi: f64) -> Self {
        Self::from_radians(self.0 + phi)
    }

    /// Signed difference `self − other`, canonicalized.
    pub fn minus(self, other: Angle) -> f64 {
        canonicalize(self.0 - other.0)
    }
}

impl From<f64> for Angle {
    fn from(theta: f64) -> Self {
        Angle::from_radians(theta)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}rad", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-15;

    #[test]
    fn reflect_and_opposite() {
        assert!((Angle::pi_fraction(1.0, 4.0).reflect().radians() + PI / 4.0).abs() < EPS);
        assert!((Angle::pi_fraction(-3.0, 4.0).opposite().radians() - PI / 4.0).abs() < EPS);
        assert_eq!(Angle::from_radians(PI).opposite().radians(), 0.0);
        assert_eq!(Angle::ZERO.opposite().radians(), PI);
        assert_eq!(Angle::from_radians(PI).reflect().radians(), PI);
    }

    #[test]
    fn half_open_at_minus_pi() {
        assert_eq!(Angle::from_radians(-PI).radians(), PI);
        assert_eq!(Angle::from_radians(PI).radians(), PI);
        assert_eq!(Angle::from_radians(3.0 * PI).radians(), PI);
        assert_eq!(Angle::from_degrees(180.0).radians(), PI);
    }

    proptest! {
        #[test]
        fn canonical_range(theta in -100.0f64..100.0) {
            let a = Angle::from_radians(theta).radians();
            prop_assert!(a > -PI && a <= PI);
            prop_assert!(((theta - a) / TAU - ((theta - a) / TAU).round()).abs() < 1e-9);
        }

        #[test]
        fn periodic(theta in -10.0f64..10.0) {
            let a = Angle::from_radians(theta).radians();
            let b = Angle::from_radians(theta + TAU).radians();
            // equal up to the rounding of theta + 2π, modulo the ±π seam
            let d = canonicalize(a - b);
            prop_assert!(d.abs() < 1e-12);
        }

        #[test]
        fn opposite_is_involution(theta in -PI..PI) {
            let a = Angle::from_radians(theta);
            prop_assert!((a.opposite().opposite().radians() - a.radians()).abs() < 1e-15);
            let o = a.opposite().radians();
            prop_assert!(o > -PI && o <= PI);
        }
    }
}
