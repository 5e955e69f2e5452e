//! Angle arguments with an explicit unit: `45deg`, `0.785rad`, `3pi/4`, `-0.75pi`.

use bell_lab::seqcore::Angle;

fn number(s: &str, whole: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("invalid number {s:?} in angle {whole:?}"))
}

pub fn parse_angle(raw: &str) -> Result<Angle, String> {
    let s = raw.trim();
    if let Some(v) = s.strip_suffix("deg") {
        return Ok(Angle::from_degrees(number(v, raw)?));
    }
    if let Some(v) = s.strip_suffix("rad") {
        return Ok(Angle::from_radians(number(v, raw)?));
    }
    if let Some((coef, rest)) = s.split_once("pi") {
        let coef = match coef.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => number(c, raw)?,
        };
        let den = match rest.trim() {
            "" => 1.0,
            r => match r.strip_prefix('/') {
                Some(d) => number(d, raw)?,
                None => return Err(format!("unexpected {r:?} after pi in angle {raw:?}")),
            },
        };
        if den == 0.0 {
            return Err(format!("zero denominator in angle {raw:?}"));
        }
        return Ok(Angle::pi_fraction(coef, den));
    }
    Err(format!(
        "angle {raw:?} needs a unit: deg, rad, or a multiple of pi (e.g. 3pi/4)"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rad(s: &str) -> f64 {
        parse_angle(s).unwrap().radians()
    }

    #[test]
    fn units() {
        assert!((rad("90deg") - PI / 2.0).abs() < 1e-15);
        assert!((rad("-135deg") + 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(rad("0.5rad"), 0.5);
        assert!((rad("3pi/4") - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((rad("-3pi/4") + 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((rad("-pi/2") + PI / 2.0).abs() < 1e-15);
        assert!((rad("0.25pi") - PI / 4.0).abs() < 1e-15);
        assert_eq!(rad("pi"), PI);
    }

    #[test]
    fn rejects_bare_numbers() {
        for bad in ["45", "", "pi/0", "3pix", "abcdeg", "pi/"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }
}
