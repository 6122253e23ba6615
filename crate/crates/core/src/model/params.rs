use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Which of the two forbidden sub-cases of the long-time regime matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcludedPattern {
    /// `a = d = 0, c < 0, b > 0`
    AdZero,
    /// `a = b = 0, c < 0, d > 0`
    AbZero,
}

impl fmt::Display for ExcludedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExcludedPattern::AdZero => write!(f, "a=d=0, c<0, b>0"),
            ExcludedPattern::AbZero => write!(f, "a=b=0, c<0, d>0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    /// `a,c <= 0`, `b,d >= 0`, `b+d > 0`, not excluded.
    LongTimeAdmissible,
    /// `a = c >= 0`, `b,d >= 0` (linearly well posed, outside the long-time theorem).
    GenericCase2222,
    ExcludedCase(ExcludedPattern),
    Inadmissible,
}

/// The first clause of the long-time hypotheses a quadruple fails.
#[derive(Debug, Clone, PartialEq)]
pub enum GateFailure {
    SumConstraint { sum: f64 },
    Sign(&'static str),
    BPlusDZero,
    Excluded(ExcludedPattern),
}

impl fmt::Display for GateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateFailure::SumConstraint { sum } => {
                write!(f, "sum constraint a+b+c+d = 1/3 violated (sum = {sum})")
            }
            GateFailure::Sign(clause) => write!(f, "sign condition {clause} violated"),
            GateFailure::BPlusDZero => write!(f, "b + d > 0 violated"),
            GateFailure::Excluded(p) => write!(f, "excluded case {p}"),
        }
    }
}

/// The `(a, b, c, d)` quadruple with `ε` and its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRecord", into = "ParamRecord")]
pub struct AbcdParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub epsilon: f64,
    classification: Classification,
}

/// Plain serialised form of [`AbcdParams`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub epsilon: f64,
}

impl TryFrom<ParamRecord> for AbcdParams {
    type Error = Error;
    fn try_from(r: ParamRecord) -> Result<Self> {
        validate_params(r.a, r.b, r.c, r.d, r.epsilon)
    }
}

impl From<AbcdParams> for ParamRecord {
    fn from(p: AbcdParams) -> Self {
        ParamRecord {
            a: p.a,
            b: p.b,
            c: p.c,
            d: p.d,
            epsilon: p.epsilon,
        }
    }
}

/// Named parameter presets.
pub const PRESETS: [&str; 5] = ["bbm-bbm", "kdv-kdv", "bona-smith", "excluded-1", "excluded-2"];

pub fn preset_quadruple(name: &str) -> Result<[f64; 4]> {
    let sixth = 1.0 / 6.0;
    let third = 1.0 / 3.0;
    Ok(match name {
        "bbm-bbm" => [0.0, sixth, 0.0, sixth],
        "kdv-kdv" => [sixth, 0.0, sixth, 0.0],
        "bona-smith" => [0.0, third, -third, third],
        "excluded-1" => [0.0, 0.5, -sixth, 0.0],
        "excluded-2" => [0.0, 0.0, -sixth, 0.5],
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

fn classify(a: f64, b: f64, c: f64, d: f64) -> Classification {
    if ((a + b + c + d) - 1.0 / 3.0).abs() > SUM_TOL {
        return Classification::Inadmissible;
    }
    let signs_1111 = a <= 0.0 && c <= 0.0 && b >= 0.0 && d >= 0.0;
    if signs_1111 && b + d > 0.0 {
        if a == 0.0 && d == 0.0 && c < 0.0 && b > 0.0 {
            return Classification::ExcludedCase(ExcludedPattern::AdZero);
        }
        if a == 0.0 && b == 0.0 && c < 0.0 && d > 0.0 {
            return Classification::ExcludedCase(ExcludedPattern::AbZero);
        }
        return Classification::LongTimeAdmissible;
    }
    if a == c && a >= 0.0 && b >= 0.0 && d >= 0.0 {
        return Classification::GenericCase2222;
    }
    Classification::Inadmissible
}

/// Validate a quadruple and classify it. A broken sum constraint yields
/// `Inadmissible` (see [`AbcdParams::long_time_gate`] for the diagnostic);
/// an `ε` outside `(0, 1]` is an error.
pub fn validate_params(a: f64, b: f64, c: f64, d: f64, epsilon: f64) -> Result<AbcdParams> {
    if ![a, b, c, d, epsilon].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteParameter);
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(AbcdParams {
        a,
        b,
        c,
        d,
        epsilon,
        classification: classify(a, b, c, d),
    })
}

pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl AbcdParams {
    pub fn preset(name: &str, epsilon: f64) -> Result<Self> {
        let [a, b, c, d] = preset_quadruple(name)?;
        validate_params(a, b, c, d, epsilon)
    }

    /// The `ε = 0` reference system, used only for linear-limit diagnostics.
    pub fn linear_reference(a: f64, b: f64, c: f64, d: f64) -> Self {
        AbcdParams {
            a,
            b,
            c,
            d,
            epsilon: 0.0,
            classification: classify(a, b, c, d),
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        validate_params(self.a, self.b, self.c, self.d, epsilon)
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn quadruple(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_kdv_kdv(&self) -> bool {
        self.b == 0.0 && self.d == 0.0 && self.classification == Classification::GenericCase2222
    }

    /// True when the right-hand side may be evaluated.
    pub fn is_evolvable(&self) -> bool {
        matches!(
            self.classification,
            Classification::LongTimeAdmissible | Classification::GenericCase2222
        )
    }

    pub fn require_evolvable(&self) -> Result<()> {
        if self.is_evolvable() {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "classification {:?} cannot be evolved ({})",
                self.classification,
                self.long_time_gate().err().map(|e| e.to_string()).unwrap_or_default()
            )))
        }
    }

    /// Check the hypotheses of the long-time existence theorem, naming the
    /// first failed clause.
    pub fn long_time_gate(&self) -> std::result::Result<(), GateFailure> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let sum = a + b + c + d;
        if (sum - 1.0 / 3.0).abs() > SUM_TOL {
            return Err(GateFailure::SumConstraint { sum });
        }
        if a > 0.0 {
            return Err(GateFailure::Sign("a <= 0"));
        }
        if c > 0.0 {
            return Err(GateFailure::Sign("c <= 0"));
        }
        if b < 0.0 {
            return Err(GateFailure::Sign("b >= 0"));
        }
        if d < 0.0 {
            return Err(GateFailure::Sign("d >= 0"));
        }
        if !(b + d > 0.0) {
            return Err(GateFailure::BPlusDZero);
        }
        match self.classification {
            Classification::ExcludedCase(p) => Err(GateFailure::Excluded(p)),
            _ => Ok(()),
        }
    }

    /// `(s1, s2, s3) = (s + sgn b − sgn c, s + sgn d − sgn a, s + 1 − sgn a)`.
    pub fn regularity_indices(&self, s: f64) -> Result<(f64, f64, f64)> {
        if self.classification == Classification::Inadmissible {
            return Err(Error::Inadmissible(
                "regularity indices need an admissible quadruple".into(),
            ));
        }
        Ok((
            s + sgn(self.b) - sgn(self.c),
            s + sgn(self.d) - sgn(self.a),
            s + 1.0 - sgn(self.a),
        ))
    }

    /// Linear dispersion relation `ω(k)²` for a plane wave of wavenumber `k`.
    pub fn dispersion_omega_sq(&self, k: f64) -> f64 {
        let e = self.epsilon;
        let k2 = k * k;
        k2 * (1.0 - e * self.a * k2) * (1.0 - e * self.c * k2) / ((1.0 + e * self.b * k2) * (1.0 + e * self.d * k2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_examples() {
        let p = validate_params(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 0.1).unwrap();
        assert_eq!(p.classification(), Classification::LongTimeAdmissible);
        let p = validate_params(1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0, 0.1).unwrap();
        assert_eq!(p.classification(), Classification::GenericCase2222);
        assert!(p.is_kdv_kdv());
        let p = validate_params(0.0, 0.5, -1.0 / 6.0, 0.0, 0.1).unwrap();
        assert_eq!(
            p.classification(),
            Classification::ExcludedCase(ExcludedPattern::AdZero)
        );
        let p = AbcdParams::preset("excluded-2", 0.1).unwrap();
        assert_eq!(
            p.classification(),
            Classification::ExcludedCase(ExcludedPattern::AbZero)
        );
        let p = AbcdParams::preset("bona-smith", 0.1).unwrap();
        assert_eq!(p.classification(), Classification::LongTimeAdmissible);
    }

    #[test]
    fn sum_and_epsilon_errors() {
        let p = validate_params(0.0, 0.2, 0.0, 0.2, 0.1).unwrap();
        assert_eq!(p.classification(), Classification::Inadmissible);
        assert!(matches!(p.long_time_gate(), Err(GateFailure::SumConstraint { .. })));
        assert!(matches!(
            validate_params(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            validate_params(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 1.5),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            validate_params(f64::NAN, 0.0, 0.0, 0.0, 0.5),
            Err(Error::NonFiniteParameter)
        ));
        assert!(matches!(AbcdParams::preset("nope", 0.1), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn regularity_index_examples() {
        let bbm = AbcdParams::preset("bbm-bbm", 0.1).unwrap();
        assert_eq!(bbm.regularity_indices(2.0).unwrap(), (3.0, 3.0, 3.0));
        let p = validate_params(-1.0 / 6.0, 1.0 / 6.0, -1.0 / 6.0, 0.5, 0.1).unwrap();
        assert_eq!(p.regularity_indices(2.0).unwrap(), (4.0, 4.0, 4.0));
        let p = validate_params(0.0, 0.25, -1.0 / 6.0, 0.25, 0.1).unwrap();
        assert_eq!(p.regularity_indices(2.0).unwrap(), (4.0, 3.0, 3.0));
        let bad = validate_params(1.0, 1.0, 1.0, 1.0, 0.1).unwrap();
        assert!(bad.regularity_indices(2.0).is_err());
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let p = AbcdParams::preset("bona-smith", 0.05).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        let back: AbcdParams = serde_json::from_str(&js).unwrap();
        assert_eq!(p, back);
        assert!(
            serde_json::from_str::<AbcdParams>(r#"{"a":0,"b":0,"c":0,"d":0.3333333333333333,"epsilon":2}"#).is_err()
        );
    }

    proptest! {
        // Quadruples on a lattice of sixths/twelfths with the sum constraint enforced.
        #[test]
        fn long_time_gate_matches_classification(ia in -4i32..=4, ib in -4i32..=4, ic in -4i32..=4) {
            let unit = 1.0 / 12.0;
            let (a, b, c) = (ia as f64 * unit, ib as f64 * unit, ic as f64 * unit);
            let d = 1.0 / 3.0 - a - b - c;
            let p = validate_params(a, b, c, d, 0.1).unwrap();
            let gate = p.long_time_gate();
            if p.classification() == Classification::LongTimeAdmissible {
                prop_assert!(gate.is_ok());
                prop_assert!(b + d > 0.0);
                prop_assert!(!(a == 0.0 && d == 0.0 && c < 0.0 && b > 0.0));
                prop_assert!(!(a == 0.0 && b == 0.0 && c < 0.0 && d > 0.0));
            } else {
                prop_assert!(gate.is_err());
            }
        }
    }
}
