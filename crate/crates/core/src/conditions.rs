//! Sufficient conditions, computable from strengths and positions alone, under
//! which the Born-Infeld minimizer is a classical solution away from the charges.
//!
//! Every check compares a length built from the charge strengths (`lhs`) with a
//! distance between charges (`rhs`). A verdict other than `Inconclusive` means
//! `rhs - lhs` exceeds a relative guard band of `1e-12`. `Inconclusive` only
//! says that no implemented certificate applies.

use serde::{Serialize, Serializer};

use crate::charges::ChargeConfig;
use crate::constants::sphere_measure;
use crate::error::{invalid, Error, Result};
use crate::quad::{refined_constant_ctilde, shape_constant_a};

pub const GUARD_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictLevel {
    GlobalClassical,
    SegmentClassical,
    TwoChargeClassical,
    SameSignSegment,
    Inconclusive,
}

impl VerdictLevel {
    pub fn is_certificate(self) -> bool {
        self != VerdictLevel::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// No segments: one charge.
    SingleCharge,
    /// Best constant `C_bar` of the inhomogeneous inequality.
    BestConstant,
    /// Refined constant `C_tilde`.
    Refined,
    /// Two opposite charges compared through `A(N)`.
    TwoCharge,
    /// Same-sign pairs are always classical along their segment.
    SameSign,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentVerdict {
    pub j: usize,
    pub l: usize,
    pub level: VerdictLevel,
    pub rule: Rule,
    #[serde(serialize_with = "serialize_extended")]
    pub lhs: f64,
    pub rhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub level: VerdictLevel,
    pub rule: Rule,
    #[serde(serialize_with = "serialize_extended")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub rhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_segment: Option<Vec<SegmentVerdict>>,
}

/// Infinite margins serialize as the strings `"inf"` / `"-inf"` since JSON has no infinity.
pub fn serialize_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

fn passes(lhs: f64, rhs: f64) -> bool {
    rhs - lhs > GUARD_BAND * rhs.abs().max(lhs.abs())
}

fn single_charge() -> Verdict {
    Verdict {
        level: VerdictLevel::GlobalClassical,
        rule: Rule::SingleCharge,
        lhs: 0.0,
        rhs: f64::INFINITY,
        margin: f64::INFINITY,
        per_segment: None,
    }
}

fn global_verdict(rule: Rule, lhs: f64, rhs: f64) -> Verdict {
    Verdict {
        level: if passes(lhs, rhs) {
            VerdictLevel::GlobalClassical
        } else {
            VerdictLevel::Inconclusive
        },
        rule,
        lhs,
        rhs,
        margin: rhs - lhs,
        per_segment: None,
    }
}

/// `(sum_{a>0} a)^{1/(N-1)} + (sum_{a<0} |a|)^{1/(N-1)}`; an empty class contributes 0.
pub fn sign_class_bracket(config: &ChargeConfig) -> f64 {
    let e = 1.0 / (config.dim() as f64 - 1.0);
    let root = |s: f64| if s > 0.0 { s.powf(e) } else { 0.0 };
    root(config.positive_total()) + root(config.negative_total())
}

/// Length scale `(N/omega)^{1/(N-1)} (N-1)/(N-2)` multiplying the bracket in the global rule.
pub fn global_prefactor(dim: usize) -> Result<f64> {
    let n = dim as f64;
    Ok((n / sphere_measure(dim)?).powf(1.0 / (n - 1.0)) * (n - 1.0) / (n - 2.0))
}

/// Global certificate from the best constant `C_bar`.
pub fn check_global(config: &ChargeConfig) -> Result<Verdict> {
    let Some(rhs) = config.min_distance() else {
        return Ok(single_charge());
    };
    let lhs = global_prefactor(config.dim())? * sign_class_bracket(config);
    Ok(global_verdict(Rule::BestConstant, lhs, rhs))
}

/// Refined certificate: `C_tilde^{-1/(N-1)}` times the sign-class bracket,
/// compared with the minimum distance and, per mixed pair, with that pair's distance.
pub fn check_refined(config: &ChargeConfig, ctilde: f64) -> Result<Verdict> {
    if !(ctilde > 0.0 && ctilde.is_finite()) {
        return invalid(format!("C_tilde must be positive, got {ctilde}"));
    }
    let Some(rhs) = config.min_distance() else {
        return Ok(single_charge());
    };
    let lhs = refined_lhs(config, ctilde);
    let mut verdict = global_verdict(Rule::Refined, lhs, rhs);
    verdict.per_segment = Some(classify_segments_with(config, ctilde)?);
    Ok(verdict)
}

fn refined_lhs(config: &ChargeConfig, ctilde: f64) -> f64 {
    ctilde.powf(-1.0 / (config.dim() as f64 - 1.0)) * sign_class_bracket(config)
}

/// Two opposite charges: `(|a_1|^{1/(N-1)} + |a_2|^{1/(N-1)}) A(N) < |x_1 - x_2|`.
pub fn check_two_charge(config: &ChargeConfig) -> Result<Verdict> {
    if config.len() != 2 {
        return Err(Error::NotApplicable(format!(
            "two-charge rule needs exactly 2 charges, got {}",
            config.len()
        )));
    }
    let (a1, a2) = (config.charges()[0].strength, config.charges()[1].strength);
    if a1 * a2 > 0.0 {
        return Err(Error::NotApplicable(
            "charges have the same sign; the same-sign segment rule applies".into(),
        ));
    }
    let e = 1.0 / (config.dim() as f64 - 1.0);
    let lhs = (a1.abs().powf(e) + a2.abs().powf(e)) * shape_constant_a(config.dim())?;
    let rhs = config.distance(0, 1);
    let mut verdict = global_verdict(Rule::TwoCharge, lhs, rhs);
    if verdict.level == VerdictLevel::GlobalClassical {
        verdict.level = VerdictLevel::TwoChargeClassical;
    }
    Ok(verdict)
}

/// Per-pair classification using the refined constant for `N`.
pub fn classify_segments(config: &ChargeConfig) -> Result<Vec<SegmentVerdict>> {
    if config.len() < 2 {
        return Ok(Vec::new());
    }
    classify_segments_with(config, refined_constant_ctilde(config.dim())?)
}

/// Same-sign pairs are classical unconditionally; each mixed pair is compared
/// with the refined length on its own distance.
pub fn classify_segments_with(config: &ChargeConfig, ctilde: f64) -> Result<Vec<SegmentVerdict>> {
    if !(ctilde > 0.0 && ctilde.is_finite()) {
        return invalid(format!("C_tilde must be positive, got {ctilde}"));
    }
    let lhs = refined_lhs(config, ctilde);
    let strengths: Vec<f64> = config.strengths().collect();
    Ok(config
        .pairs()
        .map(|(j, l)| {
            let rhs = config.distance(j, l);
            if strengths[j] * strengths[l] > 0.0 {
                SegmentVerdict {
                    j,
                    l,
                    level: VerdictLevel::SameSignSegment,
                    rule: Rule::SameSign,
                    lhs: 0.0,
                    rhs,
                    margin: f64::INFINITY,
                }
            } else {
                SegmentVerdict {
                    j,
                    l,
                    level: if passes(lhs, rhs) {
                        VerdictLevel::SegmentClassical
                    } else {
                        VerdictLevel::Inconclusive
                    },
                    rule: Rule::Refined,
                    lhs,
                    rhs,
                    margin: rhs - lhs,
                }
            }
        })
        .collect())
}

/// All certificates that apply to a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub global: Verdict,
    pub refined: Verdict,
    pub ctilde: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_charge: Option<Verdict>,
    pub segments: Vec<SegmentVerdict>,
    /// True when a single rule covers all of `R^N` minus the charges.
    pub certified: bool,
}

pub fn certify(config: &ChargeConfig) -> Result<CertificateReport> {
    let ctilde = refined_constant_ctilde(config.dim())?;
    let global = check_global(config)?;
    let mut refined = check_refined(config, ctilde)?;
    let segments = refined.per_segment.take().unwrap_or_default();
    let two_charge = match check_two_charge(config) {
        Ok(v) => Some(v),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let all_same_sign = !segments.is_empty()
        && segments
            .iter()
            .all(|s| s.level == VerdictLevel::SameSignSegment);
    let certified = global.level.is_certificate()
        || refined.level.is_certificate()
        || two_charge
            .as_ref()
            .is_some_and(|v| v.level.is_certificate())
        || all_same_sign;
    Ok(CertificateReport {
        global,
        refined,
        ctilde,
        two_charge,
        segments,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::Charge;

    fn pair(a1: f64, a2: f64, d: f64) -> ChargeConfig {
        ChargeConfig::new(
            3,
            vec![
                Charge::new(vec![0.0; 3], a1),
                Charge::new(vec![d, 0.0, 0.0], a2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_charge_is_global() {
        let cfg = ChargeConfig::new(3, vec![Charge::new(vec![0.0; 3], 2.0)]).unwrap();
        let v = check_global(&cfg).unwrap();
        assert_eq!(v.level, VerdictLevel::GlobalClassical);
        assert!(v.margin.is_infinite());
        assert!(classify_segments(&cfg).unwrap().is_empty());
    }

    #[test]
    fn two_charge_not_applicable() {
        assert!(matches!(
            check_two_charge(&pair(1.0, 1.0, 3.0)),
            Err(Error::NotApplicable(_))
        ));
        let three = ChargeConfig::new(
            3,
            vec![
                Charge::new(vec![0.0; 3], 1.0),
                Charge::new(vec![1.0, 0.0, 0.0], -1.0),
                Charge::new(vec![2.0, 0.0, 0.0], 1.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            check_two_charge(&three),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn guard_band_is_conservative() {
        let lhs = global_prefactor(3).unwrap() * 2.0;
        let v = check_global(&pair(1.0, -1.0, lhs)).unwrap();
        assert_eq!(v.level, VerdictLevel::Inconclusive);
        let v = check_global(&pair(1.0, -1.0, lhs * (1.0 + 1e-9))).unwrap();
        assert_eq!(v.level, VerdictLevel::GlobalClassical);
    }

    #[test]
    fn all_positive_uses_one_class() {
        let v = check_global(&pair(1.0, 2.0, 1.0)).unwrap();
        assert!((v.lhs - global_prefactor(3).unwrap() * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_ctilde() {
        assert!(check_refined(&pair(1.0, -1.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn infinite_margin_serializes_as_string() {
        let cfg = ChargeConfig::new(3, vec![Charge::new(vec![0.0; 3], 2.0)]).unwrap();
        let json = serde_json::to_string(&check_global(&cfg).unwrap()).unwrap();
        assert!(json.contains("\"margin\":\"inf\""));
    }
}
