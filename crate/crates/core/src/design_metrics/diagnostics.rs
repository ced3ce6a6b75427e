use std::fmt;

use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use super::monte_carlo::{simulate, SignRule, SimConfig, Tally};
use super::{check_alpha, check_se, DesignError, Result, Sides};
use crate::effect_model::EffectDistribution;
use crate::normal;

/// Fewest draws accepted by [`diagnostics_mixture`].
pub const MIN_MIXTURE_DRAWS: u64 = 10_000;

/// Below this |mixture mean| the exaggeration ratio is reported as undefined.
pub const EXAGGERATION_MEAN_FLOOR: f64 = 1e-6;

const ZERO_EFFECT: f64 = 1e-12;

/// Expected |significant estimate| over |true effect|, or undefined when
/// the true effect is (numerically) zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exaggeration {
    Ratio(f64),
    Undefined,
}

impl Exaggeration {
    pub fn ratio(self) -> Option<f64> {
        match self {
            Exaggeration::Ratio(r) => Some(r),
            Exaggeration::Undefined => None,
        }
    }
}

impl fmt::Display for Exaggeration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exaggeration::Ratio(r) => write!(f, "{r}"),
            Exaggeration::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Exaggeration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exaggeration::Ratio(r) => s.serialize_f64(*r),
            Exaggeration::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Exaggeration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exaggeration;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a ratio or the string \"undefined\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exaggeration, E> {
                Ok(Exaggeration::Ratio(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exaggeration, E> {
                Ok(Exaggeration::Ratio(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exaggeration, E> {
                Ok(Exaggeration::Ratio(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exaggeration, E> {
                if v == "undefined" {
                    Ok(Exaggeration::Undefined)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MonteCarlo { draws: u64, seed: u64 },
}

/// Monte Carlo standard errors of the reported quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McStandardErrors {
    pub power: f64,
    pub type_s: f64,
    pub exaggeration: Option<f64>,
}

/// Power, sign error and exaggeration for one design, with the inputs that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    pub power: f64,
    pub type_s: f64,
    pub exaggeration: Exaggeration,
    pub se: f64,
    pub z_crit: f64,
    pub alpha: f64,
    pub sides: Sides,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<EffectDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_standard_errors: Option<McStandardErrors>,
    /// Median |estimate| among significant draws; stands in for the
    /// exaggeration ratio when the mixture mean is zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_abs_significant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Critical value of the standardized estimate.
pub fn z_crit(alpha: f64, sides: Sides) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(match sides {
        Sides::TwoSided => normal::quantile(1.0 - alpha / 2.0),
        Sides::OneSided => normal::quantile(1.0 - alpha),
    })
}

/// Probability that the estimate is significant when the true effect is fixed.
pub fn power_fixed(effect: f64, se: f64, alpha: f64, sides: Sides) -> Result<f64> {
    check_se(se)?;
    finite("effect", effect)?;
    let z = z_crit(alpha, sides)?;
    Ok(closed_form(effect / se, z, sides).power)
}

struct ClosedForm {
    power: f64,
    type_s: f64,
    exaggeration: Option<f64>,
}

/// Closed forms on the standardized scale, `lambda = effect / se`.
fn closed_form(lambda: f64, z: f64, sides: Sides) -> ClosedForm {
    let zero = lambda == 0.0;
    match sides {
        Sides::TwoSided => {
            let upper = normal::cdf(lambda - z);
            let lower = normal::cdf(-z - lambda);
            let power = upper + lower;
            let type_s = if zero {
                0.5
            } else if lambda > 0.0 {
                lower / power
            } else {
                upper / power
            };
            // E[|X|; |X| > z] for X ~ N(lambda, 1)
            let tail_abs = lambda * upper + normal::pdf(z - lambda) - lambda * lower
                + normal::pdf(-z - lambda);
            ClosedForm {
                power,
                type_s,
                exaggeration: (!zero).then(|| tail_abs / power / lambda.abs()),
            }
        }
        Sides::OneSided => {
            let m = lambda.abs();
            let power = normal::cdf(m - z);
            let tail = m * power + normal::pdf(z - m);
            ClosedForm {
                power,
                type_s: if zero { 0.5 } else { 0.0 },
                exaggeration: (!zero).then(|| tail / power / m),
            }
        }
    }
}

/// Closed-form diagnostics for a fixed true effect.
///
/// Type S is the share of significant estimates whose sign is opposite the
/// effect; the exaggeration ratio is E[|estimate| | significant] / |effect|.
/// At a zero effect type S is 0.5 and the ratio is undefined.
pub fn diagnostics_fixed(
    effect: f64,
    se: f64,
    alpha: f64,
    sides: Sides,
) -> Result<DesignDiagnostics> {
    check_se(se)?;
    finite("effect", effect)?;
    let z = z_crit(alpha, sides)?;
    let lambda = if effect.abs() < ZERO_EFFECT {
        0.0
    } else {
        effect / se
    };
    let cf = closed_form(lambda, z, sides);
    Ok(DesignDiagnostics {
        power: cf.power,
        type_s: cf.type_s,
        exaggeration: cf
            .exaggeration
            .map_or(Exaggeration::Undefined, |r| Exaggeration::Ratio(r.max(1.0))),
        se,
        z_crit: z,
        alpha,
        sides,
        method: Method::ClosedForm,
        effect: Some(effect),
        distribution: None,
        mc_standard_errors: None,
        median_abs_significant: None,
        warnings: Vec::new(),
    })
}

/// Monte Carlo counterpart of [`diagnostics_fixed`].
pub fn diagnostics_fixed_mc(
    effect: f64,
    se: f64,
    alpha: f64,
    sides: Sides,
    draws: u64,
    seed: u64,
) -> Result<DesignDiagnostics> {
    check_se(se)?;
    finite("effect", effect)?;
    check_draws(draws)?;
    let z = z_crit(alpha, sides)?;
    let cfg = SimConfig {
        se,
        threshold: z * se,
        direction: direction(sides, effect),
        sign_rule: SignRule::ZeroIsPositive,
        collect_abs: false,
    };
    let tally = simulate(|_: &mut ChaCha8Rng| effect, cfg, draws, seed);
    let reference = (effect.abs() >= ZERO_EFFECT).then_some(effect.abs());
    let mut out = summarize(&tally, reference, se, z, alpha, sides, draws, seed);
    out.effect = Some(effect);
    Ok(out)
}

/// Diagnostics when each unit's effect is drawn from `dist`.
///
/// A significant estimate is a sign error only when its own effect is
/// nonzero and of the other sign. The exaggeration ratio is taken relative
/// to |mean of `dist`|; when that mean is within
/// [`EXAGGERATION_MEAN_FLOOR`] of zero the ratio is undefined and the median
/// |significant estimate| is reported instead.
pub fn diagnostics_mixture(
    dist: &EffectDistribution,
    se: f64,
    alpha: f64,
    sides: Sides,
    draws: u64,
    seed: u64,
) -> Result<DesignDiagnostics> {
    check_se(se)?;
    check_draws(draws)?;
    let z = z_crit(alpha, sides)?;
    let mean = dist.mean();
    let degenerate_mean = mean.abs() < EXAGGERATION_MEAN_FLOOR;
    let sampler = dist.sampler();
    let cfg = SimConfig {
        se,
        threshold: z * se,
        direction: direction(sides, mean),
        sign_rule: SignRule::NonzeroOnly,
        collect_abs: degenerate_mean,
    };
    let tally = simulate(|rng: &mut ChaCha8Rng| sampler.draw(rng), cfg, draws, seed);
    let reference = (!degenerate_mean).then_some(mean.abs());
    let mut out = summarize(&tally, reference, se, z, alpha, sides, draws, seed);
    if degenerate_mean {
        out.median_abs_significant = median(tally.abs_values);
        out.warnings.push(format!(
            "mixture mean {mean:e} is within {EXAGGERATION_MEAN_FLOOR:e} of zero; exaggeration ratio is undefined, median |significant estimate| reported instead"
        ));
    } else if mean.abs() < 0.1 * se {
        out.warnings.push(format!(
            "mixture mean {mean} is below a tenth of the standard error; the exaggeration ratio is unstable"
        ));
    }
    out.distribution = Some(dist.clone());
    Ok(out)
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(DesignError::NonFinite(name))
    }
}

fn check_draws(draws: u64) -> Result<()> {
    if draws < MIN_MIXTURE_DRAWS {
        Err(DesignError::TooFewDraws {
            draws,
            min: MIN_MIXTURE_DRAWS,
        })
    } else {
        Ok(())
    }
}

fn direction(sides: Sides, reference: f64) -> Option<f64> {
    match sides {
        Sides::TwoSided => None,
        Sides::OneSided => Some(if reference >= 0.0 { 1.0 } else { -1.0 }),
    }
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    t: &Tally,
    reference: Option<f64>,
    se: f64,
    z: f64,
    alpha: f64,
    sides: Sides,
    draws: u64,
    seed: u64,
) -> DesignDiagnostics {
    let n = t.draws as f64;
    let power = t.significant as f64 / n;
    let mut warnings = Vec::new();
    let (type_s, type_s_se, exaggeration, exaggeration_se) = if t.significant == 0 {
        warnings.push("no significant draws; type S and exaggeration are not estimable".into());
        (0.0, 0.0, Exaggeration::Undefined, None)
    } else {
        let k = t.significant as f64;
        let ts = t.wrong_sign as f64 / k;
        let mean_abs = t.sum_abs / k;
        let var_abs = (t.sum_abs_sq / k - mean_abs * mean_abs).max(0.0);
        match reference {
            Some(r) => (
                ts,
                (ts * (1.0 - ts) / k).sqrt(),
                Exaggeration::Ratio(mean_abs / r),
                Some((var_abs / k).sqrt() / r),
            ),
            None => (ts, (ts * (1.0 - ts) / k).sqrt(), Exaggeration::Undefined, None),
        }
    };
    DesignDiagnostics {
        power,
        type_s,
        exaggeration,
        se,
        z_crit: z,
        alpha,
        sides,
        method: Method::MonteCarlo { draws, seed },
        effect: None,
        distribution: None,
        mc_standard_errors: Some(McStandardErrors {
            power: (power * (1.0 - power) / n).sqrt(),
            type_s: type_s_se,
            exaggeration: exaggeration_se,
        }),
        median_abs_significant: None,
        warnings,
    }
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect_model::{with_null_mass, EffectComponent};
    use proptest::prelude::*;

    const TWO: Sides = Sides::TwoSided;

    #[test]
    fn power_at_null_is_alpha() {
        for alpha in [0.01, 0.05, 0.1, 0.5] {
            let p = power_fixed(0.0, 0.3, alpha, TWO).unwrap();
            assert!((p - alpha).abs() < 1e-12);
            let p = power_fixed(0.0, 0.3, alpha, Sides::OneSided).unwrap();
            assert!((p - alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn power_at_2_8_standard_errors() {
        let p = power_fixed(2.8, 1.0, 0.05, TWO).unwrap();
        assert!((p - 0.80).abs() < 0.005, "{p}");
        let se = crate::design_metrics::se_conservative_binary(63, 63).unwrap();
        assert!(power_fixed(0.25, se, 0.05, TWO).unwrap() >= 0.80);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            power_fixed(0.1, 0.0, 0.05, TWO),
            Err(DesignError::NonPositiveSe(_))
        ));
        assert!(diagnostics_fixed(0.1, -1.0, 0.05, TWO).is_err());
        assert!(power_fixed(0.1, 1.0, 0.0, TWO).is_err());
        let d = EffectDistribution::point_mass(0.1).unwrap();
        assert!(matches!(
            diagnostics_mixture(&d, 0.04, 0.05, TWO, 9_999, 1),
            Err(DesignError::TooFewDraws { .. })
        ));
    }

    #[test]
    fn zero_effect_diagnostics() {
        let d = diagnostics_fixed(0.0, 0.1, 0.05, TWO).unwrap();
        assert!((d.power - 0.05).abs() < 1e-12);
        assert_eq!(d.type_s, 0.5);
        assert_eq!(d.exaggeration, Exaggeration::Undefined);
    }

    // Frozen from the brute-force oracle in tests/common/oracle.rs, 10^7 draws:
    // (effect / se, power, type S, exaggeration, and their MC standard errors).
    const ORACLE: [(f64, [f64; 3], [f64; 3]); 5] = [
        (0.25, [0.057_181_1, 0.237_137_8, 9.419_962], [7.34e-5, 5.62e-4, 1.89e-3]),
        (0.5, [0.079_033_4, 0.087_916_0, 4.787_375], [8.53e-5, 3.19e-4, 8.67e-4]),
        (1.0, [0.169_893_3, 0.009_002_7, 2.491_277], [1.19e-4, 7.25e-5, 3.46e-4]),
        (1.7, [0.397_896_4, 0.000_330_0, 1.570_766], [1.55e-4, 9.11e-6, 1.64e-4]),
        (2.8, [0.799_466_9, 0.000_001_25, 1.125_349], [1.27e-4, 3.96e-7, 9.64e-5]),
    ];

    #[test]
    fn closed_form_matches_frozen_oracle() {
        for (ratio, values, ses) in ORACLE {
            let d = diagnostics_fixed(ratio * 0.04, 0.04, 0.05, TWO).unwrap();
            let got = [d.power, d.type_s, d.exaggeration.ratio().unwrap()];
            for i in 0..3 {
                assert!(
                    (got[i] - values[i]).abs() <= 3.0 * ses[i],
                    "ratio {ratio} quantity {i}: {} vs {}",
                    got[i],
                    values[i]
                );
            }
        }
    }

    #[test]
    fn monte_carlo_fixed_matches_closed_form() {
        for ratio in [0.5, 1.0, 2.8, -1.0] {
            let cf = diagnostics_fixed(ratio, 1.0, 0.05, TWO).unwrap();
            let mc = diagnostics_fixed_mc(ratio, 1.0, 0.05, TWO, 1_000_000, 11).unwrap();
            let se = mc.mc_standard_errors.unwrap();
            assert!((cf.power - mc.power).abs() <= 4.0 * se.power);
            assert!((cf.type_s - mc.type_s).abs() <= 4.0 * se.type_s.max(1e-6));
            let (a, b) = (cf.exaggeration.ratio().unwrap(), mc.exaggeration.ratio().unwrap());
            assert!((a - b).abs() <= 4.0 * se.exaggeration.unwrap());
        }
    }

    #[test]
    fn one_sided_is_directed_at_the_effect() {
        let up = diagnostics_fixed(0.1, 0.05, 0.05, Sides::OneSided).unwrap();
        let down = diagnostics_fixed(-0.1, 0.05, 0.05, Sides::OneSided).unwrap();
        assert!((up.power - down.power).abs() < 1e-15);
        assert_eq!(up.type_s, 0.0);
        let expected = normal::cdf(2.0 - normal::quantile(0.95));
        assert!((up.power - expected).abs() < 1e-15);
        let mc = diagnostics_fixed_mc(-0.1, 0.05, 0.05, Sides::OneSided, 400_000, 5).unwrap();
        assert!((mc.power - down.power).abs() < 4.0 * mc.mc_standard_errors.unwrap().power);
        assert_eq!(mc.type_s, 0.0);
    }

    #[test]
    fn mixture_point_mass_reduces_to_fixed() {
        let d = EffectDistribution::point_mass(0.1).unwrap();
        let mc = diagnostics_mixture(&d, 0.05, 0.05, TWO, 1_000_000, 3).unwrap();
        let cf = diagnostics_fixed(0.1, 0.05, 0.05, TWO).unwrap();
        let se = mc.mc_standard_errors.unwrap();
        assert!((cf.power - mc.power).abs() <= 3.0 * se.power);
        assert!((cf.type_s - mc.type_s).abs() <= 3.0 * se.type_s);
        let (a, b) = (cf.exaggeration.ratio().unwrap(), mc.exaggeration.ratio().unwrap());
        assert!((a - b).abs() <= 3.0 * se.exaggeration.unwrap());
    }

    #[test]
    fn mixture_is_deterministic_given_seed() {
        let d = with_null_mass(EffectComponent::normal(0.1, 0.1).unwrap(), 0.5).unwrap();
        let a = diagnostics_mixture(&d, 0.04, 0.05, TWO, 100_000, 42).unwrap();
        let b = diagnostics_mixture(&d, 0.04, 0.05, TWO, 100_000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn zero_mean_mixture_reports_median() {
        let d = EffectDistribution::new(vec![
            (0.5, EffectComponent::point_mass(0.2)),
            (0.5, EffectComponent::point_mass(-0.2)),
        ])
        .unwrap();
        let out = diagnostics_mixture(&d, 0.1, 0.05, TWO, 50_000, 1).unwrap();
        assert_eq!(out.exaggeration, Exaggeration::Undefined);
        assert!(out.median_abs_significant.unwrap() > 0.196);
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn diagnostics_json_echoes_inputs() {
        let d = diagnostics_fixed(0.0, 0.1, 0.05, TWO).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["exaggeration"], "undefined");
        assert_eq!(v["effect"], 0.0);
        assert_eq!(v["method"]["kind"], "closed_form");
        let back: DesignDiagnostics = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
        let m = diagnostics_fixed_mc(0.1, 0.1, 0.05, TWO, 10_000, 8).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["method"]["seed"], 8);
        assert_eq!(v["method"]["draws"], 10_000);
    }

    proptest! {
        #[test]
        fn null_power_equals_alpha(se in 1e-3f64..10.0, alpha in 0.001f64..0.5) {
            let p = power_fixed(0.0, se, alpha, TWO).unwrap();
            prop_assert!((p - alpha).abs() < 1e-9);
        }

        #[test]
        fn power_monotone(e in 0.0f64..5.0, de in 1e-3f64..1.0, se in 0.1f64..2.0, dse in 1e-3f64..1.0) {
            let p = power_fixed(e, se, 0.05, TWO).unwrap();
            prop_assert!(power_fixed(e + de, se, 0.05, TWO).unwrap() > p || p == 1.0);
            prop_assert!(power_fixed(-(e + de), se, 0.05, TWO).unwrap() > p || p == 1.0);
            prop_assert!(power_fixed(e, se + dse, 0.05, TWO).unwrap() < p || e == 0.0 || p == 1.0);
        }

        #[test]
        fn sign_and_magnitude_bounds(l in 1e-3f64..6.0, dl in 1e-3f64..1.0) {
            let a = diagnostics_fixed(l, 1.0, 0.05, TWO).unwrap();
            let b = diagnostics_fixed(l + dl, 1.0, 0.05, TWO).unwrap();
            prop_assert!(a.type_s <= 0.5 && a.type_s >= 0.0);
            prop_assert!(b.type_s <= a.type_s + 1e-15);
            let (ea, eb) = (a.exaggeration.ratio().unwrap(), b.exaggeration.ratio().unwrap());
            prop_assert!(ea >= 1.0 && eb >= 1.0);
            prop_assert!(eb <= ea + 1e-12);
        }
    }

    #[test]
    fn type_s_approaches_half_near_zero() {
        let d = diagnostics_fixed(1e-6, 1.0, 0.05, TWO).unwrap();
        assert!((d.type_s - 0.5).abs() < 1e-5);
    }
}
