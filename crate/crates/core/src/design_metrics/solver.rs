use serde::{Deserialize, Serialize};

use super::diagnostics::{power_fixed, z_crit};
use super::{check_alpha, DesignError, OutcomeModel, Result, Sides};

/// Largest per-arm size the solver will consider.
const MAX_N: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n_treat: u64,
    pub n_control: u64,
    pub achieved_power: f64,
}

impl SampleSize {
    pub fn total(&self) -> u64 {
        self.n_treat + self.n_control
    }

    /// Ratio of total sample sizes, `self / baseline`.
    pub fn ratio_to(&self, baseline: &SampleSize) -> f64 {
        self.total() as f64 / baseline.total() as f64
    }
}

/// Smallest per-arm sizes reaching `target_power` for a fixed effect.
///
/// `allocation` is the control-to-treatment ratio; the control arm gets
/// `ceil(allocation * n_treat)` (at least 2). Power is monotone in `n_treat`,
/// so the search doubles to bracket the target and then bisects.
pub fn required_n(
    effect: f64,
    outcome: OutcomeModel,
    alpha: f64,
    sides: Sides,
    target_power: f64,
    allocation: f64,
) -> Result<SampleSize> {
    check_alpha(alpha)?;
    if !effect.is_finite() {
        return Err(DesignError::NonFinite("effect"));
    }
    if effect == 0.0 {
        return Err(DesignError::ZeroEffect);
    }
    if !(target_power > alpha && target_power < 1.0) {
        return Err(DesignError::InvalidTargetPower {
            target: target_power,
            alpha,
        });
    }
    if !(allocation.is_finite() && allocation > 0.0) {
        return Err(DesignError::InvalidAllocation(allocation));
    }
    z_crit(alpha, sides)?;

    let control = |n: u64| ((allocation * n as f64).ceil() as u64).max(2);
    let power = |n: u64| -> Result<f64> {
        let se = outcome.standard_error(effect, n as usize, control(n) as usize)?;
        power_fixed(effect, se, alpha, sides)
    };

    let mut lo = 2u64;
    if power(lo)? >= target_power {
        return finish(lo, control(lo), power(lo)?);
    }
    let mut hi = 4u64;
    while power(hi)? < target_power {
        lo = hi;
        hi *= 2;
        if hi > MAX_N {
            return Err(DesignError::Unreachable(MAX_N));
        }
    }
    // invariant: power(lo) < target <= power(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if power(mid)? >= target_power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    finish(hi, control(hi), power(hi)?)
}

/// Effect-to-standard-error ratio at which power reaches `target_power`.
pub fn ratio_for_power(target_power: f64, alpha: f64, sides: Sides) -> Result<f64> {
    check_alpha(alpha)?;
    if !(target_power > alpha && target_power < 1.0) {
        return Err(DesignError::InvalidTargetPower {
            target: target_power,
            alpha,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while power_fixed(hi, 1.0, alpha, sides)? < target_power {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power_fixed(mid, 1.0, alpha, sides)? < target_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn finish(n_treat: u64, n_control: u64, achieved_power: f64) -> Result<SampleSize> {
    Ok(SampleSize {
        n_treat,
        n_control,
        achieved_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_metrics::se_conservative_binary;

    const CONS: OutcomeModel = OutcomeModel::BinaryConservative;
    const TWO: Sides = Sides::TwoSided;

    fn brute_force(effect: f64, outcome: OutcomeModel, target: f64, allocation: f64) -> u64 {
        (2u64..)
            .find(|&n| {
                let c = ((allocation * n as f64).ceil() as u64).max(2);
                let se = outcome.standard_error(effect, n as usize, c as usize).unwrap();
                power_fixed(effect, se, 0.05, TWO).unwrap() >= target
            })
            .unwrap()
    }

    #[test]
    fn matches_linear_scan() {
        for (effect, outcome, alloc) in [
            (0.25, CONS, 1.0),
            (0.1, OutcomeModel::Continuous { sd: 0.5 }, 1.0),
            (0.05, OutcomeModel::BinaryBaseRate { base_rate: 0.3 }, 1.5),
            (-0.2, CONS, 0.5),
        ] {
            let n = required_n(effect, outcome, 0.05, TWO, 0.8, alloc).unwrap();
            assert_eq!(n.n_treat, brute_force(effect, outcome, 0.8, alloc));
            assert!(n.achieved_power >= 0.8);
        }
    }

    #[test]
    fn trial_of_126_is_enough() {
        let n = required_n(0.25, CONS, 0.05, TWO, 0.8, 1.0).unwrap();
        assert!(n.n_treat <= 63);
        assert_eq!(n.n_treat, 63);
        assert_eq!(n.total(), 126);
        let se = se_conservative_binary(62, 62).unwrap();
        assert!(power_fixed(0.25, se, 0.05, TWO).unwrap() < 0.8);
    }

    #[test]
    fn sixteenfold_for_quarter_effect() {
        let big = required_n(0.04, CONS, 0.05, TWO, 0.8, 1.0).unwrap();
        let small = required_n(0.01, CONS, 0.05, TWO, 0.8, 1.0).unwrap();
        let r = small.ratio_to(&big);
        assert!((r / 16.0 - 1.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn allocation_rounds_up() {
        let n = required_n(0.1, OutcomeModel::Continuous { sd: 1.0 }, 0.05, TWO, 0.8, 1.5).unwrap();
        assert_eq!(n.n_control, (1.5 * n.n_treat as f64).ceil() as u64);
    }

    #[test]
    fn quadratic_scaling_continuous() {
        let sd = OutcomeModel::Continuous { sd: 1.0 };
        let base = required_n(0.3, sd, 0.05, TWO, 0.8, 1.0).unwrap();
        for k in [2.0, 4.0] {
            let n = required_n(0.3 / k, sd, 0.05, TWO, 0.8, 1.0).unwrap();
            let r = n.ratio_to(&base);
            assert!(r >= k * k * 0.97 && r <= k * k * 1.03, "k={k}: {r}");
        }
    }

    #[test]
    fn crossing_ratio() {
        let r = ratio_for_power(0.8, 0.05, TWO).unwrap();
        assert!((r - 2.801_58).abs() < 1e-4, "{r}");
        assert!(power_fixed(r, 1.0, 0.05, TWO).unwrap() >= 0.8);
        // one-sided: z_0.95 + z_0.8
        let r1 = ratio_for_power(0.8, 0.05, Sides::OneSided).unwrap();
        assert!((r1 - (1.644_853_626_951_472_7 + 0.841_621_233_572_914_2)).abs() < 1e-12);
        assert!(ratio_for_power(0.01, 0.05, TWO).is_err());
    }

    #[test]
    fn errors() {
        assert_eq!(
            required_n(0.0, CONS, 0.05, TWO, 0.8, 1.0),
            Err(DesignError::ZeroEffect)
        );
        assert!(matches!(
            required_n(0.1, CONS, 0.05, TWO, 0.05, 1.0),
            Err(DesignError::InvalidTargetPower { .. })
        ));
        assert!(matches!(
            required_n(0.1, CONS, 0.05, TWO, 0.01, 1.0),
            Err(DesignError::InvalidTargetPower { .. })
        ));
        assert!(required_n(0.1, CONS, 0.05, TWO, 1.0, 1.0).is_err());
        assert!(required_n(0.1, CONS, 0.05, TWO, 0.8, 0.0).is_err());
        assert!(matches!(
            required_n(0.5, OutcomeModel::BinaryBaseRate { base_rate: 0.8 }, 0.05, TWO, 0.8, 1.0),
            Err(DesignError::RateOutOfRange { .. })
        ));
    }

    #[test]
    fn huge_effects_need_the_minimum() {
        let n = required_n(10.0, CONS, 0.05, TWO, 0.8, 1.0).unwrap();
        assert_eq!((n.n_treat, n.n_control), (2, 2));
    }
}
