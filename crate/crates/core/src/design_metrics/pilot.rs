use serde::{Deserialize, Serialize};

use super::diagnostics::z_crit;
use super::solver::required_n;
use super::{se_two_proportion, DesignError, OutcomeModel, Result, Sides};

/// Power targeted when tabulating sample-size multipliers.
const MULTIPLIER_TARGET_POWER: f64 = 0.8;

/// Observed successes per arm from a small pilot study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotResult {
    pub successes_treat: u64,
    pub n_treat: u64,
    pub successes_control: u64,
    pub n_control: u64,
}

impl PilotResult {
    pub fn new(successes_treat: u64, n_treat: u64, successes_control: u64, n_control: u64) -> Result<Self> {
        let p = PilotResult {
            successes_treat,
            n_treat,
            successes_control,
            n_control,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (arm, s, n) in [
            ("treatment", self.successes_treat, self.n_treat),
            ("control", self.successes_control, self.n_control),
        ] {
            if n == 0 || s > n {
                return Err(DesignError::InvalidPilot {
                    arm,
                    successes: s,
                    n,
                });
            }
        }
        Ok(())
    }
}

/// Required sample size if the true effect were `assumed_effect`, relative
/// to the size computed from the pilot estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NMultiplier {
    pub assumed_effect: f64,
    pub n_per_arm: u64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotReport {
    pub pilot: PilotResult,
    pub alpha: f64,
    pub estimate: f64,
    pub se: f64,
    pub z_crit: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    /// Per-arm size that powers the study at 80% if the pilot estimate were the truth.
    pub baseline_n_per_arm: Option<u64>,
    /// Empty when the estimate is exactly zero.
    pub n_multipliers: Vec<NMultiplier>,
}

/// Pilot summary with multipliers tabulated over a grid spanning the interval.
pub fn pilot_report(pilot: &PilotResult, alpha: f64) -> Result<PilotReport> {
    let base = summarize(pilot, alpha)?;
    let grid = candidate_grid(base.interval_lo, base.interval_hi);
    finish(base, &grid)
}

/// Pilot summary with multipliers for the given candidate true effects.
pub fn pilot_report_with(pilot: &PilotResult, alpha: f64, candidates: &[f64]) -> Result<PilotReport> {
    let base = summarize(pilot, alpha)?;
    finish(base, candidates)
}

fn summarize(pilot: &PilotResult, alpha: f64) -> Result<PilotReport> {
    pilot.validate()?;
    let pt = pilot.successes_treat as f64 / pilot.n_treat as f64;
    let pc = pilot.successes_control as f64 / pilot.n_control as f64;
    let estimate = pt - pc;
    let se = se_two_proportion(pt, pc, pilot.n_treat as usize, pilot.n_control as usize)?;
    let z = z_crit(alpha, Sides::TwoSided)?;
    let half = z * se;
    Ok(PilotReport {
        pilot: *pilot,
        alpha,
        estimate,
        se,
        z_crit: z,
        interval_lo: estimate - half,
        interval_hi: estimate + half,
        baseline_n_per_arm: None,
        n_multipliers: Vec::new(),
    })
}

fn finish(mut report: PilotReport, candidates: &[f64]) -> Result<PilotReport> {
    if report.estimate == 0.0 {
        return Ok(report);
    }
    let solve = |effect: f64| {
        required_n(
            effect,
            OutcomeModel::BinaryConservative,
            report.alpha,
            Sides::TwoSided,
            MULTIPLIER_TARGET_POWER,
            1.0,
        )
    };
    let baseline = solve(report.estimate)?;
    report.baseline_n_per_arm = Some(baseline.n_treat);
    report.n_multipliers = candidates
        .iter()
        .filter(|c| **c != 0.0)
        .map(|&c| {
            let n = solve(c)?;
            Ok(NMultiplier {
                assumed_effect: c,
                n_per_arm: n.n_treat,
                multiplier: n.ratio_to(&baseline),
            })
        })
        .collect::<Result<_>>()?;
    Ok(report)
}

/// Round-numbered grid over `[lo, hi]` with a step of 1, 2 or 5 times a
/// power of ten, about ten points, zero excluded.
fn candidate_grid(lo: f64, hi: f64) -> Vec<f64> {
    let width = hi - lo;
    if !(width.is_finite() && width > 0.0) {
        return Vec::new();
    }
    let raw = width / 10.0;
    let exp = raw.log10().floor() as i32;
    let mantissa = [5.0, 2.0, 1.0]
        .into_iter()
        .find(|m| m * 10f64.powi(exp) <= raw)
        .unwrap_or(1.0);
    // value = k * mantissa / scale keeps grid points exactly rounded
    let scale = 10f64.powi(-exp);
    let step = mantissa / scale;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .filter(|k| *k != 0)
        .map(|k| k as f64 * mantissa / scale)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surgery_pilot() {
        let pilot = PilotResult::new(94, 100, 90, 100).unwrap();
        let r = pilot_report(&pilot, 0.05).unwrap();
        assert!((r.estimate - 0.04).abs() < 1e-12);
        assert!((r.se - 0.0383).abs() < 5e-5);
        assert!(r.interval_lo > -0.045 && r.interval_lo < -0.03);
        assert!(r.interval_hi < 0.125 && r.interval_hi > 0.11);
        let m = r
            .n_multipliers
            .iter()
            .find(|m| m.assumed_effect == 0.01)
            .expect("grid includes 0.01");
        assert!((m.multiplier / 16.0 - 1.0).abs() < 0.02, "{}", m.multiplier);
    }

    #[test]
    fn interval_is_centered() {
        let pilot = PilotResult::new(50, 100, 50, 100).unwrap();
        let r = pilot_report(&pilot, 0.05).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.interval_lo, -r.interval_hi);
        assert!(r.n_multipliers.is_empty());
        assert_eq!(r.baseline_n_per_arm, None);

        let r = pilot_report(&PilotResult::new(30, 40, 12, 35).unwrap(), 0.1).unwrap();
        let half = r.z_crit * r.se;
        assert!(((r.interval_hi - r.estimate) - half).abs() <= 4.0 * f64::EPSILON);
        assert!(((r.estimate - r.interval_lo) - half).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(r.interval_hi + r.interval_lo, 2.0 * r.estimate);
    }

    #[test]
    fn explicit_candidates() {
        let pilot = PilotResult::new(94, 100, 90, 100).unwrap();
        let r = pilot_report_with(&pilot, 0.05, &[0.04, 0.02, 0.0]).unwrap();
        assert_eq!(r.n_multipliers.len(), 2);
        assert_eq!(r.n_multipliers[0].multiplier, 1.0);
        assert!((r.n_multipliers[1].multiplier - 4.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_pilots() {
        assert!(PilotResult::new(5, 0, 1, 10).is_err());
        assert!(PilotResult::new(11, 10, 1, 10).is_err());
        let raw = PilotResult {
            successes_treat: 1,
            n_treat: 10,
            successes_control: 0,
            n_control: 0,
        };
        assert!(matches!(
            pilot_report(&raw, 0.05),
            Err(DesignError::InvalidPilot { arm: "control", .. })
        ));
    }

    #[test]
    fn grid_shape() {
        let g = candidate_grid(-0.035, 0.115);
        assert_eq!(g.first(), Some(&-0.03));
        assert_eq!(g.last(), Some(&0.11));
        assert!(g.contains(&0.01) && g.contains(&0.04) && !g.contains(&0.0));
        assert_eq!(candidate_grid(0.0, 0.0), Vec::<f64>::new());
    }
}
