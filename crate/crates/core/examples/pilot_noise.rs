//! How little a small pilot says about the effect, and what planning on its
//! estimate does to the sample size.

use effect_design::design_metrics::{pilot_report, PilotResult};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = pilot_report(&PilotResult::new(94, 100, 90, 100)?, 0.05)?;
    println!(
        "estimate {:.3}, se {:.4}, 95% interval ({:.3}, {:.3})",
        r.estimate, r.se, r.interval_lo, r.interval_hi
    );
    if let Some(n) = r.baseline_n_per_arm {
        println!("planning on the estimate: {n} per arm for 80% power");
    }
    println!("{:>8}  {:>9}  {:>10}", "truth", "per arm", "multiplier");
    for m in &r.n_multipliers {
        println!("{:>8.3}  {:>9}  {:>10.2}", m.assumed_effect, m.n_per_arm, m.multiplier);
    }
    Ok(())
}
