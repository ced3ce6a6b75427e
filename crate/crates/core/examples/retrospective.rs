//! Checking a published estimate against a hypothesis about true effects.

use effect_design::effect_model::{EffectComponent, EffectDistribution};
use effect_design::scenario_bench::retrospective_plausibility;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // most people unaffected, a few moved a little either way
    let hypothesized = EffectDistribution::new(vec![
        (0.8, EffectComponent::point_mass(0.0)),
        (0.1, EffectComponent::normal(0.3, 0.2)?),
        (0.1, EffectComponent::normal(-0.3, 0.2)?),
    ])?;
    let r = retrospective_plausibility(1.1, 0.5, &hypothesized, 0.05, 1_000_000, 77)?;
    println!("claimed {} (se {}) against {}", r.claimed_effect, r.claimed_se, r.hypothesized);
    println!("implied power {:.4}", r.implied_power);
    println!("implied type S {:.4}", r.implied_type_s);
    match r.diagnostics.median_abs_significant {
        Some(m) => println!("exaggeration undefined; median |significant estimate| {m:.3}"),
        None => println!("exaggeration {}", r.implied_exaggeration),
    }
    println!();
    println!("to average {}, the affected units would need:", r.claimed_effect);
    print!("{}", r.decomposition_table());
    Ok(())
}
