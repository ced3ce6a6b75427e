//! Most units are out of reach; among the rest, effects go both ways.

use effect_design::effect_model::{dilute, EffectComponent, EffectDistribution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reachable = EffectDistribution::single(EffectComponent::discrete(
        vec![0.0, 1.0, -1.0],
        vec![0.5, 0.4, 0.1],
    )?)?;
    let everyone = dilute(&reachable, 2.0 / 3.0)?;
    println!("reachable units: {reachable}");
    println!("  mean {:.4}", reachable.mean());
    println!("everyone:        {everyone}");
    println!("  mean {:.4}, variance {:.4}", everyone.mean(), everyone.variance());
    Ok(())
}
