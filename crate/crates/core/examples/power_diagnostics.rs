//! Power, sign errors and exaggeration for a fixed effect and for a spread
//! of effects, plus the sample size a target power needs.

use effect_design::design_metrics::{
    diagnostics_fixed, diagnostics_mixture, ratio_for_power, required_n, se_conservative_binary,
    OutcomeModel, Sides,
};
use effect_design::effect_model::{EffectComponent, EffectDistribution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let se = se_conservative_binary(63, 63)?;
    println!("63 per arm, binary outcome: se {se:.4}");
    println!("{:>7}  {:>7}  {:>9}  {:>12}", "effect", "power", "type S", "exaggeration");
    for effect in [0.05, 0.1, 0.25, 0.4] {
        let d = diagnostics_fixed(effect, se, 0.05, Sides::TwoSided)?;
        println!(
            "{effect:>7}  {:>7.3}  {:>9.2e}  {:>12.3}",
            d.power,
            d.type_s,
            d.exaggeration.ratio().unwrap_or(f64::NAN)
        );
    }
    println!(
        "80% power needs effect/se >= {:.3}",
        ratio_for_power(0.8, 0.05, Sides::TwoSided)?
    );

    let spread = EffectDistribution::new(vec![
        (0.5, EffectComponent::point_mass(0.0)),
        (0.5, EffectComponent::normal(0.1, 0.1)?),
    ])?;
    let d = diagnostics_mixture(&spread, se, 0.05, Sides::TwoSided, 1_000_000, 1)?;
    println!(
        "effects {spread}: power {:.3}, type S {:.3}, exaggeration {}",
        d.power, d.type_s, d.exaggeration
    );

    let n = required_n(0.1, OutcomeModel::BinaryConservative, 0.05, Sides::TwoSided, 0.8, 1.0)?;
    println!("effect 0.1 at 80%: {} per arm ({} total)", n.n_treat, n.total());
    Ok(())
}
