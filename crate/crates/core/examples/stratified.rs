//! An effect that varies with a covariate, averaged over the population and
//! over an unrepresentative sample.

use effect_design::effect_model::{stratified_ate, StratifiedEffectCurve, Stratum, Weighting};

fn stratum(label: &str, effect: f64, population_share: f64, sample_share: f64) -> Stratum {
    Stratum {
        label: label.into(),
        effect,
        population_share,
        sample_share,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let curve = StratifiedEffectCurve::new(vec![
        stratum("small tumors", 0.05, 0.5, 0.2),
        stratum("medium tumors", 0.2, 0.3, 0.3),
        stratum("large tumors", 0.5, 0.2, 0.5),
    ])?;
    for s in curve.strata() {
        println!("{:<14} effect {:.2}  population {:.2}  sample {:.2}", s.label, s.effect, s.population_share, s.sample_share);
    }
    println!("population average {:.4}", stratified_ate(&curve, Weighting::Population));
    println!("sample average     {:.4}", stratified_ate(&curve, Weighting::Sample));
    Ok(())
}
