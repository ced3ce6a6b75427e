//! A plausible range (0, X) and a share of units the treatment cannot reach.
//! Half the range times the reachable share is the implied average effect.

use effect_design::effect_model::{
    from_plausible_range, heuristic_ate, with_null_mass, PlausibleRange,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = 0.2;
    println!("range (0, {x})");
    println!("{:>6}  {:>10}  {:>10}", "p_null", "heuristic", "mixture");
    for p_null in [0.0, 0.5, 0.75, 0.9, 1.0] {
        let dist = with_null_mass(from_plausible_range(PlausibleRange::up_to(x)?), p_null)?;
        println!(
            "{p_null:>6}  {:>10.5}  {:>10.5}",
            heuristic_ate(x, p_null)?,
            dist.mean()
        );
    }
    Ok(())
}
