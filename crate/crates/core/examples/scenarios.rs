//! Runs every built-in scenario and prints the checks.

use effect_design::scenario_bench::{run_all, summary_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = run_all()?;
    print!("{}", summary_table(&runs));
    if let Some(first) = runs.first() {
        println!();
        print!("{}", first.table());
    }
    Ok(())
}
