//! Binary outcomes through four response types. The same treatment gives a
//! large average effect on a screened population and a small one on everyone.

use effect_design::effect_model::{binary_to_distribution, binary_type_ate, BinaryTypeModel};

fn show(label: &str, m: &BinaryTypeModel) {
    let r = binary_type_ate(m);
    println!(
        "{label:<12} treated {:.2}  control {:.2}  ATE {:.2}  as mixture {}",
        r.treat_rate,
        r.control_rate,
        r.ate,
        binary_to_distribution(m)
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("screened", &BinaryTypeModel::new(0.30, 0.65, 0.0, 0.05)?);
    show("everyone", &BinaryTypeModel::new(0.60, 0.20, 0.0, 0.20)?);
    // a treatment that helps some and hurts others
    show("mixed", &BinaryTypeModel::from_counts(200, 350, 100, 350)?);
    Ok(())
}
