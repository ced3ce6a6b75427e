pub mod cli;
pub mod design_metrics;
pub mod elicitation;
pub mod effect_model;
pub mod normal;
pub mod scenario_bench;
pub mod service_api;
