pub mod algolang;
pub mod analytics;
pub mod dataset;
pub mod instruments;
pub mod models;
pub mod synth;

/// Twelve-question example bank shipped with the crate.
pub const SAMPLE_BANK: &str = include_str!("../assets/sample_bank.txt");
