pub mod detect;
pub mod evaluate;
pub mod features;
pub mod regress;
pub mod synth;
pub mod tune;

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}
