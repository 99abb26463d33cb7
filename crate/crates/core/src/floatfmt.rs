//! Decimal float formatting shared by every CSV emitter.

/// 17 significant digits in scientific notation; enough to round-trip any
/// finite `f64` exactly.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::float17;

    #[test]
    fn round_trips_awkward_values() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 2.5e300, 0.0, -0.0, 123456.789] {
            let s = float17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }
}
