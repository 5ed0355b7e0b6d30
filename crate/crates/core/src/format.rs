// SPDX-License-Identifier: Apache-2.0

//! Number formatting shared by the text emitters.

/// Formats `x` with three significant digits.
///
/// Magnitudes in `[1e-3, 1e4)` print as plain decimals (`0.227`, `16.4`,
/// `125`); anything else prints in scientific form (`1.18e4`, `1.00e6`).
/// Zero prints as `0`. The output depends only on the value, so emitted
/// tables are byte-stable.
pub fn sig3(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded = round_sig(x, 3);
    let mag = rounded.abs();
    if (1e-3..1e4).contains(&mag) {
        let exp = mag.log10().floor() as i32;
        let decimals = (2 - exp).max(0) as usize;
        format!("{rounded:.decimals$}")
    } else {
        format!("{x:.2e}")
    }
}

fn round_sig(x: f64, digits: i32) -> f64 {
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - exp);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(sig3(0.0), "0");
        assert_eq!(sig3(0.22727), "0.227");
        assert_eq!(sig3(16.3636), "16.4");
        assert_eq!(sig3(125.0), "125");
        assert_eq!(sig3(2.0833), "2.08");
        assert_eq!(sig3(999.6), "1000");
        assert_eq!(sig3(11815.0), "1.18e4");
        assert_eq!(sig3(1.0e6), "1.00e6");
        assert_eq!(sig3(-5.06), "-5.06");
        assert_eq!(sig3(0.0702), "0.0702");
    }
}
