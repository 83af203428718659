//! Log-gamma via the Lanczos approximation (g = 7, nine coefficients).
//!
//! Relative error is below 1e-14 for positive arguments; on [0.1, 100] the
//! absolute error is below 1e-12. Arguments below 0.5 go through the
//! reflection formula.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)|. Returns +inf at the poles (x = 0, -1, -2, ...).
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Log of the rising factorial x (x+1) ... (x+count-1); zero for `count == 0`.
pub fn ln_rising_factorial(x: f64, count: u32) -> f64 {
    (0..count).map(|l| (x + l as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u32) -> f64 {
        (1..=n).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn integers_match_factorials() {
        for n in 1..60u32 {
            let expected = ln_factorial(n - 1);
            assert!((ln_gamma(n as f64) - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn half_integers() {
        // Γ(1/2) = √π, Γ(3/2) = √π / 2
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((ln_gamma(1.5) - (0.5 * PI.ln() - 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn recurrence_holds_on_small_arguments() {
        let mut x = 0.1;
        while x < 5.0 {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-12, "x = {x}");
            x += 0.037;
        }
    }

    #[test]
    fn poles() {
        assert!(ln_gamma(0.0).is_infinite());
        assert!(ln_gamma(-3.0).is_infinite());
    }

    #[test]
    fn rising_factorial_empty_product() {
        assert_eq!(ln_rising_factorial(0.3, 0), 0.0);
        assert!((ln_rising_factorial(0.5, 3) - (0.5f64 * 1.5 * 2.5).ln()).abs() < 1e-15);
    }
}
