use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0`.
///
/// Lanczos approximation (g = 7, nine terms) for `x >= 0.5`, reflection below.
pub fn lgamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            op: "lgamma",
            detail: format!("x must be finite and > 0, got {x}"),
        });
    }
    Ok(lgamma_positive(x))
}

fn lgamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - lgamma_positive(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u32) -> f64 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    }

    // Γ(n + 1/2) = (2n)! / (4^n n!) √π
    fn ln_gamma_half_integer(n: u32) -> f64 {
        ln_factorial(2 * n) - (n as f64) * 4f64.ln() - ln_factorial(n)
            + 0.5 * std::f64::consts::PI.ln()
    }

    #[test]
    fn unit_points_are_zero() {
        assert_eq!(lgamma(1.0).unwrap(), 0.0);
        assert_eq!(lgamma(2.0).unwrap(), 0.0);
    }

    #[test]
    fn three_and_a_half() {
        let expected = (15.0 / 8.0 * std::f64::consts::PI.sqrt()).ln();
        let got = lgamma(3.5).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn relative_accuracy_on_integers_and_half_integers() {
        for n in 3..=50u32 {
            let expected = ln_factorial(n - 1);
            let got = lgamma(n as f64).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-12, "x={n}: {got} vs {expected}");
        }
        for n in 0..=49u32 {
            let expected = ln_gamma_half_integer(n);
            let got = lgamma(n as f64 + 0.5).unwrap();
            if n == 1 {
                // lnΓ(1.5) ≈ −0.12, compare absolutely as well
                assert!((got - expected).abs() < 1e-14);
            }
            assert!(((got - expected) / expected).abs() < 1e-12, "x={}: {got} vs {expected}", n as f64 + 0.5);
        }
    }

    #[test]
    fn recurrence_holds_off_grid() {
        // lnΓ(x+1) = lnΓ(x) + ln x
        let mut x = 0.5;
        while x < 49.0 {
            let lhs = lgamma(x + 1.0).unwrap();
            let rhs = lgamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(matches!(lgamma(0.0), Err(Error::Domain { .. })));
        assert!(lgamma(-1.5).is_err());
        assert!(lgamma(f64::NAN).is_err());
    }

    #[test]
    fn small_arguments_use_reflection() {
        // Γ(1/2) = √π
        let got = lgamma(0.5).unwrap();
        assert!((got - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        // Γ(0.25) ≈ 3.625609908221908
        let got = lgamma(0.25).unwrap();
        assert!((got - 3.625_609_908_221_908_f64.ln()).abs() < 1e-13);
    }
}
