//! Complex Gamma and upper incomplete Gamma functions.

use crate::C64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `Γ(z)` by the Lanczos approximation with reflection for `Re z < 1/2`.
pub fn gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return C64::new(PI, 0.0) / (s * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Upper incomplete Gamma `Γ(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt` for complex `s`, real `x > 0`.
///
/// Series for `γ(s, x)` when `x < |s| + 4`, Lentz continued fraction beyond.
pub fn gamma_upper(s: C64, x: f64) -> C64 {
    assert!(x > 0.0, "gamma_upper needs x > 0");
    if s.norm() < 1e-12 && x < 4.0 {
        return C64::new(exp_integral_e1(x), 0.0);
    }
    if x < s.norm() + 4.0 {
        gamma(s) - gamma_lower_series(s, x)
    } else {
        gamma_upper_cf(s, x)
    }
}

/// `E_1(x) = Γ(0, x)` by its power series (small `x` only).
fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -x / k as f64;
        sum += term / k as f64;
        if term.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn gamma_lower_series(s: C64, x: f64) -> C64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    for k in 1..1000 {
        term *= x / (s + k as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (s * x.ln() - x).exp()
}

fn gamma_upper_cf(s: C64, x: f64) -> C64 {
    const TINY: f64 = 1e-300;
    let mut b = C64::new(x + 1.0, 0.0) - s;
    let mut c = C64::new(1.0 / TINY, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (C64::new(i as f64, 0.0) - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = C64::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = C64::new(TINY, 0.0);
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (s * x.ln() - x).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known() {
        assert!((gamma(C64::new(5.0, 0.0)) - 24.0).norm() < 1e-12);
        assert!((gamma(C64::new(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-14);
        // Γ(4+10i)
        let g = gamma(C64::new(4.0, 10.0));
        assert!((g - C64::new(0.000_771_534_294_239_966_2, -0.001_019_082_799_041_7)).norm() < 1e-15);
    }

    #[test]
    fn incomplete_at_s_one() {
        for &x in &[0.1, 1.0, 4.9, 5.1, 30.0] {
            let v = gamma_upper(C64::new(1.0, 0.0), x);
            assert!((v.re - (-x).exp()).abs() < 1e-15 * (1.0 + (-x).exp()) && v.im.abs() < 1e-16);
        }
    }

    #[test]
    fn exponential_integral() {
        for &(x, e1) in &[(0.1, 1.822_923_958_419_390_7), (1.0, 0.219_383_934_395_520_27), (5.0, 1.148_295_591_275_325_5e-3)] {
            let v = gamma_upper(C64::new(0.0, 0.0), x);
            assert!((v.re - e1).abs() < 1e-14 * e1.max(1.0), "{x}: {v}");
        }
    }
}
