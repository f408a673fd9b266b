//! The smoothing kernel `V(y) = (1/2πi) ∫_{(σ)} y^u G(u) Γ(u) du`.

use crate::special::gamma;
use crate::C64;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelShape {
    /// `G(u) = exp(u²)`.
    Gaussian,
    /// `G(u) = 1`, for which `V(y) = exp(−1/y)`.
    Unit,
}

#[derive(Clone, Debug)]
pub struct SmoothingKernel {
    pub shape: KernelShape,
    pub sigma: f64,
    pub t_max: f64,
    pub h: f64,
    table: Option<Arc<HermiteTable>>,
}

/// Quintic Hermite table of `V`, `V'`, `V''` in `t = ln y`.
#[derive(Debug)]
struct HermiteTable {
    t0: f64,
    step: f64,
    v: Vec<[f64; 3]>,
}

impl HermiteTable {
    fn eval(&self, t: f64) -> Option<f64> {
        let x = (t - self.t0) / self.step;
        if x < 0.0 || x >= (self.v.len() - 1) as f64 {
            return None;
        }
        let i = x as usize;
        let u = x - i as f64;
        let h = self.step;
        let [f0, d0, s0] = self.v[i];
        let [f1, d1, s1] = self.v[i + 1];
        let (d0, d1, s0, s1) = (d0 * h, d1 * h, s0 * h * h, s1 * h * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u3 * u;
        let u5 = u4 * u;
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h3 = 0.5 * (u3 - 2.0 * u4 + u5);
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        Some(f0 * h0 + d0 * h1 + s0 * h2 + s1 * h3 + d1 * h4 + f1 * h5)
    }
}

const TABLE_LOG_LO: f64 = -18.0;
const TABLE_LOG_HI: f64 = 12.0;
const TABLE_STEP: f64 = 1.0 / 64.0;

impl SmoothingKernel {
    /// `G(u) = exp(u²)` on `Re u = 2`, `|Im u| ≤ 8`, step `0.05`.
    pub fn gaussian() -> Self {
        let mut k = SmoothingKernel { shape: KernelShape::Gaussian, sigma: 2.0, t_max: 8.0, h: 0.05, table: None };
        k.table = Some(Arc::new(k.build_table()));
        k
    }

    pub fn unit() -> Self {
        SmoothingKernel { shape: KernelShape::Unit, sigma: 2.0, t_max: 30.0, h: 0.05, table: None }
    }

    /// Same shape with explicit quadrature parameters and no lookup table.
    pub fn with_params(shape: KernelShape, sigma: f64, t_max: f64, h: f64) -> Self {
        SmoothingKernel { shape, sigma, t_max, h, table: None }
    }

    pub fn g(&self, u: C64) -> C64 {
        match self.shape {
            KernelShape::Gaussian => (u * u).exp(),
            KernelShape::Unit => C64::new(1.0, 0.0),
        }
    }

    /// `(1/2π) ∫ u^j y^u G(u) Γ(u) dt` on `Re u = σ` by the trapezoid rule, for `j = 0, 1, 2`.
    fn line_moments(&self, y: f64, sigma: f64, h: f64) -> [C64; 3] {
        let ly = y.ln();
        let n = (self.t_max / h).round() as i64;
        let mut acc = [C64::new(0.0, 0.0); 3];
        for j in -n..=n {
            let u = C64::new(sigma, j as f64 * h);
            let w = (u * ly).exp() * self.g(u) * gamma(u);
            acc[0] += w;
            acc[1] += w * u;
            acc[2] += w * u * u;
        }
        acc.map(|a| a * (h / TAU))
    }

    /// Trapezoid value on `Re u = σ` with the residue at `u = 0` added when `σ < 0`.
    pub fn contour(&self, y: f64, sigma: f64, h: f64) -> C64 {
        let v = self.line_moments(y, sigma, h)[0];
        if sigma < 0.0 {
            v + 1.0
        } else {
            v
        }
    }

    fn build_table(&self) -> HermiteTable {
        let n = ((TABLE_LOG_HI - TABLE_LOG_LO) / TABLE_STEP).round() as usize;
        let v = crate::par::map_range(n + 1, |i| {
            let t = TABLE_LOG_LO + i as f64 * TABLE_STEP;
            let y = t.exp();
            let (sigma, res) = if y > 1.0 { (-0.5, 1.0) } else { (self.sigma, 0.0) };
            let m = self.line_moments(y, sigma, self.h);
            // d/dt and d²/dt² of y^u bring down u and u²; the residue at 0 only feeds V
            [m[0].re + res, m[1].re, m[2].re]
        });
        HermiteTable { t0: TABLE_LOG_LO, step: TABLE_STEP, v }
    }

    /// Fast `V(y)` for the summation routines.
    pub fn value(&self, y: f64) -> f64 {
        match self.shape {
            KernelShape::Unit => (-1.0 / y).exp(),
            KernelShape::Gaussian => {
                if let Some(v) = self.table.as_ref().and_then(|t| t.eval(y.ln())) {
                    return v;
                }
                if y < 1.0 {
                    self.contour(y, self.sigma, self.h).re
                } else {
                    self.contour(y, -0.5, self.h).re
                }
            }
        }
    }

    /// `B(σ)` with `|V(y)| ≤ B(σ) y^σ` for every `y > 0`, `σ > 0`.
    pub fn line_bound(&self, sigma: f64) -> f64 {
        match self.shape {
            KernelShape::Gaussian => (sigma * sigma).exp() * gamma(C64::new(sigma, 0.0)).re / (2.0 * PI.sqrt()),
            // sup_y e^{−1/y} y^{−σ}
            KernelShape::Unit => (sigma * sigma.ln() - sigma).exp(),
        }
    }

    /// Smallest `N0` with `Σ_{n>N0} K n^p |V(c/n)| ≤ eps`.
    pub fn cutoff(&self, c: f64, k: f64, p: f64, eps: f64) -> usize {
        match self.shape {
            KernelShape::Unit => {
                // V(c/n) = e^{−n/c}
                crate::forms::terms_for_tail(p, 1.0 / c, eps / k)
            }
            KernelShape::Gaussian => {
                let mut best = f64::INFINITY;
                let mut sigma = p + 1.5;
                while sigma < 40.0 {
                    let a = sigma - p - 1.0;
                    let lhs = k * self.line_bound(sigma) * c.powf(sigma) / (a * eps);
                    let n0 = lhs.powf(1.0 / a);
                    best = best.min(n0);
                    sigma += 0.5;
                }
                best.ceil().max(1.0) as usize
            }
        }
    }
}

/// `V(y)` by the trapezoid rule with the error estimated by halving `h`.
///
/// For `y > 1` the line moves to `Re u = −1/2` past the pole at 0, so `y^u` stays small.
pub fn v_smooth(kernel: &SmoothingKernel, y: f64) -> (C64, f64) {
    let sigma = if y > 1.0 { -0.5 } else { kernel.sigma };
    let full = kernel.contour(y, sigma, kernel.h);
    let coarse = kernel.contour(y, sigma, 2.0 * kernel.h);
    (full, (full - coarse).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_closed_form() {
        let k = SmoothingKernel::unit();
        for &y in &[0.1, 0.5, 1.0, 3.0, 20.0] {
            let (v, _) = v_smooth(&k, y);
            assert!((v.re - (-1.0 / y).exp()).abs() < 1e-12, "{y}: {v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn table_matches_contour() {
        let k = SmoothingKernel::gaussian();
        for &y in &[1e-6, 3e-4, 0.01, 0.3, 0.999, 1.0, 1.7, 25.0, 4000.0] {
            let direct = if y <= 1.0 { k.contour(y, 2.0, 0.05) } else { k.contour(y, -0.5, 0.05) };
            assert!((k.value(y) - direct.re).abs() < 1e-13, "{y}: {} vs {}", k.value(y), direct.re);
        }
    }
}
