//! Gauss–Legendre rules and level-synchronous adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};
use crate::C64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫_a^b f` by a fixed `n`-point Gauss–Legendre rule on `panels` equal panels.
pub fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + h * (p as f64 + 0.5);
            x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gk_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut t = [0.0; 15];
    for j in 0..7 {
        t[j] = c - h * XGK[j];
        t[14 - j] = c + h * XGK[j];
    }
    t[7] = c;
    t
}

fn gk_combine(vals: &[Vec<C64>], a: f64, b: f64) -> (Vec<C64>, f64) {
    let h = 0.5 * (b - a);
    let dim = vals[0].len();
    let mut k = vec![C64::new(0.0, 0.0); dim];
    let mut g = vec![C64::new(0.0, 0.0); dim];
    for j in 0..7 {
        for c in 0..dim {
            k[c] += WGK[j] * (vals[j][c] + vals[14 - j][c]);
        }
        if j % 2 == 1 {
            for c in 0..dim {
                g[c] += WG[j / 2] * (vals[j][c] + vals[14 - j][c]);
            }
        }
    }
    for c in 0..dim {
        k[c] += WGK[7] * vals[7][c];
        g[c] += WG[3] * vals[7][c];
    }
    let err = k.iter().zip(&g).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) * h;
    (k.into_iter().map(|x| x * h).collect(), err)
}

/// Adaptive Gauss–Kronrod (7, 15) for a vector-valued integrand.
///
/// All intervals of one refinement level are evaluated together through
/// [`crate::par`], so the integrand runs data-parallel. An interval is accepted
/// once its error estimate is below its share `tol·len/(b−a)`.
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, tol: f64, initial: usize, max_level: usize) -> Result<(Vec<C64>, f64)>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync + Send,
{
    let width = b - a;
    let mut intervals: Vec<(f64, f64)> = (0..initial)
        .map(|i| (a + width * i as f64 / initial as f64, a + width * (i + 1) as f64 / initial as f64))
        .collect();
    let mut total: Option<Vec<C64>> = None;
    let mut total_err = 0.0;
    for _ in 0..max_level {
        let nodes: Vec<f64> = intervals.iter().flat_map(|&(l, r)| gk_nodes(l, r)).collect();
        let vals = crate::par::try_map_slice(&nodes, |&t| f(t))?;
        let mut next = Vec::new();
        for (i, &(l, r)) in intervals.iter().enumerate() {
            let (est, err) = gk_combine(&vals[15 * i..15 * i + 15], l, r);
            if err <= tol * (r - l) / width || r - l < 1e-12 * width {
                let acc = total.get_or_insert_with(|| vec![C64::new(0.0, 0.0); est.len()]);
                for (x, y) in acc.iter_mut().zip(&est) {
                    *x += y;
                }
                total_err += err;
            } else {
                let m = 0.5 * (l + r);
                next.push((l, m));
                next.push((m, r));
            }
        }
        if next.is_empty() {
            return Ok((total.unwrap_or_default(), total_err));
        }
        intervals = next;
    }
    Err(Error::Precision {
        target: tol,
        achieved: f64::NAN,
        hint: format!("adaptive quadrature did not converge in {max_level} levels"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_peak() {
        let (v, err) = adaptive_gk(
            |t| Ok(vec![C64::new(1.0 / (1e-4 + t * t), 0.0)]),
            -1.0,
            1.0,
            1e-10,
            4,
            60,
        )
        .unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v[0].re - exact).abs() < 1e-8, "{} {exact} {err}", v[0].re);
    }
}
