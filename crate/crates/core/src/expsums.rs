//! Kloosterman sums and the Weil bound.

use crate::arith::{gcd, mod_inv, sigma0};
use crate::{e_frac, C64};

/// `S(m, n; c) = Σ_{x mod c, (x,c)=1} e((m x + n x̄)/c)`.
pub fn kloosterman(m: i64, n: i64, c: u64) -> C64 {
    let ci = c as i64;
    (0..ci)
        .filter(|&x| gcd(x, ci) == 1)
        .map(|x| {
            let xb = mod_inv(x, c).unwrap() as i64;
            let t = (m.rem_euclid(ci) as i128 * x as i128 + n.rem_euclid(ci) as i128 * xb as i128)
                % ci as i128;
            e_frac(t as i64, c)
        })
        .sum()
}

/// `gcd(m, n, c)^{1/2} c^{1/2} σ_0(c)`.
pub fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    let g = gcd(gcd(m, n) as i64, c as i64);
    (g as f64).sqrt() * (c as f64).sqrt() * sigma0(c) as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeilRow {
    pub m: i64,
    pub n: i64,
    pub c: u64,
    pub abs_s: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Every `(m, n, c)` in `[1, m_max] × [1, n_max] × [1, c_max]`, sorted by ratio descending.
pub fn weil_bound_report(m_max: i64, n_max: i64, c_max: u64) -> Vec<WeilRow> {
    let cs: Vec<u64> = (1..=c_max).collect();
    let mut rows: Vec<WeilRow> = crate::par::map_slice(&cs, |&c| {
        let units: Vec<(i64, i64)> = (0..c as i64)
            .filter(|&x| gcd(x, c as i64) == 1)
            .map(|x| (x, mod_inv(x, c).unwrap() as i64))
            .collect();
        let mut out = Vec::new();
        for m in 1..=m_max {
            for n in 1..=n_max {
                let s: C64 = units
                    .iter()
                    .map(|&(x, xb)| e_frac((m * x + n * xb) % c as i64, c))
                    .sum();
                let bound = weil_bound(m, n, c);
                out.push(WeilRow { m, n, c, abs_s: s.norm(), bound, ratio: s.norm() / bound });
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    rows.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then((a.c, a.m, a.n).cmp(&(b.c, b.m, b.n))));
    rows
}
