use addtwist::averages::*;
use addtwist::forms::bundled;
use addtwist::ltwist::{DualMode, Engine};
use addtwist::C64;
use approx::{assert_abs_diff_eq, assert_relative_eq};
use std::f64::consts::TAU;

fn engine11() -> Engine {
    Engine::new(bundled(11, 400_000).unwrap(), DualMode::Auto)
}

#[test]
fn bump_shape() {
    for (x, d) in [(0.5, 0.05), (0.3, 0.02), (0.7, 0.1)] {
        let h = BumpFamily::new(x, d).unwrap();
        assert_abs_diff_eq!(h.h(x / 2.0), 1.0, epsilon = 1e-12);
        if x + 2.0 * d < 1.0 - 1.25 * d {
            assert_abs_diff_eq!(h.h(x + 2.0 * d), 0.0, epsilon = 1e-12);
        }
        let ts: Vec<f64> = (0..=200).map(|i| x + 1.25 * d * i as f64 / 200.0).collect();
        assert!(ts.windows(2).all(|w| h.h(w[1]) <= h.h(w[0]) + 1e-14));
        assert!((0..1000).all(|i| (0.0..=1.0 + 1e-12).contains(&h.h(i as f64 / 1000.0))));
    }
    assert!(BumpFamily::new(0.5, 0.0).is_err());
    assert!(BumpFamily::new(1.5, 0.1).is_err());
}

/// `∫_0^1 h(t) e(−nt) dt` by the periodic trapezoid rule.
fn h_hat_oracle(h: &BumpFamily, n: i64, k: usize) -> C64 {
    (0..k)
        .map(|j| {
            let t = j as f64 / k as f64;
            h.h(t) * C64::from_polar(1.0, -TAU * n as f64 * t)
        })
        .sum::<C64>()
        / k as f64
}

#[test]
fn fourier_coefficients() {
    let h = BumpFamily::new(0.5, 0.05).unwrap();
    assert_abs_diff_eq!(h.h_hat(0).re, 0.6, epsilon = 1e-12);
    for n in -50..=50i64 {
        let want = h_hat_oracle(&h, n, 1 << 14);
        assert!((h.h_hat(n) - want).norm() < 1e-9, "n={n}");
        if n != 0 {
            assert!(h.h_hat(n).norm() <= 1.0 / n.abs() as f64);
        }
        assert!((h.h_hat(-n) - h.h_hat(n).conj()).norm() < 1e-15);
    }
    let n_cut = h.cutoff(1e-10);
    assert!(n_cut > 10 && n_cut < 100_000);
    assert!(h.decay_constant(2, 200).is_finite());
}

#[test]
fn bump_mass() {
    assert_abs_diff_eq!(phi(0.0).max(0.0), phi(0.0), epsilon = 0.0);
    assert_eq!(phi(1.0), 0.0);
    assert_eq!(phi(-1.5), 0.0);
    assert_abs_diff_eq!(phi_hat(0.0), 1.0, epsilon = 1e-12);
}

#[test]
fn fractions() {
    let a: Fraction = "1/2".parse().unwrap();
    let b: Fraction = "0.5".parse().unwrap();
    assert_eq!(a, b);
    assert_eq!("2/4".parse::<Fraction>().unwrap(), a);
    assert_eq!("0.125".parse::<Fraction>().unwrap(), Fraction::new(1, 8).unwrap());
    assert!("x".parse::<Fraction>().is_err());
    assert!("1/0".parse::<Fraction>().is_err());
    assert_eq!(a.floor_times(7), 3);
    assert_eq!(a.to_string(), "1/2");
}

#[test]
fn schedule_examples() {
    assert_relative_eq!(delta_schedule(1000, 11), 1000f64.powf(-0.75), max_relative = 1e-12);
    assert_relative_eq!(delta_schedule(9, 27), 9f64.powf(-0.75) * 3f64.powf(0.25), max_relative = 1e-12);
    assert_relative_eq!(delta_schedule(10, 27), 10f64.powf(-0.75), max_relative = 1e-12);
    for q in [11u64, 27, 99] {
        for m in 2..3000u64 {
            let d = delta_schedule(m, q);
            assert!(d > (m as f64).powf(-0.875) && d < 1.0, "q={q} M={m}");
        }
    }
    assert!(predicted_error_scale(800, 11) < predicted_error_scale(100, 11));
}

#[test]
fn alphas_and_small_averages() {
    let eng = engine11();
    let l = eng.l1(0, 1).unwrap();
    assert!((alphas(&eng, 1).unwrap()[0] - l).norm() < 1e-12);
    let al = alphas(&eng, 12).unwrap();
    // Reindexing a -> -a turns conj(L(1, a/M)) into L(1, -a/M), so every alpha is real.
    for n in -12..12i64 {
        let v = alpha(&eng, n, 12).unwrap();
        assert!(v.im.abs() < 1e-10);
        assert_eq!(v, al[n.rem_euclid(12) as usize]);
    }
    for m in [1u64, 5, 12] {
        let x = Fraction::new(0, 1).unwrap();
        let (p, mi) = g_m_direct(&eng, x, m).unwrap();
        assert!((p - l / m as f64).norm() < 1e-12);
        assert_eq!(mi, C64::new(0.0, 0.0));
    }
}

#[test]
fn rearrangement_identity() {
    let eng = engine11();
    for (x, m) in [(0.5, 20u64), (0.3, 17)] {
        let fam = BumpFamily::new(x, delta_schedule(m, 11)).unwrap();
        let a = a_h_pm(&eng, &fam, m, 1e-10).unwrap();
        let (wp, wm) = weighted_symbol_average(&eng, &fam, m).unwrap();
        assert!((a.plus / 2.0 - wp).norm() < 1e-7);
        assert!((a.minus / 2.0 - wm).norm() < 1e-7);
        assert!(a.plus.im.abs() < 1e-8 && a.minus.re.abs() < 1e-8);
    }
}

#[test]
fn limit_series_properties() {
    let f = bundled(11, 200_000).unwrap();
    let z = limit_series(&f, 0.0, 1000).unwrap();
    assert_eq!((z.plus, z.minus), (0.0, C64::new(0.0, 0.0)));
    assert!(limit_series(&f, 1.0, 1000).unwrap().plus.abs() < 1e-12);
    let a = limit_series(&f, 0.5, 50_000).unwrap();
    let b = limit_series(&f, 0.5, 100_000).unwrap();
    assert!((a.plus - b.plus).abs() <= a.tail_plus);
    assert!((a.minus - b.minus).norm() <= a.tail_minus);
    assert!(limit_series(&f, 0.5, 300_000).is_err());

    let eng = engine11();
    let exact = limit_rational(&eng, "1/2".parse().unwrap()).unwrap();
    assert!((exact.plus - b.plus).abs() <= b.tail_plus);
    assert!((exact.minus - b.minus).norm() <= b.tail_minus);
    assert!(exact.plus.abs() < 1e-12);
    assert_abs_diff_eq!(exact.minus.im, b.minus.im, epsilon = 1e-6);
}

#[test]
fn experiment_validates_inputs() {
    let eng = engine11();
    let x = Fraction::new(1, 2).unwrap();
    assert!(convergence_experiment(&eng, x, &[]).is_err());
    assert!(convergence_experiment(&eng, x, &[20, 10]).is_err());
    let rows = convergence_experiment(&eng, x, &[10, 20]).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].csv().split(',').count(), ConvergenceRow::CSV_HEADER.split(',').count());
    for r in &rows {
        assert_abs_diff_eq!(r.err_plus, (r.g_plus - r.limit_plus).abs(), epsilon = 1e-15);
    }
}
