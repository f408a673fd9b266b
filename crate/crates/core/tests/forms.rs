use addtwist::forms::*;
use addtwist::C64;
use approx::assert_relative_eq;

/// `Π_{k≥1}(1 − q^k)` from Euler's pentagonal theorem.
fn pentagonal(n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n + 1];
    out[0] = 1;
    for k in 1i64.. {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let g1 = (k * (3 * k - 1) / 2) as usize;
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g1 > n {
            break;
        }
        out[g1] += sign;
        if g2 <= n {
            out[g2] += sign;
        }
    }
    out
}

fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len() - 1;
    let mut out = vec![0i64; n + 1];
    for (i, &x) in a.iter().enumerate().filter(|p| *p.1 != 0) {
        for j in 0..=n - i {
            out[i + j] += x * b[j];
        }
    }
    out
}

/// `q^{offset} Π_m η-part(q^m)^{e_m}` with positive exponents only.
fn eta_oracle(parts: &[(usize, u32)], offset: usize, n: usize) -> Vec<i64> {
    let base = pentagonal(n);
    let mut acc = vec![0i64; n + 1];
    acc[0] = 1;
    for &(m, e) in parts {
        let mut scaled = vec![0i64; n + 1];
        for (i, &c) in base.iter().enumerate() {
            if i * m <= n {
                scaled[i * m] = c;
            }
        }
        for _ in 0..e {
            acc = mul(&acc, &scaled);
        }
    }
    let mut out = vec![0i64; n + 1];
    out[offset..=n].copy_from_slice(&acc[..=n - offset]);
    out
}

#[test]
fn level11_against_pentagonal_oracle() {
    let n = 400;
    let s = eta_quotient_coeffs(&EtaQuotientSpec::level11(), n).unwrap();
    let want = eta_oracle(&[(1, 2), (11, 2)], 1, n);
    assert_eq!(&s.exact().unwrap()[1..], &want[1..]);
    let a = |k: usize| s.exact().unwrap()[k];
    assert_eq!([a(1), a(2), a(3), a(4), a(5), a(11)], [1, -2, -1, 2, 1, 1]);
}

#[test]
fn level27_against_pentagonal_oracle() {
    let n = 400;
    let s = eta_quotient_coeffs(&EtaQuotientSpec::level27(), n).unwrap();
    let want = eta_oracle(&[(3, 2), (9, 2)], 1, n);
    assert_eq!(&s.exact().unwrap()[1..], &want[1..]);
    let a = |k: usize| s.exact().unwrap()[k];
    assert_eq!([a(1), a(2), a(3), a(4)], [1, 0, 0, -2]);
    for j in 1..=5 {
        assert_eq!(a(3usize.pow(j)), 0);
    }
}

#[test]
fn eta_spec_parsing() {
    let s = EtaQuotientSpec::parse("eta:1^2,11^2@11").unwrap();
    assert_eq!(s, EtaQuotientSpec::level11());
    assert_eq!(EtaQuotientSpec::parse(&s.label()).unwrap(), s);
    assert!(EtaQuotientSpec::parse("1^2,11^2").is_err());
    assert!(EtaQuotientSpec::parse("1^2,7^2@11").is_err());
    assert!(EtaQuotientSpec::parse("1^1@11").is_err());
    let one = eta_quotient_coeffs(&EtaQuotientSpec::level27(), 1).unwrap();
    assert_eq!(one.a(1), C64::new(1.0, 0.0));
}

#[test]
fn coefficient_file_round_trip() {
    let s = bundled(11, 100).unwrap();
    let text = format_coeffs(&s);
    let back = parse_coeffs(&text).unwrap();
    assert_eq!(back.level, 11);
    assert_eq!(back.weight, 2);
    assert_eq!(back.exact(), s.exact());

    let dir = tempdir();
    let path = dir.join("f11.coeffs");
    save_coeffs(&s, &path).unwrap();
    assert_eq!(load_coeffs(&path).unwrap().exact(), s.exact());
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("addtwist-forms-{}", std::process::id()));
    std::fs::create_dir_all(&p).unwrap();
    p
}

#[test]
fn coefficient_file_errors() {
    assert!(parse_coeffs("level 11\nweight 2\ncoeffs\n").is_err());
    assert!(parse_coeffs("level 11\nweight 2\ncoeffs\n1 1\n1 1\n").is_err());
    assert!(parse_coeffs("level 11\nweight 2\ncoeffs\n1 1\n3 1\n").is_err());
    assert!(parse_coeffs("weight 2\ncoeffs\n1 1\n").is_err());
    let c = parse_coeffs("level 7\nweight 2\ncoeffs\n1 1\n2 0.5 -0.25\n").unwrap();
    assert!(c.exact().is_none());
    assert_eq!(c.a(2), C64::new(0.5, -0.25));
}

#[test]
fn hecke_relations_hold_for_bundled_forms() {
    for q in [11, 27] {
        let r = verify_hecke(&bundled(q, 10_000).unwrap());
        assert!(r.all_pass(), "{:?}", r.failures());
        assert!(r.class("coprime").checked > 1000);
        assert!(r.class("deligne").checked == 10_000);
    }
    assert!(verify_hecke(&bundled(27, 10_000).unwrap()).class("p2_divides_q").checked > 0);
    assert!(verify_hecke(&bundled(11, 1).unwrap()).all_pass());
}

#[test]
fn corrupted_coefficient_is_named() {
    let s = bundled(11, 200).unwrap();
    let bad = s.with_coefficient(6, s.a(6) + 1.0);
    let r = verify_hecke(&bad);
    assert!(!r.all_pass());
    assert_eq!(r.class("coprime").first_failure.as_deref(), Some("(2,3)"));
}

#[test]
fn evaluation_tail_collapse_and_symmetry() {
    let s = bundled(11, 5000).unwrap();
    let z = C64::new(0.0, 10.0);
    let v = evaluate_form(&s, z, 1e-30).unwrap();
    let lead = (C64::new(0.0, std::f64::consts::TAU) * z).exp();
    assert!(((v.value - lead) / lead).norm() < 1e-20);

    for x in [0.1, 0.37, 0.5] {
        let a = evaluate_form(&s, C64::new(x, 0.05), 1e-13).unwrap().value;
        let b = evaluate_form(&s, C64::new(-x, 0.05), 1e-13).unwrap().value;
        assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
        assert_relative_eq!(a.im, -b.im, epsilon = 1e-12);
    }

    let low = evaluate_form(&s, C64::new(0.2, 0.01), 1e-9).unwrap();
    assert!(low.terms > 500 && low.terms < 5000, "terms {}", low.terms);
    assert_eq!(terms_needed(2, 0.01, 1e-9), low.terms);
}

#[test]
fn truncation_is_reported() {
    let s = bundled(11, 50).unwrap();
    assert!(matches!(
        evaluate_form(&s, C64::new(0.0, 0.001), 1e-10),
        Err(addtwist::Error::Truncation { .. })
    ));
}
