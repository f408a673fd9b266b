use std::process::{Command, Output};

use addtwist::arith::euler_phi;
use addtwist::forms::{bundled, format_coeffs};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_addtwist")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV body keyed by header name.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn verify_fe_level11_passes() {
    let o = run(&["verify-fe", "--form", "11a", "--d-max", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(h.join(","), "d,a,s,lhs_re,lhs_im,rhs_re,rhs_im,abs_diff");
    let pairs: u64 = (1..=12).map(euler_phi).sum();
    assert_eq!(rows.len() as u64, 3 * pairs);
    let k = col(&h, "abs_diff");
    assert!(rows.iter().all(|r| r[k].parse::<f64>().unwrap() < 1e-6));
}

#[test]
fn verify_fe_unreachable_tolerance_fails() {
    let o = run(&["verify-fe", "--d-max", "2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceed tolerance"));
}

#[test]
fn corrupted_file_names_hecke_failure() {
    let dir = tempfile::tempdir().unwrap();
    let good = format_coeffs(&bundled(11, 3000).unwrap());
    // a(2) = -2 becomes -3, breaking multiplicativity and the prime-power recursion.
    let bad = good.replacen("\n2 -2\n", "\n2 -3\n", 1);
    assert_ne!(good, bad);
    let path = dir.path().join("bad.coeffs");
    std::fs::write(&path, bad).unwrap();
    let o = run(&["verify-fe", "--form", &format!("file:{}", path.display()), "--d-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Hecke check failed"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_error() {
    let o = run(&["verify-fe", "--form", "file:/nonexistent/f.coeffs"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn modsym_rows_and_symmetries() {
    let dir = tempfile::tempdir().unwrap();
    let bound = dir.path().join("bound.csv");
    let o = run(&["modsym", "--form", "11a", "--d-max", "20", "--bound-out", bound.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    let (d, a) = (col(&h, "d"), col(&h, "a"));
    for n in 1..=20u64 {
        let count = rows.iter().filter(|r| r[d] == n.to_string()).count() as u64;
        assert_eq!(count, euler_phi(n), "d = {n}");
    }
    let (mr, mi) = (col(&h, "minus_re"), col(&h, "minus_im"));
    let at_zero = rows.iter().find(|r| r[a] == "0").unwrap();
    assert_eq!(at_zero[mr].parse::<f64>().unwrap(), 0.0);
    assert_eq!(at_zero[mi].parse::<f64>().unwrap(), 0.0);
    for name in ["plus_sym_diff", "minus_sym_sum"] {
        let k = col(&h, name);
        assert!(rows.iter().all(|r| r[k].parse::<f64>().unwrap() < 1e-9), "{name}");
    }
    let (bh, brows) = table(&std::fs::read_to_string(bound).unwrap());
    assert_eq!(bh.join(","), "d,max_abs_lambda,shape,ratio");
    assert_eq!(brows.len(), 20);
    let k = col(&bh, "ratio");
    assert!(brows.iter().all(|r| r[k].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn converge_rational_and_decimal_agree() {
    let a = run(&["converge", "--x", "1/2", "--M-list", "12,24"]);
    let b = run(&["converge", "--x", "0.5", "--M-list", "12,24"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let (h, rows) = table(&stdout(&a));
    assert_eq!(h.join(","), "M,delta,G_plus,G_minus_im,limit_plus,limit_minus_im,err_plus,err_minus,pred_scale");
    assert_eq!(rows.len(), 2);
}

#[test]
fn converge_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    for p in [&p1, &p2] {
        let o = run(&["converge", "--M", "30", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
}

#[test]
fn converge_empty_list_is_usage_error() {
    assert_eq!(run(&["converge", "--M-list", ""]).status.code(), Some(2));
    assert_eq!(run(&["converge"]).status.code(), Some(2));
}

#[test]
fn sums_defaults_pass() {
    let o = run(&["sums"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    let (prim, tau, root, orth) = (col(&h, "primitive"), col(&h, "tau_abs"), col(&h, "sqrt_cond"), col(&h, "orth_residual"));
    let mut primitive = 0;
    for r in &rows {
        let t: f64 = r[tau].parse().unwrap();
        let s: f64 = r[root].parse().unwrap();
        assert!((t - s).abs() < 1e-9);
        assert!(r[orth].parse::<f64>().unwrap() < 1e-9);
        primitive += (r[prim] == "true") as usize;
    }
    let total: u64 = (1..=100).map(euler_phi).sum();
    assert_eq!(rows.len() as u64, total);
    assert!(primitive > 0);
}

#[test]
fn json_output_parses() {
    let o = run(&["sums", "--n-max", "12", "--c-max", "20", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["tau_residual_max"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["rows"].as_array().unwrap().len() as u64, (1..=12).map(euler_phi).sum::<u64>());
}

#[test]
fn unknown_form_rejected() {
    let o = run(&["modsym", "--form", "37a"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown form"));
}

#[test]
fn level27_eta_spec_accepted() {
    let o = run(&["modsym", "--form", "eta:3^2,9^2@27", "--d-max", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
}
