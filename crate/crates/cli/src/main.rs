//! `addtwist`: verification suites and experiments for additive twists of weight-2 newforms.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use addtwist::arith::gcd;
use addtwist::averages::{convergence_experiment, ConvergenceRow, Fraction};
use addtwist::characters::{
    enumerate_characters, gauss_sum, generalized_gauss_sum, generalized_gauss_sum_brute, DirichletCharacter,
};
use addtwist::expsums::weil_bound_report;
use addtwist::forms::{eta_quotient_coeffs, load_coeffs, verify_hecke, CoefficientSeries, EtaQuotientSpec};
use addtwist::ltwist::{functional_equation_rhs, lambda_direct, modsym_bound_report, DualMode, Engine};
use addtwist::{Error, C64};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "addtwist", version, about = "Additive twists of weight-2 newforms")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunConfig {
    /// `11a`, `27a`, `eta:1^2,11^2@11` or `file:<path>`.
    #[arg(long, global = true, default_value = "11a")]
    form: String,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Initial number of coefficients for eta forms; grown on demand.
    #[arg(long, global = true)]
    len: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Duals::Auto)]
    duals: Duals,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Duals {
    Numeric,
    Decomposition,
    Auto,
}

impl From<Duals> for DualMode {
    fn from(d: Duals) -> Self {
        match d {
            Duals::Numeric => DualMode::Numeric,
            Duals::Decomposition => DualMode::Decomposition,
            Duals::Auto => DualMode::Auto,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare both sides of the additive functional equation.
    VerifyFe {
        #[arg(long = "d-max", default_value_t = 12)]
        d_max: u64,
        #[arg(long = "s-list", value_delimiter = ',', default_value = "0.7,1,1.3")]
        s_list: Vec<f64>,
    },
    /// Modular symbols for every reduced a/d and the size report.
    Modsym {
        #[arg(long = "d-max", default_value_t = 20)]
        d_max: u64,
        /// CSV file for the size report; printed to stderr otherwise.
        #[arg(long = "bound-out")]
        bound_out: Option<PathBuf>,
    },
    /// G_M(x) against its limit over a list of M.
    Converge {
        #[arg(long, default_value = "1/2")]
        x: String,
        #[arg(long = "M", conflicts_with = "m_list")]
        m: Option<u64>,
        #[arg(long = "M-list", value_delimiter = ',')]
        m_list: Option<Vec<u64>>,
    },
    /// Gauss sum, orthogonality, c_chi and Weil bound checks.
    Sums {
        #[arg(long = "n-max", default_value_t = 100)]
        n_max: u64,
        #[arg(long = "cchi-max", default_value_t = 60)]
        cchi_max: u64,
        #[arg(long = "c-max", default_value_t = 300)]
        c_max: u64,
        #[arg(long = "mn-max", default_value_t = 20)]
        mn_max: i64,
    },
}

/// Exit codes: 1 check failed, 2 usage, 3 could not run.
enum Failure {
    Check(String),
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

enum FormSource {
    Eta(EtaQuotientSpec),
    File(PathBuf),
}

impl FormSource {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "11" | "11a" | "11a1" => Ok(FormSource::Eta(EtaQuotientSpec::level11())),
            "27" | "27a" | "27a1" => Ok(FormSource::Eta(EtaQuotientSpec::level27())),
            _ => {
                if let Some(p) = s.strip_prefix("file:") {
                    Ok(FormSource::File(PathBuf::from(p)))
                } else if s.starts_with("eta:") {
                    EtaQuotientSpec::parse(s).map(FormSource::Eta).map_err(|e| e.to_string())
                } else {
                    Err(format!("unknown form '{s}'; use 11a, 27a, eta:<spec> or file:<path>"))
                }
            }
        }
    }

    fn load(&self, n: usize) -> addtwist::Result<CoefficientSeries> {
        match self {
            FormSource::Eta(spec) => eta_quotient_coeffs(spec, n),
            FormSource::File(p) => load_coeffs(p),
        }
    }

    /// Run `job`, regrowing eta expansions whenever it reports truncation.
    fn with_form<T>(
        &self,
        start: usize,
        mut job: impl FnMut(&CoefficientSeries) -> addtwist::Result<T>,
    ) -> std::result::Result<T, Failure> {
        const CAP: usize = 40_000_000;
        let mut n = start;
        loop {
            let f = self.load(n)?;
            check_hecke(&f)?;
            match job(&f) {
                Err(Error::Truncation { required, .. }) if matches!(self, FormSource::Eta(_)) && n < CAP => {
                    n = (required * 5 / 4).max(2 * n).min(CAP);
                    eprintln!("growing series to {n} coefficients");
                }
                other => return other.map_err(Failure::from),
            }
        }
    }
}

fn check_hecke(f: &CoefficientSeries) -> Outcome {
    let report = verify_hecke(f);
    if report.all_pass() {
        return Ok(());
    }
    Err(Failure::Check(format!("Hecke check failed for {}: {}", f.label, report.failures().join("; "))))
}

/// Shortest round-trip formatting; `.` decimal regardless of locale.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn emit(cfg: &RunConfig, csv: &str, json: &Value) -> Outcome {
    let text = match cfg.format {
        Format::Csv => csv.to_string(),
        Format::Json => serde_json::to_string_pretty(json).expect("serializable") + "\n",
    };
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn reduced_fractions(d_max: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    for d in 1..=d_max {
        for a in 0..d as i64 {
            if gcd(a, d as i64) == 1 {
                out.push((a, d));
            }
        }
    }
    out
}

fn verify_fe(cfg: &RunConfig, src: &FormSource, d_max: u64, s_list: &[f64]) -> Outcome {
    let tol = cfg.tol.unwrap_or(1e-6);
    if s_list.is_empty() {
        return Err(Failure::Usage("empty s list".into()));
    }
    let eps = (tol * 1e-2).clamp(1e-12, 1e-8);
    let s: Vec<C64> = s_list.iter().map(|&x| C64::new(x, 0.0)).collect();
    let pairs = reduced_fractions(d_max);
    let rows = src.with_form(cfg.len.unwrap_or(1_000_000), |f| {
        let mut eng = Engine::new(f.clone(), cfg.duals.into());
        eng.eps = eps;
        let eng = &eng;
        let direct = addtwist::par::try_map_slice(&pairs, |&(a, d)| lambda_direct(f, &s, &eng.twist(a, d)?, eps))?;
        let mut rows = Vec::new();
        for (&(a, d), lam) in pairs.iter().zip(&direct) {
            let tw = eng.twist(a, d)?;
            let duals = eng.contragredients(&tw, 1.0)?;
            let n = C64::new(tw.conductor() as f64, 0.0);
            for (sj, l) in s.iter().zip(lam) {
                let lhs = l.value * n.powc(sj - 1.0);
                let rhs = functional_equation_rhs(f, *sj, &tw, &duals, eps)?;
                rows.push((a, d, sj.re, lhs, rhs));
            }
        }
        Ok(rows)
    })?;
    let mut csv = String::from("d,a,s,lhs_re,lhs_im,rhs_re,rhs_im,abs_diff\n");
    let mut js = Vec::new();
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for &(a, d, s, lhs, rhs) in &rows {
        let diff = (lhs - rhs).norm();
        worst = worst.max(diff);
        if !(diff <= tol) {
            failed += 1;
        }
        writeln!(csv, "{d},{a},{s},{},{},{},{},{}", num(lhs.re), num(lhs.im), num(rhs.re), num(rhs.im), num(diff)).unwrap();
        js.push(json!({"d": d, "a": a, "s": s, "lhs_re": lhs.re, "lhs_im": lhs.im, "rhs_re": rhs.re, "rhs_im": rhs.im, "abs_diff": diff}));
    }
    emit(cfg, &csv, &json!({"tol": tol, "max_abs_diff": worst, "rows": js}))?;
    if failed > 0 {
        return Err(Failure::Check(format!(
            "{failed} of {} rows exceed tolerance {tol:e} (max |lhs-rhs| = {worst:.3e})",
            rows.len()
        )));
    }
    eprintln!("{} rows, max |lhs-rhs| = {worst:.3e} <= {tol:e}", rows.len());
    Ok(())
}

fn modsym(cfg: &RunConfig, src: &FormSource, d_max: u64, bound_out: Option<&PathBuf>) -> Outcome {
    let tol = cfg.tol.unwrap_or(1e-8);
    let (syms, report) = src.with_form(cfg.len.unwrap_or(400_000), |f| {
        let eng = Engine::new(f.clone(), cfg.duals.into());
        let report = modsym_bound_report(&eng, d_max)?;
        let mut syms = Vec::new();
        for d in 1..=d_max {
            syms.push(eng.symbols_for(d)?);
        }
        Ok((syms, report))
    })?;
    let mut csv = String::from("d,a,plus_re,plus_im,minus_re,minus_im,plus_sym_diff,minus_sym_sum\n");
    let mut js = Vec::new();
    let mut worst_sym: f64 = 0.0;
    for row in &syms {
        let d = row[0].d;
        for s in row {
            let partner = row.iter().find(|t| t.a == (d as i64 - s.a).rem_euclid(d as i64)).expect("d-a is reduced");
            let pd = (s.plus - partner.plus).norm();
            let ms = (s.minus + partner.minus).norm();
            worst_sym = worst_sym.max(pd).max(ms);
            writeln!(
                csv,
                "{d},{},{},{},{},{},{},{}",
                s.a,
                num(s.plus.re),
                num(s.plus.im),
                num(s.minus.re),
                num(s.minus.im),
                num(pd),
                num(ms)
            )
            .unwrap();
            js.push(json!({"d": d, "a": s.a, "plus_re": s.plus.re, "plus_im": s.plus.im,
                "minus_re": s.minus.re, "minus_im": s.minus.im, "plus_sym_diff": pd, "minus_sym_sum": ms}));
        }
    }
    let mut bcsv = String::from("d,max_abs_lambda,shape,ratio\n");
    let mut bjs = Vec::new();
    for r in &report {
        writeln!(bcsv, "{},{},{},{}", r.d, num(r.max_abs_lambda), num(r.shape), num(r.ratio)).unwrap();
        bjs.push(json!({"d": r.d, "max_abs_lambda": r.max_abs_lambda, "shape": r.shape, "ratio": r.ratio}));
    }
    emit(cfg, &csv, &json!({"symbols": js, "bound": bjs}))?;
    match bound_out {
        Some(p) => std::fs::write(p, &bcsv)?,
        None if cfg.format == Format::Csv => eprint!("{bcsv}"),
        None => {}
    }
    if !report.iter().all(|r| r.ratio.is_finite()) {
        return Err(Failure::Check("non-finite bound ratio".into()));
    }
    if worst_sym > tol {
        return Err(Failure::Check(format!("symmetry residual {worst_sym:.3e} exceeds {tol:e}")));
    }
    Ok(())
}

fn converge(cfg: &RunConfig, src: &FormSource, x: &str, ms: &[u64]) -> Outcome {
    let x: Fraction = x.parse()?;
    let rows: Vec<ConvergenceRow> = src.with_form(cfg.len.unwrap_or(400_000), |f| {
        let eng = Engine::new(f.clone(), cfg.duals.into());
        convergence_experiment(&eng, x, ms)
    })?;
    let mut csv = String::from(ConvergenceRow::CSV_HEADER);
    csv.push('\n');
    let mut js = Vec::new();
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
        js.push(json!({"M": r.m, "delta": r.delta, "G_plus": r.g_plus, "G_minus_im": r.g_minus_im,
            "limit_plus": r.limit_plus, "limit_minus_im": r.limit_minus_im,
            "err_plus": r.err_plus, "err_minus": r.err_minus, "pred_scale": r.pred_scale}));
    }
    emit(cfg, &csv, &json!({"x": format!("{}/{}", x.num, x.den), "rows": js}))
}

/// `max_ψ |Σ_a χ(a) ψ̄(a) − φ(n) δ_{χψ}| / φ(n)` over all characters `ψ` mod `n`.
fn orthogonality_residual(chi: &DirichletCharacter, all: &[Vec<C64>], phi: f64) -> f64 {
    let n = chi.modulus() as i64;
    let row: Vec<C64> = (0..n).map(|a| chi.eval(a)).collect();
    all.iter()
        .enumerate()
        .map(|(j, psi)| {
            let s: C64 = row.iter().zip(psi).map(|(u, v)| u * v.conj()).sum();
            let target = if j == chi.index { phi } else { 0.0 };
            (s - target).norm() / phi
        })
        .fold(0.0, f64::max)
}

fn sums(cfg: &RunConfig, n_max: u64, cchi_max: u64, c_max: u64, mn_max: i64) -> Outcome {
    let tol = cfg.tol.unwrap_or(1e-9);
    let moduli: Vec<u64> = (1..=n_max).collect();
    let per_modulus = addtwist::par::map_slice(&moduli, |&n| {
        let chars = enumerate_characters(n);
        let table: Vec<Vec<C64>> = chars.iter().map(|c| (0..n as i64).map(|a| c.eval(a)).collect()).collect();
        let phi = addtwist::arith::euler_phi(n) as f64;
        let mut rows = Vec::new();
        for chi in &chars {
            let star = chi.primitive();
            let cond = star.modulus();
            let tau = gauss_sum(&star).norm();
            let orth = orthogonality_residual(chi, &table, phi);
            let cchi = if n <= cchi_max {
                (0..2 * n as i64)
                    .map(|m| (generalized_gauss_sum(chi, m) - generalized_gauss_sum_brute(chi, m)).norm())
                    .fold(0.0, f64::max)
            } else {
                f64::NAN
            };
            rows.push((n, chi.label(), cond, chi.is_primitive(), tau, orth, cchi));
        }
        rows
    });
    let weil = weil_bound_report(mn_max, mn_max, c_max);
    let weil_max = weil.first().map_or(0.0, |r| r.ratio);

    let mut csv = String::from("n,chi,conductor,primitive,tau_abs,sqrt_cond,tau_residual,orth_residual,c_chi_residual\n");
    let mut js = Vec::new();
    let (mut worst_tau, mut worst_orth, mut worst_c): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (n, label, cond, prim, tau, orth, cchi) in per_modulus.into_iter().flatten() {
        let root = (cond as f64).sqrt();
        let res = (tau - root).abs();
        worst_tau = worst_tau.max(res);
        worst_orth = worst_orth.max(orth);
        if cchi.is_finite() {
            worst_c = worst_c.max(cchi);
        }
        let cstr = if cchi.is_finite() { num(cchi) } else { String::new() };
        writeln!(csv, "{n},{label},{cond},{prim},{},{},{},{},{cstr}", num(tau), num(root), num(res), num(orth)).unwrap();
        js.push(json!({"n": n, "chi": label, "conductor": cond, "primitive": prim, "tau_abs": tau,
            "sqrt_cond": root, "tau_residual": res, "orth_residual": orth,
            "c_chi_residual": if cchi.is_finite() { json!(cchi) } else { Value::Null }}));
    }
    let summary = json!({"tau_residual_max": worst_tau, "orth_residual_max": worst_orth,
        "c_chi_residual_max": worst_c, "weil_max_ratio": weil_max});
    emit(cfg, &csv, &json!({"summary": summary, "rows": js}))?;
    eprintln!(
        "max tau residual {worst_tau:.2e}, orthogonality {worst_orth:.2e}, c_chi {worst_c:.2e}, Weil max ratio {weil_max:.4}"
    );
    let mut bad = Vec::new();
    if worst_tau > tol {
        bad.push(format!("Gauss sum residual {worst_tau:.2e}"));
    }
    if worst_orth > tol {
        bad.push(format!("orthogonality residual {worst_orth:.2e}"));
    }
    if worst_c > tol {
        bad.push(format!("c_chi residual {worst_c:.2e}"));
    }
    if weil_max > 1.0 + 1e-12 {
        bad.push(format!("Weil bound exceeded, ratio {weil_max:.6}"));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(bad.join("; ")))
    }
}

fn run(cli: Cli) -> Outcome {
    let cfg = &cli.run;
    if let Some(t) = cfg.tol {
        if !(t > 0.0) {
            return Err(Failure::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    let src = || FormSource::parse(&cfg.form).map_err(Failure::Run);
    match &cli.command {
        Command::VerifyFe { d_max, s_list } => verify_fe(cfg, &src()?, *d_max, s_list),
        Command::Modsym { d_max, bound_out } => modsym(cfg, &src()?, *d_max, bound_out.as_ref()),
        Command::Converge { x, m, m_list } => {
            let ms: Vec<u64> = match (m, m_list) {
                (Some(m), _) => vec![*m],
                (None, Some(l)) => l.clone(),
                (None, None) => Vec::new(),
            };
            if ms.is_empty() {
                return Err(Failure::Usage("converge needs --M or a non-empty --M-list".into()));
            }
            converge(cfg, &src()?, x, &ms)
        }
        Command::Sums { n_max, cchi_max, c_max, mn_max } => sums(cfg, *n_max, *cchi_max, *c_max, *mn_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
