use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rug::{Integer, Rational};
use twistbsd::analytic;
use twistbsd::bsd::{self, Verdict};
use twistbsd::curve::CurveQ;
use twistbsd::curvedb::{self, CurveRecord};
use twistbsd::descent;
use twistbsd::error::Error;
use twistbsd::families::{self, CurveContext, TwistFamily};
use twistbsd::heegner;
use twistbsd::localdata;
use twistbsd::par::{self, Exec};
use twistbsd::point::RationalPoint;
use twistbsd::report::{render, Format, Node, Rec, ToReport};

/// Admissible primes, twist families and 2-adic BSD checks for elliptic curves over Q.
///
/// Curves are named by fixture label, `path:line` into a curve table, or `[a1,a2,a3,a4,a6]`.
/// Set TWISTBSD_CURVES to replace the built-in fixture table.
#[derive(Parser, Debug)]
#[command(name = "twistbsd", version)]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Config {
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(u32).range(20..))]
    digits: u32,
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    /// Worker threads; 1 runs sequentially, 0 uses the default pool.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Assume the Manin constant is odd (default).
    #[arg(long, global = true, overrides_with = "no_assume_odd_manin")]
    assume_odd_manin: bool,
    /// Drop the odd Manin constant assumption; verdicts that need it are downgraded.
    #[arg(long, global = true)]
    no_assume_odd_manin: bool,
}

impl Config {
    fn exec(&self) -> Exec {
        if self.jobs == 1 {
            Exec::Sequential
        } else {
            Exec::auto()
        }
    }

    fn manin(&self) -> bool {
        !self.no_assume_odd_manin
    }
}

#[derive(Args, Debug)]
struct CurveArg {
    #[arg(long)]
    curve: String,
    /// Replace the curve by its quadratic twist by this squarefree integer.
    #[arg(long, allow_hyphen_values = true)]
    twist: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Reproduce the conductor < 100 table and diff it against the expected rows.
    Table {
        #[arg(long, default_value_t = 300, value_parser = positive)]
        bound: u64,
    },
    /// Admissible primes below the bound, cross-checked by the trace criterion.
    Admissible {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 300, value_parser = positive)]
        bound: u64,
    },
    /// Heegner primes below the bound.
    HeegnerPrimes {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 300, value_parser = positive)]
        bound: u64,
    },
    /// Full report for the family (E, p, q1..qr).
    Family {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        p: u64,
        /// Admissible primes, repeated or comma separated.
        #[arg(long, value_delimiter = ',')]
        q: Vec<u64>,
        /// Skip the Heegner point and Gross–Zagier check.
        #[arg(long)]
        skip_heegner: bool,
    },
    /// L(E,1)/Ω, or L'(E,1) when the root number is −1.
    Lvalue {
        #[command(flatten)]
        c: CurveArg,
    },
    /// φ-, φ'- and 2-Selmer groups with the Cassels product check.
    Descent {
        #[command(flatten)]
        c: CurveArg,
    },
    /// Heegner point z_M on E^(−pM) and the Gross–Zagier comparison.
    Heegner {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',')]
        q: Vec<u64>,
    },
    /// 2-part of the BSD formula at analytic rank 0 or 1.
    Bsd {
        #[command(flatten)]
        c: CurveArg,
        /// A non-torsion point `x,y` for rank one; searched for when absent.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Frequency of admissible primes below the bound.
    Density {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 200_000, value_parser = positive)]
        bound: u64,
    },
}

fn positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("bound must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Pass,
    Conditional,
    Fail,
}

/// Accumulates named checks; the worst one decides the exit code.
struct Checks(Vec<(String, Status, String)>);

impl Checks {
    fn new() -> Checks {
        Checks(Vec::new())
    }

    fn add(&mut self, name: &str, s: Status, detail: impl ToString) {
        self.0.push((name.to_string(), s, detail.to_string()));
    }

    fn flag(&mut self, name: &str, ok: bool, detail: impl ToString) {
        self.add(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    fn verdict(&mut self, name: &str, v: Verdict) {
        let s = match v {
            Verdict::Pass => Status::Pass,
            Verdict::ConditionalPass => Status::Conditional,
            Verdict::Fail => Status::Fail,
        };
        self.add(name, s, v);
    }

    fn worst(&self) -> Status {
        self.0.iter().map(|c| c.1).max().unwrap_or(Status::Pass)
    }

    fn node(&self) -> Node {
        Node::List(
            self.0
                .iter()
                .map(|(n, s, d)| {
                    let s = match s {
                        Status::Pass => "pass",
                        Status::Conditional => "conditional",
                        Status::Fail => "fail",
                    };
                    Rec::new().put("name", n).put("status", s).put("detail", d).build()
                })
                .collect(),
        )
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionUnreachable(_)
        | Error::Inconclusive
        | Error::NoConvergent
        | Error::RecognitionFailed(_)
        | Error::TruncationTooSmall(_) => 3,
        Error::ParseError { .. }
        | Error::SingularRecord(_)
        | Error::UnknownCurve(_)
        | Error::SingularCurve
        | Error::NotSquarefree(_)
        | Error::CompositeModulus(_)
        | Error::DividesLevel(_)
        | Error::InvalidHeegnerPrime(..)
        | Error::NotAdmissible(_)
        | Error::DuplicatePrime(_)
        | Error::NotOnCurve => 2,
        _ => 1,
    }
}

type Run = Result<(Node, Checks), Error>;

fn load_curve(spec: &str, fixture: &[CurveRecord]) -> Result<CurveQ, Error> {
    Ok(curvedb::resolve(spec, fixture)?.minimal_model())
}

fn load_twisted(c: &CurveArg, fixture: &[CurveRecord]) -> Result<CurveQ, Error> {
    let e = load_curve(&c.curve, fixture)?;
    match c.twist {
        Some(d) => Ok(e.quadratic_twist(&Integer::from(d))?.minimal_model()),
        None => Ok(e),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_table(bound: u64, fixture: &[CurveRecord]) -> Run {
    let mut checks = Checks::new();
    let mut rows = Vec::new();
    for exp in curvedb::builtin_expected() {
        let rec = curvedb::find(fixture, &exp.label).ok_or_else(|| Error::UnknownCurve(exp.label.clone()))?;
        let got = curvedb::compute_row(rec, bound)?;
        let diff = curvedb::diff_row(&got, &exp);
        checks.flag(&exp.label, diff.is_empty(), if diff.is_empty() { "match".to_string() } else { diff.join("; ") });
        rows.push(
            Rec::new()
                .put("label", &got.label)
                .put("field_e", &got.field_e)
                .put("field_eprime", &got.field_eprime)
                .put("admissible", join(&got.admissible))
                .put("heegner", join(&got.heegner))
                .build(),
        );
    }
    let exceptions: Vec<String> = curvedb::TABLE_EXCEPTIONS.iter().map(|(l, p)| format!("{} p={}", l, p)).collect();
    let node = Rec::new()
        .put("bound", bound)
        .node("rows", Node::List(rows))
        .put("documented_exceptions", exceptions.join(", "))
        .build();
    Ok((node, checks))
}

fn cmd_admissible(curve: &str, bound: u64, fixture: &[CurveRecord]) -> Run {
    let ctx = CurveContext::new(&load_curve(curve, fixture)?)?;
    let mut checks = Checks::new();
    let mut adm = Vec::new();
    let mut mismatch = Vec::new();
    for q in twistbsd::arith::primes_up_to(bound) {
        if q == 2 || ctx.conductor.is_divisible_u(q as u32) {
            continue;
        }
        match ctx.is_admissible(q) {
            Ok(true) => adm.push(Rec::new().put("q", q).put("q_star", twistbsd::arith::q_star(q)).build()),
            Ok(false) => {}
            Err(Error::PredictionMismatch(m)) => mismatch.push(m),
            Err(e) => return Err(e),
        }
    }
    checks.flag("field and trace criteria agree", mismatch.is_empty(), if mismatch.is_empty() { "all agree".into() } else { mismatch.join("; ") });
    let node = Rec::new()
        .put("curve", &ctx.curve)
        .put("conductor", &ctx.conductor)
        .put("field_e", &ctx.d_e)
        .put("field_eprime", &ctx.d_eprime)
        .put("bound", bound)
        .node("admissible", Node::List(adm))
        .build();
    Ok((node, checks))
}

fn cmd_heegner_primes(curve: &str, bound: u64, fixture: &[CurveRecord]) -> Run {
    let ctx = CurveContext::new(&load_curve(curve, fixture)?)?;
    let ps = ctx.heegner_primes(bound);
    let node = Rec::new()
        .put("curve", &ctx.curve)
        .put("conductor", &ctx.conductor)
        .put("bound", bound)
        .put("heegner_primes", join(&ps))
        .build();
    Ok((node, Checks::new()))
}

fn build_family(curve: &str, p: u64, qs: &[u64], fixture: &[CurveRecord]) -> Result<TwistFamily, Error> {
    families::build_twist_family(&load_curve(curve, fixture)?, p, qs)
}

fn gz_checks(res: &heegner::HeegnerResult, checks: &mut Checks) {
    match res.gz_residual {
        Some(r) => checks.flag("Gross–Zagier residual < 1e-8", r < 1e-8, format!("{:.3e}", r)),
        None => checks.add("Gross–Zagier residual < 1e-8", Status::Fail, "no residual"),
    }
    checks.flag("Heegner point recognised", res.rational_point.is_some(), res.rational_point.as_ref().map_or("none".into(), |p| p.to_string()));
    if let Some(d) = &res.divisibility {
        checks.flag(
            "ord2 ĥ(z_M)/ĥ(G)",
            d.ratio_ord2 == Some(d.predicted_ord2),
            format!("{} predicted {}", d.ratio_ord2.map_or("none".into(), |v| v.to_string()), d.predicted_ord2),
        );
    }
}

fn cmd_family(cfg: &Config, curve: &str, p: u64, qs: &[u64], skip_heegner: bool, fixture: &[CurveRecord]) -> Run {
    let exec = cfg.exec();
    let fam = build_family(curve, p, qs, fixture)?;
    let mut checks = Checks::new();

    let gate = families::hypothesis_gate(&fam.e, cfg.digits, cfg.manin());
    checks.flag("hypothesis gate on E", gate.passes(), if gate.passes() { "passes" } else { "fails" });

    let lm = analytic::l_value(&fam.em, cfg.digits, exec)?;
    let lm_nonzero = lm.ratio.as_ref().is_some_and(|r| *r != 0);
    checks.flag("L(E^(M),1) ≠ 0", lm_nonzero, lm.ratio.as_ref().map_or("unrecognised".into(), |r| r.to_string()));
    let lpm = analytic::l_derivative(&fam.epm, cfg.digits, exec)?;
    let lpm_nonzero = lpm.value.clone().abs() > 1e-10;
    checks.flag("L'(E^(-pM),1) ≠ 0", lpm_nonzero, twistbsd::report::fmt_real(&lpm.value, 20));
    let ranks = format!("({}, {})", if lm_nonzero { "0" } else { "?" }, if lpm_nonzero { "1" } else { "?" });

    let tam = localdata::twisted_tamagawa_report(&fam)?;
    let mism = tam.mismatches();
    checks.flag("twisted Tamagawa predictions", mism.is_empty(), if mism.is_empty() { "all hold".into() } else { mism.join("; ") });

    let sel_m = descent::two_selmer(&fam.em.two_isogeny_pair()?, Some(0), exec)?;
    checks.flag("Cassels product E^(M)", sel_m.cassels.equal, format!("{} = {}", sel_m.cassels.lhs, sel_m.cassels.rhs));

    let mut heeg = None;
    let mut generator: Option<RationalPoint> = None;
    if !skip_heegner {
        let res = heegner::gz_check(&fam, cfg.digits, exec)?;
        gz_checks(&res, &mut checks);
        generator = res.divisibility.as_ref().map(|d| d.generator.clone());
        heeg = Some(res);
    }
    let pts: Vec<RationalPoint> = generator.iter().cloned().collect();
    let sel_pm = descent::two_selmer_with_points(&fam.epm.two_isogeny_pair()?, Some(1), &pts, exec)?;
    checks.flag("Cassels product E^(-pM)", sel_pm.cassels.equal, format!("{} = {}", sel_pm.cassels.lhs, sel_pm.cassels.rhs));

    let failed = fam.failed_clauses();
    let vals = bsd::family_valuations(&fam, generator.as_ref(), cfg.digits, exec)?;
    if failed.is_empty() {
        checks.verdict("valuation predictions (strengthened hypotheses)", vals.verdict);
    }

    let mut node = Rec::new()
        .node("family", fam.to_report())
        .node("gate", gate.to_report())
        .put("rank_pattern", ranks)
        .node("l_value_m", lm.to_report())
        .node("l_derivative_minus_pm", lpm.to_report())
        .node("tamagawa", tam.to_report())
        .node("selmer_m", sel_m.to_report())
        .node("selmer_minus_pm", sel_pm.to_report())
        .node("valuations", vals.to_report())
        .put(
            "valuations_status",
            if failed.is_empty() { "checked".to_string() } else { format!("informational, hypotheses not met: {}", failed.join("; ")) },
        );
    if let Some(h) = &heeg {
        node = node.node("heegner", h.to_report());
    }
    Ok((node.put("assume_odd_manin", cfg.manin()).build(), checks))
}

fn cmd_lvalue(cfg: &Config, c: &CurveArg, fixture: &[CurveRecord]) -> Run {
    let e = load_twisted(c, fixture)?;
    let w = analytic::root_number(&e)?;
    let l = if w == 1 { analytic::l_value(&e, cfg.digits, cfg.exec())? } else { analytic::l_derivative(&e, cfg.digits, cfg.exec())? };
    let node = Rec::new().put("curve", &e).put("root_number", w).node("l", l.to_report()).build();
    Ok((node, Checks::new()))
}

/// Analytic rank when it is 0 or 1 and visibly so.
fn analytic_rank(e: &CurveQ, cfg: &Config) -> Result<Option<u32>, Error> {
    Ok(match analytic::root_number(e)? {
        1 => analytic::l_value(e, cfg.digits, cfg.exec())?.ratio.filter(|r| *r != 0).map(|_| 0),
        _ => {
            let d = analytic::l_derivative(e, cfg.digits, cfg.exec())?;
            (d.value.abs() > 1e-10).then_some(1)
        }
    })
}

fn cmd_descent(cfg: &Config, c: &CurveArg, fixture: &[CurveRecord]) -> Run {
    let e = load_twisted(c, fixture)?;
    let pair = e.two_isogeny_pair()?;
    let rank = analytic_rank(&e, cfg)?;
    let rep = descent::two_selmer(&pair, rank, cfg.exec())?;
    let mut checks = Checks::new();
    checks.flag("Cassels product", rep.cassels.equal, format!("{} = {}", rep.cassels.lhs, rep.cassels.rhs));
    let node = Rec::new().put("curve", &e).put("e_prime", &pair.eprime).node("selmer", rep.to_report()).build();
    Ok((node, checks))
}

fn cmd_heegner(cfg: &Config, curve: &str, p: u64, qs: &[u64], fixture: &[CurveRecord]) -> Run {
    let fam = build_family(curve, p, qs, fixture)?;
    let res = heegner::gz_check(&fam, cfg.digits, cfg.exec())?;
    let mut checks = Checks::new();
    gz_checks(&res, &mut checks);
    Ok((res.to_report(), checks))
}

fn parse_point(s: &str) -> Result<RationalPoint, Error> {
    let bad = || Error::ParseError { line: 0, msg: format!("point {:?} is not x,y", s) };
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: Rational = x.trim().parse().map_err(|_| bad())?;
    let y: Rational = y.trim().parse().map_err(|_| bad())?;
    Ok(RationalPoint::new(x, y))
}

fn cmd_bsd(cfg: &Config, c: &CurveArg, point: Option<&str>, fixture: &[CurveRecord]) -> Run {
    let e = load_twisted(c, fixture)?;
    let rep = match analytic::root_number(&e)? {
        1 => bsd::bsd_rank0_report(&e, cfg.digits, cfg.manin(), cfg.exec())?,
        _ => {
            let g = match point {
                Some(s) => parse_point(s)?,
                None => heegner::small_points(&e, 2000, 50)
                    .into_iter()
                    .find(|p| !e.is_torsion(p))
                    .ok_or_else(|| Error::GeneratorSearchFailed("no small non-torsion point; pass --point".into()))?,
            };
            bsd::bsd_rank1_report(&e, &g, cfg.digits, cfg.manin(), cfg.exec())?
        }
    };
    let mut checks = Checks::new();
    checks.verdict("2-part of BSD", rep.verdict);
    Ok((rep.to_report(), checks))
}

fn cmd_density(cfg: &Config, curve: &str, bound: u64, fixture: &[CurveRecord]) -> Run {
    let rep = families::admissible_density(&load_curve(curve, fixture)?, bound, cfg.exec())?;
    Ok((rep.to_report(), Checks::new()))
}

fn run(cli: &Cli) -> Run {
    let fixture = curvedb::fixture()?;
    let cfg = &cli.cfg;
    match &cli.cmd {
        Cmd::Table { bound } => cmd_table(*bound, &fixture),
        Cmd::Admissible { curve, bound } => cmd_admissible(curve, *bound, &fixture),
        Cmd::HeegnerPrimes { curve, bound } => cmd_heegner_primes(curve, *bound, &fixture),
        Cmd::Family { curve, p, q, skip_heegner } => cmd_family(cfg, curve, *p, q, *skip_heegner, &fixture),
        Cmd::Lvalue { c } => cmd_lvalue(cfg, c, &fixture),
        Cmd::Descent { c } => cmd_descent(cfg, c, &fixture),
        Cmd::Heegner { curve, p, q } => cmd_heegner(cfg, curve, *p, q, &fixture),
        Cmd::Bsd { c, point } => cmd_bsd(cfg, c, point.as_deref(), &fixture),
        Cmd::Density { curve, bound } => cmd_density(cfg, curve, *bound, &fixture),
    }
}

/// Parse `args`, run the command and return (stdout, stderr, exit code).
fn execute<I, T>(args: I) -> (String, String, u8)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => return (String::new(), e.render().to_string(), 2),
        Err(e) => return (e.render().to_string(), String::new(), 0),
    };
    match par::with_jobs(cli.cfg.jobs, || run(&cli)) {
        Ok((node, checks)) => {
            let status = checks.worst();
            let full = match node {
                Node::Record(mut items) => {
                    items.push(("checks".into(), checks.node()));
                    let s = match status {
                        Status::Pass => "pass",
                        Status::Conditional => "conditional",
                        Status::Fail => "fail",
                    };
                    items.push(("status".into(), Node::Value(s.into())));
                    Node::Record(items)
                }
                other => other,
            };
            (render(&full, cli.cfg.format), String::new(), if status == Status::Fail { 1 } else { 0 })
        }
        Err(e) => (String::new(), format!("error: {}\n", e), exit_code(&e)),
    }
}

fn main() -> ExitCode {
    let (out, err, code) = execute(std::env::args_os());
    print!("{}", out);
    eprint!("{}", err);
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;

    // commands read TWISTBSD_CURVES; tests that set it must not overlap with the rest
    static ENV: Mutex<()> = Mutex::new(());

    fn run_args(args: &[&str]) -> (String, String, u8) {
        let _g = ENV.lock().unwrap_or_else(|e| e.into_inner());
        execute(std::iter::once("twistbsd").chain(args.iter().copied()))
    }

    fn value<'a>(out: &'a str, key: &str) -> Option<&'a str> {
        out.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
    }

    #[test]
    fn table_flags_only_the_84_rows() {
        let (out, _, code) = run_args(&["table"]);
        assert_eq!(code, 1);
        let failing: Vec<&str> = out
            .lines()
            .filter(|l| l.ends_with(".status: fail"))
            .map(|l| l.trim_end_matches(".status: fail"))
            .filter_map(|k| value(&out, &format!("{}.name", k)))
            .collect();
        assert_eq!(failing, ["84a1", "84b1"]);
        assert!(out.contains("rows.0.admissible: 3 5 13 19 59 61 83 101"));
        assert!(out.contains("rows.13.admissible: 3 7 19 23 31 43 59 83"));
        assert!(out.contains("rows.14.heegner: 23 31 127 151 167 199"));
        // deterministic output
        assert_eq!(run_args(&["table"]).0, out);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["table", "--digits", "10"]).2, 2);
        assert_eq!(run_args(&["table", "--bound", "0"]).2, 2);
        assert_eq!(run_args(&["table", "-d", "30"]).2, 2);
        assert_eq!(run_args(&["lvalue", "--curve", "nope"]).2, 2);
        let (_, err, code) = run_args(&["family", "--curve", "69a1", "--p", "13"]);
        assert_eq!(code, 2);
        assert!(err.contains("13 is not a valid Heegner prime"));
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::PrecisionUnreachable("x".into())), 3);
        assert_eq!(exit_code(&Error::RecognitionFailed("x".into())), 3);
        assert_eq!(exit_code(&Error::UnknownCurve("x".into())), 2);
        assert_eq!(exit_code(&Error::PredictionMismatch("x".into())), 1);
    }

    #[test]
    fn lvalue_69a1() {
        let (out, _, code) = run_args(&["lvalue", "--curve", "69a1"]);
        assert_eq!(code, 0);
        assert_eq!(value(&out, "l.ratio"), Some("1/2"));
        assert_eq!(value(&out, "l.ord2"), Some("-1"));
        assert!(value(&out, "l.value").unwrap().ends_with("digits)"));
    }

    #[test]
    fn family_69a1_p11() {
        let (out, _, code) = run_args(&["family", "--curve", "69a1", "--p", "11"]);
        assert_eq!(code, 0);
        assert_eq!(value(&out, "rank_pattern"), Some("(0, 1)"));
        let res: f64 = value(&out, "heegner.gz_residual").unwrap().parse().unwrap();
        assert!(res < 1e-8);
        assert_eq!(value(&out, "heegner.rational_point"), Some("(15, 51)"));
    }

    #[test]
    fn manin_flag_downgrades_verdict() {
        let (on, _, _) = run_args(&["bsd", "--curve", "69a1"]);
        assert_eq!(value(&on, "verdict"), Some("pass"));
        let (off, _, code) = run_args(&["bsd", "--curve", "69a1", "--no-assume-odd-manin"]);
        assert_eq!(code, 0);
        assert_eq!(value(&off, "verdict"), Some("conditional-pass"));
        assert_eq!(value(&off, "status"), Some("conditional"));
    }

    #[test]
    fn bsd_rank_one_twist() {
        let (out, _, code) = run_args(&["bsd", "--curve", "69a1", "--twist", "-11"]);
        assert_eq!(code, 0);
        assert_eq!(value(&out, "analytic_rank"), Some("1"));
        assert_eq!(value(&out, "lhs_ord2"), value(&out, "rhs_ord2"));
    }

    #[test]
    fn listings() {
        let (out, _, _) = run_args(&["admissible", "--curve", "ns73", "--bound", "104"]);
        let qs: Vec<&str> = out.lines().filter(|l| l.contains(".q: ")).map(|l| l.rsplit(": ").next().unwrap()).collect();
        assert_eq!(qs, ["7", "11", "31", "43", "47", "59", "83", "103"]);
        let (out, _, _) = run_args(&["heegner-primes", "--curve", "94a1", "--bound", "200"]);
        assert_eq!(value(&out, "heegner_primes"), Some("23 31 127 151 167 199"));
        let (out, _, _) = run_args(&["descent", "--curve", "69a1", "--jobs", "1"]);
        assert_eq!(value(&out, "selmer.sel2_dim"), Some("1"));
        let (out, _, _) = run_args(&["density", "--curve", "69a1", "--bound", "20000"]);
        let r: f64 = value(&out, "ratio_decimal").unwrap().parse().unwrap();
        assert!((r - 0.25).abs() < 0.02);
    }

    #[test]
    fn tree_format_and_custom_tables() {
        let (out, _, _) = run_args(&["lvalue", "--curve", "[1,0,1,-1,-1]", "--format", "tree"]);
        assert!(out.contains("l:\n  derivative_order: 0\n"));
        let dir = std::env::temp_dir().join(format!("twistbsd-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("curves.csv");
        std::fs::write(&path, "# custom\nmine,1,0,1,-1,-1\r\n").unwrap();
        let spec = format!("{}:2", path.display());
        assert_eq!(value(&run_args(&["lvalue", "--curve", &spec]).0, "l.ratio"), Some("1/2"));
        let out = {
            let _g = ENV.lock().unwrap_or_else(|e| e.into_inner());
            std::env::set_var(curvedb::FIXTURE_ENV, &path);
            let r = execute(["twistbsd", "lvalue", "--curve", "mine"]);
            std::env::remove_var(curvedb::FIXTURE_ENV);
            r.0
        };
        assert_eq!(value(&out, "l.ratio"), Some("1/2"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
