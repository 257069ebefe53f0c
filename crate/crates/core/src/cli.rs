//! The `crk` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::carlitz::{
    cor_rank2_bound, example_fn, expand_chain, expand_chain_by_powers, got_bounds, rank2_coeffs, rank_upto2,
    thm_rank2_bound, Chain, ChainJson, DEFAULT_RANK_CAP,
};
use crate::counting::{
    conjecture_scan, count_exp_linear, count_full, full_range_bound, lemma_window_bound, nu_p, scan_csv, CountQuery,
};
use crate::error::Error;
use crate::gf::{Fe, FieldCtx, FieldSpec};
use crate::lincomp::{blahut_check, folded_weight};
use crate::poly::{element_from_json, element_to_json, Poly, PolyJson};
use crate::selftest::{run_all, SelftestConfig, DEFAULT_SEED, SCAN_LIMIT};
use crate::surd::Surd;
use crate::sweep::{sweep_rank1, sweep_rank2, RANK2_CSV_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "crk", version, about = "Carlitz rank, weights and solution counts over finite fields")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Largest field size accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_RANK_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct FieldOpts {
    /// Field as `p=5` or `p=3,n=2,mod=1,0,1`.
    #[arg(long, conflicts_with_all = ["p", "n"])]
    pub field: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct ChainOpts {
    #[command(flatten)]
    pub field: FieldOpts,
    /// `a0,a1,...` as integers, or a chain JSON object or file.
    #[arg(long, allow_hyphen_values = true)]
    pub chain: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Field parameters, modulus and primitive element.
    FieldInfo(FieldOpts),
    /// Reduced polynomial of a chain.
    Expand(ChainOpts),
    /// Closed-form coefficients of a length-2 chain.
    Rank2Coeffs(ChainOpts),
    /// Carlitz rank up to 2 with a witness chain.
    Rank {
        #[command(flatten)]
        field: FieldOpts,
        /// Polynomial JSON or file.
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        chain: Option<String>,
    },
    /// Weight and degree of a polynomial.
    Weight {
        #[arg(long)]
        poly: String,
    },
    /// nu_p for one odd prime.
    NuP {
        #[arg(long)]
        p: u64,
    },
    /// nu_p over a range of primes.
    ScanNu {
        /// `pmin:pmax`
        #[arg(long)]
        range: String,
    },
    /// Solutions of gamma^{i+1} = i c + d for l <= i <= l + m.
    CountWindow {
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        m: u64,
    },
    /// Solutions of gamma^{i+1} = i (1 - gamma) + 1 for 1 <= i <= q - 2.
    CountFull {
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Weight bounds for rank-1 and rank-2 permutations of a field.
    Bounds(FieldOpts),
    /// Exhaustive rank-1 weight sweep.
    SweepRank1(FieldOpts),
    /// Exhaustive rank-2 weight sweep.
    SweepRank2 {
        #[command(flatten)]
        field: FieldOpts,
        /// Visit every a0 and a3 instead of a0 = -1 with a cleared constant term.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Linear complexity of f(alpha^n) against the weight of f.
    Blahut {
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        chain: Option<String>,
        /// Compare against the raw weight without merging x^{q-1} into 1.
        #[arg(long)]
        no_fold: bool,
    },
    /// The weight family f_n over F_{11^n}.
    ExampleF11 {
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Every acceptance criterion.
    Selftest {
        /// Where to write the nu_p table.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = SCAN_LIMIT)]
        scan_limit: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FieldInfo(_) => "field-info",
            Command::Expand(_) => "expand",
            Command::Rank2Coeffs(_) => "rank2-coeffs",
            Command::Rank { .. } => "rank",
            Command::Weight { .. } => "weight",
            Command::NuP { .. } => "nu-p",
            Command::ScanNu { .. } => "scan-nu",
            Command::CountWindow { .. } => "count-window",
            Command::CountFull { .. } => "count-full",
            Command::Bounds(_) => "bounds",
            Command::SweepRank1(_) => "sweep-rank1",
            Command::SweepRank2 { .. } => "sweep-rank2",
            Command::Blahut { .. } => "blahut",
            Command::ExampleF11 { .. } => "example-f11",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// An error tied to the flag that caused it.
#[derive(Debug)]
struct CliError {
    flag: Option<&'static str>,
    err: Error,
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self.err {
            Error::Verification(_) | Error::Io(_) => EXIT_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError { flag: None, err }
    }
}

trait Flag<T> {
    fn flag(self, name: &'static str) -> Result<T, CliError>;
}

impl<T> Flag<T> for crate::Result<T> {
    fn flag(self, name: &'static str) -> Result<T, CliError> {
        self.map_err(|err| CliError { flag: Some(name), err })
    }
}

type CliResult = Result<bool, CliError>;

struct Out<'a> {
    w: &'a mut dyn Write,
    format: Format,
}

impl Out<'_> {
    fn json<T: Serialize>(&mut self, v: &T) -> Result<(), CliError> {
        let s = serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))?;
        self.line(&s)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.w, "{s}").map_err(|e| CliError::from(Error::Io(e.to_string())))
    }

    fn raw(&mut self, s: &str) -> Result<(), CliError> {
        write!(self.w, "{s}").map_err(|e| CliError::from(Error::Io(e.to_string())))
    }

    fn csv(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::from(Error::Io(e.to_string()));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::from(Error::Io(e.to_string())))?;
        self.raw(&String::from_utf8_lossy(&bytes))
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: --jobs: {e}");
            return EXIT_USAGE;
        }
    };
    let result = pool.install(|| dispatch(&cli, out, err));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            let _ = match e.flag {
                Some(f) => writeln!(err, "error: --{f}: {}", e.err),
                None => writeln!(err, "error: {}", e.err),
            };
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, w: &mut dyn Write, err: &mut (dyn Write + Send)) -> CliResult {
    let g = &cli.global;
    let mut out = Out { w, format: g.format };
    let name = cli.command.name();
    match out.format {
        Format::Json => out.json(&json!({"command": name, "seed": g.seed, "version": env!("CARGO_PKG_VERSION")}))?,
        Format::Csv => out.line(&format!("# crk {name} seed={} version={}", g.seed, env!("CARGO_PKG_VERSION")))?,
    }
    match &cli.command {
        Command::FieldInfo(f) => field_info(&mut out, &field_from(f, g.cap)?),
        Command::Expand(c) => expand(&mut out, &chain_from(&c.field, &c.chain, g.cap)?),
        Command::Rank2Coeffs(c) => rank2(&mut out, &chain_from(&c.field, &c.chain, g.cap)?),
        Command::Rank { field, poly, chain } => {
            let f = poly_or_chain(field, poly.as_deref(), chain.as_deref(), g.cap)?;
            let r = rank_upto2(&f, g.cap).flag("poly")?;
            require_json(&out, name)?;
            out.json(&json!({
                "field": f.ctx().spec_string(),
                "rank": r.rank_class.as_str(),
                "witness": r.witness.map(|c| c.to_json()),
            }))?;
            Ok(true)
        }
        Command::Weight { poly } => {
            let f = load_poly(poly, g.cap)?;
            require_json(&out, name)?;
            out.json(&json!({
                "field": f.ctx().spec_string(),
                "weight": f.weight(),
                "degree": f.degree(),
                "folded_weight": folded_weight(&f),
                "display": f.to_string(),
            }))?;
            Ok(true)
        }
        Command::NuP { p } => {
            let row = nu_p(*p).flag("p")?;
            match out.format {
                Format::Json => out.json(&row)?,
                Format::Csv => out.raw(&scan_csv(std::slice::from_ref(&row)))?,
            }
            Ok(row.within_bound())
        }
        Command::ScanNu { range } => scan(&mut out, range),
        Command::CountWindow { field, gamma, c, d, l, m } => {
            let k = field_from(field, g.cap)?;
            let q = CountQuery {
                ctx: &k,
                gamma: element_arg(&k, gamma).flag("gamma")?,
                c: element_arg(&k, c).flag("c")?,
                d: element_arg(&k, d).flag("d")?,
                l: *l,
                m: *m,
            };
            let count = count_exp_linear(&q).flag("c")?;
            // the bound is stated for 3 <= M <= p
            let bound = (*m >= 3 && *m <= k.p()).then(|| lemma_window_bound(*m)).transpose()?;
            let within = bound.as_ref().map(|b| b.admits(count as i64));
            require_json(&out, name)?;
            out.json(&json!({
                "field": k.spec_string(),
                "window": [l, l + m],
                "count": count,
                "bound": bound.as_ref().map(surd_json),
                "within_bound": within,
            }))?;
            Ok(within != Some(false))
        }
        Command::CountFull { field, gamma } => {
            let k = field_from(field, g.cap)?;
            let gamma = element_arg(&k, gamma).flag("gamma")?;
            let count = count_full(&k, gamma).flag("gamma")?;
            let bound = full_range_bound(&k);
            let within = bound.admits(count as i64);
            require_json(&out, name)?;
            out.json(&json!({
                "field": k.spec_string(),
                "gamma": element_to_json(&k, gamma),
                "count": count,
                "bound": surd_json(&bound),
                "within_bound": within,
            }))?;
            Ok(within)
        }
        Command::Bounds(f) => bounds(&mut out, &field_from(f, g.cap)?),
        Command::SweepRank1(f) => {
            let k = field_from(f, g.cap)?;
            let s = sweep_rank1(&k).flag("field")?;
            match out.format {
                Format::Json => {
                    for m in &s.mismatches {
                        out.json(&json!({ "mismatch": m }))?;
                    }
                    out.json(&json!({ "summary": s }))?;
                }
                Format::Csv => {
                    let c = s.class_counts;
                    let row = [s.q, s.p, s.chains, c[0], c[1], c[2], c[3], s.mismatches.len() as u64];
                    out.csv(
                        &["q", "p", "chains", "monomial", "monomial_plus_constant", "constant_cancelled", "full", "mismatches"],
                        &[row.iter().map(|v| v.to_string()).collect()],
                    )?;
                }
            }
            Ok(s.passed())
        }
        Command::SweepRank2 { field, no_normalize } => {
            let k = field_from(field, g.cap)?;
            let s = sweep_rank2(&k, !no_normalize).flag("field")?;
            match out.format {
                Format::Json => {
                    for c in &s.counterexamples {
                        out.json(&json!({ "counterexample": c }))?;
                    }
                    out.json(&json!({ "summary": s, "sharp": s.sharp() }))?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = s.csv_rows().into_iter().map(|r| r.to_vec()).collect();
                    out.csv(&RANK2_CSV_HEADER, &rows)?;
                }
            }
            Ok(s.passed())
        }
        Command::Blahut { field, poly, chain, no_fold } => {
            let f = poly_or_chain(field, poly.as_deref(), chain.as_deref(), g.cap)?;
            let r = blahut_check(&f, g.cap, !no_fold).flag("cap")?;
            require_json(&out, name)?;
            out.json(&json!({
                "field": f.ctx().spec_string(),
                "poly": f.to_json(),
                "fold": !no_fold,
                "lc": r.lc,
                "folded_weight": r.folded_weight,
                "equal": r.equal,
            }))?;
            Ok(r.equal)
        }
        Command::ExampleF11 { n } => example(&mut out, *n, g.cap),
        Command::Selftest { table, scan_limit } => {
            let cfg = SelftestConfig { seed: g.seed, scan_limit: *scan_limit, table_path: table.clone() };
            let mut rows = Vec::new();
            let results = run_all(&cfg, |r| {
                let _ = writeln!(err, "{r}");
                if out.format == Format::Json {
                    let _ = out.json(&json!({"id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail}));
                }
                rows.push(vec![r.id.to_string(), r.title.to_string(), r.passed.to_string(), r.detail.clone()]);
            });
            if out.format == Format::Csv {
                out.csv(&["id", "title", "passed", "detail"], &rows)?;
            }
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

fn require_json(out: &Out, name: &str) -> Result<(), CliError> {
    if out.format == Format::Csv {
        return Err(CliError { flag: Some("format"), err: Error::BadParam(format!("csv output is not available for {name}")) });
    }
    Ok(())
}

fn surd_json(s: &Surd) -> Value {
    json!({ "exact": s.to_string(), "value": s.to_f64() })
}

fn field_from(f: &FieldOpts, cap: u64) -> Result<Arc<FieldCtx>, CliError> {
    let (spec, flag) = match (&f.field, f.p) {
        (Some(s), _) => (FieldSpec::parse(s).flag("field")?, "field"),
        (None, Some(p)) => (FieldSpec { p, n: f.n.unwrap_or(1), modulus: None }, "p"),
        (None, None) => {
            return Err(CliError { flag: Some("field"), err: Error::BadParam("give --field or --p".into()) });
        }
    };
    let q = (spec.p as u128).checked_pow(spec.n);
    if q.is_none_or(|q| q > cap as u128) {
        let q = q.map_or(u64::MAX, |q| q.min(u64::MAX as u128) as u64);
        return Err(CliError { flag: Some(flag), err: Error::FieldTooLarge { q, cap } });
    }
    spec.build().flag(flag)
}

/// Inline JSON, or the contents of a file if `arg` names one.
fn json_arg(arg: &str) -> crate::Result<Value> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

fn element_arg(k: &FieldCtx, s: &str) -> crate::Result<Fe> {
    let v: Value = serde_json::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad element {s:?}")))?;
    element_from_json(k, &v)
}

fn check_cap(ctx: &FieldCtx, cap: u64, flag: &'static str) -> Result<(), CliError> {
    if ctx.q() > cap {
        return Err(CliError { flag: Some(flag), err: Error::FieldTooLarge { q: ctx.q(), cap } });
    }
    Ok(())
}

fn chain_from(f: &FieldOpts, arg: &str, cap: u64) -> Result<Chain, CliError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') || Path::new(trimmed).is_file() {
        let j: ChainJson = serde_json::from_value(json_arg(trimmed).flag("chain")?)
            .map_err(|e| CliError { flag: Some("chain"), err: Error::Parse(e.to_string()) })?;
        let ch = Chain::from_json(&j).flag("chain")?;
        check_cap(ch.ctx(), cap, "chain")?;
        return Ok(ch);
    }
    let k = field_from(f, cap)?;
    let a = trimmed
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad chain parameter {t:?}"))))
        .collect::<crate::Result<Vec<_>>>()
        .flag("chain")?;
    Chain::from_ints(&k, &a).flag("chain")
}

fn load_poly(arg: &str, cap: u64) -> Result<Poly, CliError> {
    let j: PolyJson = serde_json::from_value(json_arg(arg).flag("poly")?)
        .map_err(|e| CliError { flag: Some("poly"), err: Error::Parse(e.to_string()) })?;
    let ctx = FieldSpec::parse(&j.field).and_then(|s| s.build()).flag("poly")?;
    check_cap(&ctx, cap, "poly")?;
    Poly::from_json_in(&ctx, &j).flag("poly")
}

fn poly_or_chain(f: &FieldOpts, poly: Option<&str>, chain: Option<&str>, cap: u64) -> Result<Poly, CliError> {
    match (poly, chain) {
        (Some(p), None) => load_poly(p, cap),
        (None, Some(c)) => Ok(expand_chain(&chain_from(f, c, cap)?)),
        _ => Err(CliError { flag: Some("poly"), err: Error::BadParam("give exactly one of --poly and --chain".into()) }),
    }
}

fn field_info(out: &mut Out, k: &Arc<FieldCtx>) -> CliResult {
    require_json(out, "field-info")?;
    out.json(&json!({
        "field": k.spec_string(),
        "p": k.p(),
        "n": k.n(),
        "q": k.q(),
        "modulus": k.modulus(),
        "primitive": element_to_json(k, k.primitive_element()),
        "odd_characteristic": k.p() % 2 == 1,
    }))?;
    Ok(true)
}

fn expand(out: &mut Out, ch: &Chain) -> CliResult {
    require_json(out, "expand")?;
    let f = expand_chain(ch);
    let by_powers = expand_chain_by_powers(ch);
    if f != by_powers {
        out.json(&json!({
            "counterexample": {"chain": ch.to_json(), "interpolated": f.to_json(), "by_powers": by_powers.to_json()}
        }))?;
        return Ok(false);
    }
    out.json(&json!({
        "chain": ch.to_json(),
        "poly": f.to_json(),
        "display": f.to_string(),
        "weight": f.weight(),
        "degree": f.degree(),
        "permutation": f.is_permutation(),
    }))?;
    Ok(true)
}

fn rank2(out: &mut Out, ch: &Chain) -> CliResult {
    require_json(out, "rank2-coeffs")?;
    let a = ch.params();
    if a.len() != 4 {
        return Err(CliError { flag: Some("chain"), err: Error::BadChain(format!("need 4 parameters, got {}", a.len())) });
    }
    let f = rank2_coeffs(ch.ctx(), a[0], a[1], a[2], a[3]).flag("chain")?;
    let direct = expand_chain(ch);
    if f != direct {
        out.json(&json!({
            "counterexample": {"chain": ch.to_json(), "closed_form": f.to_json(), "direct": direct.to_json()}
        }))?;
        return Ok(false);
    }
    out.json(&json!({
        "chain": ch.to_json(),
        "poly": f.to_json(),
        "display": f.to_string(),
        "weight": f.weight(),
    }))?;
    Ok(true)
}

fn scan(out: &mut Out, range: &str) -> CliResult {
    let bad = || CliError { flag: Some("range"), err: Error::Parse(format!("expected pmin:pmax, got {range:?}")) };
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi || hi >= 1 << 31 {
        return Err(CliError { flag: Some("range"), err: Error::BadRange(format!("{lo}:{hi}")) });
    }
    let report = conjecture_scan(lo, hi);
    match out.format {
        Format::Json => {
            for r in &report.rows {
                out.json(r)?;
            }
            let max = report.max_ratio.map(|(p, r)| json!({"p": p, "ratio_log": r}));
            out.json(&json!({"summary": {"rows": report.rows.len(), "max_ratio": max, "violations": report.violations}}))?;
        }
        Format::Csv => out.raw(&scan_csv(&report.rows))?,
    }
    Ok(report.violations.is_empty())
}

fn bounds(out: &mut Out, k: &Arc<FieldCtx>) -> CliResult {
    require_json(out, "bounds")?;
    k.require_odd().flag("field")?;
    let (q, p) = (k.q(), k.p());
    let nu = nu_p(p).flag("field")?;
    let (_, prior) = got_bounds(0, q, 2);
    out.json(&json!({
        "field": k.spec_string(),
        "q": q,
        "p": p,
        "nu_p": nu.nu,
        "rank1_weights": [1, 2, q - q / p - 1, q - q / p],
        "rank2_surd_bound": surd_json(&thm_rank2_bound(k)?),
        "rank2_nu_bound": cor_rank2_bound(k, nu.nu)?,
        "rank2_prior_weight_bound": prior.to_string(),
        "full_range_count_bound": surd_json(&full_range_bound(k)),
        "nu_p_bound": surd_json(&nu.bound),
    }))?;
    Ok(true)
}

fn example(out: &mut Out, n: u32, cap: u64) -> CliResult {
    require_json(out, "example-f11")?;
    let q = 11u64.checked_pow(n).filter(|&q| q <= cap);
    let Some(q) = q else {
        return Err(CliError { flag: Some("n"), err: Error::FieldTooLarge { q: 11u64.saturating_pow(n), cap } });
    };
    let f = match example_fn(n, n) {
        Ok(f) => f,
        Err(e @ Error::Verification(_)) => {
            out.json(&json!({"counterexample": {"n": n, "error": e.to_string()}}))?;
            return Ok(false);
        }
        Err(e) => return Err(CliError { flag: Some("n"), err: e }),
    };
    let rank = rank_upto2(&f, cap)?;
    out.json(&json!({
        "n": n,
        "q": q,
        "weight": f.weight(),
        "expected_weight": q - q / 11 - 4,
        "permutation": f.is_permutation(),
        "rank": rank.rank_class.as_str(),
        "chain": Chain::from_ints(f.ctx(), &[-1, 2, 1, -8])?.to_json(),
        "poly": f.to_json(),
    }))?;
    Ok(true)
}
