//! The full verification suite, shared by the `selftest` subcommand and the
//! `acceptance` test target.

use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::carlitz::{example_fn, expand_chain, rank2_coeffs, rank_upto2, Chain, RankClass, DEFAULT_RANK_CAP};
use crate::counting::{
    conjecture_scan, count_exp_linear, count_full, crt_match_count, full_range_bound, is_injective, lemma_window_bound,
    nu_p, odd_primes_in, scan_csv, window_match_count, CountQuery, ScanReport,
};
use crate::error::Result;
use crate::gf::{make_field, Fe, FieldCtx};
use crate::lincomp::blahut_check;
use crate::poly::Poly;
use crate::sweep::{sweep_rank1, sweep_rank2, CheckKind, Rank2Summary};

pub const DEFAULT_SEED: u64 = 0x5eed_0011;
pub const SCAN_LIMIT: u64 = 10_000;

const RANK1_FIELDS: [(u64, u32); 5] = [(5, 1), (3, 2), (5, 2), (3, 3), (7, 2)];
const RANK2_FIELDS: [(u64, u32); 9] = [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 3), (7, 2), (11, 2)];
const SMALL_FIELDS: [(u64, u32); 5] = [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1)];

#[derive(Clone, Debug)]
pub struct SelftestConfig {
    pub seed: u64,
    pub scan_limit: u64,
    /// Where the growth table is written; a temp file when unset.
    pub table_path: Option<PathBuf>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: DEFAULT_SEED, scan_limit: SCAN_LIMIT, table_path: None }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// The report line without timing, identical across runs.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {}", self.id, self.title, self.detail)
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.3} s)", self.line(), self.elapsed.as_secs_f64())
    }
}

pub const TITLES: [&str; 13] = [
    "nu_11 = 3 attained at gamma = 7",
    "nu_p square-root bound for all odd p up to the scan limit",
    "rank-1 weights match the four-way classification",
    "rank-2 proof cases and sharpness of the nu_p bound",
    "f_1 over F_11 and f_2 over F_121",
    "rank-2 closed form equals direct chain expansion",
    "window count bound",
    "full-range count bound",
    "CRT match-count identity",
    "linear complexity equals folded weight",
    "older weight and degree bounds on rank-2 permutations",
    "case (c) weight equals q - 2 - count_full(gamma)",
    "nu_p / ln p growth report",
];

struct Shared {
    cfg: SelftestConfig,
    scan: OnceLock<ScanReport>,
    rank2: OnceLock<(Vec<Result<Rank2Summary>>, Duration)>,
}

impl Shared {
    fn scan(&self) -> &ScanReport {
        self.scan.get_or_init(|| conjecture_scan(3, self.cfg.scan_limit))
    }

    fn rank2(&self) -> &(Vec<Result<Rank2Summary>>, Duration) {
        self.rank2.get_or_init(|| {
            let t = Instant::now();
            let out = RANK2_FIELDS
                .iter()
                .map(|&(p, n)| make_field(p, n, None).and_then(|k| sweep_rank2(&k, true)))
                .collect();
            (out, t.elapsed())
        })
    }
}

type Outcome = Result<(bool, String)>;

/// Runs every criterion in order, calling `report` as each one finishes.
pub fn run_all(cfg: &SelftestConfig, mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let shared = Shared { cfg: cfg.clone(), scan: OnceLock::new(), rank2: OnceLock::new() };
    let checks: [fn(&Shared) -> Outcome; 13] = [
        c01_nu11, c02_nu_bound, c03_rank1, c04_rank2, c05_examples, c06_closed_form, c07_window, c08_full_range,
        c09_crt, c10_blahut, c11_prior_bounds, c12_case_c, c13_growth,
    ];
    let mut results = Vec::new();
    for (i, check) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = check(&shared);
        let elapsed = t.elapsed();
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        let r = CriterionResult { id: i as u8 + 1, title: TITLES[i], passed, detail, elapsed };
        report(&r);
        results.push(r);
    }
    results
}

fn rng_for(s: &Shared, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(s.cfg.seed ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn field(p: u64, n: u32) -> Result<Arc<FieldCtx>> {
    make_field(p, n, None)
}

fn random_element(k: &FieldCtx, rng: &mut ChaCha8Rng, nonzero: bool) -> Result<Fe> {
    k.element(rng.gen_range(u64::from(nonzero)..k.q()))
}

fn c01_nu11(_: &Shared) -> Outcome {
    let t = Instant::now();
    let row = nu_p(11)?;
    let elapsed = t.elapsed();
    let ok = row.nu == 3 && row.argmax.contains(&7) && elapsed < Duration::from_millis(1);
    let fast = elapsed < Duration::from_millis(1);
    Ok((ok, format!("nu = {}, argmax = {:?}, under 1 ms: {fast}", row.nu, row.argmax)))
}

fn c02_nu_bound(s: &Shared) -> Outcome {
    let t = Instant::now();
    let scan = s.scan();
    let expected = odd_primes_in(3, s.cfg.scan_limit).len();
    let bad = scan.rows.iter().filter(|r| !r.within_bound()).count();
    let ok = bad == 0 && scan.violations.is_empty() && scan.rows.len() == expected && t.elapsed() < Duration::from_secs(600);
    Ok((ok, format!("{} primes up to {}, {} violations", scan.rows.len(), s.cfg.scan_limit, bad)))
}

fn c03_rank1(_: &Shared) -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, n) in RANK1_FIELDS {
        let summary = sweep_rank1(&field(p, n)?)?;
        ok &= summary.passed();
        parts.push(format!("q={}: {} chains, {} mismatches", summary.q, summary.chains, summary.mismatches.len()));
    }
    ok &= t.elapsed() < Duration::from_secs(60);
    Ok((ok, parts.join("; ")))
}

fn c04_rank2(s: &Shared) -> Outcome {
    let (sweeps, elapsed) = s.rank2();
    let in_time = *elapsed < Duration::from_secs(60);
    let mut ok = in_time;
    let mut parts = Vec::new();
    for sw in sweeps {
        let sw = sw.as_ref().map_err(|e| e.clone())?;
        let case_ab = sw
            .counterexamples
            .iter()
            .filter(|c| matches!(c.check, CheckKind::CaseA | CheckKind::CaseB | CheckKind::NuBound | CheckKind::Normalization))
            .count();
        let all = sw.overall();
        let min = all.min_weight.map_or("none".to_string(), |w| w.to_string());
        let sharp = match sw.sharp() {
            Some(true) => "sharp",
            Some(false) => "NOT sharp",
            None => "prime power",
        };
        ok &= case_ab == 0 && sw.sharp() != Some(false);
        parts.push(format!(
            "q={}: {} exact rank 2 of {}, min {} vs {} ({sharp}), {case_ab} violations",
            sw.q, all.exact_rank2, all.chains, min, sw.bound_nu
        ));
    }
    parts.push(format!("sweeps under 60 s: {in_time}"));
    Ok((ok, parts.join("; ")))
}

fn c05_examples(_: &Shared) -> Outcome {
    let t = Instant::now();
    let f1 = example_fn(1, 2)?;
    let rank = rank_upto2(&f1, DEFAULT_RANK_CAP)?;
    let k = f1.ctx();
    // ((2 - x)^9 + 1)^9 - 8 built from polynomial arithmetic
    let two_minus_x = Poly::linear(k, k.neg(Fe::ONE), k.embed(2));
    let chain_form = two_minus_x.pow(9).add_constant(Fe::ONE).pow(9).add_constant(k.embed(-8));
    let f2 = example_fn(2, 2)?;
    let ok = f1.weight() == 6
        && f1.is_permutation()
        && rank.rank_class == RankClass::Two
        && chain_form == f1
        && f2.weight() == 106
        && t.elapsed() < Duration::from_secs(60);
    Ok((
        ok,
        format!(
            "f_1 weight {}, permutation {}, rank {}, chain form equal {}; f_2 weight {}",
            f1.weight(),
            f1.is_permutation(),
            rank.rank_class.as_str(),
            chain_form == f1,
            f2.weight()
        ),
    ))
}

fn closed_form_mismatch(k: &Arc<FieldCtx>, a: [Fe; 4]) -> Result<bool> {
    let closed = rank2_coeffs(k, a[0], a[1], a[2], a[3])?;
    Ok(closed != expand_chain(&Chain::new(k, a.to_vec())?))
}

fn c06_closed_form(s: &Shared) -> Outcome {
    let mut parts = Vec::new();
    let mut total_bad = 0usize;
    let exhaustive: Vec<(u64, u32)> = [(3, 1), (5, 1), (7, 1), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1), (3, 2), (5, 2), (3, 3)].to_vec();
    for (p, n) in exhaustive {
        let k = field(p, n)?;
        let outer: Vec<(Fe, Fe)> = k.nonzero_elements().flat_map(|a0| k.elements().map(move |a1| (a0, a1))).collect();
        let bad: usize = outer
            .par_iter()
            .map(|&(a0, a1)| {
                let mut bad = 0;
                for a2 in k.nonzero_elements() {
                    for a3 in k.elements() {
                        bad += usize::from(closed_form_mismatch(&k, [a0, a1, a2, a3])?);
                    }
                }
                Ok(bad)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        total_bad += bad;
        parts.push(format!("q={} exhaustive: {bad}", k.q()));
    }
    let mut rng = rng_for(s, 6);
    for (p, n) in [(7, 2), (3, 4), (11, 2)] {
        let k = field(p, n)?;
        let mut bad = 0;
        for _ in 0..1000 {
            let a = [
                random_element(&k, &mut rng, true)?,
                random_element(&k, &mut rng, false)?,
                random_element(&k, &mut rng, true)?,
                random_element(&k, &mut rng, false)?,
            ];
            bad += usize::from(closed_form_mismatch(&k, a)?);
        }
        total_bad += bad;
        parts.push(format!("q={} random 1000: {bad}", k.q()));
    }
    Ok((total_bad == 0, format!("mismatches: {}", parts.join(", "))))
}

fn c07_window(_: &Shared) -> Outcome {
    let t = Instant::now();
    let mut queries = 0u64;
    let mut violations = 0u64;
    for p in [5u64, 7, 11, 13, 17, 19] {
        let k = field(p, 1)?;
        let bounds: Vec<_> = (3..=p).map(lemma_window_bound).collect::<Result<_>>()?;
        for gamma in k.elements() {
            for c in k.nonzero_elements() {
                for d in k.elements() {
                    for l in 0..p {
                        for m in 3..=p {
                            let n = count_exp_linear(&CountQuery { ctx: &k, gamma, c, d, l, m })?;
                            queries += 1;
                            violations += u64::from(!bounds[(m - 3) as usize].admits(n as i64));
                        }
                    }
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = violations == 0 && elapsed < Duration::from_secs(60);
    Ok((ok, format!("{queries} windows, {violations} violations")))
}

fn c08_full_range(_: &Shared) -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut violations = 0;
    for (p, n) in [(3, 2), (5, 2), (3, 3), (7, 2), (3, 4), (11, 2)] {
        let k = field(p, n)?;
        let bound = full_range_bound(&k);
        let counts: Vec<u64> =
            k.elements().filter(|&g| g != Fe::ONE).map(|g| count_full(&k, g)).collect::<Result<_>>()?;
        let max = counts.iter().copied().max().unwrap_or(0);
        let bad = counts.iter().filter(|&&c| !bound.admits(c as i64)).count();
        violations += bad;
        parts.push(format!("q={}: max {max} <= {:.3}", k.q(), bound.to_f64()));
    }
    let ok = violations == 0 && t.elapsed() < Duration::from_secs(60);
    Ok((ok, format!("{}; {violations} violations", parts.join(", "))))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn c09_crt(s: &Shared) -> Outcome {
    let mut rng = rng_for(s, 9);
    let (mut pairs, mut injective, mut violations) = (0, 0, 0);
    while pairs < 1000 {
        let n1 = rng.gen_range(1..=30usize);
        let n2 = rng.gen_range(1..=30usize);
        if gcd(n1, n2) != 1 {
            continue;
        }
        pairs += 1;
        let inject = rng.gen_bool(0.4);
        let (g1, g2): (Vec<u32>, Vec<u32>) = if inject {
            let mut pool: Vec<u32> = (0..40).collect();
            let mut draw = |n: usize, rng: &mut ChaCha8Rng| {
                for i in 0..n {
                    let j = rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
                pool[..n].to_vec()
            };
            let a = draw(n1, &mut rng);
            let b = draw(n2, &mut rng);
            (a, b)
        } else {
            let alphabet = rng.gen_range(1..=6u32);
            ((0..n1).map(|_| rng.gen_range(0..alphabet)).collect(), (0..n2).map(|_| rng.gen_range(0..alphabet)).collect())
        };
        // direct count against the multiplicity sum, done inside
        if crt_match_count(&g1, &g2).is_err() {
            violations += 1;
        }
        if is_injective(&g1) && is_injective(&g2) {
            injective += 1;
            let k = rng.gen_range(0..100u64);
            let l = rng.gen_range(1..=3u64);
            if window_match_count(&g1, &g2, k, l) > l * n1.min(n2) as u64 {
                violations += 1;
            }
        }
    }
    Ok((violations == 0, format!("{pairs} pairs ({injective} injective), {violations} violations")))
}

fn all_short_chains(k: &Arc<FieldCtx>) -> Vec<Vec<Fe>> {
    let mut out = Vec::new();
    for a0 in k.nonzero_elements() {
        for a1 in k.elements() {
            out.push(vec![a0, a1]);
            for a2 in k.elements() {
                out.push(vec![a0, a1, a2]);
                if !a2.is_zero() {
                    for a3 in k.elements() {
                        out.push(vec![a0, a1, a2, a3]);
                    }
                }
            }
        }
    }
    out
}

fn c10_blahut(s: &Shared) -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut violations = 0;
    for (p, n) in SMALL_FIELDS {
        let k = field(p, n)?;
        let chains = all_short_chains(&k);
        let bad: usize = chains
            .par_iter()
            .map(|a| {
                let f = expand_chain(&Chain::new(&k, a.clone())?);
                Ok(usize::from(!blahut_check(&f, DEFAULT_RANK_CAP, true)?.equal))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        violations += bad;
        parts.push(format!("q={}: {} chains", k.q(), chains.len()));
    }
    let mut rng = rng_for(s, 10);
    for (p, n) in [(5, 1), (3, 2), (11, 1), (13, 1), (5, 2)] {
        let k = field(p, n)?;
        for _ in 0..500 {
            let coeffs = (0..k.q()).map(|_| random_element(&k, &mut rng, false)).collect::<Result<Vec<_>>>()?;
            let f = Poly::from_coeffs(&k, coeffs)?;
            violations += usize::from(!blahut_check(&f, DEFAULT_RANK_CAP, true)?.equal);
        }
    }
    parts.push("500 random per q in 5, 9, 11, 13, 25".into());
    let ok = violations == 0 && t.elapsed() < Duration::from_secs(60);
    Ok((ok, format!("{}; {violations} violations", parts.join(", "))))
}

fn c11_prior_bounds(s: &Shared) -> Outcome {
    let (sweeps, _) = s.rank2();
    let mut checked = 0;
    let mut violations = 0;
    for sw in sweeps {
        let sw = sw.as_ref().map_err(|e| e.clone())?;
        checked += sw.overall().exact_rank2;
        violations += sw
            .counterexamples
            .iter()
            .filter(|c| matches!(c.check, CheckKind::WeightFromRank | CheckKind::DegreeRank))
            .count();
    }
    Ok((violations == 0, format!("{checked} exact rank-2 instances, {violations} violations")))
}

fn c12_case_c(s: &Shared) -> Outcome {
    let (sweeps, _) = s.rank2();
    let mut chains = 0;
    let mut violations = 0;
    for sw in sweeps {
        let sw = sw.as_ref().map_err(|e| e.clone())?;
        if ![5, 7, 9, 11, 13, 25].contains(&sw.q) {
            continue;
        }
        chains += sw.cases[2].chains;
        violations += sw.counterexamples.iter().filter(|c| c.check == CheckKind::CaseC).count();
    }
    Ok((violations == 0, format!("{chains} case (c) chains, {violations} mismatches")))
}

fn c13_growth(s: &Shared) -> Outcome {
    let scan = s.scan();
    let path = s
        .cfg
        .table_path
        .clone()
        .unwrap_or_else(|| std::env::temp_dir().join(format!("nu_scan_{}.csv", s.cfg.scan_limit)));
    std::fs::write(&path, scan_csv(&scan.rows)).map_err(|e| crate::Error::Io(format!("{}: {e}", path.display())))?;
    let bound_holds = scan.violations.is_empty() && scan.rows.iter().all(|r| r.within_bound());
    let max = match scan.max_ratio {
        Some((p, r)) => format!("max nu_p/ln p = {r:.4} at p = {p}"),
        None => "no rows".into(),
    };
    Ok((bound_holds && scan.max_ratio.is_some(), format!("{max}; {} rows written to {}", scan.rows.len(), path.display())))
}
