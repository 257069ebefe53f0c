//! Solution counts for `gamma^{i+1} = i c + d` over windows and full ranges,
//! the extremal count `nu_p`, and the CRT match-counting identity.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{is_prime, Fe, FieldCtx};
use crate::surd::{ratio, Surd};

#[derive(Clone, Copy, Debug)]
pub struct CountQuery<'a> {
    pub ctx: &'a FieldCtx,
    pub gamma: Fe,
    pub c: Fe,
    pub d: Fe,
    /// First index of the window.
    pub l: u64,
    /// The window is `[l, l + m]`.
    pub m: u64,
}

/// `|{l <= i <= l + m : gamma^{i+1} = i c + d}|`, one multiplication per step.
pub fn count_exp_linear(qr: &CountQuery) -> Result<u64> {
    if qr.c.is_zero() {
        return Err(Error::ZeroC);
    }
    let k = qr.ctx;
    let mut pw = k.pow(qr.gamma, qr.l + 1);
    let mut count = 0;
    for i in qr.l..=qr.l + qr.m {
        let rhs = k.add(k.mul(k.embed(i as i64), qr.c), qr.d);
        if pw == rhs {
            count += 1;
        }
        pw = k.mul(pw, qr.gamma);
    }
    Ok(count)
}

/// `sqrt(3M/2 - 39/16) + 5/4`.
pub fn lemma_window_bound(m: u64) -> Result<Surd> {
    if m < 3 {
        return Err(Error::BadRange(format!("window length M = {m} < 3")));
    }
    Ok(Surd::new(ratio(5, 4), 1, ratio(24 * m as i128 - 39, 16)))
}

/// `q/p + sqrt(3p/2 - 39/16) + 1/4`.
pub fn full_range_bound(ctx: &FieldCtx) -> Surd {
    let (q, p) = (ctx.q() as i128, ctx.p() as i128);
    Surd::new(ratio(4 * (q / p) + 1, 4), 1, ratio(24 * p - 39, 16))
}

/// `|{1 <= i <= q-2 : gamma^{i+1} = i (1 - gamma) + 1}|`.
pub fn count_full(ctx: &FieldCtx, gamma: Fe) -> Result<u64> {
    if gamma == Fe::ONE {
        return Err(Error::GammaOne);
    }
    let q = ctx.q();
    if q < 3 {
        return Ok(0);
    }
    let c = ctx.sub(Fe::ONE, gamma);
    count_exp_linear(&CountQuery { ctx, gamma, c, d: Fe::ONE, l: 1, m: q - 3 })
}

const LANES: usize = 16;

/// `count_full` for every `gamma` in F_p at once (entry 1 is left at 0).
/// Independent gammas run in lanes with Shoup multiplication so the inner
/// loop vectorizes; primes below 2^16 use 32-bit lanes.
pub fn prime_field_counts(p: u64) -> Vec<u32> {
    assert!(p < 1 << 31, "prime too large for the counting kernel");
    let gammas: Vec<u64> = (0..p).filter(|&g| g != 1).collect();
    let run = |gs: &[u64]| if p < 1 << 16 { count_lanes_narrow(p as u32, gs) } else { count_lanes_wide(p, gs) };
    let chunks: Vec<[u32; LANES]> = if p < 512 {
        gammas.chunks(LANES).map(run).collect()
    } else {
        gammas.par_chunks(LANES).map(run).collect()
    };
    let mut counts = vec![0u32; p as usize];
    for (gs, cs) in gammas.chunks(LANES).zip(chunks) {
        for (&g, &c) in gs.iter().zip(cs.iter()) {
            counts[g as usize] = c;
        }
    }
    counts
}

fn count_lanes_narrow(p: u32, gs: &[u64]) -> [u32; LANES] {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            return unsafe { count_lanes_narrow_avx2(p, gs) };
        }
    }
    count_lanes_narrow_generic(p, gs)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn count_lanes_narrow_avx2(p: u32, gs: &[u64]) -> [u32; LANES] {
    count_lanes_narrow_generic(p, gs)
}

// x * g mod p as x*g - floor(x * floor(g 2^16 / p) / 2^16) * p, valid for p < 2^16.
// Every intermediate fits in u32; the wrapping ops only drop overflow checks.
#[inline(always)]
fn count_lanes_narrow_generic(p: u32, gs: &[u64]) -> [u32; LANES] {
    let mut g = [0u32; LANES];
    let mut w = [0u32; LANES];
    let mut pw = [0u32; LANES];
    let mut rhs = [0u32; LANES];
    let mut step = [0u32; LANES];
    let mut cnt = [0u32; LANES];
    for (j, &gj) in gs.iter().enumerate() {
        let gj = gj as u32;
        g[j] = gj;
        w[j] = (gj << 16) / p;
        pw[j] = gj * gj % p;
        step[j] = (1 + p - gj) % p;
        rhs[j] = (step[j] + 1) % p;
    }
    for _ in 1..=p.saturating_sub(2) {
        for j in 0..LANES {
            cnt[j] = cnt[j].wrapping_add((pw[j] == rhs[j]) as u32);
            let qh = pw[j].wrapping_mul(w[j]) >> 16;
            let r = pw[j].wrapping_mul(g[j]).wrapping_sub(qh.wrapping_mul(p));
            pw[j] = if r >= p { r - p } else { r };
            let s = rhs[j].wrapping_add(step[j]);
            rhs[j] = if s >= p { s - p } else { s };
        }
    }
    for c in cnt.iter_mut().skip(gs.len()) {
        *c = 0;
    }
    cnt
}

fn count_lanes_wide(p: u64, gs: &[u64]) -> [u32; LANES] {
    let mut g = [0u64; LANES];
    let mut w = [0u64; LANES];
    let mut pw = [0u64; LANES];
    let mut rhs = [0u64; LANES];
    let mut step = [0u64; LANES];
    let mut cnt = [0u32; LANES];
    for (j, &gj) in gs.iter().enumerate() {
        g[j] = gj;
        w[j] = (gj << 32) / p;
        pw[j] = gj * gj % p;
        step[j] = (1 + p - gj) % p;
        rhs[j] = (step[j] + 1) % p;
    }
    for _ in 1..=p.saturating_sub(2) {
        for j in 0..LANES {
            cnt[j] = cnt[j].wrapping_add((pw[j] == rhs[j]) as u32);
            let qh = pw[j].wrapping_mul(w[j]) >> 32;
            let r = pw[j].wrapping_mul(g[j]).wrapping_sub(qh.wrapping_mul(p));
            pw[j] = if r >= p { r - p } else { r };
            let s = rhs[j].wrapping_add(step[j]);
            rhs[j] = if s >= p { s - p } else { s };
        }
    }
    // Padding lanes carry gamma = 0 and are discarded.
    for c in cnt.iter_mut().skip(gs.len()) {
        *c = 0;
    }
    cnt
}

#[derive(Clone, Debug, Serialize)]
pub struct NuRow {
    pub p: u64,
    pub nu: u64,
    pub argmax: Vec<u64>,
    pub bound: Surd,
    pub ratio_log: f64,
}

impl NuRow {
    pub fn within_bound(&self) -> bool {
        self.bound.admits(self.nu as i64)
    }

    pub fn bound_formula(&self) -> String {
        format!("sqrt({})+5/4", self.bound.radicand())
    }
}

/// Maximum of the full-range count over `gamma` in F_p minus {1}.
pub fn nu_p(p: u64) -> Result<NuRow> {
    if !is_prime(p) {
        return Err(Error::CompositeP(p));
    }
    if p == 2 {
        return Err(Error::EvenCharacteristic(2));
    }
    let counts = prime_field_counts(p);
    let nu = counts.iter().copied().max().unwrap_or(0) as u64;
    let argmax = if nu == 0 {
        (0..p).filter(|&g| g != 1).collect()
    } else {
        (0..p).filter(|&g| g != 1 && counts[g as usize] as u64 == nu).collect()
    };
    Ok(NuRow {
        p,
        nu,
        argmax,
        bound: lemma_window_bound(p)?,
        ratio_log: nu as f64 / (p as f64).ln(),
    })
}

/// Match count of two periodic sequences over one joint period `[1, n1 n2]`,
/// computed directly and as `sum_u m1(u) m2(u)`; errors if they differ.
pub fn crt_match_count<T: Eq + Hash>(g1: &[T], g2: &[T]) -> Result<u64> {
    let (n1, n2) = (g1.len(), g2.len());
    if n1 == 0 || n2 == 0 || gcd(n1 as u64, n2 as u64) != 1 {
        return Err(Error::NonCoprimePeriods { n1, n2 });
    }
    let direct = window_match_count(g1, g2, 0, 1);
    let mut m1: HashMap<&T, u64> = HashMap::new();
    for u in g1 {
        *m1.entry(u).or_default() += 1;
    }
    let mut by_value = 0u64;
    for u in g2 {
        by_value += m1.get(u).copied().unwrap_or(0);
    }
    if direct != by_value {
        return Err(Error::Verification(format!("direct count {direct} != multiplicity sum {by_value}")));
    }
    Ok(direct)
}

/// `|{i in [k+1, k + l n1 n2] : g1(i) = g2(i)}|` where `g(i) = list[(i-1) mod n]`.
pub fn window_match_count<T: Eq>(g1: &[T], g2: &[T], k: u64, l: u64) -> u64 {
    let (n1, n2) = (g1.len() as u64, g2.len() as u64);
    (k + 1..=k + l * n1 * n2)
        .filter(|&i| g1[((i - 1) % n1) as usize] == g2[((i - 1) % n2) as usize])
        .count() as u64
}

pub fn is_injective<T: Eq + Hash>(g: &[T]) -> bool {
    let mut seen = std::collections::HashSet::new();
    g.iter().all(|u| seen.insert(u))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn odd_primes_in(p_min: u64, p_max: u64) -> Vec<u64> {
    if p_max < 3 || p_min > p_max {
        return Vec::new();
    }
    let n = p_max as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (p_min.max(3)..=p_max).filter(|&p| sieve[p as usize]).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub rows: Vec<NuRow>,
    /// Prime attaining the largest `nu_p / ln p`, with that ratio.
    pub max_ratio: Option<(u64, f64)>,
    /// Primes whose `nu_p` exceeds the bound.
    pub violations: Vec<u64>,
}

/// `nu_p` for every odd prime in `[p_min, p_max]`, in ascending order.
pub fn conjecture_scan(p_min: u64, p_max: u64) -> ScanReport {
    let primes = odd_primes_in(p_min, p_max);
    let rows: Vec<NuRow> = primes
        .par_iter()
        .map(|&p| nu_p(p).expect("odd prime"))
        .collect();
    let max_ratio = rows
        .iter()
        .map(|r| (r.p, r.ratio_log))
        .fold(None, |best: Option<(u64, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        });
    let violations = rows.iter().filter(|r| !r.within_bound()).map(|r| r.p).collect();
    ScanReport { rows, max_ratio, violations }
}

/// CSV with columns `p,nu,argmax_list,bound_num,bound_formula,ratio_log`.
pub fn scan_csv(rows: &[NuRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "nu", "argmax_list", "bound_num", "bound_formula", "ratio_log"])
        .expect("in-memory write");
    for r in rows {
        let argmax: Vec<String> = r.argmax.iter().map(|g| g.to_string()).collect();
        w.write_record([
            r.p.to_string(),
            r.nu.to_string(),
            argmax.join(";"),
            format!("{:.6}", r.bound.to_f64()),
            r.bound_formula(),
            format!("{:.6}", r.ratio_log),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cmp::Ordering;

    fn naive_count(k: &FieldCtx, gamma: Fe, c: Fe, d: Fe, l: u64, m: u64) -> u64 {
        (l..=l + m)
            .filter(|&i| k.pow(gamma, i + 1) == k.add(k.mul(k.embed(i as i64), c), d))
            .count() as u64
    }

    #[test]
    fn window_examples() {
        let k = make_field(5, 1, None).unwrap();
        let e = |x| k.embed(x);
        let q = |g, c, d, l, m| CountQuery { ctx: &k, gamma: e(g), c: e(c), d: e(d), l, m };
        assert_eq!(count_exp_linear(&q(0, 1, 0, 1, 3)).unwrap(), 0);
        assert_eq!(count_exp_linear(&q(3, -2, 1, 1, 2)).unwrap(), 2);
        // i = 1 solves it: 2^2 = 4 = 1*3 + 1
        assert_eq!(count_exp_linear(&q(2, 3, 1, 1, 2)).unwrap(), 1);
        assert_eq!(count_exp_linear(&q(2, 3, 1, 2, 1)).unwrap(), 0);
        assert_eq!(count_exp_linear(&q(2, 0, 1, 1, 2)).unwrap_err(), Error::ZeroC);
    }

    #[test]
    fn incremental_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fields: Vec<_> = [(5, 1), (7, 1), (3, 2), (11, 1), (5, 2), (3, 3)]
            .iter()
            .map(|&(p, n)| make_field(p, n, None).unwrap())
            .collect();
        for _ in 0..10_000 {
            let k = &fields[rng.gen_range(0..fields.len())];
            let gamma = k.element(rng.gen_range(0..k.q())).unwrap();
            let c = k.element(rng.gen_range(1..k.q())).unwrap();
            let d = k.element(rng.gen_range(0..k.q())).unwrap();
            let l = rng.gen_range(0..40);
            let m = rng.gen_range(0..40);
            let qr = CountQuery { ctx: k, gamma, c, d, l, m };
            assert_eq!(count_exp_linear(&qr).unwrap(), naive_count(k, gamma, c, d, l, m));
        }
    }

    #[test]
    fn inclusive_window_can_exceed_bound() {
        // [1, 4] holds M + 1 = 4 indices and three solutions: i = 1, 3, 4
        let k = make_field(5, 1, None).unwrap();
        let q = CountQuery { ctx: &k, gamma: k.embed(2), c: k.embed(1), d: k.embed(3), l: 1, m: 3 };
        assert_eq!(count_exp_linear(&q).unwrap(), 3);
        assert!(!lemma_window_bound(3).unwrap().admits(3));
    }

    #[test]
    fn m_consecutive_indices_respect_bound() {
        for p in odd_primes_in(5, 23) {
            let k = make_field(p, 1, None).unwrap();
            for m in 3..=p {
                let bound = lemma_window_bound(m).unwrap();
                for gamma in k.elements() {
                    for c in k.nonzero_elements() {
                        for d in k.elements() {
                            for l in 0..p {
                                let q = CountQuery { ctx: &k, gamma, c, d, l, m: m - 1 };
                                assert!(bound.admits(count_exp_linear(&q).unwrap() as i64), "p={p} m={m} l={l}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn window_bound_examples() {
        let b3 = lemma_window_bound(3).unwrap();
        assert!((b3.to_f64() - 2.686).abs() < 1e-3);
        assert_eq!(lemma_window_bound(11).unwrap().cmp_int(5), Ordering::Equal);
        assert_eq!(lemma_window_bound(5).unwrap().cmp_rational(ratio(7, 2)), Ordering::Equal);
        assert!(lemma_window_bound(2).is_err());
    }

    #[test]
    fn full_count_examples() {
        // gamma = 0 leaves 0 = i + 1, i.e. i = -1 mod p: no index in [1, q-2]
        // for prime fields, q/p - 1 of them for extensions.
        for (p, n) in [(5, 1), (7, 1), (3, 2), (5, 2), (3, 3)] {
            let k = make_field(p, n, None).unwrap();
            let q = k.q();
            let brute = (1..=q - 2).filter(|i| (i + 1) % p == 0).count() as u64;
            assert_eq!(count_full(&k, Fe::ZERO).unwrap(), brute);
            assert_eq!(brute, if n == 1 { 0 } else { q / p - 1 });
            assert_eq!(count_full(&k, Fe::ONE).unwrap_err(), Error::GammaOne);
        }
        let k = make_field(5, 1, None).unwrap();
        assert_eq!(count_full(&k, k.embed(3)).unwrap(), 2);
        let k9 = make_field(3, 2, None).unwrap();
        let bound = full_range_bound(&k9);
        for g in k9.elements().filter(|&g| g != Fe::ONE) {
            assert!(bound.admits(count_full(&k9, g).unwrap() as i64));
        }
    }

    #[test]
    fn kernel_matches_generic_count() {
        for p in odd_primes_in(3, 200) {
            let k = make_field(p, 1, None).unwrap();
            let fast = prime_field_counts(p);
            for g in k.elements().filter(|&g| g != Fe::ONE) {
                assert_eq!(fast[g.index() as usize] as u64, count_full(&k, g).unwrap(), "p={p} g={g:?}");
            }
        }
    }

    #[test]
    fn wide_and_narrow_lanes_agree() {
        for p in [3u64, 5, 101, 65521] {
            let gs: Vec<u64> = (0..p).filter(|&g| g != 1).take(2 * LANES).collect();
            for chunk in gs.chunks(LANES) {
                assert_eq!(count_lanes_wide(p, chunk), count_lanes_narrow(p as u32, chunk), "p={p}");
            }
        }
    }

    #[test]
    fn nu_examples() {
        let r = nu_p(11).unwrap();
        assert_eq!(r.nu, 3);
        assert!(r.argmax.contains(&7));
        let r3 = nu_p(3).unwrap();
        assert_eq!(r3.nu, 0);
        assert!((r3.bound.to_f64() - (2.0625f64.sqrt() + 1.25)).abs() < 1e-12);
        let r5 = nu_p(5).unwrap();
        assert_eq!((r5.nu, r5.argmax.clone()), (2, vec![3]));
        assert_eq!(nu_p(7).unwrap().nu, 1);
        assert_eq!(nu_p(13).unwrap().nu, 2);
        assert_eq!(nu_p(9).unwrap_err(), Error::CompositeP(9));
        assert_eq!(nu_p(2).unwrap_err(), Error::EvenCharacteristic(2));
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_match_count(&[7, 7], &[7, 7, 7]).unwrap(), 6);
        assert_eq!(crt_match_count(&[1, 2, 3], &[4, 5, 6, 7]).unwrap(), 0);
        assert_eq!(
            crt_match_count(&[1, 2], &[1, 2, 3, 4]).unwrap_err(),
            Error::NonCoprimePeriods { n1: 2, n2: 4 }
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let g1: Vec<u8> = (0..4).map(|_| rng.gen_range(0..5)).collect();
            let g2: Vec<u8> = (0..9).map(|_| rng.gen_range(0..5)).collect();
            let direct = (1..=36usize).filter(|&i| g1[(i - 1) % 4] == g2[(i - 1) % 9]).count() as u64;
            assert_eq!(crt_match_count(&g1, &g2).unwrap(), direct);
        }
    }

    #[test]
    fn scan_rows_and_csv() {
        let rep = conjecture_scan(3, 11);
        let ps: Vec<u64> = rep.rows.iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![3, 5, 7, 11]);
        assert_eq!(rep.rows[3].nu, 3);
        assert!(rep.violations.is_empty());
        let one = conjecture_scan(3, 3);
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.rows[0].nu, 0);
        assert!(conjecture_scan(20, 10).rows.is_empty());
        let csv = scan_csv(&rep.rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "p,nu,argmax_list,bound_num,bound_formula,ratio_log");
        assert!(csv.contains("11,3,7,5.000000,sqrt(225/16)+5/4,"));
    }
}
