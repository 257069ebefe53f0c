//! Exhaustive sweeps over rank-1 and rank-2 chain parameters.
//!
//! Work is split over the outer parameter with rayon and merged back in
//! parameter order, so the reports do not depend on the worker count.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::carlitz::{
    cor_rank2_bound, degree_rank_check, got_bounds, got_eligible, normalizing_a3, rank1_weight, rank2_coeffs,
    rank_at_most1, thm_rank2_bound, Chain, ChainJson, Rank1Class,
};
use crate::counting::{count_full, nu_p};
use crate::error::Result;
use crate::gf::{Fe, FieldCtx};
use crate::poly::Poly;
use crate::surd::{Rational, Surd};

#[derive(Clone, Debug, Serialize)]
pub struct Rank1Mismatch {
    pub chain: ChainJson,
    pub class: Rank1Class,
    pub weight: u64,
    pub predicted: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rank1Summary {
    pub q: u64,
    pub p: u64,
    pub chains: u64,
    /// Monomial, monomial plus constant, constant cancelled, full.
    pub class_counts: [u64; 4],
    pub mismatches: Vec<Rank1Mismatch>,
}

impl Rank1Summary {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Every `(a_0 x + a_1)^{q-2} + a_2` with `a_0 != 0`: the weight must be one
/// of `1, 2, q - q/p - 1, q - q/p` and match the class prediction.
pub fn sweep_rank1(ctx: &Arc<FieldCtx>) -> Result<Rank1Summary> {
    ctx.require_odd()?;
    let (q, p) = (ctx.q(), ctx.p());
    let allowed = [1, 2, q - q / p - 1, q - q / p];
    let a0s: Vec<Fe> = ctx.nonzero_elements().collect();
    let parts = a0s
        .par_iter()
        .map(|&a0| {
            let mut counts = [0u64; 4];
            let mut bad = Vec::new();
            for a1 in ctx.elements() {
                for a2 in ctx.elements() {
                    let (f, class) = rank1_weight(ctx, a0, a1, a2)?;
                    counts[class as usize] += 1;
                    let weight = f.weight() as u64;
                    let predicted = class.predicted_weight(q, p);
                    if weight != predicted || !allowed.contains(&weight) {
                        let chain = Chain::new(ctx, vec![a0, a1, a2])?.to_json();
                        bad.push(Rank1Mismatch { chain, class, weight, predicted });
                    }
                }
            }
            Ok((counts, bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Rank1Summary { q, p, chains: 0, class_counts: [0; 4], mismatches: Vec::new() };
    for (counts, bad) in parts {
        for (total, c) in summary.class_counts.iter_mut().zip(counts) {
            *total += c;
        }
        summary.mismatches.extend(bad);
    }
    summary.chains = summary.class_counts.iter().sum();
    Ok(summary)
}

/// Proof cases of the rank-2 weight bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rank2Case {
    /// `a_1 = 0`
    A,
    /// `a_1 != 0`, `a_1 + a_2^{-1} = 0`
    B,
    /// everything else; the weight is governed by `count_full(gamma)`
    C,
}

impl Rank2Case {
    pub fn of(k: &FieldCtx, a1: Fe, a2: Fe) -> Self {
        if a1.is_zero() {
            Rank2Case::A
        } else if k.add(a1, k.inv0(a2)).is_zero() {
            Rank2Case::B
        } else {
            Rank2Case::C
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Rank2Case::A => "a",
            Rank2Case::B => "b",
            Rank2Case::C => "c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    /// Non-constant weight of a case-(a) chain is not `q - q/p - 1`.
    CaseA,
    /// Non-constant weight of a case-(b) chain is not `q - 2`.
    CaseB,
    /// Non-constant weight of a case-(c) chain is not `q - 2 - count_full(gamma)`.
    CaseC,
    /// Normalized constant term is nonzero.
    Normalization,
    /// Exact rank 2 with weight below `q - q/p - 1 - nu_p`.
    NuBound,
    /// Exact rank 2, eligible, weight not above `q/3 - 2`.
    WeightFromRank,
    /// Exact rank 2 and `2 < q - 1 - deg`.
    DegreeRank,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub check: CheckKind,
    pub chain: ChainJson,
    pub weight: u64,
    pub expected: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BelowSurd {
    pub chain: ChainJson,
    pub weight: u64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct CaseStats {
    pub chains: u64,
    pub exact_rank2: u64,
    pub min_weight: Option<u64>,
    pub violations: u64,
}

impl CaseStats {
    fn merge(&mut self, o: &CaseStats) {
        self.chains += o.chains;
        self.exact_rank2 += o.exact_rank2;
        self.violations += o.violations;
        self.min_weight = match (self.min_weight, o.min_weight) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// Cap on stored flag examples; the count is always exact.
pub const FLAG_EXAMPLES: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct Rank2Summary {
    pub q: u64,
    pub p: u64,
    pub normalized: bool,
    pub nu_p: u64,
    pub bound_surd: Surd,
    pub bound_nu: i64,
    /// Indexed by case a, b, c.
    pub cases: [CaseStats; 3],
    /// Lowest-weight exact rank-2 chain, first in parameter order.
    pub min_chain: Option<ChainJson>,
    pub counterexamples: Vec<Counterexample>,
    pub below_surd_count: u64,
    pub below_surd: Vec<BelowSurd>,
}

impl Rank2Summary {
    pub fn overall(&self) -> CaseStats {
        let mut all = CaseStats::default();
        for c in &self.cases {
            all.merge(c);
        }
        all
    }

    pub fn violations(&self) -> u64 {
        self.counterexamples.len() as u64
    }

    /// For prime `q` the lowest exact rank-2 weight must meet the `nu_p`
    /// bound; `None` for prime powers.
    pub fn sharp(&self) -> Option<bool> {
        (self.q == self.p).then(|| self.overall().min_weight == Some(self.bound_nu as u64))
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.sharp() != Some(false)
    }

    pub fn csv_rows(&self) -> Vec<[String; 7]> {
        let mut rows = Vec::new();
        let labelled = [("a", self.cases[0]), ("b", self.cases[1]), ("c", self.cases[2]), ("all", self.overall())];
        for (label, st) in labelled {
            rows.push([
                self.q.to_string(),
                self.p.to_string(),
                label.to_string(),
                st.min_weight.map(|w| w.to_string()).unwrap_or_default(),
                self.bound_surd.to_string(),
                self.bound_nu.to_string(),
                st.violations.to_string(),
            ]);
        }
        rows
    }
}

pub const RANK2_CSV_HEADER: [&str; 7] = ["q", "p", "case", "min_weight", "bound_thm33", "bound_cor35", "violations"];

struct Partial {
    cases: [CaseStats; 3],
    min_chain: Option<(u64, ChainJson)>,
    counterexamples: Vec<Counterexample>,
    flag_count: u64,
    flags: Vec<BelowSurd>,
}

impl Partial {
    fn new() -> Self {
        Partial { cases: [CaseStats::default(); 3], min_chain: None, counterexamples: Vec::new(), flag_count: 0, flags: Vec::new() }
    }

    fn merge(&mut self, o: Partial) {
        for (a, b) in self.cases.iter_mut().zip(o.cases.iter()) {
            a.merge(b);
        }
        if let Some((w, ch)) = o.min_chain {
            if self.min_chain.as_ref().is_none_or(|(m, _)| w < *m) {
                self.min_chain = Some((w, ch));
            }
        }
        self.counterexamples.extend(o.counterexamples);
        self.flag_count += o.flag_count;
        let room = FLAG_EXAMPLES.saturating_sub(self.flags.len());
        self.flags.extend(o.flags.into_iter().take(room));
    }
}

/// Every length-2 chain `((a_0 x + a_1)^{q-2} + a_2)^{q-2} + a_3`. With
/// `normalize` the chain is pinned to `a_0 = -1` and the `a_3` that clears
/// the constant term; otherwise all `a_0 != 0` and all `a_3` are visited.
pub fn sweep_rank2(ctx: &Arc<FieldCtx>, normalize: bool) -> Result<Rank2Summary> {
    ctx.require_odd()?;
    let k = ctx.as_ref();
    let (q, p) = (k.q(), k.p());
    let nu = nu_p(p)?.nu;
    let thm = thm_rank2_bound(k)?;
    let cor = cor_rank2_bound(k, nu)?;
    // gamma = 1 would need a_2^{-1} = 0
    let full_counts: Vec<u64> =
        k.elements().map(|g| if g == Fe::ONE { Ok(0) } else { count_full(k, g) }).collect::<Result<_>>()?;
    let a0s: Vec<Fe> = if normalize { vec![k.neg(Fe::ONE)] } else { k.nonzero_elements().collect() };
    let outer: Vec<(Fe, Fe)> = a0s.iter().flat_map(|&a0| k.elements().map(move |a1| (a0, a1))).collect();
    let env = Env { ctx, thm: &thm, cor, full_counts: &full_counts, normalize };
    let parts = outer
        .par_iter()
        .map(|&(a0, a1)| {
            let mut part = Partial::new();
            for a2 in k.nonzero_elements() {
                let a3s: Vec<Fe> = if normalize { vec![normalizing_a3(k, a1, a2)] } else { k.elements().collect() };
                for a3 in a3s {
                    visit_rank2(&env, [a0, a1, a2, a3], &mut part)?;
                }
            }
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Partial::new();
    for part in parts {
        total.merge(part);
    }
    Ok(Rank2Summary {
        q,
        p,
        normalized: normalize,
        nu_p: nu,
        bound_surd: thm,
        bound_nu: cor,
        cases: total.cases,
        min_chain: total.min_chain.map(|(_, ch)| ch),
        counterexamples: total.counterexamples,
        below_surd_count: total.flag_count,
        below_surd: total.flags,
    })
}

struct Env<'a> {
    ctx: &'a Arc<FieldCtx>,
    thm: &'a Surd,
    cor: i64,
    full_counts: &'a [u64],
    normalize: bool,
}

fn visit_rank2(env: &Env, a: [Fe; 4], part: &mut Partial) -> Result<()> {
    let ctx = env.ctx;
    let k = ctx.as_ref();
    let (q, p) = (k.q(), k.p());
    let [a0, a1, a2, a3] = a;
    let f = rank2_coeffs(ctx, a0, a1, a2, a3)?;
    let chain = Chain::new(ctx, a.to_vec())?;
    let weight = f.weight() as u64;
    let body = weight - u64::from(!f.coeff(0).is_zero());
    let case = Rank2Case::of(k, a1, a2);
    let mut bad: Vec<(CheckKind, String)> = Vec::new();

    let expected_body = match case {
        Rank2Case::A => q - q / p - 1,
        Rank2Case::B => q - 2,
        Rank2Case::C => {
            let gamma = k.div(k.add(a1, k.inv0(a2)), a1)?;
            q - 2 - env.full_counts[gamma.index() as usize]
        }
    };
    if body != expected_body {
        let kind = match case {
            Rank2Case::A => CheckKind::CaseA,
            Rank2Case::B => CheckKind::CaseB,
            Rank2Case::C => CheckKind::CaseC,
        };
        bad.push((kind, format!("non-constant weight {expected_body}")));
    }
    if env.normalize && !f.coeff(0).is_zero() {
        bad.push((CheckKind::Normalization, "zero constant term".into()));
    }

    let exact = rank_at_most1(&chain.table())?.is_none();
    let stats = &mut part.cases[case as usize];
    stats.chains += 1;
    if exact {
        stats.exact_rank2 += 1;
        stats.min_weight = Some(stats.min_weight.map_or(weight, |m| m.min(weight)));
        if part.min_chain.as_ref().is_none_or(|(m, _)| weight < *m) {
            part.min_chain = Some((weight, chain.to_json()));
        }
        if (weight as i64) < env.cor {
            bad.push((CheckKind::NuBound, format!("weight >= {}", env.cor)));
        }
        if env.thm.cmp_int(weight as i64) == Ordering::Less {
            part.flag_count += 1;
            if part.flags.len() < FLAG_EXAMPLES {
                part.flags.push(BelowSurd { chain: chain.to_json(), weight, bound: env.thm.to_f64() });
            }
        }
        bad.extend(prior_bound_failures(&f, weight));
    }
    let stats = &mut part.cases[case as usize];
    stats.violations += bad.len() as u64;
    for (check, expected) in bad {
        part.counterexamples.push(Counterexample { check, chain: chain.to_json(), weight, expected });
    }
    Ok(())
}

/// Older weight and degree bounds for a rank-2 permutation.
fn prior_bound_failures(f: &Poly, weight: u64) -> Vec<(CheckKind, String)> {
    let q = f.ctx().q();
    let mut out = Vec::new();
    if got_eligible(f) {
        let (_, weight_floor) = got_bounds(weight, q, 2);
        if Rational::from_integer(weight as i128) <= weight_floor {
            out.push((CheckKind::WeightFromRank, format!("weight > {weight_floor}")));
        }
    }
    if !degree_rank_check(f, 2) {
        out.push((CheckKind::DegreeRank, format!("degree >= {}", q - 3)));
    }
    out
}
