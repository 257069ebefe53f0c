//! Carlitz chains `(...((a_0 x + a_1)^{q-2} + a_2)^{q-2} ... + a_n)^{q-2} + a_{n+1}`,
//! their Möbius convergents and pole sets, rank detection up to 2, the closed
//! form of rank-2 coefficients, and the weight/rank bounds built on them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{make_field, Fe, FieldCtx, FieldSpec};
use crate::poly::{element_from_json, element_to_json, interpolate, Poly, ValueTable};
use crate::surd::{ratio, Rational, Surd};

/// Default largest field accepted by [`rank_upto2`].
pub const DEFAULT_RANK_CAP: u64 = 343;

/// Chain parameters `(a_0, a_1, ..., a_{n+1})`.
#[derive(Clone, PartialEq, Eq)]
pub struct Chain {
    ctx: Arc<FieldCtx>,
    a: Vec<Fe>,
}

impl Chain {
    /// Requires `a_0 != 0` and `a_2, ..., a_n != 0`.
    pub fn new(ctx: &Arc<FieldCtx>, a: Vec<Fe>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::BadChain(format!("need at least (a_0, a_1), got {} parameters", a.len())));
        }
        if let Some(bad) = a.iter().find(|x| x.index() as u64 >= ctx.q()) {
            return Err(Error::BadChain(format!("element index {} outside the field", bad.index())));
        }
        if a[0].is_zero() {
            return Err(Error::BadChain("a_0 must be nonzero".into()));
        }
        let n = a.len() - 2;
        if let Some(k) = (2..=n).find(|&k| a[k].is_zero()) {
            return Err(Error::BadChain(format!("a_{k} must be nonzero")));
        }
        Ok(Chain { ctx: ctx.clone(), a })
    }

    /// Chain from integers embedded in the prime field.
    pub fn from_ints(ctx: &Arc<FieldCtx>, a: &[i64]) -> Result<Self> {
        Chain::new(ctx, a.iter().map(|&x| ctx.embed(x)).collect())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    /// Number of inversions.
    pub fn len(&self) -> usize {
        self.a.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn params(&self) -> &[Fe] {
        &self.a
    }

    #[inline]
    pub fn eval(&self, x: Fe) -> Fe {
        let k = &self.ctx;
        let mut y = k.add(k.mul(self.a[0], x), self.a[1]);
        for &ak in &self.a[2..] {
            y = k.add(k.inv0(y), ak);
        }
        y
    }

    pub fn table(&self) -> ValueTable {
        ValueTable::from_fn(&self.ctx, |x| self.eval(x))
    }

    /// True iff the chain and the table agree everywhere.
    pub fn reproduces(&self, t: &ValueTable) -> bool {
        self.ctx.elements().all(|x| self.eval(x) == t.at(x))
    }

    pub fn to_json(&self) -> ChainJson {
        ChainJson {
            field: self.ctx.spec_string(),
            a: self.a.iter().map(|&x| element_to_json(&self.ctx, x)).collect(),
        }
    }

    pub fn from_json(j: &ChainJson) -> Result<Chain> {
        let ctx = FieldSpec::parse(&j.field)?.build()?;
        let a = j.a.iter().map(|v| element_from_json(&ctx, v)).collect::<Result<Vec<_>>>()?;
        Chain::new(&ctx, a)
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|&x| self.ctx.fmt_element(x)).collect();
        write!(f, "Chain[{}]({})", self.ctx.spec_string(), a.join(", "))
    }
}

/// JSON form `{"field": "...", "a": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChainJson {
    pub field: String,
    pub a: Vec<Value>,
}

/// Expansion through the value table and interpolation.
pub fn expand_chain(ch: &Chain) -> Poly {
    interpolate(&ch.table())
}

/// Expansion by repeated powering modulo `x^q - x`.
pub fn expand_chain_by_powers(ch: &Chain) -> Poly {
    let k = &ch.ctx;
    let mut f = Poly::linear(k, ch.a[0], ch.a[1]);
    for &ak in &ch.a[2..] {
        f = f.pow(k.q() - 2).add_constant(ak);
    }
    f
}

/// A point of the projective line over F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum P1 {
    Finite(Fe),
    Infinity,
}

/// `(a x + b) / (c x + d)` with `ad - bc != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MobiusMap {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub d: Fe,
}

impl MobiusMap {
    pub fn det(&self, k: &FieldCtx) -> Fe {
        k.sub(k.mul(self.a, self.d), k.mul(self.b, self.c))
    }

    pub fn eval(&self, k: &FieldCtx, x: Fe) -> P1 {
        let den = k.add(k.mul(self.c, x), self.d);
        if den.is_zero() {
            P1::Infinity
        } else {
            P1::Finite(k.mul(k.add(k.mul(self.a, x), self.b), k.inv0(den)))
        }
    }

    /// Value at infinity.
    pub fn at_infinity(&self, k: &FieldCtx) -> P1 {
        if self.c.is_zero() {
            P1::Infinity
        } else {
            P1::Finite(k.mul(self.a, k.inv0(self.c)))
        }
    }

    /// Scales so the first nonzero coefficient is 1.
    pub fn normalized(&self, k: &FieldCtx) -> MobiusMap {
        let lead = [self.a, self.b, self.c, self.d].into_iter().find(|x| !x.is_zero()).unwrap_or(Fe::ONE);
        let s = k.inv0(lead);
        MobiusMap { a: k.mul(self.a, s), b: k.mul(self.b, s), c: k.mul(self.c, s), d: k.mul(self.d, s) }
    }

    /// The unique map through three points with distinct arguments and values.
    pub fn through(k: &FieldCtx, pts: [(Fe, Fe); 3]) -> Option<MobiusMap> {
        // Rows of a x + b - c x y - d y = 0.
        let mut m: Vec<[Fe; 4]> = pts
            .iter()
            .map(|&(x, y)| [x, Fe::ONE, k.neg(k.mul(x, y)), k.neg(y)])
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..4 {
            let Some(r) = (row..3).find(|&r| !m[r][col].is_zero()) else { continue };
            m.swap(row, r);
            let inv = k.inv0(m[row][col]);
            for v in m[row].iter_mut() {
                *v = k.mul(*v, inv);
            }
            for r2 in 0..3 {
                if r2 != row && !m[r2][col].is_zero() {
                    let f = m[r2][col];
                    let pivot = m[row];
                    for (v, &pv) in m[r2].iter_mut().zip(&pivot) {
                        *v = k.sub(*v, k.mul(f, pv));
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == 3 {
                break;
            }
        }
        if pivots.len() != 3 {
            return None;
        }
        let free = (0..4).find(|c| !pivots.contains(c))?;
        let mut v = [Fe::ZERO; 4];
        v[free] = Fe::ONE;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = k.neg(m[r][free]);
        }
        let map = MobiusMap { a: v[0], b: v[1], c: v[2], d: v[3] };
        if map.det(k).is_zero() {
            None
        } else {
            Some(map.normalized(k))
        }
    }
}

/// Poles `-beta_i / alpha_i`, `i = 1..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleSet {
    pub poles: Vec<P1>,
}

impl PoleSet {
    pub fn contains(&self, x: P1) -> bool {
        self.poles.contains(&x)
    }
}

/// Convergent `R_n` and pole set `O_n` from the recurrence
/// `alpha_k = alpha_{k-1} a_k + alpha_{k-2}` (same for beta),
/// `alpha_0 = 0, alpha_1 = a_0, beta_0 = 1, beta_1 = a_1`.
pub fn convergents(ch: &Chain) -> Result<(MobiusMap, PoleSet)> {
    let n = ch.len();
    if n == 0 {
        return Err(Error::BadChain("convergents need at least one inversion".into()));
    }
    let k = &ch.ctx;
    let mut alpha = vec![Fe::ZERO, ch.a[0]];
    let mut beta = vec![Fe::ONE, ch.a[1]];
    for j in 2..=n + 1 {
        alpha.push(k.add(k.mul(alpha[j - 1], ch.a[j]), alpha[j - 2]));
        beta.push(k.add(k.mul(beta[j - 1], ch.a[j]), beta[j - 2]));
    }
    let poles = (1..=n)
        .map(|i| {
            if alpha[i].is_zero() {
                P1::Infinity
            } else {
                P1::Finite(k.neg(k.mul(beta[i], k.inv0(alpha[i]))))
            }
        })
        .collect();
    let map = MobiusMap { a: alpha[n + 1], b: beta[n + 1], c: alpha[n], d: beta[n] };
    Ok((map, PoleSet { poles }))
}

/// The chain's expansion agrees with its convergent off the pole set.
pub fn agreement_check(ch: &Chain) -> Result<bool> {
    let t = expand_chain(ch).eval_table();
    agreement_check_table(ch, &t)
}

/// Same check against an arbitrary table in place of the chain's own values.
pub fn agreement_check_table(ch: &Chain, t: &ValueTable) -> Result<bool> {
    let (r, poles) = convergents(ch)?;
    let k = &ch.ctx;
    Ok(k.elements()
        .filter(|&x| !poles.contains(P1::Finite(x)))
        .all(|x| r.eval(k, x) == P1::Finite(t.at(x))))
}

/// `a_3` making the constant term of the rank-2 closed form vanish.
pub fn normalizing_a3(k: &FieldCtx, a1: Fe, a2: Fe) -> Fe {
    let inv2 = k.inv0(a2);
    let eta = k.add(a1, inv2);
    let q = k.q();
    let bracket = k.sub(k.add(k.mul(a1, k.pow(eta, q - 2)), Fe::ONE), k.pow(a1, q - 1));
    k.neg(k.mul(inv2, bracket))
}

/// Closed form of `((a_0 x + a_1)^{q-2} + a_2)^{q-2} + a_3` (with `0^0 = 1`):
/// constant `c = a_3 + a_2^{-1}[a_1 eta^{q-2} + 1 - a_1^{q-1}]` and, for
/// `1 <= i <= q-2`, coefficient `a_2^{-1} (-a_0)^i [(a_1 - i a_2^{-1}) eta^{q-2-i} - a_1^{q-1-i}]`
/// where `eta = a_1 + a_2^{-1}`.
pub fn rank2_coeffs(ctx: &Arc<FieldCtx>, a0: Fe, a1: Fe, a2: Fe, a3: Fe) -> Result<Poly> {
    if a0.is_zero() {
        return Err(Error::BadParam("a_0 must be nonzero".into()));
    }
    if a2.is_zero() {
        return Err(Error::BadParam("a_2 must be nonzero".into()));
    }
    let k = ctx.as_ref();
    let q = k.q();
    let inv2 = k.inv0(a2);
    let eta = k.add(a1, inv2);
    let na0 = k.neg(a0);
    let mut coeffs = vec![Fe::ZERO; q as usize];
    let bracket = k.sub(k.add(k.mul(a1, k.pow(eta, q - 2)), Fe::ONE), k.pow(a1, q - 1));
    coeffs[0] = k.add(a3, k.mul(inv2, bracket));
    let mut sign_pow = Fe::ONE;
    for i in 1..q.saturating_sub(1) {
        sign_pow = k.mul(sign_pow, na0);
        let lin = k.sub(a1, k.mul(k.embed(i as i64), inv2));
        let term = k.sub(k.mul(lin, k.pow(eta, q - 2 - i)), k.pow(a1, q - 1 - i));
        coeffs[i as usize] = k.mul(k.mul(inv2, sign_pow), term);
    }
    Poly::from_coeffs(ctx, coeffs)
}

/// Three-branch evaluation of `g(x) = f(a_0^{-1} x)` for a rank-2 chain.
pub fn rank2_piecewise_eval(k: &FieldCtx, a1: Fe, a2: Fe, a3: Fe, x: Fe) -> Result<Fe> {
    if a2.is_zero() {
        return Err(Error::BadParam("a_2 must be nonzero".into()));
    }
    let inv2 = k.inv0(a2);
    let first = k.neg(a1);
    let second = k.neg(k.add(a1, inv2));
    Ok(if x == first {
        k.add(inv2, a3)
    } else if x == second {
        a3
    } else {
        let num = k.add(x, a1);
        let den = k.add(k.add(k.mul(a2, x), k.mul(a1, a2)), Fe::ONE);
        k.add(k.mul(num, k.inv0(den)), a3)
    })
}

/// Weight classes of `(a_0 x + a_1)^{q-2} + a_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rank1Class {
    /// `a_1 = 0 = a_2`
    Monomial,
    /// `a_1 = 0 != a_2`
    MonomialPlusConstant,
    /// `a_1 != 0`, `a_2 = -a_1^{q-2}`
    ConstantCancelled,
    /// `a_1 != 0` otherwise
    Full,
}

impl Rank1Class {
    pub fn predicted_weight(self, q: u64, p: u64) -> u64 {
        match self {
            Rank1Class::Monomial => 1,
            Rank1Class::MonomialPlusConstant => 2,
            Rank1Class::ConstantCancelled => q - q / p - 1,
            Rank1Class::Full => q - q / p,
        }
    }
}

pub fn rank1_weight(ctx: &Arc<FieldCtx>, a0: Fe, a1: Fe, a2: Fe) -> Result<(Poly, Rank1Class)> {
    ctx.require_odd()?;
    if a0.is_zero() {
        return Err(Error::BadParam("a_0 must be nonzero".into()));
    }
    let f = expand_chain(&Chain::new(ctx, vec![a0, a1, a2])?);
    let class = match (a1.is_zero(), a2.is_zero()) {
        (true, true) => Rank1Class::Monomial,
        (true, false) => Rank1Class::MonomialPlusConstant,
        (false, _) if a2 == ctx.neg(ctx.pow(a1, ctx.q() - 2)) => Rank1Class::ConstantCancelled,
        _ => Rank1Class::Full,
    };
    Ok((f, class))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RankClass {
    Zero,
    One,
    Two,
    MoreThanTwo,
}

impl RankClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RankClass::Zero => "0",
            RankClass::One => "1",
            RankClass::Two => "2",
            RankClass::MoreThanTwo => ">2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RankReport {
    pub rank_class: RankClass,
    pub witness: Option<Chain>,
}

/// Carlitz rank of `f` if it is at most 2, with a witness chain.
pub fn rank_upto2(f: &Poly, cap: u64) -> Result<RankReport> {
    if f.ctx().q() > cap {
        return Err(Error::FieldTooLarge { q: f.ctx().q(), cap });
    }
    rank_upto2_table(&f.eval_table())
}

pub fn rank_upto2_table(t: &ValueTable) -> Result<RankReport> {
    if let Some(r) = rank_at_most1(t)? {
        return Ok(r);
    }
    let k = t.ctx();
    if k.q() < 7 {
        return rank_by_enumeration(t);
    }
    for m in &mobius_candidates(t, 2) {
        if let Some(w) = rank2_witness_for(t, m) {
            return Ok(RankReport { rank_class: RankClass::Two, witness: Some(w) });
        }
    }
    Ok(RankReport { rank_class: RankClass::MoreThanTwo, witness: None })
}

/// The rank with a witness if it is 0 or 1, `None` if it is at least 2.
pub fn rank_at_most1(t: &ValueTable) -> Result<Option<RankReport>> {
    if !t.is_bijection() {
        return Err(Error::NotPermutation);
    }
    let k = t.ctx();
    if let Some(w) = linear_witness(t) {
        return Ok(Some(RankReport { rank_class: RankClass::Zero, witness: Some(w) }));
    }
    if k.q() < 7 {
        let r = rank_by_enumeration(t)?;
        return Ok((r.rank_class == RankClass::One).then_some(r));
    }
    // A rank-1 chain differs from its convergent at exactly one finite point.
    for m in &mobius_candidates(t, 1) {
        if let Some(w) = rank1_witness_for(t, m) {
            return Ok(Some(RankReport { rank_class: RankClass::One, witness: Some(w) }));
        }
    }
    Ok(None)
}

/// Full enumeration of chains of length 0, 1, 2 (no prefilter).
pub fn rank_by_enumeration(t: &ValueTable) -> Result<RankReport> {
    if !t.is_bijection() {
        return Err(Error::NotPermutation);
    }
    let k = t.ctx();
    if let Some(w) = linear_witness(t) {
        return Ok(RankReport { rank_class: RankClass::Zero, witness: Some(w) });
    }
    for a0 in k.nonzero_elements() {
        for a1 in k.elements() {
            for a2 in k.elements() {
                let ch = Chain { ctx: k.clone(), a: vec![a0, a1, a2] };
                if ch.reproduces(t) {
                    return Ok(RankReport { rank_class: RankClass::One, witness: Some(ch) });
                }
            }
        }
    }
    for a0 in k.nonzero_elements() {
        for a1 in k.elements() {
            for a2 in k.nonzero_elements() {
                for a3 in k.elements() {
                    let ch = Chain { ctx: k.clone(), a: vec![a0, a1, a2, a3] };
                    if ch.reproduces(t) {
                        return Ok(RankReport { rank_class: RankClass::Two, witness: Some(ch) });
                    }
                }
            }
        }
    }
    Ok(RankReport { rank_class: RankClass::MoreThanTwo, witness: None })
}

fn linear_witness(t: &ValueTable) -> Option<Chain> {
    let k = t.ctx();
    let b = t.at(Fe::ZERO);
    let a = k.sub(t.at(Fe::ONE), b);
    if a.is_zero() {
        return None;
    }
    let ch = Chain { ctx: k.clone(), a: vec![a, b] };
    ch.reproduces(t).then_some(ch)
}

/// Möbius maps fitted through triples of a 7-point sample that agree with
/// the table on at least `q - slack` points, deduplicated and sorted.
fn mobius_candidates(t: &ValueTable, slack: u64) -> Vec<MobiusMap> {
    let k = t.ctx();
    let sample: Vec<Fe> = k.elements().take(7).collect();
    let mut out: Vec<MobiusMap> = Vec::new();
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            for l in j + 1..sample.len() {
                let pts = [sample[i], sample[j], sample[l]].map(|x| (x, t.at(x)));
                let Some(m) = MobiusMap::through(k, pts) else { continue };
                if out.contains(&m) {
                    continue;
                }
                let agree = k.elements().filter(|&x| m.eval(k, x) == P1::Finite(t.at(x))).count() as u64;
                if agree + slack >= k.q() {
                    out.push(m);
                }
            }
        }
    }
    out.sort_by_key(|m| (m.a, m.b, m.c, m.d));
    out
}

// R_1 = (a_0 a_2 x + a_1 a_2 + 1) / (a_0 x + a_1) determines the chain.
fn rank1_witness_for(t: &ValueTable, m: &MobiusMap) -> Option<Chain> {
    let k = t.ctx();
    if m.c.is_zero() {
        return None;
    }
    let det = k.sub(k.mul(m.b, m.c), k.mul(m.a, m.d));
    let s = k.mul(m.c, k.inv0(det));
    let ch = Chain {
        ctx: k.clone(),
        a: vec![k.mul(s, m.c), k.mul(s, m.d), k.mul(m.a, k.inv0(m.c))],
    };
    ch.reproduces(t).then_some(ch)
}

// R_2 = a_3 + 1/(a_2 + 1/(a_0 x + a_1)); for each a_2 the rest is forced:
// a_3 = R(inf) - 1/a_2, then (a_0 x + a_1) is read off the remaining matrix.
fn rank2_witness_for(t: &ValueTable, m: &MobiusMap) -> Option<Chain> {
    let k = t.ctx();
    if m.c.is_zero() {
        return None;
    }
    let at_inf = k.mul(m.a, k.inv0(m.c));
    for a2 in k.nonzero_elements() {
        let a3 = k.sub(at_inf, k.inv0(a2));
        let top = k.sub(m.b, k.mul(a3, m.d));
        let w = k.sub(m.d, k.mul(a2, top));
        if w.is_zero() {
            continue;
        }
        let winv = k.inv0(w);
        let a0 = k.mul(k.mul(m.c, k.inv0(a2)), winv);
        let a1 = k.mul(top, winv);
        let ch = Chain { ctx: k.clone(), a: vec![a0, a1, a2, a3] };
        if ch.reproduces(t) {
            return Some(ch);
        }
    }
    None
}

/// `q - q/p - sqrt(3p/2 - 39/16) + 1/4`.
pub fn thm_rank2_bound(ctx: &FieldCtx) -> Result<Surd> {
    ctx.require_odd()?;
    let (q, p) = (ctx.q() as i128, ctx.p() as i128);
    Ok(Surd::new(ratio(4 * (q - q / p) + 1, 4), -1, ratio(24 * p - 39, 16)))
}

/// `q - q/p - 1 - nu_p`.
pub fn cor_rank2_bound(ctx: &FieldCtx, nu_p: u64) -> Result<i64> {
    ctx.require_odd()?;
    let (q, p) = (ctx.q() as i64, ctx.p() as i64);
    Ok(q - q / p - 1 - nu_p as i64)
}

/// `(q/(weight+2) - 1, q/(rank+1) - 2)`: the rank lower bound implied by a
/// weight, and the weight lower bound implied by a rank.
pub fn got_bounds(weight: u64, q: u64, rank: u64) -> (Rational, Rational) {
    let (w, q, r) = (weight as i128, q as i128, rank as i128);
    (ratio(q, w + 2) - ratio(1, 1), ratio(q, r + 1) - ratio(2, 1))
}

/// Degree at least 2 and not literally `c_1 + c_2 x^{q-2}`.
pub fn got_eligible(f: &Poly) -> bool {
    let q = f.ctx().q() as usize;
    match f.degree() {
        Some(d) if d >= 2 => !f.support().iter().all(|&i| i == 0 || i == q - 2),
        _ => false,
    }
}

/// `rank >= q - 1 - deg(f)`.
pub fn degree_rank_check(f: &Poly, rank: u64) -> bool {
    let q = f.ctx().q() as i64;
    let d = f.degree().map(|d| d as i64).unwrap_or(-1);
    rank as i64 >= q - 1 - d
}

/// `sum_{i=1}^{11^n - 2} [4^{i+1}(2 - i) - 6^i] x^i` over F_{11^n}, checked
/// against the chain `((2 - x)^{q-2} + 1)^{q-2} - 8` and its weight
/// `11^n - 11^{n-1} - 4`.
pub fn example_fn(n: u32, cap: u32) -> Result<Poly> {
    if n < 1 || n > cap {
        return Err(Error::BadRange(format!("n = {n} outside [1, {cap}]")));
    }
    let ctx = make_field(11, n, None)?;
    let k = ctx.as_ref();
    let q = k.q();
    let (four, six) = (k.embed(4), k.embed(6));
    let mut coeffs = vec![Fe::ZERO; q as usize];
    for i in 1..=q - 2 {
        let t = k.mul(k.pow(four, i + 1), k.embed(2 - i as i64));
        coeffs[i as usize] = k.sub(t, k.pow(six, i));
    }
    let f = Poly::from_coeffs(&ctx, coeffs)?;
    let chain = Chain::from_ints(&ctx, &[-1, 2, 1, -8])?;
    if expand_chain(&chain) != f {
        return Err(Error::Verification(format!("f_{n} differs from its chain form")));
    }
    let expected = q - q / 11 - 4;
    if f.weight() as u64 != expected {
        return Err(Error::Verification(format!("weight of f_{n} is {} not {expected}", f.weight())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cmp::Ordering;

    fn field(p: u64, n: u32) -> Arc<FieldCtx> {
        make_field(p, n, None).unwrap()
    }

    fn poly(k: &Arc<FieldCtx>, c: &[i64]) -> Poly {
        Poly::from_coeffs(k, c.iter().map(|&x| k.embed(x)).collect()).unwrap()
    }

    #[test]
    fn chain_validation() {
        let k = field(5, 1);
        assert!(Chain::from_ints(&k, &[0, 1]).is_err());
        assert!(Chain::from_ints(&k, &[1]).is_err());
        assert!(Chain::from_ints(&k, &[1, 0, 0, 3]).is_err());
        assert!(Chain::from_ints(&k, &[1, 0, 0]).is_ok());
        assert!(Chain::from_ints(&k, &[1, 0, 2, 0, 4]).is_err());
    }

    #[test]
    fn expand_examples() {
        let k = field(5, 1);
        let lin = Chain::from_ints(&k, &[1, 3]).unwrap();
        assert_eq!(expand_chain(&lin), poly(&k, &[3, 1]));
        let inv = Chain::from_ints(&k, &[1, 0, 0]).unwrap();
        assert_eq!(expand_chain(&inv), Poly::monomial(&k, Fe::ONE, 3));
        let two = Chain::from_ints(&k, &[-1, 1, 4, 0]).unwrap();
        assert_eq!(expand_chain(&two), poly(&k, &[0, 1, 1, 2]));
        assert_eq!(expand_chain_by_powers(&two), poly(&k, &[0, 1, 1, 2]));
    }

    fn all_chains(k: &Arc<FieldCtx>, n: usize) -> Vec<Chain> {
        let mut out = vec![];
        let els: Vec<Fe> = k.elements().collect();
        let mut idx = vec![0usize; n + 2];
        loop {
            let a: Vec<Fe> = idx.iter().map(|&i| els[i]).collect();
            if let Ok(ch) = Chain::new(k, a) {
                out.push(ch);
            }
            let mut j = 0;
            loop {
                if j == idx.len() {
                    return out;
                }
                idx[j] += 1;
                if idx[j] < els.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn both_expansion_paths_agree_and_permute() {
        for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let k = field(p, n);
            for len in 0..=2 {
                for ch in all_chains(&k, len) {
                    let f = expand_chain(&ch);
                    assert_eq!(f, expand_chain_by_powers(&ch), "{ch:?}");
                    assert!(f.is_permutation());
                    if len >= 1 {
                        assert!(agreement_check(&ch).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn three_inversion_chains_agree_with_convergent() {
        let k = field(11, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: Vec<Fe> = (0..5).map(|i| k.embed(if i == 0 || (2..=3).contains(&i) { rng.gen_range(1..11) } else { rng.gen_range(0..11) })).collect();
            let ch = Chain::new(&k, a).unwrap();
            assert!(agreement_check(&ch).unwrap());
            assert!(expand_chain(&ch).is_permutation());
        }
    }

    #[test]
    fn convergent_examples() {
        let k = field(5, 1);
        let ch = Chain::from_ints(&k, &[2, 3, 4]).unwrap();
        let (r, o) = convergents(&ch).unwrap();
        assert_eq!((r.a, r.b), (k.embed(8), k.embed(13)));
        assert_eq!((r.c, r.d), (k.embed(2), k.embed(3)));
        assert_eq!(o.poles, vec![P1::Finite(k.mul(k.embed(-3), k.inv0(k.embed(2))))]);

        let ch = Chain::from_ints(&k, &[1, 2, 3, 4]).unwrap();
        let (r, _) = convergents(&ch).unwrap();
        assert_eq!((r.c, r.d), (k.embed(3), k.embed(2 * 3 + 1)));

        let ch = Chain::from_ints(&k, &[-1, 1, 4, 0]).unwrap();
        let (_, o) = convergents(&ch).unwrap();
        assert_eq!(o.poles, vec![P1::Finite(k.embed(1)), P1::Finite(k.embed(0))]);
        assert!(convergents(&Chain::from_ints(&k, &[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn agreement_detects_perturbation() {
        let k = field(5, 1);
        let ch = Chain::from_ints(&k, &[1, 0, 0]).unwrap();
        assert!(agreement_check(&ch).unwrap());
        let (_, poles) = convergents(&ch).unwrap();
        let mut vals = ch.table().values().to_vec();
        let x = k.elements().find(|&x| !poles.contains(P1::Finite(x))).unwrap();
        vals[x.index() as usize] = k.add(vals[x.index() as usize], Fe::ONE);
        let t = ValueTable::from_values(&k, vals).unwrap();
        assert!(!agreement_check_table(&ch, &t).unwrap());
    }

    #[test]
    fn rank2_coeffs_examples() {
        let k = field(5, 1);
        let e = |x| k.embed(x);
        let f = rank2_coeffs(&k, e(-1), e(0), e(1), e(-1)).unwrap();
        assert_eq!(f, poly(&k, &[0, 4, 3, 2]));
        assert_eq!(f.weight(), 3);
        assert_eq!(f.eval_table(), Chain::from_ints(&k, &[-1, 0, 1, -1]).unwrap().table());
        let g = rank2_coeffs(&k, e(-1), e(1), e(4), e(0)).unwrap();
        assert_eq!(g, poly(&k, &[0, 1, 1, 2]));
        assert!(rank2_coeffs(&k, e(0), e(1), e(1), e(0)).is_err());
        assert!(rank2_coeffs(&k, e(1), e(1), e(0), e(0)).is_err());
    }

    #[test]
    fn rank2_coeffs_random_f9() {
        let k = field(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let a0 = k.element(rng.gen_range(1..9)).unwrap();
            let a1 = k.element(rng.gen_range(0..9)).unwrap();
            let a2 = k.element(rng.gen_range(1..9)).unwrap();
            let a3 = k.element(rng.gen_range(0..9)).unwrap();
            let ch = Chain::new(&k, vec![a0, a1, a2, a3]).unwrap();
            assert_eq!(rank2_coeffs(&k, a0, a1, a2, a3).unwrap(), expand_chain(&ch));
        }
    }

    #[test]
    fn piecewise_eval_is_an_oracle_for_the_closed_form() {
        let k = field(5, 1);
        let e = |x| k.embed(x);
        assert_eq!(rank2_piecewise_eval(&k, e(1), e(4), e(0), e(2)).unwrap(), e(1));
        let (a1, a2, a3) = (e(2), e(3), e(1));
        let inv2 = k.inv0(a2);
        assert_eq!(rank2_piecewise_eval(&k, a1, a2, a3, k.neg(a1)).unwrap(), k.add(inv2, a3));
        assert_eq!(rank2_piecewise_eval(&k, a1, a2, a3, k.neg(k.add(a1, inv2))).unwrap(), a3);
        assert!(rank2_piecewise_eval(&k, a1, Fe::ZERO, a3, e(0)).is_err());
        for (p, n) in [(5, 1), (7, 1), (3, 2)] {
            let k = field(p, n);
            for a0 in k.nonzero_elements() {
                for a1 in k.elements() {
                    for a2 in k.nonzero_elements() {
                        let a3 = k.embed(1);
                        let f = rank2_coeffs(&k, a0, a1, a2, a3).unwrap();
                        for x in k.elements() {
                            let g = rank2_piecewise_eval(&k, a1, a2, a3, k.mul(a0, x)).unwrap();
                            assert_eq!(f.evaluate(x).unwrap(), g);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn normalizing_a3_zeroes_constant() {
        let k = field(7, 1);
        for a1 in k.elements() {
            for a2 in k.nonzero_elements() {
                let a3 = normalizing_a3(&k, a1, a2);
                let f = rank2_coeffs(&k, k.embed(-1), a1, a2, a3).unwrap();
                assert!(f.coeff(0).is_zero());
            }
        }
    }

    #[test]
    fn rank1_examples() {
        let k = field(5, 1);
        let e = |x| k.embed(x);
        let (f, c) = rank1_weight(&k, e(1), e(0), e(0)).unwrap();
        assert_eq!((f.weight(), c), (1, Rank1Class::Monomial));
        let (f, c) = rank1_weight(&k, e(1), e(0), e(2)).unwrap();
        assert_eq!((f.weight(), c), (2, Rank1Class::MonomialPlusConstant));
        let (f, c) = rank1_weight(&k, e(1), e(1), e(0)).unwrap();
        assert_eq!(f, poly(&k, &[1, 3, 3, 1]));
        assert_eq!((f.weight(), c), (4, Rank1Class::Full));
        assert!(matches!(rank1_weight(&field(2, 2), Fe::ONE, Fe::ONE, Fe::ZERO), Err(Error::EvenCharacteristic(2))));
        assert!(rank1_weight(&k, e(0), e(1), e(0)).is_err());
    }

    #[test]
    fn rank_examples() {
        let k = field(5, 1);
        let r = rank_upto2(&poly(&k, &[3, 1]), DEFAULT_RANK_CAP).unwrap();
        assert_eq!(r.rank_class, RankClass::Zero);
        let r = rank_upto2(&Poly::monomial(&k, Fe::ONE, 3), DEFAULT_RANK_CAP).unwrap();
        assert_eq!(r.rank_class, RankClass::One);
        assert_eq!(r.witness.unwrap().params(), &[Fe::ONE, Fe::ZERO, Fe::ZERO]);
        assert!(matches!(rank_upto2(&Poly::monomial(&k, Fe::ONE, 2), 343), Err(Error::NotPermutation)));
        assert!(matches!(rank_upto2(&Poly::monomial(&field(19, 1), Fe::ONE, 1), 17), Err(Error::FieldTooLarge { .. })));
    }

    #[test]
    fn x_plus_x2_plus_2x3_has_rank_at_most_two() {
        // Over F_5 every length-2 chain collapses to rank <= 1.
        let k = field(5, 1);
        let f = poly(&k, &[0, 1, 1, 2]);
        let r = rank_upto2(&f, DEFAULT_RANK_CAP).unwrap();
        assert!(r.rank_class <= RankClass::Two);
        assert!(r.witness.unwrap().reproduces(&f.eval_table()));
    }

    #[test]
    fn prefilter_agrees_with_enumeration() {
        for (p, n) in [(7, 1), (3, 2), (11, 1)] {
            let k = field(p, n);
            for len in 0..=2 {
                for ch in all_chains(&k, len).into_iter().step_by(if p == 11 { 7 } else { 1 }) {
                    let t = ch.table();
                    let fast = rank_upto2_table(&t).unwrap();
                    let slow = rank_by_enumeration(&t).unwrap();
                    assert_eq!(fast.rank_class, slow.rank_class, "{ch:?}");
                    assert!(fast.rank_class as usize <= len);
                    assert!(fast.witness.unwrap().reproduces(&t));
                }
            }
        }
    }

    #[test]
    fn higher_rank_maps_are_recognised() {
        let k = field(7, 1);
        let mut found = false;
        for a in 1..7 {
            let ch = Chain::from_ints(&k, &[1, 0, 1, 1, 1, a]).unwrap();
            let t = ch.table();
            let fast = rank_upto2_table(&t).unwrap();
            assert_eq!(fast.rank_class, rank_by_enumeration(&t).unwrap().rank_class);
            found |= fast.rank_class == RankClass::MoreThanTwo;
        }
        // a transposition-like map: swap two points of the identity
        let mut vals: Vec<Fe> = k.elements().collect();
        vals.swap(2, 5);
        let t = ValueTable::from_values(&k, vals).unwrap();
        let r = rank_upto2_table(&t).unwrap();
        assert_eq!(r.rank_class, rank_by_enumeration(&t).unwrap().rank_class);
        found |= r.rank_class == RankClass::MoreThanTwo;
        assert!(found);
    }

    #[test]
    fn mobius_fit_through_three_points() {
        let k = field(11, 1);
        let m = MobiusMap { a: k.embed(2), b: k.embed(3), c: k.embed(1), d: k.embed(5) };
        let pts = [0, 1, 2].map(|x| {
            let x = k.embed(x);
            match m.eval(&k, x) {
                P1::Finite(y) => (x, y),
                P1::Infinity => unreachable!(),
            }
        });
        assert_eq!(MobiusMap::through(&k, pts).unwrap(), m.normalized(&k));
    }

    #[test]
    fn bound_examples() {
        let k11 = field(11, 1);
        let t = thm_rank2_bound(&k11).unwrap();
        assert_eq!(t.cmp_rational(ratio(13, 2)), Ordering::Equal);
        let k9 = field(3, 2);
        let t9 = thm_rank2_bound(&k9).unwrap();
        assert!((t9.to_f64() - (9.0 - 3.0 - 2.0625f64.sqrt() + 0.25)).abs() < 1e-12);
        assert_eq!(cor_rank2_bound(&k11, 3).unwrap(), 6);
        assert_eq!(cor_rank2_bound(&field(11, 2), 3).unwrap(), 106);
        assert_eq!(cor_rank2_bound(&field(5, 1), 2).unwrap(), 1);
        assert!(cor_rank2_bound(&field(2, 3), 0).is_err());
        assert!(thm_rank2_bound(&field(2, 1)).is_err());
    }

    #[test]
    fn thm_bound_comparisons_are_exact() {
        // Independent oracle: x <= r - sqrt(R) iff (r - x) >= 0 and (r - x)^2 >= R,
        // evaluated in scaled integers: 16 (4A + 1 - 4x)^2 / 16 vs (24p - 39) with A = q - q/p.
        for p in [3i128, 5, 7, 11, 13, 101, 997, 7919, 104729, 999983] {
            let k_bound = Surd::new(ratio(4 * (p - 1) + 1, 4), -1, ratio(24 * p - 39, 16));
            let base = (p - 1) as i64;
            for x in base - 1200.min(base)..=base + 2 {
                let lhs4 = 4 * (p - 1) + 1 - 4 * x as i128; // 4 (r - x)
                let le = lhs4 >= 0 && lhs4 * lhs4 >= 24 * p - 39;
                assert_eq!(k_bound.admits(x), le, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn got_bounds_examples() {
        let (_, w) = got_bounds(1, 11, 2);
        assert_eq!(w, ratio(11, 3) - ratio(2, 1));
        let (_, w) = got_bounds(1, 121, 2);
        assert_eq!(w, ratio(115, 3));
        let (c, _) = got_bounds(6, 11, 2);
        assert_eq!(c, ratio(3, 8));
    }

    #[test]
    fn degree_rank_examples() {
        let k = field(5, 1);
        assert!(degree_rank_check(&Poly::monomial(&k, Fe::ONE, 3), 1));
        assert!(degree_rank_check(&poly(&k, &[0, 1, 1, 2]), 2));
        assert!(!degree_rank_check(&poly(&k, &[1, 1]), 0));
        assert!(!got_eligible(&Poly::monomial(&k, Fe::ONE, 3)));
        assert!(!got_eligible(&poly(&k, &[2, 0, 0, 3])));
        assert!(got_eligible(&poly(&k, &[0, 1, 1, 2])));
        assert!(!got_eligible(&poly(&k, &[1, 1])));
    }

    #[test]
    fn example_f1() {
        let f = example_fn(1, 2).unwrap();
        assert_eq!(f.weight(), 6);
        assert!(f.is_permutation());
        let r = rank_upto2(&f, DEFAULT_RANK_CAP).unwrap();
        assert_eq!(r.rank_class, RankClass::Two);
        assert!(matches!(example_fn(0, 2), Err(Error::BadRange(_))));
        assert!(matches!(example_fn(3, 2), Err(Error::BadRange(_))));
    }

    #[test]
    fn example_f2_matches_closed_form() {
        let f = example_fn(2, 2).unwrap();
        assert_eq!(f.weight(), 106);
        let k = f.ctx().clone();
        let e = |x| k.embed(x);
        assert_eq!(rank2_coeffs(&k, e(-1), e(2), e(1), e(-8)).unwrap(), f);
    }

    #[test]
    fn chain_json_round_trip() {
        let k = field(3, 2);
        let ch = Chain::new(&k, vec![k.embed(2), k.from_coeffs(&[0, 1]).unwrap(), Fe::ONE, Fe::ZERO]).unwrap();
        let s = serde_json::to_string(&ch.to_json()).unwrap();
        let back: ChainJson = serde_json::from_str(&s).unwrap();
        assert_eq!(Chain::from_json(&back).unwrap(), ch);
    }
}
