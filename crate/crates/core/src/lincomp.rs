//! Linear complexity of sequences over F_q and the weight identity for
//! `s_n = f(alpha^n)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldCtx, FieldSpec};
use crate::poly::{element_from_json, element_to_json, Poly};

#[derive(Clone, Debug)]
pub struct Sequence {
    ctx: Arc<FieldCtx>,
    terms: Vec<Fe>,
    source: Option<(Poly, Fe)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceJson {
    pub field: String,
    pub terms: Vec<Value>,
}

impl Sequence {
    pub fn new(ctx: &Arc<FieldCtx>, terms: Vec<Fe>) -> Result<Self> {
        if terms.iter().any(|t| t.index() as u64 >= ctx.q()) {
            return Err(Error::MixedFields);
        }
        Ok(Sequence { ctx: ctx.clone(), terms, source: None })
    }

    /// One period `f(alpha^0), ..., f(alpha^{q-2})`; `alpha` defaults to the
    /// field's primitive element.
    pub fn from_poly(f: &Poly, alpha: Option<Fe>) -> Result<Self> {
        let k = f.ctx();
        let alpha = match alpha {
            Some(a) if k.order(a)? != k.q() - 1 => {
                return Err(Error::BadParam(format!("{} is not primitive", k.fmt_element(a))))
            }
            Some(a) => a,
            None => k.primitive_element(),
        };
        let t = f.eval_table();
        let mut terms = Vec::with_capacity(k.q() as usize - 1);
        let mut x = Fe::ONE;
        for _ in 0..k.q() - 1 {
            terms.push(t.at(x));
            x = k.mul(x, alpha);
        }
        Ok(Sequence { ctx: k.clone(), terms, source: Some((f.clone(), alpha)) })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn terms(&self) -> &[Fe] {
        &self.terms
    }

    pub fn source(&self) -> Option<&(Poly, Fe)> {
        self.source.as_ref()
    }

    /// The first `periods` repetitions of the terms.
    pub fn repeated(&self, periods: usize) -> Vec<Fe> {
        self.terms.repeat(periods)
    }

    pub fn to_json(&self) -> SequenceJson {
        SequenceJson {
            field: self.ctx.spec_string(),
            terms: self.terms.iter().map(|&t| element_to_json(&self.ctx, t)).collect(),
        }
    }

    pub fn from_json(j: &SequenceJson) -> Result<Self> {
        let ctx = FieldSpec::parse(&j.field)?.build()?;
        let terms = j.terms.iter().map(|v| element_from_json(&ctx, v)).collect::<Result<Vec<_>>>()?;
        Sequence::new(&ctx, terms)
    }
}

/// Length of the shortest linear recurrence generating `s`.
pub fn berlekamp_massey(k: &FieldCtx, s: &[Fe]) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut c = vec![Fe::ONE];
    let mut b = vec![Fe::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last = Fe::ONE;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d = k.add(d, k.mul(c[i], s[n - i]));
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = k.div(d, last)?;
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, Fe::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = k.sub(c[i + shift], k.mul(coef, bi));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    Ok(l)
}

/// Weight after merging the `x^{q-1}` coefficient into the constant term.
pub fn folded_weight(f: &Poly) -> usize {
    let k = f.ctx();
    let q = k.q() as usize;
    let c = f.coeffs();
    let c0 = k.add(c[0], c[q - 1]);
    (1..q - 1).filter(|&i| !c[i].is_zero()).count() + usize::from(!c0.is_zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlahutReport {
    pub lc: usize,
    pub folded_weight: usize,
    pub equal: bool,
}

/// Linear complexity of two periods of `f(alpha^n)` against the weight of
/// `f`, folded unless `fold` is false.
pub fn blahut_check(f: &Poly, cap: u64, fold: bool) -> Result<BlahutReport> {
    let k = f.ctx();
    if k.q() > cap {
        return Err(Error::FieldTooLarge { q: k.q(), cap });
    }
    let seq = Sequence::from_poly(f, None)?;
    let lc = berlekamp_massey(k, &seq.repeated(2))?;
    let w = if fold { folded_weight(f) } else { f.weight() };
    Ok(BlahutReport { lc, folded_weight: w, equal: lc == w })
}
