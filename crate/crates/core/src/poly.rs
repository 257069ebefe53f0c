//! Polynomials over F_q reduced modulo `x^q - x`, i.e. functions F_q -> F_q.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{lucas_binom, Fe, FieldCtx, FieldSpec};

/// Dense reduced polynomial: `coeffs[i]` is the coefficient of `x^i`, length `q`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<Fe>,
}

/// Values of a map F_q -> F_q in the field's enumeration order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValueTable {
    ctx: Arc<FieldCtx>,
    values: Vec<Fe>,
}

/// Folded exponent of `x^e` modulo `x^q - x`.
#[inline]
pub fn fold_exponent(e: u64, q: u64) -> usize {
    if e == 0 {
        0
    } else {
        ((e - 1) % (q - 1) + 1) as usize
    }
}

/// Sums sparse `(exponent, coefficient)` terms into reduced form.
pub fn reduce_mod_xq_x(ctx: &Arc<FieldCtx>, terms: &[(u64, Fe)]) -> Result<Poly> {
    let q = ctx.q();
    let mut coeffs = vec![Fe::ZERO; q as usize];
    for &(e, c) in terms {
        if c.index() as u64 >= q {
            return Err(Error::MixedFields);
        }
        let k = fold_exponent(e, q);
        coeffs[k] = ctx.add(coeffs[k], c);
    }
    Ok(Poly { ctx: ctx.clone(), coeffs })
}

impl Poly {
    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        Poly { ctx: ctx.clone(), coeffs: vec![Fe::ZERO; ctx.q() as usize] }
    }

    pub fn constant(ctx: &Arc<FieldCtx>, c: Fe) -> Self {
        let mut p = Poly::zero(ctx);
        p.coeffs[0] = c;
        p
    }

    /// `a x + b`.
    pub fn linear(ctx: &Arc<FieldCtx>, a: Fe, b: Fe) -> Self {
        let mut p = Poly::constant(ctx, b);
        p.coeffs[1 % ctx.q() as usize] = ctx.add(p.coeffs[1 % ctx.q() as usize], a);
        p
    }

    pub fn monomial(ctx: &Arc<FieldCtx>, c: Fe, e: u64) -> Self {
        let mut p = Poly::zero(ctx);
        p.coeffs[fold_exponent(e, ctx.q())] = c;
        p
    }

    /// Dense coefficients `c_0, c_1, ...` of any length, folded into reduced form.
    pub fn from_coeffs(ctx: &Arc<FieldCtx>, coeffs: Vec<Fe>) -> Result<Self> {
        if coeffs.len() == ctx.q() as usize {
            if coeffs.iter().any(|c| c.index() as u64 >= ctx.q()) {
                return Err(Error::MixedFields);
            }
            return Ok(Poly { ctx: ctx.clone(), coeffs });
        }
        let terms: Vec<(u64, Fe)> = coeffs.into_iter().enumerate().map(|(i, c)| (i as u64, c)).collect();
        reduce_mod_xq_x(ctx, &terms)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs[i]
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| i).collect()
    }

    pub fn evaluate(&self, x: Fe) -> Result<Fe> {
        if x.index() as u64 >= self.ctx.q() {
            return Err(Error::MixedFields);
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    fn eval_unchecked(&self, x: Fe) -> Fe {
        let k = &self.ctx;
        self.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| k.add(k.mul(acc, x), c))
    }

    pub fn eval_table(&self) -> ValueTable {
        let values = self.ctx.elements().map(|x| self.eval_unchecked(x)).collect();
        ValueTable { ctx: self.ctx.clone(), values }
    }

    pub fn is_permutation(&self) -> bool {
        self.eval_table().is_bijection()
    }

    fn same_field(&self, other: &Poly) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let k = &self.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| k.add(a, b)).collect();
        Ok(Poly { ctx: k.clone(), coeffs })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let k = &self.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| k.sub(a, b)).collect();
        Ok(Poly { ctx: k.clone(), coeffs })
    }

    pub fn scale(&self, s: Fe) -> Poly {
        let k = &self.ctx;
        Poly { ctx: k.clone(), coeffs: self.coeffs.iter().map(|&c| k.mul(c, s)).collect() }
    }

    pub fn add_constant(&self, c: Fe) -> Poly {
        let mut out = self.clone();
        out.coeffs[0] = self.ctx.add(out.coeffs[0], c);
        out
    }

    /// Product in F_q[x] / (x^q - x).
    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let k = &self.ctx;
        let q = k.q();
        let mut out = vec![Fe::ZERO; q as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let e = fold_exponent((i + j) as u64, q);
                out[e] = k.add(out[e], k.mul(a, b));
            }
        }
        Ok(Poly { ctx: k.clone(), coeffs: out })
    }

    /// `self^e` in F_q[x] / (x^q - x), with `f^0 = 1`.
    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::constant(&self.ctx, Fe::ONE);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same field");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same field");
            }
        }
        acc
    }

    /// Composition `self(a x + b)`, computed through the value table.
    pub fn compose_linear(&self, a: Fe, b: Fe) -> Poly {
        let k = &self.ctx;
        let t = ValueTable::from_fn(k, |x| self.eval_unchecked(k.add(k.mul(a, x), b)));
        interpolate(&t)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            field: self.ctx.spec_string(),
            coeffs: self.coeffs.iter().map(|&c| element_to_json(&self.ctx, c)).collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Poly> {
        let ctx = FieldSpec::parse(&j.field)?.build()?;
        Poly::from_json_in(&ctx, j)
    }

    pub fn from_json_in(ctx: &Arc<FieldCtx>, j: &PolyJson) -> Result<Poly> {
        let coeffs = j.coeffs.iter().map(|v| element_from_json(ctx, v)).collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Ok(Poly::zero(ctx));
        }
        Poly::from_coeffs(ctx, coeffs)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.ctx.spec_string(), self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = self.ctx.fmt_element(c);
            let coef = if c == Fe::ONE && i > 0 { String::new() } else { cs };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// JSON form `{"field": "<field spec>", "coeffs": [c0, c1, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    pub field: String,
    pub coeffs: Vec<Value>,
}

/// Prime-field elements as integers, extension elements as coefficient vectors.
pub fn element_to_json(ctx: &FieldCtx, a: Fe) -> Value {
    if ctx.is_prime_field() {
        Value::from(a.index())
    } else {
        Value::from(ctx.coeffs(a))
    }
}

/// Accepts an integer (embedded as `(k mod p) * 1`) or a coefficient vector.
pub fn element_from_json(ctx: &FieldCtx, v: &Value) -> Result<Fe> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|k| ctx.embed(k))
            .ok_or_else(|| Error::Parse(format!("bad coefficient {n}"))),
        Value::Array(items) => {
            let c = items
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Parse(format!("bad coefficient {x}"))))
                .collect::<Result<Vec<_>>>()?;
            ctx.from_coeffs(&c)
        }
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

impl ValueTable {
    pub fn from_fn(ctx: &Arc<FieldCtx>, f: impl Fn(Fe) -> Fe) -> Self {
        ValueTable { ctx: ctx.clone(), values: ctx.elements().map(f).collect() }
    }

    pub fn from_values(ctx: &Arc<FieldCtx>, values: Vec<Fe>) -> Result<Self> {
        if values.len() as u64 != ctx.q() {
            return Err(Error::BadRange(format!("table has {} entries, expected {}", values.len(), ctx.q())));
        }
        if values.iter().any(|v| v.index() as u64 >= ctx.q()) {
            return Err(Error::MixedFields);
        }
        Ok(ValueTable { ctx: ctx.clone(), values })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn values(&self) -> &[Fe] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: Fe) -> Fe {
        self.values[x.index() as usize]
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.values.len()];
        for v in &self.values {
            let s = &mut seen[v.index() as usize];
            if *s {
                return false;
            }
            *s = true;
        }
        true
    }
}

/// Lagrange interpolation in kernel form `sum_a f(a) (1 - (x - a)^{q-1})`.
pub fn interpolate(t: &ValueTable) -> Poly {
    let k = &t.ctx;
    let q = k.q();
    let qi = q as usize;
    let p = k.p();
    // C(q-1, j) mod p embedded in the prime field.
    let binom: Vec<Fe> = (0..q)
        .map(|j| k.embed(lucas_binom(q as i64 - 1, j as i64, p).expect("0 <= j <= q-1") as i64))
        .collect();
    let mut out = vec![Fe::ZERO; qi];
    for (a, &fa) in k.elements().zip(&t.values) {
        if fa.is_zero() {
            continue;
        }
        out[0] = k.add(out[0], fa);
        let na = k.neg(a);
        // Coefficient of x^j in (x - a)^{q-1} is C(q-1, j) (-a)^{q-1-j}.
        let mut pw = fa;
        for j in (0..qi).rev() {
            if pw.is_zero() {
                break;
            }
            if !binom[j].is_zero() {
                out[j] = k.sub(out[j], k.mul(binom[j], pw));
            }
            pw = k.mul(pw, na);
        }
    }
    Poly { ctx: k.clone(), coeffs: out }
}
