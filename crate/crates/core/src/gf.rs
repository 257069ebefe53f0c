//! Exact arithmetic in GF(p^n).
//!
//! A field element is stored as the base-p packing `c_0 + c_1 p + ... + c_{n-1} p^{n-1}`
//! of its coefficient vector over the prime field, with respect to the
//! context's modulus. The packing is also the fixed enumeration order of the
//! field: prime fields enumerate `0, 1, ..., p-1`; extension fields enumerate
//! coefficient vectors lexicographically with `c_{n-1}` most significant.
//!
//! Fields up to `2^20` elements carry discrete log/antilog tables built from
//! the primitive element, so multiplication, inversion and powering are table
//! lookups. Small extension fields also get a full addition table.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

const TABLE_MAX: u32 = 1 << 20;
const ADD_TABLE_MAX: u32 = 1 << 10;

/// A field element: packed coefficient vector, meaningful only with its [`FieldCtx`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    /// Position in the field enumeration.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The finite field F_{p^n} with a fixed monic irreducible modulus.
pub struct FieldCtx {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    primitive: OnceLock<Fe>,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u32>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({})", self.spec_string())
    }
}

/// Builds F_{p^n}. Without a modulus, picks the monic irreducible
/// `x^n + c_{n-1}x^{n-1} + ... + c_0` whose tuple `(c_{n-1}, ..., c_0)` is
/// lexicographically least.
pub fn make_field(p: u64, n: u32, modulus: Option<&[u64]>) -> Result<Arc<FieldCtx>> {
    FieldCtx::new(p, n, modulus).map(Arc::new)
}

impl FieldCtx {
    pub fn new(p: u64, n: u32, modulus: Option<&[u64]>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeP(p));
        }
        if n == 0 {
            return Err(Error::BadRange("extension degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(n)
            .filter(|&q| q <= u32::MAX as u64)
            .ok_or_else(|| Error::BadRange(format!("{p}^{n} does not fit in 32 bits")))?;
        let modulus: Vec<u64> = match modulus {
            Some(m) => {
                let reduced: Vec<u64> = m.iter().map(|&c| c % p).collect();
                if reduced.len() != n as usize + 1
                    || reduced[n as usize] != 1
                    || m[n as usize] != 1
                    || !is_irreducible(&reduced, p)
                {
                    return Err(Error::ReducibleModulus(m.to_vec()));
                }
                reduced
            }
            None => default_modulus(p, n),
        };
        let mut ctx = FieldCtx {
            p: p as u32,
            n,
            q: q as u32,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
            primitive: OnceLock::new(),
            exp: Vec::new(),
            log: Vec::new(),
            neg: Vec::new(),
            add: Vec::new(),
        };
        if n > 1 {
            ctx.neg = (0..ctx.q).map(|a| ctx.neg_slow(a)).collect();
            if ctx.q <= ADD_TABLE_MAX {
                let q = ctx.q;
                let mut add = vec![0u32; (q * q) as usize];
                for a in 0..q {
                    for b in 0..q {
                        add[(a * q + b) as usize] = ctx.add_slow(a, b);
                    }
                }
                ctx.add = add;
            }
        }
        if ctx.q <= TABLE_MAX {
            let g = ctx.primitive_element();
            let m = (ctx.q - 1) as usize;
            let mut exp = vec![0u32; 2 * m.max(1)];
            let mut log = vec![0u32; ctx.q as usize];
            let mut x = 1u32;
            for (k, slot) in exp.iter_mut().enumerate().take(m.max(1)) {
                *slot = x;
                if k < m {
                    log[x as usize] = k as u32;
                }
                x = ctx.mul_slow(x, g.0);
            }
            for k in m..2 * m {
                exp[k] = exp[k - m];
            }
            ctx.exp = exp;
            ctx.log = log;
        }
        Ok(ctx)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p as u64
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q as u64
    }

    /// Monic modulus, coefficients low to high.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.n == 1
    }

    /// Errors unless the characteristic is odd.
    pub fn require_odd(&self) -> Result<()> {
        if self.p == 2 {
            Err(Error::EvenCharacteristic(2))
        } else {
            Ok(())
        }
    }

    /// Canonical `p=..,n=..,mod=..` string.
    pub fn spec_string(&self) -> String {
        let m: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        if self.n == 1 {
            format!("p={}", self.p)
        } else {
            format!("p={},n={},mod={}", self.p, self.n, m.join(","))
        }
    }

    pub fn element(&self, index: u64) -> Result<Fe> {
        if index < self.q as u64 {
            Ok(Fe(index as u32))
        } else {
            Err(Error::BadRange(format!("element index {index} >= q = {}", self.q)))
        }
    }

    /// All elements in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.q).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.q).map(Fe)
    }

    /// The integer `i` as the field element `(i mod p) * 1`.
    #[inline]
    pub fn embed(&self, i: i64) -> Fe {
        Fe(i.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<Fe> {
        if coeffs.len() > self.n as usize {
            return Err(Error::BadRange(format!(
                "{} coefficients for a degree-{} extension",
                coeffs.len(),
                self.n
            )));
        }
        let p = self.p as i64;
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = acc * p as u64 + c.rem_euclid(p) as u64;
        }
        Ok(Fe(acc as u32))
    }

    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.n as usize);
        let mut x = a.0;
        for _ in 0..self.n {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.n == 1 {
            let s = a.0 as u64 + b.0 as u64;
            let p = self.p as u64;
            Fe(if s >= p { s - p } else { s } as u32)
        } else if !self.add.is_empty() {
            Fe(self.add[(a.0 * self.q + b.0) as usize])
        } else {
            Fe(self.add_slow(a.0, b.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if self.n == 1 {
            Fe(if a.0 == 0 { 0 } else { self.p - a.0 })
        } else {
            Fe(self.neg[a.0 as usize])
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        if !self.log.is_empty() {
            let k = self.log[a.0 as usize] + self.log[b.0 as usize];
            Fe(self.exp[k as usize])
        } else {
            Fe(self.mul_slow(a.0, b.0))
        }
    }

    /// `a^e` with `0^0 = 1`.
    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        if !self.log.is_empty() {
            let m = (self.q - 1) as u64;
            let k = (self.log[a.0 as usize] as u64 * (e % m)) % m;
            return Fe(self.exp[k as usize]);
        }
        let mut base = a;
        let mut e = e;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^{q-2}`: the inverse of a nonzero element, and 0 at 0.
    #[inline]
    pub fn inv0(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return Fe::ZERO;
        }
        if !self.log.is_empty() {
            let m = self.q - 1;
            let l = self.log[a.0 as usize];
            Fe(self.exp[((m - l) % m.max(1)) as usize])
        } else {
            self.pow(a, self.q as u64 - 2)
        }
    }

    /// `a / b` for nonzero `b`.
    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        if b.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.mul(a, self.inv0(b)))
    }

    /// Least `l >= 1` with `a^l = 1`.
    pub fn order(&self, a: Fe) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let m = self.q as u64 - 1;
        let mut l = m;
        for (r, _) in factorize(m) {
            while l.is_multiple_of(r) && self.pow_slow(a.0, l / r) == 1 {
                l /= r;
            }
        }
        Ok(l)
    }

    /// Least element (enumeration order, starting at 2) of order `q - 1`.
    pub fn primitive_element(&self) -> Fe {
        *self.primitive.get_or_init(|| {
            if self.q == 2 {
                return Fe::ONE;
            }
            (2..self.q)
                .map(Fe)
                .find(|&g| self.order(g) == Ok(self.q as u64 - 1))
                .expect("the multiplicative group of a finite field is cyclic")
        })
    }

    /// Discrete logarithm to the primitive base, when tables are present.
    pub fn log(&self, a: Fe) -> Option<u64> {
        if a.is_zero() || self.log.is_empty() {
            None
        } else {
            Some(self.log[a.0 as usize] as u64)
        }
    }

    pub fn fmt_element(&self, a: Fe) -> String {
        if self.n == 1 {
            a.0.to_string()
        } else {
            let c: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
            format!("[{}]", c.join(","))
        }
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let (p, mut a, mut b) = (self.p, a, b);
        let mut acc = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.n {
            let d = (a % p + b % p) % p;
            acc += d * scale;
            scale = scale.wrapping_mul(p);
            a /= p;
            b /= p;
        }
        acc
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let (p, mut a) = (self.p, a);
        let mut acc = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.n {
            let d = (p - a % p) % p;
            acc += d * scale;
            scale = scale.wrapping_mul(p);
            a /= p;
        }
        acc
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.n == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let n = self.n as usize;
        let da = self.coeffs(Fe(a));
        let db = self.coeffs(Fe(b));
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for k in (n..2 * n - 1).rev() {
            let c = prod[k];
            if c != 0 {
                for (t, &m) in self.modulus.iter().enumerate().take(n) {
                    let idx = k - n + t;
                    prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
                }
                prod[k] = 0;
            }
        }
        let mut acc = 0u64;
        for &c in prod[..n].iter().rev() {
            acc = acc * p + c;
        }
        acc as u32
    }

    fn pow_slow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Binomial coefficient `C(m, k) mod p` as a product of base-p digit binomials.
pub fn lucas_binom(m: i64, k: i64, p: u64) -> Result<u64> {
    if k < 0 || k > m {
        return Err(Error::BadRange(format!("binomial({m}, {k})")));
    }
    if !is_prime(p) {
        return Err(Error::CompositeP(p));
    }
    let (mut m, mut k) = (m as u64, k as u64);
    let mut acc = 1u64;
    while k > 0 || m > 0 {
        let (md, kd) = (m % p, k % p);
        if kd > md {
            return Ok(0);
        }
        acc = acc * small_binom_mod(md, kd, p) % p;
        m /= p;
        k /= p;
    }
    Ok(acc % p)
}

// C(m, k) mod p for m < p.
fn small_binom_mod(m: u64, k: u64, p: u64) -> u64 {
    let k = k.min(m - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for j in 0..k {
        num = num * ((m - j) % p) % p;
        den = den * ((j + 1) % p) % p;
    }
    num * pow_mod(den, p - 2, p) % p
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic primality by trial division (inputs are at most 64-bit,
/// in practice far smaller).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn default_modulus(p: u64, n: u32) -> Vec<u64> {
    let total = p.pow(n);
    for k in 0..total {
        // Digits of k, most significant first, are (c_{n-1}, ..., c_0).
        let mut f = vec![0u64; n as usize + 1];
        let mut x = k;
        for slot in f.iter_mut().take(n as usize) {
            *slot = x % p;
            x /= p;
        }
        f[n as usize] = 1;
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Irreducibility over F_p of a monic polynomial (coefficients low to high).
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    let n = match f.len() {
        0 | 1 => return false,
        len => len - 1,
    };
    if n == 1 {
        return true;
    }
    if n <= 3 {
        return (0..p).all(|x| eval_fp(&f, x, p) != 0);
    }
    // Rabin-style: no factor of degree k <= n/2, i.e. gcd(f, x^{p^k} - x) = 1.
    let mut h = vec![0, 1];
    for _ in 1..=n / 2 {
        h = powmod_fp(&h, p, &f, p);
        let mut g = h.clone();
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = (g[1] + p - 1) % p;
        let g = gcd_fp(f.clone(), trim(g), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn eval_fp(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

fn rem_fp(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    let lead_inv = pow_mod(m[dm], p - 2, p);
    while a.len() > dm {
        let top = a.len() - 1;
        let c = a[top] * lead_inv % p;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - dm + i;
                a[idx] = (a[idx] + (p - c) * mi) % p;
            }
        }
        a.pop();
        a = trim(a);
    }
    trim(a)
}

fn mulmod_fp(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    rem_fp(prod, m, p)
}

fn powmod_fp(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem_fp(base.to_vec(), m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_fp(&acc, &b, m, p);
        }
        b = mulmod_fp(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn gcd_fp(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let r = rem_fp(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Parsed form of the CLI field string `p=<int>[,n=<int>][,mod=<c0,c1,...,1>]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
    pub n: u32,
    pub modulus: Option<Vec<u64>>,
}

impl FieldSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("field spec {s:?}: {msg}"));
        let s = s.trim();
        let (head, modulus) = match s.find("mod=") {
            Some(pos) => {
                let coeffs = s[pos + 4..]
                    .split(',')
                    .map(|c| c.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("bad modulus coefficient"))?;
                if coeffs.last() != Some(&1) {
                    return Err(bad("modulus must end with the leading coefficient 1"));
                }
                (s[..pos].trim_end_matches(','), Some(coeffs))
            }
            None => (s, None),
        };
        let mut p = None;
        let mut n = None;
        for part in head.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "p" => p = Some(v.trim().parse::<u64>().map_err(|_| bad("bad p"))?),
                "n" => n = Some(v.trim().parse::<u32>().map_err(|_| bad("bad n"))?),
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }
        let p = p.ok_or_else(|| bad("missing p"))?;
        let n = match (n, &modulus) {
            (Some(n), Some(m)) if m.len() != n as usize + 1 => {
                return Err(bad("modulus degree does not match n"))
            }
            (Some(n), _) => n,
            (None, Some(m)) => (m.len() - 1) as u32,
            (None, None) => 1,
        };
        Ok(FieldSpec { p, n, modulus })
    }

    pub fn build(&self) -> Result<Arc<FieldCtx>> {
        make_field(self.p, self.n, self.modulus.as_deref())
    }
}
