//! Finite fields GF(p^k).
//!
//! The modulus of GF(p^k) is the lowest monic irreducible polynomial of
//! degree k, where candidates are ordered by reading the coefficient vector
//! `(c_{k-1}, ..., c_0)` as a base-p numeral. Elements are stored as the
//! integer `sum c_i p^i` of their coordinates in the basis `1, x, ..., x^{k-1}`.
//!
//! Contexts are interned: two calls with the same `(p, modulus)` return the
//! same context, so elements from independently constructed but identical
//! fields can be mixed freely.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Largest extension degree accepted.
pub const MAX_DEGREE: usize = 64;
/// Fields up to this order get log/antilog tables.
const TABLE_LIMIT: u128 = 1 << 16;
/// Largest target order for which subfield embeddings are searched.
const EMBED_SEARCH_LIMIT: u128 = 1 << 24;

/// Element of a finite field, tagged with the id of its context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GfElement {
    field: u32,
    code: u128,
}

impl GfElement {
    /// Integer encoding `sum c_i p^i`.
    pub fn code(&self) -> u128 {
        self.code
    }

    pub fn field_id(&self) -> u32 {
        self.field
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct Inner {
    id: u32,
    p: u64,
    k: usize,
    modulus: Vec<u64>,
    order: u128,
    tables: Option<Tables>,
}

/// Handle to an interned finite field. Cheap to clone.
#[derive(Clone)]
pub struct FieldContext {
    inner: Arc<Inner>,
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.inner.id == other.inner.id
    }
}

impl Eq for FieldContext {}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) modulus {:?}", self.inner.p, self.inner.k, self.inner.modulus)
    }
}

#[derive(Default)]
struct Registry {
    by_modulus: HashMap<(u64, Vec<u64>), FieldContext>,
    canonical: HashMap<(u64, usize), FieldContext>,
    next_id: u32,
}

fn registry() -> &'static Mutex<Registry> {
    static REG: OnceLock<Mutex<Registry>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(Registry::default()))
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn checked_order(p: u64, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p as u128)?;
    }
    // Keep one bit of headroom so `order - 1 + order - 1` style sums never wrap.
    if acc > (1u128 << 127) {
        return None;
    }
    Some(acc)
}

// ---------------------------------------------------------------------------
// polynomial arithmetic over F_p, little-endian coefficient vectors

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = mod_inv(f[df], p);
    while r.len() > df {
        let top = r.len() - 1;
        let c = (r[top] as u128 * lead_inv as u128 % p as u128) as u64;
        if c != 0 {
            let shift = top - df;
            for (i, &fi) in f.iter().enumerate() {
                let sub = (c as u128 * fi as u128 % p as u128) as u64;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    let pp = p as u128;
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai as u128 * bj as u128) % pp;
        }
    }
    let mut v: Vec<u64> = out.into_iter().map(|x| x as u64).collect();
    trim(&mut v);
    v
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    poly_rem(&poly_mul(a, b, p), f, p)
}

fn poly_powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    poly_rem(&result, f, p)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u128;
    let pp = p as u128;
    let mut bb = b as u128 % pp;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % pp;
        }
        bb = bb * bb % pp;
        e >>= 1;
    }
    b = r as u64;
    b
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

/// Rabin's irreducibility test for a monic polynomial over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // frob[j] = x^{p^j} mod f
    let mut frob = Vec::with_capacity(k + 1);
    frob.push(poly_rem(&x, f, p));
    for j in 1..=k {
        let prev: &Vec<u64> = &frob[j - 1];
        frob.push(poly_powmod(prev, p as u128, f, p));
    }
    if poly_sub(&frob[k], &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_factors(k as u128) {
        let d = poly_sub(&frob[k / r as usize], &x, p);
        let g = poly_gcd(f, &d, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn lowest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let mut lower = vec![0u64; k];
    loop {
        let mut f = lower.clone();
        f.push(1);
        if (k == 1 || f[0] != 0) && is_irreducible(&f, p) {
            return f;
        }
        // increment lower as a base-p numeral with c_0 least significant
        let mut i = 0;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
        }
    }
}

impl FieldContext {
    /// GF(p^k) with the canonical modulus.
    pub fn new(p: u64, k: usize) -> Result<Self> {
        Self::validate(p, k)?;
        {
            let reg = registry().lock().unwrap();
            if let Some(ctx) = reg.canonical.get(&(p, k)) {
                return Ok(ctx.clone());
            }
        }
        let modulus = lowest_irreducible(p, k);
        let ctx = Self::intern(p, modulus)?;
        registry().lock().unwrap().canonical.insert((p, k), ctx.clone());
        Ok(ctx)
    }

    /// The prime field F_p.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    /// Field with an explicitly given monic modulus (little-endian coefficients).
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Self> {
        if modulus.len() < 2 {
            return invalid("modulus must have degree at least 1");
        }
        Self::validate(p, modulus.len() - 1)?;
        if *modulus.last().unwrap() != 1 {
            return invalid("modulus must be monic");
        }
        if modulus.iter().any(|&c| c >= p) {
            return invalid("modulus coefficient out of range");
        }
        if !is_irreducible(modulus, p) {
            return invalid("modulus is reducible");
        }
        Self::intern(p, modulus.to_vec())
    }

    fn validate(p: u64, k: usize) -> Result<()> {
        if !is_prime(p) || p >= 1 << 32 {
            return invalid(format!("characteristic {p} is not a prime below 2^32"));
        }
        if k == 0 || k > MAX_DEGREE {
            return invalid(format!("degree {k} outside 1..={MAX_DEGREE}"));
        }
        if checked_order(p, k).is_none() {
            return Err(Error::Resource(format!("field order {p}^{k} exceeds 2^127")));
        }
        Ok(())
    }

    fn intern(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let key = (p, modulus.clone());
        if let Some(ctx) = registry().lock().unwrap().by_modulus.get(&key) {
            return Ok(ctx.clone());
        }
        let k = modulus.len() - 1;
        let order = checked_order(p, k).expect("validated");
        let mut inner = Inner { id: 0, p, k, modulus, order, tables: None };
        if order <= TABLE_LIMIT {
            inner.tables = Some(build_tables(&inner));
        }
        let mut reg = registry().lock().unwrap();
        if let Some(ctx) = reg.by_modulus.get(&key) {
            return Ok(ctx.clone());
        }
        inner.id = reg.next_id;
        reg.next_id += 1;
        let ctx = FieldContext { inner: Arc::new(inner) };
        reg.by_modulus.insert(key, ctx.clone());
        Ok(ctx)
    }

    pub fn id(&self) -> u32 {
        self.inner.id
    }

    pub fn characteristic(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> usize {
        self.inner.k
    }

    pub fn order(&self) -> u128 {
        self.inner.order
    }

    /// Modulus coefficients, little-endian, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    pub fn zero(&self) -> GfElement {
        self.wrap(0)
    }

    pub fn one(&self) -> GfElement {
        self.wrap(1)
    }

    pub(crate) fn wrap(&self, code: u128) -> GfElement {
        GfElement { field: self.inner.id, code }
    }

    /// Element from its integer encoding.
    pub fn element(&self, code: u128) -> Result<GfElement> {
        if code >= self.inner.order {
            return invalid(format!("code {code} out of range for {self:?}"));
        }
        Ok(self.wrap(code))
    }

    /// Element `sum c_i x^i`; `coeffs` may be shorter than k.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<GfElement> {
        if coeffs.len() > self.inner.k {
            return invalid("too many coefficients");
        }
        if coeffs.iter().any(|&c| c >= self.inner.p) {
            return invalid("coefficient out of range");
        }
        Ok(self.wrap(self.encode(coeffs)))
    }

    /// Coordinates in the basis `1, x, ..., x^{k-1}`.
    pub fn coeffs(&self, a: GfElement) -> Result<Vec<u64>> {
        self.check(a)?;
        Ok(self.decode(a.code))
    }

    /// The basis `beta_i = x^{i-1}`, i = 1..k.
    pub fn basis(&self) -> Vec<GfElement> {
        (0..self.inner.k)
            .map(|i| {
                let mut c = vec![0u64; i + 1];
                c[i] = 1;
                self.wrap(self.encode(&c))
            })
            .collect()
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GfElement {
        self.wrap(rng.gen_range(0..self.inner.order))
    }

    fn check(&self, a: GfElement) -> Result<()> {
        if a.field != self.inner.id {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, a: GfElement, b: GfElement) -> Result<GfElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.add_c(a.code, b.code)))
    }

    pub fn sub(&self, a: GfElement, b: GfElement) -> Result<GfElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.sub_c(a.code, b.code)))
    }

    pub fn neg(&self, a: GfElement) -> Result<GfElement> {
        self.check(a)?;
        Ok(self.wrap(self.neg_c(a.code)))
    }

    pub fn mul(&self, a: GfElement, b: GfElement) -> Result<GfElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.mul_c(a.code, b.code)))
    }

    pub fn inv(&self, a: GfElement) -> Result<GfElement> {
        self.check(a)?;
        if a.code == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.wrap(self.inv_c(a.code)))
    }

    pub fn div(&self, a: GfElement, b: GfElement) -> Result<GfElement> {
        let bi = self.inv(b)?;
        self.mul(a, bi)
    }

    pub fn pow(&self, a: GfElement, e: u128) -> Result<GfElement> {
        self.check(a)?;
        Ok(self.wrap(self.pow_c(a.code, e)))
    }

    /// Frobenius map `a -> a^p`.
    pub fn frobenius(&self, a: GfElement) -> Result<GfElement> {
        self.pow(a, self.inner.p as u128)
    }

    /// Matrix of `y -> a*y` over F_p acting on coordinate column vectors.
    pub fn regular_representation(&self, a: GfElement) -> Result<Vec<Vec<u64>>> {
        self.check(a)?;
        let k = self.inner.k;
        let mut m = vec![vec![0u64; k]; k];
        for (j, bj) in self.basis().into_iter().enumerate() {
            let col = self.decode(self.mul_c(a.code, bj.code));
            for i in 0..k {
                m[i][j] = col[i];
            }
        }
        Ok(m)
    }

    /// Embedding of `src` into `self`; requires equal characteristic and
    /// `src.degree()` dividing `self.degree()`.
    pub fn embedding_from(&self, src: &FieldContext) -> Result<Embedding> {
        if src.characteristic() != self.characteristic() {
            return invalid("embedding between fields of different characteristic");
        }
        if !self.degree().is_multiple_of(src.degree()) {
            return invalid(format!(
                "GF({}^{}) is not a subfield of GF({}^{})",
                src.characteristic(),
                src.degree(),
                self.characteristic(),
                self.degree()
            ));
        }
        if src == self || src.degree() == 1 {
            return Ok(Embedding { src: src.clone(), dst: self.clone(), root: None });
        }
        if self.order() > EMBED_SEARCH_LIMIT {
            return Err(Error::Resource("subfield embedding search too large".into()));
        }
        // smallest root of the source modulus in the target field
        let m = src.modulus();
        for c in 0..self.order() {
            let mut acc = 0u128;
            for &coef in m.iter().rev() {
                acc = self.add_c(self.mul_c(acc, c), coef as u128);
            }
            if acc == 0 {
                return Ok(Embedding { src: src.clone(), dst: self.clone(), root: Some(c) });
            }
        }
        Err(Error::Internal("no root of subfield modulus found".into()))
    }

    /// Embed `a` (from `src`) into this field.
    pub fn embed(&self, a: GfElement, src: &FieldContext) -> Result<GfElement> {
        self.embedding_from(src)?.apply(a)
    }

    // -----------------------------------------------------------------------
    // code-level arithmetic, no context checks

    pub(crate) fn decode(&self, mut code: u128) -> Vec<u64> {
        let p = self.inner.p as u128;
        let mut out = vec![0u64; self.inner.k];
        for c in out.iter_mut() {
            *c = (code % p) as u64;
            code /= p;
        }
        out
    }

    pub(crate) fn encode(&self, coeffs: &[u64]) -> u128 {
        let p = self.inner.p as u128;
        coeffs.iter().rev().fold(0u128, |acc, &c| acc * p + c as u128)
    }

    pub(crate) fn add_c(&self, a: u128, b: u128) -> u128 {
        let p = self.inner.p;
        if p == 2 {
            return a ^ b;
        }
        if self.inner.k == 1 {
            let s = a + b;
            return if s >= p as u128 { s - p as u128 } else { s };
        }
        let (mut a, mut b) = (a, b);
        let pp = p as u128;
        let mut out = 0u128;
        let mut place = 1u128;
        for _ in 0..self.inner.k {
            let d = (a % pp + b % pp) % pp;
            out += d * place;
            a /= pp;
            b /= pp;
            place = place.wrapping_mul(pp);
        }
        out
    }

    pub(crate) fn neg_c(&self, a: u128) -> u128 {
        let p = self.inner.p;
        if p == 2 {
            return a;
        }
        if self.inner.k == 1 {
            return if a == 0 { 0 } else { p as u128 - a };
        }
        let pp = p as u128;
        let mut a = a;
        let mut out = 0u128;
        let mut place = 1u128;
        for _ in 0..self.inner.k {
            let d = (pp - a % pp) % pp;
            out += d * place;
            a /= pp;
            place = place.wrapping_mul(pp);
        }
        out
    }

    pub(crate) fn sub_c(&self, a: u128, b: u128) -> u128 {
        self.add_c(a, self.neg_c(b))
    }

    pub(crate) fn mul_c(&self, a: u128, b: u128) -> u128 {
        if a == 0 || b == 0 {
            return 0;
        }
        if let Some(t) = &self.inner.tables {
            let la = t.log[a as usize] as usize;
            let lb = t.log[b as usize] as usize;
            return t.exp[la + lb] as u128;
        }
        if self.inner.k == 1 {
            return a * b % self.inner.p as u128;
        }
        let pa = self.decode(a);
        let pb = self.decode(b);
        let r = poly_mulmod(&pa, &pb, &self.inner.modulus, self.inner.p);
        self.encode(&r)
    }

    pub(crate) fn pow_c(&self, a: u128, mut e: u128) -> u128 {
        let mut r = 1u128;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_c(r, b);
            }
            b = self.mul_c(b, b);
            e >>= 1;
        }
        r
    }

    /// Inverse of a nonzero code.
    pub(crate) fn inv_c(&self, a: u128) -> u128 {
        debug_assert!(a != 0);
        if let Some(t) = &self.inner.tables {
            let n1 = (self.inner.order - 1) as usize;
            let la = t.log[a as usize] as usize;
            return t.exp[(n1 - la) % n1] as u128;
        }
        self.pow_c(a, self.inner.order - 2)
    }
}

fn build_tables(inner: &Inner) -> Tables {
    let n = inner.order as usize;
    let slow_mul = |a: u128, b: u128| -> u128 {
        let p = inner.p as u128;
        let dec = |mut c: u128| -> Vec<u64> {
            (0..inner.k)
                .map(|_| {
                    let d = (c % p) as u64;
                    c /= p;
                    d
                })
                .collect()
        };
        let r = poly_mulmod(&dec(a), &dec(b), &inner.modulus, inner.p);
        r.iter().rev().fold(0u128, |acc, &c| acc * p + c as u128)
    };
    let slow_pow = |a: u128, mut e: u128| -> u128 {
        let mut r = 1u128;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = slow_mul(r, b);
            }
            b = slow_mul(b, b);
            e >>= 1;
        }
        r
    };
    let factors = prime_factors((n - 1) as u128);
    let g = (1..n as u128)
        .find(|&g| factors.iter().all(|&r| slow_pow(g, (n as u128 - 1) / r) != 1))
        .expect("multiplicative group is cyclic");
    let mut exp = vec![0u32; 2 * (n - 1).max(1)];
    let mut log = vec![0u32; n];
    let mut cur = 1u128;
    for i in 0..n - 1 {
        exp[i] = cur as u32;
        log[cur as usize] = i as u32;
        cur = slow_mul(cur, g);
    }
    for i in n - 1..exp.len() {
        exp[i] = exp[i - (n - 1).max(1)];
    }
    Tables { exp, log }
}

/// Precomputed field embedding `src -> dst`.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: FieldContext,
    dst: FieldContext,
    /// Image of the generator `x` of `src`; `None` when the map is the
    /// identity on codes (prime subfield or same field).
    root: Option<u128>,
}

impl Embedding {
    pub fn apply(&self, a: GfElement) -> Result<GfElement> {
        self.src.check(a)?;
        Ok(self.dst.wrap(self.apply_code(a.code)))
    }

    pub(crate) fn apply_code(&self, code: u128) -> u128 {
        match self.root {
            None => code,
            Some(r) => {
                let c = self.src.decode(code);
                c.iter()
                    .rev()
                    .fold(0u128, |acc, &ci| self.dst.add_c(self.dst.mul_c(acc, r), ci as u128))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_moduli() {
        assert_eq!(FieldContext::new(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(FieldContext::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(FieldContext::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(FieldContext::new(2, 8).unwrap().modulus(), &[1, 1, 0, 1, 1, 0, 0, 0, 1]);
        assert_eq!(FieldContext::new(5, 1).unwrap().modulus(), &[0, 1]);
    }

    #[test]
    fn gf4_alpha_squared() {
        let f = FieldContext::new(2, 2).unwrap();
        let a = f.from_coeffs(&[0, 1]).unwrap();
        let a2 = f.mul(a, a).unwrap();
        assert_eq!(f.coeffs(a2).unwrap(), vec![1, 1]);
        assert_eq!(f.add(a2, a).unwrap(), f.one());
    }

    #[test]
    fn gf9_inverse() {
        let f = FieldContext::new(3, 2).unwrap();
        let x = f.from_coeffs(&[0, 1]).unwrap();
        let xi = f.inv(x).unwrap();
        assert_eq!(f.coeffs(xi).unwrap(), vec![0, 2]);
    }

    #[test]
    fn zero_inverse_and_mismatch() {
        let f = FieldContext::new(2, 3).unwrap();
        assert!(matches!(f.inv(f.zero()), Err(Error::DivisionByZero)));
        let g = FieldContext::new(3, 1).unwrap();
        assert!(matches!(f.add(f.one(), g.one()), Err(Error::ContextMismatch)));
    }

    #[test]
    fn large_degree_without_tables() {
        let f = FieldContext::new(2, 64).unwrap();
        let x = f.from_coeffs(&[0, 1]).unwrap();
        let y = f.pow(x, 12345).unwrap();
        let yi = f.inv(y).unwrap();
        assert_eq!(f.mul(y, yi).unwrap(), f.one());
        assert!(FieldContext::new(2, 65).is_err());
        assert!(FieldContext::new(4, 2).is_err());
    }

    #[test]
    fn subfield_embedding_is_homomorphic() {
        let small = FieldContext::new(2, 2).unwrap();
        let big = FieldContext::new(2, 4).unwrap();
        let e = big.embedding_from(&small).unwrap();
        for a in 0..4u128 {
            for b in 0..4u128 {
                let (ea, eb) = (small.element(a).unwrap(), small.element(b).unwrap());
                let prod = e.apply(small.mul(ea, eb).unwrap()).unwrap();
                let prod2 = big.mul(e.apply(ea).unwrap(), e.apply(eb).unwrap()).unwrap();
                assert_eq!(prod, prod2);
                let sum = e.apply(small.add(ea, eb).unwrap()).unwrap();
                let sum2 = big.add(e.apply(ea).unwrap(), e.apply(eb).unwrap()).unwrap();
                assert_eq!(sum, sum2);
            }
        }
        assert!(FieldContext::new(2, 3).unwrap().embedding_from(&small).is_err());
    }

    #[test]
    fn regular_representation_of_alpha_plus_one() {
        let f = FieldContext::new(2, 2).unwrap();
        let a = f.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(f.regular_representation(a).unwrap(), vec![vec![1, 1], vec![1, 0]]);
    }
}
