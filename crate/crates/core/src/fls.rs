//! Finite linear sources.
//!
//! A source is a uniform vector `X` over F_q^l observed through matrices:
//! user `i` sees `Z_i = X M_i` and the wiretapper sees `Z_w = X W`. Every
//! information quantity reduces to ranks, e.g.
//! `H(X A | X B) = (rank [A|B] - rank B) log q`.

use std::collections::HashMap;

use crate::entropy::EntropyValue;
use crate::error::{dim, invalid, Error, Result};
use crate::field::FieldContext;
use crate::matrix::MatrixGf;

/// A random variable of the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    User(usize),
    Wiretap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlsModel {
    ctx: FieldContext,
    l: usize,
    users: Vec<MatrixGf>,
    wiretap: MatrixGf,
}

/// `H(X A | X B)` in units of `log q`.
pub fn cond_rank(a: &MatrixGf, b: &MatrixGf) -> Result<usize> {
    Ok(a.hcat(b)?.rank() - b.rank())
}

/// `I(X A ∧ X B | X C)` in units of `log q`.
pub fn mi_rank(a: &MatrixGf, b: &MatrixGf, c: &MatrixGf) -> Result<usize> {
    let ac = a.hcat(c)?.rank();
    let bc = b.hcat(c)?.rank();
    let abc = MatrixGf::hstack(a.ctx(), a.rows(), &[a, b, c])?.rank();
    Ok(ac + bc - abc - c.rank())
}

/// Maximum common function of `X A` and `X B`.
///
/// `g` spans `col A ∩ col B`, and `a * p = g = b * q`.
#[derive(Clone, Debug)]
pub struct Mcf {
    pub g: MatrixGf,
    pub p: MatrixGf,
    pub q: MatrixGf,
}

pub fn mcf(a: &MatrixGf, b: &MatrixGf) -> Result<Mcf> {
    let g = a.column_space_intersection(b)?;
    let p = a
        .solve_right(&g)?
        .ok_or_else(|| Error::Internal("mcf witness for A missing".into()))?;
    let q = b
        .solve_right(&g)?
        .ok_or_else(|| Error::Internal("mcf witness for B missing".into()))?;
    Ok(Mcf { g, p, q })
}

/// Columns of `m`, chosen greedily, that complete a basis of `col c` to one of
/// `col m`. Requires `col c ⊆ col m`.
pub fn complement(m: &MatrixGf, c: &MatrixGf) -> Result<MatrixGf> {
    if !m.spans(c)? {
        return invalid("complement: col C is not contained in col M");
    }
    let base = c.column_basis();
    let mut picked: Vec<usize> = Vec::new();
    let mut acc = base.clone();
    let mut r = acc.rank();
    for j in 0..m.cols() {
        let cand = acc.hcat(&m.column(j))?;
        let rc = cand.rank();
        if rc > r {
            acc = cand;
            r = rc;
            picked.push(j);
        }
    }
    Ok(m.select_columns(&picked))
}

impl FlsModel {
    pub fn new(ctx: &FieldContext, users: Vec<MatrixGf>, wiretap: MatrixGf) -> Result<Self> {
        if ctx.degree() != 1 {
            return invalid("linear sources are defined over prime fields");
        }
        if users.len() < 2 {
            return invalid("a source needs at least two users");
        }
        let l = wiretap.rows();
        for (i, m) in users.iter().enumerate() {
            if m.ctx() != ctx {
                return Err(Error::ContextMismatch);
            }
            if m.rows() != l {
                return dim(format!("user {i} matrix has {} rows, expected {l}", m.rows()));
            }
        }
        if wiretap.ctx() != ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(FlsModel { ctx: ctx.clone(), l, users, wiretap })
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.ctx.characteristic()
    }

    /// Length of the base vector `X`.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, i: usize) -> &MatrixGf {
        &self.users[i]
    }

    pub fn users(&self) -> &[MatrixGf] {
        &self.users
    }

    pub fn wiretap(&self) -> &MatrixGf {
        &self.wiretap
    }

    /// Same source with a constant wiretapper.
    pub fn without_wiretap(&self) -> FlsModel {
        FlsModel {
            ctx: self.ctx.clone(),
            l: self.l,
            users: self.users.clone(),
            wiretap: MatrixGf::zeros(&self.ctx, self.l, 0),
        }
    }

    pub fn var_matrix(&self, v: Var) -> &MatrixGf {
        match v {
            Var::User(i) => &self.users[i],
            Var::Wiretap => &self.wiretap,
        }
    }

    /// Columns of all listed variables side by side.
    pub fn stack(&self, vars: &[Var]) -> Result<MatrixGf> {
        for v in vars {
            if let Var::User(i) = v {
                if *i >= self.users.len() {
                    return invalid(format!("no user {i}"));
                }
            }
        }
        let parts: Vec<&MatrixGf> = vars.iter().map(|&v| self.var_matrix(v)).collect();
        MatrixGf::hstack(&self.ctx, self.l, &parts)
    }

    /// `Z_V`, all user observations.
    pub fn all_users(&self) -> MatrixGf {
        let parts: Vec<&MatrixGf> = self.users.iter().collect();
        MatrixGf::hstack(&self.ctx, self.l, &parts).expect("validated shapes")
    }

    /// `H(target | given)`.
    pub fn entropy(&self, target: &[Var], given: &[Var]) -> Result<EntropyValue> {
        let a = self.stack(target)?;
        let b = self.stack(given)?;
        Ok(EntropyValue::new(cond_rank(&a, &b)? as i64, self.q()))
    }

    /// `I(a ∧ b | c)`.
    pub fn mutual_information(&self, a: &[Var], b: &[Var], c: &[Var]) -> Result<EntropyValue> {
        let (ma, mb, mc) = (self.stack(a)?, self.stack(b)?, self.stack(c)?);
        Ok(EntropyValue::new(mi_rank(&ma, &mb, &mc)? as i64, self.q()))
    }

    /// `H(Z_V | Z_w)`.
    pub fn h_zv_given_zw(&self) -> EntropyValue {
        let zv = self.all_users();
        EntropyValue::new(cond_rank(&zv, &self.wiretap).expect("shapes") as i64, self.q())
    }

    /// Value `H(Z_B | Z_{B^c}, J)` for a user subset given as a bitmask and an
    /// optional extra conditioning matrix `J`.
    pub(crate) fn set_entropy_units(&self, mask: u64, conditioning: Option<&MatrixGf>) -> Result<usize> {
        let inside: Vec<Var> = (0..self.num_users()).filter(|i| mask >> i & 1 == 1).map(Var::User).collect();
        let outside: Vec<Var> = (0..self.num_users()).filter(|i| mask >> i & 1 == 0).map(Var::User).collect();
        let a = self.stack(&inside)?;
        let mut b = self.stack(&outside)?;
        if let Some(j) = conditioning {
            b = b.hcat(j)?;
        }
        cond_rank(&a, &b)
    }
}

// ---------------------------------------------------------------------------
// brute-force oracle

/// Largest realization count enumerated by [`EnumerationOracle`].
pub const ENUMERATION_LIMIT: u128 = 1 << 24;
const PRECOMPUTE_LIMIT: u128 = 1 << 22;

/// Entropy oracle that enumerates every realization of `X` and evaluates the
/// observations by direct modular arithmetic, independently of the rank code.
pub struct EnumerationOracle<'a> {
    model: &'a FlsModel,
    total: u128,
    /// Packed observation of each variable (users then wiretapper) per realization.
    cache: Option<Vec<Vec<u128>>>,
}

impl<'a> EnumerationOracle<'a> {
    pub fn new(model: &'a FlsModel) -> Result<Self> {
        let q = model.q() as u128;
        let total = (0..model.l()).try_fold(1u128, |acc, _| acc.checked_mul(q));
        let total = match total {
            Some(t) if t <= ENUMERATION_LIMIT => t,
            _ => return Err(Error::Resource(format!("q^l exceeds {ENUMERATION_LIMIT}"))),
        };
        let bits = (q as f64).log2();
        for v in model.users.iter().chain(std::iter::once(&model.wiretap)) {
            if v.cols() as f64 * bits >= 127.0 {
                return Err(Error::Resource("observation too wide to pack".into()));
            }
        }
        let mut oracle = EnumerationOracle { model, total, cache: None };
        let vars = model.num_users() + 1;
        if total * vars as u128 <= PRECOMPUTE_LIMIT {
            let mut cache = Vec::with_capacity(total as usize);
            let all: Vec<usize> = (0..vars).collect();
            oracle.for_each(&all, |obs| cache.push(obs.to_vec()));
            oracle.cache = Some(cache);
        }
        Ok(oracle)
    }

    fn var_index(&self, v: Var) -> usize {
        match v {
            Var::User(i) => i,
            Var::Wiretap => self.model.num_users(),
        }
    }

    fn matrix(&self, idx: usize) -> &MatrixGf {
        if idx == self.model.num_users() {
            &self.model.wiretap
        } else {
            &self.model.users[idx]
        }
    }

    /// Calls `f` with the packed observations of `vars` for every realization.
    fn for_each(&self, vars: &[usize], mut f: impl FnMut(&[u128])) {
        let p = self.model.q();
        let l = self.model.l();
        let mats: Vec<Vec<Vec<u64>>> = vars
            .iter()
            .map(|&v| {
                let m = self.matrix(v);
                (0..m.cols()).map(|j| (0..l).map(|i| m.code(i, j) as u64).collect()).collect()
            })
            .collect();
        let mut x = vec![0u64; l];
        let mut obs = vec![0u128; vars.len()];
        for _ in 0..self.total {
            for (slot, cols) in obs.iter_mut().zip(&mats) {
                let mut key = 0u128;
                for col in cols.iter().rev() {
                    let s = col.iter().zip(&x).fold(0u64, |acc, (&a, &b)| (acc + a * b) % p);
                    key = key * p as u128 + s as u128;
                }
                *slot = key;
            }
            f(&obs);
            for d in x.iter_mut() {
                *d += 1;
                if *d < p {
                    break;
                }
                *d = 0;
            }
        }
    }

    /// Empirical joint entropy in bits of the listed variables.
    fn joint_entropy_bits(&self, vars: &[Var]) -> f64 {
        let mut idx: Vec<usize> = vars.iter().map(|&v| self.var_index(v)).collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return 0.0;
        }
        let mut counts: HashMap<Vec<u128>, u64> = HashMap::new();
        match &self.cache {
            Some(cache) => {
                for row in cache {
                    let key: Vec<u128> = idx.iter().map(|&i| row[i]).collect();
                    *counts.entry(key).or_insert(0) += 1;
                }
            }
            None => self.for_each(&idx, |obs| *counts.entry(obs.to_vec()).or_insert(0) += 1),
        }
        let n = self.total as f64;
        counts.values().map(|&c| {
            let pr = c as f64 / n;
            -pr * pr.log2()
        }).sum()
    }

    /// `H(target | given)` in bits by enumeration.
    pub fn entropy_bits(&self, target: &[Var], given: &[Var]) -> f64 {
        let joint: Vec<Var> = target.iter().chain(given).copied().collect();
        self.joint_entropy_bits(&joint) - self.joint_entropy_bits(given)
    }
}

/// One-shot brute-force `H(target | given)` in bits.
pub fn brute_force_entropy(model: &FlsModel, target: &[Var], given: &[Var]) -> Result<f64> {
    Ok(EnumerationOracle::new(model)?.entropy_bits(target, given))
}

// ---------------------------------------------------------------------------
// two users

/// Capacity and leakage of a two-user source.
#[derive(Clone, Debug)]
pub struct TwoUserAnalysis {
    /// `mcf(Z_w, Z_1)` and `mcf(Z_w, Z_2)` as column bases.
    pub g1: MatrixGf,
    pub g2: MatrixGf,
    /// `I(Z_1 ∧ Z_2 | G)` for `G = G_1`, `G_2` and `(G_1, G_2)`.
    pub c_w_candidates: [EntropyValue; 3],
    pub c_w: EntropyValue,
    pub r_l: EntropyValue,
    pub h_zv_given_zw: EntropyValue,
    /// `H(Z_1|Z_2) + H(Z_2|Z_1)`.
    pub r_co: EntropyValue,
}

fn require_two(model: &FlsModel) -> Result<()> {
    if model.num_users() != 2 {
        return invalid(format!("expected 2 users, got {}", model.num_users()));
    }
    Ok(())
}

pub fn two_user_analyze(model: &FlsModel) -> Result<TwoUserAnalysis> {
    require_two(model)?;
    let (m1, m2, w) = (model.user(0), model.user(1), model.wiretap());
    let g1 = mcf(w, m1)?.g;
    let g2 = mcf(w, m2)?.g;
    let g12 = g1.hcat(&g2)?;
    let q = model.q();
    let cw = |g: &MatrixGf| mi_rank(m1, m2, g).map(|u| EntropyValue::new(u as i64, q));
    let c_w_candidates = [cw(&g1)?, cw(&g2)?, cw(&g12)?];
    if c_w_candidates.iter().any(|c| *c != c_w_candidates[0]) {
        return Err(Error::Internal(format!("wiretap capacity expressions disagree: {c_w_candidates:?}")));
    }
    let c_w = c_w_candidates[0];
    let h = model.h_zv_given_zw();
    let r_co = EntropyValue::new((cond_rank(m1, m2)? + cond_rank(m2, m1)?) as i64, q);
    Ok(TwoUserAnalysis { g1, g2, c_w_candidates, c_w, r_l: h - c_w, h_zv_given_zw: h, r_co })
}

/// The discussion `F' = (F'_1, F'_2)` attaining the leakage bound, with the
/// intermediate decomposition of the source.
#[derive(Clone, Debug)]
pub struct Discussion {
    /// Sent by user 1: `(X_a A, G_1)`.
    pub f1: MatrixGf,
    /// Sent by user 2: `X_b B + X'_c C`.
    pub f2: MatrixGf,
    pub g1: MatrixGf,
    pub g_w: MatrixGf,
    pub xa: MatrixGf,
    pub xb: MatrixGf,
    pub xc_prime: MatrixGf,
}

impl Discussion {
    /// `[F'_1 | F'_2]`.
    pub fn matrix(&self) -> MatrixGf {
        self.f1.hcat(&self.f2).expect("shapes")
    }
}

pub fn two_user_discussion(model: &FlsModel) -> Result<Discussion> {
    require_two(model)?;
    let ctx = model.ctx();
    let l = model.l();
    let (m1, m2, w) = (model.user(0), model.user(1), model.wiretap());
    let g1 = mcf(w, m1)?.g;
    // X_c = mcf((Z_1,G_1),(Z_2,G_1)) = (S_1 ∩ S_2) + G_1, so X'_c can be drawn
    // from S_1 ∩ S_2 and is computable by both users.
    let s12 = m1.column_space_intersection(m2)?;
    let xc = g1.hcat(&s12)?;
    let xc_prime = complement(&xc, &g1)?;
    let xa = complement(m1, &xc)?;
    // X_b completes X_c within S_2 + G_1 = S_2 + X_c; draw it from user 2's columns.
    let xb = {
        let base = xc.column_basis();
        let mut acc = base;
        let mut picked = Vec::new();
        for j in 0..m2.cols() {
            let cand = acc.hcat(&m2.column(j))?;
            if cand.rank() > acc.rank() {
                acc = cand;
                picked.push(j);
            }
        }
        m2.select_columns(&picked)
    };
    let zv = model.all_users();
    let g_w = mcf(&zv, w)?.g;
    let d = complement(&g_w, &g1)?;
    let basis = MatrixGf::hstack(ctx, l, &[&xa, &xb, &xc_prime, &g1])?;
    let coords = basis
        .solve_right(&d)?
        .ok_or_else(|| Error::Internal("G_w not expressible in the source decomposition".into()))?;
    let (na, nb, nc) = (xa.cols(), xb.cols(), xc_prime.cols());
    let part = |lo: usize, hi: usize| -> Result<MatrixGf> {
        let rows: Vec<usize> = (lo..hi).collect();
        let sub = basis.select_columns(&rows);
        sub.mul(&coords.select_rows(&rows))
    };
    let a_part = part(0, na)?;
    let bc_part = part(na, na + nb + nc)?;
    let f1 = a_part.hcat(&g1)?;
    let f2 = bc_part;
    let disc = Discussion { f1, f2, g1, g_w, xa, xb, xc_prime };
    verify_discussion(model, &disc)?;
    Ok(disc)
}

/// Checks `I(Z_V ∧ Z_w | F') = 0`, `I(Z_1 ∧ Z_2 | F') = I(Z_1 ∧ Z_2 | G_1)`
/// and that each part is a function of its sender's observation.
pub fn verify_discussion(model: &FlsModel, d: &Discussion) -> Result<()> {
    let f = d.matrix();
    let zv = model.all_users();
    let (m1, m2, w) = (model.user(0), model.user(1), model.wiretap());
    if mi_rank(&zv, w, &f)? != 0 {
        return Err(Error::Internal("discussion leaves I(Z_V ∧ Z_w | F') > 0".into()));
    }
    if mi_rank(m1, m2, &f)? != mi_rank(m1, m2, &d.g1)? {
        return Err(Error::Internal("discussion changes I(Z_1 ∧ Z_2 | ·)".into()));
    }
    if !m1.spans(&d.f1)? || !m2.spans(&d.f2)? {
        return Err(Error::Internal("discussion part not computable by its sender".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldContext {
        FieldContext::prime(2).unwrap()
    }

    fn sel(rows: usize, picks: &[usize]) -> MatrixGf {
        MatrixGf::from_fn(&f2(), rows, picks.len(), |i, j| (picks[j] == i) as u128)
    }

    /// Z_1 = (X1, X2), Z_2 = (X2, X3), Z_w = X3.
    fn chain() -> FlsModel {
        FlsModel::new(&f2(), vec![sel(3, &[0, 1]), sel(3, &[1, 2])], sel(3, &[2])).unwrap()
    }

    #[test]
    fn rank_entropy_small() {
        let m = chain();
        assert_eq!(m.entropy(&[Var::User(0)], &[Var::Wiretap]).unwrap(), EntropyValue::new(2, 2));
        assert_eq!(m.entropy(&[Var::User(1)], &[Var::Wiretap]).unwrap(), EntropyValue::new(1, 2));
        assert_eq!(
            m.mutual_information(&[Var::User(0)], &[Var::User(1)], &[]).unwrap(),
            EntropyValue::new(1, 2)
        );
    }

    #[test]
    fn chain_two_user_values() {
        let a = two_user_analyze(&chain()).unwrap();
        assert_eq!(a.c_w, EntropyValue::new(1, 2));
        assert_eq!(a.r_l, EntropyValue::new(1, 2));
        assert_eq!(a.g1.cols(), 0);
        assert_eq!(a.g2.cols(), 1);
    }

    #[test]
    fn discussion_empty_without_wiretapper() {
        let m = chain().without_wiretap();
        let d = two_user_discussion(&m).unwrap();
        assert_eq!(d.matrix().cols(), 0);
    }

    #[test]
    fn mcf_witnesses() {
        let f = f2();
        let a = MatrixGf::from_rows(&f, &[vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        let b = MatrixGf::from_rows(&f, &[vec![1], vec![1], vec![0]]).unwrap();
        let r = mcf(&a, &b).unwrap();
        assert_eq!(r.g.cols(), 1);
        assert_eq!(a.mul(&r.p).unwrap(), r.g);
        assert_eq!(b.mul(&r.q).unwrap(), r.g);
    }

    #[test]
    fn complement_rejects_non_subspace() {
        let f = f2();
        let m = sel(3, &[0]);
        let c = sel(3, &[1]);
        assert!(complement(&m, &c).is_err());
        let full = sel(3, &[0, 1, 2]);
        let comp = complement(&full, &c).unwrap();
        assert_eq!(comp.hcat(&c).unwrap().rank(), 3);
        let _ = f;
    }

    #[test]
    fn oracle_matches_on_chain() {
        let m = chain();
        let o = EnumerationOracle::new(&m).unwrap();
        assert!((o.entropy_bits(&[Var::User(0), Var::User(1)], &[Var::Wiretap]) - 2.0).abs() < 1e-12);
    }
}
