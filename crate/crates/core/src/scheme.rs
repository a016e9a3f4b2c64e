//! Linear public-discussion schemes and their verification.
//!
//! A scheme over block length `n` is a matrix `F` over F_{q^n}: viewing `n`
//! realizations of `X` as one vector over F_{q^n}, the public message is
//! `X^n F`, and column `j` is sent by terminal `senders[j]`. Ranks over
//! F_{q^n} count units of `n log q` per block, so leakage and rates below are
//! integers in units of `log q` per realization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entropy::EntropyValue;
use crate::error::{invalid, Error, Result, SearchFailure};
use crate::field::FieldContext;
use crate::fls::{cond_rank, two_user_analyze, two_user_discussion, Discussion, FlsModel, TwoUserAnalysis};
use crate::matrix::MatrixGf;
use crate::treepin::TreePinModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommScheme {
    /// Block length.
    pub n: usize,
    /// The extension F_{q^n}.
    pub ext: FieldContext,
    /// `l x c` public discussion matrix.
    pub comm: MatrixGf,
    /// Terminal sending each column.
    pub senders: Vec<usize>,
    /// `l x s` key map over F_{q^n}, if the scheme carries a key.
    pub key: Option<MatrixGf>,
    /// Per terminal `i`, a matrix `R_i` with `[F | M_i] R_i = M_V`.
    pub recovery: Vec<MatrixGf>,
}

impl CommScheme {
    pub fn new(ext: FieldContext, n: usize, comm: MatrixGf, senders: Vec<usize>, key: Option<MatrixGf>) -> Result<Self> {
        if ext.degree() != n {
            return invalid(format!("block length {n} does not match field degree {}", ext.degree()));
        }
        if comm.ctx() != &ext {
            return Err(Error::ContextMismatch);
        }
        if senders.len() != comm.cols() {
            return invalid("one sender per communication column expected");
        }
        if let Some(k) = &key {
            if k.ctx() != &ext || k.rows() != comm.rows() {
                return invalid("key map does not match the scheme");
            }
        }
        Ok(CommScheme { n, ext, comm, senders, key, recovery: Vec::new() })
    }

    pub fn q(&self) -> u64 {
        self.ext.characteristic()
    }

    /// Public communication rate in units of `log q` per realization.
    pub fn comm_rate(&self) -> EntropyValue {
        EntropyValue::new(self.comm.rank() as i64, self.q())
    }
}

/// Outcome of [`verify_scheme`].
#[derive(Clone, Debug)]
pub struct Verification {
    /// Per terminal: `Z_V` is a linear function of `(F, Z_i)`.
    pub omniscience: Vec<bool>,
    /// `col W ⊆ col F`.
    pub alignment: bool,
    /// Every column lies in the observation space of its sender.
    pub senders_consistent: bool,
    /// `H(F | Z_w)` per realization.
    pub leakage: EntropyValue,
    pub comm_rate: EntropyValue,
    pub key: Option<KeyCheck>,
}

impl Verification {
    pub fn omniscient(&self) -> bool {
        self.omniscience.iter().all(|&b| b)
    }
}

#[derive(Clone, Debug)]
pub struct KeyCheck {
    pub rate: EntropyValue,
    /// Per terminal: the key is a function of `(F, Z_i)`.
    pub recoverable: Vec<bool>,
    /// `I(K ∧ F, Z_w) = 0`.
    pub secret: bool,
    /// The key map has full column rank, so the key is uniform.
    pub uniform: bool,
}

fn lift(m: &MatrixGf, ext: &FieldContext) -> Result<MatrixGf> {
    m.embed_into(ext)
}

fn lifted_users(model: &FlsModel, ext: &FieldContext) -> Result<Vec<MatrixGf>> {
    model.users().iter().map(|m| lift(m, ext)).collect()
}

fn check_shapes(model: &FlsModel, s: &CommScheme) -> Result<()> {
    if s.ext.characteristic() != model.q() {
        return invalid("scheme and source use different base fields");
    }
    if s.comm.rows() != model.l() {
        return invalid(format!("scheme acts on {} symbols, source has {}", s.comm.rows(), model.l()));
    }
    if s.senders.iter().any(|&t| t >= model.num_users()) {
        return invalid("scheme names a sender that is not a terminal of the source");
    }
    Ok(())
}

/// Recovery maps `R_i`, or `None` for terminals that cannot reach omniscience.
pub fn recovery_maps(model: &FlsModel, s: &CommScheme) -> Result<Vec<Option<MatrixGf>>> {
    check_shapes(model, s)?;
    let users = lifted_users(model, &s.ext)?;
    let refs: Vec<&MatrixGf> = users.iter().collect();
    let zv = MatrixGf::hstack(&s.ext, model.l(), &refs)?;
    users.iter().map(|mi| s.comm.hcat(mi)?.solve_right(&zv)).collect()
}

/// `H(F | Z_w)` per realization.
pub fn leakage_rate(model: &FlsModel, s: &CommScheme) -> Result<EntropyValue> {
    check_shapes(model, s)?;
    let w = lift(model.wiretap(), &s.ext)?;
    Ok(EntropyValue::new(cond_rank(&s.comm, &w)? as i64, model.q()))
}

pub fn verify_omniscience(model: &FlsModel, s: &CommScheme) -> Result<Vec<bool>> {
    Ok(recovery_maps(model, s)?.iter().map(Option::is_some).collect())
}

pub fn verify_alignment(model: &FlsModel, s: &CommScheme) -> Result<bool> {
    check_shapes(model, s)?;
    let w = lift(model.wiretap(), &s.ext)?;
    s.comm.spans(&w)
}

pub fn verify_key(model: &FlsModel, s: &CommScheme, key: &MatrixGf) -> Result<KeyCheck> {
    check_shapes(model, s)?;
    let users = lifted_users(model, &s.ext)?;
    let recoverable = users
        .iter()
        .map(|mi| s.comm.hcat(mi)?.spans(key))
        .collect::<Result<Vec<bool>>>()?;
    let w = lift(model.wiretap(), &s.ext)?;
    let fw = s.comm.hcat(&w)?;
    let secret = key.rank() + fw.rank() == key.hcat(&fw)?.rank();
    Ok(KeyCheck {
        rate: EntropyValue::new(key.rank() as i64, model.q()),
        recoverable,
        secret,
        uniform: key.rank() == key.cols(),
    })
}

pub fn verify_scheme(model: &FlsModel, s: &CommScheme) -> Result<Verification> {
    check_shapes(model, s)?;
    let users = lifted_users(model, &s.ext)?;
    let mut senders_consistent = true;
    for (j, &t) in s.senders.iter().enumerate() {
        if !users[t].spans(&s.comm.column(j))? {
            senders_consistent = false;
        }
    }
    let key = match &s.key {
        Some(k) => Some(verify_key(model, s, k)?),
        None => None,
    };
    Ok(Verification {
        omniscience: verify_omniscience(model, s)?,
        alignment: verify_alignment(model, s)?,
        senders_consistent,
        leakage: leakage_rate(model, s)?,
        comm_rate: s.comm_rate(),
        key,
    })
}

/// Fills `s.recovery`; fails if some terminal does not attain omniscience.
pub fn attach_recovery(model: &FlsModel, s: &mut CommScheme) -> Result<()> {
    let maps = recovery_maps(model, s)?;
    let mut out = Vec::with_capacity(maps.len());
    for (i, m) in maps.into_iter().enumerate() {
        out.push(m.ok_or_else(|| Error::Internal(format!("terminal {i} does not attain omniscience")))?);
    }
    s.recovery = out;
    Ok(())
}

// ---------------------------------------------------------------------------
// tree-PIN constructions

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Block length; defaults to `ceil(log_q sum n_e) + 1`.
    pub n: Option<usize>,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { n: None, seed: 0, max_attempts: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltScheme {
    pub scheme: CommScheme,
    /// Attempts used, counting the successful one.
    pub attempts: usize,
}

/// Smallest `t` with `q^t >= x`.
pub fn ceil_log(q: u64, x: u64) -> usize {
    let mut t = 0;
    let mut acc = 1u128;
    while acc < x as u128 {
        acc *= q as u128;
        t += 1;
    }
    t
}

/// Default block length `ceil(log_q sum n_e) + 1`.
pub fn default_block_length(model: &TreePinModel) -> usize {
    ceil_log(model.q(), model.total_symbols().max(1) as u64) + 1
}

fn require_irreducible(model: &TreePinModel) -> Result<()> {
    if !model.is_irreducible() {
        return invalid("wiretapper has edge-local components; reduce the source first");
    }
    Ok(())
}

/// Rows of `X` holding the first `s` coordinates of edge `e`.
fn head_rows(model: &TreePinModel, e: usize, s: usize) -> Vec<usize> {
    let off = model.offsets()[e];
    (off..off + s).collect()
}

/// Discussion matrix of the tree construction for `S` (`s x l`) whose head
/// blocks `S_{e,head}` (first `s` coordinates of each edge) are invertible.
///
/// Internal vertex `i` sends `Y'_{e*(i)} + Y'_e A_{i,e}` with
/// `A_{i,e} = -S_{e,head}^{-1} S_{e*(i),head}`; coordinate `k >= s` of edge `e`
/// is sent as `X_{e,k} + Y'_e c_{e,k}` with `c_{e,k} = -S_{e,head}^{-1} S_{e,k}`.
/// Every column is annihilated by `S`.
fn tree_columns(model: &TreePinModel, ext: &FieldContext, s: usize, big_s: &MatrixGf) -> Result<(MatrixGf, Vec<usize>)> {
    let l = model.total_symbols();
    let rooted = model.rooted();
    let offsets = model.offsets();
    let head_inv: Vec<MatrixGf> = (0..model.num_edges())
        .map(|e| big_s.select_columns(&head_rows(model, e, s)).inverse())
        .collect::<Result<_>>()?;
    let mut cols: Vec<MatrixGf> = Vec::new();
    let mut senders = Vec::new();
    for &v in &rooted.order {
        let Some(up) = rooted.up_edge[v] else {
            continue;
        };
        let s_up = big_s.select_columns(&head_rows(model, up, s));
        for e in model.incident(v) {
            if e == up {
                continue;
            }
            let a = head_inv[e].mul(&s_up)?.neg();
            let mut c = MatrixGf::zeros(ext, l, s);
            for (r, row) in head_rows(model, up, s).into_iter().enumerate() {
                c.set_code(row, r, 1);
            }
            for (r, row) in head_rows(model, e, s).into_iter().enumerate() {
                for j in 0..s {
                    c.set_code(row, j, a.code(r, j));
                }
            }
            cols.push(c);
            senders.extend(std::iter::repeat_n(v, s));
        }
    }
    for (e, &n_e) in model.multiplicities().iter().enumerate() {
        if n_e == s {
            continue;
        }
        let tail: Vec<usize> = (offsets[e] + s..offsets[e] + n_e).collect();
        let coef = head_inv[e].mul(&big_s.select_columns(&tail))?.neg();
        for k in 0..n_e - s {
            let mut c = MatrixGf::zeros(ext, l, 1);
            c.set_code(tail[k], 0, 1);
            for r in 0..s {
                c.set_code(offsets[e] + r, 0, coef.code(r, k));
            }
            cols.push(c);
            senders.push(rooted.upper[e]);
        }
    }
    let refs: Vec<&MatrixGf> = cols.iter().collect();
    Ok((MatrixGf::hstack(ext, l, &refs)?, senders))
}

/// One draw of `S` (`s x l`) with `S W = 0`: the free coordinates of the left
/// null space of `W` are chosen uniformly. Returns `None` if some head block
/// (`s` columns listed in `heads`) is singular.
pub fn s_search_attempt(
    w: &MatrixGf,
    s: usize,
    heads: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
) -> Result<Option<MatrixGf>> {
    let ext = w.ctx().clone();
    let null = w.left_nullspace_basis();
    if null.rows() < s {
        return Ok(None);
    }
    let r = MatrixGf::random(&ext, s, null.rows(), rng);
    let big_s = r.mul(&null)?;
    for h in heads {
        if big_s.select_columns(h).rank() < s {
            return Ok(None);
        }
    }
    Ok(Some(big_s))
}

/// Head coordinates (first `s` of each edge) used by the constructions.
pub fn head_blocks(model: &TreePinModel) -> Vec<Vec<usize>> {
    let s = model.min_multiplicity();
    (0..model.num_edges()).map(|e| head_rows(model, e, s)).collect()
}

fn key_edge(model: &TreePinModel) -> usize {
    let leaves = model.leaves();
    (0..model.num_edges())
        .find(|&e| {
            let (a, b) = model.edges()[e];
            leaves.contains(&a) || leaves.contains(&b)
        })
        .expect("every tree has a leaf edge")
}

/// Key map: first `s` coordinates of the lowest-index edge incident on a leaf.
pub fn key_map(model: &TreePinModel, ext: &FieldContext) -> MatrixGf {
    let s = model.min_multiplicity();
    let rows = head_rows(model, key_edge(model), s);
    MatrixGf::from_fn(ext, model.total_symbols(), s, |i, j| (rows[j] == i) as u128)
}

fn attempt_general(model: &TreePinModel, ext: &FieldContext, rng: &mut ChaCha8Rng) -> Result<Option<CommScheme>> {
    let s = model.min_multiplicity();
    let l = model.total_symbols();
    let n = ext.degree();
    if s == 0 {
        // nothing can be kept secret; reveal every symbol
        let senders = model.rooted().upper;
        let mut sends = Vec::new();
        for (e, &n_e) in model.multiplicities().iter().enumerate() {
            sends.extend(std::iter::repeat_n(senders[e], n_e));
        }
        return Ok(Some(CommScheme::new(ext.clone(), n, MatrixGf::identity(ext, l), sends, None)?));
    }
    let w = model.wiretap().embed_into(ext)?;
    let Some(big_s) = s_search_attempt(&w, s, &head_blocks(model), rng)? else {
        return Ok(None);
    };
    let (comm, senders) = tree_columns(model, ext, s, &big_s)?;
    let key = key_map(model, ext);
    Ok(Some(CommScheme::new(ext.clone(), n, comm, senders, Some(key))?))
}

/// Accepts a candidate if it is omniscient and aligned; attaches recovery maps.
fn accept(fls: &FlsModel, mut cand: CommScheme) -> Result<Option<CommScheme>> {
    if !verify_alignment(fls, &cand)? {
        return Ok(None);
    }
    let maps = recovery_maps(fls, &cand)?;
    if maps.iter().any(Option::is_none) {
        return Ok(None);
    }
    cand.recovery = maps.into_iter().map(Option::unwrap).collect();
    Ok(Some(cand))
}

/// Omniscience scheme with leakage `(sum n_e - n_w - min n_e) log q` for an
/// irreducible tree-PIN source with arbitrary multiplicities.
pub fn build_general_scheme(model: &TreePinModel, opts: &BuildOptions) -> Result<BuiltScheme> {
    require_irreducible(model)?;
    let n = opts.n.unwrap_or_else(|| default_block_length(model));
    let ext = FieldContext::new(model.q(), n)?;
    let fls = model.compile();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for attempt in 1..=opts.max_attempts {
        if let Some(cand) = attempt_general(model, &ext, &mut rng)? {
            if let Some(s) = accept(&fls, cand)? {
                return Ok(BuiltScheme { scheme: s, attempts: attempt });
            }
        }
    }
    Err(Error::SearchExhausted(Box::new(SearchFailure {
        message: format!("no valid scheme over GF({}^{n})", model.q()),
        attempts: opts.max_attempts,
        best: None,
    })))
}

fn require_uniform(model: &TreePinModel) -> Result<usize> {
    let s = model.min_multiplicity();
    if model.multiplicities().iter().any(|&n| n != s) || s == 0 {
        return invalid("all edges must carry the same positive number of symbols");
    }
    Ok(s)
}

/// Scheme for a tree with `n_e = s` on every edge.
pub fn build_tree_scheme(model: &TreePinModel, opts: &BuildOptions) -> Result<BuiltScheme> {
    require_uniform(model)?;
    build_general_scheme(model, opts)
}

/// Scheme for a path with `n_e = s` on every edge.
pub fn build_path_scheme(model: &TreePinModel, opts: &BuildOptions) -> Result<BuiltScheme> {
    if (0..model.vertices()).any(|v| model.incident(v).len() > 2) {
        return invalid("source is not a path");
    }
    build_tree_scheme(model, opts)
}

/// Deterministic scheme for `n_e = 1` over F_{q^k} with `k = |E| - n_w`.
pub fn build_unit_scheme(model: &TreePinModel) -> Result<CommScheme> {
    if model.multiplicities().iter().any(|&n| n != 1) {
        return invalid("unit construction needs n_e = 1 on every edge");
    }
    require_irreducible(model)?;
    let edges = model.num_edges();
    let m = model.wiretap_dim();
    let k = edges - m;
    let ext = FieldContext::new(model.q(), k)?;
    let beta = ext.basis();
    // column operations on W are row operations on W^T
    let r = model.wiretap().transpose().rref();
    let pivots = r.pivots.clone();
    let free: Vec<usize> = (0..edges).filter(|e| !pivots.contains(e)).collect();
    let mut big_s = MatrixGf::zeros(&ext, 1, edges);
    for (t, &j) in free.iter().enumerate() {
        big_s.set_code(0, j, beta[t].code());
    }
    for (i, &pc) in pivots.iter().enumerate() {
        let mut acc = 0u128;
        for (t, &j) in free.iter().enumerate() {
            let a = r.reduced.code(i, j);
            acc = ext.add_c(acc, ext.mul_c(a, beta[t].code()));
        }
        big_s.set_code(0, pc, ext.neg_c(acc));
    }
    let (comm, senders) = tree_columns(model, &ext, 1, &big_s)?;
    let key = key_map(model, &ext);
    let cand = CommScheme::new(ext, k, comm, senders, Some(key))?;
    accept(&model.compile(), cand)?
        .ok_or_else(|| Error::Internal("unit construction failed verification".into()))
}

/// Key extracted from an omniscience scheme, with its verification.
pub fn extract_key(model: &TreePinModel, s: &CommScheme) -> Result<(MatrixGf, KeyCheck)> {
    let key = key_map(model, &s.ext);
    let check = verify_key(&model.compile(), s, &key)?;
    if !check.secret || check.recoverable.iter().any(|&b| !b) {
        return Err(Error::Internal("extracted key failed verification".into()));
    }
    Ok((key, check))
}

/// Scheme attaining the corner point `((|E|-1) C_W, C_W)` of the
/// rate-constrained key capacity.
#[derive(Clone, Debug)]
pub struct CornerPoint {
    pub scheme: CommScheme,
    pub comm_rate: EntropyValue,
    pub key_rate: EntropyValue,
    pub key_check: KeyCheck,
    pub attempts: usize,
}

pub fn corner_point_scheme(model: &TreePinModel, opts: &BuildOptions) -> Result<CornerPoint> {
    require_irreducible(model)?;
    let s = model.min_multiplicity();
    let edges = model.num_edges();
    let l = model.total_symbols();
    let ctx = model.ctx();
    // X' = first s coordinates of every edge
    let head: Vec<usize> = (0..edges).flat_map(|e| head_rows(model, e, s)).collect();
    let head_sel = MatrixGf::from_fn(ctx, l, head.len(), |i, j| (head[j] == i) as u128);
    let w_head = model.wiretap().column_space_intersection(&head_sel)?;
    let sub_w = w_head.select_rows(&head);
    let sub = TreePinModel::new(ctx, model.vertices(), model.edges().to_vec(), vec![s; edges], sub_w)?;
    let built = build_general_scheme(&sub, opts)?;
    let ext = built.scheme.ext.clone();
    let lift_rows = |m: &MatrixGf| -> MatrixGf {
        let mut out = MatrixGf::zeros(&ext, l, m.cols());
        for (r, &row) in head.iter().enumerate() {
            for j in 0..m.cols() {
                out.set_code(row, j, m.code(r, j));
            }
        }
        out
    };
    let comm = lift_rows(&built.scheme.comm);
    let key = key_map(model, &ext);
    let scheme = CommScheme::new(ext, built.scheme.n, comm, built.scheme.senders.clone(), Some(key.clone()))?;
    let key_check = verify_key(&model.compile(), &scheme, &key)?;
    if !key_check.secret || key_check.recoverable.iter().any(|&b| !b) {
        return Err(Error::Internal("corner-point key failed verification".into()));
    }
    Ok(CornerPoint {
        comm_rate: scheme.comm_rate(),
        key_rate: key_check.rate,
        scheme,
        key_check,
        attempts: built.attempts,
    })
}

// ---------------------------------------------------------------------------
// two users

#[derive(Clone, Debug)]
pub struct TwoUserScheme {
    pub scheme: CommScheme,
    pub discussion: Discussion,
    pub analysis: TwoUserAnalysis,
    pub achieved: EntropyValue,
    pub target: EntropyValue,
    pub attempts: usize,
}

/// n-fold `F'` followed by random linear Slepian-Wolf messages, retried with
/// growing block length until the leakage meets `R_L`.
pub fn two_user_scheme(model: &FlsModel, n_max: usize, seed: u64) -> Result<TwoUserScheme> {
    const ATTEMPTS_PER_N: usize = 16;
    let analysis = two_user_analyze(model)?;
    let disc = two_user_discussion(model)?;
    let target = analysis.r_l;
    let (m1, m2) = (model.user(0), model.user(1));
    let fp = disc.matrix();
    let r1 = cond_rank(m1, &m2.hcat(&fp)?)?;
    let r2 = cond_rank(m2, &m1.hcat(&fp)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<CommScheme> = None;
    let mut best_leak: Option<EntropyValue> = None;
    let mut attempts = 0;
    for n in 1..=n_max.max(1) {
        let ext = FieldContext::new(model.q(), n)?;
        let fp_n = fp.embed_into(&ext)?;
        let (m1n, m2n) = (m1.embed_into(&ext)?, m2.embed_into(&ext)?);
        for _ in 0..ATTEMPTS_PER_N {
            attempts += 1;
            let c1 = m1n.mul(&MatrixGf::random(&ext, m1.cols(), r1, &mut rng))?;
            let c2 = m2n.mul(&MatrixGf::random(&ext, m2.cols(), r2, &mut rng))?;
            let comm = MatrixGf::hstack(&ext, model.l(), &[&fp_n, &c1, &c2])?;
            let mut senders = vec![0; disc.f1.cols()];
            senders.extend(std::iter::repeat_n(1, disc.f2.cols()));
            senders.extend(std::iter::repeat_n(0, r1));
            senders.extend(std::iter::repeat_n(1, r2));
            let cand = CommScheme::new(ext.clone(), n, comm, senders, None)?;
            let maps = recovery_maps(model, &cand)?;
            if maps.iter().any(Option::is_none) {
                continue;
            }
            let mut cand = cand;
            cand.recovery = maps.into_iter().map(Option::unwrap).collect();
            let leak = leakage_rate(model, &cand)?;
            if leak == target {
                return Ok(TwoUserScheme { scheme: cand, discussion: disc, analysis, achieved: leak, target, attempts });
            }
            if best_leak.is_none_or(|b| leak < b) {
                best_leak = Some(leak);
                best = Some(cand);
            }
        }
    }
    Err(Error::SearchExhausted(Box::new(SearchFailure {
        message: format!("no scheme with leakage {target} up to block length {n_max}"),
        attempts,
        best,
    })))
}

// ---------------------------------------------------------------------------
// simulation

#[derive(Clone, Debug, serde::Serialize)]
pub struct SimulationReport {
    pub samples: usize,
    /// Number of (sample, terminal) pairs where recovery failed.
    pub recovery_failures: usize,
    pub exact_leakage_bits: f64,
    /// Plug-in estimate of `H(F | Z_w)` per realization.
    pub empirical_leakage_bits: f64,
    /// Whether the sample count comfortably exceeds the joint alphabet size.
    pub estimate_reliable: bool,
}

/// Samples `X^n`, runs every terminal's recovery map and estimates leakage.
pub fn simulate(model: &FlsModel, s: &CommScheme, samples: usize, seed: u64) -> Result<SimulationReport> {
    use std::collections::HashMap;
    let mut scheme = s.clone();
    if scheme.recovery.is_empty() {
        attach_recovery(model, &mut scheme)?;
    }
    let ext = &scheme.ext;
    let users = lifted_users(model, ext)?;
    let refs: Vec<&MatrixGf> = users.iter().collect();
    let zv = MatrixGf::hstack(ext, model.l(), &refs)?;
    let w = lift(model.wiretap(), ext)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut joint: HashMap<(Vec<u128>, Vec<u128>), usize> = HashMap::new();
    let mut marg: HashMap<Vec<u128>, usize> = HashMap::new();
    for _ in 0..samples {
        let x = MatrixGf::random(ext, 1, model.l(), &mut rng);
        let f = x.mul(&scheme.comm)?;
        let truth = x.mul(&zv)?;
        for (mi, ri) in users.iter().zip(&scheme.recovery) {
            let seen = f.hcat(&x.mul(mi)?)?;
            if seen.mul(ri)? != truth {
                failures += 1;
            }
        }
        let zw = x.mul(&w)?.row_codes(0);
        *joint.entry((f.row_codes(0), zw.clone())).or_insert(0) += 1;
        *marg.entry(zw).or_insert(0) += 1;
    }
    let ent = |counts: &mut dyn Iterator<Item = usize>| -> f64 {
        let total = samples as f64;
        counts.map(|c| {
            let p = c as f64 / total;
            -p * p.log2()
        }).sum()
    };
    let h_joint = ent(&mut joint.values().copied());
    let h_w = ent(&mut marg.values().copied());
    let fw_rank = scheme.comm.hcat(&w)?.rank() as f64;
    let alphabet = (ext.order() as f64).powf(fw_rank);
    let exact = leakage_rate(model, &scheme)?.bits();
    Ok(SimulationReport {
        samples,
        recovery_failures: failures,
        exact_leakage_bits: exact,
        empirical_leakage_bits: (h_joint - h_w) / scheme.n as f64,
        estimate_reliable: alphabet * 10.0 <= samples as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldContext {
        FieldContext::prime(2).unwrap()
    }

    fn motivating() -> TreePinModel {
        let f = f2();
        let w = MatrixGf::from_rows(&f, &[vec![1], vec![1], vec![1]]).unwrap();
        TreePinModel::new(&f, 4, vec![(0, 1), (1, 2), (2, 3)], vec![1, 1, 1], w).unwrap()
    }

    #[test]
    fn unit_scheme_on_motivating_example() {
        let m = motivating();
        let s = build_unit_scheme(&m).unwrap();
        assert_eq!(s.n, 2);
        let v = verify_scheme(&m.compile(), &s).unwrap();
        assert!(v.omniscient() && v.alignment && v.senders_consistent);
        assert_eq!(v.leakage, EntropyValue::new(1, 2));
        assert!(v.key.unwrap().secret);
    }

    #[test]
    fn general_scheme_on_motivating_example() {
        let m = motivating();
        let b = build_general_scheme(&m, &BuildOptions::default()).unwrap();
        let v = verify_scheme(&m.compile(), &b.scheme).unwrap();
        assert!(v.omniscient() && v.alignment);
        assert_eq!(v.leakage, EntropyValue::new(1, 2));
    }

    #[test]
    fn reducible_source_rejected() {
        let f = f2();
        let w = MatrixGf::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        let m = TreePinModel::new(&f, 3, vec![(0, 1), (1, 2)], vec![1, 1], w).unwrap();
        assert!(matches!(build_general_scheme(&m, &BuildOptions::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn two_user_chain_scheme() {
        let f = f2();
        let sel = |picks: &[usize]| MatrixGf::from_fn(&f, 3, picks.len(), |i, j| (picks[j] == i) as u128);
        let m = FlsModel::new(&f, vec![sel(&[0, 1]), sel(&[1, 2])], sel(&[2])).unwrap();
        let s = two_user_scheme(&m, 4, 0).unwrap();
        assert_eq!(s.achieved, EntropyValue::new(1, 2));
        assert!(s.scheme.n <= 4);
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 3), 2);
        assert_eq!(ceil_log(3, 9), 2);
        assert_eq!(ceil_log(5, 18), 2);
    }
}
