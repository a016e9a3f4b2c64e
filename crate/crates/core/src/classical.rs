//! Numerical tools for general discrete sources.
//!
//! Everything here works in `f64` with entropies in bits. Comparisons use
//! [`TOL`] unless a caller passes its own tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default absolute tolerance for floating-point comparisons.
pub const TOL: f64 = 1e-10;
/// Searched rates at or below this are treated as zero.
pub const RATE_FLOOR: f64 = 1e-9;
/// Most assignments examined by [`positivity_search`].
pub const POSITIVITY_BUDGET: f64 = 1e7;
/// Most (type pair, pattern) terms evaluated by [`block_swap_bound`].
pub const BLOCK_SWAP_BUDGET: f64 = 5e7;

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Entropy in bits of a (not necessarily normalized) nonnegative vector's
/// normalization. Zero mass gives 0.
fn entropy_of(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let q = x / total;
            -q * q.log2()
        })
        .sum()
}

/// Joint distribution of `m` user observations and the wiretapper's.
///
/// Probabilities are stored row-major over `(z_1, ..., z_m, z_w)` with the
/// wiretapper's symbol varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointPmf {
    user_labels: Vec<Vec<String>>,
    wiretap_labels: Vec<String>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(user_labels: Vec<Vec<String>>, wiretap_labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if user_labels.len() < 2 {
            return invalid("a source needs at least two users");
        }
        if user_labels.iter().any(|a| a.is_empty()) || wiretap_labels.is_empty() {
            return invalid("empty alphabet");
        }
        let size: usize = user_labels.iter().map(Vec::len).product::<usize>() * wiretap_labels.len();
        if probs.len() != size {
            return invalid(format!("expected {size} probabilities, got {}", probs.len()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}"));
        }
        Ok(JointPmf { user_labels, wiretap_labels, probs })
    }

    /// Alphabets labelled `0..size`.
    pub fn from_sizes(user_sizes: &[usize], wiretap_size: usize, probs: Vec<f64>) -> Result<Self> {
        let lab = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Self::new(user_sizes.iter().map(|&n| lab(n)).collect(), lab(wiretap_size), probs)
    }

    pub fn num_users(&self) -> usize {
        self.user_labels.len()
    }

    pub fn user_labels(&self) -> &[Vec<String>] {
        &self.user_labels
    }

    pub fn wiretap_labels(&self) -> &[String] {
        &self.wiretap_labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Alphabet sizes of all variables; the wiretapper is last.
    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.user_labels.iter().map(Vec::len).collect();
        d.push(self.wiretap_labels.len());
        d
    }

    /// Index of the wiretapper among the variables.
    pub fn wiretap_var(&self) -> usize {
        self.num_users()
    }

    fn decompose(&self, mut idx: usize, dims: &[usize], out: &mut [usize]) {
        for k in (0..dims.len()).rev() {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
    }

    /// Marginal over `vars` (in the given order), row-major.
    pub fn marginal(&self, vars: &[usize]) -> (Vec<usize>, Vec<f64>) {
        let dims = self.dims();
        let mdims: Vec<usize> = vars.iter().map(|&v| dims[v]).collect();
        let size: usize = mdims.iter().product();
        let mut out = vec![0.0; size];
        let mut sym = vec![0usize; dims.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.decompose(i, &dims, &mut sym);
            let j = vars.iter().fold(0usize, |acc, &v| acc * dims[v] + sym[v]);
            out[j] += p;
        }
        (mdims, out)
    }

    /// Joint entropy of `vars` in bits.
    pub fn entropy(&self, vars: &[usize]) -> f64 {
        let mut v = vars.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return 0.0;
        }
        entropy_of(&self.marginal(&v).1)
    }

    /// `H(a | b)`.
    pub fn cond_entropy(&self, a: &[usize], b: &[usize]) -> f64 {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.entropy(&ab) - self.entropy(b)
    }

    /// `I(a ∧ b | c)`.
    pub fn mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)
    }

    /// Same distribution with users `i` and `j` exchanged.
    pub fn swap_users(&self, i: usize, j: usize) -> JointPmf {
        let dims = self.dims();
        let mut perm: Vec<usize> = (0..dims.len()).collect();
        perm.swap(i, j);
        let (_, probs) = self.marginal(&perm);
        let mut labels = self.user_labels.clone();
        labels.swap(i, j);
        JointPmf { user_labels: labels, wiretap_labels: self.wiretap_labels.clone(), probs }
    }
}

/// Doubly symmetric binary erasure source: `X ~ Ber(1/2)`, `Y = X` through a
/// BSC(p), and the wiretapper sees `(X, Y)` with probability `1 - eps` and an
/// erasure otherwise. The wiretapper alphabet is `00, 01, 10, 11, e`.
pub fn dsbe(p: f64, eps: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&eps) {
        return invalid("p and eps must lie in [0, 1]");
    }
    let mut probs = Vec::with_capacity(20);
    for x in 0..2 {
        for y in 0..2 {
            let pxy = 0.5 * if x == y { 1.0 - p } else { p };
            for z in 0..5 {
                let pz = if z == 4 {
                    eps
                } else if z == 2 * x + y {
                    1.0 - eps
                } else {
                    0.0
                };
                probs.push(pxy * pz);
            }
        }
    }
    let bin = vec!["0".to_string(), "1".to_string()];
    let zl = ["00", "01", "10", "11", "e"].iter().map(|s| s.to_string()).collect();
    JointPmf::new(vec![bin.clone(), bin], zl, probs)
}

/// `X ~ Ber(1/2)`, `Y` is `X` through a BSC(p) and `Z` is `X` through a BEC(eps).
pub fn bsc_bec(p: f64, eps: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&eps) {
        return invalid("p and eps must lie in [0, 1]");
    }
    let mut probs = Vec::with_capacity(12);
    for x in 0..2 {
        for y in 0..2 {
            let pxy = 0.5 * if x == y { 1.0 - p } else { p };
            for z in 0..3 {
                let pz = if z == 2 {
                    eps
                } else if z == x {
                    1.0 - eps
                } else {
                    0.0
                };
                probs.push(pxy * pz);
            }
        }
    }
    let bin = vec!["0".to_string(), "1".to_string()];
    let zl = ["0", "1", "e"].iter().map(|s| s.to_string()).collect();
    JointPmf::new(vec![bin.clone(), bin], zl, probs)
}

/// `p * q = p(1-q) + (1-p)q`.
pub fn bin_conv(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + (1.0 - p) * q
}

/// `f(q) = (1 - eps) h(q) - h(p * q) + h(p)`, the gap `I(X~ ∧ Z) - I(X~ ∧ Y)`
/// for input `X~ ~ Ber(q)` on the DSBE channel.
pub fn f_curve(p: f64, eps: f64, q: f64) -> f64 {
    (1.0 - eps) * h2(q) - h2(bin_conv(p, q)) + h2(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCheck {
    pub holds: bool,
    pub value: f64,
    /// Location of `value` (grid point or evaluation point).
    pub at: f64,
}

/// The wiretapper is more capable than the receiver iff `f >= 0` on `[0, 1]`;
/// checked on a uniform grid of `grid` points.
pub fn more_capable_check(p: f64, eps: f64, grid: usize, tol: f64) -> CurveCheck {
    let grid = grid.max(2);
    let (mut best, mut at) = (f64::INFINITY, 0.0);
    for i in 0..grid {
        let q = i as f64 / (grid - 1) as f64;
        let v = f_curve(p, eps, q);
        if v < best {
            best = v;
            at = q;
        }
    }
    CurveCheck { holds: best >= -tol, value: best, at }
}

/// The receiver is not less noisy than the wiretapper if `f` is strictly
/// convex at `1/2`; the second derivative is estimated by a central difference.
pub fn not_less_noisy_check(p: f64, eps: f64, step: f64, tol: f64) -> CurveCheck {
    let d2 = (f_curve(p, eps, 0.5 + step) - 2.0 * f_curve(p, eps, 0.5) + f_curve(p, eps, 0.5 - step)) / (step * step);
    CurveCheck { holds: d2 > tol, value: d2, at: 0.5 }
}

/// Sampled `(q, f(q))` pairs.
pub fn f_curve_samples(p: f64, eps: f64, grid: usize) -> Vec<(f64, f64)> {
    let grid = grid.max(2);
    (0..grid)
        .map(|i| {
            let q = i as f64 / (grid - 1) as f64;
            (q, f_curve(p, eps, q))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// one-way and two-message bounds

/// Which user speaks in a one-way protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// User 1 sends, user 2 receives.
    OneToTwo,
    TwoToOne,
}

/// `P(x, y, z)` with `x` the sender, `y` the receiver, `z` the wiretapper.
struct Triple {
    nx: usize,
    ny: usize,
    nz: usize,
    p: Vec<f64>,
}

impl Triple {
    fn new(pmf: &JointPmf, dir: Direction) -> Result<Self> {
        if pmf.num_users() != 2 {
            return invalid("two-user source expected");
        }
        let w = pmf.wiretap_var();
        let vars = match dir {
            Direction::OneToTwo => [0, 1, w],
            Direction::TwoToOne => [1, 0, w],
        };
        let (d, p) = pmf.marginal(&vars);
        Ok(Triple { nx: d[0], ny: d[1], nz: d[2], p })
    }

    fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.p[(x * self.ny + y) * self.nz + z]
    }

    /// `P(x, y)` and `P(x, z)`.
    fn pairs(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xy = vec![0.0; self.nx * self.ny];
        let mut xz = vec![0.0; self.nx * self.nz];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    let v = self.at(x, y, z);
                    xy[x * self.ny + y] += v;
                    xz[x * self.nz + z] += v;
                }
            }
        }
        (xy, xz)
    }
}

/// Row-stochastic matrix stored row-major.
#[derive(Clone, Debug, Serialize)]
pub struct Channel {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
}

impl Channel {
    fn random<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut w = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row: Vec<f64> = (0..cols).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = row.iter().sum();
            w.extend(row.iter().map(|v| v / s));
        }
        Channel { rows, cols, w }
    }

    fn identity_like(rows: usize, cols: usize, mix: f64) -> Self {
        let mut w = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let id = if c == r % cols { 1.0 } else { 0.0 };
                w[r * cols + c] = mix * id + (1.0 - mix) / cols as f64;
            }
        }
        Channel { rows, cols, w }
    }

    fn constant(rows: usize, cols: usize) -> Self {
        let mut w = vec![0.0; rows * cols];
        for r in 0..rows {
            w[r * cols] = 1.0;
        }
        Channel { rows, cols, w }
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self.w[r * self.cols + c]
    }
}

/// Pattern search over the entries of several channels: mass is moved between
/// pairs of entries of one row while the objective improves, with step sizes
/// halving down to `1e-9`.
fn pattern_search(chans: &mut [Channel], maximize: bool, f: &dyn Fn(&[Channel]) -> f64) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut best = sign * f(chans);
    let mut step: f64 = 0.25;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..chans.len() {
            let (rows, cols) = (chans[k].rows, chans[k].cols);
            for r in 0..rows {
                for a in 0..cols {
                    for b in 0..cols {
                        if a == b {
                            continue;
                        }
                        let ia = r * cols + a;
                        let ib = r * cols + b;
                        let d = step.min(chans[k].w[ia]);
                        if d <= 0.0 {
                            continue;
                        }
                        chans[k].w[ia] -= d;
                        chans[k].w[ib] += d;
                        let v = sign * f(chans);
                        if v > best + 1e-15 {
                            best = v;
                            improved = true;
                        } else {
                            chans[k].w[ia] += d;
                            chans[k].w[ib] -= d;
                        }
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    sign * best
}

/// `I(U ∧ Y | V) - I(U ∧ Z | V)` with `V - U - X - (Y, Z)`.
fn oneway_objective(t: &Triple, pu: &Channel, pv: &Channel) -> f64 {
    let (xy, xz) = t.pairs();
    let (nu, nv) = (pu.cols, pv.cols);
    let gap = |pxw: &[f64], nw: usize| -> f64 {
        // P(v, u, w)
        let mut vuw = vec![0.0; nv * nu * nw];
        for x in 0..t.nx {
            for u in 0..nu {
                let a = pu.get(x, u);
                if a == 0.0 {
                    continue;
                }
                for v in 0..nv {
                    let b = pv.get(u, v) * a;
                    if b == 0.0 {
                        continue;
                    }
                    for w in 0..nw {
                        vuw[(v * nu + u) * nw + w] += b * pxw[x * nw + w];
                    }
                }
            }
        }
        // I(U ∧ W | V) = H(U|V) - H(U|V,W)
        let mut uv = vec![0.0; nv * nu];
        let mut vw = vec![0.0; nv * nw];
        let mut pvv = vec![0.0; nv];
        for v in 0..nv {
            for u in 0..nu {
                for w in 0..nw {
                    let p = vuw[(v * nu + u) * nw + w];
                    uv[v * nu + u] += p;
                    vw[v * nw + w] += p;
                    pvv[v] += p;
                }
            }
        }
        entropy_of(&uv) - entropy_of(&pvv) - (entropy_of(&vuw) - entropy_of(&vw))
    };
    gap(&xy, t.ny) - gap(&xz, t.nz)
}

#[derive(Clone, Debug, Serialize)]
pub struct OneWaySearch {
    pub direction: Direction,
    /// Best objective found; a valid lower bound on the one-way capacity.
    pub value: f64,
    pub p_u_given_x: Channel,
    pub p_v_given_u: Channel,
}

/// Lower bound on the one-way secret key capacity by local search over
/// `P_{U|X}` (`|U| <= |X|^2`) and `P_{V|U}` (`|V| <= |X|`).
pub fn oneway_capacity_search(pmf: &JointPmf, dir: Direction, restarts: usize, seed: u64) -> Result<OneWaySearch> {
    let t = Triple::new(pmf, dir)?;
    let nx = t.nx;
    let nu = nx * nx;
    let nv = nx;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(Channel, Channel)> = vec![
        (Channel::constant(nx, nu), Channel::constant(nu, nv)),
        (Channel::identity_like(nx, nu, 1.0), Channel::constant(nu, nv)),
    ];
    for k in 1..10 {
        starts.push((Channel::identity_like(nx, nu, k as f64 * 0.1), Channel::constant(nu, nv)));
    }
    for _ in 0..restarts {
        starts.push((Channel::random(nx, nu, &mut rng), Channel::random(nu, nv, &mut rng)));
    }
    let mut best: Option<OneWaySearch> = None;
    for (pu, pv) in starts {
        let mut chans = [pu, pv];
        let f = |c: &[Channel]| oneway_objective(&t, &c[0], &c[1]);
        let v = pattern_search(&mut chans, true, &f);
        if best.as_ref().is_none_or(|b| v > b.value) {
            let [pu, pv] = chans;
            best = Some(OneWaySearch { direction: dir, value: v, p_u_given_x: pu, p_v_given_u: pv });
        }
    }
    Ok(best.expect("at least one start"))
}

/// Lower bound on the DSBE one-way capacity using `X = U` through a
/// BSC(1/2 - delta), maximized over `delta` on a grid of `(0, 1/2]`.
pub fn lb_dsbe(p: f64, eps: f64, grid: usize) -> Result<(f64, f64)> {
    let pmf = dsbe(p, eps)?;
    let t = Triple::new(&pmf, Direction::OneToTwo)?;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 1..=grid.max(1) {
        let delta = 0.5 * i as f64 / grid.max(1) as f64;
        let c = 0.5 - delta;
        // P(u | x) from the Bayes inverse of the BSC with uniform U
        let pu = Channel { rows: 2, cols: 2, w: vec![1.0 - c, c, c, 1.0 - c] };
        let v = oneway_objective(&t, &pu, &Channel::constant(2, 1));
        if v > best.0 {
            best = (v, delta);
        }
    }
    Ok(best)
}

/// `I(S ∧ X | Z) + H(X | S, Y)` for `S` drawn from `X` through `ps`.
fn leakage_objective(t: &Triple, ps: &Channel) -> f64 {
    let ns = ps.cols;
    // P(s, x, z) and P(s, y, x)
    let mut sxz = vec![0.0; ns * t.nx * t.nz];
    let mut syx = vec![0.0; ns * t.ny * t.nx];
    for x in 0..t.nx {
        for y in 0..t.ny {
            for z in 0..t.nz {
                let p = t.at(x, y, z);
                if p == 0.0 {
                    continue;
                }
                for s in 0..ns {
                    let q = p * ps.get(x, s);
                    sxz[(s * t.nx + x) * t.nz + z] += q;
                    syx[(s * t.ny + y) * t.nx + x] += q;
                }
            }
        }
    }
    // I(S ∧ X | Z) = H(S|Z) - H(S|X,Z)
    let mut sz = vec![0.0; ns * t.nz];
    let mut xz = vec![0.0; t.nx * t.nz];
    for s in 0..ns {
        for x in 0..t.nx {
            for z in 0..t.nz {
                let v = sxz[(s * t.nx + x) * t.nz + z];
                sz[s * t.nz + z] += v;
                xz[x * t.nz + z] += v;
            }
        }
    }
    let pz: Vec<f64> = (0..t.nz).map(|z| (0..t.nx).map(|x| xz[x * t.nz + z]).sum()).collect();
    let i_sx_z = (entropy_of(&sz) - entropy_of(&pz)) - (entropy_of(&sxz) - entropy_of(&xz));
    // H(X | S, Y) = H(S, Y, X) - H(S, Y)
    let sy: Vec<f64> = (0..ns * t.ny).map(|k| syx[k * t.nx..(k + 1) * t.nx].iter().sum()).collect();
    let h_x_sy = entropy_of(&syx) - entropy_of(&sy);
    i_sx_z + h_x_sy
}

#[derive(Clone, Debug, Serialize)]
pub struct OneWayLeakage {
    pub direction: Direction,
    /// Smallest objective found; an upper bound on the one-way leakage rate.
    pub search_value: f64,
    pub p_s_given_x: Channel,
    /// `H(X | Z)` for the sender `X`, a lower bound when the wiretapper is
    /// more capable than the receiver.
    pub converse: f64,
    /// More-capable certificate on a grid of input distributions.
    pub certified: bool,
    /// `converse` when certified, otherwise `search_value`.
    pub value: f64,
}

/// Whether `Z` is more capable than `Y` for inputs `X` (`I(X~∧Z) >= I(X~∧Y)`
/// for every input law), checked on a grid for binary `X` and on sampled
/// input laws otherwise. Returns the smallest gap found.
pub fn more_capable_grid(pmf: &JointPmf, dir: Direction, grid: usize, seed: u64) -> Result<f64> {
    let t = Triple::new(pmf, dir)?;
    let (xy, xz) = t.pairs();
    let px: Vec<f64> = (0..t.nx).map(|x| (0..t.ny).map(|y| xy[x * t.ny + y]).sum()).collect();
    let cond = |pxw: &[f64], nw: usize| -> Vec<f64> {
        let mut c = vec![0.0; t.nx * nw];
        for x in 0..t.nx {
            for w in 0..nw {
                c[x * nw + w] = if px[x] > 0.0 { pxw[x * nw + w] / px[x] } else { 0.0 };
            }
        }
        c
    };
    let (wy, wz) = (cond(&xy, t.ny), cond(&xz, t.nz));
    let mi = |input: &[f64], ch: &[f64], nw: usize| -> f64 {
        let joint: Vec<f64> = (0..t.nx * nw).map(|k| input[k / nw] * ch[k]).collect();
        let out: Vec<f64> = (0..nw).map(|w| (0..t.nx).map(|x| joint[x * nw + w]).sum()).collect();
        entropy_of(input) + entropy_of(&out) - entropy_of(&joint)
    };
    let gap = |input: &[f64]| mi(input, &wz, t.nz) - mi(input, &wy, t.ny);
    let mut best = f64::INFINITY;
    if t.nx == 2 {
        for i in 0..grid.max(2) {
            let a = i as f64 / (grid.max(2) - 1) as f64;
            best = best.min(gap(&[a, 1.0 - a]));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..grid.max(1) * 10 {
            let c = Channel::random(1, t.nx, &mut rng);
            best = best.min(gap(&c.w));
        }
    }
    Ok(best)
}

/// Upper bound on the one-way leakage rate,
/// `min I(S ∧ X | Z) + H(X | S, Y)` over `P_{S|X}` with `|S| <= |X|`.
pub fn oneway_leakage_search(pmf: &JointPmf, dir: Direction, grid: usize, seed: u64) -> Result<OneWayLeakage> {
    let t = Triple::new(pmf, dir)?;
    let nx = t.nx;
    let mut best: Option<(f64, Channel)> = None;
    let consider = |v: f64, c: Channel, best: &mut Option<(f64, Channel)>| {
        if best.as_ref().is_none_or(|b| v < b.0) {
            *best = Some((v, c));
        }
    };
    if nx == 2 {
        let g = grid.max(2);
        for i in 0..g {
            for j in 0..g {
                let a = i as f64 / (g - 1) as f64;
                let b = j as f64 / (g - 1) as f64;
                let c = Channel { rows: 2, cols: 2, w: vec![a, 1.0 - a, b, 1.0 - b] };
                let v = leakage_objective(&t, &c);
                consider(v, c, &mut best);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![Channel::identity_like(nx, nx, 1.0), Channel::constant(nx, nx)];
    if let Some((_, c)) = &best {
        starts.push(c.clone());
    }
    for _ in 0..8 {
        starts.push(Channel::random(nx, nx, &mut rng));
    }
    for c in starts {
        let mut chans = [c];
        let f = |c: &[Channel]| leakage_objective(&t, &c[0]);
        let v = pattern_search(&mut chans, false, &f);
        let [c] = chans;
        consider(v, c, &mut best);
    }
    let (search_value, p_s_given_x) = best.expect("nonempty search");
    let w = pmf.wiretap_var();
    let sender = match dir {
        Direction::OneToTwo => 0,
        Direction::TwoToOne => 1,
    };
    let converse = pmf.cond_entropy(&[sender], &[w]);
    let certified = more_capable_grid(pmf, dir, 1001, seed)? >= -1e-9;
    let value = if certified { converse } else { search_value };
    Ok(OneWayLeakage { direction: dir, search_value, p_s_given_x, converse, certified, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Both wiretapper channels are more capable while a positive key rate is
    /// achievable: `R_L` exceeds `H(Z_V | Z_w) - C_W`.
    DualityFails,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoMessageReport {
    /// `max` of the two one-way capacity lower bounds.
    pub cw2_lb: f64,
    pub cw_oneway: [f64; 2],
    pub rl_oneway: [f64; 2],
    pub rl_oneway_certified: [bool; 2],
    /// `min(R_L(1->2) + H(Y|Z,X), R_L(2->1) + H(X|Z,Y))`.
    pub rl2_lb: f64,
    pub h_xy_given_z: f64,
    pub more_capable: [bool; 2],
    pub verdict: Verdict,
}

pub fn two_msg_report(pmf: &JointPmf, restarts: usize, seed: u64) -> Result<TwoMessageReport> {
    if pmf.num_users() != 2 {
        return invalid("two-user source expected");
    }
    let w = pmf.wiretap_var();
    let dirs = [Direction::OneToTwo, Direction::TwoToOne];
    let mut cw = [0.0; 2];
    let mut rl = [0.0; 2];
    let mut cert = [false; 2];
    for (k, &d) in dirs.iter().enumerate() {
        cw[k] = oneway_capacity_search(pmf, d, restarts, seed)?.value;
        let lk = oneway_leakage_search(pmf, d, 101, seed)?;
        rl[k] = lk.value;
        cert[k] = lk.certified;
    }
    let rl2 = (rl[0] + pmf.cond_entropy(&[1], &[w, 0])).min(rl[1] + pmf.cond_entropy(&[0], &[w, 1]));
    let cw2 = cw[0].max(cw[1]);
    let verdict = if cert[0] && cert[1] && cw2 > RATE_FLOOR { Verdict::DualityFails } else { Verdict::Inconclusive };
    Ok(TwoMessageReport {
        cw2_lb: cw2,
        cw_oneway: cw,
        rl_oneway: rl,
        rl_oneway_certified: cert,
        rl2_lb: rl2,
        h_xy_given_z: pmf.cond_entropy(&[0, 1], &[w]),
        more_capable: cert,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// positivity of the wiretap secret key capacity

/// Restriction of `pmf` to `Z_i ∈ sets[i]` for every user, renormalized.
pub fn condition_source(pmf: &JointPmf, sets: &[Vec<usize>]) -> Result<JointPmf> {
    if sets.len() != pmf.num_users() {
        return invalid("one symbol set per user expected");
    }
    let dims = pmf.dims();
    for (i, s) in sets.iter().enumerate() {
        if s.is_empty() || s.iter().any(|&a| a >= dims[i]) {
            return invalid(format!("bad symbol set for user {i}"));
        }
    }
    let mut sym = vec![0usize; dims.len()];
    let mut probs: Vec<f64> = Vec::with_capacity(pmf.probs.len());
    for (idx, &p) in pmf.probs.iter().enumerate() {
        pmf.decompose(idx, &dims, &mut sym);
        let inside = sets.iter().enumerate().all(|(i, s)| s.contains(&sym[i]));
        probs.push(if inside { p } else { 0.0 });
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("conditioning event has probability zero".into()));
    }
    let probs = probs.into_iter().map(|p| p / total).collect();
    Ok(JointPmf { user_labels: pmf.user_labels.clone(), wiretap_labels: pmf.wiretap_labels.clone(), probs })
}

/// Rényi divergence of order 1/2 in bits, `-2 log2 sum sqrt(P Q)`; infinite
/// for disjoint supports.
pub fn renyi_half(p: &[f64], q: &[f64]) -> f64 {
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    if bc <= 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * bc.log2()).max(0.0)
    }
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Pair of disjoint nonempty symbol sets `(A_{i1}, A_{i2})` per user.
pub type EventSets = Vec<[Vec<usize>; 2]>;

#[derive(Clone, Debug, Serialize)]
pub struct PositivityCheck {
    /// `D_{1/2}(P_{Z_w | E_{1..1}} || P_{Z_w | E_{2..2}})`.
    pub lhs: f64,
    /// `log2(p_{1..1} p_{2..2} / (1/2 sum_{j not constant} p_j p_{3-j}))`.
    pub rhs: f64,
    pub holds: bool,
    /// `rhs - lhs`.
    pub margin: f64,
}

/// Probability of each pattern `j ∈ {1,2}^m` (bit `i` set means set 2 for
/// user `i`) and the wiretapper's conditional law given it.
fn event_table(pmf: &JointPmf, sets: &EventSets) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = pmf.num_users();
    if sets.len() != m {
        return invalid("one pair of sets per user expected");
    }
    let dims = pmf.dims();
    let mut label = vec![vec![None; 0]; m];
    for i in 0..m {
        let [a, b] = &sets[i];
        if a.is_empty() || b.is_empty() {
            return invalid(format!("empty event set for user {i}"));
        }
        let mut l = vec![None; dims[i]];
        for (k, set) in [a, b].iter().enumerate() {
            for &s in set.iter() {
                if s >= dims[i] {
                    return invalid(format!("symbol {s} out of range for user {i}"));
                }
                if l[s].is_some() {
                    return invalid(format!("event sets of user {i} overlap"));
                }
                l[s] = Some(k);
            }
        }
        label[i] = l;
    }
    let nz = dims[m];
    let mut joint = vec![vec![0.0; nz]; 1 << m];
    let mut sym = vec![0usize; dims.len()];
    for (idx, &p) in pmf.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        pmf.decompose(idx, &dims, &mut sym);
        let mut j = 0usize;
        let mut ok = true;
        for i in 0..m {
            match label[i][sym[i]] {
                Some(k) => j |= k << i,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            joint[j][sym[m]] += p;
        }
    }
    let pj: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cond = joint
        .iter()
        .zip(&pj)
        .map(|(r, &t)| r.iter().map(|v| if t > 0.0 { v / t } else { 0.0 }).collect())
        .collect();
    Ok((pj, cond))
}

/// Sufficient condition for a positive key rate with single-letter events.
pub fn positivity_condition_check(pmf: &JointPmf, sets: &EventSets) -> Result<PositivityCheck> {
    let m = pmf.num_users();
    let (pj, cond) = event_table(pmf, sets)?;
    let all1 = 0usize;
    let all2 = (1usize << m) - 1;
    let num = pj[all1] * pj[all2];
    if num <= 0.0 {
        return invalid("events E_{1..1} and E_{2..2} must have positive probability");
    }
    let den: f64 = (0..1usize << m)
        .filter(|&j| j != all1 && j != all2)
        .map(|j| pj[j] * pj[all2 ^ j])
        .sum::<f64>()
        / 2.0;
    let lhs = renyi_half(&cond[all1], &cond[all2]);
    let rhs = if den <= 0.0 { f64::INFINITY } else { (num / den).log2() };
    let holds = if rhs.is_infinite() { lhs.is_finite() } else { lhs < rhs - 1e-12 };
    let margin = if rhs.is_infinite() && lhs.is_finite() { f64::INFINITY } else { rhs - lhs };
    Ok(PositivityCheck { lhs, rhs, holds, margin })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityCertificate {
    pub sets: EventSets,
    pub check: PositivityCheck,
}

/// Exhaustive search over single-letter event sets for a positivity
/// certificate; returns the one with the largest margin.
pub fn positivity_search(pmf: &JointPmf) -> Result<Option<PositivityCertificate>> {
    let m = pmf.num_users();
    let dims = pmf.dims();
    let work: f64 = dims[..m].iter().map(|&d| 3f64.powi(d as i32)).product();
    if work > POSITIVITY_BUDGET {
        return Err(Error::Resource(format!("{work} assignments exceed the search budget")));
    }
    // per user: every labelling of symbols into {set 1, set 2, unused} with both sets nonempty
    let per_user: Vec<Vec<[Vec<usize>; 2]>> = (0..m)
        .map(|i| {
            let d = dims[i];
            let mut out = Vec::new();
            for code in 0..3usize.pow(d as u32) {
                let mut c = code;
                let mut a = Vec::new();
                let mut b = Vec::new();
                for s in 0..d {
                    match c % 3 {
                        0 => a.push(s),
                        1 => b.push(s),
                        _ => {}
                    }
                    c /= 3;
                }
                if !a.is_empty() && !b.is_empty() {
                    out.push([a, b]);
                }
            }
            out
        })
        .collect();
    let mut best: Option<PositivityCertificate> = None;
    let mut idx = vec![0usize; m];
    if per_user.iter().any(|v| v.is_empty()) {
        return Ok(None);
    }
    loop {
        let sets: EventSets = (0..m).map(|i| per_user[i][idx[i]].clone()).collect();
        if let Ok(check) = positivity_condition_check(pmf, &sets) {
            if check.holds && best.as_ref().is_none_or(|b| check.margin > b.check.margin) {
                best = Some(PositivityCertificate { sets, check });
            }
        }
        let mut k = 0;
        loop {
            if k == m {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < per_user[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Smallest root of `16 d^2 - (8 + 4 sqrt(2^{m-1} - 1)) d + 1 = 0`.
pub fn delta1(m: u32) -> Result<f64> {
    if m < 2 {
        return invalid("delta1 needs m >= 2");
    }
    let b = 8.0 + 4.0 * (2f64.powi(m as i32 - 1) - 1.0).sqrt();
    let disc = b * b - 64.0;
    // stable form of (b - sqrt(disc)) / 32
    Ok(2.0 / (b + disc.sqrt()))
}

/// Residual of the defining quadratic of [`delta1`].
pub fn delta1_residual(m: u32, d: f64) -> f64 {
    let b = 8.0 + 4.0 * (2f64.powi(m as i32 - 1) - 1.0).sqrt();
    16.0 * d * d - b * d + 1.0
}

/// Source with user alphabets `{1, 2, 3}`: symbol `k` for `Z_i ∈ A_{ik}`
/// (`k = 1, 2`) and `3` otherwise. The wiretapper is unchanged.
pub fn ternary_transform(pmf: &JointPmf, sets: &EventSets) -> Result<JointPmf> {
    let m = pmf.num_users();
    event_table(pmf, sets)?;
    let dims = pmf.dims();
    let nz = dims[m];
    let tern = |i: usize, s: usize| -> usize {
        if sets[i][0].contains(&s) {
            0
        } else if sets[i][1].contains(&s) {
            1
        } else {
            2
        }
    };
    let size = 3usize.pow(m as u32) * nz;
    let mut probs = vec![0.0; size];
    let mut sym = vec![0usize; dims.len()];
    for (idx, &p) in pmf.probs.iter().enumerate() {
        pmf.decompose(idx, &dims, &mut sym);
        let j = (0..m).fold(0usize, |acc, i| acc * 3 + tern(i, sym[i]));
        probs[j * nz + sym[m]] += p;
    }
    let lab = vec!["1".to_string(), "2".to_string(), "3".to_string()];
    JointPmf::new(vec![lab; m], pmf.wiretap_labels.clone(), probs)
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSwap {
    pub n: usize,
    pub q1: f64,
    /// `H(pattern | Z_w^n, event)` in bits.
    pub lhs: f64,
    /// `(2^m - 2)(1 - q1)(log2(2^{m-1} - 1) - 2 log2(1 - q1))`.
    pub rhs: f64,
    pub exceeds: bool,
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

fn binom(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
}

/// Repetition coding with block swapping on a ternary source (see
/// [`ternary_transform`]) at even block length `n`. `lhs` is computed exactly
/// by summing over pairs of types of the two halves of `Z_w^n`.
pub fn block_swap_bound(tern: &JointPmf, n: usize) -> Result<BlockSwap> {
    let m = tern.num_users();
    if n == 0 || !n.is_multiple_of(2) {
        return invalid("block length must be even and positive");
    }
    if tern.dims()[..m].iter().any(|&d| d != 3) {
        return invalid("block swapping needs ternary user alphabets");
    }
    let h = n / 2;
    let nz = tern.dims()[m];
    let patterns = 1usize << m;
    let types = binom(h + nz - 1, nz - 1);
    if types * types * patterns as f64 > BLOCK_SWAP_BUDGET {
        return Err(Error::Resource(format!("block length {n} needs too many type pairs")));
    }
    // P(j, z) for j ∈ {1,2}^m
    let mut pj = vec![0.0; patterns];
    let mut pz = vec![vec![0.0; nz]; patterns];
    let dims = tern.dims();
    let mut sym = vec![0usize; dims.len()];
    for (idx, &p) in tern.probs.iter().enumerate() {
        tern.decompose(idx, &dims, &mut sym);
        if sym[..m].contains(&2) {
            continue;
        }
        let j = (0..m).fold(0usize, |acc, i| acc | (sym[i] << i));
        pj[j] += p;
        pz[j][sym[m]] += p;
    }
    let all2 = patterns - 1;
    if pj[0] <= 0.0 || pj[all2] <= 0.0 {
        return invalid("constant patterns must have positive probability");
    }
    let lnp: Vec<f64> = pj.iter().map(|&p| p.ln()).collect();
    let ln_cond: Vec<Vec<f64>> = (0..patterns)
        .map(|j| pz[j].iter().map(|&v| if pj[j] > 0.0 { (v / pj[j]).ln() } else { f64::NEG_INFINITY }).collect())
        .collect();
    let prior: Vec<f64> = (0..patterns).map(|k| h as f64 * (lnp[k] + lnp[all2 ^ k])).collect();
    let ln_norm = log_sum_exp(&prior);
    // q1 = p_{1..1}^h p_{2..2}^h / (1/2 sum_j p_j^h p_{3-j}^h); since the two
    // constant patterns share one prior, 1 - q1 is the mass of the others
    let q1 = (prior[0] - (ln_norm - std::f64::consts::LN_2)).exp().min(1.0);
    let others: Vec<f64> = (1..all2).map(|k| prior[k]).collect();
    let ln_one_minus = log_sum_exp(&others) - ln_norm;
    let s = (2f64.powi(m as i32 - 1) - 1.0).log2();
    let rhs = if ln_one_minus == f64::NEG_INFINITY {
        0.0
    } else {
        let one_minus = ln_one_minus.exp();
        (patterns as f64 - 2.0) * one_minus * (s - 2.0 * ln_one_minus / std::f64::consts::LN_2)
    };

    let comps = compositions(h, nz);
    let ln_h_fact = ln_factorial(h);
    // per type: log multinomial and sum_a T_a ln P(a | j) for every j
    let stats: Vec<(f64, Vec<f64>)> = comps
        .iter()
        .map(|t| {
            let lm = ln_h_fact - t.iter().map(|&c| ln_factorial(c)).sum::<f64>();
            let per: Vec<f64> = (0..patterns)
                .map(|j| {
                    t.iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(a, &c)| c as f64 * ln_cond[j][a])
                        .sum()
                })
                .collect();
            (lm, per)
        })
        .collect();
    let mut lhs = 0.0;
    let mut logw = vec![0.0; patterns];
    for (lm1, s1) in &stats {
        for (lm2, s2) in &stats {
            for k in 0..patterns {
                logw[k] = prior[k] + s1[k] + s2[all2 ^ k];
            }
            let lse = log_sum_exp(&logw);
            if lse == f64::NEG_INFINITY {
                continue;
            }
            let class = (lm1 + lm2 + lse - ln_norm).exp();
            if class == 0.0 {
                continue;
            }
            let mut hpost = 0.0;
            for &w in &logw {
                let p = (w - lse).exp();
                if p > 0.0 {
                    hpost -= p * p.log2();
                }
            }
            lhs += class * hpost;
        }
    }
    Ok(BlockSwap { n, q1, lhs, rhs, exceeds: lhs > rhs })
}

/// [`block_swap_bound`] for every even `n <= n_max`.
pub fn block_swap_sweep(tern: &JointPmf, n_max: usize) -> Result<Vec<BlockSwap>> {
    (1..=n_max / 2).map(|k| block_swap_bound(tern, 2 * k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsbe_marginals() {
        let p = dsbe(0.1, 0.4).unwrap();
        assert_eq!(p.dims(), vec![2, 2, 5]);
        assert!((p.entropy(&[0]) - 1.0).abs() < 1e-12);
        assert!((p.cond_entropy(&[1], &[0]) - h2(0.1)).abs() < 1e-12);
        assert!((p.cond_entropy(&[0], &[2]) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn f_curve_endpoints_vanish() {
        assert_eq!(f_curve(0.1, 0.4, 0.0), 0.0);
        assert!(f_curve(0.1, 0.4, 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta1_m2_closed_form() {
        let d = delta1(2).unwrap();
        assert!((d - (12.0 - 80f64.sqrt()) / 32.0).abs() < 1e-15);
        assert!(delta1_residual(2, d).abs() < 1e-12);
    }

    #[test]
    fn renyi_half_extremes() {
        assert_eq!(renyi_half(&[1.0, 0.0], &[0.0, 1.0]), f64::INFINITY);
        assert_eq!(renyi_half(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn correlated_bits_positivity() {
        let pmf = JointPmf::from_sizes(&[2, 2], 1, vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let sets = vec![[vec![0], vec![1]], [vec![0], vec![1]]];
        let c = positivity_condition_check(&pmf, &sets).unwrap();
        assert!((c.rhs - 81f64.log2()).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let pmf = JointPmf::from_sizes(&[2, 2], 1, vec![0.25; 4]).unwrap();
        let sets = vec![[vec![0], vec![0]], [vec![0], vec![1]]];
        assert!(positivity_condition_check(&pmf, &sets).is_err());
    }
}
