//! Seeded random source generators for test suites and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::FieldContext;
use crate::fls::{FlsModel, Var};
use crate::matrix::MatrixGf;
use crate::treepin::TreePinModel;

#[derive(Clone, Debug)]
pub struct TreeSuiteParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_multiplicity: usize,
    pub fields: Vec<u64>,
}

impl Default for TreeSuiteParams {
    fn default() -> Self {
        TreeSuiteParams { min_vertices: 3, max_vertices: 7, max_multiplicity: 3, fields: vec![2, 3, 5] }
    }
}

/// Random labelled tree on `v` vertices.
pub fn random_tree<R: Rng>(rng: &mut R, v: usize) -> Vec<(usize, usize)> {
    let mut labels: Vec<usize> = (0..v).collect();
    labels.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..v).map(|i| (labels[rng.gen_range(0..i)], labels[i])).collect();
    edges.shuffle(rng);
    edges
}

fn tree_skeleton(rng: &mut ChaCha8Rng, p: &TreeSuiteParams) -> (FieldContext, usize, Vec<(usize, usize)>, Vec<usize>) {
    let q = *p.fields.choose(rng).expect("at least one field");
    let ctx = FieldContext::prime(q).expect("prime");
    let v = rng.gen_range(p.min_vertices..=p.max_vertices);
    let edges = random_tree(rng, v);
    let mult = (0..edges.len()).map(|_| rng.gen_range(1..=p.max_multiplicity)).collect();
    (ctx, v, edges, mult)
}

/// Irreducible tree-PIN source with a full-rank wiretapper of random dimension
/// up to `sum n_e - min n_e`.
pub fn random_irreducible_tree_pin(seed: u64, p: &TreeSuiteParams) -> TreePinModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ctx, v, edges, mult) = tree_skeleton(&mut rng, p);
    let l: usize = mult.iter().sum();
    let bound = l - mult.iter().min().unwrap();
    let mut nw = rng.gen_range(0..=bound);
    loop {
        for _ in 0..64 {
            let w = MatrixGf::random(&ctx, l, nw, &mut rng);
            if w.rank() != nw {
                continue;
            }
            let m = TreePinModel::new(&ctx, v, edges.clone(), mult.clone(), w).expect("valid");
            if m.is_irreducible() {
                return m;
            }
        }
        nw -= 1;
    }
}

/// Tree-PIN source whose wiretapper has at least one edge-local component.
pub fn random_reducible_tree_pin(seed: u64, p: &TreeSuiteParams) -> TreePinModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_0000_0001);
    loop {
        let base = random_irreducible_tree_pin(rng.gen(), p);
        let ctx = base.ctx().clone();
        let l = base.total_symbols();
        let offsets = base.offsets();
        let mut cols = vec![base.wiretap().clone()];
        let extra = rng.gen_range(1..=2);
        for _ in 0..extra {
            let e = rng.gen_range(0..base.num_edges());
            let n_e = base.multiplicities()[e];
            let local = MatrixGf::random(&ctx, n_e, 1, &mut rng);
            let c = MatrixGf::from_fn(&ctx, l, 1, |i, _| {
                if i >= offsets[e] && i < offsets[e] + n_e {
                    local.code(i - offsets[e], 0)
                } else {
                    0
                }
            });
            cols.push(c);
        }
        let refs: Vec<&MatrixGf> = cols.iter().collect();
        let w = MatrixGf::hstack(&ctx, l, &refs).expect("shapes");
        let k = w.cols();
        let mix = MatrixGf::random(&ctx, k, k, &mut rng);
        if mix.rank() != k {
            continue;
        }
        let w = w.mul(&mix).expect("shapes");
        if w.rank() != k {
            continue;
        }
        let m = base.with_wiretap(w).expect("full rank");
        if !m.is_irreducible() {
            return m;
        }
    }
}

/// Random finite linear source over F_q with `l <= max_l`.
pub fn random_fls(seed: u64, q: u64, max_l: usize, max_users: usize) -> FlsModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = FieldContext::prime(q).expect("prime");
    let l = rng.gen_range(1..=max_l);
    let m = rng.gen_range(2..=max_users.max(2));
    let mut pool: Vec<MatrixGf> = Vec::new();
    let gen = |rng: &mut ChaCha8Rng, pool: &mut Vec<MatrixGf>| -> MatrixGf {
        let cols = rng.gen_range(0..=l);
        let mut out = MatrixGf::random(&ctx, l, cols, rng);
        // reuse columns of earlier observations so that common functions appear
        if !pool.is_empty() && cols > 0 && rng.gen_bool(0.6) {
            let src = pool.choose(rng).unwrap();
            for j in 0..cols.min(src.cols()) {
                if rng.gen_bool(0.5) {
                    for i in 0..l {
                        out.set_code(i, j, src.code(i, j));
                    }
                }
            }
        }
        pool.push(out.clone());
        out
    };
    let users: Vec<MatrixGf> = (0..m).map(|_| gen(&mut rng, &mut pool)).collect();
    let w = gen(&mut rng, &mut pool);
    FlsModel::new(&ctx, users, w).expect("valid")
}

/// Random `(target, given)` query over the variables of `model`.
pub fn random_query<R: Rng>(rng: &mut R, model: &FlsModel) -> (Vec<Var>, Vec<Var>) {
    let mut vars: Vec<Var> = (0..model.num_users()).map(Var::User).collect();
    vars.push(Var::Wiretap);
    let mut target = Vec::new();
    let mut given = Vec::new();
    for v in vars {
        match rng.gen_range(0..3) {
            0 => target.push(v),
            1 => given.push(v),
            _ => {}
        }
    }
    if target.is_empty() {
        target.push(Var::User(0));
        given.retain(|&v| v != Var::User(0));
    }
    (target, given)
}

/// Random two-user source whose wiretapper mixes functions of each user's
/// observation with outside noise.
pub fn random_two_user(seed: u64, q: u64, max_l: usize) -> FlsModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = FieldContext::prime(q).expect("prime");
    let l = rng.gen_range(2..=max_l);
    let c1 = rng.gen_range(1..=l);
    let c2 = rng.gen_range(1..=l);
    let m1 = MatrixGf::random(&ctx, l, c1, &mut rng);
    let mut m2 = MatrixGf::random(&ctx, l, c2, &mut rng);
    let shared = rng.gen_range(0..=c1.min(c2));
    for j in 0..shared {
        for i in 0..l {
            m2.set_code(i, j, m1.code(i, j));
        }
    }
    let mut parts = Vec::new();
    for (src, cnt) in [(&m1, rng.gen_range(0..=2)), (&m2, rng.gen_range(0..=2))] {
        let mix = MatrixGf::random(&ctx, src.cols(), cnt, &mut rng);
        parts.push(src.mul(&mix).expect("shapes"));
    }
    parts.push(MatrixGf::random(&ctx, l, rng.gen_range(0..=2), &mut rng));
    let refs: Vec<&MatrixGf> = parts.iter().collect();
    let w = MatrixGf::hstack(&ctx, l, &refs).expect("shapes");
    FlsModel::new(&ctx, vec![m1, m2], w).expect("valid")
}

/// Path `0 - 1 - ... - len` with `s` symbols per edge.
pub fn path_model(ctx: &FieldContext, len: usize, s: usize, wiretap: MatrixGf) -> crate::error::Result<TreePinModel> {
    let edges = (0..len).map(|i| (i, i + 1)).collect();
    TreePinModel::new(ctx, len + 1, edges, vec![s; len], wiretap)
}
