//! Tree-PIN sources.
//!
//! Every edge `e` of a tree carries `n_e` independent uniform symbols `Y_e`;
//! a vertex observes the symbols of its incident edges and the wiretapper
//! observes `Z_w = X W` with `X = (Y_e)_e`. Rows of `W` are grouped by edge in
//! edge-list order.

use num_rational::Ratio;

use crate::entropy::EntropyValue;
use crate::error::{dim, invalid, Error, Result};
use crate::field::FieldContext;
use crate::fls::{mcf, FlsModel};
use crate::lp::{rco_lp, MAX_USERS};
use crate::matrix::MatrixGf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePinModel {
    ctx: FieldContext,
    vertices: usize,
    edges: Vec<(usize, usize)>,
    mult: Vec<usize>,
    wiretap: MatrixGf,
}

/// Orientation of the tree towards its root, the lowest-index leaf.
#[derive(Clone, Debug)]
pub struct Rooted {
    pub root: usize,
    /// Edge from each vertex towards the root (`e*(i)`); `None` at the root.
    pub up_edge: Vec<Option<usize>>,
    /// Endpoint of each edge closer to the root (`i*(e)`).
    pub upper: Vec<usize>,
    /// Vertices in breadth-first order from the root.
    pub order: Vec<usize>,
}

impl TreePinModel {
    pub fn new(
        ctx: &FieldContext,
        vertices: usize,
        edges: Vec<(usize, usize)>,
        mult: Vec<usize>,
        wiretap: MatrixGf,
    ) -> Result<Self> {
        if ctx.degree() != 1 {
            return invalid("tree-PIN sources are defined over prime fields");
        }
        if vertices < 2 {
            return invalid("a tree-PIN source needs at least two vertices");
        }
        if edges.len() != vertices - 1 {
            return invalid(format!("{} edges on {vertices} vertices is not a tree", edges.len()));
        }
        if mult.len() != edges.len() {
            return dim("one multiplicity per edge expected");
        }
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices || u == v {
                return invalid(format!("bad edge ({u},{v})"));
            }
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                return invalid("edge list contains a cycle");
            }
            parent[a] = b;
        }
        let l: usize = mult.iter().sum();
        if wiretap.rows() != l {
            return dim(format!("wiretap matrix has {} rows, expected {l}", wiretap.rows()));
        }
        if wiretap.ctx() != ctx {
            return Err(Error::ContextMismatch);
        }
        if wiretap.rank() != wiretap.cols() {
            return invalid("wiretap matrix must have full column rank");
        }
        Ok(TreePinModel { ctx: ctx.clone(), vertices, edges, mult, wiretap })
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.ctx.characteristic()
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.mult
    }

    pub fn wiretap(&self) -> &MatrixGf {
        &self.wiretap
    }

    /// `sum_e n_e`, the length of `X`.
    pub fn total_symbols(&self) -> usize {
        self.mult.iter().sum()
    }

    /// `n_w`.
    pub fn wiretap_dim(&self) -> usize {
        self.wiretap.cols()
    }

    pub fn min_multiplicity(&self) -> usize {
        self.mult.iter().copied().min().unwrap_or(0)
    }

    /// First row of each edge block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.mult
            .iter()
            .map(|&n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    /// `l x n_e` matrix selecting `Y_e` from `X`.
    pub fn edge_selector(&self, e: usize) -> MatrixGf {
        let off = self.offsets()[e];
        MatrixGf::from_fn(&self.ctx, self.total_symbols(), self.mult[e], |i, j| (i == off + j) as u128)
    }

    /// Edges incident on `v` in edge-list order.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v).collect()
    }

    /// Observation matrix of vertex `v`.
    pub fn user_matrix(&self, v: usize) -> MatrixGf {
        let parts: Vec<MatrixGf> = self.incident(v).into_iter().map(|e| self.edge_selector(e)).collect();
        let refs: Vec<&MatrixGf> = parts.iter().collect();
        MatrixGf::hstack(&self.ctx, self.total_symbols(), &refs).expect("shapes")
    }

    /// The equivalent finite linear source.
    pub fn compile(&self) -> FlsModel {
        let users = (0..self.vertices).map(|v| self.user_matrix(v)).collect();
        FlsModel::new(&self.ctx, users, self.wiretap.clone()).expect("valid tree-PIN compiles")
    }

    pub fn with_wiretap(&self, wiretap: MatrixGf) -> Result<TreePinModel> {
        TreePinModel::new(&self.ctx, self.vertices, self.edges.clone(), self.mult.clone(), wiretap)
    }

    pub fn without_wiretap(&self) -> TreePinModel {
        let w = MatrixGf::zeros(&self.ctx, self.total_symbols(), 0);
        self.with_wiretap(w).expect("empty wiretapper is valid")
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices).filter(|&v| self.incident(v).len() == 1).collect()
    }

    pub fn rooted(&self) -> Rooted {
        let root = self.leaves()[0];
        let mut up_edge = vec![None; self.vertices];
        let mut upper = vec![usize::MAX; self.edges.len()];
        let mut seen = vec![false; self.vertices];
        let mut order = vec![root];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for e in self.incident(v) {
                let (a, b) = self.edges[e];
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    up_edge[w] = Some(e);
                    upper[e] = v;
                    order.push(w);
                }
            }
        }
        Rooted { root, up_edge, upper, order }
    }

    /// `dim(col W ∩ col I_e)` per edge, i.e. `rank W + n_e - rank [W | I_e]`.
    pub fn edge_overlaps(&self) -> Vec<usize> {
        let rw = self.wiretap.rank();
        (0..self.edges.len())
            .map(|e| {
                let sel = self.edge_selector(e);
                rw + self.mult[e] - self.wiretap.hcat(&sel).expect("shapes").rank()
            })
            .collect()
    }

    pub fn irreducible_check(&self) -> IrreducibleReport {
        let overlaps = self.edge_overlaps();
        let witness = overlaps.iter().position(|&d| d > 0).map(|e| {
            let g = self.wiretap.column_space_intersection(&self.edge_selector(e)).expect("shapes");
            (e, g.column(0))
        });
        IrreducibleReport { irreducible: witness.is_none(), overlaps, witness }
    }

    pub fn is_irreducible(&self) -> bool {
        self.edge_overlaps().iter().all(|&d| d == 0)
    }

    /// Removes every edge-local function of the wiretapper's observation.
    pub fn reduce(&self) -> Result<Reduction> {
        let mut cur = self.clone();
        let mut steps = Vec::new();
        let mut base_map = MatrixGf::identity(&self.ctx, self.total_symbols());
        loop {
            let overlaps = cur.edge_overlaps();
            let Some(e) = overlaps.iter().position(|&d| d > 0) else {
                break;
            };
            let (next, step, local_map) = cur.reduce_edge(e)?;
            base_map = base_map.mul(&local_map)?;
            steps.push(step);
            cur = next;
        }
        if !cur.is_irreducible() {
            return Err(Error::Internal("reduction ended on a reducible source".into()));
        }
        Ok(Reduction { model: cur, steps, base_map })
    }

    fn reduce_edge(&self, e: usize) -> Result<(TreePinModel, ReductionStep, MatrixGf)> {
        let sel = self.edge_selector(e);
        let m = mcf(&sel, &self.wiretap)?;
        let ell = m.g.cols();
        let n_e = self.mult[e];
        // G_e = Y_e M_e; complete to an invertible T = [M_e | N_e]
        let t = m.p.complete_basis()?;
        let t_inv = t.inverse()?;
        let off = self.offsets()[e];
        let rows_e: Vec<usize> = (off..off + n_e).collect();
        let u = t_inv.mul(&self.wiretap.select_rows(&rows_e))?;
        let lower: Vec<usize> = (ell..n_e).collect();
        let w_e2 = u.select_rows(&lower);
        let l = self.total_symbols();
        let before: Vec<usize> = (0..off).collect();
        let after: Vec<usize> = (off + n_e..l).collect();
        let nw = self.wiretap.cols();
        let stacked = MatrixGf::vstack(
            &self.ctx,
            nw,
            &[&self.wiretap.select_rows(&before), &w_e2, &self.wiretap.select_rows(&after)],
        )?;
        let new_w = stacked.column_basis();
        if new_w.cols() + ell != nw {
            return Err(Error::Internal(format!(
                "reduced wiretapper has dimension {}, expected {}",
                new_w.cols(),
                nw - ell
            )));
        }
        let mut mult = self.mult.clone();
        mult[e] = n_e - ell;
        let next = TreePinModel::new(&self.ctx, self.vertices, self.edges.clone(), mult, new_w)?;
        // new coordinates: Y~_e = Y_e N_e, other blocks unchanged
        let n_cols: Vec<usize> = (ell..n_e).collect();
        let n_mat = t.select_columns(&n_cols);
        let new_l = l - ell;
        let local = MatrixGf::from_fn(&self.ctx, l, new_l, |i, j| {
            if i < off {
                (i == j) as u128
            } else if i < off + n_e {
                if j >= off && j < off + n_e - ell {
                    n_mat.code(i - off, j - off)
                } else {
                    0
                }
            } else {
                (j >= off + n_e - ell && i - ell == j) as u128
            }
        });
        let step = ReductionStep { edge: e, removed: ell, g: m.g, transform: t };
        Ok((next, step, local))
    }

    /// Capacities and leakage in closed form, cross-checked on the reduced source.
    pub fn analyze(&self) -> Result<TreePinAnalysis> {
        let q = self.q();
        let overlaps = self.edge_overlaps();
        let per_edge: Vec<EntropyValue> = self
            .mult
            .iter()
            .zip(&overlaps)
            .map(|(&n, &d)| EntropyValue::new((n - d) as i64, q))
            .collect();
        let c_w = per_edge.iter().copied().reduce(EntropyValue::min).expect("at least one edge");
        let c_s = EntropyValue::new(self.min_multiplicity() as i64, q);
        let h = EntropyValue::new((self.total_symbols() - self.wiretap.rank()) as i64, q);
        let r_l = h - c_w;

        let red = self.reduce()?;
        let rm = &red.model;
        let c_w_red = EntropyValue::new(rm.min_multiplicity() as i64, q);
        let r_l_red = EntropyValue::new((rm.total_symbols() - rm.wiretap_dim()) as i64, q) - c_w_red;
        if c_w_red != c_w || r_l_red != r_l {
            return Err(Error::Internal("closed forms disagree before and after reduction".into()));
        }

        let (r_co, rco_method) = if self.vertices <= MAX_USERS {
            (rco_lp(&self.without_wiretap().compile(), None)?.r_co, RcoMethod::LinearProgram)
        } else {
            (EntropyValue::new((self.total_symbols() - self.min_multiplicity()) as i64, q), RcoMethod::ClosedForm)
        };
        let wiretap_dim_bound_holds =
            rm.wiretap_dim() + rm.min_multiplicity() <= rm.total_symbols() || rm.total_symbols() == 0;
        Ok(TreePinAnalysis {
            c_w,
            c_s,
            r_l,
            r_co,
            rco_method,
            h_zv_given_zw: h,
            per_edge,
            overlaps,
            irreducible: red.steps.is_empty(),
            reduced_multiplicities: rm.mult.clone(),
            reduced_wiretap_dim: rm.wiretap_dim(),
            wiretap_dim_bound_holds,
        })
    }

    /// `C_W(R) = min(R / (|E| - 1), C_W)` for public discussion rate `R`
    /// (units of `log q`). With a single edge no discussion is needed and the
    /// value is `C_W` for every `R`.
    pub fn constrained_capacity(&self, rate: Ratio<i64>) -> Result<EntropyValue> {
        if rate < Ratio::from_integer(0) {
            return invalid("discussion rate must be non-negative");
        }
        let a = self.analyze()?;
        Ok(constrained_capacity_from(a.c_w, self.num_edges(), rate))
    }
}

pub(crate) fn constrained_capacity_from(c_w: EntropyValue, edges: usize, rate: Ratio<i64>) -> EntropyValue {
    if edges <= 1 {
        return c_w;
    }
    let bound = EntropyValue::from_ratio(rate / Ratio::from_integer(edges as i64 - 1), c_w.log_base());
    bound.min(c_w)
}

#[derive(Clone, Debug)]
pub struct IrreducibleReport {
    pub irreducible: bool,
    /// `dim(col W ∩ col I_e)` per edge.
    pub overlaps: Vec<usize>,
    /// First offending edge with a nonzero vector of `col W ∩ col I_e`.
    pub witness: Option<(usize, MatrixGf)>,
}

#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub edge: usize,
    /// Number of symbols removed from the edge and the wiretapper.
    pub removed: usize,
    /// Basis of the removed common function, in the coordinates before the step.
    pub g: MatrixGf,
    /// `[M_e | N_e]`.
    pub transform: MatrixGf,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub model: TreePinModel,
    pub steps: Vec<ReductionStep>,
    /// New base vector in terms of the original one: `X~ = X * base_map`.
    pub base_map: MatrixGf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RcoMethod {
    LinearProgram,
    ClosedForm,
}

#[derive(Clone, Debug)]
pub struct TreePinAnalysis {
    pub c_w: EntropyValue,
    pub c_s: EntropyValue,
    pub r_l: EntropyValue,
    pub r_co: EntropyValue,
    pub rco_method: RcoMethod,
    pub h_zv_given_zw: EntropyValue,
    /// `H(Y_e | mcf(Y_e, Z_w))`.
    pub per_edge: Vec<EntropyValue>,
    pub overlaps: Vec<usize>,
    pub irreducible: bool,
    pub reduced_multiplicities: Vec<usize>,
    pub reduced_wiretap_dim: usize,
    /// `n_w <= sum n_e - min n_e` on the reduced source.
    pub wiretap_dim_bound_holds: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldContext {
        FieldContext::prime(2).unwrap()
    }

    pub(crate) fn motivating() -> TreePinModel {
        let f = f2();
        let w = MatrixGf::from_rows(&f, &[vec![1], vec![1], vec![1]]).unwrap();
        TreePinModel::new(&f, 4, vec![(0, 1), (1, 2), (2, 3)], vec![1, 1, 1], w).unwrap()
    }

    #[test]
    fn motivating_values() {
        let a = motivating().analyze().unwrap();
        assert_eq!(a.c_w, EntropyValue::new(1, 2));
        assert_eq!(a.c_s, EntropyValue::new(1, 2));
        assert_eq!(a.r_l, EntropyValue::new(1, 2));
        assert_eq!(a.r_co, EntropyValue::new(2, 2));
        assert!(a.irreducible);
    }

    #[test]
    fn reduction_example() {
        // Y_a = (Y_a1, Y_a2), Y_b, Y_c, Z_w = (Y_a1 + Y_b + Y_c, Y_a2)
        let f = f2();
        let w = MatrixGf::from_rows(&f, &[vec![1, 0], vec![0, 1], vec![1, 0], vec![1, 0]]).unwrap();
        let m = TreePinModel::new(&f, 4, vec![(0, 1), (1, 2), (2, 3)], vec![2, 1, 1], w).unwrap();
        let rep = m.irreducible_check();
        assert!(!rep.irreducible);
        assert_eq!(rep.overlaps, vec![1, 0, 0]);
        let r = m.reduce().unwrap();
        assert_eq!(r.model.multiplicities(), &[1, 1, 1]);
        assert_eq!(r.model.wiretap_dim(), 1);
        assert_eq!(r.model.wiretap().to_code_rows(), vec![vec![1], vec![1], vec![1]]);
        let a = m.analyze().unwrap();
        assert_eq!(a.c_w, EntropyValue::new(1, 2));
        assert_eq!(a.r_l, EntropyValue::new(1, 2));
    }

    #[test]
    fn rejects_non_tree_and_rank_deficient() {
        let f = f2();
        let w = MatrixGf::zeros(&f, 3, 0);
        assert!(TreePinModel::new(&f, 3, vec![(0, 1), (1, 0), (1, 2)], vec![1, 1, 1], w.clone()).is_err());
        let w2 = MatrixGf::from_rows(&f, &[vec![1, 1], vec![0, 0]]).unwrap();
        assert!(TreePinModel::new(&f, 3, vec![(0, 1), (1, 2)], vec![1, 1], w2).is_err());
    }

    #[test]
    fn constrained_capacity_curve() {
        let m = motivating();
        assert_eq!(m.constrained_capacity(Ratio::new(1, 1)).unwrap().units(), Ratio::new(1, 2));
        assert_eq!(m.constrained_capacity(Ratio::new(5, 1)).unwrap().units(), Ratio::new(1, 1));
        let f = f2();
        let single = TreePinModel::new(&f, 2, vec![(0, 1)], vec![2], MatrixGf::zeros(&f, 2, 0)).unwrap();
        assert_eq!(single.constrained_capacity(Ratio::new(0, 1)).unwrap(), EntropyValue::new(2, 2));
    }
}
