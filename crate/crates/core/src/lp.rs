//! Minimum rate of communication for omniscience as an exact linear program.
//!
//! Primal: minimize `sum r_i` subject to `sum_{i in B} r_i >= H(Z_B | Z_{B^c}, J)`
//! for every proper nonempty user subset `B`. It is solved through its dual,
//! `max sum_B lambda_B H(Z_B | Z_{B^c}, J)` over fractional partitions
//! `lambda`, by a dense rational simplex with Bland's rule.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::entropy::EntropyValue;
use crate::error::{invalid, Error, Result};
use crate::fls::FlsModel;
use crate::matrix::MatrixGf;

/// Most users accepted by [`rco_lp`]; there are `2^m - 2` constraints.
pub const MAX_USERS: usize = 10;

/// Optimal solution of `max c x` s.t. `A x <= b`, `x >= 0` with `b >= 0`.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<BigRational>,
    /// Optimal multipliers of the `<=` rows.
    pub y: Vec<BigRational>,
    pub value: BigRational,
}

/// Dense tableau simplex. Returns `None` if the problem is unbounded.
pub fn simplex_max(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Option<LpSolution> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for i in 0..m {
        assert!(!b[i].is_negative(), "simplex_max needs b >= 0");
        let mut row = vec![BigRational::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = BigRational::one();
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    // reduced costs; objective value in the last slot is -z
    let mut obj = vec![BigRational::zero(); width];
    obj[..n].clone_from_slice(c);
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_positive()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(bv) => ratio < *bv || (ratio == *bv && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let r = leave?;
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v = &*v / &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        let f = obj[enter].clone();
        for (v, p) in obj.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
        basis[r] = enter;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    let y = (0..m).map(|i| -obj[n + i].clone()).collect();
    let value = -obj[width - 1].clone();
    Some(LpSolution { x, y, value })
}

/// Solution of the omniscience LP with a certificate of optimality.
#[derive(Clone, Debug)]
pub struct RcoSolution {
    /// Optimal rate tuple `r_i`.
    pub rates: Vec<EntropyValue>,
    pub r_co: EntropyValue,
    /// Fractional partition as `(user bitmask, weight)` with nonzero weights.
    pub partition: Vec<(u64, Ratio<i64>)>,
    /// `sum_B lambda_B H(Z_B | Z_{B^c}, J)`; equals `r_co`.
    pub dual_value: EntropyValue,
    /// Right-hand sides `H(Z_B | Z_{B^c}, J)` indexed by bitmask - 1.
    pub constraint_values: Vec<i64>,
}

fn small(r: &BigRational) -> Result<Ratio<i64>> {
    let n = r.numer().to_i64();
    let d = r.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
        _ => Err(Error::Internal("LP value does not fit in i64".into())),
    }
}

/// `R_CO(Z_V | J)`, with `J = X * conditioning` when given.
pub fn rco_lp(model: &FlsModel, conditioning: Option<&MatrixGf>) -> Result<RcoSolution> {
    let m = model.num_users();
    if m > MAX_USERS {
        return Err(Error::Resource(format!("{m} users exceed the LP limit of {MAX_USERS}")));
    }
    if m < 2 {
        return invalid("need at least two users");
    }
    let q = model.q();
    let full: u64 = (1u64 << m) - 1;
    let masks: Vec<u64> = (1..full).collect();
    let mut h = Vec::with_capacity(masks.len());
    for &mask in &masks {
        h.push(model.set_entropy_units(mask, conditioning)? as i64);
    }
    let one = BigRational::one();
    let a: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            masks
                .iter()
                .map(|&b| if b >> i & 1 == 1 { one.clone() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let bvec = vec![one.clone(); m];
    let c: Vec<BigRational> = h.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
    let sol = simplex_max(&a, &bvec, &c).ok_or_else(|| Error::Internal("dual LP unbounded".into()))?;

    // pad slack coverage with singletons so the weights form an exact partition
    let mut lambda = sol.x.clone();
    for i in 0..m {
        let cover: BigRational = masks
            .iter()
            .zip(&lambda)
            .filter(|(b, _)| *b >> i & 1 == 1)
            .map(|(_, w)| w.clone())
            .fold(BigRational::zero(), |acc, w| acc + w);
        let slack = &one - cover;
        if slack.is_positive() {
            lambda[(1usize << i) - 1] += slack;
        }
    }
    let dual_value = masks
        .iter()
        .zip(&lambda)
        .fold(BigRational::zero(), |acc, (&b, w)| acc + w * &c[(b - 1) as usize]);
    let primal_value = sol.y.iter().fold(BigRational::zero(), |acc, v| acc + v);

    // certificate: primal feasibility, exact partition, equal objectives
    for (k, &b) in masks.iter().enumerate() {
        let lhs = (0..m)
            .filter(|i| b >> i & 1 == 1)
            .fold(BigRational::zero(), |acc, i| acc + &sol.y[i]);
        if lhs < c[k] {
            return Err(Error::Internal(format!("LP rate tuple violates constraint for set {b:#b}")));
        }
    }
    if primal_value != dual_value || primal_value != sol.value {
        return Err(Error::Internal("LP duality gap is nonzero".into()));
    }

    let rates = sol.y.iter().map(|v| small(v).map(|r| EntropyValue::from_ratio(r, q))).collect::<Result<Vec<_>>>()?;
    let mut partition = Vec::new();
    for (&b, w) in masks.iter().zip(&lambda) {
        if !w.is_zero() {
            partition.push((b, small(w)?));
        }
    }
    Ok(RcoSolution {
        rates,
        r_co: EntropyValue::from_ratio(small(&primal_value)?, q),
        partition,
        dual_value: EntropyValue::from_ratio(small(&dual_value)?, q),
        constraint_values: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let a = vec![vec![r(1), r(1)], vec![r(1), r(3)], vec![r(1), r(0)]];
        let s = simplex_max(&a, &[r(4), r(6), r(3)], &[r(3), r(2)]).unwrap();
        assert_eq!(s.value, r(11));
        assert_eq!(s.x, vec![r(3), r(1)]);
    }

    #[test]
    fn unbounded_detected() {
        let a = vec![vec![r(1), r(-1)]];
        assert!(simplex_max(&a, &[r(1)], &[r(0), r(1)]).is_none());
    }

    #[test]
    fn three_user_pin_triangle_free_path() {
        // path 0-1-2 with one bit per edge, X = (Y_a, Y_b)
        let f = FieldContext::prime(2).unwrap();
        let u0 = MatrixGf::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        let u1 = MatrixGf::from_rows(&f, &[vec![1, 0], vec![0, 1]]).unwrap();
        let u2 = MatrixGf::from_rows(&f, &[vec![0], vec![1]]).unwrap();
        let w = MatrixGf::zeros(&f, 2, 0);
        let m = FlsModel::new(&f, vec![u0, u1, u2], w).unwrap();
        let s = rco_lp(&m, None).unwrap();
        assert_eq!(s.r_co, EntropyValue::new(1, 2));
        assert_eq!(s.dual_value, s.r_co);
    }
}
