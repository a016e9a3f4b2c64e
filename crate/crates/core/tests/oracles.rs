use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use omnisec::classical::{self, Direction, JointPmf};
use omnisec::fls::{brute_force_entropy, EnumerationOracle};
use omnisec::scheme::{simulate, two_user_scheme, verify_scheme};
use omnisec::suite;

#[test]
fn rank_entropy_matches_enumeration_over_f3() {
    for seed in 0..40 {
        let m = suite::random_fls(seed, 3, 7, 3);
        let oracle = EnumerationOracle::new(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let (t, g) = suite::random_query(&mut rng, &m);
            let exact = m.entropy(&t, &g).unwrap().bits();
            assert!((exact - oracle.entropy_bits(&t, &g)).abs() < 1e-9, "seed {seed}");
            assert!((exact - brute_force_entropy(&m, &t, &g).unwrap()).abs() < 1e-9);
        }
    }
}

/// `I(X~ ∧ Z) - I(X~ ∧ Y)` for input `Ber(q)` computed from the channel
/// tables of the DSBE pmf.
fn gap_from_pmf(pmf: &JointPmf, q: f64) -> f64 {
    let (_, xy) = pmf.marginal(&[0, 1]);
    let (_, xz) = pmf.marginal(&[0, 2]);
    let mi = |joint: &[f64], nw: usize| -> f64 {
        let input = [1.0 - q, q];
        let mut out = vec![0.0; nw];
        let mut j = vec![0.0; 2 * nw];
        for x in 0..2 {
            let px: f64 = joint[x * nw..(x + 1) * nw].iter().sum();
            for w in 0..nw {
                j[x * nw + w] = input[x] * joint[x * nw + w] / px;
                out[w] += j[x * nw + w];
            }
        }
        let h = |v: &[f64]| -> f64 { v.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum() };
        h(&input) + h(&out) - h(&j)
    };
    mi(&xz, 5) - mi(&xy, 2)
}

#[test]
fn f_curve_is_mutual_information_gap() {
    for &(p, eps) in &[(0.1, 0.4), (0.2, 0.1), (0.05, 0.7)] {
        let pmf = classical::dsbe(p, eps).unwrap();
        for k in 0..=20 {
            let q = k as f64 / 20.0;
            let d = classical::f_curve(p, eps, q) - gap_from_pmf(&pmf, q);
            assert!(d.abs() < 1e-12, "p={p} eps={eps} q={q}: {d}");
        }
    }
}

#[test]
fn dsbe_leakage_is_equivocation_when_certified() {
    let pmf = classical::dsbe(0.1, 0.4).unwrap();
    let lk = classical::oneway_leakage_search(&pmf, Direction::TwoToOne, 51, 3).unwrap();
    assert!(lk.certified);
    // the search value is an upper bound and meets the converse
    assert!(lk.search_value >= lk.converse - 1e-9);
    assert!((lk.search_value - lk.converse).abs() < 1e-6);
}

/// `H(pattern | Z_w^n, event)` at `n = 2` by listing every wiretapper pair.
fn block_swap_lhs_n2(tern: &JointPmf) -> f64 {
    let m = tern.num_users();
    let nz = tern.wiretap_labels().len();
    let dims = {
        let mut d = vec![3; m];
        d.push(nz);
        d
    };
    let patterns = 1usize << m;
    let mut pz = vec![vec![0.0; nz]; patterns];
    for (idx, &p) in tern.probs().iter().enumerate() {
        let mut rest = idx;
        let mut sym = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            sym[k] = rest % dims[k];
            rest /= dims[k];
        }
        if sym[..m].contains(&2) {
            continue;
        }
        let j = (0..m).fold(0, |acc, i| acc | (sym[i] << i));
        pz[j][sym[m]] += p;
    }
    let all = patterns - 1;
    let mut joint = vec![vec![0.0; patterns]; nz * nz];
    for k in 0..patterns {
        for a in 0..nz {
            for b in 0..nz {
                joint[a * nz + b][k] = pz[k][a] * pz[all ^ k][b];
            }
        }
    }
    let total: f64 = joint.iter().flatten().sum();
    let mut h = 0.0;
    for row in &joint {
        let s: f64 = row.iter().sum();
        for &v in row {
            if v > 0.0 {
                h -= v / total * (v / s).log2();
            }
        }
    }
    h
}

#[test]
fn block_swap_matches_enumeration_at_n2() {
    for (flip, joint) in [(0.2, [0.45, 0.05, 0.05, 0.45]), (0.35, [0.3, 0.2, 0.1, 0.4])] {
        let mut probs = Vec::new();
        for (k, &pxy) in joint.iter().enumerate() {
            for z in 0..2 {
                probs.push(pxy * if z == k / 2 { 1.0 - flip } else { flip });
            }
        }
        let pmf = JointPmf::from_sizes(&[2, 2], 2, probs).unwrap();
        let sets = vec![[vec![0], vec![1]], [vec![0], vec![1]]];
        let tern = classical::ternary_transform(&pmf, &sets).unwrap();
        let b = classical::block_swap_bound(&tern, 2).unwrap();
        assert!((b.lhs - block_swap_lhs_n2(&tern)).abs() < 1e-12, "{} vs oracle", b.lhs);
    }
}

#[test]
fn block_swap_rejects_odd_length() {
    let pmf = JointPmf::from_sizes(&[2, 2], 1, vec![0.45, 0.05, 0.05, 0.45]).unwrap();
    let sets = vec![[vec![0], vec![1]], [vec![0], vec![1]]];
    let tern = classical::ternary_transform(&pmf, &sets).unwrap();
    assert!(classical::block_swap_bound(&tern, 3).is_err());
}

#[test]
fn two_user_schemes_reach_the_leakage_rate() {
    let mut reached = 0;
    for seed in 0..30 {
        let m = suite::random_two_user(seed, 2, 5);
        match two_user_scheme(&m, 4, seed) {
            Ok(s) => {
                let v = verify_scheme(&m, &s.scheme).unwrap();
                assert!(v.omniscient());
                assert_eq!(v.leakage, s.analysis.r_l, "seed {seed}");
                assert_eq!(s.achieved, s.target);
                reached += 1;
            }
            Err(omnisec::Error::SearchExhausted(f)) => {
                // a failure must still report a verified candidate
                let best = f.best.expect("candidate");
                assert!(verify_scheme(&m, &best).unwrap().omniscient());
            }
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(reached >= 25, "only {reached} of 30 reached R_L");
}

#[test]
fn simulated_recovery_is_exact() {
    let m = suite::random_irreducible_tree_pin(11, &Default::default());
    let b = omnisec::scheme::build_general_scheme(&m, &Default::default()).unwrap();
    let mut s = b.scheme;
    let f = m.compile();
    omnisec::scheme::attach_recovery(&f, &mut s).unwrap();
    let r = simulate(&f, &s, 2000, 5).unwrap();
    assert_eq!(r.recovery_failures, 0);
    assert!(r.exact_leakage_bits >= 0.0);
}
