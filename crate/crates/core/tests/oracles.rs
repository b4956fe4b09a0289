//! Solver output against independent brute-force oracles and golden values.

mod common;

use csg_core::analysis::{bounds, strategy_patience, BoundName, BoundParams};
use csg_core::families::{exact_duel_values, purgatory};
use csg_core::game_model::Strategy;
use csg_core::matrix_game::{solve_matrix_game, MatrixGame};
use csg_core::mdp_solver::optimal_value;
use csg_core::scalar::{int, q, Natural, Rational, Zero};
use csg_core::value_iteration::{value_iterate, IterationConfig};

use common::{brute_force_mdp, random_matrix, random_mdp, support_enumeration_value, Rng};

#[test]
fn matrices_match_support_enumeration() {
    let mut rng = Rng::new(0x5eed);
    for _ in 0..300 {
        let (r, c) = (rng.range(1, 4) as usize, rng.range(1, 4) as usize);
        let m = random_matrix(&mut rng, r, c);
        let sol = solve_matrix_game(&m);
        assert_eq!(sol.value, support_enumeration_value(&m));
        assert!(sol.certifies(&m));
    }
}

#[test]
fn mdps_match_policy_enumeration() {
    let mut rng = Rng::new(0xfeed);
    for _ in 0..150 {
        let mdp = random_mdp(&mut rng, 6, 3);
        assert_eq!(optimal_value(&mdp).0 .0, brute_force_mdp(&mdp));
    }
}

/// `v^{t+1}(v1)` is the value of the one-state matrix with `v^t` below the
/// diagonal, 1 on it and 0 above.
#[test]
fn purgatory_one_state_recurrence() {
    for m in 2..=3usize {
        let g = purgatory(1, m).unwrap();
        let v1 = g.state_by_name("v1").unwrap();
        let tr = value_iterate(&g, &IterationConfig::new(8)).unwrap();
        let mut cur = Rational::ZERO;
        for t in 1..=8 {
            let e = (0..m * m)
                .map(|k| match (k / m).cmp(&(k % m)) {
                    std::cmp::Ordering::Greater => cur.clone(),
                    std::cmp::Ordering::Equal => int(1),
                    std::cmp::Ordering::Less => int(0),
                })
                .collect();
            cur = support_enumeration_value(&MatrixGame::new(m, m, e).unwrap());
            assert_eq!(tr.trace[t][v1], cur, "m={m} t={t}");
        }
    }
    let tr = value_iterate(&purgatory(1, 2).unwrap(), &IterationConfig::new(5)).unwrap();
    assert_eq!(tr.trace[5][0], q(5, 6));
}

#[test]
fn duel_patience_golden_values() {
    let pat = |n, m| {
        let t = exact_duel_values(n, m, 1 << 20).unwrap();
        strategy_patience(&Strategy::Stationary(t.sigma2))
    };
    assert_eq!(pat(1, 2), (int(3), Natural::from(3u32)));
    assert_eq!(pat(2, 2), (int(5), Natural::from(5u32)));
}

#[test]
fn rounding_bound_golden_value() {
    let p = BoundParams {
        n: Some(7),
        k: Some(2),
        m: Some(2),
        eps: Some(q(1, 8)),
        delta_min: Some(q(1, 2)),
        ..Default::default()
    };
    let r = bounds(BoundName::Q, &p).unwrap();
    assert_eq!(r.as_natural(), Some(Natural::from(953_948u32)));
    let (lo, hi) = r.interval.unwrap();
    assert!(lo < hi && hi < int(953_948) && lo > int(953_947));
}
