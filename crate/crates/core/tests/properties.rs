//! Property tests for the structural invariants.

mod common;

use csg_core::analysis::{mirror_strategy, optimality_gap, round_distribution};
use csg_core::families::{
    exact_duel_values, purgatory, purgatory_duel, restricted_three_state_duel, safety_duel, three_state_duel,
};
use csg_core::game_model::{Distribution, GameStructure, StationaryStrategy, StrategyProfile, Strategy as GameStrategy};
use csg_core::matrix_game::{build_tri_matrix, closed_form_tri, solve_matrix_game, MatrixGame};
use csg_core::mdp_solver::{fix_strategies, optimal_value, policy_value};
use csg_core::scalar::{int, q, Natural, One, Pow, Rational, Zero};
use csg_core::value_iteration::{greedy_strategy_from_values, value_iterate, IterationConfig};
use proptest::prelude::*;

use common::{brute_force_mdp, chain_reach, random_distribution, random_mdp, Rng};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn dist_strategy(max_len: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(1i64..=12, 1..=max_len).prop_map(|w| {
        let total: i64 = w.iter().sum();
        Distribution::new(w.iter().enumerate().map(|(i, &x)| (i, Rational::from_signeds(x, total)))).unwrap()
    })
}

/// Distributions over the fixed universe `0..4`, zeros allowed.
fn dist4() -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0i64..=6, 4).prop_filter("nonzero", |w| w.iter().any(|&x| x > 0)).prop_map(|w| {
        let total: i64 = w.iter().sum();
        Distribution::new(w.iter().enumerate().map(|(i, &x)| (i, Rational::from_signeds(x, total)))).unwrap()
    })
}

/// `(y, z)` with `0 < z < y <= 1`.
fn z_below_y() -> impl Strategy<Value = (Rational, Rational)> {
    (1i64..=20, 1i64..=20, 1i64..=20).prop_map(|(a, b, c)| {
        let y = Rational::from_signeds(a + b, a + b + c);
        let z = &y * Rational::from_signeds(a, a + b);
        (y, z)
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn roundedness_dominates_patience(d in dist_strategy(5)) {
        prop_assert!(Rational::from(d.roundedness()) >= d.patience());
    }

    #[test]
    fn variation_distance_is_a_metric(a in dist4(), b in dist4(), c in dist4()) {
        prop_assert_eq!(a.variation_distance(&b), b.variation_distance(&a));
        prop_assert_eq!(a.variation_distance(&b) == 0u32, a == b);
        prop_assert!(a.variation_distance(&c) <= a.variation_distance(&b) + b.variation_distance(&c));
    }

    #[test]
    fn rounding_error_and_denominators(d in dist_strategy(5), extra in 0u64..40) {
        let qn = Natural::from(d.len() as u64 + extra);
        let r = round_distribution(&d, &qn).unwrap();
        let qr = Rational::from(qn.clone());
        prop_assert!(r.support().all(|z| d.prob(z) > 0u32));
        if qr >= d.patience() {
            prop_assert!(r.support().eq(d.support()));
        }
        for z in d.support().chain(r.support()) {
            let err = d.prob(z) - r.prob(z);
            prop_assert!(err.clone() < Rational::ONE / &qr && -err < Rational::ONE / &qr);
            let scaled = &qr * r.prob(z);
            prop_assert_eq!(scaled.denominator_ref(), &Natural::ONE);
        }
        prop_assert!(d.variation_distance(&r) <= Rational::from(d.len() as u64) / qr);
    }

    #[test]
    fn tri_band_above_z_and_totally_mixed((y, z) in z_below_y(), m in 1usize..=4) {
        let sol = solve_matrix_game(&build_tri_matrix(&int(0), &y, &z, m).unwrap());
        prop_assert!(sol.value > z);
        prop_assert_eq!(sol.row_strategy.len(), m);
        prop_assert_eq!(sol.col_strategy.len(), m);
    }

    #[test]
    fn tri_band_reflection((y, z) in z_below_y(), m in 1usize..=4) {
        // 1 > z' > y' with z' = 1 - z, y' = 1 - y.
        prop_assume!(y < Rational::ONE);
        let (yw, zw) = (Rational::ONE - &y, Rational::ONE - &z);
        let high = solve_matrix_game(&build_tri_matrix(&int(1), &yw, &zw, m).unwrap());
        let low = solve_matrix_game(&build_tri_matrix(&int(0), &y, &z, m).unwrap());
        prop_assert_eq!(&high.value, &(Rational::ONE - &low.value));
        prop_assert!(high.value < zw);
        for j in 1..=m {
            prop_assert_eq!(high.row_strategy.prob(j - 1), low.col_strategy.prob(m - j));
            prop_assert_eq!(high.col_strategy.prob(j - 1), low.row_strategy.prob(m - j));
        }
    }

    #[test]
    fn closed_form_monotone_in_eps(a in 1i64..=30, b in 1i64..=30, m in 2usize..=5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(lo != hi);
        let e1 = Rational::from_signeds(lo, 62);
        let e2 = Rational::from_signeds(hi, 62);
        let s1 = closed_form_tri(&e1, m).unwrap();
        let s2 = closed_form_tri(&e2, m).unwrap();
        prop_assert!(s1.patience() >= s2.patience());
        prop_assert!(s1.value <= s2.value);
        let two_e = Rational::from(2u32) * &e2;
        prop_assert!(s2.value < q(1, 2) + &e2 * two_e.pow(m as u64 - 1));
    }

    #[test]
    fn matrix_shift_and_duality(seed in any::<u64>(), r in 1usize..=4, c in 1usize..=4, shift in -5i64..=5) {
        let mut rng = Rng::new(seed);
        let m = common::random_matrix(&mut rng, r, c);
        let v = solve_matrix_game(&m).value;
        let sh = Rational::from(shift);
        let shifted = MatrixGame::new(r, c, (0..r).flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) + &sh).collect()).unwrap();
        prop_assert_eq!(solve_matrix_game(&shifted).value, &v + &sh);
        let t = m.transpose();
        let neg = MatrixGame::new(c, r, (0..c).flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| -t.get(i, j)).collect()).unwrap();
        prop_assert_eq!(solve_matrix_game(&neg).value, -v);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn policy_iteration_matches_enumeration(seed in any::<u64>()) {
        let mdp = random_mdp(&mut Rng::new(seed), 6, 3);
        let (v, pol) = optimal_value(&mdp);
        prop_assert_eq!(&v.0, &brute_force_mdp(&mdp));
        prop_assert_eq!(policy_value(&mdp, &pol).0, v.0);
    }

    #[test]
    fn positional_reply_beats_mixed_replies(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let t = exact_duel_values(2, 2, 1 << 20).unwrap();
        let g = &t.game;
        let sigma1 = random_stationary(&mut rng, g, 0);
        let mdp = fix_strategies(g, &[Some(GameStrategy::Stationary(sigma1.clone())), None]).unwrap().into_mdp().unwrap();
        let (best, _) = optimal_value(&mdp);
        // Player 2 maximizes safety; no mixed reply does better.
        for _ in 0..4 {
            let sigma2 = random_stationary(&mut rng, g, 1);
            let mc = fix_strategies(g, &[Some(GameStrategy::Stationary(sigma1.clone())), Some(GameStrategy::Stationary(sigma2))])
                .unwrap().into_chain().unwrap();
            let top = [t.shape().top].into();
            let reach = chain_reach(&mc.transitions.iter().collect::<Vec<_>>(), &top);
            for s in 0..g.num_states() {
                prop_assert!(Rational::ONE - &reach[s] <= best[s]);
            }
        }
    }

    #[test]
    fn mirror_is_an_involution(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3, p in 0usize..2) {
        let g = purgatory_duel(n, m).unwrap();
        let sigma = random_stationary(&mut Rng::new(seed), &g, p);
        let back = mirror_strategy(&g, &mirror_strategy(&g, &sigma).unwrap()).unwrap();
        for s in 0..g.num_states() {
            prop_assert_eq!(back.at(&g, s), sigma.at(&g, s));
        }
    }

    #[test]
    fn profile_json_round_trip(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let g = purgatory_duel(2, 3).unwrap();
        let prof = StrategyProfile::from_strategies(&g, vec![
            GameStrategy::Stationary(random_stationary(&mut rng, &g, 0)),
            GameStrategy::Stationary(random_stationary(&mut rng, &g, 1)),
        ]).unwrap();
        let back = StrategyProfile::from_json(&prof.to_json(&g), &g).unwrap();
        for (a, b) in prof.strategies().iter().zip(back.strategies()) {
            prop_assert_eq!(a.distributions().collect::<Vec<_>>(), b.distributions().collect::<Vec<_>>());
        }
    }
}

fn random_stationary(rng: &mut Rng, g: &GameStructure, player: usize) -> StationaryStrategy {
    let mut out = StationaryStrategy::new(player);
    for s in 0..g.num_states() {
        let acts = g.actions(s, player);
        if acts.len() > 1 {
            let k = rng.range(1, acts.len() as i64) as usize;
            let mut pick: Vec<usize> = acts.to_vec();
            for i in (1..pick.len()).rev() {
                pick.swap(i, rng.below(i as u64 + 1) as usize);
            }
            pick.truncate(k);
            pick.sort();
            out.set(s, random_distribution(rng, &pick, 6));
        }
    }
    out
}

fn families() -> Vec<(GameStructure, Rational)> {
    vec![
        (purgatory(1, 2).unwrap(), int(1)),
        (purgatory(3, 3).unwrap(), int(1)),
        (purgatory_duel(2, 2).unwrap(), q(1, 2)),
        (three_state_duel(2).unwrap(), q(1, 2)),
        (restricted_three_state_duel(3).unwrap(), q(1, 2)),
        (safety_duel(1, &q(1, 216)).unwrap(), q(1, 216)),
        (safety_duel(2, &q(1, 1000)).unwrap(), q(1, 1000)),
    ]
}

#[test]
fn family_delta_min_and_json() {
    for (g, want) in families() {
        assert_eq!(g.delta_min(), want);
        let back = GameStructure::from_json(&g.to_json()).unwrap();
        assert_eq!(back.to_json(), g.to_json());
    }
    assert_eq!(safety_duel(2, &q(1, 1000)).unwrap().num_states(), 11);
}

#[test]
fn duel_tables_mirror_and_bracket() {
    for n in 1..=3 {
        for m in 2..=3usize {
            let t = exact_duel_values(n, m, 1 << 24).unwrap();
            let s = t.shape();
            let g = &t.game;
            let floor = Rational::ONE / Rational::from(m as u64).pow(n as u64 + 2);
            for i in 0..2 {
                for j in 0..n {
                    let a = t.sigma1.at(g, s.side[i][j]).map(|x| m + 1 - x);
                    assert_eq!(a, t.sigma2.at(g, s.side[1 - i][j]).into_owned(), "({n},{m}) side {i} j {j}");
                    let v = &t.values[s.side[i][j]];
                    assert!(*v >= floor && *v <= Rational::ONE - &floor);
                }
            }
            assert!(t.values[s.vs] >= floor);
        }
    }
}

#[test]
fn value_iteration_below_exact_values() {
    for (n, m) in [(1, 2), (2, 2), (1, 3)] {
        let t = exact_duel_values(n, m, 1 << 20).unwrap();
        let tr = value_iterate(&t.game, &IterationConfig::new(10)).unwrap();
        assert!(tr.is_monotone());
        for v in &tr.trace {
            assert!(v.0.iter().zip(&t.values.0).all(|(a, b)| a <= b));
        }
    }
}

#[test]
fn greedy_strategies_gaps() {
    for (n, m) in [(1, 2), (2, 2)] {
        let t = exact_duel_values(n, m, 1 << 20).unwrap();
        let g = &t.game;
        let safe = greedy_strategy_from_values(g, &t.values, 1).unwrap();
        assert_eq!(optimality_gap(g, 1, &safe, &t.values).unwrap().max_gap(), Rational::ZERO);
        let tr = value_iterate(g, &IterationConfig::new(6)).unwrap();
        for v in &tr.trace[1..] {
            let reach = greedy_strategy_from_values(g, v, 0).unwrap();
            let r = optimality_gap(g, 0, &reach, &t.values).unwrap();
            for s in 0..g.num_states() {
                assert!(*r.gap(0, s).unwrap() <= &t.values[s] - &v[s]);
            }
        }
    }
}
