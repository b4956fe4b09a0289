//! Generators for the Purgatory, Purgatory Duel, 3-state duel and safety
//! duel families, exact Purgatory Duel values, and the 3-state projection.
//!
//! In the Purgatory Duel, at `v^i_j` a higher player-1 action sends play to
//! `v^i_0` (⊥ for i = 1, ⊤ for i = 2), a lower one restarts at `v_s`, and a
//! match advances to `v^i_{j+1}`. With this orientation `A^{v^1_j}` is
//! `M^{0, v^1_{j+1}, 1/2, m}` and `A^{v^2_j}` is `M^{1, v^2_{j+1}, 1/2, m}`.

use std::collections::BTreeSet;

use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::game_model::{ActionId, Distribution, GameBuilder, GameStructure, Objective, StateId, StationaryStrategy};
use crate::matrix_game::{build_tri_matrix, solve_matrix_game};
use crate::scalar::{self, int, One, Rational, Zero};
use crate::value_iteration::{fixpoint_residual, local_matrix, ValueVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Purgatory { n: usize, m: usize },
    PurgatoryDuel { n: usize, m: usize },
    ThreeStateDuel { m: usize },
    RestrictedThreeStateDuel { m: usize },
    SafetyDuel { c: usize, delta_min: Rational },
}

impl FamilySpec {
    pub fn generate(&self) -> Result<GameStructure> {
        match self {
            FamilySpec::Purgatory { n, m } => purgatory(*n, *m),
            FamilySpec::PurgatoryDuel { n, m } => purgatory_duel(*n, *m),
            FamilySpec::ThreeStateDuel { m } => three_state_duel(*m),
            FamilySpec::RestrictedThreeStateDuel { m } => restricted_three_state_duel(*m),
            FamilySpec::SafetyDuel { c, delta_min } => safety_duel(*c, delta_min),
        }
    }
}

fn check_nm(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(domain("n and m must be at least 1"));
    }
    Ok(())
}

fn all_actions(m: usize) -> Vec<ActionId> {
    (1..=m).collect()
}

/// Player 1 reaches `top`; player 2 keeps play everywhere else.
fn zero_sum_objectives(b: &mut GameBuilder, n_states: usize, top: StateId) {
    b.set_objective(0, Objective::reach([top]));
    b.set_objective(1, Objective::safety((0..n_states).filter(|&s| s != top)));
}

/// States `v1..vn, top, bot`.
pub fn purgatory(n: usize, m: usize) -> Result<GameStructure> {
    check_nm(n, m)?;
    let mut b = GameBuilder::new(2);
    let v: Vec<StateId> = (1..=n).map(|j| b.add_state(&format!("v{j}"), false)).collect();
    let top = b.add_absorbing("top");
    let bot = b.add_absorbing("bot");
    for j in 0..n {
        b.set_actions(v[j], vec![all_actions(m), all_actions(m)]);
        let next = if j + 1 < n { v[j + 1] } else { top };
        for a1 in 1..=m {
            for a2 in 1..=m {
                let t = match a1.cmp(&a2) {
                    std::cmp::Ordering::Greater => v[0],
                    std::cmp::Ordering::Less => bot,
                    std::cmp::Ordering::Equal => next,
                };
                b.set_transition(v[j], &[a1, a2], Distribution::pure(t));
            }
        }
    }
    zero_sum_objectives(&mut b, n + 2, top);
    b.build()
}

/// Named states of a duel-shaped game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuelShape {
    pub n: usize,
    pub m: usize,
    /// `side[0][j-1]` is `v^1_j`, `side[1][j-1]` is `v^2_j`.
    pub side: [Vec<StateId>; 2],
    pub vs: StateId,
    pub top: StateId,
    pub bot: StateId,
}

impl DuelShape {
    /// Recognizes a game produced by [`purgatory_duel`] from its state names.
    pub fn of(g: &GameStructure) -> Result<Self> {
        let err = || domain("game is not a Purgatory Duel (expected states v1_j, v2_j, vs, top, bot)");
        let find = |name: &str| g.state_by_name(name).ok_or_else(err);
        let (vs, top, bot) = (find("vs")?, find("top")?, find("bot")?);
        let mut side = [Vec::new(), Vec::new()];
        for (i, list) in side.iter_mut().enumerate() {
            let mut j = 1;
            while let Some(s) = g.state_by_name(&format!("v{}_{}", i + 1, j)) {
                list.push(s);
                j += 1;
            }
        }
        let n = side[0].len();
        if n == 0 || side[1].len() != n || g.num_states() != 2 * n + 3 || g.players() != 2 {
            return Err(err());
        }
        let m = g.actions(side[0][0], 0).len();
        for s in side.iter().flatten() {
            for p in 0..2 {
                if g.actions(*s, p) != all_actions(m).as_slice() {
                    return Err(err());
                }
            }
        }
        Ok(DuelShape { n, m, side, vs, top, bot })
    }

    /// Image under the side swap `v^1_j ↔ v^2_j`, `⊤ ↔ ⊥`.
    pub fn mirror_state(&self, s: StateId) -> StateId {
        if s == self.top {
            return self.bot;
        }
        if s == self.bot {
            return self.top;
        }
        for i in 0..2 {
            if let Some(j) = self.side[i].iter().position(|&x| x == s) {
                return self.side[1 - i][j];
            }
        }
        s
    }
}

/// States `v1_1..v1_n, v2_1..v2_n, vs, top, bot`.
pub fn purgatory_duel(n: usize, m: usize) -> Result<GameStructure> {
    check_nm(n, m)?;
    let mut b = GameBuilder::new(2);
    let mut side = [Vec::new(), Vec::new()];
    for (i, list) in side.iter_mut().enumerate() {
        for j in 1..=n {
            list.push(b.add_state(&format!("v{}_{}", i + 1, j), false));
        }
    }
    let vs = b.add_state("vs", false);
    let top = b.add_absorbing("top");
    let bot = b.add_absorbing("bot");
    b.set_transition(vs, &[0, 0], Distribution::uniform(&[side[0][0], side[1][0]]));
    for i in 0..2 {
        let (lose, win) = if i == 0 { (bot, top) } else { (top, bot) };
        for j in 0..n {
            let s = side[i][j];
            let next = if j + 1 < n { side[i][j + 1] } else { win };
            b.set_actions(s, vec![all_actions(m), all_actions(m)]);
            for a1 in 1..=m {
                for a2 in 1..=m {
                    let t = match a1.cmp(&a2) {
                        std::cmp::Ordering::Greater => lose,
                        std::cmp::Ordering::Less => vs,
                        std::cmp::Ordering::Equal => next,
                    };
                    b.set_transition(s, &[a1, a2], Distribution::pure(t));
                }
            }
        }
    }
    zero_sum_objectives(&mut b, 2 * n + 3, top);
    b.build()
}

/// Action id of the pair `(i, j)` in the 3-state duel, both in `1..=m`.
pub fn pair_action(m: usize, i: usize, j: usize) -> ActionId {
    (i - 1) * m + j
}

/// Inverse of [`pair_action`].
pub fn action_pair(m: usize, a: ActionId) -> (usize, usize) {
    ((a - 1) / m + 1, (a - 1) % m + 1)
}

fn three_state(m: usize, restricted: bool) -> Result<GameStructure> {
    if m == 0 {
        return Err(domain("m must be at least 1"));
    }
    let mut b = GameBuilder::new(2);
    let vs = b.add_state("vs", false);
    let top = b.add_absorbing("top");
    let bot = b.add_absorbing("bot");
    let pairs = |keep: &dyn Fn(usize, usize) -> bool| -> Vec<ActionId> {
        let mut v = Vec::new();
        for i in 1..=m {
            for j in 1..=m {
                if keep(i, j) {
                    v.push(pair_action(m, i, j));
                }
            }
        }
        v
    };
    let (r1, r2) = if restricted {
        (pairs(&|i, j| i == 1 || j == 1), pairs(&|i, j| i == m || j == m))
    } else {
        (pairs(&|_, _| true), pairs(&|_, _| true))
    };
    b.set_actions(vs, vec![r1.clone(), r2.clone()]);
    for &x in &r1 {
        for &y in &r2 {
            let (a1, a2) = action_pair(m, x);
            let (b1, b2) = action_pair(m, y);
            let first = match a1.cmp(&b1) {
                std::cmp::Ordering::Greater => bot,
                std::cmp::Ordering::Equal => top,
                std::cmp::Ordering::Less => vs,
            };
            let second = match a2.cmp(&b2) {
                std::cmp::Ordering::Greater => top,
                std::cmp::Ordering::Equal => bot,
                std::cmp::Ordering::Less => vs,
            };
            let d = if first == second {
                Distribution::pure(first)
            } else {
                Distribution::uniform(&[first, second])
            };
            b.set_transition(vs, &[x, y], d);
        }
    }
    zero_sum_objectives(&mut b, 3, top);
    b.build()
}

/// States `vs, top, bot`; each player picks a pair of numbers in `1..=m`.
pub fn three_state_duel(m: usize) -> Result<GameStructure> {
    three_state(m, false)
}

/// The 3-state duel with player 1 limited to pairs `(1, j)` or `(i, 1)` and
/// player 2 to pairs `(m, j)` or `(i, m)`.
pub fn restricted_three_state_duel(m: usize) -> Result<GameStructure> {
    three_state(m, true)
}

/// Upper limit on `delta_min` for the safety duel.
pub fn safety_duel_delta_limit() -> Rational {
    scalar::q(1, 216)
}

/// States `vs, v1, v2, top, bot, v1^1..v1^{2c-1}, v2^1..v2^{2c-1}`.
pub fn safety_duel(c: usize, delta_min: &Rational) -> Result<GameStructure> {
    if c == 0 {
        return Err(domain("c must be at least 1"));
    }
    if *delta_min <= Rational::ZERO || *delta_min > safety_duel_delta_limit() {
        return Err(domain("delta_min must lie in (0, 1/216]"));
    }
    let delta = delta_min.clone();
    let mut b = GameBuilder::new(2);
    let vs = b.add_state("vs", false);
    let v = [b.add_state("v1", false), b.add_state("v2", false)];
    let top = b.add_absorbing("top");
    let bot = b.add_absorbing("bot");
    let mut chain = [vec![top], vec![bot]];
    for (j, list) in chain.iter_mut().enumerate() {
        for l in 1..2 * c {
            list.push(b.add_state(&format!("v{}^{}", j + 1, l), false));
        }
    }
    let split = |s: StateId, t: StateId| {
        Distribution::new([(s, Rational::ONE - &delta), (t, delta.clone())]).expect("two-point distribution")
    };
    b.set_transition(vs, &[0, 0], Distribution::uniform(&[v[0], v[1]]));
    for j in 0..2 {
        let other = 1 - j;
        b.set_actions(v[j], vec![vec![1, 2], vec![1, 2]]);
        for l in 1..=2 {
            for lp in 1..=2 {
                let d = match usize::cmp(&l, &lp) {
                    std::cmp::Ordering::Equal => split(vs, chain[j][c - 1]),
                    std::cmp::Ordering::Less => split(vs, chain[other][2 * c - 1]),
                    std::cmp::Ordering::Greater => Distribution::pure(chain[other][0]),
                };
                b.set_transition(v[j], &[l, lp], d);
            }
        }
        for l in 1..2 * c {
            b.set_transition(chain[j][l], &[0, 0], split(vs, chain[j][l - 1]));
        }
    }
    let n = 5 + 2 * (2 * c - 1);
    b.set_objective(0, Objective::safety((0..n).filter(|&s| s != bot)));
    b.set_objective(1, Objective::safety((0..n).filter(|&s| s != top)));
    b.build()
}

/// Player 1's stationary strategy at `v1`, `v2` guaranteeing 1/2, and its
/// image for player 2 under the symmetry of the safety duel.
pub fn safe_optimal_profile(g: &GameStructure, c: usize, delta_min: &Rational) -> Result<[StationaryStrategy; 2]> {
    let v1 = g.state_by_name("v1").ok_or_else(|| domain("not a safety duel"))?;
    let v2 = g.state_by_name("v2").ok_or_else(|| domain("not a safety duel"))?;
    let hi = scalar::powi(delta_min, -(c as i64));
    let lo = scalar::powi(delta_min, c as i64);
    let den = int(2) + &hi + &lo;
    let p = (Rational::ONE + hi) / &den;
    let one = Distribution::new([(1, p.clone()), (2, Rational::ONE - &p)])?;
    let two = Distribution::new([(1, Rational::ONE - &p), (2, p)])?;
    let mut s1 = StationaryStrategy::new(0);
    s1.set(v1, one.clone()).set(v2, one);
    let mut s2 = StationaryStrategy::new(1);
    s2.set(v1, two.clone()).set(v2, two);
    Ok([s1, s2])
}

/// Exact Purgatory Duel values with one optimal strategy per player.
#[derive(Clone, Debug)]
pub struct DuelValueTable {
    pub n: usize,
    pub m: usize,
    pub game: GameStructure,
    pub values: ValueVector,
    pub sigma1: StationaryStrategy,
    pub sigma2: StationaryStrategy,
}

impl DuelValueTable {
    pub fn shape(&self) -> DuelShape {
        DuelShape::of(&self.game).expect("generated duel")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = &self.game;
        let dist = |d: &Distribution| -> serde_json::Value {
            d.iter().map(|(a, p)| json!({"action": a, "p": scalar::format(p)})).collect::<Vec<_>>().into()
        };
        let strategies: Vec<_> = (0..g.num_states())
            .filter(|&s| !g.is_absorbing(s) && g.actions(s, 0).len() > 1)
            .map(|s| {
                json!({
                    "state": g.name(s),
                    "player1": dist(&self.sigma1.at(g, s)),
                    "player2": dist(&self.sigma2.at(g, s)),
                })
            })
            .collect();
        json!({"n": self.n, "m": self.m, "values": self.values.to_json(g), "strategies": strategies})
    }
}

/// Backward recursion `v^1_j = val(M^{0, v^1_{j+1}, 1/2, m})`, certified by
/// the fixpoint residual of the whole table.
pub fn exact_duel_values(n: usize, m: usize, max_bits: u64) -> Result<DuelValueTable> {
    let g = purgatory_duel(n, m)?;
    let shape = DuelShape::of(&g)?;
    let half = scalar::half();
    let mut values = vec![Rational::ZERO; g.num_states()];
    values[shape.top] = Rational::ONE;
    values[shape.vs] = half.clone();
    let mut next = Rational::ONE;
    for j in (0..n).rev() {
        let sol = solve_matrix_game(&build_tri_matrix(&Rational::ZERO, &next, &half, m)?);
        let bits = scalar::bits(&sol.value);
        if bits > max_bits {
            return Err(Error::BitCap { bits, cap: max_bits });
        }
        values[shape.side[0][j]] = sol.value.clone();
        values[shape.side[1][j]] = Rational::ONE - &sol.value;
        next = sol.value;
    }
    let values = ValueVector(values);
    if fixpoint_residual(&g, &values)?.0.iter().any(|r| *r != Rational::ZERO) {
        return Err(domain("duel value table fails the fixpoint residual"));
    }
    let mut sigma1 = StationaryStrategy::new(0);
    let mut sigma2 = StationaryStrategy::new(1);
    for s in shape.side.iter().flatten().copied() {
        let sol = solve_matrix_game(&local_matrix(&g, s, &values)?);
        sigma1.set(s, sol.row_strategy.map(|i| i + 1));
        sigma2.set(s, sol.col_strategy.map(|i| i + 1));
    }
    Ok(DuelValueTable { n, m, game: g, values, sigma1, sigma2 })
}

fn three_state_m(g3: &GameStructure) -> Result<(usize, StateId)> {
    let vs = g3.state_by_name("vs").ok_or_else(|| domain("not a 3-state duel"))?;
    if g3.num_states() != 3 || g3.players() != 2 {
        return Err(domain("not a 3-state duel"));
    }
    let max = g3.actions(vs, 0).iter().chain(g3.actions(vs, 1)).copied().max().unwrap_or(0);
    let m = (1..=max).find(|k| k * k >= max).unwrap_or(1);
    Ok((m, vs))
}

/// Marginals of a 3-state strategy at `v^1_1` and `v^2_1` of `duel(1, m)`.
pub fn project_strategy(g3: &GameStructure, tau: &StationaryStrategy, gd: &GameStructure) -> Result<StationaryStrategy> {
    let (m3, vs3) = three_state_m(g3)?;
    let shape = DuelShape::of(gd)?;
    if shape.n != 1 || shape.m < m3 || shape.m * shape.m < g3.actions(vs3, tau.player).iter().copied().max().unwrap_or(0) {
        return Err(domain("dimension mismatch between the 3-state duel and duel(1, m)"));
    }
    let m = shape.m;
    let joint = tau.at(g3, vs3);
    let first = joint.map(|a| action_pair(m, a).0);
    let second = joint.map(|a| action_pair(m, a).1);
    let mut out = StationaryStrategy::new(tau.player);
    out.set(shape.side[0][0], first).set(shape.side[1][0], second);
    Ok(out)
}

/// Product lift of a `duel(1, m)` strategy to the 3-state duel.
pub fn lift_strategy(gd: &GameStructure, sigma: &StationaryStrategy, g3: &GameStructure) -> Result<StationaryStrategy> {
    let shape = DuelShape::of(gd)?;
    let (_, vs3) = three_state_m(g3)?;
    if shape.n != 1 {
        return Err(domain("lifting needs duel(1, m)"));
    }
    let m = shape.m;
    let a = sigma.at(gd, shape.side[0][0]);
    let b = sigma.at(gd, shape.side[1][0]);
    let legal: BTreeSet<ActionId> = g3.actions(vs3, sigma.player).iter().copied().collect();
    let mut entries = Vec::new();
    for (i, p) in a.iter() {
        for (j, r) in b.iter() {
            let id = pair_action(m, i, j);
            if !legal.contains(&id) {
                return Err(domain(format!("pair ({i}, {j}) is not available in the 3-state game")));
            }
            entries.push((id, p * r));
        }
    }
    let mut out = StationaryStrategy::new(sigma.player);
    out.set(vs3, Distribution::new(entries)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::validate_game;
    use crate::scalar::q;

    #[test]
    fn state_counts_and_delta_min() {
        assert_eq!(purgatory(2, 2).unwrap().num_states(), 4);
        assert_eq!(purgatory(2, 2).unwrap().delta_min(), int(1));
        assert_eq!(purgatory_duel(1, 2).unwrap().num_states(), 5);
        assert_eq!(purgatory_duel(2, 2).unwrap().delta_min(), q(1, 2));
        assert_eq!(safety_duel(1, &q(1, 216)).unwrap().num_states(), 7);
        assert_eq!(safety_duel(2, &q(1, 1000)).unwrap().num_states(), 11);
        assert_eq!(safety_duel(1, &q(1, 216)).unwrap().delta_min(), q(1, 216));
        assert!(safety_duel(1, &q(1, 100)).is_err());
        assert!(safety_duel(0, &q(1, 1000)).is_err());
        for g in [purgatory(1, 2), purgatory_duel(2, 3), three_state_duel(2), safety_duel(2, &q(1, 1000))] {
            assert!(validate_game(&g.unwrap().to_document()).is_empty());
        }
    }

    #[test]
    fn purgatory_layout() {
        let g = purgatory(1, 2).unwrap();
        let (v1, top, bot) = (0, 1, 2);
        assert_eq!(g.delta(v1, &[1, 1]), &Distribution::pure(top));
        assert_eq!(g.delta(v1, &[1, 2]), &Distribution::pure(bot));
        assert_eq!(g.delta(v1, &[2, 1]), &Distribution::pure(v1));
        assert_eq!(g.delta(v1, &[2, 2]), &Distribution::pure(top));
    }

    #[test]
    fn restricted_action_counts() {
        for m in 1..=4 {
            let g = restricted_three_state_duel(m).unwrap();
            assert_eq!(g.actions(0, 0).len(), 2 * m - 1);
            assert_eq!(g.actions(0, 1).len(), 2 * m - 1);
            assert_eq!(three_state_duel(m).unwrap().actions(0, 0).len(), m * m);
        }
    }

    #[test]
    fn duel_small_tables() {
        let t = exact_duel_values(1, 2, 1 << 20).unwrap();
        let s = t.shape();
        assert_eq!(t.values[s.vs], q(1, 2));
        assert_eq!(t.values[s.side[0][0]], q(2, 3));
        assert_eq!(t.values[s.side[1][0]], q(1, 3));
        let t = exact_duel_values(2, 2, 1 << 20).unwrap();
        let s = t.shape();
        let got: Vec<_> = [s.side[0][1], s.side[0][0], s.side[1][0], s.side[1][1]].iter().map(|&x| t.values[x].clone()).collect();
        assert_eq!(got, vec![q(2, 3), q(8, 15), q(7, 15), q(1, 3)]);
        assert!(matches!(exact_duel_values(3, 3, 8), Err(Error::BitCap { .. })));
    }

    #[test]
    fn projection_roundtrip() {
        let gd = purgatory_duel(1, 3).unwrap();
        let g3 = three_state_duel(3).unwrap();
        let mut sigma = StationaryStrategy::new(1);
        sigma.set(0, Distribution::new([(1, q(1, 2)), (3, q(1, 2))]).unwrap());
        sigma.set(1, Distribution::new([(1, q(1, 3)), (2, q(2, 3))]).unwrap());
        let tau = lift_strategy(&gd, &sigma, &g3).unwrap();
        assert_eq!(project_strategy(&g3, &tau, &gd).unwrap(), sigma);
        let mut uni = StationaryStrategy::new(0);
        uni.set(0, Distribution::uniform(&(1..=9).collect::<Vec<_>>()));
        let p = project_strategy(&g3, &uni, &gd).unwrap();
        assert_eq!(*p.at(&gd, 0), Distribution::uniform(&[1, 2, 3]));
        assert_eq!(*p.at(&gd, 1), Distribution::uniform(&[1, 2, 3]));
    }
}
