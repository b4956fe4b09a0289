use crate::error::{domain, Result};
use crate::families::DuelShape;
use crate::game_model::{GameStructure, StationaryStrategy};

/// Mirror of a Purgatory Duel strategy for the other player.
///
/// The duel is symmetric under swapping the players together with
/// `v^1_j ↔ v^2_j`, `⊤ ↔ ⊥` and the action order `a ↦ m + 1 - a`, so the
/// mirrored choice at `v^î_j` is the reversed choice at `v^i_j`.
pub fn mirror_strategy(g: &GameStructure, sigma: &StationaryStrategy) -> Result<StationaryStrategy> {
    let shape = DuelShape::of(g)?;
    if sigma.player > 1 {
        return Err(domain("mirror needs a two-player strategy"));
    }
    sigma.validate(g)?;
    let m = shape.m;
    let mut out = StationaryStrategy::new(1 - sigma.player);
    for i in 0..2 {
        for j in 0..shape.n {
            let src = shape.side[i][j];
            let dst = shape.side[1 - i][j];
            out.set(dst, sigma.at(g, src).map(|a| m + 1 - a));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::optimality_gap;
    use crate::families::exact_duel_values;
    use crate::scalar::{Rational, Zero};

    #[test]
    fn mirrored_table_strategies_are_optimal() {
        let t = exact_duel_values(2, 2, 1 << 20).unwrap();
        let m1 = mirror_strategy(&t.game, &t.sigma2).unwrap();
        assert_eq!(m1.player, 0);
        let r = optimality_gap(&t.game, 0, &m1, &t.values).unwrap();
        assert_eq!(r.max_gap(), Rational::ZERO);
        let back = mirror_strategy(&t.game, &m1).unwrap();
        assert_eq!(back.distributions().collect::<Vec<_>>(), t.sigma2.distributions().collect::<Vec<_>>());
    }

    #[test]
    fn rejects_other_games() {
        let g = crate::families::purgatory(2, 2).unwrap();
        assert!(mirror_strategy(&g, &StationaryStrategy::new(0)).is_err());
    }
}
