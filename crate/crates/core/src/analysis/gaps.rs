use serde_json::json;

use crate::error::{domain, Result};
use crate::game_model::{
    Distribution, GameStructure, ObjectiveKind, StateId, StationaryStrategy, Strategy, StrategyProfile,
};
use crate::mdp_solver::{chain_payoff, fix_strategies, optimal_value, PositionalPolicy};
use crate::scalar::{self, One, Rational, Zero};
use crate::value_iteration::{fixpoint_residual, ValueVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapEntry {
    /// Zero-based player whose incentive is measured.
    pub player: usize,
    pub state: StateId,
    /// Payoff the player is claimed to get: the reference value for
    /// optimality gaps, the profile payoff for Nash gaps.
    pub claim: Rational,
    /// Optimality gaps: payoff guaranteed against the opponent's best reply.
    /// Nash gaps: payoff of the player's best deviation.
    pub best_reply: Rational,
    pub gap: Rational,
}

/// Best positional reply found in an induced MDP, labelled by its states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub player: usize,
    pub labels: Vec<String>,
    pub policy: PositionalPolicy,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    pub witness: Vec<Witness>,
}

impl GapReport {
    pub fn max_gap(&self) -> Rational {
        self.entries.iter().map(|e| e.gap.clone()).max().unwrap_or(Rational::ZERO)
    }

    pub fn gap(&self, player: usize, state: StateId) -> Option<&Rational> {
        self.entries.iter().find(|e| e.player == player && e.state == state).map(|e| &e.gap)
    }

    pub fn to_json(&self, g: &GameStructure) -> serde_json::Value {
        json!({
            "entries": self.entries.iter().map(|e| json!({
                "player": e.player + 1,
                "state": g.name(e.state),
                "claim": scalar::format(&e.claim),
                "best_reply": scalar::format(&e.best_reply),
                "gap": scalar::format(&e.gap),
            })).collect::<Vec<_>>(),
            "max_gap": scalar::format(&self.max_gap()),
            "witness": self.witness.iter().map(|w| json!({
                "player": w.player + 1,
                "policy": w.labels.iter().zip(&w.policy.0)
                    .map(|(l, a)| json!({"state": l, "action": a}))
                    .collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Rows sorted by state id, then player.
    pub fn to_csv(&self, g: &GameStructure) -> String {
        let mut rows: Vec<&GapEntry> = self.entries.iter().collect();
        rows.sort_by_key(|e| (g.state(e.state).id, e.player));
        let mut out = String::from("state,player,claim,best_reply,gap\n");
        for e in rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                g.name(e.state),
                e.player + 1,
                scalar::format(&e.claim),
                scalar::format(&e.best_reply),
                scalar::format(&e.gap)
            ));
        }
        out
    }
}

fn clip(x: Rational) -> Rational {
    x.max(Rational::ZERO)
}

/// How far `sigma` falls short of the value `reference` at each state, in
/// the owner's payoff, measured against the opponent's exact best reply.
pub fn optimality_gap(
    g: &GameStructure,
    player: usize,
    sigma: &StationaryStrategy,
    reference: &ValueVector,
) -> Result<GapReport> {
    g.require_zero_sum()?;
    if player > 1 || sigma.player != player {
        return Err(domain("strategy does not belong to the given player"));
    }
    if reference.len() != g.num_states() {
        return Err(domain("reference has the wrong length"));
    }
    if fixpoint_residual(g, reference)?.0.iter().any(|r| *r != Rational::ZERO) {
        return Err(domain("reference values fail the fixpoint residual"));
    }
    let opp = 1 - player;
    let mut slots: Vec<Option<Strategy>> = vec![None, None];
    slots[player] = Some(Strategy::Stationary(sigma.clone()));
    let mdp = fix_strategies(g, &slots)?.into_mdp()?;
    let (best, policy) = optimal_value(&mdp);
    let entries = (0..g.num_states())
        .map(|s| {
            let claim = if player == 0 { reference[s].clone() } else { Rational::ONE - &reference[s] };
            let guaranteed = Rational::ONE - &best[s];
            GapEntry { player, state: s, gap: clip(&claim - &guaranteed), claim, best_reply: guaranteed }
        })
        .collect();
    Ok(GapReport { entries, witness: vec![Witness { player: opp, labels: mdp.labels.clone(), policy }] })
}

fn profile_slots(profile: &StrategyProfile) -> Vec<Option<Strategy>> {
    profile.strategies().into_iter().map(Some).collect()
}

/// Gain available to each player by a unilateral deviation, from every state
/// or only `from`. Player-stationary profiles are solved on the alive-set
/// product.
pub fn nash_gap(g: &GameStructure, profile: &StrategyProfile, from: Option<StateId>) -> Result<GapReport> {
    let all_safety = g.objectives().iter().all(|o| o.kind == ObjectiveKind::Safety);
    if !all_safety && !g.is_zero_sum() {
        return Err(domain("Nash gaps need an all-safety or a zero-sum game"));
    }
    let slots = profile_slots(profile);
    let chain = fix_strategies(g, &slots)?.into_chain()?;
    let states: Vec<StateId> = match from {
        Some(s) => vec![s],
        None => (0..g.num_states()).collect(),
    };
    let mut report = GapReport::default();
    for i in 0..g.players() {
        let o = g.objective(i);
        let payoff = chain_payoff(&chain, o.kind, &o.targets);
        let mut free = slots.clone();
        free[i] = None;
        let mdp = fix_strategies(g, &free)?.into_mdp()?;
        let (best, policy) = optimal_value(&mdp);
        for &s in &states {
            let claim = payoff[chain.start(s).expect("every state starts a play")].clone();
            let dev = best[mdp.start(s).expect("every state starts a play")].clone();
            report.entries.push(GapEntry { player: i, state: s, gap: clip(&dev - &claim), claim, best_reply: dev });
        }
        report.witness.push(Witness { player: i, labels: mdp.labels.clone(), policy });
    }
    Ok(report)
}

/// Pure reply in the safety duel that punishes a low-patience strategy.
///
/// Against player 1's `sigma`, player 2 plays at `v_j` the action `j` when
/// `sigma(v_j)` gives action 2 positive probability, and action `ĵ`
/// otherwise. Against player 2 the reply is the mirror image: player 1 plays
/// `j` when `sigma(v_j)` gives action 1 positive probability, else `ĵ`.
pub fn low_outcome_reply(g: &GameStructure, sigma: &StationaryStrategy) -> Result<StationaryStrategy> {
    let v = [
        g.state_by_name("v1").ok_or_else(|| domain("not a safety duel"))?,
        g.state_by_name("v2").ok_or_else(|| domain("not a safety duel"))?,
    ];
    if sigma.player > 1 {
        return Err(domain("two-player strategy expected"));
    }
    sigma.validate(g)?;
    let probe = if sigma.player == 0 { 2 } else { 1 };
    let mut reply = StationaryStrategy::new(1 - sigma.player);
    for (idx, &s) in v.iter().enumerate() {
        let j = idx + 1;
        let other = 3 - j;
        let a = if sigma.at(g, s).prob(probe) > Rational::ZERO { j } else { other };
        reply.set(s, Distribution::pure(a));
    }
    Ok(reply)
}
