//! Induced MDPs and Markov chains, exact absorption probabilities, optimal
//! reachability/safety values by policy iteration, and replacement sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::game_model::{
    ActionId, AliveSet, Distribution, GameStructure, ObjectiveKind, StateId, Strategy, MAX_PLAYERS,
};
use crate::scalar::{self, One, Rational, Zero};
use crate::value_iteration::ValueVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Objective of an MDP controller. For safety, `targets` is the safe set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpObjective {
    pub kind: ObjectiveKind,
    pub targets: BTreeSet<usize>,
    pub sense: Sense,
}

/// Where an induced state came from: a game state, plus the alive set when
/// the construction is the player-stationary product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Origin {
    pub state: StateId,
    pub alive: Option<AliveSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedMDP {
    pub labels: Vec<String>,
    pub origin: Vec<Origin>,
    /// Zero-based controlling player, if induced from a game.
    pub controller: Option<usize>,
    pub actions: Vec<Vec<ActionId>>,
    pub transitions: Vec<Vec<Distribution>>,
    pub objective: MdpObjective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    pub labels: Vec<String>,
    pub origin: Vec<Origin>,
    pub transitions: Vec<Distribution>,
}

/// One action per MDP state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionalPolicy(pub Vec<ActionId>);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplacementSet(pub Vec<(usize, ActionId, Distribution)>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Induced {
    Mdp(InducedMDP),
    Chain(MarkovChain),
}

impl Induced {
    pub fn into_mdp(self) -> Result<InducedMDP> {
        match self {
            Induced::Mdp(m) => Ok(m),
            Induced::Chain(_) => Err(domain("expected a free player")),
        }
    }

    pub fn into_chain(self) -> Result<MarkovChain> {
        match self {
            Induced::Chain(c) => Ok(c),
            Induced::Mdp(_) => Err(domain("expected every player to be fixed")),
        }
    }
}

impl MarkovChain {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Index of the induced state starting play in `s` (with the initial
    /// alive set for product chains).
    pub fn start(&self, s: StateId) -> Option<usize> {
        start_index(&self.origin, s)
    }

    /// Targets in induced indices: states whose origin is in `set`.
    pub fn lift_set(&self, set: &BTreeSet<StateId>) -> BTreeSet<usize> {
        lift(&self.origin, set)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "states": self.labels,
            "transitions": self.transitions.iter().map(|d| dist_json(d, &self.labels)).collect::<Vec<_>>(),
        })
    }
}

impl InducedMDP {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn start(&self, s: StateId) -> Option<usize> {
        start_index(&self.origin, s)
    }

    pub fn lift_set(&self, set: &BTreeSet<StateId>) -> BTreeSet<usize> {
        lift(&self.origin, set)
    }

    pub fn action_pos(&self, s: usize, a: ActionId) -> Option<usize> {
        self.actions[s].iter().position(|&x| x == a)
    }

    /// Same dynamics under a different objective.
    pub fn with_objective(&self, objective: MdpObjective) -> InducedMDP {
        InducedMDP { objective, ..self.clone() }
    }

    /// Chain obtained by following `policy`.
    pub fn follow(&self, policy: &PositionalPolicy) -> MarkovChain {
        MarkovChain {
            labels: self.labels.clone(),
            origin: self.origin.clone(),
            transitions: (0..self.len())
                .map(|s| self.transitions[s][self.action_pos(s, policy.0[s]).expect("legal action")].clone())
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<_> = (0..self.len())
            .map(|s| {
                json!({
                    "state": self.labels[s],
                    "actions": self.actions[s].iter().zip(&self.transitions[s])
                        .map(|(a, d)| json!({"action": a, "dist": dist_json(d, &self.labels)}))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "controller": self.controller.map(|p| p + 1),
            "objective": {
                "kind": match self.objective.kind { ObjectiveKind::Reach => "reach", ObjectiveKind::Safety => "safety" },
                "sense": match self.objective.sense { Sense::Maximize => "max", Sense::Minimize => "min" },
                "targets": self.objective.targets.iter().map(|&t| self.labels[t].clone()).collect::<Vec<_>>(),
            },
            "states": states,
        })
    }
}

fn dist_json(d: &Distribution, labels: &[String]) -> serde_json::Value {
    d.iter()
        .map(|(t, p)| json!({"state": labels[t], "p": scalar::format(p)}))
        .collect::<Vec<_>>()
        .into()
}

fn start_index(origin: &[Origin], s: StateId) -> Option<usize> {
    origin.iter().position(|o| o.state == s)
}

fn lift(origin: &[Origin], set: &BTreeSet<StateId>) -> BTreeSet<usize> {
    origin.iter().enumerate().filter(|(_, o)| set.contains(&o.state)).map(|(i, _)| i).collect()
}

// ---------------------------------------------------------------------------
// Fixing strategies

/// Per-player action distribution at a state, or `None` for the free player.
type LocalChoice = Vec<Option<Distribution>>;

/// Successor distributions at `s`, one per action of the free player (or a
/// single one when every player is fixed).
fn mix_at(g: &GameStructure, s: StateId, choice: &LocalChoice) -> Vec<Distribution> {
    let free = choice.iter().position(|c| c.is_none());
    let width = free.map_or(1, |p| g.actions(s, p).len());
    let mut acc: Vec<BTreeMap<StateId, Rational>> = vec![BTreeMap::new(); width];
    for j in 0..g.joint_count(s) {
        let profile = g.joint_profile(s, j);
        let mut w = Rational::ONE;
        for (p, c) in choice.iter().enumerate() {
            if let Some(d) = c {
                w *= d.prob(profile[p]);
                if w == Rational::ZERO {
                    break;
                }
            }
        }
        if w == Rational::ZERO {
            continue;
        }
        let slot = free.map_or(0, |p| g.action_pos(s, p, profile[p]).expect("legal"));
        for (t, pr) in g.transition(s, j).iter() {
            *acc[slot].entry(t).or_insert(Rational::ZERO) += &w * pr;
        }
    }
    acc.into_iter()
        .map(|m| Distribution::new(m).expect("mixture of distributions"))
        .collect()
}

fn initial_alive(g: &GameStructure, s: StateId) -> AliveSet {
    update_alive(g, (1u32 << g.players()) - 1, s)
}

fn update_alive(g: &GameStructure, alive: AliveSet, s: StateId) -> AliveSet {
    let mut out = alive;
    for (i, o) in g.objectives().iter().enumerate() {
        if o.kind == ObjectiveKind::Safety && !o.targets.contains(&s) {
            out &= !(1 << i);
        }
    }
    out
}

fn alive_label(g: &GameStructure, s: StateId, alive: AliveSet) -> String {
    let players: Vec<String> = (0..g.players()).filter(|i| alive & (1 << i) != 0).map(|i| (i + 1).to_string()).collect();
    format!("{}@{{{}}}", g.name(s), players.join(","))
}

/// Fixes the given strategies. One `None` yields the free player's MDP (with
/// that player's own objective, maximized); no `None` yields a chain.
/// Player-stationary strategies induce the product with alive sets.
pub fn fix_strategies(g: &GameStructure, fixed: &[Option<Strategy>]) -> Result<Induced> {
    if fixed.len() != g.players() {
        return Err(Error::InvalidStrategy(format!("{} slots for {} players", fixed.len(), g.players())));
    }
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    if free.len() > 1 {
        return Err(domain("at most one player may be left free"));
    }
    for (i, s) in fixed.iter().enumerate() {
        if let Some(s) = s {
            if s.player() != i {
                return Err(Error::InvalidStrategy(format!("slot {} holds a strategy of player {}", i + 1, s.player() + 1)));
            }
        }
    }
    let stationary = fixed.iter().flatten().all(|s| matches!(s, Strategy::Stationary(_)));
    let product = fixed.iter().flatten().all(|s| matches!(s, Strategy::PlayerStationary(_)));
    if !stationary && !product {
        return Err(Error::InvalidStrategy("mixed stationary and player-stationary strategies".into()));
    }
    let free = free.first().copied();
    if stationary {
        for s in fixed.iter().flatten() {
            if let Strategy::Stationary(st) = s {
                st.validate(g)?;
            }
        }
        let origin: Vec<Origin> = (0..g.num_states()).map(|s| Origin { state: s, alive: None }).collect();
        let mut rows = Vec::with_capacity(g.num_states());
        for s in 0..g.num_states() {
            let choice: LocalChoice = fixed
                .iter()
                .map(|f| match f {
                    Some(Strategy::Stationary(st)) => Some(st.at(g, s).into_owned()),
                    _ => None,
                })
                .collect();
            rows.push(mix_at(g, s, &choice));
        }
        Ok(assemble(g, free, g.names(), origin, rows))
    } else {
        if g.players() > MAX_PLAYERS {
            return Err(domain(format!("alive-set product supports at most {MAX_PLAYERS} players")));
        }
        // Reachable (state, alive) pairs from every initial pair.
        let mut seen: BTreeSet<(StateId, AliveSet)> = BTreeSet::new();
        let mut queue: VecDeque<(StateId, AliveSet)> = VecDeque::new();
        for s in 0..g.num_states() {
            let key = (s, initial_alive(g, s));
            if seen.insert(key) {
                queue.push_back(key);
            }
        }
        let mut local: BTreeMap<(StateId, AliveSet), Vec<Distribution>> = BTreeMap::new();
        while let Some((s, alive)) = queue.pop_front() {
            let mut choice: LocalChoice = Vec::with_capacity(g.players());
            for f in fixed {
                choice.push(match f {
                    Some(Strategy::PlayerStationary(st)) => Some(st.at(g, alive, s)?.into_owned()),
                    _ => None,
                });
            }
            let rows = mix_at(g, s, &choice);
            for d in &rows {
                for t in d.support() {
                    let key = (t, update_alive(g, alive, t));
                    if seen.insert(key) {
                        queue.push_back(key);
                    }
                }
            }
            local.insert((s, alive), rows);
        }
        // Largest alive set first, so each state's initial pair leads its block.
        let mut keys: Vec<(StateId, AliveSet)> = seen.into_iter().collect();
        keys.sort_by_key(|&(s, a)| (s, std::cmp::Reverse(a)));
        let index: BTreeMap<(StateId, AliveSet), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let labels = keys.iter().map(|&(s, a)| alive_label(g, s, a)).collect();
        let origin: Vec<Origin> = keys.iter().map(|&(s, a)| Origin { state: s, alive: Some(a) }).collect();
        let rows: Vec<Vec<Distribution>> = keys
            .iter()
            .map(|&(_, alive)| alive)
            .zip(keys.iter().map(|k| local.remove(k).expect("explored")))
            .map(|(alive, row)| row.into_iter().map(|d| d.map(|t| index[&(t, update_alive(g, alive, t))])).collect())
            .collect();
        Ok(assemble(g, free, labels, origin, rows))
    }
}

fn assemble(
    g: &GameStructure,
    free: Option<usize>,
    labels: Vec<String>,
    origin: Vec<Origin>,
    rows: Vec<Vec<Distribution>>,
) -> Induced {
    match free {
        None => Induced::Chain(MarkovChain {
            labels,
            transitions: rows.into_iter().map(|mut r| r.remove(0)).collect(),
            origin,
        }),
        Some(p) => {
            let o = g.objective(p);
            let targets = lift(&origin, &o.targets);
            let actions = origin.iter().map(|org| g.actions(org.state, p).to_vec()).collect();
            Induced::Mdp(InducedMDP {
                labels,
                origin,
                controller: Some(p),
                actions,
                transitions: rows,
                objective: MdpObjective { kind: o.kind, targets, sense: Sense::Maximize },
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Chains

/// States from which `targets` is reachable along positive-probability edges.
fn backward_reachable(preds: &[Vec<usize>], targets: &BTreeSet<usize>) -> Vec<bool> {
    let mut mark = vec![false; preds.len()];
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    for &t in targets {
        mark[t] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !mark[p] {
                mark[p] = true;
                queue.push_back(p);
            }
        }
    }
    mark
}

/// Exact probability of ever reaching `targets` from each state.
///
/// States that cannot reach the targets (in particular every closed class
/// disjoint from them) get 0; the rest solve the transient linear system.
pub fn absorption_probabilities(mc: &MarkovChain, targets: &BTreeSet<usize>) -> ValueVector {
    absorb(&mc.transitions, targets)
}

fn absorb(trans: &[Distribution], targets: &BTreeSet<usize>) -> ValueVector {
    let n = trans.len();
    let mut preds = vec![Vec::new(); n];
    for (s, d) in trans.iter().enumerate() {
        for t in d.support() {
            preds[t].push(s);
        }
    }
    let reach = backward_reachable(&preds, targets);
    let unknown: Vec<usize> = (0..n).filter(|&s| reach[s] && !targets.contains(&s)).collect();
    let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = unknown.len();
    // (I - P_RR) x = P_RT 1
    let mut a = vec![vec![Rational::ZERO; k + 1]; k];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = Rational::ONE;
        for (t, p) in trans[s].iter() {
            if targets.contains(&t) {
                a[i][k] += p;
            } else if let Some(&j) = pos.get(&t) {
                a[i][j] -= p;
            }
        }
    }
    let x = gauss_solve(a);
    let mut out = vec![Rational::ZERO; n];
    for &t in targets {
        out[t] = Rational::ONE;
    }
    for (i, &s) in unknown.iter().enumerate() {
        out[s] = x[i].clone();
    }
    ValueVector(out)
}

/// Solves a nonsingular augmented system by exact Gaussian elimination.
fn gauss_solve(mut a: Vec<Vec<Rational>>) -> Vec<Rational> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| a[r][col] != Rational::ZERO).expect("nonsingular system");
        a.swap(col, piv);
        let inv = Rational::ONE / a[col][col].clone();
        for x in a[col][col..].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col] == Rational::ZERO {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &f * p;
            }
        }
    }
    a.into_iter().map(|mut r| r.pop().unwrap()).collect()
}

/// Payoff of a game objective in a chain induced from that game.
pub fn chain_payoff(mc: &MarkovChain, kind: ObjectiveKind, set: &BTreeSet<StateId>) -> ValueVector {
    let lifted = mc.lift_set(set);
    match kind {
        ObjectiveKind::Reach => absorption_probabilities(mc, &lifted),
        ObjectiveKind::Safety => {
            let bad: BTreeSet<usize> = (0..mc.len()).filter(|s| !lifted.contains(s)).collect();
            complement(absorption_probabilities(mc, &bad))
        }
    }
}

fn complement(v: ValueVector) -> ValueVector {
    ValueVector(v.0.into_iter().map(|x| Rational::ONE - x).collect())
}

// ---------------------------------------------------------------------------
// Optimal values

fn q_value(d: &Distribution, v: &[Rational]) -> Rational {
    d.iter().map(|(t, p)| p * &v[t]).sum()
}

/// Exact optimal reachability probabilities and a positional witness (as
/// action positions), by policy iteration.
fn reach_core(trans: &[Vec<Distribution>], targets: &BTreeSet<usize>, sense: Sense) -> (Vec<Rational>, Vec<usize>) {
    let n = trans.len();
    let mut policy = vec![0usize; n];
    let mut frozen = vec![false; n];
    for &t in targets {
        frozen[t] = true;
    }
    match sense {
        Sense::Maximize => {
            let mut preds = vec![Vec::new(); n];
            for (s, row) in trans.iter().enumerate() {
                for d in row {
                    for t in d.support() {
                        preds[t].push(s);
                    }
                }
            }
            let reach = backward_reachable(&preds, targets);
            for s in 0..n {
                if !reach[s] {
                    frozen[s] = true;
                }
            }
        }
        Sense::Minimize => {
            // States that can avoid the targets forever: greatest fixpoint.
            let mut avoid: Vec<bool> = (0..n).map(|s| !targets.contains(&s)).collect();
            loop {
                let mut changed = false;
                for s in 0..n {
                    if avoid[s] && !trans[s].iter().any(|d| d.support().all(|t| avoid[t])) {
                        avoid[s] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for s in 0..n {
                if avoid[s] {
                    policy[s] = trans[s].iter().position(|d| d.support().all(|t| avoid[t])).unwrap();
                    frozen[s] = true;
                }
            }
        }
    }
    loop {
        let chain: Vec<Distribution> = (0..n).map(|s| trans[s][policy[s]].clone()).collect();
        let v = absorb(&chain, targets).0;
        let mut changed = false;
        for s in 0..n {
            if frozen[s] {
                continue;
            }
            let qs: Vec<Rational> = trans[s].iter().map(|d| q_value(d, &v)).collect();
            let best = match sense {
                Sense::Maximize => qs.iter().max(),
                Sense::Minimize => qs.iter().min(),
            }
            .unwrap();
            let improves = match sense {
                Sense::Maximize => *best > v[s],
                Sense::Minimize => *best < v[s],
            };
            if improves {
                policy[s] = qs.iter().position(|x| x == best).unwrap();
                changed = true;
            }
        }
        if !changed {
            return (v, policy);
        }
    }
}

/// Exact optimal value for the MDP's objective and a positional witness.
/// Safety is solved as one minus the opposite-sense reachability of the
/// complement of the safe set.
pub fn optimal_value(mdp: &InducedMDP) -> (ValueVector, PositionalPolicy) {
    let o = &mdp.objective;
    let (v, pol) = match o.kind {
        ObjectiveKind::Reach => {
            let (v, p) = reach_core(&mdp.transitions, &o.targets, o.sense);
            (ValueVector(v), p)
        }
        ObjectiveKind::Safety => {
            let bad: BTreeSet<usize> = (0..mdp.len()).filter(|s| !o.targets.contains(s)).collect();
            let flipped = match o.sense {
                Sense::Maximize => Sense::Minimize,
                Sense::Minimize => Sense::Maximize,
            };
            let (v, p) = reach_core(&mdp.transitions, &bad, flipped);
            (complement(ValueVector(v)), p)
        }
    };
    let policy = PositionalPolicy(pol.iter().enumerate().map(|(s, &i)| mdp.actions[s][i]).collect());
    (v, policy)
}

/// Value of following `policy` under the MDP's objective.
pub fn policy_value(mdp: &InducedMDP, policy: &PositionalPolicy) -> ValueVector {
    let mc = mdp.follow(policy);
    let o = &mdp.objective;
    match o.kind {
        ObjectiveKind::Reach => absorption_probabilities(&mc, &o.targets),
        ObjectiveKind::Safety => {
            let bad: BTreeSet<usize> = (0..mc.len()).filter(|s| !o.targets.contains(s)).collect();
            complement(absorption_probabilities(&mc, &bad))
        }
    }
}

/// Finite-horizon values `v^0..=v^horizon` under the MDP's objective and sense.
pub fn finite_horizon_values(mdp: &InducedMDP, horizon: usize) -> Vec<ValueVector> {
    let o = &mdp.objective;
    let n = mdp.len();
    let inside = |s: usize| o.targets.contains(&s);
    let mut cur: Vec<Rational> = (0..n).map(|s| if inside(s) { Rational::ONE } else { Rational::ZERO }).collect();
    let mut out = vec![ValueVector(cur.clone())];
    for _ in 0..horizon {
        let next: Vec<Rational> = (0..n)
            .map(|s| {
                let pinned = match o.kind {
                    ObjectiveKind::Reach => inside(s).then_some(Rational::ONE),
                    ObjectiveKind::Safety => (!inside(s)).then_some(Rational::ZERO),
                };
                pinned.unwrap_or_else(|| {
                    let qs = mdp.transitions[s].iter().map(|d| q_value(d, &cur));
                    match o.sense {
                        Sense::Maximize => qs.max().unwrap(),
                        Sense::Minimize => qs.min().unwrap(),
                    }
                })
            })
            .collect();
        cur = next;
        out.push(ValueVector(cur.clone()));
    }
    out
}

/// Replaces the listed (state, action) transitions.
pub fn apply_replacement_set(mdp: &InducedMDP, q: &ReplacementSet) -> Result<InducedMDP> {
    let mut out = mdp.clone();
    let mut seen = BTreeSet::new();
    for (s, a, d) in &q.0 {
        if !seen.insert((*s, *a)) {
            return Err(domain(format!("replacement for ({s}, {a}) given twice")));
        }
        let pos = (*s < mdp.len())
            .then(|| mdp.action_pos(*s, *a))
            .flatten()
            .ok_or_else(|| domain(format!("unknown state/action pair ({s}, {a})")))?;
        if d.support().any(|t| t >= mdp.len()) {
            return Err(domain("replacement distribution leaves the state space"));
        }
        out.transitions[*s][pos] = d.clone();
    }
    Ok(out)
}

/// Checks the replacement premise against finite-horizon values up to
/// `horizon`. Returns the first horizon at which it fails, or `None` when it
/// holds for every checked horizon (verified up to `horizon`, not proven).
pub fn replacement_premise_failure(mdp: &InducedMDP, q: &ReplacementSet, horizon: usize) -> Option<usize> {
    let values = finite_horizon_values(mdp, horizon);
    for (t, v) in values.iter().enumerate() {
        for (s, a, d) in &q.0 {
            let old = &mdp.transitions[*s][mdp.action_pos(*s, *a)?];
            if q_value(old, &v.0) > q_value(d, &v.0) {
                return Some(t);
            }
        }
    }
    None
}
