use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::Distribution;
use crate::error::{Error, Result};
use crate::scalar::{self, Rational, Zero};

pub type StateId = usize;
pub type ActionId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    pub id: u32,
    pub name: String,
    pub absorbing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Reach,
    Safety,
}

/// Reach: visit `targets` at least once. Safety: never leave `targets`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub targets: BTreeSet<StateId>,
}

impl Objective {
    pub fn reach(targets: impl IntoIterator<Item = StateId>) -> Self {
        Objective { kind: ObjectiveKind::Reach, targets: targets.into_iter().collect() }
    }

    pub fn safety(safe: impl IntoIterator<Item = StateId>) -> Self {
        Objective { kind: ObjectiveKind::Safety, targets: safe.into_iter().collect() }
    }
}

/// A validated concurrent game on dense state indices.
///
/// States are kept sorted by id; action ids per (state, player) are sorted.
/// Joint profiles are indexed in mixed radix over action positions with
/// player 1 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameStructure {
    states: Vec<StateInfo>,
    players: usize,
    actions: Vec<Vec<Vec<ActionId>>>,
    transitions: Vec<Vec<Distribution>>,
    objectives: Vec<Objective>,
}

impl GameStructure {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn state(&self, s: StateId) -> &StateInfo {
        &self.states[s]
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.states[s].name
    }

    pub fn names(&self) -> Vec<String> {
        self.states.iter().map(|s| s.name.clone()).collect()
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn state_by_id(&self, id: u32) -> Option<StateId> {
        self.states.binary_search_by_key(&id, |s| s.id).ok()
    }

    pub fn is_absorbing(&self, s: StateId) -> bool {
        self.states[s].absorbing
    }

    pub fn actions(&self, s: StateId, player: usize) -> &[ActionId] {
        &self.actions[s][player]
    }

    pub fn objective(&self, player: usize) -> &Objective {
        &self.objectives[player]
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn joint_count(&self, s: StateId) -> usize {
        self.transitions[s].len()
    }

    /// Position of `a` in the action list of `player` at `s`.
    pub fn action_pos(&self, s: StateId, player: usize, a: ActionId) -> Option<usize> {
        self.actions[s][player].binary_search(&a).ok()
    }

    pub fn joint_index(&self, s: StateId, profile: &[ActionId]) -> Option<usize> {
        if profile.len() != self.players {
            return None;
        }
        let mut idx = 0;
        for (p, &a) in profile.iter().enumerate() {
            idx = idx * self.actions[s][p].len() + self.action_pos(s, p, a)?;
        }
        Some(idx)
    }

    pub fn joint_profile(&self, s: StateId, mut idx: usize) -> Vec<ActionId> {
        let mut out = vec![0; self.players];
        for p in (0..self.players).rev() {
            let n = self.actions[s][p].len();
            out[p] = self.actions[s][p][idx % n];
            idx /= n;
        }
        out
    }

    pub fn transition(&self, s: StateId, joint: usize) -> &Distribution {
        &self.transitions[s][joint]
    }

    pub fn delta(&self, s: StateId, profile: &[ActionId]) -> &Distribution {
        let j = self.joint_index(s, profile).expect("profile outside the action sets");
        &self.transitions[s][j]
    }

    /// Smallest positive transition probability.
    pub fn delta_min(&self) -> Rational {
        self.transitions
            .iter()
            .flatten()
            .flat_map(|d| d.iter().map(|(_, p)| p.clone()))
            .min()
            .expect("at least one transition")
    }

    /// Two players, player 1 reaching `T` and player 2 keeping out of `T`.
    pub fn is_zero_sum(&self) -> bool {
        if self.players != 2 {
            return false;
        }
        let (o1, o2) = (&self.objectives[0], &self.objectives[1]);
        o1.kind == ObjectiveKind::Reach
            && o2.kind == ObjectiveKind::Safety
            && (0..self.num_states()).all(|s| o1.targets.contains(&s) != o2.targets.contains(&s))
    }

    pub fn require_zero_sum(&self) -> Result<()> {
        if self.is_zero_sum() {
            Ok(())
        } else {
            Err(Error::NotZeroSum)
        }
    }

    /// Player 1's reach targets in a zero-sum game.
    pub fn reach_targets(&self) -> &BTreeSet<StateId> {
        &self.objectives[0].targets
    }

    pub fn to_document(&self) -> GameDocument {
        let id = |s: StateId| self.states[s].id;
        let states = self
            .states
            .iter()
            .map(|s| StateDoc { id: s.id, name: s.name.clone(), absorbing: s.absorbing })
            .collect();
        let actions = (0..self.num_states())
            .map(|s| (id(s).to_string(), self.actions[s].clone()))
            .collect();
        let mut transitions = Vec::new();
        for s in 0..self.num_states() {
            for j in 0..self.joint_count(s) {
                transitions.push(TransitionDoc {
                    state: id(s),
                    profile: self.joint_profile(s, j),
                    dist: self.transitions[s][j]
                        .iter()
                        .map(|(t, p)| StateProb { state: id(t), p: scalar::format(p) })
                        .collect(),
                });
            }
        }
        let objectives = self
            .objectives
            .iter()
            .enumerate()
            .map(|(i, o)| ObjectiveDoc {
                player: i + 1,
                kind: o.kind,
                targets: o.targets.iter().map(|&t| id(t)).collect(),
            })
            .collect();
        GameDocument { states, players: self.players, actions, transitions, objectives }
    }

    pub fn from_document(doc: &GameDocument) -> Result<Self> {
        let violations = validate_game(doc);
        if !violations.is_empty() {
            return Err(Error::InvalidGame(violations));
        }
        let mut states: Vec<StateInfo> = doc
            .states
            .iter()
            .map(|s| StateInfo { id: s.id, name: s.name.clone(), absorbing: s.absorbing })
            .collect();
        states.sort_by_key(|s| s.id);
        let index: BTreeMap<u32, StateId> = states.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        let actions: Vec<Vec<Vec<ActionId>>> = states
            .iter()
            .map(|s| {
                let mut lists = doc.actions[&s.id.to_string()].clone();
                lists.iter_mut().for_each(|l| l.sort_unstable());
                lists
            })
            .collect();
        let mut b = GameBuilder::new(doc.players);
        for s in &states {
            b.add_state_with_id(s.id, &s.name, s.absorbing);
        }
        for (s, lists) in actions.into_iter().enumerate() {
            b.set_actions(s, lists);
        }
        for t in &doc.transitions {
            let dist = Distribution::new(
                t.dist.iter().map(|e| (index[&e.state], scalar::parse(&e.p).expect("validated"))),
            )?;
            b.set_transition(index[&t.state], &t.profile, dist);
        }
        for o in &doc.objectives {
            b.set_objective(
                o.player - 1,
                Objective { kind: o.kind, targets: o.targets.iter().map(|t| index[t]).collect() },
            );
        }
        b.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// Incremental construction used by the generators and the JSON loader.
#[derive(Clone, Debug)]
pub struct GameBuilder {
    players: usize,
    states: Vec<StateInfo>,
    actions: Vec<Vec<Vec<ActionId>>>,
    transitions: Vec<BTreeMap<Vec<ActionId>, Distribution>>,
    objectives: Vec<Option<Objective>>,
}

impl GameBuilder {
    pub fn new(players: usize) -> Self {
        GameBuilder {
            players,
            states: Vec::new(),
            actions: Vec::new(),
            transitions: Vec::new(),
            objectives: vec![None; players],
        }
    }

    pub fn add_state(&mut self, name: &str, absorbing: bool) -> StateId {
        let id = self.states.len() as u32;
        self.add_state_with_id(id, name, absorbing)
    }

    pub fn add_state_with_id(&mut self, id: u32, name: &str, absorbing: bool) -> StateId {
        self.states.push(StateInfo { id, name: name.to_string(), absorbing });
        self.actions.push(vec![vec![0]; self.players]);
        self.transitions.push(BTreeMap::new());
        self.states.len() - 1
    }

    pub fn set_actions(&mut self, s: StateId, lists: Vec<Vec<ActionId>>) {
        self.actions[s] = lists;
    }

    pub fn set_transition(&mut self, s: StateId, profile: &[ActionId], d: Distribution) {
        self.transitions[s].insert(profile.to_vec(), d);
    }

    /// Absorbing state with a single action per player and a self-loop.
    pub fn add_absorbing(&mut self, name: &str) -> StateId {
        let s = self.add_state(name, true);
        self.set_transition(s, &vec![0; self.players], Distribution::pure(s));
        s
    }

    pub fn set_objective(&mut self, player: usize, o: Objective) {
        self.objectives[player] = Some(o);
    }

    pub fn build(self) -> Result<GameStructure> {
        let mut errs = Vec::new();
        let n = self.states.len();
        let mut transitions = Vec::with_capacity(n);
        for s in 0..n {
            let lists = &self.actions[s];
            if lists.len() != self.players {
                errs.push(format!("state {}: expected {} action lists", self.states[s].name, self.players));
                transitions.push(Vec::new());
                continue;
            }
            let mut row = Vec::new();
            let mut profile = vec![0usize; self.players];
            let total: usize = lists.iter().map(|l| l.len()).product();
            for j in 0..total {
                let mut idx = j;
                for p in (0..self.players).rev() {
                    profile[p] = lists[p][idx % lists[p].len()];
                    idx /= lists[p].len();
                }
                match self.transitions[s].get(&profile) {
                    Some(d) => {
                        if d.support().any(|t| t >= n) {
                            errs.push(format!("state {}: successor out of range", self.states[s].name));
                        }
                        row.push(d.clone())
                    }
                    None => {
                        errs.push(format!("state {}: missing transition for profile {:?}", self.states[s].name, profile));
                        row.push(Distribution::pure(s));
                    }
                }
            }
            if self.transitions[s].len() != total {
                errs.push(format!("state {}: transitions for profiles outside the action sets", self.states[s].name));
            }
            if self.states[s].absorbing {
                if total != 1 {
                    errs.push(format!("absorbing state {} has more than one action profile", self.states[s].name));
                } else if row[0] != Distribution::pure(s) {
                    errs.push(format!("absorbing state {} does not loop on itself", self.states[s].name));
                }
            }
            transitions.push(row);
        }
        let objectives: Vec<Objective> = self
            .objectives
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.unwrap_or_else(|| {
                    errs.push(format!("player {} has no objective", i + 1));
                    Objective::reach([])
                })
            })
            .collect();
        if !errs.is_empty() {
            return Err(Error::InvalidGame(errs));
        }
        Ok(GameStructure { states: self.states, players: self.players, actions: self.actions, transitions, objectives })
    }
}

// ---------------------------------------------------------------------------
// File form

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: u32,
    pub name: String,
    pub absorbing: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateProb {
    pub state: u32,
    pub p: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub state: u32,
    pub profile: Vec<ActionId>,
    pub dist: Vec<StateProb>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveDoc {
    pub player: usize,
    pub kind: ObjectiveKind,
    pub targets: Vec<u32>,
}

/// Game as read from or written to JSON. May be ill-formed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameDocument {
    pub states: Vec<StateDoc>,
    pub players: usize,
    pub actions: IndexMap<String, Vec<Vec<ActionId>>>,
    pub transitions: Vec<TransitionDoc>,
    pub objectives: Vec<ObjectiveDoc>,
}

/// Lists every violated well-formedness condition; empty means valid.
pub fn validate_game(doc: &GameDocument) -> Vec<String> {
    let mut v = Vec::new();
    if doc.players == 0 {
        v.push("game has no players".to_string());
    }
    let mut ids = BTreeSet::new();
    for s in &doc.states {
        if !ids.insert(s.id) {
            v.push(format!("duplicate state id {}", s.id));
        }
    }
    let mut names = BTreeSet::new();
    for s in &doc.states {
        if !names.insert(&s.name) {
            v.push(format!("duplicate state name {}", s.name));
        }
    }
    let mut action_sets: BTreeMap<u32, Vec<BTreeSet<ActionId>>> = BTreeMap::new();
    for s in &doc.states {
        match doc.actions.get(&s.id.to_string()) {
            None => v.push(format!("state {} has no action sets", s.id)),
            Some(lists) => {
                if lists.len() != doc.players {
                    v.push(format!("state {} lists {} action sets for {} players", s.id, lists.len(), doc.players));
                }
                let mut sets = Vec::new();
                for (p, l) in lists.iter().enumerate() {
                    let set: BTreeSet<ActionId> = l.iter().copied().collect();
                    if l.is_empty() {
                        v.push(format!("state {} player {} has no actions", s.id, p + 1));
                    }
                    if set.len() != l.len() {
                        v.push(format!("state {} player {} repeats an action", s.id, p + 1));
                    }
                    sets.push(set);
                }
                if s.absorbing && sets.iter().any(|x| x.len() != 1) {
                    v.push(format!("absorbing state {} must have one action per player", s.id));
                }
                action_sets.insert(s.id, sets);
            }
        }
    }
    for key in doc.actions.keys() {
        if !doc.states.iter().any(|s| s.id.to_string() == *key) {
            v.push(format!("action sets given for unknown state {key}"));
        }
    }
    let mut seen: BTreeSet<(u32, Vec<ActionId>)> = BTreeSet::new();
    for t in &doc.transitions {
        let Some(sets) = action_sets.get(&t.state) else {
            v.push(format!("transition from unknown state {}", t.state));
            continue;
        };
        if t.profile.len() != sets.len() || t.profile.iter().zip(sets).any(|(a, s)| !s.contains(a)) {
            v.push(format!("state {}: profile {:?} outside the action sets", t.state, t.profile));
        }
        if !seen.insert((t.state, t.profile.clone())) {
            v.push(format!("state {}: profile {:?} given twice", t.state, t.profile));
        }
        let mut total = Rational::ZERO;
        let mut succ = BTreeSet::new();
        for e in &t.dist {
            if !ids.contains(&e.state) {
                v.push(format!("state {}: successor {} is unknown", t.state, e.state));
            }
            if !succ.insert(e.state) {
                v.push(format!("state {}: successor {} listed twice", t.state, e.state));
            }
            match scalar::parse(&e.p) {
                Ok(p) => {
                    if p < Rational::ZERO {
                        v.push(format!("state {}: negative probability {}", t.state, e.p));
                    }
                    total += p;
                }
                Err(err) => v.push(format!("state {}: {err}", t.state)),
            }
        }
        if total != 1u32 {
            v.push(format!("state {}: profile {:?} probabilities sum to {}", t.state, t.profile, total));
        }
        let st = doc.states.iter().find(|s| s.id == t.state);
        if st.is_some_and(|s| s.absorbing) && !(t.dist.len() == 1 && t.dist[0].state == t.state) {
            v.push(format!("absorbing state {} does not loop on itself", t.state));
        }
    }
    for (id, sets) in &action_sets {
        let expected: usize = sets.iter().map(|s| s.len()).product();
        let got = seen.iter().filter(|(s, _)| s == id).count();
        if got < expected {
            v.push(format!("state {}: {} of {} profiles have no transition", id, expected - got, expected));
        }
    }
    let players: BTreeSet<usize> = doc.objectives.iter().map(|o| o.player).collect();
    if players != (1..=doc.players).collect() || doc.objectives.len() != doc.players {
        v.push(format!("objectives must name each player 1..{} exactly once", doc.players));
    }
    for o in &doc.objectives {
        for t in &o.targets {
            if !ids.contains(t) {
                v.push(format!("objective of player {} names unknown state {}", o.player, t));
            }
        }
    }
    v
}
