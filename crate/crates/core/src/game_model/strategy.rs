use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActionId, Distribution, GameStructure, StateId};
use crate::error::{Error, Result};
use crate::scalar::{self, Natural, Rational, One};

/// Bit mask of alive players; bit `i` is player `i` (zero-based).
pub type AliveSet = u32;

/// Maximum player count supported by alive-set masks.
pub const MAX_PLAYERS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationaryStrategy {
    /// Zero-based player index.
    pub player: usize,
    /// Distribution over action ids. States where the player has a single
    /// action may be omitted.
    pub choice: BTreeMap<StateId, Distribution>,
}

impl StationaryStrategy {
    pub fn new(player: usize) -> Self {
        StationaryStrategy { player, choice: BTreeMap::new() }
    }

    pub fn set(&mut self, s: StateId, d: Distribution) -> &mut Self {
        self.choice.insert(s, d);
        self
    }

    pub fn at<'a>(&'a self, g: &GameStructure, s: StateId) -> Cow<'a, Distribution> {
        match self.choice.get(&s) {
            Some(d) => Cow::Borrowed(d),
            None => Cow::Owned(Distribution::pure(g.actions(s, self.player)[0])),
        }
    }

    pub fn validate(&self, g: &GameStructure) -> Result<()> {
        if self.player >= g.players() {
            return Err(Error::InvalidStrategy(format!("player {} out of range", self.player + 1)));
        }
        for s in 0..g.num_states() {
            let acts = g.actions(s, self.player);
            match self.choice.get(&s) {
                Some(d) => {
                    if let Some(a) = d.support().find(|a| acts.binary_search(a).is_err()) {
                        return Err(Error::InvalidStrategy(format!(
                            "action {a} is not available to player {} at {}",
                            self.player + 1,
                            g.name(s)
                        )));
                    }
                }
                None if acts.len() > 1 => {
                    return Err(Error::InvalidStrategy(format!(
                        "no choice for player {} at {}",
                        self.player + 1,
                        g.name(s)
                    )))
                }
                None => {}
            }
        }
        for &s in self.choice.keys() {
            if s >= g.num_states() {
                return Err(Error::InvalidStrategy(format!("state index {s} out of range")));
            }
        }
        Ok(())
    }

    pub fn distributions(&self) -> impl Iterator<Item = &Distribution> {
        self.choice.values()
    }
}

/// Stationary strategy that may also depend on which players have not yet
/// left their safe sets. After its owner has lost, `fallback` gives a pure
/// positional choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerStationaryStrategy {
    pub player: usize,
    pub choice: BTreeMap<(AliveSet, StateId), Distribution>,
    pub fallback: BTreeMap<StateId, ActionId>,
}

impl PlayerStationaryStrategy {
    pub fn new(player: usize) -> Self {
        PlayerStationaryStrategy { player, choice: BTreeMap::new(), fallback: BTreeMap::new() }
    }

    /// Lifts a stationary strategy: the same choice under every alive set.
    pub fn from_stationary(g: &GameStructure, st: &StationaryStrategy) -> Self {
        let k = g.players();
        let mut out = Self::new(st.player);
        for mask in 0..(1u32 << k) {
            if mask & (1 << st.player) == 0 {
                continue;
            }
            for (&s, d) in &st.choice {
                out.choice.insert((mask, s), d.clone());
            }
        }
        for s in 0..g.num_states() {
            let d = st.at(g, s);
            out.fallback.insert(s, d.support().next().expect("nonempty"));
        }
        out
    }

    pub fn at<'a>(&'a self, g: &GameStructure, alive: AliveSet, s: StateId) -> Result<Cow<'a, Distribution>> {
        let acts = g.actions(s, self.player);
        if alive & (1 << self.player) != 0 {
            if let Some(d) = self.choice.get(&(alive, s)) {
                return Ok(Cow::Borrowed(d));
            }
        } else if let Some(&a) = self.fallback.get(&s) {
            return Ok(Cow::Owned(Distribution::pure(a)));
        }
        if acts.len() == 1 {
            Ok(Cow::Owned(Distribution::pure(acts[0])))
        } else {
            Err(Error::InvalidStrategy(format!(
                "player {} has no choice at {} with alive set {:#b}",
                self.player + 1,
                g.name(s),
                alive
            )))
        }
    }

    pub fn distributions(&self) -> impl Iterator<Item = &Distribution> {
        self.choice.values()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Stationary(StationaryStrategy),
    PlayerStationary(PlayerStationaryStrategy),
}

impl Strategy {
    pub fn player(&self) -> usize {
        match self {
            Strategy::Stationary(s) => s.player,
            Strategy::PlayerStationary(s) => s.player,
        }
    }

    pub fn distributions(&self) -> Box<dyn Iterator<Item = &Distribution> + '_> {
        match self {
            Strategy::Stationary(s) => Box::new(s.distributions()),
            Strategy::PlayerStationary(s) => Box::new(s.distributions()),
        }
    }

    pub fn to_document(&self, g: &GameStructure) -> StrategyDocument {
        let id = |s: StateId| g.state(s).id;
        let dist = |d: &Distribution| {
            d.iter()
                .map(|(a, p)| ActionProb { action: a, p: scalar::format(p) })
                .collect()
        };
        match self {
            Strategy::Stationary(st) => StrategyDocument {
                player: st.player + 1,
                kind: StrategyKind::Stationary,
                choice: st
                    .choice
                    .iter()
                    .map(|(&s, d)| ChoiceDoc { state: id(s), alive: None, dist: dist(d) })
                    .collect(),
                fallback: None,
            },
            Strategy::PlayerStationary(st) => {
                let mut choice: Vec<_> = st.choice.iter().collect();
                choice.sort_by_key(|((mask, s), _)| (*s, *mask));
                StrategyDocument {
                    player: st.player + 1,
                    kind: StrategyKind::PlayerStationary,
                    choice: choice
                        .into_iter()
                        .map(|(&(mask, s), d)| ChoiceDoc {
                            state: id(s),
                            alive: Some((0..MAX_PLAYERS).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()),
                            dist: dist(d),
                        })
                        .collect(),
                    fallback: Some(
                        st.fallback.iter().map(|(&s, &a)| FallbackDoc { state: id(s), action: a }).collect(),
                    ),
                }
            }
        }
    }

    pub fn from_document(doc: &StrategyDocument, g: &GameStructure) -> Result<Self> {
        if doc.player == 0 || doc.player > g.players() {
            return Err(Error::InvalidStrategy(format!("player {} out of range", doc.player)));
        }
        let player = doc.player - 1;
        let state = |id: u32| {
            g.state_by_id(id).ok_or_else(|| Error::InvalidStrategy(format!("unknown state id {id}")))
        };
        let dist = |c: &ChoiceDoc| -> Result<Distribution> {
            let mut entries = Vec::new();
            for e in &c.dist {
                entries.push((e.action, scalar::parse(&e.p)?));
            }
            Distribution::new(entries)
        };
        match doc.kind {
            StrategyKind::Stationary => {
                let mut st = StationaryStrategy::new(player);
                for c in &doc.choice {
                    if c.alive.is_some() {
                        return Err(Error::InvalidStrategy("stationary choice with an alive set".into()));
                    }
                    if st.choice.insert(state(c.state)?, dist(c)?).is_some() {
                        return Err(Error::InvalidStrategy(format!("state {} given twice", c.state)));
                    }
                }
                st.validate(g)?;
                Ok(Strategy::Stationary(st))
            }
            StrategyKind::PlayerStationary => {
                if g.players() > MAX_PLAYERS {
                    return Err(Error::InvalidStrategy(format!("at most {MAX_PLAYERS} players supported")));
                }
                let mut st = PlayerStationaryStrategy::new(player);
                for c in &doc.choice {
                    let alive = c
                        .alive
                        .as_ref()
                        .ok_or_else(|| Error::InvalidStrategy("player-stationary choice without alive set".into()))?;
                    let mut mask: AliveSet = 0;
                    for &i in alive {
                        if i == 0 || i > g.players() {
                            return Err(Error::InvalidStrategy(format!("alive player {i} out of range")));
                        }
                        mask |= 1 << (i - 1);
                    }
                    if mask & (1 << player) == 0 {
                        return Err(Error::InvalidStrategy("choice for an alive set without its owner".into()));
                    }
                    st.choice.insert((mask, state(c.state)?), dist(c)?);
                }
                for f in doc.fallback.iter().flatten() {
                    st.fallback.insert(state(f.state)?, f.action);
                }
                Ok(Strategy::PlayerStationary(st))
            }
        }
    }
}

/// One strategy per player, all of the same kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyProfile {
    Stationary(Vec<StationaryStrategy>),
    PlayerStationary(Vec<PlayerStationaryStrategy>),
}

impl StrategyProfile {
    pub fn from_strategies(g: &GameStructure, list: Vec<Strategy>) -> Result<Self> {
        if list.len() != g.players() {
            return Err(Error::InvalidStrategy(format!("profile has {} strategies for {} players", list.len(), g.players())));
        }
        let mut list = list;
        list.sort_by_key(|s| s.player());
        if list.iter().enumerate().any(|(i, s)| s.player() != i) {
            return Err(Error::InvalidStrategy("profile must hold one strategy per player".into()));
        }
        if list.iter().all(|s| matches!(s, Strategy::Stationary(_))) {
            Ok(StrategyProfile::Stationary(
                list.into_iter()
                    .map(|s| match s {
                        Strategy::Stationary(x) => x,
                        _ => unreachable!(),
                    })
                    .collect(),
            ))
        } else if list.iter().all(|s| matches!(s, Strategy::PlayerStationary(_))) {
            Ok(StrategyProfile::PlayerStationary(
                list.into_iter()
                    .map(|s| match s {
                        Strategy::PlayerStationary(x) => x,
                        _ => unreachable!(),
                    })
                    .collect(),
            ))
        } else {
            Err(Error::InvalidStrategy("profile mixes stationary and player-stationary strategies".into()))
        }
    }

    pub fn strategies(&self) -> Vec<Strategy> {
        match self {
            StrategyProfile::Stationary(v) => v.iter().cloned().map(Strategy::Stationary).collect(),
            StrategyProfile::PlayerStationary(v) => v.iter().cloned().map(Strategy::PlayerStationary).collect(),
        }
    }

    pub fn to_document(&self, g: &GameStructure) -> ProfileDocument {
        ProfileDocument { strategies: self.strategies().iter().map(|s| s.to_document(g)).collect() }
    }

    pub fn from_document(doc: &ProfileDocument, g: &GameStructure) -> Result<Self> {
        let list = doc.strategies.iter().map(|d| Strategy::from_document(d, g)).collect::<Result<Vec<_>>>()?;
        Self::from_strategies(g, list)
    }

    pub fn from_json(text: &str, g: &GameStructure) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?, g)
    }

    pub fn to_json(&self, g: &GameStructure) -> String {
        serde_json::to_string_pretty(&self.to_document(g)).expect("serializable")
    }
}

/// Patience and roundedness of a strategy: maxima over all its distributions.
/// A strategy with no mixed choices has patience 1 and roundedness 1.
pub fn strategy_patience(sigma: &Strategy) -> (Rational, Natural) {
    let mut pat = Rational::ONE;
    let mut rnd = Natural::ONE;
    for d in sigma.distributions() {
        pat = pat.max(d.patience());
        rnd = rnd.max(d.roundedness());
    }
    (pat, rnd)
}

// ---------------------------------------------------------------------------
// File form

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Stationary,
    PlayerStationary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionProb {
    pub action: ActionId,
    pub p: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceDoc {
    pub state: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alive: Option<Vec<usize>>,
    pub dist: Vec<ActionProb>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackDoc {
    pub state: u32,
    pub action: ActionId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDocument {
    pub player: usize,
    pub kind: StrategyKind,
    pub choice: Vec<ChoiceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<Vec<FallbackDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub strategies: Vec<StrategyDocument>,
}
