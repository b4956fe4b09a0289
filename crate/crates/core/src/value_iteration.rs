//! Value iteration for zero-sum concurrent reachability games through the
//! local matrix games `A^s[v]`.

use std::ops::Index;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::game_model::{Distribution, GameStructure, StateId, StationaryStrategy};
use crate::matrix_game::{matrix_value, solve_matrix_game, MatrixGame};
use crate::scalar::{self, One, Rational, Zero};

/// Default cap on the bit length of any single rational.
pub const DEFAULT_MAX_BITS: u64 = 1_000_000;

/// Reads the bit cap from `CSG_MAX_BITS`, falling back to the default.
pub fn max_bits_from_env() -> u64 {
    std::env::var("CSG_MAX_BITS").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_BITS)
}

/// One value per game state, in state order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueVector(pub Vec<Rational>);

impl Index<StateId> for ValueVector {
    type Output = Rational;

    fn index(&self, s: StateId) -> &Rational {
        &self.0[s]
    }
}

impl ValueVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_bits(&self) -> u64 {
        self.0.iter().map(scalar::bits).max().unwrap_or(0)
    }

    /// `{name: "num/den"}` in state order.
    pub fn to_json(&self, g: &GameStructure) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (s, v) in self.0.iter().enumerate() {
            m.insert(g.name(s).to_string(), scalar::format(v).into());
        }
        m.into()
    }

    /// CSV rows `state,value` sorted by state id.
    pub fn to_csv(&self, g: &GameStructure) -> String {
        let mut order: Vec<StateId> = (0..self.0.len()).collect();
        order.sort_by_key(|&s| g.state(s).id);
        let mut out = String::from("state,value\n");
        for s in order {
            out.push_str(&format!("{},{}\n", g.name(s), scalar::format(&self.0[s])));
        }
        out
    }

    /// Inverse of [`ValueVector::to_json`]; every state must be present.
    pub fn from_json(g: &GameStructure, text: &str) -> Result<Self> {
        let map: std::collections::BTreeMap<String, String> = serde_json::from_str(text)?;
        if let Some(k) = map.keys().find(|k| g.state_by_name(k).is_none()) {
            return Err(Error::Parse(format!("unknown state {k:?}")));
        }
        (0..g.num_states())
            .map(|s| {
                let v = map.get(g.name(s)).ok_or_else(|| Error::Parse(format!("missing value for {}", g.name(s))))?;
                scalar::parse(v)
            })
            .collect::<Result<Vec<_>>>()
            .map(ValueVector)
    }
}

/// `A^s[v]`: rows are player 1's actions, columns player 2's, entries the
/// expected successor value.
pub fn local_matrix(g: &GameStructure, s: StateId, v: &ValueVector) -> Result<MatrixGame> {
    if g.players() != 2 {
        return Err(domain("local matrices need exactly two players"));
    }
    if g.is_absorbing(s) {
        return Err(domain(format!("state {} is absorbing", g.name(s))));
    }
    let rows = g.actions(s, 0).len();
    let cols = g.actions(s, 1).len();
    let entries = (0..rows * cols)
        .map(|j| g.transition(s, j).iter().map(|(t, p)| p * &v[t]).sum())
        .collect();
    MatrixGame::new(rows, cols, entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    BudgetExhausted,
    GapBelowThreshold,
    FixpointReached,
}

#[derive(Clone, Debug)]
pub struct IterationConfig {
    pub budget: usize,
    /// Stop once every one-step improvement is below this. A stall
    /// heuristic only; it certifies nothing about distance to the value.
    pub gap_threshold: Option<Rational>,
    pub max_bits: u64,
}

impl IterationConfig {
    pub fn new(budget: usize) -> Self {
        IterationConfig { budget, gap_threshold: None, max_bits: DEFAULT_MAX_BITS }
    }
}

#[derive(Clone, Debug)]
pub struct IterationTrace {
    /// `trace[t]` is `v^t`.
    pub trace: Vec<ValueVector>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    pub fn last(&self) -> &ValueVector {
        self.trace.last().expect("v^0 always present")
    }

    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[0].0.iter().zip(&w[1].0).all(|(a, b)| a <= b))
    }

    /// CSV rows `t,state,value`.
    pub fn to_csv(&self, g: &GameStructure) -> String {
        let mut out = String::from("t,state,value\n");
        for (t, v) in self.trace.iter().enumerate() {
            for (s, x) in v.0.iter().enumerate() {
                out.push_str(&format!("{t},{},{}\n", g.name(s), scalar::format(x)));
            }
        }
        out
    }
}

/// Indicator of player 1's reach targets.
pub fn initial_vector(g: &GameStructure) -> ValueVector {
    let t = g.reach_targets();
    ValueVector((0..g.num_states()).map(|s| if t.contains(&s) { Rational::ONE } else { Rational::ZERO }).collect())
}

/// One step: `v'(s) = val(A^s[v])` off the targets.
pub fn iterate_once(g: &GameStructure, v: &ValueVector) -> ValueVector {
    let targets = g.reach_targets();
    ValueVector(
        (0..g.num_states())
            .into_par_iter()
            .map(|s| {
                if targets.contains(&s) {
                    Rational::ONE
                } else if g.is_absorbing(s) {
                    Rational::ZERO
                } else {
                    matrix_value(&local_matrix(g, s, v).expect("two-player game"))
                }
            })
            .collect(),
    )
}

/// Everett iteration from the target indicator.
pub fn value_iterate(g: &GameStructure, cfg: &IterationConfig) -> Result<IterationTrace> {
    g.require_zero_sum()?;
    let mut trace = vec![initial_vector(g)];
    for _ in 0..cfg.budget {
        let cur = trace.last().unwrap();
        if cur.max_bits() > cfg.max_bits {
            return Ok(IterationTrace { trace, stop_reason: StopReason::BudgetExhausted });
        }
        let next = iterate_once(g, cur);
        if next == *cur {
            return Ok(IterationTrace { trace, stop_reason: StopReason::FixpointReached });
        }
        let stalled = cfg
            .gap_threshold
            .as_ref()
            .is_some_and(|th| next.0.iter().zip(&cur.0).all(|(a, b)| &(a - b) < th));
        trace.push(next);
        if stalled {
            return Ok(IterationTrace { trace, stop_reason: StopReason::GapBelowThreshold });
        }
    }
    Ok(IterationTrace { trace, stop_reason: StopReason::BudgetExhausted })
}

/// `val(A^s[v]) - v(s)` at every non-absorbing state off the targets, zero
/// elsewhere. All zero means `v` is a fixpoint.
pub fn fixpoint_residual(g: &GameStructure, v: &ValueVector) -> Result<ValueVector> {
    g.require_zero_sum()?;
    let targets = g.reach_targets();
    Ok(ValueVector(
        (0..g.num_states())
            .into_par_iter()
            .map(|s| {
                if targets.contains(&s) {
                    Rational::ONE - &v[s]
                } else if g.is_absorbing(s) {
                    -v[s].clone()
                } else {
                    matrix_value(&local_matrix(g, s, v).expect("two-player game")) - &v[s]
                }
            })
            .collect(),
    ))
}

/// Locally optimal stationary strategy for `player` (zero-based) against `v`.
pub fn greedy_strategy_from_values(g: &GameStructure, v: &ValueVector, player: usize) -> Result<StationaryStrategy> {
    g.require_zero_sum()?;
    if player > 1 {
        return Err(domain("player index out of range"));
    }
    let mut st = StationaryStrategy::new(player);
    for s in 0..g.num_states() {
        let acts = g.actions(s, player);
        if g.is_absorbing(s) || acts.len() == 1 {
            continue;
        }
        let sol = solve_matrix_game(&local_matrix(g, s, v)?);
        let d = if player == 0 { &sol.row_strategy } else { &sol.col_strategy };
        st.set(s, d.map(|i| acts[i]));
    }
    Ok(st)
}

/// Positional choice of the first action everywhere; handy as a base.
pub fn first_action_strategy(g: &GameStructure, player: usize) -> StationaryStrategy {
    let mut st = StationaryStrategy::new(player);
    for s in 0..g.num_states() {
        st.set(s, Distribution::pure(g.actions(s, player)[0]));
    }
    st
}
