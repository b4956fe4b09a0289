use std::collections::BTreeSet;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{domain, Result};
use crate::game_model::{GameStructure, ObjectiveKind, StateId, StrategyProfile};
use crate::mdp_solver::{chain_payoff, fix_strategies, MarkovChain};
use crate::scalar::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub start: StateId,
    pub horizon: usize,
    pub episodes: u64,
    pub seed: u64,
    /// Episodes in which each player's objective held up to the horizon.
    pub wins: Vec<u64>,
    pub frequency: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Exact infinite-horizon payoffs of the induced chain.
    pub exact: Vec<Rational>,
}

impl SimulationReport {
    pub fn to_json(&self, g: &GameStructure) -> serde_json::Value {
        let players: Vec<_> = (0..self.wins.len())
            .map(|i| {
                json!({
                    "player": i + 1,
                    "wins": self.wins[i],
                    "frequency": self.frequency[i],
                    "std_error": self.std_error[i],
                    "exact": scalar::format(&self.exact[i]),
                })
            })
            .collect();
        json!({
            "start": g.name(self.start),
            "horizon": self.horizon,
            "episodes": self.episodes,
            "seed": self.seed,
            "players": players,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("player,wins,episodes,frequency,std_error,exact\n");
        for i in 0..self.wins.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                self.wins[i],
                self.episodes,
                self.frequency[i],
                self.std_error[i],
                scalar::format(&self.exact[i])
            ));
        }
        out
    }
}

/// Successor table with cumulative thresholds scaled to `2^64`.
struct Sampler {
    rows: Vec<Vec<(u128, usize)>>,
    absorbing: Vec<bool>,
}

impl Sampler {
    fn new(mc: &MarkovChain) -> Self {
        let scale = scalar::Rational::from(scalar::Natural::from(1u128 << 64));
        let rows = mc
            .transitions
            .iter()
            .map(|d| {
                let mut cum = Rational::from(0u32);
                d.iter()
                    .map(|(t, p)| {
                        cum += p;
                        let th = scalar::floor(&(&cum * &scale));
                        (u128::try_from(&th).unwrap_or(u128::MAX), t)
                    })
                    .collect()
            })
            .collect();
        let absorbing = mc.transitions.iter().enumerate().map(|(i, d)| d.is_pure() && d.prob(i) == 1u32).collect();
        Sampler { rows, absorbing }
    }

    fn step(&self, s: usize, rng: &mut SplitMix64) -> usize {
        let r = rng.next_u64() as u128;
        let row = &self.rows[s];
        row.iter().find(|&&(th, _)| r < th).map_or(row[row.len() - 1].1, |&(_, t)| t)
    }
}

/// Monte Carlo estimate of each player's winning frequency from `start`
/// under a fully specified profile. Every episode draws its own SplitMix64
/// seed from a master generator, so results do not depend on scheduling.
pub fn simulate_play(
    g: &GameStructure,
    profile: &StrategyProfile,
    start: StateId,
    horizon: usize,
    episodes: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if start >= g.num_states() {
        return Err(domain(format!("unknown start state {start}")));
    }
    let fixed: Vec<_> = profile.strategies().into_iter().map(Some).collect();
    if fixed.len() != g.players() {
        return Err(domain("the profile must fix every player"));
    }
    let mc = fix_strategies(g, &fixed)?.into_chain()?;
    let s0 = mc.start(start).ok_or_else(|| domain("start state missing from the induced chain"))?;
    let sampler = Sampler::new(&mc);
    let objectives: Vec<(ObjectiveKind, BTreeSet<usize>)> =
        g.objectives().iter().map(|o| (o.kind, mc.lift_set(&o.targets))).collect();
    let exact = objectives
        .iter()
        .zip(g.objectives())
        .map(|(_, o)| chain_payoff(&mc, o.kind, &o.targets).0[s0].clone())
        .collect();

    let mut master = SplitMix64::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..episodes).map(|_| master.next_u64()).collect();
    let k = objectives.len();
    let wins = seeds
        .par_iter()
        .map(|&es| {
            let mut rng = SplitMix64::seed_from_u64(es);
            let outcome = run_episode(&sampler, &objectives, s0, horizon, &mut rng);
            outcome.into_iter().map(u64::from).collect::<Vec<u64>>()
        })
        .reduce(|| vec![0; k], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());

    let n = episodes.max(1) as f64;
    let frequency: Vec<f64> = wins.iter().map(|&w| w as f64 / n).collect();
    let std_error = frequency.iter().map(|&f| (f * (1.0 - f) / n).sqrt()).collect();
    Ok(SimulationReport { start, horizon, episodes, seed, wins, frequency, std_error, exact })
}

fn run_episode(
    sampler: &Sampler,
    objectives: &[(ObjectiveKind, BTreeSet<usize>)],
    s0: usize,
    horizon: usize,
    rng: &mut SplitMix64,
) -> Vec<bool> {
    let mut reached = vec![false; objectives.len()];
    let mut left = vec![false; objectives.len()];
    let mut s = s0;
    let mut t = 0;
    loop {
        for (i, (kind, set)) in objectives.iter().enumerate() {
            match kind {
                ObjectiveKind::Reach => reached[i] |= set.contains(&s),
                ObjectiveKind::Safety => left[i] |= !set.contains(&s),
            }
        }
        if t == horizon || sampler.absorbing[s] {
            break;
        }
        s = sampler.step(s, rng);
        t += 1;
    }
    objectives
        .iter()
        .enumerate()
        .map(|(i, (kind, _))| match kind {
            ObjectiveKind::Reach => reached[i],
            ObjectiveKind::Safety => !left[i],
        })
        .collect()
}
