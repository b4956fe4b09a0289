//! Independent oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use csg_core::game_model::{Distribution, ObjectiveKind};
use csg_core::matrix_game::MatrixGame;
use csg_core::mdp_solver::{InducedMDP, MdpObjective, Origin, Sense};
use csg_core::scalar::{One, Rational, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

/// Positive integer weights `1..=max_weight` on `outcomes`, normalized.
pub fn random_distribution(rng: &mut Rng, outcomes: &[usize], max_weight: i64) -> Distribution {
    let w: Vec<i64> = outcomes.iter().map(|_| rng.range(1, max_weight)).collect();
    let total: i64 = w.iter().sum();
    Distribution::new(outcomes.iter().zip(&w).map(|(&o, &x)| (o, Rational::from_signeds(x, total)))).unwrap()
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> MatrixGame {
    let e = (0..rows * cols).map(|_| Rational::from_signeds(rng.range(-6, 6), rng.range(1, 4))).collect();
    MatrixGame::new(rows, cols, e).unwrap()
}

/// Unique solution of a square system, or `None` when singular.
pub fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != 0u32)?;
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c && a[r][c] != 0u32 {
                let f = &a[r][c] / &a[c][c];
                for k in c..n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
                let t = &f * &b[c];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
}

/// Value of a matrix game by enumerating equal-size support pairs and
/// keeping the first pair whose equalizing strategies certify each other.
pub fn support_enumeration_value(m: &MatrixGame) -> Rational {
    let (r, c) = (m.rows(), m.cols());
    for k in 1..=r.min(c) {
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                // Unknowns x_rows, v: sum_i x_i a_ij = v for j in cols, sum x = 1.
                let mut a = Vec::new();
                let mut b = Vec::new();
                for &j in &cols {
                    let mut row: Vec<Rational> = rows.iter().map(|&i| m.get(i, j).clone()).collect();
                    row.push(-Rational::ONE);
                    a.push(row);
                    b.push(Rational::ZERO);
                }
                let mut last = vec![Rational::ONE; k];
                last.push(Rational::ZERO);
                a.push(last);
                b.push(Rational::ONE);
                let Some(x) = gauss(a, b) else { continue };
                let mut a = Vec::new();
                let mut b = Vec::new();
                for &i in &rows {
                    let mut row: Vec<Rational> = cols.iter().map(|&j| m.get(i, j).clone()).collect();
                    row.push(-Rational::ONE);
                    a.push(row);
                    b.push(Rational::ZERO);
                }
                let mut last = vec![Rational::ONE; k];
                last.push(Rational::ZERO);
                a.push(last);
                b.push(Rational::ONE);
                let Some(y) = gauss(a, b) else { continue };
                if x[..k].iter().chain(&y[..k]).any(|p| *p < 0u32) || x[k] != y[k] {
                    continue;
                }
                let v = &x[k];
                let row_ok = (0..c).all(|j| {
                    rows.iter().zip(&x).fold(Rational::ZERO, |acc, (&i, p)| acc + p * m.get(i, j)) >= *v
                });
                let col_ok = (0..r).all(|i| {
                    cols.iter().zip(&y).fold(Rational::ZERO, |acc, (&j, p)| acc + p * m.get(i, j)) <= *v
                });
                if row_ok && col_ok {
                    return v.clone();
                }
            }
        }
    }
    panic!("support enumeration found no equilibrium");
}

pub fn random_mdp(rng: &mut Rng, max_states: usize, max_actions: usize) -> InducedMDP {
    let n = rng.range(2, max_states as i64) as usize;
    let mut actions = Vec::new();
    let mut transitions = Vec::new();
    for _ in 0..n {
        let k = rng.range(1, max_actions as i64) as usize;
        actions.push((0..k).collect::<Vec<_>>());
        transitions.push(
            (0..k)
                .map(|_| {
                    let width = rng.range(1, 3) as usize;
                    let mut succ: Vec<usize> = (0..width).map(|_| rng.below(n as u64) as usize).collect();
                    succ.sort();
                    succ.dedup();
                    random_distribution(rng, &succ, 3)
                })
                .collect(),
        );
    }
    let targets: BTreeSet<usize> = (0..n).filter(|_| rng.below(3) == 0).collect();
    let kind = if rng.below(2) == 0 { ObjectiveKind::Reach } else { ObjectiveKind::Safety };
    let sense = if rng.below(2) == 0 { Sense::Maximize } else { Sense::Minimize };
    InducedMDP {
        labels: (0..n).map(|i| format!("s{i}")).collect(),
        origin: (0..n).map(|s| Origin { state: s, alive: None }).collect(),
        controller: None,
        actions,
        transitions,
        objective: MdpObjective { kind, targets, sense },
    }
}

/// Probability of ever visiting `target` in the chain `rows`.
pub fn chain_reach(rows: &[&Distribution], target: &BTreeSet<usize>) -> Vec<Rational> {
    let n = rows.len();
    let mut can = target.clone();
    loop {
        let before = can.len();
        for s in 0..n {
            if rows[s].support().any(|t| can.contains(&t)) {
                can.insert(s);
            }
        }
        if can.len() == before {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|s| can.contains(s) && !target.contains(s)).collect();
    let pos = |s: usize| unknown.iter().position(|&u| u == s);
    let mut a = vec![vec![Rational::ZERO; unknown.len()]; unknown.len()];
    let mut b = vec![Rational::ZERO; unknown.len()];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] += Rational::ONE;
        for (t, p) in rows[s].iter() {
            if target.contains(&t) {
                b[i] += p;
            } else if let Some(k) = pos(t) {
                a[i][k] -= p;
            }
        }
    }
    let x = gauss(a, b).expect("transient part is nonsingular");
    (0..n)
        .map(|s| {
            if target.contains(&s) {
                Rational::ONE
            } else {
                pos(s).map_or(Rational::ZERO, |i| x[i].clone())
            }
        })
        .collect()
}

/// Pointwise optimum of the objective over every positional policy.
pub fn brute_force_mdp(mdp: &InducedMDP) -> Vec<Rational> {
    let n = mdp.transitions.len();
    let o = &mdp.objective;
    let mut best: Option<Vec<Rational>> = None;
    let mut choice = vec![0usize; n];
    loop {
        let rows: Vec<&Distribution> = (0..n).map(|s| &mdp.transitions[s][choice[s]]).collect();
        let payoff = match o.kind {
            ObjectiveKind::Reach => chain_reach(&rows, &o.targets),
            ObjectiveKind::Safety => {
                let bad: BTreeSet<usize> = (0..n).filter(|s| !o.targets.contains(s)).collect();
                chain_reach(&rows, &bad).into_iter().map(|x| Rational::ONE - x).collect()
            }
        };
        best = Some(match best {
            None => payoff,
            Some(b) => b
                .into_iter()
                .zip(payoff)
                .map(|(x, y)| match o.sense {
                    Sense::Maximize => x.max(y),
                    Sense::Minimize => x.min(y),
                })
                .collect(),
        });
        let mut i = 0;
        loop {
            if i == n {
                return best.unwrap();
            }
            choice[i] += 1;
            if choice[i] < mdp.transitions[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
