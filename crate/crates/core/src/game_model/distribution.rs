use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{Natural, One, Rational, Zero};

/// Finite probability distribution over `usize` outcomes (states or action ids).
///
/// Stored sorted by outcome with strictly positive probabilities summing to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Distribution {
    entries: Vec<(usize, Rational)>,
}

impl Distribution {
    /// Zero entries are dropped. Negative entries, repeated outcomes and a
    /// total other than 1 are errors.
    pub fn new(entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, p) in entries {
            if p < Rational::ZERO {
                return Err(Error::InvalidDistribution(format!("negative probability {p} on {x}")));
            }
            if map.insert(x, p).is_some() {
                return Err(Error::InvalidDistribution(format!("outcome {x} listed twice")));
            }
        }
        let total: Rational = map.values().sum();
        if total != Rational::ONE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let entries = map.into_iter().filter(|(_, p)| *p > Rational::ZERO).collect();
        Ok(Distribution { entries })
    }

    /// Like [`Distribution::new`] but repeated outcomes are merged.
    pub fn accumulate(entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (x, p) in entries {
            *map.entry(x).or_insert(Rational::ZERO) += p;
        }
        Self::new(map)
    }

    pub fn pure(x: usize) -> Self {
        Distribution { entries: vec![(x, Rational::ONE)] }
    }

    pub fn uniform(outcomes: &[usize]) -> Self {
        let w = Rational::from_unsigneds(1u64, outcomes.len() as u64);
        Self::new(outcomes.iter().map(|&x| (x, w.clone()))).expect("uniform over distinct outcomes")
    }

    pub fn prob(&self, x: usize) -> Rational {
        match self.entries.binary_search_by_key(&x, |e| e.0) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Rational::ZERO,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.entries.iter().map(|(x, p)| (*x, p))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_pure(&self) -> bool {
        self.entries.len() == 1
    }

    /// Inverse of the smallest positive probability.
    pub fn patience(&self) -> Rational {
        let min = self.entries.iter().map(|e| &e.1).min().expect("nonempty");
        Rational::ONE / min.clone()
    }

    /// Largest denominator among the probabilities.
    pub fn roundedness(&self) -> Natural {
        self.entries
            .iter()
            .map(|e| e.1.denominator_ref().clone())
            .max()
            .expect("nonempty")
    }

    /// Half the L1 distance.
    pub fn variation_distance(&self, other: &Distribution) -> Rational {
        let mut keys: Vec<usize> = self.support().chain(other.support()).collect();
        keys.sort_unstable();
        keys.dedup();
        let mut sum = Rational::ZERO;
        for k in keys {
            let d = self.prob(k) - other.prob(k);
            sum += if d < Rational::ZERO { -d } else { d };
        }
        sum / Rational::from(2u32)
    }

    /// Pushes the distribution forward along `f`, merging collisions.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Distribution {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (x, p) in &self.entries {
            *map.entry(f(*x)).or_insert(Rational::ZERO) += p;
        }
        Distribution { entries: map.into_iter().collect() }
    }

    /// Mixture `Σ w_i d_i`; weights must sum to 1.
    pub fn mix<'a>(parts: impl IntoIterator<Item = (Rational, &'a Distribution)>) -> Distribution {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (w, d) in parts {
            if w == Rational::ZERO {
                continue;
            }
            for (x, p) in &d.entries {
                *map.entry(*x).or_insert(Rational::ZERO) += &w * p;
            }
        }
        let d = Distribution { entries: map.into_iter().filter(|e| e.1 > Rational::ZERO).collect() };
        debug_assert_eq!(d.entries.iter().map(|e| &e.1).sum::<Rational>(), Rational::ONE);
        d
    }
}
