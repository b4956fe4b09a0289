use crate::error::{domain, Result};
use crate::game_model::{Distribution, StrategyProfile};
use crate::scalar::{self, Integer, Natural, Rational, Zero};

/// Rounds `d` to probabilities `p/q` with every coordinate off by less than
/// `1/q`.
///
/// Coordinates are floored and the missing units go to coordinates with a
/// positive remainder, preferring those that would otherwise drop to zero,
/// then larger remainders, then lower outcome ids. The support never grows,
/// and it is preserved whenever that is possible within the error bound.
pub fn round_distribution(d: &Distribution, q: &Natural) -> Result<Distribution> {
    if *q < d.len() as u64 {
        return Err(domain(format!("q = {q} is smaller than the support size {}", d.len())));
    }
    let qr = Rational::from(q.clone());
    let parts: Vec<(usize, Integer, Rational)> = d
        .iter()
        .map(|(x, p)| {
            let scaled = p * &qr;
            let fl = scalar::floor(&scaled);
            let frac = scaled - Rational::from(fl.clone());
            (x, fl, frac)
        })
        .collect();
    let floor_sum: Integer = parts.iter().map(|e| e.1.clone()).sum();
    let missing = Integer::from(q.clone()) - floor_sum;
    let missing = usize::try_from(&missing).expect("fewer missing units than outcomes");
    let mut order: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].2 > Rational::ZERO).collect();
    order.sort_by(|&a, &b| {
        let za = parts[a].1 == Integer::ZERO;
        let zb = parts[b].1 == Integer::ZERO;
        zb.cmp(&za).then_with(|| parts[b].2.cmp(&parts[a].2)).then(a.cmp(&b))
    });
    let mut units: Vec<Integer> = parts.iter().map(|e| e.1.clone()).collect();
    for &i in order.iter().take(missing) {
        units[i] += Integer::from(1);
    }
    Distribution::new(
        parts
            .iter()
            .zip(units)
            .map(|(e, u)| (e.0, Rational::from_integers(u, Integer::from(q.clone())))),
    )
}

/// Applies [`round_distribution`] to every mixed choice of every strategy.
pub fn round_profile(profile: &StrategyProfile, q: &Natural) -> Result<StrategyProfile> {
    Ok(match profile {
        StrategyProfile::Stationary(list) => {
            let mut out = list.clone();
            for st in &mut out {
                for d in st.choice.values_mut() {
                    *d = round_distribution(d, q)?;
                }
            }
            StrategyProfile::Stationary(out)
        }
        StrategyProfile::PlayerStationary(list) => {
            let mut out = list.clone();
            for st in &mut out {
                for d in st.choice.values_mut() {
                    *d = round_distribution(d, q)?;
                }
            }
            StrategyProfile::PlayerStationary(out)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn dist(v: &[(usize, i64, i64)]) -> Distribution {
        Distribution::new(v.iter().map(|&(x, n, d)| (x, q(n, d)))).unwrap()
    }

    #[test]
    fn small_examples() {
        let d = dist(&[(1, 1, 3), (2, 2, 3)]);
        let r = round_distribution(&d, &Natural::from(4u32)).unwrap();
        assert_eq!(r, dist(&[(1, 1, 4), (2, 3, 4)]));
        let d = dist(&[(0, 1, 4), (1, 3, 4)]);
        assert_eq!(round_distribution(&d, &Natural::from(4u32)).unwrap(), d);
        let p = Distribution::pure(3);
        assert_eq!(round_distribution(&p, &Natural::from(1u32)).unwrap(), p);
        assert!(round_distribution(&dist(&[(0, 1, 3), (1, 1, 3), (2, 1, 3)]), &Natural::from(2u32)).is_err());
    }

    #[test]
    fn keeps_tiny_coordinates() {
        let d = dist(&[(0, 1, 100), (1, 99, 100)]);
        let r = round_distribution(&d, &Natural::from(3u32)).unwrap();
        assert_eq!(r, dist(&[(0, 1, 3), (1, 2, 3)]));
    }
}
