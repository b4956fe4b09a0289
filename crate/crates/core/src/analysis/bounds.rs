use std::str::FromStr;

use malachite::num::arithmetic::traits::CheckedRoot;
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::scalar::{self, Integer, Natural, One, Pow, Rational, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundName {
    /// Horizon `ℓ = n·k·ln(4k/ε)·δ^{-n}`.
    Ell,
    /// Rounding denominator `q = 4n·k²·m·ε^{-1}·ln(4k/ε)·δ^{-n}`.
    Q,
    /// `1/2 + 2^{(1-m)·m^{n-j} - 1}`, above `val(v^1_j)`.
    DuelValue,
    /// `2^{(m-1)²·m^{n-j-1}}`, below the patience of optimal strategies at `v^1_j`.
    DuelPatience,
    /// `δ^{-(n-3)/6}` for the safety duel with `n` states.
    SafetyPatience,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::Ell => "ell",
            BoundName::Q => "q",
            BoundName::DuelValue => "duel-value",
            BoundName::DuelPatience => "duel-patience",
            BoundName::SafetyPatience => "safety-patience",
        }
    }
}

impl FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ell" => BoundName::Ell,
            "q" => BoundName::Q,
            "duel-value" => BoundName::DuelValue,
            "duel-patience" => BoundName::DuelPatience,
            "safety-patience" => BoundName::SafetyPatience,
            _ => return Err(domain(format!("unknown bound {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// The named quantity lies below the bound; rounding went up.
    Upper,
    /// The named quantity lies above the bound.
    Lower,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundParams {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub m: Option<u64>,
    pub j: Option<u64>,
    pub eps: Option<Rational>,
    pub delta_min: Option<Rational>,
    /// Largest exponent for which a tower is expanded into an exact value.
    pub max_bits: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub name: BoundName,
    pub direction: Direction,
    pub params: BoundParams,
    /// Exact value, or for `ell`/`q` the conservative integer.
    pub value: Option<Rational>,
    /// `log2` of the bound; for `duel-value` of its excess over 1/2.
    pub log2: Option<Rational>,
    /// Enclosure of the real-valued `ell`/`q` before rounding.
    pub interval: Option<(Rational, Rational)>,
    /// `(base, exponent)` for the safety patience bound.
    pub power: Option<(Rational, Rational)>,
}

impl BoundReport {
    fn new(name: BoundName, direction: Direction, params: &BoundParams) -> Self {
        BoundReport {
            name,
            direction,
            params: params.clone(),
            value: None,
            log2: None,
            interval: None,
            power: None,
        }
    }

    /// The bound as a natural number; `ell` and `q` only.
    pub fn as_natural(&self) -> Option<Natural> {
        let v = self.value.as_ref()?;
        (*v.denominator_ref() == Natural::ONE && *v >= Rational::ZERO).then(|| v.numerator_ref().clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let opt = |x: &Option<Rational>| x.as_ref().map(scalar::format);
        let p = &self.params;
        json!({
            "name": self.name.as_str(),
            "direction": match self.direction { Direction::Upper => "upper", Direction::Lower => "lower" },
            "parameters": {
                "n": p.n, "k": p.k, "m": p.m, "j": p.j,
                "eps": opt(&p.eps), "delta_min": opt(&p.delta_min),
            },
            "value": opt(&self.value),
            "log2": opt(&self.log2),
            "interval": self.interval.as_ref().map(|(lo, hi)| json!([display_down(lo), display_up(hi)])),
            "power": self.power.as_ref().map(|(b, e)| json!({"base": scalar::format(b), "exponent": scalar::format(e)})),
        })
    }
}

/// Outward rounding to six decimals for display.
fn display_down(x: &Rational) -> String {
    let s = Rational::from(1_000_000u32);
    scalar::format(&(Rational::from(scalar::floor(&(x * &s))) / s))
}

fn display_up(x: &Rational) -> String {
    let s = Rational::from(1_000_000u32);
    scalar::format(&(Rational::from(scalar::ceil(&(x * &s))) / s))
}

/// Binary splitting of `Σ_{k<K} y^{2k+1}/(2k+1)` with `y = a/b`.
fn atanh_partial(a: &Integer, b: &Integer, terms: u64) -> Rational {
    fn split(a2: &Integer, b2: &Integer, a: &Integer, b: &Integer, lo: u64, hi: u64) -> [Integer; 4] {
        if hi - lo == 1 {
            let (p, q) = if lo == 0 { (a.clone(), b.clone()) } else { (a2.clone(), b2.clone()) };
            return [p.clone(), q, Integer::from(2 * lo + 1), p];
        }
        let mid = (lo + hi) / 2;
        let [pl, ql, bl, tl] = split(a2, b2, a, b, lo, mid);
        let [pr, qr, br, tr] = split(a2, b2, a, b, mid, hi);
        let t = &br * &qr * tl + &bl * &pl * tr;
        [pl * pr, ql * qr, bl * br, t]
    }
    let a2 = a * a;
    let b2 = b * b;
    let [_, q, bb, t] = split(&a2, &b2, a, b, 0, terms);
    Rational::from_integers(t, bb * q)
}

/// Enclosure of `atanh(y)` for `0 ≤ y ≤ 1/3`.
fn atanh_interval(y: &Rational, prec: u64) -> (Rational, Rational) {
    if *y == Rational::ZERO {
        return (Rational::ZERO, Rational::ZERO);
    }
    let terms = prec / 3 + 2;
    let a = Integer::from(y.numerator_ref().clone());
    let b = Integer::from(y.denominator_ref().clone());
    let lo = atanh_partial(&a, &b, terms);
    let n = 2 * terms + 1;
    let tail = y.clone().pow(n) / (Rational::from(n) * (Rational::ONE - y * y));
    let hi = &lo + tail;
    (lo, hi)
}

/// Rational enclosure `[lo, hi]` of `ln x` for `x ≥ 1`, of width about
/// `2^-prec`.
pub fn ln_interval(x: &Rational, prec: u64) -> Result<(Rational, Rational)> {
    if *x < Rational::ONE {
        return Err(domain("ln_interval needs x >= 1"));
    }
    let nb = scalar::bits(&Rational::from(x.numerator_ref().clone())) as i64;
    let db = scalar::bits(&Rational::from(x.denominator_ref().clone())) as i64;
    let mut e = nb - db;
    let mut r = x / scalar::powi(&Rational::from(2u32), e);
    while r >= 2u32 {
        r /= Rational::from(2u32);
        e += 1;
    }
    while r < Rational::ONE {
        r *= Rational::from(2u32);
        e -= 1;
    }
    let (l2lo, l2hi) = atanh_interval(&scalar::q(1, 3), prec + 8);
    let y = (&r - Rational::ONE) / (&r + Rational::ONE);
    let (ylo, yhi) = atanh_interval(&y, prec + 8);
    let two = Rational::from(2u32);
    let e = Rational::from(e);
    Ok((&two * (&e * l2lo + ylo), &two * (&e * l2hi + yhi)))
}

fn need<T: Clone>(x: &Option<T>, what: &str) -> Result<T> {
    x.clone().ok_or_else(|| domain(format!("parameter {what} is required")))
}

fn positive(x: u64, what: &str) -> Result<u64> {
    if x == 0 {
        Err(domain(format!("{what} must be at least 1")))
    } else {
        Ok(x)
    }
}

fn unit_open(x: &Rational, what: &str) -> Result<()> {
    if *x <= Rational::ZERO || *x > Rational::ONE {
        Err(domain(format!("{what} must lie in (0, 1]")))
    } else {
        Ok(())
    }
}

/// `factor · ln(4k/ε)` enclosed and rounded up to an integer; precision is
/// raised until both ends round the same way or the limit is hit.
fn ln_scaled(factor: &Rational, k: u64, eps: &Rational) -> Result<(Rational, (Rational, Rational))> {
    let arg = Rational::from(4 * k) / eps;
    let mut prec = 128;
    loop {
        let (lo, hi) = ln_interval(&arg, prec)?;
        let (lo, hi) = (factor * lo, factor * hi);
        let up = scalar::ceil(&hi);
        if scalar::ceil(&lo) == up || prec >= 4096 {
            return Ok((Rational::from(up), (lo, hi)));
        }
        prec *= 2;
    }
}

/// Evaluates one of the closed-form bounds.
pub fn bounds(name: BoundName, p: &BoundParams) -> Result<BoundReport> {
    let cap = p.max_bits.unwrap_or(crate::value_iteration::DEFAULT_MAX_BITS);
    match name {
        BoundName::Ell | BoundName::Q => {
            let n = positive(need(&p.n, "n")?, "n")?;
            let k = positive(need(&p.k, "k")?, "k")?;
            let eps = need(&p.eps, "eps")?;
            let delta = need(&p.delta_min, "delta_min")?;
            unit_open(&eps, "eps")?;
            unit_open(&delta, "delta_min")?;
            let dn = scalar::powi(&delta, -(n as i64));
            let factor = if name == BoundName::Ell {
                Rational::from(n * k) * dn
            } else {
                let m = positive(need(&p.m, "m")?, "m")?;
                Rational::from(4 * n * k * k * m) / &eps * dn
            };
            let (up, interval) = ln_scaled(&factor, k, &eps)?;
            let mut r = BoundReport::new(name, Direction::Upper, p);
            r.value = Some(up);
            r.interval = Some(interval);
            Ok(r)
        }
        BoundName::DuelValue => {
            let (n, m, j) = duel_params(p)?;
            let e = Integer::from(1 - m as i64) * Integer::from(m).pow(n - j) - Integer::ONE;
            let mut r = BoundReport::new(name, Direction::Upper, p);
            r.log2 = Some(Rational::from(e.clone()));
            if let Ok(e) = i64::try_from(&e) {
                if e.unsigned_abs() <= cap {
                    r.value = Some(scalar::half() + scalar::powi(&Rational::from(2u32), e));
                }
            }
            Ok(r)
        }
        BoundName::DuelPatience => {
            let (n, m, j) = duel_params(p)?;
            let sq = Integer::from(m - 1).pow(2);
            let x = if j == n {
                Rational::from_integers(sq, Integer::from(m))
            } else {
                Rational::from(sq * Integer::from(m).pow(n - j - 1))
            };
            let mut r = BoundReport::new(name, Direction::Lower, p);
            if *x.denominator_ref() == Natural::ONE {
                if let Ok(e) = u64::try_from(x.numerator_ref()) {
                    if e <= cap {
                        r.value = Some(Rational::from(Natural::ONE << e));
                    }
                }
            }
            r.log2 = Some(x);
            Ok(r)
        }
        BoundName::SafetyPatience => {
            let n = need(&p.n, "n")?;
            if n < 7 || (n - 3) % 4 != 0 {
                return Err(domain("the safety duel has n = 4c + 3 states with c >= 1"));
            }
            let delta = need(&p.delta_min, "delta_min")?;
            unit_open(&delta, "delta_min")?;
            let base = Rational::ONE / &delta;
            let exponent = Rational::from_signeds(n as i64 - 3, 6);
            let mut r = BoundReport::new(name, Direction::Lower, p);
            r.value = rational_power(&base, &exponent);
            r.power = Some((base, exponent));
            Ok(r)
        }
    }
}

fn duel_params(p: &BoundParams) -> Result<(u64, u64, u64)> {
    let n = positive(need(&p.n, "n")?, "n")?;
    let m = positive(need(&p.m, "m")?, "m")?;
    let j = positive(need(&p.j, "j")?, "j")?;
    if j > n {
        return Err(domain("j must lie in 1..=n"));
    }
    Ok((n, m, j))
}

/// `base^exponent` when it is rational.
fn rational_power(base: &Rational, exponent: &Rational) -> Option<Rational> {
    let root = u64::try_from(exponent.denominator_ref()).ok()?;
    let pow = u64::try_from(exponent.numerator_ref()).ok()?;
    let num = base.numerator_ref().checked_root(root)?;
    let den = base.denominator_ref().checked_root(root)?;
    Some(Rational::from_naturals(num, den).pow(pow))
}
