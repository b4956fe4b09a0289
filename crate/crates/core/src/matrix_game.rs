//! Zero-sum matrix games: exact simplex solver and the tri-band family
//! `M^{x,y,z,m}` (x below the diagonal, y on it, z above).
//!
//! The row player maximizes. Strategies are distributions over row/column
//! positions `0..r` and `0..c`.

use malachite::num::arithmetic::traits::Lcm;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::game_model::Distribution;
use crate::scalar::{self, DivExact, Integer, Natural, One, Rational, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain("matrix game needs at least one row and one column"));
        }
        if entries.len() != rows * cols {
            return Err(domain(format!("expected {} entries, got {}", rows * cols, entries.len())));
        }
        Ok(MatrixGame { rows, cols, entries })
    }

    pub fn from_rows(grid: Vec<Vec<Rational>>) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if grid.iter().any(|r| r.len() != cols) {
            return Err(domain("ragged matrix"));
        }
        Self::new(rows, cols, grid.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn grid(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> MatrixGame {
        let mut e = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                e.push(self.get(i, j).clone());
            }
        }
        MatrixGame { rows: self.cols, cols: self.rows, entries: e }
    }

    /// Expected payoff of the row mixture against column `j`.
    pub fn row_payoff(&self, row: &Distribution, j: usize) -> Rational {
        row.iter().map(|(i, p)| p * self.get(i, j)).sum()
    }

    /// Expected payoff of row `i` against the column mixture.
    pub fn col_payoff(&self, col: &Distribution, i: usize) -> Rational {
        col.iter().map(|(j, p)| p * self.get(i, j)).sum()
    }
}

/// `m×m` matrix with `x` below the diagonal, `y` on it and `z` above.
pub fn build_tri_matrix(x: &Rational, y: &Rational, z: &Rational, m: usize) -> Result<MatrixGame> {
    if m == 0 {
        return Err(domain("tri-band matrix needs m >= 1"));
    }
    let mut e = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            e.push(match i.cmp(&j) {
                std::cmp::Ordering::Greater => x.clone(),
                std::cmp::Ordering::Equal => y.clone(),
                std::cmp::Ordering::Less => z.clone(),
            });
        }
    }
    MatrixGame::new(m, m, e)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSolution {
    pub value: Rational,
    pub row_strategy: Distribution,
    pub col_strategy: Distribution,
    pub row_patience: Rational,
    pub col_patience: Rational,
}

impl MatrixSolution {
    fn new(value: Rational, row: Distribution, col: Distribution) -> Self {
        MatrixSolution {
            value,
            row_patience: row.patience(),
            col_patience: col.patience(),
            row_strategy: row,
            col_strategy: col,
        }
    }

    pub fn patience(&self) -> Rational {
        self.row_patience.clone().max(self.col_patience.clone())
    }

    /// Checks both guarantee inequalities exactly.
    pub fn certifies(&self, m: &MatrixGame) -> bool {
        (0..m.cols()).all(|j| m.row_payoff(&self.row_strategy, j) >= self.value)
            && (0..m.rows()).all(|i| m.col_payoff(&self.col_strategy, i) <= self.value)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out {
            value: String,
            row_strategy: Vec<String>,
            col_strategy: Vec<String>,
            row_patience: String,
            col_patience: String,
            patience: String,
        }
        let dist = |d: &Distribution, n: usize| (0..n).map(|i| scalar::format(&d.prob(i))).collect();
        let rows = self.row_strategy.support().max().unwrap_or(0) + 1;
        let cols = self.col_strategy.support().max().unwrap_or(0) + 1;
        serde_json::to_value(Out {
            value: scalar::format(&self.value),
            row_strategy: dist(&self.row_strategy, rows),
            col_strategy: dist(&self.col_strategy, cols),
            row_patience: scalar::format(&self.row_patience),
            col_patience: scalar::format(&self.col_patience),
            patience: scalar::format(&self.patience()),
        })
        .expect("serializable")
    }
}

/// Pure saddle point, if one exists: first maximin row and first minimax column.
fn saddle_point(m: &MatrixGame) -> Option<(Rational, usize, usize)> {
    let row_min: Vec<&Rational> =
        (0..m.rows).map(|i| (0..m.cols).map(|j| m.get(i, j)).min().unwrap()).collect();
    let col_max: Vec<&Rational> =
        (0..m.cols).map(|j| (0..m.rows).map(|i| m.get(i, j)).max().unwrap()).collect();
    let lower = *row_min.iter().max().unwrap();
    let upper = *col_max.iter().min().unwrap();
    if lower != upper {
        return None;
    }
    let i = row_min.iter().position(|v| *v == lower).unwrap();
    let j = col_max.iter().position(|v| *v == upper).unwrap();
    Some((lower.clone(), i, j))
}

/// Fraction-free simplex tableau. The rational tableau is `t / d`.
struct Tableau {
    t: Vec<Vec<Integer>>,
    d: Integer,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Tableau {
    /// `max Σ y` subject to `A y ≤ 1`, `y ≥ 0`, for a positive integer matrix.
    fn new(a: &[Vec<Integer>]) -> Self {
        let rows = a.len();
        let cols = a[0].len();
        let width = cols + rows + 1;
        let mut t = Vec::with_capacity(rows + 1);
        for (i, row) in a.iter().enumerate() {
            let mut r = vec![Integer::ZERO; width];
            r[..cols].clone_from_slice(row);
            r[cols + i] = Integer::ONE;
            r[width - 1] = Integer::ONE;
            t.push(r);
        }
        let mut obj = vec![Integer::ZERO; width];
        obj[..cols].fill(-Integer::ONE);
        t.push(obj);
        Tableau { t, d: Integer::ONE, basis: (cols..cols + rows).collect(), rows, cols }
    }

    fn rhs(&self) -> usize {
        self.cols + self.rows
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic variable index.
    fn solve(&mut self) {
        let rhs = self.rhs();
        loop {
            let obj = &self.t[self.rows];
            let Some(c) = (0..rhs).find(|&j| obj[j] < Integer::ZERO) else { return };
            let mut best: Option<usize> = None;
            for i in 0..self.rows {
                if self.t[i][c] <= Integer::ZERO {
                    continue;
                }
                best = Some(match best {
                    None => i,
                    Some(b) => {
                        let lhs = &self.t[i][rhs] * &self.t[b][c];
                        let rhs_ = &self.t[b][rhs] * &self.t[i][c];
                        if lhs < rhs_ || (lhs == rhs_ && self.basis[i] < self.basis[b]) {
                            i
                        } else {
                            b
                        }
                    }
                });
            }
            let r = best.expect("positive matrix keeps the LP bounded");
            self.pivot(r, c);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        let pivot_row = self.t[r].clone();
        let d = self.d.clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f == Integer::ZERO {
                if p != d {
                    for x in row.iter_mut() {
                        if *x != Integer::ZERO {
                            *x = (&*x * &p).div_exact(&d);
                        }
                    }
                }
                continue;
            }
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                *x = (&*x * &p - &f * pr).div_exact(&d);
            }
        }
        self.d = p;
        self.basis[r] = c;
    }
}

/// Shifts and scales `m` to a positive integer matrix `A = L·(M − lo + 1)`.
fn positive_integer_form(m: &MatrixGame) -> (Vec<Vec<Integer>>, Rational, Natural) {
    let lo = m.entries.iter().min().unwrap().clone();
    let shift = Rational::ONE - &lo;
    let shifted: Vec<Rational> = m.entries.iter().map(|e| e + &shift).collect();
    let l = shifted.iter().fold(Natural::ONE, |acc, e| acc.lcm(e.denominator_ref()));
    let lq = Rational::from(l.clone());
    let ints: Vec<Integer> = shifted
        .iter()
        .map(|e| {
            let v = e * &lq;
            Integer::from(v.into_numerator())
        })
        .collect();
    let grid = ints.chunks(m.cols).map(|r| r.to_vec()).collect();
    (grid, shift, l)
}

fn run_lp(m: &MatrixGame) -> (Tableau, Rational, Natural) {
    let (a, shift, l) = positive_integer_form(m);
    let mut tab = Tableau::new(&a);
    tab.solve();
    (tab, shift, l)
}

fn lp_value(tab: &Tableau, shift: &Rational, l: &Natural) -> Rational {
    let z = &tab.t[tab.rows][tab.rhs()];
    Rational::from_integers(tab.d.clone(), z.clone() * Integer::from(l.clone())) - shift
}

/// Exact value and one optimal strategy per player.
pub fn solve_matrix_game(m: &MatrixGame) -> MatrixSolution {
    if let Some((v, i, j)) = saddle_point(m) {
        return MatrixSolution::new(v, Distribution::pure(i), Distribution::pure(j));
    }
    let (tab, shift, l) = run_lp(m);
    let rhs = tab.rhs();
    let z = tab.t[tab.rows][rhs].clone();
    let mut col = Vec::new();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < tab.cols {
            col.push((b, Rational::from_integers(tab.t[i][rhs].clone(), z.clone())));
        }
    }
    let row: Vec<(usize, Rational)> = (0..tab.rows)
        .map(|i| (i, Rational::from_integers(tab.t[tab.rows][tab.cols + i].clone(), z.clone())))
        .collect();
    let value = lp_value(&tab, &shift, &l);
    let sol = MatrixSolution::new(
        value,
        Distribution::new(row).expect("dual solution is a distribution"),
        Distribution::new(col).expect("primal solution is a distribution"),
    );
    debug_assert!(sol.certifies(m));
    sol
}

/// Value only; skips strategy extraction.
pub fn matrix_value(m: &MatrixGame) -> Rational {
    if let Some((v, _, _)) = saddle_point(m) {
        return v;
    }
    let (tab, shift, l) = run_lp(m);
    lp_value(&tab, &shift, &l)
}

/// Closed-form solution of `M^{0, 1/2+ε, 1/2, m}`.
pub fn closed_form_tri(eps: &Rational, m: usize) -> Result<MatrixSolution> {
    if *eps <= Rational::ZERO || *eps > scalar::half() {
        return Err(domain("eps must lie in (0, 1/2]"));
    }
    if m == 0 {
        return Err(domain("m must be at least 1"));
    }
    let r = (scalar::half() + eps) / eps;
    let powers: Vec<Rational> = (0..m).map(|k| scalar::powi(&r, k as i64)).collect();
    let total: Rational = powers.iter().sum();
    let last = Rational::ONE / total;
    let row: Vec<(usize, Rational)> = (0..m).map(|a| (a, &powers[m - 1 - a] * &last)).collect();
    let col: Vec<(usize, Rational)> = (0..m).map(|a| (a, row[m - 1 - a].1.clone())).collect();
    let value = scalar::half() + eps * &last;
    Ok(MatrixSolution::new(value, Distribution::new(row)?, Distribution::new(col)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, q};

    fn mat(rows: &[&[i64]], den: i64) -> MatrixGame {
        MatrixGame::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x, den)).collect()).collect()).unwrap()
    }

    #[test]
    fn two_by_two_tri_band() {
        let m = build_tri_matrix(&int(0), &int(1), &q(1, 2), 2).unwrap();
        assert_eq!(m, mat(&[&[2, 1], &[0, 2]], 2));
        let s = solve_matrix_game(&m);
        assert_eq!(s.value, q(2, 3));
        assert_eq!(s.row_strategy, Distribution::new([(0, q(2, 3)), (1, q(1, 3))]).unwrap());
        assert_eq!(s.col_strategy, Distribution::new([(0, q(1, 3)), (1, q(2, 3))]).unwrap());
        assert!(s.certifies(&m));
    }

    #[test]
    fn one_by_one_and_saddles() {
        let m = mat(&[&[7]], 3);
        let s = solve_matrix_game(&m);
        assert_eq!(s.value, q(7, 3));
        assert!(s.row_strategy.is_pure() && s.col_strategy.is_pure());
        let m = mat(&[&[3, 1], &[4, 2]], 1);
        let s = solve_matrix_game(&m);
        assert_eq!(s.value, int(2));
        assert_eq!(s.row_strategy, Distribution::pure(1));
        assert_eq!(s.col_strategy, Distribution::pure(1));
    }

    #[test]
    fn rock_paper_scissors() {
        let m = mat(&[&[0, 1, -1], &[-1, 0, 1], &[1, -1, 0]], 1);
        let s = solve_matrix_game(&m);
        assert_eq!(s.value, int(0));
        assert_eq!(s.row_strategy, Distribution::uniform(&[0, 1, 2]));
        assert_eq!(s.col_strategy, Distribution::uniform(&[0, 1, 2]));
        assert_eq!(matrix_value(&m), int(0));
    }

    #[test]
    fn tri_band_shapes() {
        let m = build_tri_matrix(&int(1), &q(1, 3), &q(1, 2), 2).unwrap();
        assert_eq!(m, mat(&[&[2, 3], &[6, 2]], 6));
        assert_eq!(build_tri_matrix(&int(5), &int(7), &int(9), 1).unwrap(), mat(&[&[7]], 1));
        assert!(build_tri_matrix(&int(0), &int(1), &int(0), 0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let s = closed_form_tri(&q(1, 2), 2).unwrap();
        assert_eq!(s.value, q(2, 3));
        assert_eq!(s.row_patience, int(3));
        let s = closed_form_tri(&q(1, 2), 3).unwrap();
        assert_eq!(s.value, q(4, 7));
        assert_eq!(s.row_strategy, Distribution::new([(0, q(4, 7)), (1, q(2, 7)), (2, q(1, 7))]).unwrap());
        assert_eq!(s.row_patience, int(7));
        let s = closed_form_tri(&q(1, 6), 2).unwrap();
        assert_eq!(s.value, q(8, 15));
        assert_eq!(s.row_strategy, Distribution::new([(0, q(4, 5)), (1, q(1, 5))]).unwrap());
        assert_eq!(s.row_patience, int(5));
        assert!(closed_form_tri(&int(0), 2).is_err());
        assert!(closed_form_tri(&q(3, 4), 2).is_err());
    }

    #[test]
    fn closed_form_matches_lp() {
        for m in 1..=5 {
            for (n, d) in [(1, 2), (1, 6), (1, 10), (3, 7)] {
                let eps = q(n, d);
                let cf = closed_form_tri(&eps, m).unwrap();
                let mat = build_tri_matrix(&int(0), &(scalar::half() + &eps), &scalar::half(), m).unwrap();
                let lp = solve_matrix_game(&mat);
                assert_eq!(cf.value, lp.value);
                assert!(cf.certifies(&mat));
                if m > 1 {
                    assert_eq!(cf.row_strategy, lp.row_strategy);
                    assert_eq!(cf.col_strategy, lp.col_strategy);
                }
            }
        }
    }
}
