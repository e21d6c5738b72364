//! The augmented zero-sum penalty game: kicker picks natural / center /
//! non-natural / keeper-dependent, keeper picks early natural / late / early
//! non-natural. Payoff is the scoring probability.

use serde::{Deserialize, Serialize};

use crate::domain::{DiveTiming, Outcome, PenaltyRecord, TakerStrategy, Zone};
use crate::error::{invalid, Error, Result};

pub const KICKER_ACTIONS: [&str; 4] = ["N", "C", "NN", "Dep"];
pub const KEEPER_ACTIONS: [&str; 3] = ["GK N", "GK Late", "GK NN"];

/// Scoring probabilities estimated from a large annotated professional dataset.
/// Rows follow [`KICKER_ACTIONS`], columns [`KEEPER_ACTIONS`].
pub const DEFAULT_PAYOFFS: [[f64; 3]; 4] = [
    [0.615, 0.785, 0.939],
    [0.846, 0.273, 0.865],
    [0.947, 0.785, 0.556],
    [0.846, 0.773, 0.846],
];

const PIVOT_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSupport {
    pub scored: u32,
    pub total: u32,
}

/// Labelled payoff matrix. `None` marks a cell without support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<CellSupport>>,
}

impl PayoffMatrix {
    /// A fully specified matrix with default kicker/keeper labels when the
    /// shape is 4×3, generic labels otherwise.
    pub fn from_values(values: &[Vec<f64>]) -> Result<Self> {
        let rows = values.len();
        let cols = values.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || values.iter().any(|r| r.len() != cols) {
            return Err(invalid("payoff matrix must be a nonempty rectangle"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("payoff matrix has a non-finite entry"));
        }
        let (row_labels, col_labels) = if rows == 4 && cols == 3 {
            (
                KICKER_ACTIONS.iter().map(|s| s.to_string()).collect(),
                KEEPER_ACTIONS.iter().map(|s| s.to_string()).collect(),
            )
        } else {
            (
                (0..rows).map(|i| format!("r{i}")).collect(),
                (0..cols).map(|j| format!("c{j}")).collect(),
            )
        };
        Ok(PayoffMatrix {
            row_labels,
            col_labels,
            cells: values.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect(),
            counts: vec![vec![CellSupport::default(); cols]; rows],
        })
    }

    pub fn default_matrix() -> Self {
        let values: Vec<Vec<f64>> = DEFAULT_PAYOFFS.iter().map(|r| r.to_vec()).collect();
        Self::from_values(&values).expect("static matrix is valid")
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn empty_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Dense values, refusing empty cells.
    pub fn values(&self) -> Result<Vec<Vec<f64>>> {
        if let Some(&(i, j)) = self.empty_cells().first() {
            return Err(Error::EmptyCell {
                row: self.row_labels[i].clone(),
                col: self.col_labels[j].clone(),
            });
        }
        Ok(self
            .cells
            .iter()
            .map(|r| r.iter().map(|c| c.unwrap()).collect())
            .collect())
    }

    /// Drop actions until no empty cell remains, removing at each step the
    /// row or column with the most empty cells (rows first on ties).
    pub fn restrict_to_supported(&self) -> Result<PayoffMatrix> {
        let mut rows: Vec<usize> = (0..self.n_rows()).collect();
        let mut cols: Vec<usize> = (0..self.n_cols()).collect();
        loop {
            let empty_in_row = |i: usize| cols.iter().filter(|&&j| self.cells[i][j].is_none()).count();
            let empty_in_col = |j: usize| rows.iter().filter(|&&i| self.cells[i][j].is_none()).count();
            let worst_row = rows.iter().copied().max_by_key(|&i| (empty_in_row(i), std::cmp::Reverse(i)));
            let worst_col = cols.iter().copied().max_by_key(|&j| (empty_in_col(j), std::cmp::Reverse(j)));
            let (Some(r), Some(c)) = (worst_row, worst_col) else {
                return Err(invalid("no fully supported action subset"));
            };
            let (er, ec) = (empty_in_row(r), empty_in_col(c));
            if er == 0 && ec == 0 {
                break;
            }
            if er >= ec {
                rows.retain(|&i| i != r);
            } else {
                cols.retain(|&j| j != c);
            }
            if rows.is_empty() || cols.is_empty() {
                return Err(invalid("no fully supported action subset"));
            }
        }
        Ok(PayoffMatrix {
            row_labels: rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            cells: rows.iter().map(|&i| cols.iter().map(|&j| self.cells[i][j]).collect()).collect(),
            counts: rows.iter().map(|&i| cols.iter().map(|&j| self.counts[i][j]).collect()).collect(),
        })
    }
}

/// Probability vector over a declared action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub actions: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(actions: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if actions.len() != probabilities.len() {
            return Err(invalid("action list and probabilities differ in length"));
        }
        crate::domain::check_mix("mixed strategy", &probabilities)?;
        Ok(MixedStrategy { actions, probabilities })
    }

    pub fn get(&self, action: &str) -> Option<f64> {
        self.actions.iter().position(|a| a == action).map(|i| self.probabilities[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kicker: MixedStrategy,
    pub keeper: MixedStrategy,
    /// Scoring probability the kicker can guarantee.
    pub value: f64,
}

impl Equilibrium {
    /// Keeper mix in the (natural early, late, non-natural early) order used
    /// by the game-theoretic policy. Requires the default keeper labels.
    pub fn keeper_policy_mix(&self) -> Result<[f64; 3]> {
        let mut mix = [0.0; 3];
        for (slot, label) in KEEPER_ACTIONS.iter().enumerate() {
            mix[slot] = self
                .keeper
                .get(label)
                .ok_or_else(|| invalid(format!("keeper action `{label}` missing from the game")))?;
        }
        Ok(mix)
    }
}

/// Kicker action of a record: dependent kicks form their own action,
/// independent kicks use the direction zone.
pub fn kicker_action(r: &PenaltyRecord) -> Option<usize> {
    match r.taker_strategy {
        TakerStrategy::Dependent => Some(3),
        TakerStrategy::Independent => r.direction().map(Zone::index),
        TakerStrategy::Unknown => None,
    }
}

/// Keeper action of a record. Early dives to the center are not an action
/// of the game and map to `None`.
pub fn keeper_action(r: &PenaltyRecord) -> Option<usize> {
    match r.keeper_timing {
        DiveTiming::Late => Some(1),
        DiveTiming::Early => match r.keeper_dive_zone.zone()? {
            Zone::Natural => Some(0),
            Zone::NonNatural => Some(2),
            Zone::Center => None,
        },
        DiveTiming::Unknown => None,
    }
}

pub fn estimate_payoff(records: &[PenaltyRecord]) -> PayoffMatrix {
    let mut counts = vec![vec![CellSupport::default(); 3]; 4];
    for r in records {
        let (Some(i), Some(j)) = (kicker_action(r), keeper_action(r)) else {
            continue;
        };
        counts[i][j].total += 1;
        if r.outcome == Outcome::Goal {
            counts[i][j].scored += 1;
        }
    }
    let cells = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| (c.total > 0).then(|| c.scored as f64 / c.total as f64))
                .collect()
        })
        .collect();
    PayoffMatrix {
        row_labels: KICKER_ACTIONS.iter().map(|s| s.to_string()).collect(),
        col_labels: KEEPER_ACTIONS.iter().map(|s| s.to_string()).collect(),
        cells,
        counts,
    }
}

/// Observed relative frequencies of both players' actions. Each side uses
/// the records where its own action is known; a side with no such record
/// gets a uniform mix.
pub fn empirical_strategies(records: &[PenaltyRecord]) -> (MixedStrategy, MixedStrategy) {
    let mut kicker = [0u64; 4];
    let mut keeper = [0u64; 3];
    for r in records {
        if let Some(i) = kicker_action(r) {
            kicker[i] += 1;
        }
        if let Some(j) = keeper_action(r) {
            keeper[j] += 1;
        }
    }
    let to_mix = |counts: &[u64], labels: &[&str]| {
        let total: u64 = counts.iter().sum();
        let probs = if total == 0 {
            vec![1.0 / counts.len() as f64; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        MixedStrategy {
            actions: labels.iter().map(|s| s.to_string()).collect(),
            probabilities: probs,
        }
    };
    (to_mix(&kicker, &KICKER_ACTIONS), to_mix(&keeper, &KEEPER_ACTIONS))
}

/// Solve the zero-sum game where the row player maximizes.
pub fn solve_minimax(matrix: &PayoffMatrix) -> Result<Equilibrium> {
    let values = matrix.values()?;
    let (row_mix, col_mix, value) = solve_dense(&values)?;
    Ok(Equilibrium {
        kicker: MixedStrategy {
            actions: matrix.row_labels.clone(),
            probabilities: row_mix,
        },
        keeper: MixedStrategy {
            actions: matrix.col_labels.clone(),
            probabilities: col_mix,
        },
        value,
    })
}

/// Equilibrium of a dense payoff matrix: (row mix, column mix, value).
///
/// The column mix is the lexicographically smallest optimal one whenever the
/// optimal face is small enough to enumerate.
pub fn solve_dense(payoffs: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let m = payoffs.len();
    let n = payoffs.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || payoffs.iter().any(|r| r.len() != n) {
        return Err(invalid("payoff matrix must be a nonempty rectangle"));
    }
    let min = payoffs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let shifted: Vec<Vec<f64>> = payoffs
        .iter()
        .map(|r| r.iter().map(|v| v + shift).collect())
        .collect();

    // Column player: max sum(x) s.t. A x <= 1, x >= 0; then y = x / sum(x)
    // and the game value of the shifted game is 1 / sum(x). Row player's mix
    // comes from the duals of the row constraints.
    let lp = simplex_max_sum(&shifted)?;
    let total: f64 = lp.primal.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("degenerate linear program"));
    }
    let shifted_value = 1.0 / total;
    let mut col_mix: Vec<f64> = lp.primal.iter().map(|x| x * shifted_value).collect();
    let dual_total: f64 = lp.dual.iter().sum();
    let mut row_mix: Vec<f64> = lp.dual.iter().map(|u| u / dual_total).collect();

    if let Some(lex) = lexmin_optimal_columns(&shifted, shifted_value) {
        col_mix = lex;
    }
    clean_mix(&mut col_mix);
    clean_mix(&mut row_mix);
    Ok((row_mix, col_mix, shifted_value - shift))
}

fn clean_mix(mix: &mut [f64]) {
    for p in mix.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = mix.iter().sum();
    for p in mix.iter_mut() {
        *p /= total;
    }
}

struct LpSolution {
    primal: Vec<f64>,
    dual: Vec<f64>,
}

/// Dense tableau simplex for `max 1'x, A x <= 1, x >= 0` with `A > 0`.
/// Bland's rule keeps it finite on degenerate games.
fn simplex_max_sum(a: &[Vec<f64>]) -> Result<LpSolution> {
    let m = a.len();
    let n = a[0].len();
    let width = n + m + 1;
    // Rows 0..m are constraints; row m is the objective (reduced costs).
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m).max(10);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_EPS) else {
            let mut primal = vec![0.0; n];
            for (i, &b) in basis.iter().enumerate() {
                if b < n {
                    primal[b] = t[i][width - 1];
                }
            }
            let dual = (0..m).map(|i| t[m][n + i]).collect();
            return Ok(LpSolution { primal, dual });
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = ratio < best_ratio - PIVOT_EPS
                    || ((ratio - best_ratio).abs() <= PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if leave.is_none() || better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(invalid("unbounded linear program"));
        };
        let pivot = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave {
                let f = row[enter];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        basis[leave] = enter;
    }
    Err(invalid("simplex did not converge"))
}

/// Lexicographically smallest `y` with `A y <= v`, `sum y = 1`, `y >= 0`,
/// found by enumerating the vertices of that polytope. `None` when the
/// enumeration would be too large.
fn lexmin_optimal_columns(a: &[Vec<f64>], value: f64) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a[0].len();
    let n_ineq = m + n;
    if n == 1 {
        return Some(vec![1.0]);
    }
    if binomial(n_ineq, n - 1) > 20_000 {
        return None;
    }
    // Inequality k < m: A_k y <= v; k >= m: -y_{k-m} <= 0.
    let row_of = |k: usize| -> (Vec<f64>, f64) {
        if k < m {
            (a[k].clone(), value)
        } else {
            let mut e = vec![0.0; n];
            e[k - m] = -1.0;
            (e, 0.0)
        }
    };
    let mut best: Option<Vec<f64>> = None;
    for combo in Combinations::new(n_ineq, n - 1) {
        let mut sys: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for &k in &combo {
            let (row, b) = row_of(k);
            sys.push(row);
            rhs.push(b);
        }
        sys.push(vec![1.0; n]);
        rhs.push(1.0);
        let Some(y) = solve_linear(sys, rhs) else {
            continue;
        };
        let feasible = y.iter().all(|&v| v >= -FEAS_EPS)
            && a.iter().all(|row| dot(row, &y) <= value + FEAS_EPS);
        if !feasible {
            continue;
        }
        let replace = match &best {
            None => true,
            Some(b) => lex_less(&y, b),
        };
        if replace {
            best = Some(y);
        }
    }
    best
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x < y;
        }
    }
    false
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// k-subsets of 0..n in lexicographic order.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
