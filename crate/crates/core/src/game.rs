//! Zero-sum matrix games by linear programming.
//!
//! The row player minimises. After shifting the loss matrix so every entry is at
//! least one, the row strategy comes from `max Σy s.t. L'ᵀy ≤ 1, y ≥ 0` with
//! value `1/Σy`. The tableau has one row per column of the game, which keeps it
//! small when there are many rows (pure policies) and few columns (MDPs). The
//! column strategy is read off the slack reduced costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// Minimiser's mixed strategy over rows.
    pub row_strategy: Vec<f64>,
    /// Maximiser's mixed strategy over columns.
    pub col_strategy: Vec<f64>,
    /// `min_x max_j (xᵀL)_j = max_q min_i (Lq)_i`.
    pub value: f64,
}

const PIVOT_EPS: f64 = 1e-12;

/// Solves `min_x max_q xᵀ L q` over mixed strategies. `loss[i][j]` is the row player's loss.
pub fn solve_matrix_game(loss: &[Vec<f64>]) -> Result<GameSolution> {
    let m = loss.len();
    let n = loss.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || loss.iter().any(|r| r.len() != n) {
        return Err(Error::Lp("loss matrix must be nonempty and rectangular".into()));
    }
    if loss.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Lp("loss matrix has non-finite entries".into()));
    }
    let min = loss.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // Tableau rows: L'ᵀ y + s = 1. Columns 0..m are y, m..m+n are slacks.
    let width = m + n;
    let mut tab = vec![vec![0.0; width + 1]; n];
    for (j, row) in tab.iter_mut().enumerate() {
        for i in 0..m {
            row[i] = loss[i][j] + shift;
        }
        row[m + j] = 1.0;
        row[width] = 1.0;
    }
    // Reduced costs of the maximisation objective Σy.
    let mut cost = vec![1.0; width];
    cost[m..].iter_mut().for_each(|c| *c = 0.0);
    let mut basis: Vec<usize> = (m..m + n).collect();

    let max_iter = 50 * (m + n) + 1000;
    let mut iter = 0;
    // Bland's rule: lowest improving column, ratio ties to the lowest basic index.
    while let Some(c) = cost.iter().position(|&rc| rc > PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..n {
            let a = tab[r][c];
            if a > PIVOT_EPS {
                let ratio = tab[r][width] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[r] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let r = leave.ok_or_else(|| Error::Lp("unbounded program".into()))?;
        pivot(&mut tab, &mut cost, r, c);
        basis[r] = c;
        iter += 1;
        if iter > max_iter {
            return Err(Error::Lp("simplex did not terminate".into()));
        }
    }

    let mut y = vec![0.0; m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            y[b] = tab[r][width].max(0.0);
        }
    }
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return Err(Error::Lp("degenerate solution".into()));
    }
    let row_strategy: Vec<f64> = y.iter().map(|v| v / total).collect();
    let z: Vec<f64> = cost[m..].iter().map(|&c| (-c).max(0.0)).collect();
    let z_total: f64 = z.iter().sum();
    if z_total <= 0.0 {
        return Err(Error::Lp("no dual solution".into()));
    }
    let col_strategy: Vec<f64> = z.iter().map(|v| v / z_total).collect();
    let value = 1.0 / total - shift;

    let upper = (0..n).map(|j| (0..m).map(|i| row_strategy[i] * loss[i][j]).sum::<f64>()).fold(f64::MIN, f64::max);
    let lower = (0..m).map(|i| (0..n).map(|j| loss[i][j] * col_strategy[j]).sum::<f64>()).fold(f64::MAX, f64::min);
    let scale = 1.0 + value.abs();
    if (upper - value).abs() > 1e-8 * scale || (lower - value).abs() > 1e-8 * scale {
        return Err(Error::Lp(format!("certificate mismatch: upper {upper}, lower {lower}, value {value}")));
    }
    Ok(GameSolution { row_strategy, col_strategy, value })
}

fn pivot(tab: &mut [Vec<f64>], cost: &mut [f64], r: usize, c: usize) {
    let p = tab[r][c];
    tab[r].iter_mut().for_each(|x| *x /= p);
    let pivot_row = tab[r].clone();
    for (k, row) in tab.iter_mut().enumerate() {
        if k != r {
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, &pr)| *x -= f * pr);
            }
        }
    }
    let f = cost[c];
    if f != 0.0 {
        cost.iter_mut().zip(&pivot_row).for_each(|(x, &pr)| *x -= f * pr);
    }
}
