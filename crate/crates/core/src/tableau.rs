//! Finite models of iterated limits `lim_n lim_m d(x_n, y_m)`.
//!
//! A [`DoubleLimitTableau`] stores `d[n][m]` for `n, m < k` together with
//! declared tail starts: row `n` is constant from column `row_tails[n]` on,
//! and column `m` is constant from row `col_tails[m]` on. A row or column
//! whose tail is not realized inside the block is declared `None` and takes
//! no part in the limits.
//!
//! The row limits `L_n` and column limits `S_m` must in turn be constant
//! over a trailing run of at least two realized indices; their common
//! values are `L` and `S`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

const TAIL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleLimitTableau {
    entries: Vec<Vec<f64>>,
    row_tails: Vec<Option<usize>>,
    col_tails: Vec<Option<usize>>,
}

/// Limits of a tableau and the check `S ≤ 3L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableauLimits {
    /// `L_n`, `None` for rows without a realized tail.
    pub row_limits: Vec<Option<f64>>,
    /// `S_m`, `None` for columns without a realized tail.
    pub col_limits: Vec<Option<f64>>,
    pub l: f64,
    pub s: f64,
    pub s_le_3l: bool,
}

fn trailing_limit(values: &[Option<f64>], what: &str) -> Result<f64> {
    let realized: Vec<f64> = values.iter().flatten().copied().collect();
    let last = *realized
        .last()
        .ok_or_else(|| Error::Structural(format!("no {what} limit is realized")))?;
    let run = realized
        .iter()
        .rev()
        .take_while(|v| (*v - last).abs() <= TAIL_TOL * last.abs().max(1.0))
        .count();
    if run < 2 {
        return Err(Error::Structural(format!(
            "{what} limits do not settle within the tableau: {realized:?}"
        )));
    }
    Ok(last)
}

impl DoubleLimitTableau {
    /// Validates shape, entries and declared tails against trailing entries.
    pub fn new(
        entries: Vec<Vec<f64>>,
        row_tails: Vec<Option<usize>>,
        col_tails: Vec<Option<usize>>,
    ) -> Result<Self> {
        let k = entries.len();
        if k == 0 || entries.iter().any(|r| r.len() != k) {
            return Err(Error::Structural("tableau must be a nonempty square array".into()));
        }
        if row_tails.len() != k || col_tails.len() != k {
            return Err(Error::Structural(format!("need {k} row and {k} column tail declarations")));
        }
        if let Some(v) = entries.iter().flatten().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Structural(format!("entry {v} is not a finite nonnegative real")));
        }
        let same = |a: f64, b: f64| (a - b).abs() <= TAIL_TOL * a.abs().max(1.0);
        for (n, tail) in row_tails.iter().enumerate() {
            if let Some(t) = *tail {
                if t >= k {
                    return Err(Error::Structural(format!("row {n} tail {t} outside the tableau")));
                }
                if let Some(m) = (t..k).find(|&m| !same(entries[n][m], entries[n][t])) {
                    return Err(Error::Structural(format!(
                        "row {n} declared constant from column {t} but d[{n}][{m}] = {} differs from {}",
                        entries[n][m], entries[n][t]
                    )));
                }
            }
        }
        for (m, tail) in col_tails.iter().enumerate() {
            if let Some(t) = *tail {
                if t >= k {
                    return Err(Error::Structural(format!("column {m} tail {t} outside the tableau")));
                }
                if let Some(n) = (t..k).find(|&n| !same(entries[n][m], entries[t][m])) {
                    return Err(Error::Structural(format!(
                        "column {m} declared constant from row {t} but d[{n}][{m}] = {} differs from {}",
                        entries[n][m], entries[t][m]
                    )));
                }
            }
        }
        Ok(DoubleLimitTableau {
            entries,
            row_tails,
            col_tails,
        })
    }

    /// `d ≡ c` with every tail starting at index 0.
    pub fn constant(k: usize, c: f64) -> Result<Self> {
        DoubleLimitTableau::new(vec![vec![c; k]; k], vec![Some(0); k], vec![Some(0); k])
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, n: usize, m: usize) -> f64 {
        self.entries[n][m]
    }

    pub fn limits(&self) -> Result<TableauLimits> {
        let row_limits: Vec<Option<f64>> = self
            .row_tails
            .iter()
            .enumerate()
            .map(|(n, t)| t.map(|t| self.entries[n][t]))
            .collect();
        let col_limits: Vec<Option<f64>> = self
            .col_tails
            .iter()
            .enumerate()
            .map(|(m, t)| t.map(|t| self.entries[t][m]))
            .collect();
        let l = trailing_limit(&row_limits, "row")?;
        let s = trailing_limit(&col_limits, "column")?;
        Ok(TableauLimits {
            row_limits,
            col_limits,
            l,
            s,
            s_le_3l: s <= 3.0 * l * (1.0 + TAIL_TOL),
        })
    }
}

/// `d[n][m] = d(lower n, upper m)` in the stable union: 1 when `m ≥ n`,
/// else 3. Row `n` is constant from column `n`; column `m` from row `m+1`,
/// so the last column has no realized tail.
pub fn example64_tableau(k: usize) -> Result<DoubleLimitTableau> {
    if k < 3 {
        return Err(Error::Parameter(format!("tails need k >= 3, got {k}")));
    }
    let entries = (0..k)
        .map(|n| (0..k).map(|m| if m >= n { 1.0 } else { 3.0 }).collect())
        .collect();
    let row_tails = (0..k).map(Some).collect();
    let col_tails = (0..k).map(|m| (m + 1 < k).then_some(m + 1)).collect();
    DoubleLimitTableau::new(entries, row_tails, col_tails)
}

/// Tableau `d(x_n, y_m)` for sequences that are constant after their last
/// listed element, padded to size `k`.
pub fn metric_tableau(
    space: &FiniteMetricSpace,
    xs: &[usize],
    ys: &[usize],
    k: usize,
) -> Result<DoubleLimitTableau> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Parameter("point sequences must be nonempty".into()));
    }
    // two realized limits are needed on each side
    if xs.len() + 1 > k || ys.len() + 1 > k {
        return Err(Error::Parameter(format!(
            "sequences of length {} and {} need k > both, got {k}",
            xs.len(),
            ys.len()
        )));
    }
    if let Some(&p) = xs.iter().chain(ys).find(|&&p| p >= space.len()) {
        return Err(Error::Parameter(format!("point {p} outside a space of size {}", space.len())));
    }
    let x = |n: usize| xs[n.min(xs.len() - 1)];
    let y = |m: usize| ys[m.min(ys.len() - 1)];
    let entries = (0..k)
        .map(|n| (0..k).map(|m| space.d(x(n), y(m))).collect())
        .collect();
    DoubleLimitTableau::new(
        entries,
        vec![Some(ys.len() - 1); k],
        vec![Some(xs.len() - 1); k],
    )
}

/// Random eventually-constant sequences in `space`, tableau of size `k`.
pub fn random_metric_tableau(
    rng: &mut impl Rng,
    space: &FiniteMetricSpace,
    k: usize,
) -> Result<DoubleLimitTableau> {
    if k < 2 {
        return Err(Error::Parameter(format!("tableau size {k} must be at least 2")));
    }
    let n = space.len();
    let lx = rng.gen_range(1..k);
    let ly = rng.gen_range(1..k);
    let xs: Vec<usize> = (0..lx).map(|_| rng.gen_range(0..n)).collect();
    let ys: Vec<usize> = (0..ly).map(|_| rng.gen_range(0..n)).collect();
    metric_tableau(space, &xs, &ys, k)
}
