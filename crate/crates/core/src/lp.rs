//! Dense revised simplex with warm-started column addition.
//!
//! Problems have the form `min cᵀx` subject to `a_kᵀx {≤, ≥, =} b_k` and
//! `x ≥ 0`. Columns may be appended between calls to [`Simplex::solve`];
//! the current basis is kept, which is what column generation needs.
//!
//! Pivoting is fully deterministic: Dantzig pricing with a Harris ratio
//! test, falling back to Bland's rule after a run of degenerate pivots.

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 40;
const MAX_PIVOTS_PER_SOLVE: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Clone, Debug)]
pub struct Simplex {
    m: usize,
    /// Row multipliers making the internal right-hand side nonnegative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    /// Internal columns in flipped-row coordinates.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    kind: Vec<ColKind>,
    structural: Vec<usize>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    phase: Phase,
    since_refactor: usize,
    pivots: usize,
}

impl Simplex {
    pub fn new(kinds: &[RowKind], rhs: &[f64]) -> Self {
        assert_eq!(kinds.len(), rhs.len());
        let m = rhs.len();
        let sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut lp = Simplex {
            m,
            rhs: rhs.iter().zip(&sign).map(|(b, s)| b * s).collect(),
            sign,
            cols: Vec::new(),
            cost: Vec::new(),
            kind: Vec::new(),
            structural: Vec::new(),
            basis: vec![usize::MAX; m],
            pos: Vec::new(),
            binv: identity(m),
            xb: vec![0.0; m],
            phase: Phase::Two,
            since_refactor: 0,
            pivots: 0,
        };
        for (k, kind) in kinds.iter().enumerate() {
            let slack_coeff = match kind {
                RowKind::Le => Some(1.0),
                RowKind::Ge => Some(-1.0),
                RowKind::Eq => None,
            };
            let mut basic = None;
            if let Some(c) = slack_coeff {
                let internal = c * lp.sign[k];
                let j = lp.push_col(0.0, vec![(k, internal)], ColKind::Slack);
                if internal > 0.0 {
                    basic = Some(j);
                }
            }
            let j = match basic {
                Some(j) => j,
                None => {
                    lp.phase = Phase::One;
                    lp.push_col(0.0, vec![(k, 1.0)], ColKind::Artificial)
                }
            };
            lp.basis[k] = j;
            lp.pos[j] = Some(k);
            lp.xb[k] = lp.rhs[k];
        }
        lp
    }

    fn push_col(&mut self, cost: f64, entries: Vec<(usize, f64)>, kind: ColKind) -> usize {
        self.cols.push(entries);
        self.cost.push(cost);
        self.kind.push(kind);
        self.pos.push(None);
        self.cols.len() - 1
    }

    /// Appends a structural column given in original row coordinates and
    /// returns its structural index.
    pub fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize {
        let internal = entries
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|&(k, v)| (k, v * self.sign[k]))
            .collect();
        let j = self.push_col(cost, internal, ColKind::Structural);
        self.structural.push(j);
        self.structural.len() - 1
    }

    pub fn num_columns(&self) -> usize {
        self.structural.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn phase_cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.kind[j] == ColKind::Artificial {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => self.cost[j],
        }
    }

    fn internal_duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.phase_cost(b, phase);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, r) in y.iter_mut().zip(row) {
                    *yk += c * r;
                }
            }
        }
        y
    }

    /// Duals in original row coordinates. In phase two these are the
    /// simplex multipliers `c_Bᵀ B⁻¹`; after an infeasible result they are
    /// the phase-one multipliers, which form a Farkas certificate:
    /// `yᵀa ≤ 0` for every column and `yᵀb > 0`.
    pub fn duals(&self) -> Vec<f64> {
        self.internal_duals(self.phase)
            .into_iter()
            .zip(&self.sign)
            .map(|(y, s)| y * s)
            .collect()
    }

    /// Values of the structural variables.
    pub fn primal(&self) -> Vec<f64> {
        self.structural
            .iter()
            .map(|&j| self.pos[j].map_or(0.0, |i| self.xb[i].max(0.0)))
            .collect()
    }

    pub fn objective(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &x)| self.cost[j] * x)
            .sum()
    }

    fn infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| self.kind[j] == ColKind::Artificial)
            .map(|(_, &x)| x.max(0.0))
            .sum()
    }

    pub fn solve(&mut self) -> Result<LpStatus> {
        if self.phase == Phase::One {
            match self.run(Phase::One)? {
                LpStatus::Optimal => {}
                other => return Err(Error::Solver(format!("phase one ended {other:?}"))),
            }
            if self.infeasibility() > FEAS_TOL * (1.0 + self.rhs_scale()) {
                return Ok(LpStatus::Infeasible);
            }
            self.drive_out_artificials()?;
            self.phase = Phase::Two;
        }
        self.run(Phase::Two)
    }

    fn rhs_scale(&self) -> f64 {
        self.rhs.iter().copied().fold(0.0, f64::max)
    }

    fn run(&mut self, phase: Phase) -> Result<LpStatus> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS_PER_SOLVE {
            let bland = degenerate >= DEGENERATE_RUN;
            let y = self.internal_duals(phase);
            let Some(q) = self.choose_entering(&y, phase, bland) else {
                return Ok(LpStatus::Optimal);
            };
            let u = self.ftran(q);
            let Some(r) = self.choose_leaving(&u, phase, bland) else {
                return Ok(LpStatus::Unbounded);
            };
            let theta = self.pivot(q, r, &u);
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
        Err(Error::Solver(format!(
            "no convergence within {MAX_PIVOTS_PER_SOLVE} pivots"
        )))
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        let dot: f64 = self.cols[j].iter().map(|&(k, v)| y[k] * v).sum();
        self.phase_cost(j, phase) - dot
    }

    fn choose_entering(&self, y: &[f64], phase: Phase, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols.len() {
            if self.pos[j].is_some() || self.kind[j] == ColKind::Artificial {
                continue;
            }
            let d = self.reduced_cost(j, y, phase);
            if d < -OPT_TOL {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for &(k, v) in &self.cols[j] {
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += self.binv[i * m + k] * v;
            }
        }
        u
    }

    fn choose_leaving(&self, u: &[f64], phase: Phase, bland: bool) -> Option<usize> {
        // a basic artificial left at zero after phase one must stay at zero
        if phase == Phase::Two {
            let stuck = (0..self.m)
                .filter(|&i| self.kind[self.basis[i]] == ColKind::Artificial && u[i].abs() > PIVOT_TOL)
                .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()).then(b.cmp(&a)));
            if stuck.is_some() {
                return stuck;
            }
        }
        let candidates = (0..self.m).filter(|&i| u[i] > PIVOT_TOL);
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in candidates {
                let ratio = self.xb[i].max(0.0) / u[i];
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            return best.map(|(i, _)| i);
        }
        let bound = candidates
            .clone()
            .map(|i| (self.xb[i].max(0.0) + FEAS_TOL) / u[i])
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        candidates
            .filter(|&i| self.xb[i].max(0.0) / u[i] <= bound)
            .max_by(|&a, &b| {
                u[a].total_cmp(&u[b])
                    .then(self.basis[b].cmp(&self.basis[a]))
            })
    }

    fn pivot(&mut self, q: usize, r: usize, u: &[f64]) -> f64 {
        let m = self.m;
        let theta = (self.xb[r] / u[r]).max(0.0);
        for i in 0..m {
            if i != r {
                self.xb[i] = (self.xb[i] - theta * u[i]).max(0.0);
            }
        }
        self.xb[r] = theta;
        let pr = u[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= pr;
        }
        for (i, row) in before.chunks_mut(m).enumerate() {
            let f = u[i];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        for (off, row) in after.chunks_mut(m).enumerate() {
            let f = u[r + 1 + off];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        let old = self.basis[r];
        self.pos[old] = None;
        self.basis[r] = q;
        self.pos[q] = Some(r);
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            // a singular refactorization keeps the updated inverse
            let _ = self.refactor();
        }
        theta
    }

    /// Recomputes `B⁻¹` from scratch by Gauss–Jordan elimination with
    /// partial pivoting, then `x_B = B⁻¹ b`.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(k, v) in &self.cols[j] {
                a[k * m + c] = v;
            }
        }
        let mut inv = identity(m);
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .unwrap_or(col);
            if a[p * m + col].abs() < 1e-13 {
                return Err(Error::Solver("singular basis".into()));
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i != col {
                    let f = a[i * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[col * m + k];
                            inv[i * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            if self.kind[self.basis[r]] != ColKind::Artificial {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let entering = (0..self.cols.len()).find(|&j| {
                self.pos[j].is_none()
                    && self.kind[j] != ColKind::Artificial
                    && self.cols[j].iter().map(|&(k, v)| row[k] * v).sum::<f64>().abs() > 1e-7
            });
            if let Some(q) = entering {
                let u = self.ftran(q);
                self.pivot(q, r, &u);
            }
        }
        self.refactor()
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    v
}
