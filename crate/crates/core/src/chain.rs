//! Expected absorption times of finite absorbing Markov chains.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Below this many transient states the system is solved by dense
/// elimination; above it by Gauss-Seidel sweeps.
pub const DENSE_LIMIT: usize = 2_000;
/// Max-norm residual accepted from either solver.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("iterative solver stalled at residual {residual:e} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: usize },
    #[error("linear system is singular at row {0}")]
    Singular(usize),
    #[error("solution residual {0:e} exceeds tolerance")]
    Residual(f64),
}

/// Sparse row-stochastic chain. Absorbing states have no listed transitions.
#[derive(Debug, Clone, Default)]
pub struct AbsorbingChain {
    transitions: Vec<Vec<(usize, f64)>>,
    absorbing: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTimes {
    /// Expected steps to absorption per state; infinite when the state can
    /// reach a class that never absorbs.
    pub steps: Vec<f64>,
    /// States from which no absorbing state is reachable.
    pub trapped: Vec<usize>,
    pub residual: f64,
}

impl AbsorbingChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a state and returns its index.
    pub fn add_state(&mut self, absorbing: bool) -> usize {
        self.transitions.push(Vec::new());
        self.absorbing.push(absorbing);
        self.absorbing.len() - 1
    }

    pub fn set_transitions(&mut self, from: usize, to: Vec<(usize, f64)>) {
        debug_assert!(!self.absorbing[from] || to.is_empty());
        self.transitions[from] = to;
    }

    pub fn len(&self) -> usize {
        self.absorbing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.absorbing.is_empty()
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, p) in row {
                if p > 0.0 {
                    pred[j].push(i);
                }
            }
        }
        pred
    }

    fn backward_closure(pred: &[Vec<usize>], seeds: impl Iterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; pred.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(j) = queue.pop_front() {
            for &i in &pred[j] {
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    pub fn expected_absorption_times(&self) -> Result<AbsorptionTimes, ChainError> {
        let n = self.len();
        let pred = self.predecessors();
        let reaches_absorbing =
            Self::backward_closure(&pred, (0..n).filter(|&i| self.absorbing[i]));
        let trapped: Vec<usize> = (0..n).filter(|&i| !reaches_absorbing[i]).collect();
        let doomed = Self::backward_closure(&pred, trapped.iter().copied());

        let transient: Vec<usize> = (0..n)
            .filter(|&i| !self.absorbing[i] && !doomed[i])
            .collect();
        let mut slot = vec![usize::MAX; n];
        for (r, &i) in transient.iter().enumerate() {
            slot[i] = r;
        }
        let rows: Vec<Vec<(usize, f64)>> = transient
            .iter()
            .map(|&i| {
                self.transitions[i]
                    .iter()
                    .filter(|&&(j, _)| slot[j] != usize::MAX)
                    .map(|&(j, p)| (slot[j], p))
                    .collect()
            })
            .collect();

        let x = if transient.len() < DENSE_LIMIT {
            solve_dense(&rows)?
        } else {
            solve_gauss_seidel(&rows)?
        };
        let residual = residual(&rows, &x);
        if residual > RESIDUAL_TOLERANCE {
            return Err(ChainError::Residual(residual));
        }

        let mut steps = vec![0.0; n];
        for i in 0..n {
            if doomed[i] {
                steps[i] = f64::INFINITY;
            } else if slot[i] != usize::MAX {
                steps[i] = x[slot[i]];
            }
        }
        Ok(AbsorptionTimes {
            steps,
            trapped,
            residual,
        })
    }
}

/// Max-norm of `(I - Q) x - 1`.
fn residual(rows: &[Vec<(usize, f64)>], x: &[f64]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let qx: f64 = row.iter().map(|&(j, p)| p * x[j]).sum();
            libm::fabs(x[i] - qx - 1.0)
        })
        .fold(0.0, f64::max)
}

fn solve_dense(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, ChainError> {
    let m = rows.len();
    let w = m + 1;
    let mut a = vec![0.0; m * w];
    for (i, row) in rows.iter().enumerate() {
        a[i * w + i] += 1.0;
        for &(j, p) in row {
            a[i * w + j] -= p;
        }
        a[i * w + m] = 1.0;
    }
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&r, &s| {
                libm::fabs(a[r * w + col])
                    .partial_cmp(&libm::fabs(a[s * w + col]))
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if libm::fabs(a[pivot * w + col]) < 1e-300 {
            return Err(ChainError::Singular(col));
        }
        if pivot != col {
            for c in 0..w {
                a.swap(pivot * w + c, col * w + c);
            }
        }
        let d = a[col * w + col];
        for r in col + 1..m {
            let f = a[r * w + col] / d;
            if f != 0.0 {
                for c in col..w {
                    a[r * w + c] -= f * a[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let mut s = a[r * w + m];
        for c in r + 1..m {
            s -= a[r * w + c] * x[c];
        }
        x[r] = s / a[r * w + r];
    }
    Ok(x)
}

fn solve_gauss_seidel(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, ChainError> {
    let m = rows.len();
    let mut x = vec![0.0; m];
    let mut r = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        for i in 0..m {
            let mut diag = 0.0;
            let mut acc = 1.0;
            for &(j, p) in &rows[i] {
                if j == i {
                    diag += p;
                } else {
                    acc += p * x[j];
                }
            }
            if diag >= 1.0 {
                return Err(ChainError::Singular(i));
            }
            x[i] = acc / (1.0 - diag);
        }
        if sweep % 16 == 15 || m < 64 {
            r = residual(rows, &x);
            if r <= RESIDUAL_TOLERANCE {
                return Ok(x);
            }
        }
    }
    Err(ChainError::NoConvergence {
        residual: r,
        sweeps: MAX_SWEEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_chain(p: f64) -> AbsorbingChain {
        let mut c = AbsorbingChain::new();
        let a = c.add_state(false);
        let b = c.add_state(true);
        c.set_transitions(a, vec![(a, 1.0 - p), (b, p)]);
        c
    }

    #[test]
    fn geometric_waiting_time() {
        let t = geometric_chain(0.25).expected_absorption_times().unwrap();
        assert!((t.steps[0] - 4.0).abs() < 1e-12);
        assert_eq!(t.steps[1], 0.0);
        assert!(t.trapped.is_empty());
    }

    fn walk_rows(m: usize) -> Vec<Vec<(usize, f64)>> {
        // transient states 1..m of a symmetric walk absorbed at 0 and m
        (1..m)
            .map(|i| {
                let mut r = Vec::new();
                if i > 1 {
                    r.push((i - 2, 0.5));
                }
                if i < m - 1 {
                    r.push((i, 0.5));
                }
                r
            })
            .collect()
    }

    #[test]
    fn gambler_ruin_both_solvers() {
        let m = 40;
        let rows = walk_rows(m);
        let dense = solve_dense(&rows).unwrap();
        let gs = solve_gauss_seidel(&rows).unwrap();
        for r in 0..rows.len() {
            let i = (r + 1) as f64;
            let want = i * (m as f64 - i);
            assert!((dense[r] - want).abs() < 1e-9);
            assert!((gs[r] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn large_chain_uses_iterative_solver() {
        let m = DENSE_LIMIT + 100;
        let mut c = AbsorbingChain::new();
        for _ in 0..m {
            c.add_state(false);
        }
        let done = c.add_state(true);
        for i in 0..m {
            c.set_transitions(i, vec![((i + 1) % m, 0.5), (done, 0.5)]);
        }
        let t = c.expected_absorption_times().unwrap();
        assert!(t.residual <= RESIDUAL_TOLERANCE);
        assert!(t.steps[..m].iter().all(|&x| (x - 2.0).abs() < 1e-9));
    }

    #[test]
    fn closed_cycle_is_trapped() {
        let mut c = AbsorbingChain::new();
        let a = c.add_state(false);
        let b = c.add_state(false);
        let start = c.add_state(false);
        let done = c.add_state(true);
        c.set_transitions(a, vec![(b, 1.0)]);
        c.set_transitions(b, vec![(a, 1.0)]);
        c.set_transitions(start, vec![(a, 0.5), (done, 0.5)]);
        let t = c.expected_absorption_times().unwrap();
        assert_eq!(t.trapped, vec![a, b]);
        assert!(t.steps[start].is_infinite());
        assert_eq!(t.steps[done], 0.0);
    }
}
