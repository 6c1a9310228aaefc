//! Expected hitting times of absorbing Markov chains with rational
//! transition probabilities.
//!
//! Each state lists its successors with integer weights; the probability of
//! a transition is its weight over the state's total weight. Expected steps
//! to absorption solve `E[s] = 1 + Σ P(s,t) E[t]` on the transient states
//! from which absorption is certain. States that can reach a region with no
//! path to absorption have infinite expectation and are reported as `None`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Transient-state count up to which `hitting_times` uses dense elimination in f64.
pub const DENSE_F64_LIMIT: usize = 2500;

#[derive(Debug, Clone, Default)]
pub struct AbsorbingChain {
    transitions: Vec<Vec<(usize, u64)>>,
    absorbing: Vec<bool>,
}

impl AbsorbingChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a state and returns its index. Absorbing states ignore
    /// transitions; a transient state with no transitions stays put forever.
    pub fn add_state(&mut self, absorbing: bool, transitions: Vec<(usize, u64)>) -> usize {
        self.transitions.push(if absorbing { Vec::new() } else { transitions });
        self.absorbing.push(absorbing);
        self.transitions.len() - 1
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        self.absorbing[s]
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (s, out) in self.transitions.iter().enumerate() {
            for &(t, w) in out {
                if w > 0 {
                    preds[t].push(s);
                }
            }
        }
        preds
    }

    fn backward_closure(preds: &[Vec<usize>], seeds: impl Iterator<Item = usize>, n: usize) -> Vec<bool> {
        let mut mark = vec![false; n];
        let mut stack: Vec<usize> = seeds.collect();
        for &s in &stack {
            mark[s] = true;
        }
        while let Some(t) = stack.pop() {
            for &s in &preds[t] {
                if !mark[s] {
                    mark[s] = true;
                    stack.push(s);
                }
            }
        }
        mark
    }

    /// Which states reach absorption with probability one.
    pub fn finite_states(&self) -> Result<Vec<bool>> {
        let n = self.len();
        for (s, out) in self.transitions.iter().enumerate() {
            if let Some(&(t, _)) = out.iter().find(|&&(t, _)| t >= n) {
                return Err(Error::Contract(format!("state {s} points to missing state {t}")));
            }
        }
        let preds = self.predecessors();
        let reaches = Self::backward_closure(&preds, (0..n).filter(|&s| self.absorbing[s]), n);
        let doomed = Self::backward_closure(&preds, (0..n).filter(|&s| !reaches[s]), n);
        Ok(doomed.iter().map(|d| !d).collect())
    }

    /// Transient finite states in index order, plus the reverse map.
    fn unknowns(&self, finite: &[bool]) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut order = Vec::new();
        let mut index = vec![None; self.len()];
        for s in 0..self.len() {
            if finite[s] && !self.absorbing[s] {
                index[s] = Some(order.len());
                order.push(s);
            }
        }
        (order, index)
    }

    fn system<T: Scalar>(&self, order: &[usize], index: &[Option<usize>], make: impl Fn(u64, u64) -> T) -> Vec<Vec<T>> {
        let m = order.len();
        let mut rows = Vec::with_capacity(m);
        for &s in order {
            let total: u64 = self.transitions[s].iter().map(|&(_, w)| w).sum();
            let mut row = vec![T::zero(); m + 1];
            row[index[s].unwrap()] = T::one();
            for &(t, w) in &self.transitions[s] {
                if let Some(j) = index[t] {
                    row[j] = row[j].clone() - make(w, total);
                }
            }
            row[m] = T::one();
            rows.push(row);
        }
        rows
    }

    /// Exact expected steps to absorption (`None` = infinite). Dense
    /// rational elimination; only practical for a few hundred states.
    pub fn hitting_times_exact(&self, max_unknowns: usize) -> Result<Vec<Option<BigRational>>> {
        let finite = self.finite_states()?;
        let (order, index) = self.unknowns(&finite);
        if order.len() > max_unknowns {
            return Err(Error::TooLarge {
                what: "exact solve unknown count",
                requested: order.len() as u128,
                cap: max_unknowns as u128,
            });
        }
        let make = |w: u64, d: u64| BigRational::new(BigInt::from(w), BigInt::from(d));
        let solution = solve_dense(self.system(&order, &index, make))?;
        Ok(self.assemble(&finite, &index, &solution, BigRational::zero()))
    }

    /// Expected steps in f64. Uses dense elimination up to
    /// [`DENSE_F64_LIMIT`] unknowns and Gauss-Seidel beyond.
    pub fn hitting_times(&self) -> Result<Vec<Option<f64>>> {
        let finite = self.finite_states()?;
        let (order, index) = self.unknowns(&finite);
        let solution = if order.len() <= DENSE_F64_LIMIT {
            solve_dense(self.system(&order, &index, |w, d| w as f64 / d as f64))?
        } else {
            self.gauss_seidel(&order, &index)?
        };
        Ok(self.assemble(&finite, &index, &solution, 0.0))
    }

    fn assemble<T: Clone>(&self, finite: &[bool], index: &[Option<usize>], solution: &[T], zero: T) -> Vec<Option<T>> {
        (0..self.len())
            .map(|s| {
                if !finite[s] {
                    None
                } else if let Some(j) = index[s] {
                    Some(solution[j].clone())
                } else {
                    Some(zero.clone())
                }
            })
            .collect()
    }

    fn gauss_seidel(&self, order: &[usize], index: &[Option<usize>]) -> Result<Vec<f64>> {
        const MAX_SWEEPS: usize = 1_000_000;
        const TOL: f64 = 1e-13;
        let m = order.len();
        let rows: Vec<(f64, Vec<(usize, f64)>)> = order
            .iter()
            .map(|&s| {
                let total: u64 = self.transitions[s].iter().map(|&(_, w)| w).sum();
                let mut stay = 0.0;
                let mut out = Vec::new();
                for &(t, w) in &self.transitions[s] {
                    let p = w as f64 / total as f64;
                    match index[t] {
                        Some(_) if t == s => stay += p,
                        Some(j) => out.push((j, p)),
                        None => {}
                    }
                }
                (1.0 - stay, out)
            })
            .collect();
        let mut e = vec![0.0f64; m];
        for _ in 0..MAX_SWEEPS {
            let mut worst: f64 = 0.0;
            for (i, (diag, out)) in rows.iter().enumerate() {
                let next = (1.0 + out.iter().map(|&(j, p)| p * e[j]).sum::<f64>()) / diag;
                worst = worst.max((next - e[i]).abs() / next.abs().max(1.0));
                e[i] = next;
            }
            if worst < TOL {
                return Ok(e);
            }
        }
        Err(Error::Fit("Gauss-Seidel did not converge".into()))
    }
}

/// Field operations needed by the dense solver.
pub trait Scalar:
    Clone + Zero + One + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> + std::ops::Div<Output = Self>
{
    /// Pivot preference; zero means unusable.
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.abs().to_f64().unwrap_or(f64::MAX).max(f64::MIN_POSITIVE)
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented `m × (m+1)`
/// system. Skips zero entries, which keeps sparse chains cheap.
pub fn solve_dense<T: Scalar>(mut rows: Vec<Vec<T>>) -> Result<Vec<T>> {
    let m = rows.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| rows[a][col].magnitude().total_cmp(&rows[b][col].magnitude()))
            .unwrap();
        if rows[pivot][col].magnitude() == 0.0 {
            return Err(Error::Contract("singular linear system".into()));
        }
        rows.swap(col, pivot);
        let (head, tail) = rows.split_at_mut(col + 1);
        let pivot_row = &head[col];
        let nonzero: Vec<usize> = (col + 1..=m).filter(|&j| !pivot_row[j].is_zero()).collect();
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / pivot_row[col].clone();
            row[col] = T::zero();
            for &j in &nonzero {
                row[j] = row[j].clone() - factor.clone() * pivot_row[j].clone();
            }
        }
    }
    let mut x = vec![T::zero(); m];
    for i in (0..m).rev() {
        let mut acc = rows[i][m].clone();
        for j in i + 1..m {
            if !rows[i][j].is_zero() {
                acc = acc - rows[i][j].clone() * x[j].clone();
            }
        }
        x[i] = acc / rows[i][i].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Distance-to-target chain of the 2-cube: from 00 (distance 2) you
    /// always step to distance 1; from distance 1 you finish or go back.
    fn two_cube() -> AbsorbingChain {
        let mut c = AbsorbingChain::new();
        c.add_state(false, vec![(1, 1)]);
        c.add_state(false, vec![(0, 1), (2, 1)]);
        c.add_state(true, vec![]);
        c
    }

    #[test]
    fn exact_and_float_agree() {
        let c = two_cube();
        let exact = c.hitting_times_exact(10).unwrap();
        assert_eq!(exact, vec![Some(ratio(4, 1)), Some(ratio(3, 1)), Some(ratio(0, 1))]);
        let float = c.hitting_times().unwrap();
        assert!((float[0].unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn traps_are_infinite() {
        // 0 -> {1 (absorbing), 2}; 2 loops forever; 3 -> 0.
        let mut c = AbsorbingChain::new();
        c.add_state(false, vec![(1, 1), (2, 1)]);
        c.add_state(true, vec![]);
        c.add_state(false, vec![(2, 1)]);
        c.add_state(false, vec![(0, 1)]);
        let e = c.hitting_times().unwrap();
        assert_eq!(e, vec![None, Some(0.0), None, None]);
    }

    #[test]
    fn self_loops_extend_time() {
        // Stay w.p. 2/3, absorb w.p. 1/3: geometric with mean 3.
        let mut c = AbsorbingChain::new();
        c.add_state(false, vec![(0, 2), (1, 1)]);
        c.add_state(true, vec![]);
        assert_eq!(c.hitting_times_exact(4).unwrap()[0], Some(ratio(3, 1)));
    }

    #[test]
    fn gauss_seidel_matches_dense() {
        // Birth-death chain long enough to force the iterative path.
        let n = DENSE_F64_LIMIT + 10;
        let mut c = AbsorbingChain::new();
        for s in 0..n {
            if s == 0 {
                c.add_state(true, vec![]);
            } else if s == n - 1 {
                c.add_state(false, vec![(s - 1, 1)]);
            } else {
                c.add_state(false, vec![(s - 1, 3), (s + 1, 1)]);
            }
        }
        let finite = c.finite_states().unwrap();
        let (order, index) = c.unknowns(&finite);
        let gs = c.gauss_seidel(&order, &index).unwrap();
        let dense = solve_dense(c.system(&order, &index, |w, d| w as f64 / d as f64)).unwrap();
        for (a, b) in gs.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn exact_cap_is_enforced() {
        assert!(two_cube().hitting_times_exact(1).unwrap_err().is_resource_cap());
    }
}
