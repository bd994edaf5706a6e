//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0` for the small systems produced by
//! the weight polytope (k <= 12 rows, up to 2^k - 2 columns). Bland's rule
//! (smallest eligible index enters, smallest basic index breaks ratio ties)
//! rules out cycling on degenerate vertices.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

pub(crate) struct LpSolution<F> {
    pub x: Vec<F>,
    pub value: F,
}

pub(crate) fn solve_min<F: Scalar>(a: &[Vec<F>], b: &[F], c: &[F]) -> Result<LpSolution<F>> {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);
    let eps = real::<F>(1e-10);

    // tableau: m rows x (n + m artificials + rhs)
    let width = n + m + 1;
    let mut t: Vec<Vec<F>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![F::zero(); width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = F::one();
        row[width - 1] = b[i];
        if b[i] < F::zero() {
            for v in row.iter_mut() {
                *v = -*v;
            }
            row[n + i] = F::one();
        }
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize the artificial sum
    let phase1_cost: Vec<F> = (0..n + m)
        .map(|j| if j >= n { F::one() } else { F::zero() })
        .collect();
    run(&mut t, &mut basis, &phase1_cost, n + m, eps)?;
    let p1 = objective(&t, &basis, &phase1_cost);
    if p1 > real::<F>(1e-7) {
        return Err(Error::Numerical("LP phase 1 did not reach feasibility".into()));
    }
    // pivot any leftover artificials out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > eps) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }

    // phase 2 on the original columns only
    let mut cost = vec![F::zero(); n + m];
    cost[..n].copy_from_slice(c);
    run(&mut t, &mut basis, &cost, n, eps)?;

    let mut x = vec![F::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i].last().copied().unwrap();
        }
    }
    let value = objective(&t, &basis, &cost);
    Ok(LpSolution { x, value })
}

fn objective<F: Scalar>(t: &[Vec<F>], basis: &[usize], cost: &[F]) -> F {
    basis
        .iter()
        .enumerate()
        .map(|(i, &bv)| cost[bv] * *t[i].last().unwrap())
        .sum()
}

/// Run simplex iterations over the first `ncols` columns.
fn run<F: Scalar>(
    t: &mut [Vec<F>],
    basis: &mut [usize],
    cost: &[F],
    ncols: usize,
    eps: F,
) -> Result<()> {
    let m = t.len();
    loop {
        // reduced costs r_j = c_j - c_B . T_j; Bland: smallest j with r_j < -eps
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * t[i][j];
            }
            if r < -eps {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { return Ok(()) };

        // ratio test; ties by smallest basic variable index
        let mut leave: Option<usize> = None;
        let mut best = F::infinity();
        for i in 0..m {
            if t[i][j] > eps {
                let ratio = *t[i].last().unwrap() / t[i][j];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - eps || (ratio < best + eps && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else {
            return Err(Error::Numerical("LP unbounded".into()));
        };
        pivot(t, i, j);
        basis[i] = j;
    }
}

fn pivot<F: Scalar>(t: &mut [Vec<F>], pr: usize, pc: usize) {
    let piv = t[pr][pc];
    for v in t[pr].iter_mut() {
        *v /= piv;
    }
    for i in 0..t.len() {
        if i != pr {
            let f = t[i][pc];
            if f != F::zero() {
                for j in 0..t[i].len() {
                    let d = t[pr][j] * f;
                    t[i][j] -= d;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_lp() {
        // min -x - y  s.t.  x + y + s = 1
        let a = vec![vec![1.0f64, 1.0, 1.0]];
        let b = vec![1.0];
        let c = vec![-1.0, -1.0, 0.0];
        let s = solve_min(&a, &b, &c).unwrap();
        assert!((s.value + 1.0).abs() < 1e-9);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_system() {
        // min x1 + 2 x2  s.t.  x1 + x2 = 2, x1 - x2 = 0  ->  x = (1,1)
        let a = vec![vec![1.0f64, 1.0], vec![1.0, -1.0]];
        let b = vec![2.0, 0.0];
        let c = vec![1.0, 2.0];
        let s = solve_min(&a, &b, &c).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!((s.x[1] - 1.0).abs() < 1e-9);
        assert!((s.value - 3.0).abs() < 1e-9);
    }
}
