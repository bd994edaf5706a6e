//! Shared optimization machinery: entropy objectives that are linear in a
//! decision block, Euclidean simplex projection, projected gradient ascent,
//! and simplex-grid enumeration.
//!
//! Every maximization in this crate has the same structure: a joint tensor
//! `joint(cell) = kernel(cell) * theta[cell_theta(cell)]` whose objective is
//! a signed sum of marginal entropies. That makes the objective smooth in
//! the interior with the closed-form partial derivative
//!
//! ```text
//! d/d theta_j  sum_m c_m H(q_m)
//!     = - sum_{cell : theta(cell) = j} kernel(cell)
//!         * sum_m c_m (log2 q_m(cell) + log2 e)
//! ```
//!
//! which `value_and_grad` evaluates in two passes over the cells.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::scalar::{real, Scalar};
use crate::shape::Shape;

/// A maximization target over a flat decision vector.
pub trait Objective<F: Scalar> {
    fn value(&self, theta: &[F]) -> F;
    fn value_and_grad(&self, theta: &[F]) -> (F, Vec<F>);
}

/// One entropy term: `coef * H(marginal over bucket_of)`.
struct Term<F> {
    coef: F,
    bucket_of: Vec<u32>,
    n_buckets: usize,
}

/// A signed sum of marginal entropies of `kernel .* theta[map]`.
pub(crate) struct EntropyObjective<F: Scalar> {
    kernel: Vec<F>,
    cell_theta: Vec<u32>,
    n_theta: usize,
    terms: Vec<Term<F>>,
}

impl<F: Scalar> EntropyObjective<F> {
    /// `term_specs` lists `(coefficient, axes of the marginal)` over the
    /// joint shape; terms with equal axis sets are merged, zeros dropped.
    pub fn new(
        shape: &Shape,
        kernel: Vec<F>,
        cell_theta: Vec<u32>,
        n_theta: usize,
        term_specs: &[(F, Vec<usize>)],
    ) -> Self {
        debug_assert_eq!(kernel.len(), shape.len());
        debug_assert_eq!(cell_theta.len(), shape.len());
        let mut merged: BTreeMap<Vec<usize>, F> = BTreeMap::new();
        for (c, axes) in term_specs {
            let mut a = axes.clone();
            a.sort_unstable();
            a.dedup();
            *merged.entry(a).or_insert_with(F::zero) += *c;
        }
        let tiny = real::<F>(1e-15);
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > tiny)
            .map(|(axes, coef)| {
                let sub_len = shape.sub_shape(&axes).len();
                Term { coef, bucket_of: shape.bucket_map(&axes), n_buckets: sub_len }
            })
            .collect();
        EntropyObjective { kernel, cell_theta, n_theta, terms }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    fn joint(&self, theta: &[F]) -> Vec<F> {
        debug_assert_eq!(theta.len(), self.n_theta);
        self.kernel
            .iter()
            .zip(&self.cell_theta)
            .map(|(&k, &t)| k * theta[t as usize])
            .collect()
    }

    fn marginals(&self, joint: &[F]) -> Vec<Vec<F>> {
        self.terms
            .iter()
            .map(|term| {
                let mut q = vec![F::zero(); term.n_buckets];
                for (cell, &p) in joint.iter().enumerate() {
                    q[term.bucket_of[cell] as usize] += p;
                }
                q
            })
            .collect()
    }
}

impl<F: Scalar> Objective<F> for EntropyObjective<F> {
    fn value(&self, theta: &[F]) -> F {
        let joint = self.joint(theta);
        let mut v = F::zero();
        for (term, q) in self.terms.iter().zip(self.marginals(&joint)) {
            v += term.coef * crate::dist::shannon(&q);
        }
        v
    }

    fn value_and_grad(&self, theta: &[F]) -> (F, Vec<F>) {
        let joint = self.joint(theta);
        let qs = self.marginals(&joint);
        let mut value = F::zero();
        for (term, q) in self.terms.iter().zip(qs.iter()) {
            value += term.coef * crate::dist::shannon(q);
        }
        // per-term log tables; zero buckets get a large negative log so a
        // boundary coordinate still sees a finite ascent direction
        let floor = real::<F>(1e-300).max(F::min_positive_value());
        let logs: Vec<Vec<F>> = qs
            .iter()
            .map(|q| q.iter().map(|&x| x.max(floor).log2()).collect())
            .collect();
        let log2e = real::<F>(std::f64::consts::LOG2_E);
        let mut grad = vec![F::zero(); self.n_theta];
        for (cell, &k) in self.kernel.iter().enumerate() {
            if k == F::zero() {
                continue;
            }
            let mut w = F::zero();
            for (t, term) in self.terms.iter().enumerate() {
                w += term.coef * (logs[t][term.bucket_of[cell] as usize] + log2e);
            }
            grad[self.cell_theta[cell] as usize] -= k * w;
        }
        (value, grad)
    }
}

/// Euclidean projection onto the probability simplex, in place.
pub(crate) fn project_simplex<F: Scalar>(v: &mut [F]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut u: Vec<F> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = F::zero();
    let mut tau = F::zero();
    let mut found = false;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - F::one()) / real::<F>((i + 1) as f64);
        if ui - t > F::zero() {
            tau = t;
            found = true;
        }
    }
    if !found {
        tau = (cumsum - F::one()) / real::<F>(n as f64);
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(F::zero());
    }
}

/// Project each block (a product of simplices) in place.
pub(crate) fn project_blocks<F: Scalar>(theta: &mut [F], blocks: &[Range<usize>]) {
    for b in blocks {
        project_simplex(&mut theta[b.clone()]);
    }
}

pub(crate) struct AscentOptions {
    pub step_init: f64,
    pub max_iters: usize,
    pub tol: f64,
}

pub(crate) struct AscentOutcome<F> {
    pub theta: Vec<F>,
    pub value: F,
    pub converged: bool,
}

/// Projected gradient ascent with backtracking; deterministic given the
/// start point.
pub(crate) fn ascend<F: Scalar, O: Objective<F>>(
    obj: &O,
    mut theta: Vec<F>,
    blocks: &[Range<usize>],
    opts: &AscentOptions,
) -> AscentOutcome<F> {
    project_blocks(&mut theta, blocks);
    let tol = real::<F>(opts.tol);
    let mut step = real::<F>(opts.step_init);
    let min_step = real::<F>(1e-12);
    let mut f = obj.value(&theta);
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let (_, g) = obj.value_and_grad(&theta);
        let mut s = step;
        let mut accepted = false;
        while s >= min_step {
            let mut trial: Vec<F> = theta.iter().zip(&g).map(|(&x, &gx)| x + s * gx).collect();
            project_blocks(&mut trial, blocks);
            let ft = obj.value(&trial);
            if ft > f {
                let gain = ft - f;
                theta = trial;
                f = ft;
                step = (s + s / real::<F>(2.0)).min(real::<F>(4.0));
                accepted = true;
                if gain < tol * F::one().max(f.abs()) {
                    converged = true;
                }
                break;
            }
            s /= real::<F>(2.0);
        }
        if !accepted {
            // no ascent direction improves the value: stationary
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    AscentOutcome { theta, value: f, converged }
}

/// Visit every length-`d` composition of `total` (grid points of the
/// simplex scaled by `total`), in lexicographic order.
pub(crate) fn for_each_composition(total: usize, d: usize, f: &mut impl FnMut(&[usize])) {
    let mut parts = vec![0usize; d];
    fn rec(parts: &mut Vec<usize>, pos: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if pos + 1 == parts.len() {
            parts[pos] = left;
            f(parts);
            return;
        }
        for v in 0..=left {
            parts[pos] = v;
            rec(parts, pos + 1, left - v, f);
        }
    }
    if d == 0 {
        return;
    }
    rec(&mut parts, 0, total, f);
}

/// Number of compositions of `total` into `d` parts: C(total + d - 1, d - 1).
pub(crate) fn n_compositions(total: usize, d: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    let mut num: u128 = 1;
    for i in 0..(d - 1) {
        num = num.saturating_mul((total + d - 1 - i) as u128);
        num /= (i + 1) as u128;
    }
    num
}

/// Deterministic seed mixing for per-grid-point inner searches: depends on
/// the point's content, not its enumeration index, so nested grids see
/// identical inner runs.
pub(crate) fn mix_seed(master: u64, data: &[usize]) -> u64 {
    let mut h = master ^ 0x9e37_79b9_7f4a_7c15;
    for &x in data {
        let mut z = h ^ (x as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_basics() {
        let mut v = vec![0.5f64, 0.5];
        project_simplex(&mut v);
        assert!((v[0] - 0.5).abs() < 1e-12);

        let mut v = vec![2.0f64, 0.0];
        project_simplex(&mut v);
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert_eq!(v[1], 0.0);

        let mut v = vec![-3.0f64, -1.0, -2.0];
        project_simplex(&mut v);
        let s: f64 = v.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ascent_maximizes_entropy() {
        // single term: H over theta itself; max at uniform
        let shape = Shape::new(vec![4]).unwrap();
        let obj = EntropyObjective::new(
            &shape,
            vec![1.0f64; 4],
            (0..4u32).collect(),
            4,
            &[(1.0, vec![0])],
        );
        let out = ascend(
            &obj,
            vec![0.7, 0.1, 0.1, 0.1],
            &[0..4],
            &AscentOptions { step_init: 0.5, max_iters: 200, tol: 1e-12 },
        );
        assert!(out.converged);
        assert!((out.value - 2.0).abs() < 1e-6);
        for &x in &out.theta {
            assert!((x - 0.25).abs() < 1e-4);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // two overlapping marginals with mixed signs
        let shape = Shape::new(vec![2, 3]).unwrap();
        let kernel: Vec<f64> = (0..6).map(|i| 0.3 + 0.1 * i as f64).collect();
        let obj = EntropyObjective::new(
            &shape,
            kernel,
            (0..6).map(|i| (i % 3) as u32).collect(),
            3,
            &[(1.0, vec![0]), (-0.5, vec![1]), (0.25, vec![0, 1])],
        );
        let theta = vec![0.5f64, 0.3, 0.2];
        let (_, g) = obj.value_and_grad(&theta);
        let h = 1e-6;
        for j in 0..3 {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
            assert!((g[j] - fd).abs() < 1e-6, "coord {}: {} vs {}", j, g[j], fd);
        }
    }

    #[test]
    fn composition_counts() {
        let mut n = 0usize;
        for_each_composition(8, 4, &mut |_| n += 1);
        assert_eq!(n as u128, n_compositions(8, 4));
        assert_eq!(n_compositions(8, 4), 165);
    }

    #[test]
    fn seed_mix_depends_on_content() {
        let a = mix_seed(1, &[0, 4, 4]);
        let b = mix_seed(1, &[4, 0, 4]);
        assert_ne!(a, b);
        assert_eq!(a, mix_seed(1, &[0, 4, 4]));
    }
}
