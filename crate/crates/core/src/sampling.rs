//! Seeded random instances for property suites and randomized tests.
//!
//! Everything here is driven by a caller-supplied RNG (ChaCha in practice)
//! so suites are reproducible bit-for-bit across runs and platforms.

use rand::Rng;

use crate::dist::{Channel, JointDist, VarSpec};
use crate::error::Result;
use crate::fracpart::{vertices, FractionalPartition, Partition};
use crate::scalar::{real, Scalar};

/// Strictly positive random weights summing to 1 (flat Dirichlet).
pub fn random_simplex_point<F: Scalar, R: Rng>(len: usize, rng: &mut R) -> Vec<F> {
    let mut v: Vec<F> = (0..len)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-12..1.0);
            real::<F>(-u.ln())
        })
        .collect();
    let sum: F = v.iter().copied().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
    v
}

/// Random full-support joint distribution over the given variables.
pub fn random_joint<F: Scalar, R: Rng>(vars: Vec<VarSpec>, rng: &mut R) -> Result<JointDist<F>> {
    let cells: usize = vars.iter().map(|v| v.card).product();
    JointDist::new(vars, random_simplex_point(cells, rng))
}

/// Random channel: every input row is a fresh simplex point.
pub fn random_channel<F: Scalar, R: Rng>(
    in_vars: Vec<VarSpec>,
    out_vars: Vec<VarSpec>,
    rng: &mut R,
) -> Result<Channel<F>> {
    let rows: usize = in_vars.iter().map(|v| v.card).product();
    let cols: usize = out_vars.iter().map(|v| v.card).product();
    let mut probs = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        probs.extend(random_simplex_point::<F, R>(cols, rng));
    }
    Channel::new(in_vars, out_vars, probs)
}

/// Random point of the weight polytope: a convex mixture of its vertices
/// (k <= 5).
pub fn random_fractional_partition<F: Scalar, R: Rng>(
    k: usize,
    rng: &mut R,
) -> Result<FractionalPartition<F>> {
    let verts = vertices::<F>(k)?;
    let mix = random_simplex_point::<F, R>(verts.len(), rng);
    let n = (1usize << k) - 2;
    let mut dense = vec![F::zero(); n];
    for (v, &w) in verts.iter().zip(mix.iter()) {
        for (i, x) in v.as_dense().into_iter().enumerate() {
            dense[i] += w * x;
        }
    }
    FractionalPartition::from_dense(k, &dense)
}

/// A uniformly random vertex of the weight polytope (k <= 5).
pub fn random_vertex<F: Scalar, R: Rng>(k: usize, rng: &mut R) -> Result<FractionalPartition<F>> {
    let verts = vertices::<F>(k)?;
    Ok(verts[rng.gen_range(0..verts.len())].clone())
}

/// Random set partition of `[k]` with at least `min_blocks` blocks.
pub fn random_partition<R: Rng>(k: usize, min_blocks: usize, rng: &mut R) -> Result<Partition> {
    let all = Partition::enumerate(k, min_blocks)?;
    Ok(all[rng.gen_range(0..all.len())].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_points_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in [1usize, 2, 5, 40] {
            let v = random_simplex_point::<f64, _>(len, &mut rng);
            let s: f64 = v.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn mixtures_stay_in_polytope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k = rng.gen_range(2..=5);
            let fp = random_fractional_partition::<f64, _>(k, &mut rng).unwrap();
            assert!(fp.validate().ok(), "mixture left the polytope at k={}", k);
        }
    }

    #[test]
    fn partition_presets_validate_up_to_k8() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let k = rng.gen_range(2..=8);
            let pi = random_partition(k, 2, &mut rng).unwrap();
            let fp = FractionalPartition::<f64>::from_partition(&pi).unwrap();
            assert!(fp.validate().ok());
        }
    }
}
