//! Fractional partitions of `[k]` and the polytope they live in.
//!
//! A fractional partition assigns a nonnegative weight to every nonempty
//! proper subset of `[k]` such that for each element `i` the weights of the
//! subsets containing `i` sum to one. Subsets are encoded as k-bit masks
//! (bit `i` set means element `i` is in the subset, elements 0-based);
//! canonical iteration order is ascending mask value.

mod simplex;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

/// Subsets of `[k]` as bit masks, bit `i` = element `i`.
pub type SubsetMask = u32;

/// Row-sum tolerance for the coverage constraint (reference `f64` value).
const ROW_TOL: f64 = 1e-9;
/// Weights at or below this are treated as exactly zero.
const ZERO_W: f64 = 1e-12;

fn full_mask(k: usize) -> SubsetMask {
    (1u32 << k) - 1
}

/// Nonnegative weights on nonempty proper subsets of `[k]` whose
/// per-element incidence sums equal 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPartition<F: Scalar> {
    k: usize,
    weights: BTreeMap<SubsetMask, F>,
}

/// Outcome of validating a candidate weight map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Elements whose incidence row sum is off, with the sum found.
    pub bad_rows: Vec<(usize, f64)>,
    /// Subsets carrying a negative weight.
    pub negative: Vec<(SubsetMask, f64)>,
    /// Empty or full-set masks carrying nonzero weight.
    pub invalid_subsets: Vec<SubsetMask>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.bad_rows.is_empty() && self.negative.is_empty() && self.invalid_subsets.is_empty()
    }
}

impl<F: Scalar> FractionalPartition<F> {
    /// Validate and build; weights below the zero threshold are dropped.
    pub fn new(k: usize, weights: BTreeMap<SubsetMask, F>) -> Result<Self> {
        let report = validate_weights(k, &weights);
        if !report.ok() {
            return Err(Error::InvalidPartition(report_to_string(&report)));
        }
        let zero = real::<F>(ZERO_W);
        let weights = weights.into_iter().filter(|&(_, w)| w > zero).collect();
        Ok(FractionalPartition { k, weights })
    }

    /// All subsets of size k-1 at weight 1/(k-1).
    pub fn uniform_km1(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput("uniform preset needs k >= 2".into()));
        }
        let w = F::one() / real::<F>((k - 1) as f64);
        let full = full_mask(k);
        let mut weights = BTreeMap::new();
        for i in 0..k {
            weights.insert(full & !(1u32 << i), w);
        }
        FractionalPartition::new(k, weights)
    }

    /// Weight 1/(r-1) on the complement of each block of `pi`.
    pub fn from_partition(pi: &Partition) -> Result<Self> {
        let r = pi.num_blocks();
        if r < 2 {
            return Err(Error::InvalidInput(
                "partition preset needs at least 2 blocks".into(),
            ));
        }
        let w = F::one() / real::<F>((r - 1) as f64);
        let full = full_mask(pi.k());
        let mut weights: BTreeMap<SubsetMask, F> = BTreeMap::new();
        for &b in pi.blocks() {
            *weights.entry(full & !b).or_insert_with(F::zero) += w;
        }
        FractionalPartition::new(pi.k(), weights)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Stored weights in ascending mask order (zeros omitted).
    pub fn weights(&self) -> impl Iterator<Item = (SubsetMask, F)> + '_ {
        self.weights.iter().map(|(&m, &w)| (m, w))
    }

    pub fn weight(&self, mask: SubsetMask) -> F {
        self.weights.get(&mask).copied().unwrap_or_else(F::zero)
    }

    pub fn sum_weights(&self) -> F {
        self.weights.values().copied().sum()
    }

    /// Re-run the invariant checks (useful after hand-editing weights).
    pub fn validate(&self) -> ValidationReport {
        validate_weights(self.k, &self.weights)
    }

    /// True iff no weighted subset contains all of `{0, .., r-1}`.
    ///
    /// Callers should pass `1 <= r <= k`.
    pub fn admissible_for_keyset(&self, r: usize) -> bool {
        debug_assert!(r >= 1 && r <= self.k);
        let rmask = full_mask(r.min(self.k));
        let zero = real::<F>(ZERO_W);
        self.weights
            .iter()
            .all(|(&m, &w)| w <= zero || (m & rmask) != rmask)
    }

    /// Dense weight vector over all nonempty proper subsets, ascending mask.
    pub fn as_dense(&self) -> Vec<F> {
        let n = (1usize << self.k) - 2;
        let mut v = vec![F::zero(); n];
        for (&m, &w) in &self.weights {
            v[m as usize - 1] = w;
        }
        v
    }

    /// Inverse of [`as_dense`](Self::as_dense); validates the result.
    pub fn from_dense(k: usize, dense: &[F]) -> Result<Self> {
        if dense.len() != (1usize << k) - 2 {
            return Err(Error::InvalidInput("dense weight vector has wrong length".into()));
        }
        let mut weights = BTreeMap::new();
        for (i, &w) in dense.iter().enumerate() {
            if w != F::zero() {
                weights.insert((i + 1) as SubsetMask, w);
            }
        }
        FractionalPartition::new(k, weights)
    }
}

/// Validate a raw weight map against the polytope constraints.
pub fn validate_weights<F: Scalar>(
    k: usize,
    weights: &BTreeMap<SubsetMask, F>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if k < 2 {
        report.bad_rows.push((0, f64::NAN));
        return report;
    }
    let zero = real::<F>(ZERO_W);
    let full = full_mask(k);
    for (&m, &w) in weights {
        if w < -zero {
            report.negative.push((m, crate::scalar::as_f64(w)));
        }
        if (m == 0 || m >= full) && w.abs() > zero {
            report.invalid_subsets.push(m);
        }
    }
    let row_tol = real::<F>(ROW_TOL).max(F::mass_tol());
    for i in 0..k {
        let bit = 1u32 << i;
        let sum: F = weights
            .iter()
            .filter(|&(&m, _)| m & bit != 0 && m != 0 && m < full)
            .map(|(_, &w)| w)
            .sum();
        if (sum - F::one()).abs() > row_tol {
            report.bad_rows.push((i, crate::scalar::as_f64(sum)));
        }
    }
    report
}

fn report_to_string(r: &ValidationReport) -> String {
    let mut parts = Vec::new();
    for &(i, s) in &r.bad_rows {
        parts.push(format!("element {} coverage sums to {}", i + 1, s));
    }
    for &(m, w) in &r.negative {
        parts.push(format!("subset {:#b} has negative weight {}", m, w));
    }
    for &m in &r.invalid_subsets {
        parts.push(format!("subset {:#b} is empty or the full set", m));
    }
    parts.join("; ")
}

/// A set partition of `[k]` into disjoint nonempty blocks covering `[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    blocks: Vec<SubsetMask>,
}

impl Partition {
    /// Blocks given as 0-based element lists.
    pub fn new(k: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if k == 0 || k > 31 {
            return Err(Error::InvalidInput("partition ground set must have 1..=31 elements".into()));
        }
        let mut masks = Vec::with_capacity(blocks.len());
        let mut seen: SubsetMask = 0;
        for block in blocks {
            let mut m: SubsetMask = 0;
            for &e in block {
                if e >= k {
                    return Err(Error::InvalidInput(format!(
                        "element {} outside the ground set of size {}",
                        e, k
                    )));
                }
                m |= 1 << e;
            }
            if m == 0 {
                return Err(Error::InvalidInput("empty block".into()));
            }
            if m & seen != 0 {
                return Err(Error::InvalidInput("blocks are not disjoint".into()));
            }
            seen |= m;
            masks.push(m);
        }
        if seen != full_mask(k) {
            return Err(Error::InvalidInput("blocks do not cover the ground set".into()));
        }
        masks.sort_by_key(|m| m.trailing_zeros());
        Ok(Partition { k, blocks: masks })
    }

    pub fn from_masks(k: usize, mut blocks: Vec<SubsetMask>) -> Result<Self> {
        blocks.sort_by_key(|m| m.trailing_zeros());
        let lists: Vec<Vec<usize>> = blocks
            .iter()
            .map(|&m| (0..k).filter(|&i| m & (1 << i) != 0).collect())
            .collect();
        Partition::new(k, &lists)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn block_elements(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|&m| (0..self.k).filter(|&i| m & (1 << i) != 0).collect())
            .collect()
    }

    /// Every partition of `[k]` with at least `min_blocks` blocks, by
    /// restricted-growth strings. Capped at k <= 8 (4140 partitions).
    pub fn enumerate(k: usize, min_blocks: usize) -> Result<Vec<Partition>> {
        if k == 0 {
            return Err(Error::InvalidInput("empty ground set".into()));
        }
        if k > 8 {
            return Err(Error::SizeLimit(format!(
                "partition enumeration capped at k = 8, got {}",
                k
            )));
        }
        let mut out = Vec::new();
        let mut labels = vec![0usize; k];
        rgs(&mut labels, 1, 0, &mut |labels, nblocks| {
            if nblocks >= min_blocks {
                let mut masks = vec![0 as SubsetMask; nblocks];
                for (i, &l) in labels.iter().enumerate() {
                    masks[l] |= 1 << i;
                }
                out.push(Partition { k, blocks: masks });
            }
        });
        Ok(out)
    }
}

fn rgs(labels: &mut Vec<usize>, pos: usize, max_used: usize, f: &mut impl FnMut(&[usize], usize)) {
    if pos == labels.len() {
        f(labels, max_used + 1);
        return;
    }
    for l in 0..=max_used + 1 {
        labels[pos] = l;
        rgs(labels, pos + 1, max_used.max(l), f);
    }
    labels[pos] = 0;
}

/// Optimization sense for [`optimize_linear`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// LP route selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpMethod {
    /// Vertex scan for k <= 5, simplex beyond.
    Auto,
    VertexScan,
    Simplex,
}

/// Optimize a linear objective `sum_B c_B lambda_B` over the weight
/// polytope. The optimum is attained at a vertex; ties break toward the
/// first vertex in lexicographic (ascending-mask basis) order.
pub fn optimize_linear<F: Scalar>(
    k: usize,
    objective: &BTreeMap<SubsetMask, F>,
    sense: Sense,
) -> Result<(FractionalPartition<F>, F)> {
    optimize_linear_with(k, objective, sense, LpMethod::Auto)
}

pub fn optimize_linear_with<F: Scalar>(
    k: usize,
    objective: &BTreeMap<SubsetMask, F>,
    sense: Sense,
    method: LpMethod,
) -> Result<(FractionalPartition<F>, F)> {
    if !(2..=12).contains(&k) {
        return Err(Error::SizeLimit(format!(
            "linear optimization supports 2 <= k <= 12, got {}",
            k
        )));
    }
    let full = full_mask(k);
    for &m in objective.keys() {
        if m == 0 || m >= full {
            return Err(Error::InvalidInput(
                "objective indexes an empty or non-proper subset".into(),
            ));
        }
    }
    let use_vertices = match method {
        LpMethod::Auto => k <= 5,
        LpMethod::VertexScan => {
            if k > 5 {
                return Err(Error::SizeLimit("vertex scan capped at k = 5".into()));
            }
            true
        }
        LpMethod::Simplex => false,
    };
    if use_vertices {
        let verts = vertices::<F>(k)?;
        let mut best: Option<(usize, F)> = None;
        for (vi, v) in verts.iter().enumerate() {
            let val: F = objective
                .iter()
                .map(|(&m, &c)| c * v.weight(m))
                .sum();
            let better = match (best, sense) {
                (None, _) => true,
                (Some((_, bv)), Sense::Min) => val < bv - real::<F>(1e-15),
                (Some((_, bv)), Sense::Max) => val > bv + real::<F>(1e-15),
            };
            if better {
                best = Some((vi, val));
            }
        }
        let (vi, val) = best.expect("polytope has at least one vertex");
        Ok((verts[vi].clone(), val))
    } else {
        // rows: coverage constraint per element; columns: ascending masks
        let n = (1usize << k) - 2;
        let mut a = vec![vec![F::zero(); n]; k];
        for j in 0..n {
            let mask = (j + 1) as SubsetMask;
            for (i, row) in a.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    row[j] = F::one();
                }
            }
        }
        let b = vec![F::one(); k];
        let mut c = vec![F::zero(); n];
        for (&m, &v) in objective {
            c[m as usize - 1] = match sense {
                Sense::Min => v,
                Sense::Max => -v,
            };
        }
        let sol = simplex::solve_min(&a, &b, &c)?;
        let fp = FractionalPartition::from_dense(k, &sol.x)?;
        let value = match sense {
            Sense::Min => sol.value,
            Sense::Max => -sol.value,
        };
        Ok((fp, value))
    }
}

/// All vertices of the weight polytope, for k <= 5.
///
/// Enumerates k-subsets of the (ascending) mask list as candidate bases,
/// solves the k x k incidence system, and keeps nonnegative solutions.
pub fn vertices<F: Scalar>(k: usize) -> Result<Vec<FractionalPartition<F>>> {
    if !(2..=5).contains(&k) {
        return Err(Error::SizeLimit(format!(
            "vertex enumeration supports 2 <= k <= 5, got {}",
            k
        )));
    }
    let masks: Vec<SubsetMask> = (1..full_mask(k)).collect();
    let n = masks.len();
    let mut out: Vec<FractionalPartition<F>> = Vec::new();
    let mut seen: Vec<Vec<i64>> = Vec::new();

    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if let Some(lambda) = solve_basis::<F>(k, &masks, &combo) {
            let mut dense = vec![F::zero(); n];
            let zero = real::<F>(ZERO_W);
            let mut feasible = true;
            for (pos, &ci) in combo.iter().enumerate() {
                let w = lambda[pos];
                if w < -real::<F>(1e-9) {
                    feasible = false;
                    break;
                }
                if w > zero {
                    dense[ci] = w;
                }
            }
            if feasible {
                let key: Vec<i64> = dense
                    .iter()
                    .map(|&w| (crate::scalar::as_f64(w) * 1e9).round() as i64)
                    .collect();
                if !seen.contains(&key) {
                    seen.push(key);
                    out.push(FractionalPartition::from_dense(k, &dense)?);
                }
            }
        }
        // next lexicographic combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if combo[i] != i + n - k {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Solve the k x k incidence system for a candidate basis; `None` if singular.
fn solve_basis<F: Scalar>(k: usize, masks: &[SubsetMask], combo: &[usize]) -> Option<Vec<F>> {
    let mut m = vec![vec![F::zero(); k + 1]; k];
    for i in 0..k {
        for (pos, &ci) in combo.iter().enumerate() {
            if masks[ci] & (1 << i) != 0 {
                m[i][pos] = F::one();
            }
        }
        m[i][k] = F::one();
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| {
            m[a][col]
                .abs()
                .partial_cmp(&m[b][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].abs() < real::<F>(1e-9) {
            return None;
        }
        m.swap(col, piv);
        let d = m[col][col];
        for j in col..=k {
            m[col][j] /= d;
        }
        for r in 0..k {
            if r != col {
                let f = m[r][col];
                if f != F::zero() {
                    for j in col..=k {
                        let s = m[col][j] * f;
                        m[r][j] -= s;
                    }
                }
            }
        }
    }
    Some((0..k).map(|i| m[i][k]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    type Fp = FractionalPartition<f64>;

    #[test]
    fn k2_singletons_valid() {
        let mut w = BTreeMap::new();
        w.insert(0b01, 1.0);
        w.insert(0b10, 1.0);
        let fp = Fp::new(2, w).unwrap();
        assert!(fp.validate().ok());
        assert!((fp.sum_weights() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k3_pairs_at_half_valid() {
        let fp = Fp::uniform_km1(3).unwrap();
        assert!(fp.validate().ok());
        for m in [0b011u32, 0b101, 0b110] {
            assert!((fp.weight(m) - 0.5).abs() < 1e-12);
        }
        assert_eq!(fp.weight(0b001), 0.0);
    }

    #[test]
    fn k4_triples_at_third() {
        let fp = Fp::uniform_km1(4).unwrap();
        assert!(fp.validate().ok());
        for m in [0b0111u32, 0b1011, 0b1101, 0b1110] {
            assert!((fp.weight(m) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_coverage_invalid() {
        let mut w = BTreeMap::new();
        w.insert(0b001u32, 1.0);
        let report = validate_weights(3, &w);
        assert!(!report.ok());
        assert_eq!(report.bad_rows.len(), 2);
        assert!(Fp::new(3, w).is_err());
    }

    #[test]
    fn full_set_weight_invalid() {
        let mut w = BTreeMap::new();
        w.insert(0b011u32, 1.0);
        w.insert(0b111u32, 0.5);
        let report = validate_weights(3, &w);
        assert!(report.invalid_subsets.contains(&0b111));
    }

    #[test]
    fn partition_preset_singletons_coincides_with_uniform() {
        let pi = Partition::new(3, &[vec![0], vec![1], vec![2]]).unwrap();
        let a = Fp::from_partition(&pi).unwrap();
        let b = Fp::uniform_km1(3).unwrap();
        assert_eq!(a.as_dense(), b.as_dense());
    }

    #[test]
    fn partition_preset_two_blocks() {
        let pi = Partition::new(3, &[vec![0, 1], vec![2]]).unwrap();
        let fp = Fp::from_partition(&pi).unwrap();
        assert!(fp.validate().ok());
        assert!((fp.weight(0b100) - 1.0).abs() < 1e-12);
        assert!((fp.weight(0b011) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_preset_k4_mixed() {
        let pi = Partition::new(4, &[vec![0], vec![1], vec![2, 3]]).unwrap();
        let fp = Fp::from_partition(&pi).unwrap();
        assert!(fp.validate().ok());
        // complements of the blocks at 1/2
        assert!((fp.weight(0b1110) - 0.5).abs() < 1e-12);
        assert!((fp.weight(0b1101) - 0.5).abs() < 1e-12);
        assert!((fp.weight(0b0011) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn k2_polytope_is_a_point() {
        let verts = vertices::<f64>(2).unwrap();
        assert_eq!(verts.len(), 1);
        let mut obj = BTreeMap::new();
        obj.insert(0b01u32, 3.0f64);
        obj.insert(0b10u32, -7.0);
        let (fp, v) = optimize_linear(2, &obj, Sense::Min).unwrap();
        assert!((fp.weight(0b01) - 1.0).abs() < 1e-12);
        assert!((v - (3.0 - 7.0)).abs() < 1e-12);
    }

    #[test]
    fn k3_total_weight_range() {
        let ones: BTreeMap<SubsetMask, f64> =
            (1u32..7).map(|m| (m, 1.0)).collect();
        let (fp_min, vmin) = optimize_linear(3, &ones, Sense::Min).unwrap();
        assert!((vmin - 1.5).abs() < 1e-9);
        assert!((fp_min.weight(0b011) - 0.5).abs() < 1e-9);
        let (fp_max, vmax) = optimize_linear(3, &ones, Sense::Max).unwrap();
        assert!((vmax - 3.0).abs() < 1e-9);
        assert!((fp_max.weight(0b001) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn k3_vertices_include_singletons_and_pairs() {
        let verts = vertices::<f64>(3).unwrap();
        assert_eq!(verts.len(), 5);
        let singleton = Fp::from_dense(
            3,
            &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let pairs = Fp::uniform_km1(3).unwrap();
        assert!(verts.iter().any(|v| v.as_dense() == singleton.as_dense()));
        assert!(verts.iter().any(|v| v.as_dense() == pairs.as_dense()));
        for v in &verts {
            assert!(v.validate().ok());
        }
    }

    #[test]
    fn admissibility() {
        // k=3, r=2: weight on {0,1} makes it inadmissible
        let pi = Partition::new(3, &[vec![2], vec![0, 1]]).unwrap();
        let fp = Fp::from_partition(&pi).unwrap(); // weights on {0,1} and {2}
        assert!(!fp.admissible_for_keyset(2));
        // uniform km1 with r = k: no proper subset contains [k]
        let fp = Fp::uniform_km1(3).unwrap();
        assert!(fp.admissible_for_keyset(3));
        // r=1: any subset containing element 0 breaks admissibility
        let mut w = BTreeMap::new();
        w.insert(0b001u32, 1.0);
        w.insert(0b110u32, 1.0);
        let fp = Fp::new(3, w).unwrap();
        assert!(!fp.admissible_for_keyset(1));
    }

    #[test]
    fn simplex_route_matches_vertex_scan() {
        let objs: Vec<BTreeMap<SubsetMask, f64>> = vec![
            (1u32..15).map(|m| (m, (m as f64 * 0.7).sin())).collect(),
            (1u32..15).map(|m| (m, (m as f64).cos() * 2.0)).collect(),
        ];
        for obj in &objs {
            for sense in [Sense::Min, Sense::Max] {
                let (_, a) = optimize_linear_with(4, obj, sense, LpMethod::VertexScan).unwrap();
                let (fp, b) = optimize_linear_with(4, obj, sense, LpMethod::Simplex).unwrap();
                assert!((a - b).abs() < 1e-9, "sense {:?}: {} vs {}", sense, a, b);
                assert!(fp.validate().ok());
            }
        }
    }

    #[test]
    fn simplex_handles_larger_k() {
        let obj: BTreeMap<SubsetMask, f64> =
            (1u32..63).map(|m| (m, ((m * 37) % 11) as f64 - 5.0)).collect();
        let (fp, v) = optimize_linear(6, &obj, Sense::Min).unwrap();
        assert!(fp.validate().ok());
        // value must not exceed the objective at the km1 preset
        let preset = Fp::uniform_km1(6).unwrap();
        let at_preset: f64 = obj.iter().map(|(&m, &c)| c * preset.weight(m)).sum();
        assert!(v <= at_preset + 1e-9);
    }

    #[test]
    fn enumerate_partitions_counts() {
        assert_eq!(Partition::enumerate(3, 1).unwrap().len(), 5);
        assert_eq!(Partition::enumerate(4, 1).unwrap().len(), 15);
        assert_eq!(Partition::enumerate(4, 2).unwrap().len(), 14);
        assert!(Partition::enumerate(9, 2).is_err());
    }
}
