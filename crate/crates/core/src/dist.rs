//! Exact discrete probability: joint tensors, channels, and entropy kernels.
//!
//! Everything downstream (multivariate mutual information, dependence
//! balance, key-rate bounds, MAC regions) reduces to entropies of marginals
//! of dense joint tensors built here. Values are immutable after
//! construction and every operation is a pure function, so concurrent reads
//! are safe.
//!
//! Conventions: all logarithms are base 2, rates are in bits, and
//! `0 * log 0 = 0` by an explicit branch. Tensors are dense, row-major with
//! the first variable slowest, and capped at 2^24 cells.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::shape::Shape;

pub use crate::shape::MAX_CELLS;

/// A named discrete variable with alphabet size `card`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSpec {
    pub name: String,
    pub card: usize,
}

impl VarSpec {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        VarSpec { name: name.into(), card }
    }
}

fn check_unique_names(vars: &[VarSpec]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if v.card == 0 {
            return Err(Error::InvalidInput(format!(
                "variable `{}` has cardinality 0",
                v.name
            )));
        }
        if vars[..i].iter().any(|u| u.name == v.name) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

/// Clamp tiny negatives to zero, reject anything more negative, and return
/// the total mass.
fn clamp_and_sum<F: Scalar>(probs: &mut [F]) -> Result<F> {
    let clamp = F::clamp_tol();
    let mut sum = F::zero();
    for (cell, p) in probs.iter_mut().enumerate() {
        if *p < F::zero() {
            if *p < -clamp {
                return Err(Error::NegativeProbability {
                    value: crate::scalar::as_f64(*p),
                    cell,
                });
            }
            *p = F::zero();
        }
        sum += *p;
    }
    Ok(sum)
}

/// An exact joint distribution over an ordered list of named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist<F: Scalar> {
    vars: Vec<VarSpec>,
    shape: Shape,
    probs: Vec<F>,
}

impl<F: Scalar> JointDist<F> {
    /// Build a distribution from a dense row-major tensor (first variable
    /// slowest). Entries within `clamp_tol` below zero are clamped; total
    /// mass must be within `mass_tol` of 1 and is renormalized exactly.
    pub fn new(vars: Vec<VarSpec>, mut probs: Vec<F>) -> Result<Self> {
        check_unique_names(&vars)?;
        let shape = Shape::new(vars.iter().map(|v| v.card).collect())?;
        if probs.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "tensor has {} cells but the variables define {}",
                probs.len(),
                shape.len()
            )));
        }
        let sum = clamp_and_sum(&mut probs)?;
        if (sum - F::one()).abs() > F::mass_tol() {
            return Err(Error::NotNormalized {
                sum: crate::scalar::as_f64(sum),
                tol: crate::scalar::as_f64(F::mass_tol()),
            });
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(JointDist { vars, shape, probs })
    }

    /// Uniform distribution over the given variables.
    pub fn uniform(vars: Vec<VarSpec>) -> Result<Self> {
        check_unique_names(&vars)?;
        let shape = Shape::new(vars.iter().map(|v| v.card).collect())?;
        let p = F::one() / real::<F>(shape.len() as f64);
        let probs = vec![p; shape.len()];
        Ok(JointDist { vars, shape, probs })
    }

    /// Point mass on a single outcome (multi-index in variable order).
    pub fn point_mass(vars: Vec<VarSpec>, outcome: &[usize]) -> Result<Self> {
        check_unique_names(&vars)?;
        let shape = Shape::new(vars.iter().map(|v| v.card).collect())?;
        if outcome.len() != vars.len()
            || outcome.iter().zip(&vars).any(|(&i, v)| i >= v.card)
        {
            return Err(Error::InvalidInput("outcome out of range".into()));
        }
        let mut probs = vec![F::zero(); shape.len()];
        probs[shape.index_of(outcome)] = F::one();
        Ok(JointDist { vars, shape, probs })
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn num_cells(&self) -> usize {
        self.shape.len()
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name == name)
    }

    fn axis_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Resolve a name set to sorted axis indices; rejects duplicates.
    fn resolve_axes<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut axes = Vec::with_capacity(names.len());
        for n in names {
            let a = self.axis_of(n.as_ref())?;
            if axes.contains(&a) {
                return Err(Error::DuplicateVariable(n.as_ref().to_string()));
            }
            axes.push(a);
        }
        axes.sort_unstable();
        Ok(axes)
    }

    fn entropy_of_axes(&self, axes: &[usize]) -> F {
        let buckets = self.shape.fold_buckets(&self.probs, axes);
        shannon(&buckets)
    }

    /// Shannon entropy H(subset) in bits.
    pub fn entropy<S: AsRef<str>>(&self, subset: &[S]) -> Result<F> {
        if subset.is_empty() {
            return Err(Error::InvalidInput("entropy of an empty set".into()));
        }
        let axes = self.resolve_axes(subset)?;
        Ok(self.entropy_of_axes(&axes))
    }

    /// Conditional entropy H(A | B) = H(A u B) - H(B). `b` may be empty.
    pub fn cond_entropy<S: AsRef<str>, T: AsRef<str>>(&self, a: &[S], b: &[T]) -> Result<F> {
        if a.is_empty() {
            return Err(Error::InvalidInput("conditional entropy of an empty set".into()));
        }
        let a_axes = self.resolve_axes(a)?;
        let b_axes = self.resolve_axes(b)?;
        let joint = merge_disjoint(&a_axes, &b_axes, &self.vars)?;
        let h_joint = self.entropy_of_axes(&joint);
        if b_axes.is_empty() {
            return Ok(h_joint);
        }
        Ok(h_joint - self.entropy_of_axes(&b_axes))
    }

    /// Conditional mutual information I(A ; B | C). `c` may be empty.
    pub fn cond_mutual_info<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        &self,
        a: &[S],
        b: &[T],
        c: &[U],
    ) -> Result<F> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput("mutual information of an empty set".into()));
        }
        let a_axes = self.resolve_axes(a)?;
        let b_axes = self.resolve_axes(b)?;
        let c_axes = self.resolve_axes(c)?;
        let ac = merge_disjoint(&a_axes, &c_axes, &self.vars)?;
        let bc = merge_disjoint(&b_axes, &c_axes, &self.vars)?;
        let abc = merge_disjoint(&a_axes, &bc, &self.vars)?;
        // I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)
        let mut v = self.entropy_of_axes(&ac) + self.entropy_of_axes(&bc)
            - self.entropy_of_axes(&abc);
        if !c_axes.is_empty() {
            v -= self.entropy_of_axes(&c_axes);
        }
        Ok(v)
    }

    /// Marginal distribution on `keep` (original variable order preserved).
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidInput("marginal onto an empty set".into()));
        }
        let axes = self.resolve_axes(keep)?;
        let probs = self.shape.fold_buckets(&self.probs, &axes);
        let vars: Vec<VarSpec> = axes.iter().map(|&a| self.vars[a].clone()).collect();
        let shape = Shape::new(vars.iter().map(|v| v.card).collect())?;
        Ok(JointDist { vars, shape, probs })
    }

    /// Joint over `self.vars ++ ch.out_vars` with mass `p(d) * ch(out | in)`.
    ///
    /// The channel's input variables must all be present (same name and
    /// cardinality); its outputs must be fresh names.
    pub fn push_through(&self, ch: &Channel<F>) -> Result<Self> {
        let mut in_axes = Vec::with_capacity(ch.in_vars.len());
        for v in &ch.in_vars {
            let a = self.axis_of(&v.name)?;
            if self.vars[a].card != v.card {
                return Err(Error::InvalidInput(format!(
                    "cardinality mismatch on `{}`: joint has {}, channel expects {}",
                    v.name, self.vars[a].card, v.card
                )));
            }
            in_axes.push(a);
        }
        for v in &ch.out_vars {
            if self.axis_of(&v.name).is_ok() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let out_len = ch.out_shape.len();
        let total = self.shape.len() as u128 * out_len as u128;
        if total > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: total, cap: MAX_CELLS });
        }

        // Walk our cells with an odometer tracking the channel's input index.
        let mut in_stride = vec![0usize; self.shape.rank()];
        for (pos, &a) in in_axes.iter().enumerate() {
            in_stride[a] = ch.in_shape.stride(pos);
        }
        let mut probs = vec![F::zero(); total as usize];
        let mut idx = vec![0usize; self.shape.rank()];
        let mut ch_in = 0usize;
        for cell in 0..self.shape.len() {
            let p = self.probs[cell];
            if p > F::zero() {
                let row = &ch.probs[ch_in * out_len..(ch_in + 1) * out_len];
                let dst = &mut probs[cell * out_len..(cell + 1) * out_len];
                for (d, &q) in dst.iter_mut().zip(row) {
                    *d = p * q;
                }
            }
            for a in (0..self.shape.rank()).rev() {
                idx[a] += 1;
                ch_in += in_stride[a];
                if idx[a] < self.shape.cards()[a] {
                    break;
                }
                ch_in -= in_stride[a] * self.shape.cards()[a];
                idx[a] = 0;
            }
        }
        let mut vars = self.vars.clone();
        vars.extend(ch.out_vars.iter().cloned());
        JointDist::new(vars, probs)
    }

    /// Product of two distributions on disjoint variables.
    pub fn tensor_product(&self, other: &JointDist<F>) -> Result<Self> {
        for v in &other.vars {
            if self.axis_of(&v.name).is_ok() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let total = self.shape.len() as u128 * other.shape.len() as u128;
        if total > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: total, cap: MAX_CELLS });
        }
        let mut probs = Vec::with_capacity(total as usize);
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        JointDist::new(vars, probs)
    }

    /// Same tensor with variables renamed (`old -> new` pairs).
    pub fn renamed(&self, mapping: &[(&str, &str)]) -> Result<Self> {
        let mut vars = self.vars.clone();
        for &(old, new) in mapping {
            let a = self.axis_of(old)?;
            vars[a].name = new.to_string();
        }
        check_unique_names(&vars)?;
        Ok(JointDist { vars, shape: self.shape.clone(), probs: self.probs.clone() })
    }
}

/// Merge two ascending, disjoint axis lists; reports the offending variable
/// name on overlap.
fn merge_disjoint(a: &[usize], b: &[usize], vars: &[VarSpec]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            return Err(Error::OverlappingVariables(vars[a[i]].name.clone()));
        }
    }
    Ok(out)
}

/// -sum p log2 p with the 0 log 0 = 0 branch.
pub(crate) fn shannon<F: Scalar>(p: &[F]) -> F {
    let mut h = F::zero();
    for &x in p {
        if x > F::zero() {
            h -= x * x.log2();
        }
    }
    h
}

/// Binary entropy H2(eps) in bits; `eps` must lie in [0, 1].
pub fn binary_entropy<F: Scalar>(eps: F) -> Result<F> {
    if eps < F::zero() || eps > F::one() {
        return Err(Error::InvalidInput(format!(
            "binary entropy argument {} outside [0, 1]",
            eps
        )));
    }
    if eps == F::zero() || eps == F::one() {
        return Ok(F::zero());
    }
    let q = F::one() - eps;
    Ok(-eps * eps.log2() - q * q.log2())
}

/// A conditional distribution tensor from `in_vars` to `out_vars`.
///
/// Stored row-major over `(inputs..., outputs...)`; every input-indexed
/// slice must sum to 1 and is renormalized exactly at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<F: Scalar> {
    in_vars: Vec<VarSpec>,
    out_vars: Vec<VarSpec>,
    in_shape: Shape,
    out_shape: Shape,
    probs: Vec<F>,
}

impl<F: Scalar> Channel<F> {
    pub fn new(in_vars: Vec<VarSpec>, out_vars: Vec<VarSpec>, mut probs: Vec<F>) -> Result<Self> {
        let mut all = in_vars.clone();
        all.extend(out_vars.iter().cloned());
        check_unique_names(&all)?;
        if out_vars.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one output".into()));
        }
        let in_shape = Shape::new(in_vars.iter().map(|v| v.card).collect())?;
        let out_shape = Shape::new(out_vars.iter().map(|v| v.card).collect())?;
        let total = in_shape.len() as u128 * out_shape.len() as u128;
        if total > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: total, cap: MAX_CELLS });
        }
        if probs.len() != total as usize {
            return Err(Error::InvalidInput(format!(
                "channel tensor has {} cells but the variables define {}",
                probs.len(),
                total
            )));
        }
        let out_len = out_shape.len();
        for row in 0..in_shape.len() {
            let slice = &mut probs[row * out_len..(row + 1) * out_len];
            let sum = clamp_and_sum(slice)?;
            if (sum - F::one()).abs() > F::mass_tol() {
                return Err(Error::NotNormalized {
                    sum: crate::scalar::as_f64(sum),
                    tol: crate::scalar::as_f64(F::mass_tol()),
                });
            }
            for p in slice {
                *p /= sum;
            }
        }
        Ok(Channel { in_vars, out_vars, in_shape, out_shape, probs })
    }

    /// Deterministic channel: `table[in_cell]` is the output cell index.
    pub fn deterministic(
        in_vars: Vec<VarSpec>,
        out_vars: Vec<VarSpec>,
        table: &[usize],
    ) -> Result<Self> {
        let in_shape = Shape::new(in_vars.iter().map(|v| v.card).collect())?;
        let out_shape = Shape::new(out_vars.iter().map(|v| v.card).collect())?;
        if table.len() != in_shape.len() {
            return Err(Error::InvalidInput(format!(
                "lookup table has {} rows, expected {}",
                table.len(),
                in_shape.len()
            )));
        }
        let out_len = out_shape.len();
        let mut probs = vec![F::zero(); in_shape.len() * out_len];
        for (row, &o) in table.iter().enumerate() {
            if o >= out_len {
                return Err(Error::InvalidInput(format!(
                    "lookup entry {} out of range (output cells: {})",
                    o, out_len
                )));
            }
            probs[row * out_len + o] = F::one();
        }
        Channel::new(in_vars, out_vars, probs)
    }

    pub fn in_vars(&self) -> &[VarSpec] {
        &self.in_vars
    }

    pub fn out_vars(&self) -> &[VarSpec] {
        &self.out_vars
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn num_in_cells(&self) -> usize {
        self.in_shape.len()
    }

    pub fn num_out_cells(&self) -> usize {
        self.out_shape.len()
    }

    /// Compose with a second stage read from this channel's inputs and/or
    /// outputs: the result maps `in_vars` to `out_vars ++ second.out_vars`.
    pub fn compose(&self, second: &Channel<F>) -> Result<Self> {
        let mut joint_vars = self.in_vars.clone();
        joint_vars.extend(self.out_vars.iter().cloned());
        // locate second-stage inputs among (in, out)
        let mut sec_stride = vec![0usize; joint_vars.len()];
        for (pos, v) in second.in_vars.iter().enumerate() {
            let a = joint_vars
                .iter()
                .position(|u| u.name == v.name)
                .ok_or_else(|| Error::UnknownVariable(v.name.clone()))?;
            if joint_vars[a].card != v.card {
                return Err(Error::InvalidInput(format!(
                    "cardinality mismatch on `{}` while composing channels",
                    v.name
                )));
            }
            sec_stride[a] = second.in_shape.stride(pos);
        }
        for v in &second.out_vars {
            if joint_vars.iter().any(|u| u.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let joint_shape =
            Shape::new(joint_vars.iter().map(|v| v.card).collect::<Vec<_>>())?;
        let sec_out = second.out_shape.len();
        let total = joint_shape.len() as u128 * sec_out as u128;
        if total > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: total, cap: MAX_CELLS });
        }
        let mut probs = vec![F::zero(); total as usize];
        let mut idx = vec![0usize; joint_shape.rank()];
        let mut sec_in = 0usize;
        for cell in 0..joint_shape.len() {
            let p = self.probs[cell];
            if p > F::zero() {
                let row = &second.probs[sec_in * sec_out..(sec_in + 1) * sec_out];
                let dst = &mut probs[cell * sec_out..(cell + 1) * sec_out];
                for (d, &q) in dst.iter_mut().zip(row) {
                    *d = p * q;
                }
            }
            for a in (0..joint_shape.rank()).rev() {
                idx[a] += 1;
                sec_in += sec_stride[a];
                if idx[a] < joint_shape.cards()[a] {
                    break;
                }
                sec_in -= sec_stride[a] * joint_shape.cards()[a];
                idx[a] = 0;
            }
        }
        let mut out_vars = self.out_vars.clone();
        out_vars.extend(second.out_vars.iter().cloned());
        Channel::new(self.in_vars.clone(), out_vars, probs)
    }

    /// Same tensor with variables renamed (`old -> new` pairs).
    pub fn renamed(&self, mapping: &[(&str, &str)]) -> Result<Self> {
        let mut in_vars = self.in_vars.clone();
        let mut out_vars = self.out_vars.clone();
        for &(old, new) in mapping {
            if let Some(v) = in_vars.iter_mut().find(|v| v.name == old) {
                v.name = new.to_string();
            } else if let Some(v) = out_vars.iter_mut().find(|v| v.name == old) {
                v.name = new.to_string();
            } else {
                return Err(Error::UnknownVariable(old.to_string()));
            }
        }
        let mut all = in_vars.clone();
        all.extend(out_vars.iter().cloned());
        check_unique_names(&all)?;
        Ok(Channel {
            in_vars,
            out_vars,
            in_shape: self.in_shape.clone(),
            out_shape: self.out_shape.clone(),
            probs: self.probs.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = JointDist<f64>;

    fn bit(name: &str) -> VarSpec {
        VarSpec::new(name, 2)
    }

    fn uniform_bit(name: &str) -> D {
        D::uniform(vec![bit(name)]).unwrap()
    }

    #[test]
    fn entropy_uniform_bit_is_one() {
        let d = uniform_bit("X");
        assert!((d.entropy(&["X"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_point_mass_is_zero() {
        let d = D::point_mass(vec![bit("X"), bit("Y")], &[1, 0]).unwrap();
        assert_eq!(d.entropy(&["X", "Y"]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_uniform_ternary() {
        let d = D::uniform(vec![VarSpec::new("X", 3)]).unwrap();
        assert!((d.entropy(&["X"]).unwrap() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn unknown_variable_rejected() {
        let d = uniform_bit("X");
        assert!(matches!(d.entropy(&["Q"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn cond_entropy_independent_bits() {
        let d = uniform_bit("A").tensor_product(&uniform_bit("B")).unwrap();
        let h = d.cond_entropy(&["A"], &["B"]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cond_entropy_functional_dependence_is_zero() {
        // B uniform, A = B
        let d = D::new(
            vec![bit("A"), bit("B")],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert!(d.cond_entropy(&["A"], &["B"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cond_entropy_overlap_rejected() {
        let d = uniform_bit("A").tensor_product(&uniform_bit("B")).unwrap();
        assert!(matches!(
            d.cond_entropy(&["A"], &["A", "B"]),
            Err(Error::OverlappingVariables(_))
        ));
    }

    #[test]
    fn cond_entropy_matches_direct_summation() {
        // random-ish fixed 2x2x2 joint; oracle: H(A|B) = -sum p(a,b) log2 p(a|b)
        let raw = [0.05, 0.10, 0.15, 0.02, 0.08, 0.20, 0.25, 0.15];
        let d = D::new(vec![bit("A"), bit("B"), bit("C")], raw.to_vec()).unwrap();
        let h = d.cond_entropy(&["A"], &["B", "C"]).unwrap();
        // oracle over the raw table
        let p = d.probs();
        let mut oracle = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let pabc = p[a * 4 + b * 2 + c];
                    let pbc: f64 = (0..2).map(|x| p[x * 4 + b * 2 + c]).sum();
                    if pabc > 0.0 {
                        oracle -= pabc * (pabc / pbc).log2();
                    }
                }
            }
        }
        assert!((h - oracle).abs() < 1e-12);
    }

    #[test]
    fn cmi_conditional_independence_is_zero() {
        // A and B independent copies given C: p(c) uniform, A=B=C
        let d = D::new(
            vec![bit("A"), bit("B"), bit("C")],
            vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        )
        .unwrap();
        let i = d.cond_mutual_info(&["A"], &["B"], &["C"]).unwrap();
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn cmi_identical_bits_is_one() {
        let d = D::new(vec![bit("A"), bit("B")], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let i = d.cond_mutual_info::<_, _, &str>(&["A"], &["B"], &[]).unwrap();
        assert!((i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cmi_matches_chain_rule_recomputation() {
        let raw = [0.05, 0.10, 0.15, 0.02, 0.08, 0.20, 0.25, 0.15];
        let d = D::new(vec![bit("A"), bit("B"), bit("C")], raw.to_vec()).unwrap();
        let i = d.cond_mutual_info(&["A"], &["B"], &["C"]).unwrap();
        // second path: H(A|C) - H(A|BC)
        let other = d.cond_entropy(&["A"], &["C"]).unwrap()
            - d.cond_entropy(&["A"], &["B", "C"]).unwrap();
        assert!((i - other).abs() < 1e-12);
    }

    #[test]
    fn marginal_keep_all_is_identity() {
        let raw = [0.1, 0.2, 0.3, 0.4];
        let d = D::new(vec![bit("A"), bit("B")], raw.to_vec()).unwrap();
        let m = d.marginal(&["A", "B"]).unwrap();
        assert_eq!(m.probs(), d.probs());
    }

    #[test]
    fn marginal_of_product_recovers_factor() {
        let a = D::new(vec![bit("A")], vec![0.3, 0.7]).unwrap();
        let b = D::new(vec![bit("B")], vec![0.9, 0.1]).unwrap();
        let d = a.tensor_product(&b).unwrap();
        let m = d.marginal(&["B"]).unwrap();
        assert!((m.probs()[0] - 0.9).abs() < 1e-12);
        assert!((m.probs()[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn marginal_matches_axis_sum_oracle() {
        let raw = [0.05, 0.10, 0.15, 0.02, 0.08, 0.20, 0.25, 0.15];
        let d = D::new(vec![bit("A"), bit("B"), bit("C")], raw.to_vec()).unwrap();
        let m = d.marginal(&["A", "C"]).unwrap();
        for a in 0..2 {
            for c in 0..2 {
                let oracle: f64 = (0..2).map(|b| d.probs()[a * 4 + b * 2 + c]).sum();
                assert!((m.probs()[a * 2 + c] - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_empty_keep_rejected() {
        let d = uniform_bit("A");
        assert!(d.marginal::<&str>(&[]).is_err());
    }

    #[test]
    fn push_through_identity_channel_copies() {
        let d = D::new(vec![bit("X")], vec![0.3, 0.7]).unwrap();
        let ch = Channel::<f64>::deterministic(vec![bit("X")], vec![bit("Y")], &[0, 1]).unwrap();
        let j = d.push_through(&ch).unwrap();
        assert!(j.cond_entropy(&["Y"], &["X"]).unwrap().abs() < 1e-12);
        assert!((j.entropy(&["Y"]).unwrap() - d.entropy(&["X"]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn push_through_constant_channel_gives_product_point_mass() {
        let d = D::new(vec![bit("X")], vec![0.3, 0.7]).unwrap();
        let ch = Channel::<f64>::deterministic(vec![bit("X")], vec![bit("Y")], &[1, 1]).unwrap();
        let j = d.push_through(&ch).unwrap();
        assert!(j.entropy(&["Y"]).unwrap().abs() < 1e-12);
        assert!((j.entropy(&["X"]).unwrap() - d.entropy(&["X"]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn push_through_matches_triple_loop_oracle() {
        let d = D::new(vec![bit("X"), bit("W")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let ch = Channel::<f64>::new(
            vec![bit("X")],
            vec![VarSpec::new("Y", 3)],
            vec![0.2, 0.3, 0.5, 0.6, 0.1, 0.3],
        )
        .unwrap();
        let j = d.push_through(&ch).unwrap();
        // oracle: index (x, w, y)
        for x in 0..2 {
            for w in 0..2 {
                for y in 0..3 {
                    let expect = d.probs()[x * 2 + w] * ch.probs()[x * 3 + y];
                    let got = j.probs()[x * 6 + w * 3 + y];
                    assert!((got - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn push_through_name_collision_rejected() {
        let d = uniform_bit("X");
        let ch = Channel::<f64>::deterministic(vec![bit("X")], vec![bit("X")], &[0, 1]);
        // collision is caught at channel construction already
        assert!(ch.is_err());
        let ch2 = Channel::<f64>::deterministic(vec![bit("Q")], vec![bit("X")], &[0, 1]).unwrap();
        let r = d.push_through(&ch2);
        assert!(r.is_err());
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        assert!((binary_entropy(0.5f64).unwrap() - 1.0).abs() < 1e-12);
        // direct formula evaluation
        let expect = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((binary_entropy(0.25f64).unwrap() - expect).abs() < 1e-12);
        assert!(binary_entropy(1.5f64).is_err());
        assert!(binary_entropy(-0.1f64).is_err());
    }

    #[test]
    fn channel_rows_must_normalize() {
        let bad = Channel::<f64>::new(
            vec![bit("X")],
            vec![bit("Y")],
            vec![0.5, 0.4, 0.5, 0.5],
        );
        assert!(matches!(bad, Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn compose_appends_second_stage() {
        // X -> Y noisy, then T = Y deterministically
        let ch = Channel::<f64>::new(
            vec![bit("X")],
            vec![bit("Y")],
            vec![0.9, 0.1, 0.2, 0.8],
        )
        .unwrap();
        let copy = Channel::<f64>::deterministic(vec![bit("Y")], vec![bit("T")], &[0, 1]).unwrap();
        let both = ch.compose(&copy).unwrap();
        let d = D::new(vec![bit("X")], vec![0.5, 0.5]).unwrap();
        let j = d.push_through(&both).unwrap();
        assert!(j.cond_entropy(&["T"], &["Y"]).unwrap().abs() < 1e-12);
        assert!((j.entropy(&["T"]).unwrap() - j.entropy(&["Y"]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mass_tolerance_enforced() {
        let bad = D::new(vec![bit("A")], vec![0.5, 0.6]);
        assert!(matches!(bad, Err(Error::NotNormalized { .. })));
        let neg = D::new(vec![bit("A")], vec![1.1, -0.1]);
        assert!(matches!(neg, Err(Error::NegativeProbability { .. })));
        // tiny negative is clamped
        let ok = D::new(vec![bit("A")], vec![1.0, -1e-13]).unwrap();
        assert_eq!(ok.probs()[1], 0.0);
    }

    #[test]
    fn f32_smoke() {
        let d = JointDist::<f32>::uniform(vec![bit("X")]).unwrap();
        assert!((d.entropy(&["X"]).unwrap() - 1.0f32).abs() < 1e-6);
    }
}
