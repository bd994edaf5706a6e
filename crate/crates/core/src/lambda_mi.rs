//! Multivariate mutual information `I_lambda` and the total correlation `J`.
//!
//! `I_lambda(X_1; ...; X_k | T) = H(X_[k] | T) - sum_B lambda_B H(X_B | X_{B^c}, T)`
//! for a fractional partition `lambda`. Terminals are *groups* of variable
//! names, so compound arguments like `I_lambda(X_1 Y_1; ...; X_k Y_k | T)`
//! need no flattening.

use crate::dist::{binary_entropy, Channel, JointDist};
use crate::error::{Error, Result};
use crate::fracpart::{FractionalPartition, Partition, SubsetMask};
use crate::scalar::{real, Scalar};

/// A terminal: a set of variable names treated as one argument.
pub type Group = Vec<String>;

pub fn group<S: AsRef<str>>(names: &[S]) -> Group {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

fn check_disjoint<F: Scalar>(
    d: &JointDist<F>,
    groups: &[Group],
    cond: &[String],
) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for name in groups.iter().flatten().chain(cond.iter()) {
        if seen.contains(&name.as_str()) {
            return Err(Error::OverlappingVariables(name.clone()));
        }
        if !d.has_var(name) {
            return Err(Error::UnknownVariable(name.clone()));
        }
        seen.push(name);
    }
    Ok(())
}

fn union_of(groups: &[Group], mask: SubsetMask) -> Vec<String> {
    let mut out = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        if mask & (1 << i) != 0 {
            out.extend(g.iter().cloned());
        }
    }
    out
}

/// `I_lambda` of the groups given `cond`, in bits.
///
/// Result is nonnegative up to 1e-9 of float noise for any valid
/// fractional partition.
pub fn i_lambda<F: Scalar>(
    d: &JointDist<F>,
    groups: &[Group],
    fp: &FractionalPartition<F>,
    cond: &[String],
) -> Result<F> {
    let k = groups.len();
    if fp.k() != k {
        return Err(Error::InvalidInput(format!(
            "fractional partition is over [{}] but {} groups were given",
            fp.k(),
            k
        )));
    }
    let report = fp.validate();
    if !report.ok() {
        return Err(Error::InvalidPartition(
            "weights fail validation; see FractionalPartition::validate".into(),
        ));
    }
    check_disjoint(d, groups, cond)?;

    // restrict to the variables involved before computing entropies
    let mut relevant: Vec<String> = groups.iter().flatten().cloned().collect();
    relevant.extend(cond.iter().cloned());
    let dm = d.marginal(&relevant)?;

    let all = union_of(groups, (1 << k) - 1);
    let mut value = dm.cond_entropy(&all, cond)?;
    let full: SubsetMask = (1 << k) - 1;
    for (mask, w) in fp.weights() {
        let b_vars = union_of(groups, mask);
        let mut rest = union_of(groups, full & !mask);
        rest.extend(cond.iter().cloned());
        value -= w * dm.cond_entropy(&b_vars, &rest)?;
    }
    Ok(value)
}

/// Total correlation `J = sum_i H(group_i) - H(union)`, in bits.
pub fn j_info<F: Scalar>(d: &JointDist<F>, groups: &[Group]) -> Result<F> {
    check_disjoint(d, groups, &[])?;
    let mut sum = F::zero();
    for g in groups {
        sum += d.entropy(g)?;
    }
    let all: Vec<String> = groups.iter().flatten().cloned().collect();
    Ok(sum - d.entropy(&all)?)
}

/// Which total-correlation identity to instantiate.
#[derive(Clone, Debug)]
pub enum TotalCorrelationForm {
    /// Weights 1/(k-1) on all (k-1)-subsets: `I_lambda = J / (k-1)`.
    UniformKm1,
    /// Block weights from a partition with r >= 2 blocks:
    /// `I_lambda = J(blocks) / (r-1)`.
    Blocks(Partition),
}

/// Both sides of the chosen identity plus their gap.
#[derive(Clone, Debug)]
pub struct IdentityCheck<F> {
    pub i_lambda: F,
    pub j_scaled: F,
    pub gap: F,
}

/// Evaluate `I_lambda` with a preset weighting and the matching rescaled
/// total correlation; the two agree to float precision.
pub fn j_identity_check<F: Scalar>(
    d: &JointDist<F>,
    groups: &[Group],
    form: &TotalCorrelationForm,
) -> Result<IdentityCheck<F>> {
    let k = groups.len();
    let (fp, j_scaled) = match form {
        TotalCorrelationForm::UniformKm1 => {
            let fp = FractionalPartition::uniform_km1(k)?;
            let j = j_info(d, groups)?;
            (fp, j / real::<F>((k - 1) as f64))
        }
        TotalCorrelationForm::Blocks(pi) => {
            if pi.k() != k {
                return Err(Error::InvalidInput(
                    "partition ground set does not match the group count".into(),
                ));
            }
            let fp = FractionalPartition::from_partition(pi)?;
            let merged: Vec<Group> = pi
                .blocks()
                .iter()
                .map(|&m| union_of(groups, m))
                .collect();
            let j = j_info(d, &merged)?;
            (fp, j / real::<F>((pi.num_blocks() - 1) as f64))
        }
    };
    let i = i_lambda(d, groups, &fp, &[])?;
    Ok(IdentityCheck { i_lambda: i, j_scaled, gap: i - j_scaled })
}

/// Result of comparing `I_lambda` against the partition floor.
#[derive(Clone, Debug)]
pub struct PartitionBound<F> {
    pub lhs: F,
    pub rhs_min: F,
    pub argmin: Partition,
}

/// `I_lambda >= min over partitions (r >= 2) of J(blocks) / (r-1)`.
///
/// Exhaustive enumeration, capped at k <= 8.
pub fn partition_bound_check<F: Scalar>(
    d: &JointDist<F>,
    groups: &[Group],
    fp: &FractionalPartition<F>,
) -> Result<PartitionBound<F>> {
    let k = groups.len();
    let lhs = i_lambda(d, groups, fp, &[])?;
    let mut best: Option<(F, Partition)> = None;
    for pi in Partition::enumerate(k, 2)? {
        let merged: Vec<Group> = pi.blocks().iter().map(|&m| union_of(groups, m)).collect();
        let val = j_info(d, &merged)? / real::<F>((pi.num_blocks() - 1) as f64);
        match &best {
            Some((bv, _)) if val >= *bv => {}
            _ => best = Some((val, pi)),
        }
    }
    let (rhs_min, argmin) = best.expect("k >= 2 has at least one partition");
    Ok(PartitionBound { lhs, rhs_min, argmin })
}

/// Which alphabets enter the Fano penalty's log-cardinality sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphabetSum {
    /// Sum log-cardinalities over the key set only (the displayed form).
    KeySet,
    /// Sum over all k alphabets (the form used inside the proof chain).
    All,
}

/// The Fano penalty `(sum_B lambda_B) * (H2(eps) + eps * sum log2 |alphabet|)`.
///
/// `key_set` holds the 0-based indices whose variables agree with
/// probability `1 - eps`; the weighting must place zero weight on any subset
/// containing the whole key set. The caller combines the penalty with
/// `H(X_keyset)` to get the lower bound on `I_lambda`.
pub fn fano_penalty<F: Scalar>(
    key_set: &[usize],
    eps: F,
    fp: &FractionalPartition<F>,
    cards: &[usize],
    alphabet_sum: AlphabetSum,
) -> Result<F> {
    if eps < F::zero() || eps > F::one() {
        return Err(Error::InvalidInput("eps must lie in [0, 1]".into()));
    }
    if cards.len() != fp.k() {
        return Err(Error::InvalidInput(
            "need one alphabet size per terminal".into(),
        ));
    }
    let mut a_mask: SubsetMask = 0;
    for &i in key_set {
        if i >= fp.k() {
            return Err(Error::InvalidInput(format!("index {} out of range", i)));
        }
        a_mask |= 1 << i;
    }
    if a_mask == 0 {
        return Err(Error::InvalidInput("key set must be nonempty".into()));
    }
    for (mask, w) in fp.weights() {
        if mask & a_mask == a_mask && w > real::<F>(1e-12) {
            return Err(Error::InvalidInput(
                "weighting puts mass on a subset containing the whole key set".into(),
            ));
        }
    }
    let log_sum: F = cards
        .iter()
        .enumerate()
        .filter(|&(i, _)| alphabet_sum == AlphabetSum::All || a_mask & (1 << i) != 0)
        .map(|(_, &c)| real::<F>((c as f64).log2()))
        .sum();
    Ok(fp.sum_weights() * (binary_entropy(eps)? + eps * log_sum))
}

/// `I_lambda` before and after locally processing each group.
///
/// `local_channels[i]` must read only group `i`'s variables; its outputs
/// become the i-th group of the processed distribution. The after value
/// never exceeds the before value (up to 1e-9).
pub fn data_processing_gap<F: Scalar>(
    d: &JointDist<F>,
    groups: &[Group],
    fp: &FractionalPartition<F>,
    local_channels: &[Channel<F>],
) -> Result<(F, F)> {
    if local_channels.len() != groups.len() {
        return Err(Error::InvalidInput("need one channel per group".into()));
    }
    for (i, ch) in local_channels.iter().enumerate() {
        for v in ch.in_vars() {
            if !groups[i].iter().any(|n| n == &v.name) {
                return Err(Error::InvalidInput(format!(
                    "channel {} reads `{}`, which is outside its group",
                    i, v.name
                )));
            }
        }
    }
    let before = i_lambda(d, groups, fp, &[])?;
    let mut processed = d.clone();
    let mut out_groups: Vec<Group> = Vec::with_capacity(groups.len());
    for ch in local_channels {
        processed = processed.push_through(ch)?;
        out_groups.push(ch.out_vars().iter().map(|v| v.name.clone()).collect());
    }
    let after = i_lambda(&processed, &out_groups, fp, &[])?;
    Ok((before, after))
}
