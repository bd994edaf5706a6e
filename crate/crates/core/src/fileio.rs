//! JSON file formats shared between the library and the CLI.
//!
//! Distributions: `{"vars": [{"name": "X1", "card": 2}, ...],
//! "probs": <nested arrays>}` with the arrays nested in variable order
//! (first variable outermost). Channels add `"in_vars"` / `"out_vars"`,
//! nested input-axes-then-output-axes.
//!
//! Weightings: `{"k": 3, "weights": [{"subset": [1, 2], "w": 0.5}, ...]}`
//! with 1-based element indices.
//!
//! Code specs: `{"k", "n", "w_cards", "encoders", "schedule"}` where
//! `encoders[i][j]` is the flat lookup table of terminal i at step j and
//! schedule entries are 0 for the main channel or the 1-based parallel
//! index. Private randomness is uniform over `w_cards`.
//!
//! Loaders renormalize mass errors up to 1e-6 and reject anything worse.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dbbound::{ChannelRef, EncoderTable, InteractiveCode};
use crate::dist::{Channel, JointDist, VarSpec};
use crate::error::{Error, Result};
use crate::fracpart::{FractionalPartition, Partition, SubsetMask};
use crate::keybound::WiMWCSystem;
use crate::scalar::{as_f64, real, Scalar};

/// Loader-side normalization tolerance.
const LOAD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VarJson {
    pub name: String,
    pub card: usize,
}

impl From<&VarSpec> for VarJson {
    fn from(v: &VarSpec) -> Self {
        VarJson { name: v.name.clone(), card: v.card }
    }
}

impl VarJson {
    fn to_spec(&self) -> VarSpec {
        VarSpec::new(self.name.clone(), self.card)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistJson {
    pub vars: Vec<VarJson>,
    pub probs: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub in_vars: Vec<VarJson>,
    pub out_vars: Vec<VarJson>,
    pub probs: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightJson {
    /// 1-based element indices.
    pub subset: Vec<usize>,
    pub w: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaJson {
    pub k: usize,
    pub weights: Vec<WeightJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeJson {
    pub k: usize,
    pub n: usize,
    pub w_cards: Vec<usize>,
    pub encoders: Vec<Vec<Vec<usize>>>,
    /// 0 = main channel, `l >= 1` = parallel channel number `l`.
    pub schedule: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParallelJson {
    pub channel: ChannelJson,
    pub alpha: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub k: usize,
    pub r: usize,
    pub main: ChannelJson,
    pub parallels: Vec<ParallelJson>,
}

fn flatten_into(v: &Value, dims: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match dims.split_first() {
        None => match v.as_f64() {
            Some(x) => {
                out.push(x);
                Ok(())
            }
            None => Err(Error::Format("expected a number in the probability tensor".into())),
        },
        Some((&d, rest)) => {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::Format("expected a nested array".into()))?;
            if arr.len() != d {
                return Err(Error::Format(format!(
                    "nested array has length {}, expected {}",
                    arr.len(),
                    d
                )));
            }
            for item in arr {
                flatten_into(item, rest, out)?;
            }
            Ok(())
        }
    }
}

fn nest(flat: &[f64], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => Value::from(flat[0]),
        Some((&d, rest)) => {
            let chunk = flat.len() / d;
            Value::Array(
                (0..d)
                    .map(|i| nest(&flat[i * chunk..(i + 1) * chunk], rest))
                    .collect(),
            )
        }
    }
}

fn normalize(mut flat: Vec<f64>) -> Result<Vec<f64>> {
    for (i, p) in flat.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -LOAD_TOL {
                return Err(Error::Format(format!("negative probability at cell {}", i)));
            }
            *p = 0.0;
        }
    }
    let sum: f64 = flat.iter().sum();
    if (sum - 1.0).abs() > LOAD_TOL {
        return Err(Error::Format(format!(
            "probability mass {} is off by more than {}",
            sum, LOAD_TOL
        )));
    }
    for p in flat.iter_mut() {
        *p /= sum;
    }
    Ok(flat)
}

pub fn dist_from_json<F: Scalar>(j: &DistJson) -> Result<JointDist<F>> {
    let vars: Vec<VarSpec> = j.vars.iter().map(VarJson::to_spec).collect();
    let dims: Vec<usize> = vars.iter().map(|v| v.card).collect();
    let mut flat = Vec::new();
    flatten_into(&j.probs, &dims, &mut flat)?;
    let flat = normalize(flat)?;
    JointDist::new(vars, flat.into_iter().map(real::<F>).collect())
}

pub fn dist_to_json<F: Scalar>(d: &JointDist<F>) -> DistJson {
    let dims: Vec<usize> = d.vars().iter().map(|v| v.card).collect();
    let flat: Vec<f64> = d.probs().iter().map(|&p| as_f64(p)).collect();
    DistJson {
        vars: d.vars().iter().map(VarJson::from).collect(),
        probs: nest(&flat, &dims),
    }
}

pub fn channel_from_json<F: Scalar>(j: &ChannelJson) -> Result<Channel<F>> {
    let in_vars: Vec<VarSpec> = j.in_vars.iter().map(VarJson::to_spec).collect();
    let out_vars: Vec<VarSpec> = j.out_vars.iter().map(VarJson::to_spec).collect();
    let mut dims: Vec<usize> = in_vars.iter().map(|v| v.card).collect();
    let out_dims: Vec<usize> = out_vars.iter().map(|v| v.card).collect();
    dims.extend(&out_dims);
    let mut flat = Vec::new();
    flatten_into(&j.probs, &dims, &mut flat)?;
    let out_len: usize = out_dims.iter().product();
    if out_len == 0 || flat.len() % out_len != 0 {
        return Err(Error::Format("channel tensor shape mismatch".into()));
    }
    let mut normed = Vec::with_capacity(flat.len());
    for row in flat.chunks(out_len) {
        normed.extend(normalize(row.to_vec())?);
    }
    Channel::new(in_vars, out_vars, normed.into_iter().map(real::<F>).collect())
}

pub fn channel_to_json<F: Scalar>(ch: &Channel<F>) -> ChannelJson {
    let mut dims: Vec<usize> = ch.in_vars().iter().map(|v| v.card).collect();
    dims.extend(ch.out_vars().iter().map(|v| v.card));
    let flat: Vec<f64> = ch.probs().iter().map(|&p| as_f64(p)).collect();
    ChannelJson {
        in_vars: ch.in_vars().iter().map(VarJson::from).collect(),
        out_vars: ch.out_vars().iter().map(VarJson::from).collect(),
        probs: nest(&flat, &dims),
    }
}

pub fn lambda_from_json<F: Scalar>(j: &LambdaJson) -> Result<FractionalPartition<F>> {
    let mut weights = std::collections::BTreeMap::new();
    for w in &j.weights {
        let mut mask: SubsetMask = 0;
        for &e in &w.subset {
            if e == 0 || e > j.k {
                return Err(Error::Format(format!(
                    "subset element {} outside 1..={}",
                    e, j.k
                )));
            }
            mask |= 1 << (e - 1);
        }
        *weights.entry(mask).or_insert(0.0f64) += w.w;
    }
    let weights = weights.into_iter().map(|(m, w)| (m, real::<F>(w))).collect();
    FractionalPartition::new(j.k, weights)
}

pub fn lambda_to_json<F: Scalar>(fp: &FractionalPartition<F>) -> LambdaJson {
    LambdaJson {
        k: fp.k(),
        weights: fp
            .weights()
            .map(|(mask, w)| WeightJson {
                subset: (0..fp.k()).filter(|&i| mask & (1 << i) != 0).map(|i| i + 1).collect(),
                w: as_f64(w),
            })
            .collect(),
    }
}

/// Parse a weighting preset: `uniform-km1` or `partition:1,2|3` (1-based
/// elements, blocks separated by `|`).
pub fn lambda_preset<F: Scalar>(spec: &str, k: usize) -> Result<FractionalPartition<F>> {
    if spec == "uniform-km1" {
        return FractionalPartition::uniform_km1(k);
    }
    if let Some(body) = spec.strip_prefix("partition:") {
        let mut blocks = Vec::new();
        for part in body.split('|') {
            let mut block = Vec::new();
            for e in part.split(',') {
                let e: usize = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad element `{}` in partition", e)))?;
                if e == 0 || e > k {
                    return Err(Error::Format(format!("element {} outside 1..={}", e, k)));
                }
                block.push(e - 1);
            }
            blocks.push(block);
        }
        let pi = Partition::new(k, &blocks)?;
        return FractionalPartition::from_partition(&pi);
    }
    Err(Error::Format(format!(
        "unknown weighting preset `{}` (expected `uniform-km1` or `partition:...`)",
        spec
    )))
}

pub fn code_from_json<F: Scalar>(j: &CodeJson) -> Result<InteractiveCode<F>> {
    let encoders: Vec<Vec<EncoderTable>> = j
        .encoders
        .iter()
        .map(|row| row.iter().map(|t| EncoderTable { outputs: t.clone() }).collect())
        .collect();
    let schedule: Vec<ChannelRef> = j
        .schedule
        .iter()
        .map(|&s| if s == 0 { ChannelRef::Main } else { ChannelRef::Parallel(s - 1) })
        .collect();
    InteractiveCode::with_uniform_w(j.k, j.n, &j.w_cards, encoders, schedule)
}

pub fn system_from_json<F: Scalar>(j: &SystemJson) -> Result<WiMWCSystem<F>> {
    let main = channel_from_json(&j.main)?;
    let mut parallels = Vec::with_capacity(j.parallels.len());
    for p in &j.parallels {
        parallels.push((channel_from_json(&p.channel)?, real::<F>(p.alpha)));
    }
    WiMWCSystem::new(j.k, j.r, main, parallels)
}

/// Read and parse a JSON document of type `T` from disk.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {}", path.display(), e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_round_trip() {
        let d = JointDist::<f64>::new(
            vec![VarSpec::new("A", 2), VarSpec::new("B", 3)],
            vec![0.1, 0.2, 0.05, 0.15, 0.3, 0.2],
        )
        .unwrap();
        let j = dist_to_json(&d);
        let back: JointDist<f64> = dist_from_json(&j).unwrap();
        assert_eq!(back.vars(), d.vars());
        for (a, b) in back.probs().iter().zip(d.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn loader_normalizes_small_mass_errors() {
        let text = r#"{"vars":[{"name":"X","card":2}], "probs":[0.5000002, 0.5]}"#;
        let j: DistJson = serde_json::from_str(text).unwrap();
        let d: JointDist<f64> = dist_from_json(&j).unwrap();
        let s: f64 = d.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loader_rejects_large_mass_errors() {
        let text = r#"{"vars":[{"name":"X","card":2}], "probs":[0.6, 0.5]}"#;
        let j: DistJson = serde_json::from_str(text).unwrap();
        assert!(matches!(dist_from_json::<f64>(&j), Err(Error::Format(_))));
    }

    #[test]
    fn nested_shape_mismatch_rejected() {
        let text = r#"{"vars":[{"name":"X","card":2}], "probs":[[0.5],[0.5]]}"#;
        let j: DistJson = serde_json::from_str(text).unwrap();
        assert!(dist_from_json::<f64>(&j).is_err());
    }

    #[test]
    fn channel_round_trip() {
        let ch = Channel::<f64>::new(
            vec![VarSpec::new("X", 2)],
            vec![VarSpec::new("Y", 2)],
            vec![0.9, 0.1, 0.25, 0.75],
        )
        .unwrap();
        let back: Channel<f64> = channel_from_json(&channel_to_json(&ch)).unwrap();
        for (a, b) in back.probs().iter().zip(ch.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_round_trip_and_presets() {
        let fp = FractionalPartition::<f64>::uniform_km1(3).unwrap();
        let back: FractionalPartition<f64> = lambda_from_json(&lambda_to_json(&fp)).unwrap();
        assert_eq!(back.as_dense(), fp.as_dense());

        let p: FractionalPartition<f64> = lambda_preset("uniform-km1", 4).unwrap();
        assert!(p.validate().ok());
        let p: FractionalPartition<f64> = lambda_preset("partition:1,2|3", 3).unwrap();
        assert!((p.weight(0b100) - 1.0).abs() < 1e-12);
        assert!((p.weight(0b011) - 1.0).abs() < 1e-12);
        assert!(lambda_preset::<f64>("nope", 3).is_err());
    }

    #[test]
    fn code_json_parses() {
        let text = r#"{
            "k": 2, "n": 2, "w_cards": [2, 2],
            "encoders": [
                [[0, 1], [0, 1, 1, 0]],
                [[0, 1], [0, 0, 1, 1]]
            ],
            "schedule": [0, 0]
        }"#;
        let j: CodeJson = serde_json::from_str(text).unwrap();
        let code: InteractiveCode<f64> = code_from_json(&j).unwrap();
        assert_eq!(code.k(), 2);
        assert_eq!(code.n(), 2);
        assert_eq!(code.schedule()[0], ChannelRef::Main);
    }
}
