//! The single-channel bound functional `V_lambda` and the composite upper
//! bound on the secret-key capacity of a wiretap multi-way channel system.
//!
//! For a channel `q(y_[k], z | x_[k])`, an auxiliary receiver
//! `q(t | x_[k], y_[k], z)` and a fractional partition `lambda`, the
//! functional is
//!
//! ```text
//! V = max  I_lambda(X1 Y1; ...; Xk Yk | T) - I_lambda(X1; ...; Xk)
//!          + I(V; T | U) - I(V; Z | U)
//! ```
//!
//! maximized over input distributions `p(x_[k])` and auxiliary kernels
//! `p(u, v | x_[k], y_[k])`. The key-capacity bound is `V(main) + sum_l
//! alpha_l V(parallel_l)`.
//!
//! Both search modes (multi-start projected ascent, exhaustive simplex
//! grids) produce a *lower* estimate of the true maximum; reports carry an
//! explicit mode tag and the grid resolution is the reproducible reference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbbound::check_wiretap_names;
use crate::dist::{Channel, JointDist, VarSpec, MAX_CELLS};
use crate::error::{Error, Result};
use crate::fileio::{channel_to_json, dist_to_json, ChannelJson, DistJson};
use crate::fracpart::{FractionalPartition, SubsetMask};
use crate::lambda_mi::{i_lambda, Group};
use crate::opt::{
    ascend, for_each_composition, mix_seed, n_compositions, AscentOptions, EntropyObjective,
    Objective,
};
use crate::sampling::random_simplex_point;
use crate::scalar::{as_f64, real, Scalar};
use crate::shape::Shape;

/// A wiretap multi-way channel system: main channel, parallel channels with
/// their use rates, and the key-generating terminal count.
#[derive(Clone, Debug)]
pub struct WiMWCSystem<F: Scalar> {
    k: usize,
    r: usize,
    main: Channel<F>,
    parallels: Vec<(Channel<F>, F)>,
}

impl<F: Scalar> WiMWCSystem<F> {
    /// Channels must share the variable layout `X1..Xk -> Y1..Yk, Z`
    /// (cardinalities may differ per channel); `alpha >= 0`; `1 <= r <= k`.
    pub fn new(
        k: usize,
        r: usize,
        main: Channel<F>,
        parallels: Vec<(Channel<F>, F)>,
    ) -> Result<Self> {
        if check_wiretap_names(&main)? != k {
            return Err(Error::InvalidInput("main channel does not serve k terminals".into()));
        }
        for (ch, alpha) in &parallels {
            if check_wiretap_names(ch)? != k {
                return Err(Error::InvalidInput(
                    "parallel channel does not serve k terminals".into(),
                ));
            }
            if *alpha < F::zero() {
                return Err(Error::InvalidInput("channel use rates must be nonnegative".into()));
            }
        }
        if r == 0 || r > k {
            return Err(Error::InvalidInput("need 1 <= r <= k key terminals".into()));
        }
        Ok(WiMWCSystem { k, r, main, parallels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn main(&self) -> &Channel<F> {
        &self.main
    }

    pub fn parallels(&self) -> &[(Channel<F>, F)] {
        &self.parallels
    }
}

/// Auxiliary receiver that copies the eavesdropper output: `T = Z`.
pub fn t_equals_z<F: Scalar>(ch: &Channel<F>) -> Result<Channel<F>> {
    let k = check_wiretap_names(ch)?;
    let mut in_vars = ch.in_vars().to_vec();
    in_vars.extend(ch.out_vars().iter().cloned());
    let z_card = ch.out_vars()[k].card;
    let n_in: usize = in_vars.iter().map(|v| v.card).product();
    // Z is the last input axis, so t = cell mod |Z|
    let table: Vec<usize> = (0..n_in).map(|c| c % z_card).collect();
    Channel::deterministic(in_vars, vec![VarSpec::new("T", z_card)], &table)
}

/// How the auxiliary receiver is specified.
#[derive(Clone, Debug)]
pub enum AuxReceiver<F: Scalar> {
    /// `T = Z`, derived per channel.
    CopyEavesdropper,
    /// An explicit kernel consuming `(X1..Xk, Y1..Yk, Z)` and emitting `T`.
    Explicit(Channel<F>),
}

impl<F: Scalar> AuxReceiver<F> {
    pub fn for_channel(&self, ch: &Channel<F>) -> Result<Channel<F>> {
        match self {
            AuxReceiver::CopyEavesdropper => t_equals_z(ch),
            AuxReceiver::Explicit(a) => {
                crate::dbbound::validate_aux_shape(a, ch)?;
                Ok(a.clone())
            }
        }
    }
}

fn x_group_names(k: usize) -> Vec<Group> {
    (0..k).map(|i| vec![format!("X{}", i + 1)]).collect()
}

fn xy_group_names(k: usize) -> Vec<Group> {
    (0..k)
        .map(|i| vec![format!("X{}", i + 1), format!("Y{}", i + 1)])
        .collect()
}

/// Exact objective value for one composed joint, via the distribution
/// kernels: `I_lambda(XY|T) - I_lambda(X) + I(V;T|U) - I(V;Z|U)`.
///
/// `ch_with_t` already carries the auxiliary output `T`; `puv` reads
/// `(X1..Xk, Y1..Yk)` and emits `(U, V)`.
pub fn v_objective<F: Scalar>(
    px: &JointDist<F>,
    ch_with_t: &Channel<F>,
    puv: &Channel<F>,
    fp: &FractionalPartition<F>,
) -> Result<F> {
    let k = fp.k();
    let joint = px.push_through(ch_with_t)?.push_through(puv)?;
    let a = i_lambda(&joint, &xy_group_names(k), fp, &["T".to_string()])?;
    let b = i_lambda(&joint, &x_group_names(k), fp, &[])?;
    let c = joint.cond_mutual_info(&["V"], &["T"], &["U"])?
        - joint.cond_mutual_info(&["V"], &["Z"], &["U"])?;
    Ok(a - b + c)
}

/// Axis layout of the composed joint `[X1..Xk, Y1..Yk, Z, T, U, V]`.
struct AxisMap {
    k: usize,
}

impl AxisMap {
    fn x(&self, i: usize) -> usize {
        i
    }
    fn y(&self, i: usize) -> usize {
        self.k + i
    }
    fn z(&self) -> usize {
        2 * self.k
    }
    fn t(&self) -> usize {
        2 * self.k + 1
    }
    fn u(&self) -> usize {
        2 * self.k + 2
    }
    fn v(&self) -> usize {
        2 * self.k + 3
    }
}

/// The objective as a signed sum of marginal entropies over the composed
/// joint; shared by both coordinate blocks.
fn objective_terms<F: Scalar>(fp: &FractionalPartition<F>, ax: &AxisMap) -> Vec<(F, Vec<usize>)> {
    let k = ax.k;
    let full: SubsetMask = (1 << k) - 1;
    let lam_sum = fp.sum_weights();
    let one_minus = F::one() - lam_sum;
    let mut terms: Vec<(F, Vec<usize>)> = Vec::new();

    let xyt: Vec<usize> = (0..k)
        .flat_map(|i| [ax.x(i), ax.y(i)])
        .chain([ax.t()])
        .collect();
    terms.push((one_minus, xyt));
    terms.push((-F::one(), vec![ax.t()]));
    for (mask, w) in fp.weights() {
        let comp = full & !mask;
        let mut axes: Vec<usize> = (0..k)
            .filter(|&i| comp & (1 << i) != 0)
            .flat_map(|i| [ax.x(i), ax.y(i)])
            .collect();
        axes.push(ax.t());
        terms.push((w, axes));
    }

    let x_all: Vec<usize> = (0..k).map(|i| ax.x(i)).collect();
    terms.push((-one_minus, x_all));
    for (mask, w) in fp.weights() {
        let comp = full & !mask;
        let axes: Vec<usize> = (0..k).filter(|&i| comp & (1 << i) != 0).map(|i| ax.x(i)).collect();
        terms.push((-w, axes));
    }

    // I(V;T|U) - I(V;Z|U) after cancelling H(VU) and H(U)
    terms.push((F::one(), vec![ax.t(), ax.u()]));
    terms.push((-F::one(), vec![ax.v(), ax.t(), ax.u()]));
    terms.push((-F::one(), vec![ax.z(), ax.u()]));
    terms.push((F::one(), vec![ax.v(), ax.z(), ax.u()]));
    terms
}

/// The objective as a function of the input distribution `p(x_[k])`, with
/// the channel and auxiliary kernel frozen.
///
/// `value` and `gradient` accept any nonnegative vector over the joint
/// input alphabet (the smooth extension off the simplex), which is what a
/// finite-difference check differentiates.
pub struct PxObjective<F: Scalar> {
    inner: EntropyObjective<F>,
    n_inputs: usize,
}

impl<F: Scalar> PxObjective<F> {
    pub fn new(
        ch_with_t: &Channel<F>,
        puv: &Channel<F>,
        fp: &FractionalPartition<F>,
    ) -> Result<Self> {
        let k = fp.k();
        let uni = JointDist::uniform(ch_with_t.in_vars().to_vec())?;
        let base = uni.push_through(ch_with_t)?.push_through(puv)?;
        let n_inputs: usize = ch_with_t.in_vars().iter().map(|v| v.card).product();
        let scale = real::<F>(n_inputs as f64);
        let kernel: Vec<F> = base.probs().iter().map(|&p| p * scale).collect();
        let shape = Shape::new(base.vars().iter().map(|v| v.card).collect())?;
        let tail = shape.len() / n_inputs;
        let cell_theta: Vec<u32> = (0..shape.len()).map(|c| (c / tail) as u32).collect();
        let terms = objective_terms(fp, &AxisMap { k });
        Ok(PxObjective {
            inner: EntropyObjective::new(&shape, kernel, cell_theta, n_inputs, &terms),
            n_inputs,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn value(&self, px: &[F]) -> F {
        self.inner.value(px)
    }

    pub fn gradient(&self, px: &[F]) -> Vec<F> {
        self.inner.value_and_grad(px).1
    }
}

impl<F: Scalar> Objective<F> for PxObjective<F> {
    fn value(&self, theta: &[F]) -> F {
        self.inner.value(theta)
    }
    fn value_and_grad(&self, theta: &[F]) -> (F, Vec<F>) {
        self.inner.value_and_grad(theta)
    }
}

/// The objective as a function of the auxiliary kernel `p(u,v | x,y)`, with
/// the input distribution frozen. One simplex block per `(x, y)` slice.
struct PuvObjective<F: Scalar> {
    inner: EntropyObjective<F>,
    blocks: Vec<std::ops::Range<usize>>,
    in_vars: Vec<VarSpec>,
    card_u: usize,
    card_v: usize,
}

impl<F: Scalar> PuvObjective<F> {
    fn new(
        px: &JointDist<F>,
        ch_with_t: &Channel<F>,
        fp: &FractionalPartition<F>,
        card_u: usize,
        card_v: usize,
    ) -> Result<Self> {
        let k = fp.k();
        let base = px.push_through(ch_with_t)?; // [X.., Y.., Z, T]
        let zc = base.vars()[2 * k].card;
        let tc = base.vars()[2 * k + 1].card;
        let zt = zc * tc;
        let n_xy = base.num_cells() / zt;
        let uv = card_u * card_v;
        let total = base.num_cells() as u128 * uv as u128;
        if total > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: total, cap: MAX_CELLS });
        }
        let mut cards: Vec<usize> = base.vars().iter().map(|v| v.card).collect();
        cards.push(card_u);
        cards.push(card_v);
        let shape = Shape::new(cards)?;
        let mut kernel = Vec::with_capacity(shape.len());
        let mut cell_theta = Vec::with_capacity(shape.len());
        for (bc, &p) in base.probs().iter().enumerate() {
            let xy = bc / zt;
            for off in 0..uv {
                kernel.push(p);
                cell_theta.push((xy * uv + off) as u32);
            }
        }
        let terms = objective_terms(fp, &AxisMap { k });
        let blocks = (0..n_xy).map(|xy| xy * uv..(xy + 1) * uv).collect();
        let mut in_vars: Vec<VarSpec> = ch_with_t.in_vars().to_vec();
        in_vars.extend(ch_with_t.out_vars().iter().take(k).cloned());
        Ok(PuvObjective {
            inner: EntropyObjective::new(&shape, kernel, cell_theta, n_xy * uv, &terms),
            blocks,
            in_vars,
            card_u,
            card_v,
        })
    }

    fn n_theta(&self) -> usize {
        self.inner.n_theta()
    }

    fn channel_from(&self, theta: &[F]) -> Result<Channel<F>> {
        Channel::new(
            self.in_vars.clone(),
            vec![VarSpec::new("U", self.card_u), VarSpec::new("V", self.card_v)],
            theta.to_vec(),
        )
    }

    fn uniform_theta(&self) -> Vec<F> {
        let uv = self.card_u * self.card_v;
        let p = F::one() / real::<F>(uv as f64);
        vec![p; self.n_theta()]
    }
}

impl<F: Scalar> Objective<F> for PuvObjective<F> {
    fn value(&self, theta: &[F]) -> F {
        self.inner.value(theta)
    }
    fn value_and_grad(&self, theta: &[F]) -> (F, Vec<F>) {
        self.inner.value_and_grad(theta)
    }
}

/// Knobs for the heuristic and grid searches.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Multi-start count in heuristic mode (>= 1).
    pub restarts: usize,
    /// Seed from which every per-restart and per-grid-point seed derives.
    pub master_seed: u64,
    /// Initial ascent step.
    pub step_init: f64,
    /// Relative-improvement convergence threshold.
    pub tol: f64,
    /// Per-block ascent iteration cap.
    pub max_iters: usize,
    /// Exhaustive mode: points per axis (>= 2); spacing is 1/(grid_res-1).
    pub grid_res: Option<usize>,
    /// Auxiliary alphabet caps; default is the joint input alphabet size + 1.
    pub card_u: Option<usize>,
    pub card_v: Option<usize>,
    /// Time-sharing alphabet sizes used by the MAC region solver.
    pub card_t1: usize,
    pub card_t2: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 8,
            master_seed: 0,
            step_init: 0.25,
            tol: 1e-7,
            max_iters: 300,
            grid_res: None,
            card_u: None,
            card_v: None,
            card_t1: 2,
            card_t2: 2,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInput("need at least one restart".into()));
        }
        if let Some(g) = self.grid_res {
            if g < 2 {
                return Err(Error::InvalidInput("grid resolution must be >= 2".into()));
            }
        }
        if self.tol <= 0.0 || self.step_init <= 0.0 || self.max_iters == 0 {
            return Err(Error::InvalidInput("tolerances and iteration caps must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn ascent_options(&self) -> AscentOptions {
        AscentOptions { step_init: self.step_init, max_iters: self.max_iters, tol: self.tol }
    }
}

/// Search mode tag carried by solutions and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Heuristic,
    Grid,
}

/// Best point found for one channel.
#[derive(Clone, Debug)]
pub struct VSolution<F: Scalar> {
    pub value: F,
    pub px: JointDist<F>,
    pub puv: Channel<F>,
    pub converged: bool,
    pub mode: SearchMode,
}

const MAX_OUTER_ROUNDS: usize = 25;
const GRID_POINT_CAP: u128 = 2_000_000;

/// (value, restart index, input dist, auxiliary kernel, converged)
type RestartResult<F> = (F, usize, JointDist<F>, Channel<F>, bool);
/// (value, input dist, auxiliary kernel)
type GridResult<F> = (F, JointDist<F>, Channel<F>);

fn resolve_uv_cards<F: Scalar>(ch: &Channel<F>, cfg: &OptimizerConfig) -> (usize, usize) {
    let n_x: usize = ch.in_vars().iter().map(|v| v.card).product();
    (cfg.card_u.unwrap_or(n_x + 1), cfg.card_v.unwrap_or(n_x + 1))
}

/// Lower-estimate the bound functional for one channel and auxiliary
/// receiver. Identical configs (same `master_seed`) give bit-identical
/// results; grid mode is exhaustive over the stated input grid.
pub fn v_lambda<F: Scalar>(
    ch: &Channel<F>,
    aux: &AuxReceiver<F>,
    fp: &FractionalPartition<F>,
    cfg: &OptimizerConfig,
) -> Result<VSolution<F>> {
    cfg.validate()?;
    let k = check_wiretap_names(ch)?;
    if fp.k() != k {
        return Err(Error::InvalidInput(format!(
            "weighting is over [{}] but the channel serves {} terminals",
            fp.k(),
            k
        )));
    }
    let report = fp.validate();
    if !report.ok() {
        return Err(Error::InvalidPartition("weighting fails validation".into()));
    }
    let aux_ch = aux.for_channel(ch)?;
    let full = ch.compose(&aux_ch)?;
    let (card_u, card_v) = resolve_uv_cards(ch, cfg);
    match cfg.grid_res {
        None => v_lambda_heuristic(&full, fp, cfg, card_u, card_v),
        Some(g) => v_lambda_grid(&full, fp, cfg, card_u, card_v, g),
    }
}

fn random_puv_theta<F: Scalar>(
    obj: &PuvObjective<F>,
    rng: &mut ChaCha8Rng,
) -> Vec<F> {
    let uv = obj.card_u * obj.card_v;
    let mut theta = Vec::with_capacity(obj.n_theta());
    for _ in 0..obj.n_theta() / uv {
        theta.extend(random_simplex_point::<F, _>(uv, rng));
    }
    theta
}

fn v_lambda_heuristic<F: Scalar>(
    full: &Channel<F>,
    fp: &FractionalPartition<F>,
    cfg: &OptimizerConfig,
    card_u: usize,
    card_v: usize,
) -> Result<VSolution<F>> {
    let in_vars = full.in_vars().to_vec();
    let n_x: usize = in_vars.iter().map(|v| v.card).product();
    let mut best: Option<RestartResult<F>> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.master_seed, &[restart]));
        let mut px_theta = random_simplex_point::<F, _>(n_x, &mut rng);
        let mut px = JointDist::new(in_vars.clone(), px_theta.clone())?;
        let mut puv_obj = PuvObjective::new(&px, full, fp, card_u, card_v)?;
        let mut puv_theta = random_puv_theta(&puv_obj, &mut rng);
        let mut last = F::neg_infinity();
        let mut converged = false;
        for _round in 0..MAX_OUTER_ROUNDS {
            let puv_ch = puv_obj.channel_from(&puv_theta)?;
            let px_obj = PxObjective::new(full, &puv_ch, fp)?;
            let out = ascend(&px_obj, px_theta, &[0..n_x], &cfg.ascent_options());
            px_theta = out.theta;
            px = JointDist::new(in_vars.clone(), px_theta.clone())?;
            puv_obj = PuvObjective::new(&px, full, fp, card_u, card_v)?;
            let out = ascend(&puv_obj, puv_theta, &puv_obj.blocks, &cfg.ascent_options());
            puv_theta = out.theta;
            let gain = out.value - last;
            last = out.value;
            if gain.abs() < real::<F>(cfg.tol) * F::one().max(last.abs()) {
                converged = true;
                break;
            }
        }
        let puv_ch = puv_obj.channel_from(&puv_theta)?;
        let value = v_objective(&px, full, &puv_ch, fp)?;
        let better = match &best {
            None => true,
            Some((bv, _, _, _, _)) => value > *bv,
        };
        if better {
            best = Some((value, restart, px, puv_ch, converged));
        }
    }
    let (value, _, px, puv, converged) = best.expect("restarts >= 1");
    Ok(VSolution { value, px, puv, converged, mode: SearchMode::Heuristic })
}

fn v_lambda_grid<F: Scalar>(
    full: &Channel<F>,
    fp: &FractionalPartition<F>,
    cfg: &OptimizerConfig,
    card_u: usize,
    card_v: usize,
    grid_res: usize,
) -> Result<VSolution<F>> {
    let in_vars = full.in_vars().to_vec();
    let n_x: usize = in_vars.iter().map(|v| v.card).product();
    let steps = grid_res - 1;
    if n_compositions(steps, n_x) > GRID_POINT_CAP {
        return Err(Error::SizeLimit(format!(
            "grid of {} points exceeds the {} cap",
            n_compositions(steps, n_x),
            GRID_POINT_CAP
        )));
    }
    let mut points: Vec<Vec<usize>> = Vec::new();
    for_each_composition(steps, n_x, &mut |p| points.push(p.to_vec()));

    let denom = real::<F>(steps as f64);
    let evaluated: Result<Vec<GridResult<F>>> = points
        .par_iter()
        .map(|parts| {
            let px_theta: Vec<F> =
                parts.iter().map(|&a| real::<F>(a as f64) / denom).collect();
            let px = JointDist::new(in_vars.clone(), px_theta)?;
            let puv_obj = PuvObjective::new(&px, full, fp, card_u, card_v)?;
            // inner searches are seeded by the point's content so nested
            // grids reuse identical runs (monotone refinement)
            let seed_data: Vec<usize> =
                px.probs().iter().map(|&x| as_f64(x).to_bits() as usize).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.master_seed, &seed_data));
            let starts = [puv_obj.uniform_theta(), random_puv_theta(&puv_obj, &mut rng)];
            let mut best_theta: Option<(F, Vec<F>)> = None;
            for theta0 in starts {
                let out = ascend(&puv_obj, theta0, &puv_obj.blocks, &cfg.ascent_options());
                let replace = match &best_theta {
                    None => true,
                    Some((bv, _)) => out.value > *bv,
                };
                if replace {
                    best_theta = Some((out.value, out.theta));
                }
            }
            let (_, theta) = best_theta.expect("at least one start");
            let puv_ch = puv_obj.channel_from(&theta)?;
            let value = v_objective(&px, full, &puv_ch, fp)?;
            Ok((value, px, puv_ch))
        })
        .collect();
    let evaluated = evaluated?;
    let mut best_idx = 0usize;
    for (i, item) in evaluated.iter().enumerate() {
        if item.0 > evaluated[best_idx].0 {
            best_idx = i;
        }
    }
    let (value, px, puv) = evaluated.into_iter().nth(best_idx).expect("nonempty grid");
    Ok(VSolution { value, px, puv, converged: true, mode: SearchMode::Grid })
}

/// Per-channel entry of a [`BoundReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelBound {
    pub id: String,
    /// 1 for the main channel, `alpha_l` for parallels.
    pub weight: f64,
    pub v: f64,
    pub converged: bool,
    pub argmax_px: DistJson,
    pub argmax_puv: ChannelJson,
}

/// The composite key-capacity upper bound and its per-channel breakdown.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub per_channel: Vec<ChannelBound>,
    pub mode: SearchMode,
    /// True only in grid mode: the value is the exact maximum over the
    /// stated grid (still a lower estimate of the true maximum).
    pub certified: bool,
}

/// Evaluate `V(main) + sum_l alpha_l V(parallel_l)`.
///
/// The weighting must place no mass on subsets containing all key
/// terminals `{1..r}`.
pub fn secret_key_bound<F: Scalar>(
    sys: &WiMWCSystem<F>,
    aux: &AuxReceiver<F>,
    fp: &FractionalPartition<F>,
    cfg: &OptimizerConfig,
) -> Result<BoundReport> {
    if fp.k() != sys.k() {
        return Err(Error::InvalidInput("weighting and system disagree on k".into()));
    }
    if !fp.admissible_for_keyset(sys.r()) {
        return Err(Error::InvalidInput(
            "weighting puts mass on a subset containing every key terminal".into(),
        ));
    }
    let mode = if cfg.grid_res.is_some() { SearchMode::Grid } else { SearchMode::Heuristic };
    let mut per_channel = Vec::with_capacity(1 + sys.parallels().len());
    let main_sol = v_lambda(sys.main(), aux, fp, cfg)?;
    let mut value = as_f64(main_sol.value);
    per_channel.push(ChannelBound {
        id: "main".to_string(),
        weight: 1.0,
        v: as_f64(main_sol.value),
        converged: main_sol.converged,
        argmax_px: dist_to_json(&main_sol.px),
        argmax_puv: channel_to_json(&main_sol.puv),
    });
    for (i, (ch, alpha)) in sys.parallels().iter().enumerate() {
        let sol = v_lambda(ch, aux, fp, cfg)?;
        value += as_f64(*alpha) * as_f64(sol.value);
        per_channel.push(ChannelBound {
            id: format!("parallel-{}", i + 1),
            weight: as_f64(*alpha),
            v: as_f64(sol.value),
            converged: sol.converged,
            argmax_px: dist_to_json(&sol.px),
            argmax_puv: channel_to_json(&sol.puv),
        });
    }
    Ok(BoundReport { value, per_channel, mode, certified: mode == SearchMode::Grid })
}

/// A noiseless public channel: every terminal and the eavesdropper observe
/// the full input tuple (`Y1 = .. = Yk = Z = X_[k]`).
pub fn public_noiseless_channel<F: Scalar>(in_cards: &[usize]) -> Result<Channel<F>> {
    let k = in_cards.len();
    if k == 0 {
        return Err(Error::InvalidInput("need at least one terminal".into()));
    }
    let n_in: usize = in_cards.iter().product();
    let in_vars: Vec<VarSpec> = in_cards
        .iter()
        .enumerate()
        .map(|(i, &c)| VarSpec::new(format!("X{}", i + 1), c))
        .collect();
    let mut out_vars: Vec<VarSpec> = (0..k)
        .map(|i| VarSpec::new(format!("Y{}", i + 1), n_in))
        .collect();
    out_vars.push(VarSpec::new("Z", n_in));
    // output cell = (x, x, .., x) in a tensor of k+1 axes of size n_in
    let mut table = Vec::with_capacity(n_in);
    for x in 0..n_in {
        let mut cell = 0usize;
        for _ in 0..=k {
            cell = cell * n_in + x;
        }
        table.push(cell);
    }
    Channel::deterministic(in_vars, out_vars, &table)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Channel<f64>;
    type Fp = FractionalPartition<f64>;

    fn bit(name: &str) -> VarSpec {
        VarSpec::new(name, 2)
    }

    /// Two-terminal channel: Y1 = X2 (noiseless), Y2 = X1 via BSC(p),
    /// Z = X1 via BSC(q).
    fn bsc_pair(p: f64, q: f64) -> C {
        let mut probs = vec![0.0; 4 * 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                for y2 in 0..2usize {
                    for z in 0..2usize {
                        let w = (if y2 == x1 { 1.0 - p } else { p })
                            * (if z == x1 { 1.0 - q } else { q });
                        let y1 = x2;
                        probs[(x1 * 2 + x2) * 8 + y1 * 4 + y2 * 2 + z] += w;
                    }
                }
            }
        }
        C::new(
            vec![bit("X1"), bit("X2")],
            vec![bit("Y1"), bit("Y2"), bit("Z")],
            probs,
        )
        .unwrap()
    }

    fn k2_mi_weights() -> Fp {
        Fp::uniform_km1(2).unwrap()
    }

    #[test]
    fn t_copy_is_deterministic() {
        let ch = bsc_pair(0.1, 0.3);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let px = JointDist::uniform(vec![bit("X1"), bit("X2")]).unwrap();
        let j = px.push_through(&full).unwrap();
        assert!(j.cond_entropy(&["T"], &["Z"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn t_copy_cancels_auxiliary_terms() {
        let ch = bsc_pair(0.15, 0.4);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let px = crate::sampling::random_joint::<f64, _>(
                vec![bit("X1"), bit("X2")],
                &mut rng,
            )
            .unwrap();
            let puv = crate::sampling::random_channel::<f64, _>(
                vec![bit("X1"), bit("X2"), bit("Y1"), bit("Y2")],
                vec![VarSpec::new("U", 3), VarSpec::new("V", 3)],
                &mut rng,
            )
            .unwrap();
            let joint = px.push_through(&full).unwrap().push_through(&puv).unwrap();
            let diff = joint.cond_mutual_info(&["V"], &["T"], &["U"]).unwrap()
                - joint.cond_mutual_info(&["V"], &["Z"], &["U"]).unwrap();
            assert!(diff.abs() < 1e-12);
        }
    }

    #[test]
    fn objective_matches_entropy_assembly_oracle() {
        let ch = bsc_pair(0.2, 0.35);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let fp = k2_mi_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let px =
            crate::sampling::random_joint::<f64, _>(vec![bit("X1"), bit("X2")], &mut rng).unwrap();
        let puv = crate::sampling::random_channel::<f64, _>(
            vec![bit("X1"), bit("X2"), bit("Y1"), bit("Y2")],
            vec![VarSpec::new("U", 2), VarSpec::new("V", 2)],
            &mut rng,
        )
        .unwrap();
        let v = v_objective(&px, &full, &puv, &fp).unwrap();

        // oracle: assemble the signed entropy sum in a different association
        let joint = px.push_through(&full).unwrap().push_through(&puv).unwrap();
        let h = |names: &[&str]| joint.entropy(names).unwrap();
        let lam = 2.0; // sum of weights for the k=2 point
        let i_xy_t = (1.0 - lam) * h(&["X1", "X2", "Y1", "Y2", "T"]) - h(&["T"])
            + h(&["X2", "Y2", "T"])
            + h(&["X1", "Y1", "T"]);
        let i_x = (1.0 - lam) * h(&["X1", "X2"]) + h(&["X2"]) + h(&["X1"]);
        let aux_part = h(&["T", "U"]) - h(&["V", "T", "U"]) - h(&["Z", "U"])
            + h(&["V", "Z", "U"]);
        let oracle = i_xy_t - i_x + aux_part;
        assert!((v - oracle).abs() < 1e-10, "{} vs {}", v, oracle);
    }

    #[test]
    fn machinery_value_matches_exact_route() {
        let ch = bsc_pair(0.1, 0.25);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let fp = k2_mi_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let puv = crate::sampling::random_channel::<f64, _>(
                vec![bit("X1"), bit("X2"), bit("Y1"), bit("Y2")],
                vec![VarSpec::new("U", 2), VarSpec::new("V", 3)],
                &mut rng,
            )
            .unwrap();
            let obj = PxObjective::new(&full, &puv, &fp).unwrap();
            let px_theta = crate::sampling::random_simplex_point::<f64, _>(4, &mut rng);
            let px = JointDist::new(vec![bit("X1"), bit("X2")], px_theta.clone()).unwrap();
            let exact = v_objective(&px, &full, &puv, &fp).unwrap();
            assert!((obj.value(&px_theta) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ch = bsc_pair(0.2, 0.3);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let fp = k2_mi_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let puv = crate::sampling::random_channel::<f64, _>(
            vec![bit("X1"), bit("X2"), bit("Y1"), bit("Y2")],
            vec![VarSpec::new("U", 3), VarSpec::new("V", 3)],
            &mut rng,
        )
        .unwrap();
        let obj = PxObjective::new(&full, &puv, &fp).unwrap();
        for _ in 0..5 {
            let px = crate::sampling::random_simplex_point::<f64, _>(4, &mut rng);
            let g = obj.gradient(&px);
            let h = 1e-5;
            for j in 0..4 {
                let mut up = px.clone();
                let mut dn = px.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (obj.value(&up) - obj.value(&dn)) / (2.0 * h);
                let rel = (g[j] - fd).abs() / g[j].abs().max(1.0);
                assert!(rel < 1e-4, "coord {}: {} vs {}", j, g[j], fd);
            }
        }
    }

    #[test]
    fn public_channel_value_vanishes_with_t_copy() {
        let ch = public_noiseless_channel::<f64>(&[2, 2]).unwrap();
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig {
            grid_res: Some(5),
            card_u: Some(2),
            card_v: Some(2),
            max_iters: 120,
            ..OptimizerConfig::default()
        };
        let sol = v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        assert!(sol.value.abs() < 1e-6, "V = {}", sol.value);
    }

    #[test]
    fn constant_output_channel_gives_zero() {
        // all outputs have one-letter alphabets
        let ch = C::deterministic(
            vec![bit("X1"), bit("X2")],
            vec![
                VarSpec::new("Y1", 1),
                VarSpec::new("Y2", 1),
                VarSpec::new("Z", 1),
            ],
            &[0, 0, 0, 0],
        )
        .unwrap();
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig {
            restarts: 2,
            card_u: Some(2),
            card_v: Some(2),
            ..OptimizerConfig::default()
        };
        let sol = v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        assert!(sol.value.abs() < 1e-9);
    }

    #[test]
    fn seed_determinism() {
        let ch = bsc_pair(0.1, 0.3);
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig {
            restarts: 3,
            master_seed: 42,
            card_u: Some(2),
            card_v: Some(2),
            max_iters: 80,
            ..OptimizerConfig::default()
        };
        let a = v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        let b = v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.px.probs(), b.px.probs());
        assert_eq!(a.puv.probs(), b.puv.probs());
    }

    #[test]
    fn inadmissible_weighting_rejected_by_bound() {
        // k=2, r=2: the only weighting has mass on {1} and {2}, neither
        // contains {1,2}, so it is admissible; force failure with r=1
        let sys = WiMWCSystem::new(2, 1, bsc_pair(0.1, 0.2), vec![]).unwrap();
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig::default();
        assert!(matches!(
            secret_key_bound(&sys, &AuxReceiver::CopyEavesdropper, &fp, &cfg),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_weight_parallel_changes_nothing() {
        let main = bsc_pair(0.1, 0.3);
        let parallel = public_noiseless_channel::<f64>(&[2, 2]).unwrap();
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig {
            restarts: 2,
            card_u: Some(2),
            card_v: Some(2),
            max_iters: 60,
            ..OptimizerConfig::default()
        };
        let sys_plain = WiMWCSystem::new(2, 2, main.clone(), vec![]).unwrap();
        let sys_zero = WiMWCSystem::new(2, 2, main, vec![(parallel, 0.0)]).unwrap();
        let a = secret_key_bound(&sys_plain, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        let b = secret_key_bound(&sys_zero, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn constant_auxiliaries_reduce_to_measure_difference() {
        let ch = bsc_pair(0.15, 0.3);
        let aux = t_equals_z(&ch).unwrap();
        let full = ch.compose(&aux).unwrap();
        let fp = k2_mi_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let px =
            crate::sampling::random_joint::<f64, _>(vec![bit("X1"), bit("X2")], &mut rng).unwrap();
        let puv = Channel::<f64>::deterministic(
            vec![bit("X1"), bit("X2"), bit("Y1"), bit("Y2")],
            vec![VarSpec::new("U", 1), VarSpec::new("V", 1)],
            &[0; 16],
        )
        .unwrap();
        let v = v_objective(&px, &full, &puv, &fp).unwrap();
        let joint = px.push_through(&full).unwrap();
        let expect = i_lambda(&joint, &xy_group_names(2), &fp, &["T".to_string()]).unwrap()
            - i_lambda(&joint, &x_group_names(2), &fp, &[] as &[String]).unwrap();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn grid_bound_nonnegative_with_t_copy() {
        // the grid includes independent inputs, where the objective is >= 0
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..3 {
            let ch = crate::sampling::random_channel::<f64, _>(
                vec![bit("X1"), bit("X2")],
                vec![bit("Y1"), bit("Y2"), bit("Z")],
                &mut rng,
            )
            .unwrap();
            let cfg = OptimizerConfig {
                grid_res: Some(5),
                card_u: Some(2),
                card_v: Some(2),
                max_iters: 60,
                ..OptimizerConfig::default()
            };
            let sol =
                v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &k2_mi_weights(), &cfg).unwrap();
            assert!(sol.value >= -1e-9, "V = {}", sol.value);
        }
    }

    #[test]
    fn grid_points_include_boundary() {
        // grid search handles zero-probability inputs without NaNs
        let ch = bsc_pair(0.0, 0.5);
        let fp = k2_mi_weights();
        let cfg = OptimizerConfig {
            grid_res: Some(3),
            card_u: Some(2),
            card_v: Some(2),
            max_iters: 40,
            ..OptimizerConfig::default()
        };
        let sol = v_lambda(&ch, &AuxReceiver::CopyEavesdropper, &fp, &cfg).unwrap();
        assert!(sol.value.is_finite());
    }

    #[test]
    fn random_uv_cards_default_to_input_plus_one() {
        let ch = bsc_pair(0.1, 0.1);
        let cfg = OptimizerConfig::default();
        let (cu, cv) = resolve_uv_cards(&ch, &cfg);
        assert_eq!(cu, 5);
        assert_eq!(cv, 5);
    }
}
