//! Outer bounds for two-user multiple-access channels with generalized
//! feedback, constrained by the dependence-balance input conditions.
//!
//! The channel is `p(y, yf1, yf2 | x1, x2)` where transmitter `i` observes
//! the feedback pair `(Y, YFi)`; the tensor stores only the extra parts
//! `YF1`, `YF2`. Rate pairs are bounded, for some `p(t1, t2, x1, x2)`
//! satisfying two balance constraints, by four mutual-information caps; the
//! solver searches directly over the capped-cardinality auxiliary space and
//! re-verifies feasibility of every reported point.
//!
//! Also exposed: the per-letter sum-rate chain check for simulated k-user
//! feedback codes (receiver output housed in the trace's `Z` slot).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbbound::TraceDist;
use crate::dist::{Channel, JointDist, VarSpec};
use crate::error::{Error, Result};
use crate::fileio::{dist_to_json, DistJson};
use crate::keybound::OptimizerConfig;
use crate::opt::{
    ascend, for_each_composition, mix_seed, n_compositions, EntropyObjective, Objective,
};
use crate::sampling::random_simplex_point;
use crate::scalar::{as_f64, real, Scalar};
use crate::shape::Shape;

/// Feasibility slack below which a point is rejected.
const FEAS_TOL: f64 = 1e-9;
const GRID_POINT_CAP: u128 = 2_000_000;

/// A two-user MAC with generalized feedback `Y_Fi = (Y, YFi)`.
#[derive(Clone, Debug)]
pub struct GenFeedbackMAC<F: Scalar> {
    ch: Channel<F>,
}

impl<F: Scalar> GenFeedbackMAC<F> {
    /// The channel must map `(X1, X2)` to `(Y, YF1, YF2)`, in those names.
    pub fn new(ch: Channel<F>) -> Result<Self> {
        let in_names: Vec<&str> = ch.in_vars().iter().map(|v| v.name.as_str()).collect();
        let out_names: Vec<&str> = ch.out_vars().iter().map(|v| v.name.as_str()).collect();
        if in_names != ["X1", "X2"] || out_names != ["Y", "YF1", "YF2"] {
            return Err(Error::InvalidInput(
                "feedback MAC needs inputs X1, X2 and outputs Y, YF1, YF2".into(),
            ));
        }
        Ok(GenFeedbackMAC { ch })
    }

    pub fn channel(&self) -> &Channel<F> {
        &self.ch
    }

    pub fn x_cards(&self) -> (usize, usize) {
        (self.ch.in_vars()[0].card, self.ch.in_vars()[1].card)
    }
}

/// Slack of the two balance constraints at one input distribution.
#[derive(Clone, Debug)]
pub struct ConstraintSlacks<F> {
    /// `I(X1;X2|Y,YF1,YF2,T1,T2) - I(X1;X2|T1,T2)`.
    pub slack_a: F,
    /// `I(X1 YF1; X2 YF2 | T1, Y) - I(X1;X2|T1)`.
    pub slack_b: F,
    pub ok: bool,
}

fn check_t_caps<F: Scalar>(p: &JointDist<F>, mac: &GenFeedbackMAC<F>) -> Result<()> {
    let names: Vec<&str> = p.vars().iter().map(|v| v.name.as_str()).collect();
    if names != ["T1", "T2", "X1", "X2"] {
        return Err(Error::InvalidInput(
            "input distribution must cover exactly (T1, T2, X1, X2)".into(),
        ));
    }
    let (cx1, cx2) = mac.x_cards();
    let t1 = p.vars()[0].card;
    let t2 = p.vars()[1].card;
    if t1 > 5 {
        return Err(Error::InvalidInput(format!("|T1| = {} exceeds the cap of 5", t1)));
    }
    if t2 > cx1 * cx2 + 3 {
        return Err(Error::InvalidInput(format!(
            "|T2| = {} exceeds the cap of |X1||X2|+3 = {}",
            t2,
            cx1 * cx2 + 3
        )));
    }
    Ok(())
}

/// Evaluate both constraint slacks exactly; `ok` means both are above
/// `-1e-9`.
pub fn constraints_ok<F: Scalar>(
    p: &JointDist<F>,
    mac: &GenFeedbackMAC<F>,
) -> Result<ConstraintSlacks<F>> {
    check_t_caps(p, mac)?;
    let joint = p.push_through(mac.channel())?;
    let tol = real::<F>(FEAS_TOL);
    let slack_a = joint.cond_mutual_info(&["X1"], &["X2"], &["Y", "YF1", "YF2", "T1", "T2"])?
        - joint.cond_mutual_info(&["X1"], &["X2"], &["T1", "T2"])?;
    let slack_b = joint.cond_mutual_info(&["X1", "YF1"], &["X2", "YF2"], &["T1", "Y"])?
        - joint.cond_mutual_info(&["X1"], &["X2"], &["T1"])?;
    Ok(ConstraintSlacks { slack_a, slack_b, ok: slack_a >= -tol && slack_b >= -tol })
}

/// The four rate caps at one input distribution.
#[derive(Clone, Copy, Debug)]
pub struct RateCaps<F> {
    /// `I(X1; Y, YF2 | X2, T1, T2)`.
    pub a1: F,
    /// `I(X2; Y, YF1 | X1, T1, T2)`.
    pub a2: F,
    /// `I(X1, X2; Y, YF1, YF2 | T1, T2)`.
    pub a3: F,
    /// `I(X1, X2; Y | T1)`.
    pub a4: F,
}

impl<F: Scalar> RateCaps<F> {
    pub fn sum_cap(&self) -> F {
        self.a3.min(self.a4)
    }

    /// Maximum of `mu R1 + (1-mu) R2` over the capped rate pentagon, and
    /// the optimizing pair.
    pub fn weighted_best(&self, mu: F) -> (F, (F, F)) {
        let s = self.sum_cap().max(F::zero());
        let half = real::<F>(0.5);
        let (r1, r2) = if mu >= half {
            let r1 = self.a1.max(F::zero()).min(s);
            let r2 = self.a2.max(F::zero()).min(s - r1);
            (r1, r2)
        } else {
            let r2 = self.a2.max(F::zero()).min(s);
            let r1 = self.a1.max(F::zero()).min(s - r2);
            (r1, r2)
        };
        (mu * r1 + (F::one() - mu) * r2, (r1, r2))
    }
}

/// Exact rate caps through the distribution kernels.
pub fn rate_caps<F: Scalar>(p: &JointDist<F>, mac: &GenFeedbackMAC<F>) -> Result<RateCaps<F>> {
    let joint = p.push_through(mac.channel())?;
    Ok(RateCaps {
        a1: joint.cond_mutual_info(&["X1"], &["Y", "YF2"], &["X2", "T1", "T2"])?,
        a2: joint.cond_mutual_info(&["X2"], &["Y", "YF1"], &["X1", "T1", "T2"])?,
        a3: joint.cond_mutual_info(&["X1", "X2"], &["Y", "YF1", "YF2"], &["T1", "T2"])?,
        a4: joint.cond_mutual_info(&["X1", "X2"], &["Y"], &["T1"])?,
    })
}

/// Options for the region/sum-rate searches.
#[derive(Clone, Debug)]
pub struct RegionOptions<F: Scalar> {
    /// Drop the second balance constraint (the region can only grow).
    pub drop_6b: bool,
    /// Extra candidate distributions evaluated exactly (used to warm-start
    /// and to guarantee containment properties in tests).
    pub warm_starts: Vec<JointDist<F>>,
}

impl<F: Scalar> Default for RegionOptions<F> {
    fn default() -> Self {
        RegionOptions { drop_6b: false, warm_starts: Vec::new() }
    }
}

/// Axis layout of the pushed joint `[T1, T2, X1, X2, Y, YF1, YF2]`.
const AX_T1: usize = 0;
const AX_T2: usize = 1;
const AX_X1: usize = 2;
const AX_X2: usize = 3;
const AX_Y: usize = 4;
const AX_YF1: usize = 5;
const AX_YF2: usize = 6;

fn cmi_terms(a: &[usize], b: &[usize], c: &[usize]) -> Vec<(f64, Vec<usize>)> {
    let mut ac = a.to_vec();
    ac.extend_from_slice(c);
    let mut bc = b.to_vec();
    bc.extend_from_slice(c);
    let mut abc = a.to_vec();
    abc.extend_from_slice(b);
    abc.extend_from_slice(c);
    let mut terms = vec![(1.0, ac), (1.0, bc), (-1.0, abc)];
    if !c.is_empty() {
        terms.push((-1.0, c.to_vec()));
    }
    terms
}

fn scaled<F: Scalar>(sign: f64, terms: &[(f64, Vec<usize>)]) -> Vec<(F, Vec<usize>)> {
    terms
        .iter()
        .map(|(c, axes)| (real::<F>(sign * c), axes.clone()))
        .collect()
}

/// All entropy objectives over one MAC, sharing the kernel.
struct MacEvaluator<F: Scalar> {
    a1: EntropyObjective<F>,
    a2: EntropyObjective<F>,
    a3: EntropyObjective<F>,
    a4: EntropyObjective<F>,
    /// violation of the first constraint (positive = infeasible)
    viol_a: EntropyObjective<F>,
    /// violation of the second constraint
    viol_b: EntropyObjective<F>,
    in_vars: Vec<VarSpec>,
    n_theta: usize,
}

impl<F: Scalar> MacEvaluator<F> {
    fn new(mac: &GenFeedbackMAC<F>, card_t1: usize, card_t2: usize) -> Result<Self> {
        let (cx1, cx2) = mac.x_cards();
        if card_t1 == 0 || card_t1 > 5 {
            return Err(Error::InvalidInput("|T1| must lie in 1..=5".into()));
        }
        if card_t2 == 0 || card_t2 > cx1 * cx2 + 3 {
            return Err(Error::InvalidInput("|T2| must lie in 1..=|X1||X2|+3".into()));
        }
        let in_vars = vec![
            VarSpec::new("T1", card_t1),
            VarSpec::new("T2", card_t2),
            VarSpec::new("X1", cx1),
            VarSpec::new("X2", cx2),
        ];
        let uni = JointDist::uniform(in_vars.clone())?;
        let base = uni.push_through(mac.channel())?;
        let n_theta = card_t1 * card_t2 * cx1 * cx2;
        let scale = real::<F>(n_theta as f64);
        let kernel: Vec<F> = base.probs().iter().map(|&p| p * scale).collect();
        let shape = Shape::new(base.vars().iter().map(|v| v.card).collect())?;
        let tail = shape.len() / n_theta;
        let cell_theta: Vec<u32> = (0..shape.len()).map(|c| (c / tail) as u32).collect();

        let build = |terms: Vec<(F, Vec<usize>)>| {
            EntropyObjective::new(&shape, kernel.clone(), cell_theta.clone(), n_theta, &terms)
        };
        let a1 = build(scaled(
            1.0,
            &cmi_terms(&[AX_X1], &[AX_Y, AX_YF2], &[AX_X2, AX_T1, AX_T2]),
        ));
        let a2 = build(scaled(
            1.0,
            &cmi_terms(&[AX_X2], &[AX_Y, AX_YF1], &[AX_X1, AX_T1, AX_T2]),
        ));
        let a3 = build(scaled(
            1.0,
            &cmi_terms(&[AX_X1, AX_X2], &[AX_Y, AX_YF1, AX_YF2], &[AX_T1, AX_T2]),
        ));
        let a4 = build(scaled(1.0, &cmi_terms(&[AX_X1, AX_X2], &[AX_Y], &[AX_T1])));
        let mut va = scaled::<F>(1.0, &cmi_terms(&[AX_X1], &[AX_X2], &[AX_T1, AX_T2]));
        va.extend(scaled::<F>(
            -1.0,
            &cmi_terms(&[AX_X1], &[AX_X2], &[AX_Y, AX_YF1, AX_YF2, AX_T1, AX_T2]),
        ));
        let viol_a = build(va);
        let mut vb = scaled::<F>(1.0, &cmi_terms(&[AX_X1], &[AX_X2], &[AX_T1]));
        vb.extend(scaled::<F>(
            -1.0,
            &cmi_terms(&[AX_X1, AX_YF1], &[AX_X2, AX_YF2], &[AX_T1, AX_Y]),
        ));
        let viol_b = build(vb);
        Ok(MacEvaluator { a1, a2, a3, a4, viol_a, viol_b, in_vars, n_theta })
    }

    fn dist_from(&self, theta: &[F]) -> Result<JointDist<F>> {
        JointDist::new(self.in_vars.clone(), theta.to_vec())
    }
}

/// What the penalized searches maximize.
#[derive(Clone, Copy)]
enum Target<F> {
    /// `min(a3, a4)`.
    SumRate,
    /// Pentagon support value in direction `mu`.
    Weighted(F),
}

struct PenalizedObjective<'a, F: Scalar> {
    eval: &'a MacEvaluator<F>,
    target: Target<F>,
    drop_6b: bool,
    penalty: F,
}

impl<F: Scalar> PenalizedObjective<'_, F> {
    fn penalty_part(&self, theta: &[F]) -> (F, Vec<F>) {
        let (va, ga) = self.eval.viol_a.value_and_grad(theta);
        let mut val = F::zero();
        let mut grad = vec![F::zero(); theta.len()];
        if va > F::zero() {
            val += va;
            for (g, &x) in grad.iter_mut().zip(&ga) {
                *g += x;
            }
        }
        if !self.drop_6b {
            let (vb, gb) = self.eval.viol_b.value_and_grad(theta);
            if vb > F::zero() {
                val += vb;
                for (g, &x) in grad.iter_mut().zip(&gb) {
                    *g += x;
                }
            }
        }
        (val, grad)
    }

    fn raw_value(&self, theta: &[F]) -> F {
        match self.target {
            Target::SumRate => self.eval.a3.value(theta).min(self.eval.a4.value(theta)),
            Target::Weighted(mu) => {
                let caps = RateCaps {
                    a1: self.eval.a1.value(theta),
                    a2: self.eval.a2.value(theta),
                    a3: self.eval.a3.value(theta),
                    a4: self.eval.a4.value(theta),
                };
                caps.weighted_best(mu).0
            }
        }
    }
}

impl<F: Scalar> Objective<F> for PenalizedObjective<'_, F> {
    fn value(&self, theta: &[F]) -> F {
        let (pv, _) = self.penalty_part(theta);
        self.raw_value(theta) - self.penalty * pv
    }

    fn value_and_grad(&self, theta: &[F]) -> (F, Vec<F>) {
        let (value, mut grad) = match self.target {
            Target::SumRate => {
                let (v3, g3) = self.eval.a3.value_and_grad(theta);
                let (v4, g4) = self.eval.a4.value_and_grad(theta);
                if v4 <= v3 {
                    (v4, g4)
                } else {
                    (v3, g3)
                }
            }
            Target::Weighted(mu) => {
                let (v1, g1) = self.eval.a1.value_and_grad(theta);
                let (v2, g2) = self.eval.a2.value_and_grad(theta);
                let (v3, g3) = self.eval.a3.value_and_grad(theta);
                let (v4, g4) = self.eval.a4.value_and_grad(theta);
                let (s, gs) = if v4 <= v3 { (v4, g4) } else { (v3, g3) };
                let s = s.max(F::zero());
                let one = F::one();
                let half = real::<F>(0.5);
                // active-case combination of the pentagon maximum
                let combine = |c1: F, cs: F, c2: F| -> Vec<F> {
                    g1.iter()
                        .zip(&gs)
                        .zip(&g2)
                        .map(|((&a, &b), &c)| c1 * a + cs * b + c2 * c)
                        .collect()
                };
                if mu >= half {
                    if v1 <= s {
                        let rem = s - v1;
                        if v2 <= rem {
                            (mu * v1 + (one - mu) * v2, combine(mu, F::zero(), one - mu))
                        } else {
                            (
                                (mu + mu - one) * v1 + (one - mu) * s,
                                combine(mu + mu - one, one - mu, F::zero()),
                            )
                        }
                    } else {
                        (mu * s, combine(F::zero(), mu, F::zero()))
                    }
                } else if v2 <= s {
                    let rem = s - v2;
                    if v1 <= rem {
                        (mu * v1 + (one - mu) * v2, combine(mu, F::zero(), one - mu))
                    } else {
                        (
                            mu * s + (one - mu - mu) * v2,
                            combine(F::zero(), mu, one - mu - mu),
                        )
                    }
                } else {
                    ((one - mu) * s, combine(F::zero(), one - mu, F::zero()))
                }
            }
        };
        let (pv, pg) = self.penalty_part(theta);
        for (g, &x) in grad.iter_mut().zip(&pg) {
            *g -= self.penalty * x;
        }
        (value - self.penalty * pv, grad)
    }
}

/// Feasible candidate input distributions for one search, exactly
/// evaluated downstream. Deterministic given the config.
fn candidate_thetas<F: Scalar>(
    eval: &MacEvaluator<F>,
    cfg: &OptimizerConfig,
    opts: &RegionOptions<F>,
    salt: usize,
) -> Vec<Vec<F>> {
    let n = eval.n_theta;
    let mut out = Vec::new();
    let uniform = vec![F::one() / real::<F>(n as f64); n];
    out.push(uniform);
    for w in &opts.warm_starts {
        if w.probs().len() == n {
            out.push(w.probs().to_vec());
        }
    }
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.master_seed, &[salt, r]));
        out.push(random_simplex_point::<F, _>(n, &mut rng));
    }
    out
}

fn penalty_schedule<F: Scalar>() -> [F; 3] {
    [real::<F>(16.0), real::<F>(256.0), real::<F>(4096.0)]
}

/// Maximize a target over feasible inputs: penalized multi-start ascent,
/// feasibility re-verified exactly; infeasible outcomes are discarded.
fn search_feasible<F: Scalar>(
    mac: &GenFeedbackMAC<F>,
    eval: &MacEvaluator<F>,
    target: Target<F>,
    cfg: &OptimizerConfig,
    opts: &RegionOptions<F>,
    salt: usize,
) -> Result<Option<(F, JointDist<F>, bool)>> {
    let feasible = |p: &JointDist<F>| -> Result<bool> {
        let s = constraints_ok(p, mac)?;
        Ok(if opts.drop_6b { s.slack_a >= -real::<F>(FEAS_TOL) } else { s.ok })
    };
    let exact_value = |p: &JointDist<F>| -> Result<F> {
        let caps = rate_caps(p, mac)?;
        Ok(match target {
            Target::SumRate => caps.sum_cap(),
            Target::Weighted(mu) => caps.weighted_best(mu).0,
        })
    };
    let mut best: Option<(F, JointDist<F>, bool)> = None;
    let mut consider = |p: JointDist<F>, converged: bool| -> Result<()> {
        if feasible(&p)? {
            let v = exact_value(&p)?;
            let better = match &best {
                None => true,
                Some((bv, _, _)) => v > *bv,
            };
            if better {
                best = Some((v, p, converged));
            }
        }
        Ok(())
    };
    for theta in candidate_thetas(eval, cfg, opts, salt) {
        // the raw candidate first, then the penalized ascent from it
        consider(eval.dist_from(&theta)?, true)?;
        let mut cur = theta;
        let mut converged = false;
        for pen in penalty_schedule::<F>() {
            let obj = PenalizedObjective { eval, target, drop_6b: opts.drop_6b, penalty: pen };
            let out = ascend(&obj, cur, &[0..eval.n_theta], &cfg.ascent_options());
            cur = out.theta;
            converged = out.converged;
        }
        consider(eval.dist_from(&cur)?, converged)?;
    }
    Ok(best)
}

/// Grid search over the full input simplex, feasibility-filtered.
fn grid_feasible_caps<F: Scalar>(
    mac: &GenFeedbackMAC<F>,
    eval: &MacEvaluator<F>,
    opts: &RegionOptions<F>,
    grid_res: usize,
) -> Result<Vec<(RateCaps<F>, JointDist<F>)>> {
    let steps = grid_res - 1;
    let n = eval.n_theta;
    if n_compositions(steps, n) > GRID_POINT_CAP {
        return Err(Error::SizeLimit(format!(
            "grid of {} points exceeds the {} cap",
            n_compositions(steps, n),
            GRID_POINT_CAP
        )));
    }
    let mut points: Vec<Vec<usize>> = Vec::new();
    for_each_composition(steps, n, &mut |p| points.push(p.to_vec()));
    let denom = real::<F>(steps as f64);
    type FeasiblePoint<F> = Option<(RateCaps<F>, JointDist<F>)>;
    let results: Result<Vec<FeasiblePoint<F>>> = points
        .par_iter()
        .map(|parts| {
            let theta: Vec<F> = parts.iter().map(|&a| real::<F>(a as f64) / denom).collect();
            let p = eval.dist_from(&theta)?;
            let s = constraints_ok(&p, mac)?;
            let ok = if opts.drop_6b { s.slack_a >= -real::<F>(FEAS_TOL) } else { s.ok };
            if !ok {
                return Ok(None);
            }
            Ok(Some((rate_caps(&p, mac)?, p)))
        })
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

/// Result of the sum-rate search.
#[derive(Clone, Debug)]
pub struct SumRateOutcome<F: Scalar> {
    pub value: F,
    pub witness: JointDist<F>,
    pub converged: bool,
}

/// `max min(I(X1X2;Y|T1), I(X1X2;Y,YF1,YF2|T1,T2))` over feasible inputs.
pub fn outer_sum_rate<F: Scalar>(
    mac: &GenFeedbackMAC<F>,
    cfg: &OptimizerConfig,
    opts: &RegionOptions<F>,
) -> Result<SumRateOutcome<F>> {
    cfg.validate()?;
    let eval = MacEvaluator::new(mac, cfg.card_t1, cfg.card_t2)?;
    if let Some(g) = cfg.grid_res {
        let pts = grid_feasible_caps(mac, &eval, opts, g)?;
        let mut best: Option<(F, JointDist<F>)> = None;
        for (caps, p) in pts {
            let v = caps.sum_cap();
            let better = match &best {
                None => true,
                Some((bv, _)) => v > *bv,
            };
            if better {
                best = Some((v, p));
            }
        }
        let (value, witness) = best.ok_or_else(|| {
            Error::Numerical("no feasible grid point; raise the resolution".into())
        })?;
        return Ok(SumRateOutcome { value, witness, converged: true });
    }
    let best = search_feasible(mac, &eval, Target::SumRate, cfg, opts, 0)?;
    let (value, witness, converged) =
        best.ok_or_else(|| Error::Numerical("no feasible candidate found".into()))?;
    Ok(SumRateOutcome { value, witness, converged })
}

/// Computed outer region: hull vertices, sum-rate cap, and the input
/// distributions that achieved each swept direction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OuterRegion {
    /// Counterclockwise hull from (0, max R2) around to (max R1, 0),
    /// including the origin; downward-closed and convex by construction.
    pub vertices: Vec<(f64, f64)>,
    pub sum_rate_max: f64,
    pub drop_6b: bool,
    pub witnesses: Vec<DistJson>,
}

impl OuterRegion {
    /// Point-in-region test with additive tolerance.
    pub fn contains(&self, r1: f64, r2: f64, tol: f64) -> bool {
        if r1 < -tol || r2 < -tol {
            return false;
        }
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        if n == 1 {
            return r1 <= self.vertices[0].0 + tol && r2 <= self.vertices[0].1 + tol;
        }
        for i in 0..n {
            let (ax, ay) = self.vertices[i];
            let (bx, by) = self.vertices[(i + 1) % n];
            let cross = (bx - ax) * (r2 - ay) - (by - ay) * (r1 - ax);
            if cross < -tol {
                return false;
            }
        }
        true
    }

    /// CSV rendering of the vertex list (`r1,r2` per line, full precision).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r1,r2\n");
        for (a, b) in &self.vertices {
            s.push_str(&format!("{},{}\n", a, b));
        }
        s
    }
}

/// Number of scalarization directions swept by [`outer_region`].
pub const REGION_DIRECTIONS: usize = 33;

/// Sweep weighted-rate directions, maximize each over feasible inputs, and
/// assemble the downward-closed convex hull.
pub fn outer_region<F: Scalar>(
    mac: &GenFeedbackMAC<F>,
    cfg: &OptimizerConfig,
    opts: &RegionOptions<F>,
) -> Result<OuterRegion> {
    cfg.validate()?;
    let eval = MacEvaluator::new(mac, cfg.card_t1, cfg.card_t2)?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut witnesses: Vec<DistJson> = Vec::new();

    // pentagon points of feasible warm starts belong to the region and are
    // added to the hull directly, so a region computed from another run's
    // witnesses always contains that run's vertices
    let mut warm_caps: Vec<RateCaps<F>> = Vec::new();
    for w in &opts.warm_starts {
        let slacks = constraints_ok(w, mac)?;
        let ok = if opts.drop_6b { slacks.slack_a >= -real::<F>(FEAS_TOL) } else { slacks.ok };
        if ok {
            warm_caps.push(rate_caps(w, mac)?);
        }
    }

    if let Some(g) = cfg.grid_res {
        let pts = grid_feasible_caps(mac, &eval, opts, g)?;
        if pts.is_empty() {
            return Err(Error::Numerical("no feasible grid point; raise the resolution".into()));
        }
        for dir in 0..REGION_DIRECTIONS {
            let mu = real::<F>(dir as f64 / (REGION_DIRECTIONS - 1) as f64);
            let mut best = 0usize;
            let mut best_v = F::neg_infinity();
            for (i, (caps, _)) in pts.iter().enumerate() {
                let v = caps.weighted_best(mu).0;
                if v > best_v {
                    best_v = v;
                    best = i;
                }
            }
            let (caps, p) = &pts[best];
            let (_, (r1, r2)) = caps.weighted_best(mu);
            points.push((as_f64(r1), as_f64(r2)));
            witnesses.push(dist_to_json(p));
            for caps in &warm_caps {
                let (_, (r1, r2)) = caps.weighted_best(mu);
                points.push((as_f64(r1), as_f64(r2)));
            }
        }
    } else {
        for dir in 0..REGION_DIRECTIONS {
            let mu = real::<F>(dir as f64 / (REGION_DIRECTIONS - 1) as f64);
            let best = search_feasible(mac, &eval, Target::Weighted(mu), cfg, opts, dir + 1)?;
            let (_, witness, _) = best
                .ok_or_else(|| Error::Numerical("no feasible candidate found".into()))?;
            let caps = rate_caps(&witness, mac)?;
            let (_, (r1, r2)) = caps.weighted_best(mu);
            points.push((as_f64(r1), as_f64(r2)));
            witnesses.push(dist_to_json(&witness));
            for caps in &warm_caps {
                let (_, (r1, r2)) = caps.weighted_best(mu);
                points.push((as_f64(r1), as_f64(r2)));
            }
        }
    }

    let sum = outer_sum_rate(mac, cfg, opts)?;
    let vertices = downward_closed_hull(&points);
    Ok(OuterRegion {
        vertices,
        sum_rate_max: as_f64(sum.value),
        drop_6b: opts.drop_6b,
        witnesses,
    })
}

/// Convex hull (counterclockwise) of the swept points together with their
/// axis projections and the origin.
fn downward_closed_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut cand: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut max_r1 = 0.0f64;
    let mut max_r2 = 0.0f64;
    for &(a, b) in points {
        let a = a.max(0.0);
        let b = b.max(0.0);
        cand.push((a, b));
        max_r1 = max_r1.max(a);
        max_r2 = max_r2.max(b);
    }
    cand.push((max_r1, 0.0));
    cand.push((0.0, max_r2));
    cand.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    cand.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if cand.len() <= 2 {
        return cand;
    }
    // Andrew monotone chain
    let cross =
        |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &cand {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in cand.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Sides of the per-letter sum-rate chain for a simulated feedback code:
/// `I(W_[k]; Z^n) <= sum_j I(X_[k]j; Z_j | Z^{j-1})`, with the receiver
/// output living in the trace's `Z` slot.
pub fn sum_rate_chain_sides<F: Scalar>(trace: &TraceDist<F>) -> Result<(F, F)> {
    let d = trace.dist();
    let k = trace.k();
    let n = trace.n();
    let w_all: Vec<String> = (0..k).map(crate::dbbound::w_name).collect();
    let z_all: Vec<String> = (0..n).map(crate::dbbound::z_name).collect();
    let lhs = {
        let mut rel = w_all.clone();
        rel.extend(z_all.iter().cloned());
        let dm = d.marginal(&rel)?;
        dm.cond_mutual_info(&w_all, &z_all, &[] as &[&str])?
    };
    let mut rhs = F::zero();
    for j in 0..n {
        let x_j: Vec<String> = (0..k).map(|i| crate::dbbound::x_name(i, j)).collect();
        let z_j = vec![crate::dbbound::z_name(j)];
        let z_past: Vec<String> = (0..j).map(crate::dbbound::z_name).collect();
        let mut rel = x_j.clone();
        rel.extend(z_j.iter().cloned());
        rel.extend(z_past.iter().cloned());
        let dm = d.marginal(&rel)?;
        rhs += dm.cond_mutual_info(&x_j, &z_j, &z_past)?;
    }
    Ok((lhs, rhs))
}
