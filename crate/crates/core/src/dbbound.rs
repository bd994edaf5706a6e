//! Exact simulation of interactive codes over memoryless wiretap channels,
//! and the per-letter dependence-balance inequality for `I_lambda`.
//!
//! A code runs for `n` steps. At step `j`, terminal `i` transmits
//! `X_ij = f_ij(W_i, Y_i^{j-1})` — a deterministic function of its private
//! randomness and its own past channel outputs — over whichever channel the
//! schedule selects. The simulator materializes the exact joint distribution
//! of `(W, X, Y, Z[, T])` by forward recursion, one dense push per stage, so
//! every inequality downstream can be checked without sampling.
//!
//! Encoders are explicit lookup tables rather than closures: a code spec is
//! serializable and a trace is replayable.

use crate::dist::{Channel, JointDist, VarSpec, MAX_CELLS};
use crate::error::{Error, Result};
use crate::fracpart::FractionalPartition;
use crate::lambda_mi::{i_lambda, Group};
use crate::scalar::Scalar;

/// Which channel a step uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelRef {
    Main,
    Parallel(usize),
}

/// The main wiretap channel plus optional parallel channels.
///
/// Every channel maps inputs `X1..Xk` to outputs `Y1..Yk, Z` (exact names;
/// cardinalities may differ between channels).
#[derive(Clone, Debug)]
pub struct ChannelSet<F: Scalar> {
    main: Channel<F>,
    parallels: Vec<Channel<F>>,
    k: usize,
}

pub(crate) fn check_wiretap_names<F: Scalar>(ch: &Channel<F>) -> Result<usize> {
    let k = ch.in_vars().len();
    if k == 0 || ch.out_vars().len() != k + 1 {
        return Err(Error::InvalidInput(
            "wiretap channel needs inputs X1..Xk and outputs Y1..Yk, Z".into(),
        ));
    }
    for (i, v) in ch.in_vars().iter().enumerate() {
        if v.name != format!("X{}", i + 1) {
            return Err(Error::InvalidInput(format!(
                "input {} must be named X{}, found `{}`",
                i,
                i + 1,
                v.name
            )));
        }
    }
    for (i, v) in ch.out_vars().iter().take(k).enumerate() {
        if v.name != format!("Y{}", i + 1) {
            return Err(Error::InvalidInput(format!(
                "output {} must be named Y{}, found `{}`",
                i,
                i + 1,
                v.name
            )));
        }
    }
    if ch.out_vars()[k].name != "Z" {
        return Err(Error::InvalidInput("last output must be named Z".into()));
    }
    Ok(k)
}

impl<F: Scalar> ChannelSet<F> {
    pub fn new(main: Channel<F>, parallels: Vec<Channel<F>>) -> Result<Self> {
        let k = check_wiretap_names(&main)?;
        for p in &parallels {
            if check_wiretap_names(p)? != k {
                return Err(Error::InvalidInput(
                    "all channels must serve the same number of terminals".into(),
                ));
            }
        }
        Ok(ChannelSet { main, parallels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn main(&self) -> &Channel<F> {
        &self.main
    }

    pub fn parallels(&self) -> &[Channel<F>] {
        &self.parallels
    }

    pub fn resolve(&self, r: ChannelRef) -> Result<&Channel<F>> {
        match r {
            ChannelRef::Main => Ok(&self.main),
            ChannelRef::Parallel(i) => self.parallels.get(i).ok_or_else(|| {
                Error::InvalidInput(format!("schedule references parallel channel {}", i))
            }),
        }
    }
}

/// Encoder lookup table for one (terminal, step) pair.
///
/// `outputs[w * hist_len + hist]` is the transmitted symbol, where `hist`
/// indexes the terminal's own past outputs row-major (step 1 slowest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderTable {
    pub outputs: Vec<usize>,
}

/// A length-`n` interactive code for `k` terminals.
#[derive(Clone, Debug)]
pub struct InteractiveCode<F: Scalar> {
    k: usize,
    n: usize,
    w_dists: Vec<Vec<F>>,
    encoders: Vec<Vec<EncoderTable>>,
    schedule: Vec<ChannelRef>,
}

impl<F: Scalar> InteractiveCode<F> {
    /// `w_dists[i]` is the distribution of terminal i's private randomness;
    /// marginals are multiplied together, so the `W_i` are independent by
    /// construction. `encoders[i][j]` encodes step `j` at terminal `i`.
    pub fn new(
        k: usize,
        n: usize,
        w_dists: Vec<Vec<F>>,
        encoders: Vec<Vec<EncoderTable>>,
        schedule: Vec<ChannelRef>,
    ) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidInput("need k >= 1 terminals and n >= 1 steps".into()));
        }
        if w_dists.len() != k || encoders.len() != k {
            return Err(Error::InvalidInput(
                "need one randomness distribution and one encoder row per terminal".into(),
            ));
        }
        if encoders.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("need one encoder per terminal per step".into()));
        }
        if schedule.len() != n {
            return Err(Error::InvalidInput("schedule length must equal n".into()));
        }
        Ok(InteractiveCode { k, n, w_dists, encoders, schedule })
    }

    /// Convenience constructor with uniform private randomness.
    pub fn with_uniform_w(
        k: usize,
        n: usize,
        w_cards: &[usize],
        encoders: Vec<Vec<EncoderTable>>,
        schedule: Vec<ChannelRef>,
    ) -> Result<Self> {
        if w_cards.len() != k || w_cards.contains(&0) {
            return Err(Error::InvalidInput("need a positive W alphabet per terminal".into()));
        }
        let w_dists = w_cards
            .iter()
            .map(|&c| {
                let p = F::one() / crate::scalar::real::<F>(c as f64);
                vec![p; c]
            })
            .collect();
        InteractiveCode::new(k, n, w_dists, encoders, schedule)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w_dists(&self) -> &[Vec<F>] {
        &self.w_dists
    }

    pub fn encoders(&self) -> &[Vec<EncoderTable>] {
        &self.encoders
    }

    pub fn schedule(&self) -> &[ChannelRef] {
        &self.schedule
    }
}

/// Variable names used inside traces (1-based display indices).
pub fn w_name(i: usize) -> String {
    format!("W{}", i + 1)
}
pub fn x_name(i: usize, j: usize) -> String {
    format!("X{}_{}", i + 1, j + 1)
}
pub fn y_name(i: usize, j: usize) -> String {
    format!("Y{}_{}", i + 1, j + 1)
}
pub fn z_name(j: usize) -> String {
    format!("Z{}", j + 1)
}
pub fn t_name(j: usize) -> String {
    format!("T{}", j + 1)
}

/// The exact joint distribution of a simulated code run.
#[derive(Clone, Debug)]
pub struct TraceDist<F: Scalar> {
    dist: JointDist<F>,
    k: usize,
    n: usize,
    has_aux: bool,
}

impl<F: Scalar> TraceDist<F> {
    pub fn dist(&self) -> &JointDist<F> {
        &self.dist
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_aux(&self) -> bool {
        self.has_aux
    }

    /// Per-terminal groups `(W_i, Y_i^n)`.
    pub fn wy_groups(&self) -> Vec<Group> {
        (0..self.k)
            .map(|i| {
                let mut g = vec![w_name(i)];
                g.extend((0..self.n).map(|j| y_name(i, j)));
                g
            })
            .collect()
    }

    /// Per-terminal singleton groups `(W_i)`.
    pub fn w_groups(&self) -> Vec<Group> {
        (0..self.k).map(|i| vec![w_name(i)]).collect()
    }

    /// Per-terminal groups `(X_ij, Y_ij)` for step `j` (0-based).
    pub fn xy_groups(&self, j: usize) -> Vec<Group> {
        (0..self.k).map(|i| vec![x_name(i, j), y_name(i, j)]).collect()
    }

    /// Per-terminal singleton groups `(X_ij)` for step `j`.
    pub fn x_groups(&self, j: usize) -> Vec<Group> {
        (0..self.k).map(|i| vec![x_name(i, j)]).collect()
    }

    fn cond_names(&self, cond: Conditioning, upto: usize) -> Vec<String> {
        (0..upto)
            .map(|j| match cond {
                Conditioning::Eavesdropper => z_name(j),
                Conditioning::AuxReceiver => t_name(j),
            })
            .collect()
    }

    /// Per-step conditional MI between the step outputs and the whole past
    /// given the step inputs; all values are ~0 for a memoryless channel.
    pub fn check_memoryless(&self) -> Result<Vec<F>> {
        let mut out = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let mut outs: Vec<String> = (0..self.k).map(|i| y_name(i, j)).collect();
            outs.push(z_name(j));
            if self.has_aux {
                outs.push(t_name(j));
            }
            let inputs: Vec<String> = (0..self.k).map(|i| x_name(i, j)).collect();
            let mut past: Vec<String> = (0..self.k).map(w_name).collect();
            for jp in 0..j {
                for i in 0..self.k {
                    past.push(y_name(i, jp));
                }
                past.push(z_name(jp));
                if self.has_aux {
                    past.push(t_name(jp));
                }
            }
            let mut relevant = outs.clone();
            relevant.extend(inputs.iter().cloned());
            relevant.extend(past.iter().cloned());
            let dm = self.dist.marginal(&relevant)?;
            out.push(dm.cond_mutual_info(&outs, &past, &inputs)?);
        }
        Ok(out)
    }
}

/// Which process the dependence-balance sides condition on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    /// The eavesdropper outputs `Z^n`.
    Eavesdropper,
    /// The auxiliary-receiver outputs `T^n` (trace must carry them).
    AuxReceiver,
}

/// Both sides of the dependence-balance inequality, with components.
#[derive(Clone, Debug)]
pub struct BalanceSides<F> {
    /// `I_lambda(W_1 Y_1^n; ...; W_k Y_k^n | C^n) - I_lambda(W_1; ...; W_k)`.
    pub lhs: F,
    /// Sum of the per-step differences.
    pub rhs: F,
    /// The subtracted `I_lambda(W_1; ...; W_k)` term; ~0 for independent W.
    pub w_term: F,
    /// Per-step `(conditional step term, unconditional step term)`.
    pub per_step: Vec<(F, F)>,
}

/// Evaluate the end-to-end and per-letter sides; `lhs <= rhs` up to float
/// noise for every code the simulator can produce.
pub fn dependence_balance_sides<F: Scalar>(
    trace: &TraceDist<F>,
    fp: &FractionalPartition<F>,
    cond: Conditioning,
) -> Result<BalanceSides<F>> {
    if cond == Conditioning::AuxReceiver && !trace.has_aux() {
        return Err(Error::InvalidInput(
            "trace carries no auxiliary-receiver outputs".into(),
        ));
    }
    let d = trace.dist();
    let full_cond = trace.cond_names(cond, trace.n());
    let end_to_end = i_lambda(d, &trace.wy_groups(), fp, &full_cond)?;
    let w_term = i_lambda(d, &trace.w_groups(), fp, &[])?;
    let lhs = end_to_end - w_term;

    let mut rhs = F::zero();
    let mut per_step = Vec::with_capacity(trace.n());
    for j in 0..trace.n() {
        let with_step = i_lambda(d, &trace.xy_groups(j), fp, &trace.cond_names(cond, j + 1))?;
        let without = i_lambda(d, &trace.x_groups(j), fp, &trace.cond_names(cond, j))?;
        rhs += with_step - without;
        per_step.push((with_step, without));
    }
    Ok(BalanceSides { lhs, rhs, w_term, per_step })
}

/// Run the code exactly and return the full trace distribution.
///
/// If `aux` is given it must consume `(X1..Xk, Y1..Yk, Z)` and emit `T`;
/// its per-step outputs are appended to the trace.
pub fn simulate_code<F: Scalar>(
    code: &InteractiveCode<F>,
    channels: &ChannelSet<F>,
    aux: Option<&Channel<F>>,
) -> Result<TraceDist<F>> {
    let k = code.k();
    let n = code.n();
    if channels.k() != k {
        return Err(Error::InvalidInput(format!(
            "code has {} terminals but the channels serve {}",
            k,
            channels.k()
        )));
    }
    // per-step alphabets according to the schedule
    let mut x_cards = vec![vec![0usize; k]; n];
    let mut y_cards = vec![vec![0usize; k]; n];
    let mut z_cards = vec![0usize; n];
    let mut t_cards = vec![1usize; n];
    for j in 0..n {
        let ch = channels.resolve(code.schedule()[j])?;
        for i in 0..k {
            x_cards[j][i] = ch.in_vars()[i].card;
            y_cards[j][i] = ch.out_vars()[i].card;
        }
        z_cards[j] = ch.out_vars()[k].card;
        if let Some(a) = aux {
            validate_aux_shape(a, ch)?;
            t_cards[j] = a.out_vars()[0].card;
        }
    }
    // encoder tables must cover (w, history) and emit channel symbols
    for i in 0..k {
        let w_card = code.w_dists()[i].len();
        for j in 0..n {
            let hist_len: usize = (0..j).map(|jp| y_cards[jp][i]).product();
            let table = &code.encoders()[i][j].outputs;
            if table.len() != w_card * hist_len {
                return Err(Error::InvalidInput(format!(
                    "encoder table for terminal {} step {} has {} rows, expected {}",
                    i + 1,
                    j + 1,
                    table.len(),
                    w_card * hist_len
                )));
            }
            if table.iter().any(|&x| x >= x_cards[j][i]) {
                return Err(Error::InvalidInput(format!(
                    "encoder for terminal {} step {} emits a symbol outside the channel alphabet",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    // predicted trace size
    let mut cells: u128 = code.w_dists().iter().map(|d| d.len() as u128).product();
    for j in 0..n {
        for i in 0..k {
            cells *= x_cards[j][i] as u128 * y_cards[j][i] as u128;
        }
        cells *= z_cards[j] as u128 * t_cards[j] as u128;
    }
    if cells > MAX_CELLS as u128 {
        return Err(Error::StateSpaceTooLarge { cells, cap: MAX_CELLS });
    }

    // W product
    let mut trace: Option<JointDist<F>> = None;
    for (i, w) in code.w_dists().iter().enumerate() {
        let d = JointDist::new(vec![VarSpec::new(w_name(i), w.len())], w.clone())?;
        trace = Some(match trace {
            None => d,
            Some(t) => t.tensor_product(&d)?,
        });
    }
    let mut trace = trace.expect("k >= 1");

    for j in 0..n {
        let ch = channels.resolve(code.schedule()[j])?;
        // encoders: X_ij = f_ij(W_i, Y_i^{j-1})
        for i in 0..k {
            let mut in_vars = vec![VarSpec::new(w_name(i), code.w_dists()[i].len())];
            for jp in 0..j {
                in_vars.push(VarSpec::new(y_name(i, jp), y_cards[jp][i]));
            }
            let enc = Channel::deterministic(
                in_vars,
                vec![VarSpec::new(x_name(i, j), x_cards[j][i])],
                &code.encoders()[i][j].outputs,
            )?;
            trace = trace.push_through(&enc)?;
        }
        // the scheduled channel, renamed to this step
        let mut renames: Vec<(String, String)> = Vec::new();
        for i in 0..k {
            renames.push((format!("X{}", i + 1), x_name(i, j)));
            renames.push((format!("Y{}", i + 1), y_name(i, j)));
        }
        renames.push(("Z".to_string(), z_name(j)));
        let pairs: Vec<(&str, &str)> =
            renames.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        trace = trace.push_through(&ch.renamed(&pairs)?)?;
        // auxiliary receiver observes (X, Y, Z) of this step
        if let Some(a) = aux {
            let mut arn = renames.clone();
            arn.push(("T".to_string(), t_name(j)));
            let pairs: Vec<(&str, &str)> =
                arn.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
            trace = trace.push_through(&a.renamed(&pairs)?)?;
        }
    }
    Ok(TraceDist { dist: trace, k, n, has_aux: aux.is_some() })
}

pub(crate) fn validate_aux_shape<F: Scalar>(aux: &Channel<F>, ch: &Channel<F>) -> Result<()> {
    let k = ch.in_vars().len();
    if aux.out_vars().len() != 1 || aux.out_vars()[0].name != "T" {
        return Err(Error::InvalidInput(
            "auxiliary receiver must emit a single output named T".into(),
        ));
    }
    if aux.in_vars().len() != 2 * k + 1 {
        return Err(Error::InvalidInput(
            "auxiliary receiver must consume X1..Xk, Y1..Yk, Z".into(),
        ));
    }
    let expected: Vec<VarSpec> = ch
        .in_vars()
        .iter()
        .chain(ch.out_vars().iter())
        .cloned()
        .collect();
    for (have, want) in aux.in_vars().iter().zip(expected.iter()) {
        if have != want {
            return Err(Error::InvalidInput(format!(
                "auxiliary receiver input `{}`({}) does not match channel variable `{}`({})",
                have.name, have.card, want.name, want.card
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::VarSpec;
    use crate::keybound::t_equals_z;

    type C = Channel<f64>;

    fn bit(name: &str) -> VarSpec {
        VarSpec::new(name, 2)
    }

    /// k=2 channel: Y2 = X1 through a BSC(p), Y1 = X2 noiseless, Z = X1.
    fn crossover_channel(p: f64) -> C {
        let in_vars = vec![bit("X1"), bit("X2")];
        let out_vars = vec![bit("Y1"), bit("Y2"), bit("Z")];
        let mut probs = vec![0.0; 4 * 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                for y2 in 0..2usize {
                    let w = if y2 == x1 { 1.0 - p } else { p };
                    let y1 = x2;
                    let z = x1;
                    probs[(x1 * 2 + x2) * 8 + y1 * 4 + y2 * 2 + z] = w;
                }
            }
        }
        C::new(in_vars, out_vars, probs).unwrap()
    }

    fn send_w_code(n: usize) -> InteractiveCode<f64> {
        // X_1j = W_1, X_2j = W_2 at every step
        let enc = |hist: usize| EncoderTable {
            outputs: (0..2 * hist).map(|r| r / hist).collect(),
        };
        let mut encs = vec![Vec::new(), Vec::new()];
        for row in encs.iter_mut() {
            let mut hist = 1usize;
            for _ in 0..n {
                row.push(enc(hist));
                hist *= 2;
            }
        }
        InteractiveCode::with_uniform_w(2, n, &[2, 2], encs, vec![ChannelRef::Main; n]).unwrap()
    }

    #[test]
    fn copy_chain_one_step() {
        // noiseless: Y2 = X1 = W1, so H(Y2_1) = 1 and H(Y2_1 | W1) = 0
        let cs = ChannelSet::new(crossover_channel(0.0), vec![]).unwrap();
        let code = send_w_code(1);
        let trace = simulate_code(&code, &cs, None).unwrap();
        let d = trace.dist();
        assert!((d.entropy(&["Y2_1"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(d.cond_entropy(&["Y2_1"], &["W1"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constant_encoders_decouple_from_w() {
        let cs = ChannelSet::new(crossover_channel(0.3), vec![]).unwrap();
        let zero = EncoderTable { outputs: vec![0, 0] };
        let code = InteractiveCode::with_uniform_w(
            2,
            1,
            &[2, 2],
            vec![vec![zero.clone()], vec![zero]],
            vec![ChannelRef::Main],
        )
        .unwrap();
        let trace = simulate_code(&code, &cs, None).unwrap();
        let d = trace.dist();
        for v in ["X1_1", "X2_1", "Y1_1", "Y2_1", "Z1"] {
            let i = d.cond_mutual_info(&[v], &["W1", "W2"], &[] as &[&str]).unwrap();
            assert!(i.abs() < 1e-12, "{} depends on W", v);
        }
    }

    #[test]
    fn feedback_code_matches_outcome_tree_oracle() {
        // n=2: step-1 sends W; step 2 terminal 1 sends W1 XOR Y1_1
        let p = 0.2;
        let cs = ChannelSet::new(crossover_channel(p), vec![]).unwrap();
        let id2 = EncoderTable { outputs: vec![0, 1] };
        let t1_step2 = EncoderTable {
            // rows are (w1, y11): w XOR y
            outputs: vec![0, 1, 1, 0],
        };
        let t2_step2 = EncoderTable {
            // ignores history: sends w2
            outputs: vec![0, 0, 1, 1],
        };
        let code = InteractiveCode::with_uniform_w(
            2,
            2,
            &[2, 2],
            vec![vec![id2.clone(), t1_step2], vec![id2, t2_step2]],
            vec![ChannelRef::Main; 2],
        )
        .unwrap();
        let trace = simulate_code(&code, &cs, None).unwrap();
        let d = trace.dist();

        // oracle: enumerate (w1, w2, y2 noise per step) outcomes
        let names: Vec<String> = d.vars().iter().map(|v| v.name.clone()).collect();
        let mut oracle = std::collections::BTreeMap::<Vec<usize>, f64>::new();
        for w1 in 0..2usize {
            for w2 in 0..2usize {
                for f1 in 0..2usize {
                    // step 1: x1=w1, x2=w2; y1=x2, y2=x1^f1, z=x1
                    let (x11, x21) = (w1, w2);
                    let (y11, y21, z1) = (x21, x11 ^ f1, x11);
                    let p1 = 0.25 * if f1 == 1 { p } else { 1.0 - p };
                    for f2 in 0..2usize {
                        let (x12, x22) = (w1 ^ y11, w2);
                        let (y12, y22, z2) = (x22, x12 ^ f2, x12);
                        let p2 = if f2 == 1 { p } else { 1.0 - p };
                        let key = vec![w1, w2, x11, x21, y11, y21, z1, x12, x22, y12, y22, z2];
                        *oracle.entry(key).or_insert(0.0) += p1 * p2;
                    }
                }
            }
        }
        // compare cell by cell
        let mut idx = std::collections::BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            idx.insert(n.clone(), i);
        }
        let order = [
            "W1", "W2", "X1_1", "X2_1", "Y1_1", "Y2_1", "Z1", "X1_2", "X2_2", "Y1_2", "Y2_2",
            "Z2",
        ];
        let probs = d.probs();
        let mut total_checked = 0.0;
        for (key, &pv) in &oracle {
            // map oracle key (in `order`) onto the trace's variable order
            let mut multi = vec![0usize; names.len()];
            for (pos, name) in order.iter().enumerate() {
                multi[idx[*name]] = key[pos];
            }
            let mut cell = 0usize;
            let mut stride = 1usize;
            for a in (0..names.len()).rev() {
                cell += multi[a] * stride;
                stride *= d.vars()[a].card;
            }
            assert!((probs[cell] - pv).abs() < 1e-12);
            total_checked += pv;
        }
        assert!((total_checked - 1.0).abs() < 1e-12);
    }

    #[test]
    fn memorylessness_holds_on_feedback_trace() {
        let cs = ChannelSet::new(crossover_channel(0.25), vec![]).unwrap();
        let code = send_w_code(2);
        let trace = simulate_code(&code, &cs, None).unwrap();
        for v in trace.check_memoryless().unwrap() {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn balance_holds_with_both_conditionings() {
        let cs = ChannelSet::new(crossover_channel(0.2), vec![]).unwrap();
        let aux = t_equals_z(cs.main()).unwrap();
        let id2 = EncoderTable { outputs: vec![0, 1] };
        let fb = EncoderTable { outputs: vec![0, 1, 1, 0] };
        let code = InteractiveCode::with_uniform_w(
            2,
            2,
            &[2, 2],
            vec![vec![id2.clone(), fb.clone()], vec![id2, fb]],
            vec![ChannelRef::Main; 2],
        )
        .unwrap();
        let trace = simulate_code(&code, &cs, Some(&aux)).unwrap();
        let fp = FractionalPartition::uniform_km1(2).unwrap();
        for cond in [Conditioning::Eavesdropper, Conditioning::AuxReceiver] {
            let sides = dependence_balance_sides(&trace, &fp, cond).unwrap();
            assert!(
                sides.lhs <= sides.rhs + 1e-9,
                "{:?}: lhs {} > rhs {}",
                cond,
                sides.lhs,
                sides.rhs
            );
            assert!(sides.w_term.abs() < 1e-9);
        }
    }

    #[test]
    fn independent_outputs_give_zero_lhs() {
        // constant encoders: nothing depends on W, lhs collapses to 0
        let cs = ChannelSet::new(crossover_channel(0.5), vec![]).unwrap();
        let zero = EncoderTable { outputs: vec![0, 0] };
        let code = InteractiveCode::with_uniform_w(
            2,
            1,
            &[2, 2],
            vec![vec![zero.clone()], vec![zero]],
            vec![ChannelRef::Main],
        )
        .unwrap();
        let trace = simulate_code(&code, &cs, None).unwrap();
        let fp = FractionalPartition::uniform_km1(2).unwrap();
        let sides =
            dependence_balance_sides(&trace, &fp, Conditioning::Eavesdropper).unwrap();
        assert!(sides.lhs.abs() < 1e-9);
        assert!(sides.rhs >= -1e-9);
    }

    #[test]
    fn schedule_can_mix_channels() {
        let cs = ChannelSet::new(crossover_channel(0.1), vec![crossover_channel(0.4)]).unwrap();
        let code = InteractiveCode::with_uniform_w(
            2,
            2,
            &[2, 2],
            vec![
                vec![
                    EncoderTable { outputs: vec![0, 1] },
                    EncoderTable { outputs: vec![0, 1, 0, 1] },
                ],
                vec![
                    EncoderTable { outputs: vec![0, 1] },
                    EncoderTable { outputs: vec![0, 1, 0, 1] },
                ],
            ],
            vec![ChannelRef::Main, ChannelRef::Parallel(0)],
        )
        .unwrap();
        let trace = simulate_code(&code, &cs, None).unwrap();
        assert_eq!(trace.dist().vars().len(), 2 + 2 * (2 + 2) + 2);
        for v in trace.check_memoryless().unwrap() {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn oversized_code_rejected() {
        let big = ChannelSet::new(crossover_channel(0.1), vec![]).unwrap();
        let mut encs = vec![Vec::new(), Vec::new()];
        for row in encs.iter_mut() {
            let mut hist = 1usize;
            for _ in 0..13 {
                row.push(EncoderTable {
                    outputs: (0..64 * hist).map(|r| (r / hist) % 2).collect(),
                });
                hist *= 2;
            }
        }
        let code = InteractiveCode::with_uniform_w(
            2,
            13,
            &[64, 64],
            encs,
            vec![ChannelRef::Main; 13],
        )
        .unwrap();
        assert!(matches!(
            simulate_code(&code, &big, None),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn bad_encoder_shape_rejected() {
        let cs = ChannelSet::new(crossover_channel(0.1), vec![]).unwrap();
        let code = InteractiveCode::with_uniform_w(
            2,
            1,
            &[2, 2],
            vec![
                vec![EncoderTable { outputs: vec![0] }], // too short
                vec![EncoderTable { outputs: vec![0, 1] }],
            ],
            vec![ChannelRef::Main],
        )
        .unwrap();
        assert!(simulate_code(&code, &cs, None).is_err());
    }
}
