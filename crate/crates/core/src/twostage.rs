//! Augmentation solver for two-stage programs
//! `max c.x  s.t.  A_i x0 + B_i x_i = b_i, l <= x <= u`.
//!
//! An augmenting step is a cycle `y` (kernel vector of the block matrix) and a
//! multiplier `λ` with `z + λ y` feasible. For a fixed head `y0` the tails
//! decouple: block `i` solves `max c_i.ȳ  s.t.  B_i ȳ = -A_i y0` over the box
//! shifted by `z` and scaled by `λ`. Heads are enumerated up to a one-norm cap.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::blockip::{solve_small_ip_with_budget, IpOutcome, DEFAULT_MAX_STATES};
use crate::bounds::{big, checked_pow, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::instance::TwoStageInstance;
use crate::types::{IntMatrix, IntVector};

pub const DEFAULT_MAX_HEADS: usize = 2_000_000;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// How the cap `L` on the head one-norm is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadCap {
    /// Start at 1 and double while a larger cap finds a strictly better step.
    /// Optimality is only claimed once the cap covers the whole head box.
    Adaptive,
    /// Fixed cap; exhausting it is reported as optimal.
    Exact(u64),
    /// Fixed cap from [`two_stage_graver_bound`], clipped to the head box.
    TheoremBound,
}

/// Multipliers tried at every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// 1, 2, 4, ... up to the widest variable range.
    Doubling,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub head_cap: HeadCap,
    pub step_policy: StepPolicy,
    pub max_iterations: usize,
    /// Worker threads for head evaluation; 0 uses the global pool.
    pub parallel_width: usize,
    pub max_heads: usize,
    pub max_states: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            head_cap: HeadCap::Adaptive,
            step_policy: StepPolicy::Doubling,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            parallel_width: 0,
            max_heads: DEFAULT_MAX_HEADS,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl SolverConfig {
    pub fn exact(cap: u64) -> Self {
        SolverConfig { head_cap: HeadCap::Exact(cap), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub head: IntVector,
    pub tails: Vec<IntVector>,
    pub lambda: i64,
    /// `λ c.y`.
    pub gain: i64,
}

impl Cycle {
    /// The full kernel vector `(y0, y1, ..., yn)`.
    pub fn vector(&self) -> IntVector {
        self.head.iter().chain(self.tails.iter().flat_map(|t| t.iter())).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmentation {
    pub cycle: IntVector,
    pub head: IntVector,
    pub lambda: i64,
    pub gain: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    BudgetStopped,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::BudgetStopped => "budget-stopped",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Feasible whenever the status is not `Infeasible`, except when phase 1
    /// ran out of budget.
    pub solution: Option<IntVector>,
    pub objective_value: Option<i64>,
    pub initial_value: Option<i64>,
    pub iterations: usize,
    pub phase_one_iterations: usize,
    pub augmentations: Vec<Augmentation>,
    pub final_head_cap: u64,
}

/// `(rsΔ)^{rs (2rΔ+1)^{rs²}}`, the head norm bound with unit constants.
pub fn two_stage_graver_bound(r: u64, s: u64, delta: u64) -> Result<BigUint> {
    let inner = checked_pow(&big(2 * r * delta + 1), &big(r * s * s), DEFAULT_MAX_BITS)?;
    checked_pow(&big(r * s * delta), &(big(r * s) * inner), DEFAULT_MAX_BITS)
}

/// Best step for a fixed multiplier over heads with `|y0|_1 <= head_cap`.
/// `None` when no cycle has positive gain.
pub fn best_cycle(inst: &TwoStageInstance, z: &[i64], lambda: i64, head_cap: u64) -> Result<Option<Cycle>> {
    best_cycle_with_budget(inst, z, lambda, head_cap, DEFAULT_MAX_HEADS, DEFAULT_MAX_STATES)
}

pub fn best_cycle_with_budget(
    inst: &TwoStageInstance,
    z: &[i64],
    lambda: i64,
    head_cap: u64,
    max_heads: usize,
    max_states: usize,
) -> Result<Option<Cycle>> {
    inst.ensure_valid()?;
    if lambda < 1 {
        return Err(Error::Precondition(format!("multiplier {lambda} < 1")));
    }
    if !inst.within_bounds(z) {
        return Err(Error::Precondition("current point violates the bounds".into()));
    }
    let (lo, hi): (Vec<i64>, Vec<i64>) = (0..inst.num_vars())
        .map(|j| {
            let down = inst.lower[j] - z[j];
            let up = inst.upper[j] - z[j];
            (-((-down).div_euclid(lambda)), up.div_euclid(lambda))
        })
        .unzip();
    let s = inst.s;
    let heads = enumerate_heads(&lo[..s], &hi[..s], head_cap, max_heads)?;

    let mut keys = BTreeSet::new();
    let mut rhs_of = Vec::with_capacity(heads.len());
    for h in &heads {
        let per_block = (0..inst.n)
            .map(|i| {
                let v = inst.a_blocks[i].mul_vec(h)?;
                v.into_iter().map(|x| x.checked_neg().ok_or(Error::Overflow("tail rhs"))).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, rhs) in per_block.iter().enumerate() {
            keys.insert((i, rhs.clone()));
        }
        rhs_of.push(per_block);
    }

    let keys: Vec<(usize, Vec<i64>)> = keys.into_iter().collect();
    let solved: Vec<Result<IpOutcome>> = keys
        .par_iter()
        .map(|(i, rhs)| {
            let range = inst.tail_range(*i);
            solve_small_ip_with_budget(
                &inst.b_blocks[*i],
                rhs,
                &lo[range.clone()],
                &hi[range.clone()],
                &inst.objective[range],
                max_states,
            )
        })
        .collect();
    let mut table: HashMap<(usize, Vec<i64>), IpOutcome> = HashMap::with_capacity(keys.len());
    for (k, out) in keys.into_iter().zip(solved) {
        table.insert(k, out?);
    }

    let head_obj = &inst.objective[..s];
    let mut best: Option<(i64, usize)> = None;
    'heads: for (h_idx, h) in heads.iter().enumerate() {
        let mut total = crate::types::dot(head_obj, h)?;
        for (i, rhs) in rhs_of[h_idx].iter().enumerate() {
            match &table[&(i, rhs.clone())] {
                IpOutcome::Optimal { value, .. } => {
                    total = total.checked_add(*value).ok_or(Error::Overflow("cycle gain"))?;
                }
                IpOutcome::Infeasible => continue 'heads,
            }
        }
        let gain = total.checked_mul(lambda).ok_or(Error::Overflow("cycle gain"))?;
        if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, h_idx));
        }
    }
    let Some((gain, h_idx)) = best else {
        return Ok(None);
    };
    let tails = rhs_of[h_idx]
        .iter()
        .enumerate()
        .map(|(i, rhs)| table[&(i, rhs.clone())].solution().cloned().expect("feasible tail"))
        .collect();
    Ok(Some(Cycle { head: IntVector::new(heads[h_idx].clone()), tails, lambda, gain }))
}

/// Integer vectors in `[lo, hi]` with one-norm at most `cap`, ordered by
/// one-norm and then lexicographically. Requires `lo <= 0 <= hi`.
pub(crate) fn enumerate_heads(lo: &[i64], hi: &[i64], cap: u64, max_heads: usize) -> Result<Vec<Vec<i64>>> {
    let reach: Vec<u64> = lo.iter().zip(hi).map(|(&l, &h)| l.unsigned_abs().max(h.unsigned_abs())).collect();
    // suffix[j]: largest one-norm coordinates j.. can carry.
    let mut suffix = vec![0u64; lo.len() + 1];
    for j in (0..lo.len()).rev() {
        suffix[j] = suffix[j + 1].saturating_add(reach[j]);
    }
    let cap = cap.min(suffix[0]);
    let mut out = Vec::new();
    let mut current = vec![0i64; lo.len()];
    for norm in 0..=cap {
        fill(lo, hi, &suffix, 0, norm, &mut current, &mut out, max_heads)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    lo: &[i64],
    hi: &[i64],
    suffix: &[u64],
    j: usize,
    left: u64,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    max_heads: usize,
) -> Result<()> {
    if j == lo.len() {
        if left == 0 {
            if out.len() >= max_heads {
                return Err(Error::BudgetExceeded { what: "cycle head", limit: max_heads });
            }
            out.push(current.clone());
        }
        return Ok(());
    }
    let span = left.min(i64::MAX as u64) as i64;
    for v in lo[j].max(-span)..=hi[j].min(span) {
        let rest = left - v.unsigned_abs();
        if rest > suffix[j + 1] {
            continue;
        }
        current[j] = v;
        fill(lo, hi, suffix, j + 1, rest, current, out, max_heads)?;
    }
    current[j] = 0;
    Ok(())
}

/// A feasible point, `None` when the instance has none.
pub fn initial_solution(inst: &TwoStageInstance) -> Result<Option<IntVector>> {
    let config = SolverConfig::default();
    match phase_one(inst, &config, None)? {
        PhaseOne::Feasible(x, _) => Ok(Some(x)),
        PhaseOne::Infeasible(_) => Ok(None),
        PhaseOne::Unknown(_) => Err(Error::BudgetExceeded { what: "phase-one", limit: config.max_iterations }),
    }
}

pub fn solve(inst: &TwoStageInstance, config: &SolverConfig) -> Result<SolveReport> {
    inst.ensure_valid()?;
    if config.max_iterations < 1 {
        return Err(Error::Precondition("max_iterations must be at least 1".into()));
    }
    if config.head_cap == HeadCap::Exact(0) {
        return Err(Error::Precondition("head cap must be at least 1".into()));
    }
    with_pool(config.parallel_width, || solve_inner(inst, config))
}

pub(crate) fn with_pool<T: Send>(width: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if width == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(width)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn solve_inner(inst: &TwoStageInstance, config: &SolverConfig) -> Result<SolveReport> {
    let phase1_policy = match config.head_cap {
        HeadCap::TheoremBound => Some(HeadCap::TheoremBound),
        _ => None,
    };
    let (start, phase_one_iterations) = match phase_one(inst, config, phase1_policy)? {
        PhaseOne::Feasible(x, k) => (x, k),
        other => {
            let (status, k) = match other {
                PhaseOne::Infeasible(k) => (SolveStatus::Infeasible, k),
                PhaseOne::Unknown(k) => (SolveStatus::BudgetStopped, k),
                PhaseOne::Feasible(..) => unreachable!(),
            };
            return Ok(SolveReport {
                status,
                solution: None,
                objective_value: None,
                initial_value: None,
                iterations: 0,
                phase_one_iterations: k,
                augmentations: Vec::new(),
                final_head_cap: 0,
            });
        }
    };
    let initial_value = inst.objective_value(&start)?;
    let run = augment(inst, start, &config.head_cap, config, None)?;
    Ok(SolveReport {
        status: run.status,
        objective_value: Some(inst.objective_value(&run.solution)?),
        solution: Some(run.solution),
        initial_value: Some(initial_value),
        iterations: run.augmentations.len(),
        phase_one_iterations,
        augmentations: run.augmentations,
        final_head_cap: run.head_cap,
    })
}

enum PhaseOne {
    Feasible(IntVector, usize),
    Infeasible(usize),
    Unknown(usize),
}

/// Slack program: block `i` gets one column `±e_k` per row, signed like the
/// residual of the lower bound, with box `[0, |residual|]` and cost `-1`.
fn phase_one(inst: &TwoStageInstance, config: &SolverConfig, policy: Option<HeadCap>) -> Result<PhaseOne> {
    inst.ensure_valid()?;
    let res = inst.residual(inst.lower.as_slice())?;
    if res.is_zero() {
        return Ok(PhaseOne::Feasible(inst.lower.clone(), 0));
    }
    let (n, r, s, t) = (inst.n, inst.r, inst.s, inst.t);
    let mut b_blocks = Vec::with_capacity(n);
    let mut lower = inst.lower.as_slice()[..s].to_vec();
    let mut upper = inst.upper.as_slice()[..s].to_vec();
    let mut objective = vec![0; s];
    let mut start = lower.clone();
    for i in 0..n {
        let mut b = IntMatrix::zeros(r, t + r);
        for k in 0..r {
            for j in 0..t {
                b.set(k, j, inst.b_blocks[i].get(k, j));
            }
            // residual = A x - b; the slack must supply b - A x.
            let need = -res[i * r + k];
            b.set(k, t + k, if need < 0 { -1 } else { 1 });
        }
        b_blocks.push(b);
        let range = inst.tail_range(i);
        lower.extend_from_slice(&inst.lower[range.clone()]);
        upper.extend_from_slice(&inst.upper[range.clone()]);
        objective.extend(std::iter::repeat_n(0, t));
        start.extend_from_slice(&inst.lower[range]);
        for k in 0..r {
            let need = res[i * r + k].checked_abs().ok_or(Error::Overflow("phase one"))?;
            lower.push(0);
            upper.push(need);
            objective.push(-1);
            start.push(need);
        }
    }
    let aux = TwoStageInstance {
        n,
        r,
        s,
        t: t + r,
        a_blocks: inst.a_blocks.clone(),
        b_blocks,
        rhs: inst.rhs.clone(),
        lower: IntVector::new(lower),
        upper: IntVector::new(upper),
        objective: IntVector::new(objective),
    };
    debug_assert!(aux.is_feasible(&start).unwrap_or(false));
    let policy = policy.unwrap_or(HeadCap::Adaptive);
    let run = augment(&aux, IntVector::new(start), &policy, config, Some(0))?;
    let k = run.augmentations.len();
    let value = aux.objective_value(&run.solution)?;
    if value == 0 {
        let x: Vec<i64> = run.solution[..s]
            .iter()
            .copied()
            .chain((0..n).flat_map(|i| {
                let from = s + i * (t + r);
                run.solution[from..from + t].to_vec()
            }))
            .collect();
        return Ok(PhaseOne::Feasible(IntVector::new(x), k));
    }
    Ok(match run.status {
        SolveStatus::Optimal => PhaseOne::Infeasible(k),
        _ => PhaseOne::Unknown(k),
    })
}

/// What the augmentation loop needs from a problem structure.
pub(crate) trait StepSearch: Sync {
    fn lower(&self) -> &[i64];
    fn upper(&self) -> &[i64];
    fn objective(&self) -> &[i64];
    /// Largest one-norm any guessed block can take inside the box. A cap at
    /// least this large makes the step search exhaustive.
    fn guessed_span(&self) -> u64;
    /// Cap implied by the explicit Graver bound, if it fits in a `u64`.
    fn theorem_cap(&self) -> Option<u64>;
    fn is_feasible(&self, x: &[i64]) -> Result<bool>;
    fn search(&self, z: &[i64], lambda: i64, cap: u64, config: &SolverConfig) -> Result<Option<Augmentation>>;
}

impl StepSearch for TwoStageInstance {
    fn lower(&self) -> &[i64] {
        self.lower.as_slice()
    }

    fn upper(&self) -> &[i64] {
        self.upper.as_slice()
    }

    fn objective(&self) -> &[i64] {
        self.objective.as_slice()
    }

    fn guessed_span(&self) -> u64 {
        (0..self.s).map(|j| (self.upper[j] - self.lower[j]) as u64).sum()
    }

    fn theorem_cap(&self) -> Option<u64> {
        two_stage_graver_bound(self.r as u64, self.s as u64, self.delta().max(1) as u64).ok()?.to_u64()
    }

    fn is_feasible(&self, x: &[i64]) -> Result<bool> {
        TwoStageInstance::is_feasible(self, x)
    }

    fn search(&self, z: &[i64], lambda: i64, cap: u64, config: &SolverConfig) -> Result<Option<Augmentation>> {
        let found = best_cycle_with_budget(self, z, lambda, cap, config.max_heads, config.max_states)?;
        Ok(found.map(|c| Augmentation { cycle: c.vector(), head: c.head, lambda: c.lambda, gain: c.gain }))
    }
}

pub(crate) struct Run {
    pub solution: IntVector,
    pub augmentations: Vec<Augmentation>,
    pub status: SolveStatus,
    pub head_cap: u64,
}

/// The augmentation loop. `ceiling` is a known upper bound on the objective;
/// reaching it ends the run as optimal.
pub(crate) fn augment<P: StepSearch>(
    problem: &P,
    start: IntVector,
    policy: &HeadCap,
    config: &SolverConfig,
    ceiling: Option<i64>,
) -> Result<Run> {
    let span = problem.guessed_span();
    let (lower, upper) = (problem.lower(), problem.upper());
    let width = lower.iter().zip(upper).map(|(l, u)| u - l).max().unwrap_or(0).max(1);
    let lambdas: Vec<i64> = match config.step_policy {
        StepPolicy::Unit => vec![1],
        StepPolicy::Doubling => std::iter::successors(Some(1i64), |&l| l.checked_mul(2)).take_while(|&l| l <= width).collect(),
    };
    let (mut cap, adaptive) = match policy {
        HeadCap::Adaptive => (1u64.min(span), true),
        HeadCap::Exact(l) => ((*l).min(span), false),
        HeadCap::TheoremBound => (problem.theorem_cap().unwrap_or(u64::MAX).min(span), false),
    };

    // Best over all multipliers; ties keep the smaller multiplier.
    let search = |z: &IntVector, cap: u64| -> Result<Option<Augmentation>> {
        let mut best: Option<Augmentation> = None;
        for &lambda in &lambdas {
            if let Some(c) = problem.search(z, lambda, cap, config)? {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        Ok(best)
    };
    let value_of = |z: &IntVector| crate::types::dot(problem.objective(), z);

    let mut z = start;
    let mut augmentations: Vec<Augmentation> = Vec::new();
    macro_rules! finish {
        ($status:expr) => {
            return Ok(Run { solution: z, augmentations, status: $status, head_cap: cap })
        };
    }
    loop {
        let value = value_of(&z)?;
        if ceiling.is_some_and(|c| value >= c) {
            finish!(SolveStatus::Optimal);
        }
        if augmentations.len() >= config.max_iterations {
            finish!(SolveStatus::BudgetStopped);
        }
        let mut best = match search(&z, cap) {
            Ok(b) => b,
            Err(Error::BudgetExceeded { .. }) => finish!(SolveStatus::BudgetStopped),
            Err(e) => return Err(e),
        };
        if adaptive {
            while cap < span {
                let bigger = cap.saturating_mul(2).min(span);
                match (&best, search(&z, bigger)) {
                    (Some(current), Ok(Some(c))) if c.gain > current.gain => {
                        cap = bigger;
                        best = Some(c);
                    }
                    (Some(_), Ok(_)) | (Some(_), Err(Error::BudgetExceeded { .. })) => break,
                    (None, Ok(found)) => {
                        cap = bigger;
                        best = found;
                    }
                    (None, Err(Error::BudgetExceeded { .. })) => {
                        cap = bigger;
                        finish!(SolveStatus::BudgetStopped);
                    }
                    (_, Err(e)) => return Err(e),
                }
            }
        }
        let Some(step) = best else {
            finish!(SolveStatus::Optimal);
        };
        let next = z.checked_add(&step.cycle.checked_scale(step.lambda)?)?;
        let next_value = value_of(&next)?;
        if !problem.is_feasible(&next)? || next_value <= value || next_value - value != step.gain {
            return Err(Error::Precondition(format!(
                "augmentation by {} x {} is not an improving step",
                step.cycle, step.lambda
            )));
        }
        augmentations.push(step);
        z = next;
    }
}
