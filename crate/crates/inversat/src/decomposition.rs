//! Decomposition sets, cell sampling, the predictive function and its
//! minimization.
//!
//! A decomposition set X̃ is an ordered subset of the encoding's input
//! variables. Each of the 2^d value vectors over X̃ induces a *cell*: the
//! formula with those variables fixed. Solving the whole family sequentially
//! would take some total time; the predictive function T estimates it from a
//! random sample of cells (or measures it exactly when the family is small),
//! and `minimize` walks a chain of shrinking sets looking for the cheapest
//! one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{substitute, Cnf, PartialAssignment};
use crate::solver::{Solver, SolverConfig, SolveStatus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompError {
    #[error("decomposition set is empty")]
    Empty,
    #[error("duplicate variable {0} in decomposition set")]
    Duplicate(u32),
    #[error("variable {0} is not an input variable of the formula")]
    NotInputVariable(u32),
    #[error("decomposition power {0} too large to enumerate")]
    PowerTooLarge(usize),
    #[error("bad decomposition range list {text:?}: {msg}")]
    Parse { text: String, msg: String },
    #[error("predictive function undefined at the initial set; start from a larger set")]
    UndefinedAtInitial,
    #[error("bad prediction parameters: {0}")]
    BadParams(String),
}

/// An ordered subset of input variables; its power `d` spans `2^d` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionSet {
    variables: Vec<u32>,
}

impl DecompositionSet {
    pub fn new(variables: Vec<u32>) -> Result<DecompositionSet, DecompError> {
        if variables.is_empty() {
            return Err(DecompError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &v in &variables {
            if !seen.insert(v) {
                return Err(DecompError::Duplicate(v));
            }
        }
        Ok(DecompositionSet { variables })
    }

    pub fn variables(&self) -> &[u32] {
        &self.variables
    }

    pub fn power(&self) -> usize {
        self.variables.len()
    }

    pub fn num_cells(&self) -> Result<u64, DecompError> {
        if self.power() >= 64 {
            return Err(DecompError::PowerTooLarge(self.power()));
        }
        Ok(1u64 << self.power())
    }

    /// Parses a comma-separated range list such as `1-9,20-30,42-52`.
    pub fn parse(text: &str) -> Result<DecompositionSet, DecompError> {
        let err = |msg: String| DecompError::Parse {
            text: text.to_string(),
            msg,
        };
        let mut variables = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(err("empty range".into()));
            }
            let (lo, hi) = match part.split_once('-') {
                Some((a, b)) => (a, b),
                None => (part, part),
            };
            let lo: u32 = lo.trim().parse().map_err(|e| err(format!("{part:?}: {e}")))?;
            let hi: u32 = hi.trim().parse().map_err(|e| err(format!("{part:?}: {e}")))?;
            if lo == 0 || hi < lo {
                return Err(err(format!("bad range {part:?}")));
            }
            variables.extend(lo..=hi);
        }
        DecompositionSet::new(variables)
    }

    /// Renders the set back as a range list, collapsing consecutive runs.
    pub fn format(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.variables.len() {
            let start = self.variables[i];
            let mut end = start;
            while i + 1 < self.variables.len() && self.variables[i + 1] == end + 1 {
                end += 1;
                i += 1;
            }
            parts.push(if start == end {
                start.to_string()
            } else {
                format!("{start}-{end}")
            });
            i += 1;
        }
        parts.join(",")
    }

    /// Checks membership against the formula's input variables.
    pub fn validate_against(&self, cnf: &Cnf) -> Result<(), DecompError> {
        for &v in &self.variables {
            if !cnf.input_vars().contains(&v) {
                return Err(DecompError::NotInputVariable(v));
            }
        }
        Ok(())
    }

    /// The j-th cell vector in lexicographic order: the first variable takes
    /// the most significant bit of `index`.
    pub fn assignment_for(&self, index: u64) -> PartialAssignment {
        let d = self.power();
        PartialAssignment::from_pairs(self.variables.iter().enumerate().map(|(i, &v)| {
            (v, (index >> (d - 1 - i)) & 1 == 1)
        }))
        .expect("distinct variables")
    }

    /// The set with the variable at `idx` removed.
    pub fn without(&self, idx: usize) -> Result<DecompositionSet, DecompError> {
        let mut variables = self.variables.clone();
        variables.remove(idx);
        DecompositionSet::new(variables)
    }
}

/// The decomposition family: every cell formula in lexicographic order of
/// its value vector.
pub fn cells<'a>(
    cnf: &'a Cnf,
    set: &'a DecompositionSet,
) -> Result<impl Iterator<Item = Cnf> + 'a, DecompError> {
    set.validate_against(cnf)?;
    let total = set.num_cells()?;
    Ok((0..total).map(move |j| {
        substitute(cnf, &set.assignment_for(j)).expect("cell substitution is well formed")
    }))
}

/// What a unit of solver work costs in the predictive function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostModel {
    /// Measured wall-clock seconds per cell (the natural reading).
    #[default]
    WallSeconds,
    /// Solver conflicts per cell: a mocked clock, exactly reproducible.
    Conflicts,
    /// One unit per cell regardless of difficulty.
    CellCount,
}

#[derive(Debug, Clone)]
pub struct PredictionParams {
    /// Sample size when the family is too large to enumerate.
    pub q: u64,
    /// Exact-enumeration threshold: families of at most `r` cells are
    /// measured in full.
    pub r: u64,
    /// Cumulative cost bound; crossing it makes the outcome undefined.
    pub g_budget: f64,
    pub seed: u64,
    pub cost_model: CostModel,
}

impl Default for PredictionParams {
    fn default() -> PredictionParams {
        PredictionParams {
            q: 1000,
            r: 4096,
            g_budget: 60.0,
            seed: 0,
            cost_model: CostModel::WallSeconds,
        }
    }
}

impl PredictionParams {
    fn validate(&self) -> Result<(), DecompError> {
        if self.q < 1 {
            return Err(DecompError::BadParams("Q must be >= 1".into()));
        }
        if self.r < 1 {
            return Err(DecompError::BadParams("R must be >= 1".into()));
        }
        if !(self.g_budget > 0.0) {
            return Err(DecompError::BadParams("g_budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionStatus {
    /// All cells measured: T is the measured total.
    Exact,
    /// Sampled: T extrapolates the sample to the whole family.
    Estimated,
    /// The budget ran out (or an abort fired) before a value was reached.
    Undefined,
}

impl PredictionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionStatus::Exact => "exact",
            PredictionStatus::Estimated => "estimated",
            PredictionStatus::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PredictionOutcome {
    /// Accumulated cost over the solved cells.
    pub tau: f64,
    /// Predicted total sequential cost; absent when undefined.
    pub t: Option<f64>,
    pub status: PredictionStatus,
    pub cells_solved: u64,
}

/// The cell sample θ: all `2^d` vectors when the family is small enough,
/// otherwise `Q` vectors drawn i.i.d. uniform with the given seed.
pub fn sample_cells(
    cnf: &Cnf,
    set: &DecompositionSet,
    params: &PredictionParams,
) -> Result<Vec<PartialAssignment>, DecompError> {
    set.validate_against(cnf)?;
    params.validate()?;
    let total = set.num_cells()?;
    if total <= params.r {
        Ok((0..total).map(|j| set.assignment_for(j)).collect())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok((0..params.q)
            .map(|_| set.assignment_for(rng.gen_range(0..total)))
            .collect())
    }
}

/// Why a prediction run stopped before completing its sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    None,
    /// The running estimate provably exceeded the incumbent best T.
    Dominated,
    /// The cumulative cost reached the budget.
    Budget,
}

impl AbortReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AbortReason::None => "none",
            AbortReason::Dominated => "dominated",
            AbortReason::Budget => "budget",
        }
    }
}

/// The predictive function T.
pub fn predict(
    cnf: &Cnf,
    set: &DecompositionSet,
    params: &PredictionParams,
    solver_config: &SolverConfig,
) -> Result<PredictionOutcome, DecompError> {
    predict_bounded(cnf, set, params, solver_config, None).map(|(outcome, _)| outcome)
}

/// `predict` with an optional incumbent: evaluation is cut off as soon as the
/// best possible final T exceeds the incumbent, which cannot change whether
/// an improving candidate is found.
pub fn predict_bounded(
    cnf: &Cnf,
    set: &DecompositionSet,
    params: &PredictionParams,
    solver_config: &SolverConfig,
    incumbent: Option<f64>,
) -> Result<(PredictionOutcome, AbortReason), DecompError> {
    let sample = sample_cells(cnf, set, params)?;
    let total = set.num_cells()? as f64;
    let exact = total as u64 <= params.r;
    // with sampling, each measured cell stands for 2^d / Q cells
    let scale = if exact {
        1.0
    } else {
        total / sample.len() as f64
    };
    // a fresh solver per cell keeps the measured costs i.i.d.: learnt
    // clauses carried across cells would make the sample mean depend on how
    // many cells happen to be measured
    let template = Solver::new(cnf, solver_config.clone());
    let mut tau = 0.0f64;
    let mut cells_solved = 0u64;
    for cell in &sample {
        let remaining = params.g_budget - tau;
        let mut config_budget_hit = false;
        let pairs: Vec<(u32, bool)> = cell.iter().collect();
        let mut solver = template.clone();
        let per_cell = budgeted(&mut solver, params.cost_model, remaining, |s| {
            s.solve_under(&pairs).expect("assumptions validated")
        });
        let (cost, status) = per_cell;
        if status == SolveStatus::BudgetExceeded {
            config_budget_hit = true;
        }
        tau += cost;
        cells_solved += 1;
        if config_budget_hit || tau >= params.g_budget {
            return Ok((
                PredictionOutcome {
                    tau,
                    t: None,
                    status: PredictionStatus::Undefined,
                    cells_solved,
                },
                AbortReason::Budget,
            ));
        }
        if let Some(best) = incumbent {
            if scale * tau > best {
                return Ok((
                    PredictionOutcome {
                        tau,
                        t: None,
                        status: PredictionStatus::Undefined,
                        cells_solved,
                    },
                    AbortReason::Dominated,
                ));
            }
        }
    }
    let status = if exact {
        PredictionStatus::Exact
    } else {
        PredictionStatus::Estimated
    };
    Ok((
        PredictionOutcome {
            tau,
            t: Some(scale * tau),
            status,
            cells_solved,
        },
        AbortReason::None,
    ))
}

/// Solves one cell under a residual budget and reports its cost in the given
/// model's units.
fn budgeted(
    solver: &mut Solver,
    model: CostModel,
    remaining: f64,
    run: impl FnOnce(&mut Solver) -> crate::solver::SolveResult,
) -> (f64, SolveStatus) {
    // cap the cell so a single pathological instance cannot blow far past
    // the cumulative budget
    let (saved_time, saved_conflicts) = (solver.max_time(), solver.max_conflicts());
    match model {
        CostModel::WallSeconds => {
            solver.set_max_time(Some(std::time::Duration::from_secs_f64(
                remaining.max(0.001),
            )));
        }
        CostModel::Conflicts => {
            solver.set_max_conflicts(Some(remaining.ceil().max(1.0) as u64));
        }
        CostModel::CellCount => {}
    }
    let result = run(solver);
    solver.set_max_time(saved_time);
    solver.set_max_conflicts(saved_conflicts);
    let cost = match model {
        CostModel::WallSeconds => result.stats.wall.as_secs_f64(),
        CostModel::Conflicts => result.stats.conflicts as f64,
        CostModel::CellCount => 1.0,
    };
    (cost, result.status)
}

/// Default cumulative budget: ten full passes of `Q` median-cost cells at
/// the given set, floored at 60 cost units. The median comes from a small
/// pilot sample.
pub fn default_g_budget(
    cnf: &Cnf,
    set: &DecompositionSet,
    params: &PredictionParams,
    solver_config: &SolverConfig,
) -> Result<f64, DecompError> {
    let pilot = PredictionParams {
        q: params.q.min(50),
        g_budget: f64::MAX,
        ..params.clone()
    };
    let sample = sample_cells(cnf, set, &pilot)?;
    let template = Solver::new(cnf, solver_config.clone());
    let mut costs: Vec<f64> = sample
        .iter()
        .map(|cell| {
            let pairs: Vec<(u32, bool)> = cell.iter().collect();
            let mut solver = template.clone();
            budgeted(&mut solver, pilot.cost_model, f64::MAX, |s| {
                s.solve_under(&pairs).expect("assumptions validated")
            })
            .0
        })
        .collect();
    costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = costs[costs.len() / 2];
    Ok((10.0 * params.q as f64 * median).max(60.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinimizeStrategy {
    /// Drop the last variable of the current set each step.
    #[default]
    RemoveLast,
    /// Try dropping each variable, keep the best improving candidate.
    GreedyBest,
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iteration: usize,
    pub variables: String,
    pub power: usize,
    pub tau: f64,
    pub t: Option<f64>,
    pub status: PredictionStatus,
    pub abort: AbortReason,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MinimizationTrace {
    pub records: Vec<TraceRecord>,
}

impl MinimizationTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,power,variables,tau,T,status,abort,accepted\n");
        for r in &self.records {
            let t = r.t.map(|v| format!("{v:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},\"{}\",{:.6},{},{},{},{}\n",
                r.iteration,
                r.power,
                r.variables,
                r.tau,
                t,
                r.status.as_str(),
                r.abort.as_str(),
                r.accepted
            ));
        }
        out
    }
}

/// Chain minimization of the predictive function: starting from `init`,
/// repeatedly remove one variable while T improves. Candidate evaluation is
/// cut short once it is provably worse than the incumbent.
pub fn minimize(
    cnf: &Cnf,
    init: &DecompositionSet,
    strategy: MinimizeStrategy,
    params: &PredictionParams,
    solver_config: &SolverConfig,
) -> Result<(DecompositionSet, PredictionOutcome, MinimizationTrace), DecompError> {
    let mut trace = MinimizationTrace::default();
    let mut iteration = 0usize;
    let (initial, _) = predict_bounded(cnf, init, params, solver_config, None)?;
    trace.records.push(TraceRecord {
        iteration,
        variables: init.format(),
        power: init.power(),
        tau: initial.tau,
        t: initial.t,
        status: initial.status,
        abort: AbortReason::None,
        accepted: initial.t.is_some(),
    });
    let mut best_t = initial.t.ok_or(DecompError::UndefinedAtInitial)?;
    let mut best_set = init.clone();
    let mut best_outcome = initial;
    loop {
        if best_set.power() <= 1 {
            break;
        }
        iteration += 1;
        let candidates: Vec<usize> = match strategy {
            MinimizeStrategy::RemoveLast => vec![best_set.power() - 1],
            MinimizeStrategy::GreedyBest => (0..best_set.power()).collect(),
        };
        let mut step_best: Option<(DecompositionSet, PredictionOutcome)> = None;
        for idx in candidates {
            let candidate = best_set.without(idx)?;
            let (outcome, abort) =
                predict_bounded(cnf, &candidate, params, solver_config, Some(best_t))?;
            let improving = outcome.t.map(|t| t < best_t).unwrap_or(false);
            trace.records.push(TraceRecord {
                iteration,
                variables: candidate.format(),
                power: candidate.power(),
                tau: outcome.tau,
                t: outcome.t,
                status: outcome.status,
                abort,
                accepted: improving,
            });
            if improving {
                let better_than_step = step_best
                    .as_ref()
                    .map(|(_, o)| outcome.t < o.t)
                    .unwrap_or(true);
                if better_than_step {
                    step_best = Some((candidate, outcome));
                }
            }
        }
        match step_best {
            Some((set, outcome)) => {
                best_t = outcome.t.expect("accepted candidates are defined");
                best_set = set;
                best_outcome = outcome;
            }
            None => break,
        }
    }
    Ok((best_set, best_outcome, trace))
}
