//! A CDCL SAT solver: two-watched-literal propagation, first-UIP conflict
//! analysis and activity-based branching, following the classic Minisat
//! architecture.
//!
//! On top of the baseline, the knobs that matter for inversion instances are
//! exposed in [`SolverConfig`]: a non-zero initial activity for the input
//! variables of the encoded function, switches that disable the periodic
//! activity decay and the random decision rule, and an optional restriction
//! of the decision variables to a given set. [`SolverConfig::input_guided`]
//! bundles the tuned settings.
//!
//! A solver instance is single-threaded; parallelism is one instance per
//! worker. Instances are `Clone`, so a formula can be loaded once and cheaply
//! duplicated per cell. A shared cancellation flag is polled at conflict
//! boundaries.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::{evaluate, Cnf, PartialAssignment};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("assumption references variable {var} but formula has {num_vars} variables")]
    AssumptionOutOfRange { var: u32, num_vars: u32 },
    #[error("projection set is empty")]
    EmptyProjection,
    #[error("projection references variable {var} but formula has {num_vars} variables")]
    ProjectionOutOfRange { var: u32, num_vars: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestartPolicy {
    /// Luby-sequence restarts (the baseline default).
    Luby,
    Off,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial activity assigned to the formula's input variables.
    pub input_priority: Option<f64>,
    /// Disable the periodic lowering of variable activities.
    pub disable_decay: bool,
    /// Disable random decision variable selection.
    pub disable_random: bool,
    /// Fraction of decisions taken on a randomly chosen variable.
    pub random_freq: f64,
    /// When set, decisions prefer these variables; once they are all
    /// assigned, branching falls back to the remaining variables so
    /// completeness is never lost.
    pub restrict_decisions_to: Option<Vec<u32>>,
    pub restarts: RestartPolicy,
    pub max_conflicts: Option<u64>,
    pub max_time: Option<Duration>,
    /// Branch on the positive phase first instead of the negative.
    pub phase_positive: bool,
    pub var_decay: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            input_priority: None,
            disable_decay: false,
            disable_random: false,
            random_freq: 0.02,
            restrict_decisions_to: None,
            restarts: RestartPolicy::Luby,
            max_conflicts: None,
            max_time: None,
            phase_positive: false,
            var_decay: 0.95,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// The tuned configuration for inversion instances: input variables get
    /// a non-zero initial activity, activity decay and random decisions are
    /// switched off.
    pub fn input_guided() -> SolverConfig {
        SolverConfig {
            input_priority: Some(1.0),
            disable_decay: true,
            disable_random: true,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub wall: Duration,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

impl SolveStats {
    /// Statistics as `key=value` lines.
    pub fn render(&self) -> String {
        format!(
            "wall_seconds={:.6}\ndecisions={}\nconflicts={}\npropagations={}\n",
            self.wall.as_secs_f64(),
            self.decisions,
            self.conflicts,
            self.propagations
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Total assignment when SAT; checked against the formula before return.
    pub model: Option<PartialAssignment>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub struct AllSatResult {
    /// Distinct models projected to the requested variables.
    pub models: Vec<PartialAssignment>,
    /// Set when the model limit or a budget stopped the enumeration early.
    pub truncated: bool,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationOutcome {
    /// Fixed point of unit propagation: the input bindings plus everything
    /// they imply.
    Extended(PartialAssignment),
    Conflict,
}

// --- internal representation -----------------------------------------------

/// Packed literal: variable is 0-based internally, lowest bit is the sign.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Pl(u32);

impl Pl {
    fn new(var: u32, positive: bool) -> Pl {
        Pl(var << 1 | (!positive) as u32)
    }
    fn var(self) -> u32 {
        self.0 >> 1
    }
    fn sign(self) -> u8 {
        (self.0 & 1) as u8
    }
    fn negate(self) -> Pl {
        Pl(self.0 ^ 1)
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

const VAL_TRUE: u8 = 0;
const VAL_FALSE: u8 = 1;
const VAL_UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

#[derive(Clone)]
struct ClauseRec {
    lits: Vec<Pl>,
    activity: f32,
    learnt: bool,
    removed: bool,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Pl,
}

/// Indexed max-heap over variable activities.
#[derive(Clone, Default)]
struct VarHeap {
    heap: Vec<u32>,
    indices: Vec<i32>,
}

impl VarHeap {
    fn with_capacity(n: usize) -> VarHeap {
        VarHeap {
            heap: Vec::with_capacity(n),
            indices: vec![-1; n],
        }
    }

    fn contains(&self, v: u32) -> bool {
        self.indices[v as usize] >= 0
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.indices[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        let i = self.indices[v as usize];
        if i >= 0 {
            self.up(i as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.indices[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.indices[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) >> 1;
            let pv = self.heap[parent];
            if act[v as usize] <= act[pv as usize] {
                break;
            }
            self.heap[i] = pv;
            self.indices[pv as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.indices[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && act[self.heap[right] as usize] > act[self.heap[left] as usize]
            {
                right
            } else {
                left
            };
            let cv = self.heap[child];
            if act[cv as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = cv;
            self.indices[cv as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.indices[v as usize] = i as i32;
    }
}

#[derive(Clone)]
pub struct Solver {
    num_vars: u32,
    config: SolverConfig,
    clauses: Vec<ClauseRec>,
    num_learnts: usize,
    learnt_limit: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Pl>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f32,
    restricted: Option<Vec<bool>>,
    order_primary: VarHeap,
    order_fallback: VarHeap,
    ok: bool,
    rng_state: u64,
    cancel: Option<Arc<AtomicBool>>,
    seen: Vec<bool>,
    stats: SolveStats,
}

impl Solver {
    pub fn new(cnf: &Cnf, config: SolverConfig) -> Solver {
        let n = cnf.num_vars() as usize;
        let mut restricted: Option<Vec<bool>> = None;
        if let Some(vars) = &config.restrict_decisions_to {
            let mut mask = vec![false; n];
            for &v in vars {
                if v >= 1 && (v as usize) <= n {
                    mask[v as usize - 1] = true;
                }
            }
            restricted = Some(mask);
        }
        let mut activity = vec![0.0f64; n];
        if let Some(initial) = config.input_priority {
            for &v in cnf.input_vars() {
                activity[v as usize - 1] = initial;
            }
        }
        let mut order_primary = VarHeap::with_capacity(n);
        let mut order_fallback = VarHeap::with_capacity(n);
        for v in 0..n as u32 {
            match &restricted {
                Some(mask) if !mask[v as usize] => order_fallback.insert(v, &activity),
                _ => order_primary.insert(v, &activity),
            }
        }
        let mut solver = Solver {
            num_vars: cnf.num_vars(),
            clauses: Vec::with_capacity(cnf.num_clauses()),
            num_learnts: 0,
            learnt_limit: (cnf.num_clauses() / 3).max(1000),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![VAL_UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            restricted,
            order_primary,
            order_fallback,
            ok: true,
            rng_state: config.seed.wrapping_mul(0x9E3779B97F4A7C15) | 1,
            cancel: None,
            seen: vec![false; n],
            stats: SolveStats::default(),
            config,
        };
        for clause in cnf.clauses() {
            let lits: Vec<Pl> = clause
                .literals()
                .iter()
                .map(|l| Pl::new(l.var() - 1, l.is_positive()))
                .collect();
            solver.add_clause_internal(lits, false);
            if !solver.ok {
                break;
            }
        }
        if solver.ok {
            solver.ok = solver.propagate().is_none();
        }
        solver
    }

    pub fn set_cancel_flag(&mut self, flag: Arc<AtomicBool>) {
        self.cancel = Some(flag);
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn max_time(&self) -> Option<Duration> {
        self.config.max_time
    }

    pub fn set_max_time(&mut self, limit: Option<Duration>) {
        self.config.max_time = limit;
    }

    pub fn max_conflicts(&self) -> Option<u64> {
        self.config.max_conflicts
    }

    pub fn set_max_conflicts(&mut self, limit: Option<u64>) {
        self.config.max_conflicts = limit;
    }

    fn value(&self, p: Pl) -> u8 {
        let a = self.assigns[p.var() as usize];
        if a == VAL_UNDEF {
            VAL_UNDEF
        } else {
            a ^ p.sign()
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn enqueue(&mut self, p: Pl, reason: u32) {
        debug_assert_eq!(self.value(p), VAL_UNDEF);
        let v = p.var() as usize;
        self.assigns[v] = p.sign();
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(p);
    }

    fn insert_order(&mut self, v: u32) {
        let in_primary = match &self.restricted {
            Some(mask) => mask[v as usize],
            None => true,
        };
        if in_primary {
            self.order_primary.insert(v, &self.activity);
        } else {
            self.order_fallback.insert(v, &self.activity);
        }
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.negate();
            let mut watchers = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            while i < watchers.len() {
                let w = watchers[i];
                if self.value(w.blocker) == VAL_TRUE {
                    i += 1;
                    continue;
                }
                let cref = w.cref as usize;
                // make sure the false literal is at position 1
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == VAL_TRUE {
                    watchers[i] = Watcher { cref: w.cref, blocker: first };
                    i += 1;
                    continue;
                }
                // look for a new watch
                let mut found = false;
                for k in 2..self.clauses[cref].lits.len() {
                    let q = self.clauses[cref].lits[k];
                    if self.value(q) != VAL_FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[q.idx()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        found = true;
                        break;
                    }
                }
                if found {
                    watchers.swap_remove(i);
                    continue;
                }
                // unit or conflict
                if self.value(first) == VAL_FALSE {
                    // conflict: restore remaining watchers
                    self.qhead = self.trail.len();
                    self.watches[false_lit.idx()] = watchers;
                    return Some(w.cref);
                }
                self.enqueue(first, w.cref);
                i += 1;
            }
            self.watches[false_lit.idx()] = watchers;
        }
        None
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Pl>, usize) {
        let mut learnt: Vec<Pl> = vec![Pl(0)]; // slot for the asserting literal
        let mut path_count = 0usize;
        let mut p: Option<Pl> = None;
        let mut index = self.trail.len();
        loop {
            let start = if p.is_none() { 0 } else { 1 };
            if self.clauses[confl as usize].learnt {
                self.bump_clause(confl);
            }
            for j in start..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[j];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = true;
                    if self.level[v] as usize >= self.decision_level() {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            confl = self.reason[pl.var() as usize];
            self.seen[pl.var() as usize] = false;
            path_count -= 1;
            p = Some(pl);
            if path_count == 0 {
                break;
            }
        }
        learnt[0] = p.unwrap().negate();
        let to_clear: Vec<u32> = learnt.iter().map(|l| l.var()).collect();

        // cheap clause minimization: drop literals whose reason is subsumed
        let mut j = 1;
        for i in 1..learnt.len() {
            let q = learnt[i];
            if !self.literal_redundant(q) {
                learnt[j] = q;
                j += 1;
            }
        }
        learnt.truncate(j);

        // find the backtrack level and put a literal of that level at slot 1
        let mut bt = 0usize;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var() as usize] as usize;
        }
        for v in to_clear {
            self.seen[v as usize] = false;
        }
        (learnt, bt)
    }

    fn literal_redundant(&self, q: Pl) -> bool {
        let r = self.reason[q.var() as usize];
        if r == NO_REASON {
            return false;
        }
        self.clauses[r as usize].lits[1..].iter().all(|&l| {
            let v = l.var() as usize;
            self.seen[v] || self.level[v] == 0
        })
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order_primary.bumped(v, &self.activity);
        self.order_fallback.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for rec in self.clauses.iter_mut().filter(|r| r.learnt) {
                rec.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn decay_activities(&mut self) {
        if !self.config.disable_decay {
            self.var_inc /= self.config.var_decay;
        }
        self.cla_inc /= 0.999;
    }

    /// Adds a clause to the database; level-0 false literals are dropped and
    /// satisfied clauses skipped. Must be called at decision level 0.
    fn add_clause_internal(&mut self, lits: Vec<Pl>, learnt: bool) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut kept = Vec::with_capacity(lits.len());
        for p in lits {
            match self.value(p) {
                VAL_TRUE => return,
                VAL_FALSE => {}
                _ => kept.push(p),
            }
        }
        match kept.len() {
            0 => self.ok = false,
            1 => {
                if self.value(kept[0]) == VAL_UNDEF {
                    self.enqueue(kept[0], NO_REASON);
                } else if self.value(kept[0]) == VAL_FALSE {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.clauses.len() as u32;
                self.watches[kept[0].idx()].push(Watcher {
                    cref,
                    blocker: kept[1],
                });
                self.watches[kept[1].idx()].push(Watcher {
                    cref,
                    blocker: kept[0],
                });
                self.clauses.push(ClauseRec {
                    lits: kept,
                    activity: 0.0,
                    learnt,
                    removed: false,
                });
                if learnt {
                    self.num_learnts += 1;
                }
            }
        }
    }

    /// Attaches a learnt clause mid-search (first literal is asserting).
    fn record_learnt(&mut self, lits: Vec<Pl>) -> Option<u32> {
        if lits.len() == 1 {
            self.enqueue(lits[0], NO_REASON);
            return None;
        }
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseRec {
            lits,
            activity: 0.0,
            learnt: true,
            removed: false,
        });
        self.num_learnts += 1;
        self.bump_clause(cref);
        Some(cref)
    }

    fn reduce_learnts(&mut self) {
        let mut learnt_refs: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&i| {
                let c = &self.clauses[i as usize];
                c.learnt && !c.removed && c.lits.len() > 2
            })
            .collect();
        learnt_refs.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .partial_cmp(&self.clauses[b as usize].activity)
                .unwrap()
        });
        let target = learnt_refs.len() / 2;
        let mut removed = 0;
        for &cref in learnt_refs.iter().take(target) {
            if self.is_locked(cref) {
                continue;
            }
            self.clauses[cref as usize].removed = true;
            removed += 1;
        }
        self.num_learnts -= removed;
        self.learnt_limit = self.learnt_limit + self.learnt_limit / 2;
        self.rebuild_watches();
    }

    fn is_locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.value(first) == VAL_TRUE && self.reason[first.var() as usize] == cref
    }

    fn rebuild_watches(&mut self) {
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.removed {
                continue;
            }
            self.watches[c.lits[0].idx()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[1],
            });
            self.watches[c.lits[1].idx()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[0],
            });
        }
    }

    fn next_random(&mut self) -> u64 {
        // xorshift64*
        let mut x = self.rng_state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.rng_state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    fn pick_branch_var(&mut self) -> Option<u32> {
        if !self.config.disable_random
            && (self.next_random() as f64 / u64::MAX as f64) < self.config.random_freq
        {
            let r = self.next_random();
            let heap = if self.order_primary.is_empty() {
                &self.order_fallback
            } else {
                &self.order_primary
            };
            if !heap.is_empty() {
                let v = heap.heap[(r % heap.heap.len() as u64) as usize];
                if self.assigns[v as usize] == VAL_UNDEF {
                    return Some(v);
                }
            }
        }
        loop {
            let v = self
                .order_primary
                .pop(&self.activity)
                .or_else(|| self.order_fallback.pop(&self.activity))?;
            if self.assigns[v as usize] == VAL_UNDEF {
                return Some(v);
            }
        }
    }

    fn luby(mut x: u64) -> u64 {
        // Finite subsequences of the Luby sequence: 1,1,2,1,1,2,4,...
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    fn budget_exhausted(&self, started: Instant, conflicts_at_start: u64) -> bool {
        if let Some(max_c) = self.config.max_conflicts {
            if self.stats.conflicts - conflicts_at_start >= max_c {
                return true;
            }
        }
        if let Some(max_t) = self.config.max_time {
            if started.elapsed() >= max_t {
                return true;
            }
        }
        if let Some(flag) = &self.cancel {
            if flag.load(Ordering::Relaxed) {
                return true;
            }
        }
        false
    }

    fn search(&mut self, assumptions: &[Pl], started: Instant, conflicts_at_start: u64) -> SolveStatus {
        let mut restart_count = 0u64;
        let mut conflicts_this_restart = 0u64;
        let mut restart_limit = match self.config.restarts {
            RestartPolicy::Luby => 100 * Self::luby(restart_count),
            RestartPolicy::Off => u64::MAX,
        };
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_this_restart += 1;
                if self.decision_level() == 0 {
                    return SolveStatus::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack_and_reorder(bt);
                if let Some(_cref) = self.record_learnt_with_reason(learnt) {
                    // reason recorded inside
                }
                self.decay_activities();
                if (self.stats.conflicts % 128 == 0 || self.config.max_conflicts.is_some())
                    && self.budget_exhausted(started, conflicts_at_start)
                {
                    return SolveStatus::BudgetExceeded;
                }
            } else {
                if conflicts_this_restart >= restart_limit {
                    restart_count += 1;
                    conflicts_this_restart = 0;
                    restart_limit = 100 * Self::luby(restart_count);
                    self.backtrack_and_reorder(0);
                    if self.budget_exhausted(started, conflicts_at_start) {
                        return SolveStatus::BudgetExceeded;
                    }
                    continue;
                }
                if self.num_learnts > self.learnt_limit {
                    self.reduce_learnts();
                }
                // place pending assumptions first
                if self.decision_level() < assumptions.len() {
                    let p = assumptions[self.decision_level()];
                    match self.value(p) {
                        VAL_TRUE => {
                            self.new_decision_level();
                        }
                        VAL_FALSE => return SolveStatus::Unsat,
                        _ => {
                            self.new_decision_level();
                            self.enqueue(p, NO_REASON);
                        }
                    }
                    continue;
                }
                match self.pick_branch_var() {
                    None => return SolveStatus::Sat,
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.new_decision_level();
                        self.enqueue(Pl::new(v, self.config.phase_positive), NO_REASON);
                    }
                }
            }
        }
    }

    fn backtrack_and_reorder(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target];
        for i in (bound..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.assigns[v as usize] = VAL_UNDEF;
            self.reason[v as usize] = NO_REASON;
            self.insert_order(v);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target);
        self.qhead = self.trail.len();
    }

    fn record_learnt_with_reason(&mut self, lits: Vec<Pl>) -> Option<u32> {
        let asserting = lits[0];
        if lits.len() == 1 {
            self.enqueue(asserting, NO_REASON);
            None
        } else {
            let cref = self.record_learnt(lits)?;
            // the enqueue must carry the clause as its reason
            let v = asserting.var() as usize;
            debug_assert_eq!(self.assigns[v], VAL_UNDEF);
            self.enqueue(asserting, cref);
            Some(cref)
        }
    }

    fn convert_assumptions(&self, pairs: &[(u32, bool)]) -> Result<Vec<Pl>, SolverError> {
        pairs
            .iter()
            .map(|&(var, value)| {
                if var == 0 || var > self.num_vars {
                    Err(SolverError::AssumptionOutOfRange {
                        var,
                        num_vars: self.num_vars,
                    })
                } else {
                    Ok(Pl::new(var - 1, value))
                }
            })
            .collect()
    }

    fn extract_model(&self) -> PartialAssignment {
        let mut pa = PartialAssignment::new();
        for v in 0..self.num_vars {
            let value = match self.assigns[v as usize] {
                VAL_TRUE => true,
                VAL_FALSE => false,
                _ => unreachable!("SAT with unassigned variable {}", v + 1),
            };
            pa.bind(v + 1, value).unwrap();
        }
        pa
    }

    /// Solves under the given assumptions. The solver keeps its learnt
    /// clauses between calls.
    pub fn solve_under(&mut self, pairs: &[(u32, bool)]) -> Result<SolveResult, SolverError> {
        let assumptions = self.convert_assumptions(pairs)?;
        let started = Instant::now();
        let stats_before = self.stats;
        self.backtrack_and_reorder(0);
        let status = if self.ok {
            self.search(&assumptions, started, stats_before.conflicts)
        } else {
            SolveStatus::Unsat
        };
        let model = if status == SolveStatus::Sat {
            Some(self.extract_model())
        } else {
            None
        };
        self.backtrack_and_reorder(0);
        let stats = SolveStats {
            wall: started.elapsed(),
            decisions: self.stats.decisions - stats_before.decisions,
            conflicts: self.stats.conflicts - stats_before.conflicts,
            propagations: self.stats.propagations - stats_before.propagations,
        };
        Ok(SolveResult { status, model, stats })
    }

    /// Enumerates distinct models projected to `project_to`, blocking each
    /// projection with a clause over the projection variables only.
    /// Blocking clauses stay in the database afterwards.
    pub fn enumerate_projected(
        &mut self,
        assumptions: &[(u32, bool)],
        project_to: &[u32],
        limit: usize,
    ) -> Result<AllSatResult, SolverError> {
        if project_to.is_empty() {
            return Err(SolverError::EmptyProjection);
        }
        for &var in project_to {
            if var == 0 || var > self.num_vars {
                return Err(SolverError::ProjectionOutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
        }
        let started = Instant::now();
        let stats_before = self.stats;
        let mut models = Vec::new();
        let mut truncated = false;
        loop {
            let result = self.solve_under(assumptions)?;
            match result.status {
                SolveStatus::Unsat => break,
                SolveStatus::BudgetExceeded => {
                    truncated = true;
                    break;
                }
                SolveStatus::Sat => {
                    let model = result.model.expect("SAT carries a model");
                    let mut projected = PartialAssignment::new();
                    let mut blocking = Vec::with_capacity(project_to.len());
                    for &var in project_to {
                        let value = model.get(var).expect("model is total");
                        projected.bind(var, value).unwrap();
                        blocking.push(Pl::new(var - 1, !value));
                    }
                    models.push(projected);
                    if models.len() >= limit {
                        truncated = true;
                        break;
                    }
                    self.backtrack_and_reorder(0);
                    self.add_clause_internal(blocking, false);
                    if !self.ok {
                        break;
                    }
                    if self.propagate().is_some() {
                        self.ok = false;
                        break;
                    }
                }
            }
        }
        let stats = SolveStats {
            wall: started.elapsed(),
            decisions: self.stats.decisions - stats_before.decisions,
            conflicts: self.stats.conflicts - stats_before.conflicts,
            propagations: self.stats.propagations - stats_before.propagations,
        };
        Ok(AllSatResult {
            models,
            truncated,
            stats,
        })
    }

    /// Runs unit propagation from the given bindings without branching.
    pub fn propagate_under(&mut self, pairs: &[(u32, bool)]) -> Result<PropagationOutcome, SolverError> {
        let assumptions = self.convert_assumptions(pairs)?;
        self.backtrack_and_reorder(0);
        if !self.ok {
            return Ok(PropagationOutcome::Conflict);
        }
        self.new_decision_level();
        for p in assumptions {
            match self.value(p) {
                VAL_TRUE => {}
                VAL_FALSE => {
                    self.backtrack_and_reorder(0);
                    return Ok(PropagationOutcome::Conflict);
                }
                _ => self.enqueue(p, NO_REASON),
            }
        }
        let conflict = self.propagate().is_some();
        let outcome = if conflict {
            PropagationOutcome::Conflict
        } else {
            let mut pa = PartialAssignment::new();
            for v in 0..self.num_vars {
                match self.assigns[v as usize] {
                    VAL_TRUE => pa.bind(v + 1, true).unwrap(),
                    VAL_FALSE => pa.bind(v + 1, false).unwrap(),
                    _ => {}
                }
            }
            PropagationOutcome::Extended(pa)
        };
        self.backtrack_and_reorder(0);
        Ok(outcome)
    }
}

/// One-shot solve of `cnf` under `assumptions`.
pub fn solve(
    cnf: &Cnf,
    assumptions: &PartialAssignment,
    config: SolverConfig,
) -> Result<SolveResult, SolverError> {
    let mut solver = Solver::new(cnf, config);
    let pairs: Vec<(u32, bool)> = assumptions.iter().collect();
    let result = solver.solve_under(&pairs)?;
    if let Some(model) = &result.model {
        debug_assert!(matches!(evaluate(cnf, model), Ok(true)));
        assert!(
            evaluate(cnf, model).unwrap_or(false),
            "solver returned a model that fails evaluation"
        );
    }
    Ok(result)
}

/// One-shot enumeration of all models of `cnf` projected to `project_to`.
pub fn solve_all(
    cnf: &Cnf,
    config: SolverConfig,
    project_to: &[u32],
    limit: usize,
) -> Result<AllSatResult, SolverError> {
    let mut solver = Solver::new(cnf, config);
    solver.enumerate_projected(&[], project_to, limit)
}

/// Fixed point of unit propagation from `pa` on `cnf`.
pub fn propagate_only(cnf: &Cnf, pa: &PartialAssignment) -> Result<PropagationOutcome, SolverError> {
    let mut solver = Solver::new(cnf, SolverConfig::default());
    let pairs: Vec<(u32, bool)> = pa.iter().collect();
    solver.propagate_under(&pairs)
}
