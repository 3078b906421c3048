//! Batch construction and the parallel attack loop.
//!
//! The decomposition family of 2^d cells is split into 2^k job batches by a
//! k-bit prefix over the first k variables of the decomposition set. Batches
//! flow through a single shared queue; each worker owns a solver instance
//! and takes the next free batch when it finishes one. First-SAT mode stops
//! everyone as soon as a model is found; find-all mode enumerates every key
//! in every cell and returns the distinct verified keys, a result that is
//! independent of worker count and batch size.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::decomposition::{DecompError, DecompositionSet};
use crate::encoder::{EncodeError, Encoding};
use crate::generators::{verify_key, GeneratorSpec};
use crate::solver::{Solver, SolverConfig, SolverError, SolveStatus};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("batch prefix length {k} exceeds decomposition power {d}")]
    KTooLarge { k: usize, d: usize },
    #[error("keystream has {got} bits but the encoding expects {expected}")]
    KeystreamLengthMismatch { expected: usize, got: usize },
    #[error("recovered key fails simulation; encoder/solver inconsistency for key {key:?}")]
    VerificationFailed { key: String },
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One job batch: the cells sharing a k-bit prefix over the first k
/// decomposition variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub index: u64,
    /// Prefix bits over the first k decomposition variables.
    pub prefix: Vec<bool>,
    pub cell_count: u64,
}

impl Batch {
    pub fn prefix_string(&self) -> String {
        if self.prefix.is_empty() {
            "-".to_string()
        } else {
            self.prefix.iter().map(|&b| if b { '1' } else { '0' }).collect()
        }
    }
}

/// Splits the family into `2^k` equal batches. Batch `p` carries the prefix
/// that is the k-bit binary encoding of `p`, so batches partition the cells.
pub fn make_batches(set: &DecompositionSet, k: usize) -> Result<Vec<Batch>, RunnerError> {
    let d = set.power();
    if k > d {
        return Err(RunnerError::KTooLarge { k, d });
    }
    set.num_cells()?; // 2^d must be representable
    let cell_count = 1u64 << (d - k);
    Ok((0..1u64 << k)
        .map(|index| Batch {
            index,
            prefix: (0..k).map(|i| index >> (k - 1 - i) & 1 == 1).collect(),
            cell_count,
        })
        .collect())
}

/// Manifest for out-of-process schedulers: one line per batch,
/// `<batch-index> <prefix-bits> <cell-count>`.
pub fn export_manifest(set: &DecompositionSet, k: usize) -> Result<String, RunnerError> {
    let batches = make_batches(set, k)?;
    let mut out = String::new();
    for b in &batches {
        out.push_str(&format!("{} {} {}\n", b.index, b.prefix_string(), b.cell_count));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    /// Stop at the first satisfying cell.
    FirstSat,
    /// Enumerate every key of every cell.
    FindAll,
}

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub workers: usize,
    /// Batch prefix length; `2^k` batches.
    pub k: usize,
    pub mode: AttackMode,
    pub solver_config: SolverConfig,
    /// Overall wall-clock budget for the whole attack.
    pub deadline: Option<Duration>,
    /// Externally owned stop flag (e.g. wired to Ctrl-C); setting it halts
    /// all workers within one solver conflict-check interval.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for AttackConfig {
    fn default() -> AttackConfig {
        AttackConfig {
            workers: 1,
            k: 0,
            mode: AttackMode::FirstSat,
            solver_config: SolverConfig::input_guided(),
            deadline: None,
            cancel: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackStatus {
    /// A verified key was recovered (first-SAT) or the full enumeration
    /// finished with at least one key (find-all).
    KeyFound,
    /// Every cell is unsatisfiable: wrong keystream or an encoding bug.
    Exhausted,
    DeadlineExceeded,
}

#[derive(Debug, Clone)]
pub struct BatchTiming {
    pub batch_index: u64,
    pub wall: Duration,
    pub cells_solved: u64,
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub status: AttackStatus,
    /// Distinct verified keys, sorted; at most one in first-SAT mode.
    pub keys: Vec<Vec<bool>>,
    pub cells_solved: u64,
    pub cells_skipped: u64,
    pub batch_timings: Vec<BatchTiming>,
    pub wall: Duration,
}

impl AttackOutcome {
    pub fn timings_csv(&self) -> String {
        let mut out = String::from("batch,wall_seconds,cells_solved\n");
        let mut rows = self.batch_timings.clone();
        rows.sort_by_key(|t| t.batch_index);
        for t in rows {
            out.push_str(&format!(
                "{},{:.6},{}\n",
                t.batch_index,
                t.wall.as_secs_f64(),
                t.cells_solved
            ));
        }
        out
    }
}

struct SharedState {
    next_batch: AtomicU64,
    cancel: Arc<AtomicBool>,
    deadline_hit: AtomicBool,
    keys: Mutex<Vec<Vec<bool>>>,
    timings: Mutex<Vec<BatchTiming>>,
    failure: Mutex<Option<RunnerError>>,
}

/// Runs the attack: binds the keystream, builds the batches and processes
/// them on `workers` threads from a shared queue.
pub fn run_attack(
    enc: &Encoding,
    gen: &GeneratorSpec,
    keystream: &[bool],
    set: &DecompositionSet,
    config: &AttackConfig,
) -> Result<AttackOutcome, RunnerError> {
    if keystream.len() != enc.keystream_vars.len() {
        return Err(RunnerError::KeystreamLengthMismatch {
            expected: enc.keystream_vars.len(),
            got: keystream.len(),
        });
    }
    set.validate_against(&enc.cnf)?;
    let batches = make_batches(set, config.k)?;
    let bound = enc.bound_cnf(keystream)?;
    let mut template = Solver::new(&bound, config.solver_config.clone());
    let cancel = config
        .cancel
        .clone()
        .unwrap_or_else(|| Arc::new(AtomicBool::new(false)));
    template.set_cancel_flag(cancel.clone());

    let started = Instant::now();
    let deadline = config.deadline.map(|d| started + d);
    let shared = SharedState {
        next_batch: AtomicU64::new(0),
        cancel,
        deadline_hit: AtomicBool::new(false),
        keys: Mutex::new(Vec::new()),
        timings: Mutex::new(Vec::new()),
        failure: Mutex::new(None),
    };
    let workers = config.workers.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let mut solver = template.clone();
            let shared = &shared;
            let batches = &batches;
            scope.spawn(move || {
                worker_loop(
                    &mut solver,
                    enc,
                    gen,
                    keystream,
                    set,
                    config,
                    batches,
                    shared,
                    deadline,
                );
            });
        }
    });
    if let Some(err) = shared.failure.into_inner().unwrap() {
        return Err(err);
    }
    let mut keys = shared.keys.into_inner().unwrap();
    keys.sort();
    keys.dedup();
    let batch_timings = shared.timings.into_inner().unwrap();
    let cells_solved: u64 = batch_timings.iter().map(|t| t.cells_solved).sum();
    let total_cells = set.num_cells()?;
    let status = if shared.deadline_hit.load(Ordering::Relaxed) {
        AttackStatus::DeadlineExceeded
    } else if !keys.is_empty() {
        AttackStatus::KeyFound
    } else if shared.cancel.load(Ordering::Relaxed) {
        // externally interrupted before the family was exhausted
        AttackStatus::DeadlineExceeded
    } else {
        AttackStatus::Exhausted
    };
    Ok(AttackOutcome {
        status,
        keys,
        cells_solved,
        cells_skipped: total_cells - cells_solved,
        batch_timings,
        wall: started.elapsed(),
    })
}

#[allow(clippy::too_many_arguments)]
fn worker_loop(
    solver: &mut Solver,
    enc: &Encoding,
    gen: &GeneratorSpec,
    keystream: &[bool],
    set: &DecompositionSet,
    config: &AttackConfig,
    batches: &[Batch],
    shared: &SharedState,
    deadline: Option<Instant>,
) {
    let d = set.power();
    let suffix_bits = d - config.k;
    loop {
        let p = shared.next_batch.fetch_add(1, Ordering::Relaxed);
        if p >= batches.len() as u64 || shared.cancel.load(Ordering::Relaxed) {
            return;
        }
        let batch = &batches[p as usize];
        let batch_start = Instant::now();
        let mut cells_done = 0u64;
        for beta in 0..batch.cell_count {
            if shared.cancel.load(Ordering::Relaxed) {
                break;
            }
            if let Some(dl) = deadline {
                if Instant::now() >= dl {
                    shared.deadline_hit.store(true, Ordering::Relaxed);
                    shared.cancel.store(true, Ordering::Relaxed);
                    break;
                }
            }
            let cell_index = (batch.index << suffix_bits) | beta;
            let assignment = set.assignment_for(cell_index);
            let pairs: Vec<(u32, bool)> = assignment.iter().collect();
            let result = match config.mode {
                AttackMode::FirstSat => match solver.solve_under(&pairs) {
                    Ok(r) => {
                        cells_done += 1;
                        if r.status == SolveStatus::Sat {
                            let model = r.model.expect("SAT carries a model");
                            let key = enc
                                .key_from_model(&model)
                                .expect("model is total over key vars");
                            if !verify_key(gen, &key, keystream) {
                                fail(shared, verification_error(gen, &key));
                                return;
                            }
                            shared.keys.lock().unwrap().push(key);
                            shared.cancel.store(true, Ordering::Relaxed);
                        }
                        Ok(())
                    }
                    Err(e) => Err(RunnerError::from(e)),
                },
                AttackMode::FindAll => {
                    match solver.enumerate_projected(&pairs, &enc.key_vars, usize::MAX) {
                        Ok(all) => {
                            cells_done += 1;
                            let mut found = Vec::new();
                            for model in &all.models {
                                let key: Vec<bool> = enc
                                    .key_vars
                                    .iter()
                                    .map(|&v| model.get(v).expect("projected model is total"))
                                    .collect();
                                if !verify_key(gen, &key, keystream) {
                                    fail(shared, verification_error(gen, &key));
                                    return;
                                }
                                found.push(key);
                            }
                            if !found.is_empty() {
                                shared.keys.lock().unwrap().extend(found);
                            }
                            Ok(())
                        }
                        Err(e) => Err(RunnerError::from(e)),
                    }
                }
            };
            if let Err(e) = result {
                fail(shared, e);
                return;
            }
        }
        shared.timings.lock().unwrap().push(BatchTiming {
            batch_index: batch.index,
            wall: batch_start.elapsed(),
            cells_solved: cells_done,
        });
        if shared.cancel.load(Ordering::Relaxed) {
            return;
        }
    }
}

fn verification_error(gen: &GeneratorSpec, key: &[bool]) -> RunnerError {
    RunnerError::VerificationFailed {
        key: gen
            .format_key(key)
            .unwrap_or_else(|_| format!("{key:?}")),
    }
}

fn fail(shared: &SharedState, err: RunnerError) {
    let mut slot = shared.failure.lock().unwrap();
    if slot.is_none() {
        *slot = Some(err);
    }
    shared.cancel.store(true, Ordering::Relaxed);
}
