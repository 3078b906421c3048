//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single `[n/9] ... PASS` line (visible with `--nocapture`).
//!
//! Wall-clock-sensitive tests serialize on a shared lock so parallel test
//! execution does not distort their measurements.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use inversat::cnf::{evaluate, Clause, Cnf, Literal, PartialAssignment};
use inversat::decomposition::{
    minimize, predict, CostModel, DecompositionSet, MinimizeStrategy, PredictionParams,
    PredictionStatus,
};
use inversat::encoder::{encode, Encoding};
use inversat::generators::{A51Spec, GeneratorSpec, LfsrSpec, ThresholdSpec};
use inversat::runner::{run_attack, AttackConfig, AttackMode, AttackStatus};
use inversat::solver::{
    solve, PropagationOutcome, Solver, SolverConfig, SolveStatus,
};

/// Serializes tests whose assertions depend on wall-clock measurements.
static TIMING_LOCK: Mutex<()> = Mutex::new(());

fn xorshift(state: &mut u64) -> u64 {
    *state ^= *state >> 12;
    *state ^= *state << 25;
    *state ^= *state >> 27;
    state.wrapping_mul(0x2545F4914F6CDD1D)
}

fn random_key(gen: &GeneratorSpec, seed: u64) -> Vec<bool> {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    (0..gen.key_len()).map(|_| xorshift(&mut state) & 1 == 1).collect()
}

fn index_to_key(index: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| index >> (len - 1 - i) & 1 == 1).collect()
}

fn reduced_threshold() -> GeneratorSpec {
    GeneratorSpec::Threshold(
        ThresholdSpec::new(vec![
            LfsrSpec::new(3, vec![1, 3]).unwrap(),
            LfsrSpec::new(4, vec![1, 4]).unwrap(),
            LfsrSpec::new(5, vec![2, 5]).unwrap(),
        ])
        .unwrap(),
    )
}

fn reduced_a51() -> GeneratorSpec {
    GeneratorSpec::A51(
        A51Spec::new(
            [
                LfsrSpec::new(5, vec![2, 5]).unwrap(),
                LfsrSpec::new(6, vec![1, 6]).unwrap(),
                LfsrSpec::new(7, vec![1, 7]).unwrap(),
            ],
            [3, 4, 4],
        )
        .unwrap(),
    )
}

/// For every key in the keyspace: the number of models of the bound
/// encoding, projected to the key variables, equals the number of keys that
/// produce the same keystream.
fn keystream_classes(gen: &GeneratorSpec, len: usize) -> HashMap<u64, Vec<u64>> {
    let n = gen.key_len();
    let mut classes: HashMap<u64, Vec<u64>> = HashMap::new();
    for index in 0..1u64 << n {
        let key = index_to_key(index, n);
        let stream = gen.keystream(&key, len).unwrap();
        let packed = stream.iter().fold(0u64, |acc, &b| acc << 1 | b as u64);
        classes.entry(packed).or_default().push(index);
    }
    classes
}

/// Enumerate the key-projected models of the encoding bound to one
/// keystream class and compare them with the brute-force preimage set.
fn check_class(
    enc: &Encoding,
    template: &Solver,
    len: usize,
    packed: u64,
    members: &[u64],
    label: &str,
) {
    let stream: Vec<bool> = (0..len).map(|i| packed >> (len - 1 - i) & 1 == 1).collect();
    let assumptions: Vec<(u32, bool)> = enc
        .keystream_vars
        .iter()
        .copied()
        .zip(stream.iter().copied())
        .collect();
    let mut solver = template.clone();
    let all = solver
        .enumerate_projected(&assumptions, &enc.key_vars, usize::MAX)
        .unwrap();
    assert!(!all.truncated);
    let mut found: Vec<u64> = all
        .models
        .iter()
        .map(|m| {
            enc.key_vars
                .iter()
                .fold(0u64, |acc, &v| acc << 1 | m.get(v).unwrap() as u64)
        })
        .collect();
    found.sort_unstable();
    let mut expected = members.to_vec();
    expected.sort_unstable();
    assert_eq!(found, expected, "{label}: preimage mismatch");
}

#[test]
fn criterion_1_parsimony_preimage_counts() {
    let start = Instant::now();

    // reduced threshold: every keystream class enumerated in full
    {
        let gen = reduced_threshold();
        let len = 2 * gen.key_len();
        let enc = encode(&gen, len).unwrap();
        let template = Solver::new(&enc.cnf, SolverConfig::input_guided());
        let classes = keystream_classes(&gen, len);
        for (packed, members) in &classes {
            check_class(&enc, &template, len, *packed, members, "reduced threshold 3/4/5");
        }
        println!(
            "  reduced threshold 3/4/5: {} classes enumerated, exact preimage sets",
            classes.len()
        );
    }

    // reduced A5/1: every key is covered by the propagation bijection (unit
    // propagation from the key determines a unique total model whose
    // keystream bits match the simulator, so bound-model counts equal
    // preimage counts class by class); a sample of classes is additionally
    // enumerated end to end
    {
        let gen = reduced_a51();
        let n = gen.key_len();
        let len = 2 * n;
        let enc = encode(&gen, len).unwrap();
        let template = Solver::new(&enc.cnf, SolverConfig::input_guided());
        let classes = keystream_classes(&gen, len);

        let mut prop = template.clone();
        for index in 0..1u64 << n {
            let key = index_to_key(index, n);
            let pairs: Vec<(u32, bool)> = enc
                .key_vars
                .iter()
                .copied()
                .zip(key.iter().copied())
                .collect();
            match prop.propagate_under(&pairs).unwrap() {
                PropagationOutcome::Extended(full) => {
                    assert_eq!(full.len() as u32, enc.cnf.num_vars(), "key {index}");
                    let stream = gen.keystream(&key, len).unwrap();
                    for (&v, &bit) in enc.keystream_vars.iter().zip(&stream) {
                        assert_eq!(full.get(v), Some(bit), "key {index}");
                    }
                    if index % 4096 == 0 {
                        let bound = enc.bound_cnf(&stream).unwrap();
                        assert!(evaluate(&bound, &full).unwrap(), "key {index}");
                    }
                }
                PropagationOutcome::Conflict => panic!("key {index}: honest key conflicts"),
            }
        }

        let mut entries: Vec<(&u64, &Vec<u64>)> = classes.iter().collect();
        entries.sort_by_key(|(packed, _)| **packed);
        let mut state = 0x1EE7u64;
        for _ in 0..200 {
            let (packed, members) = entries[(xorshift(&mut state) % entries.len() as u64) as usize];
            check_class(&enc, &template, len, *packed, members, "reduced A5/1 5/6/7");
        }
        println!(
            "  reduced A5/1 5/6/7: all {} keys covered by the propagation bijection; 200 of {} classes enumerated",
            1u64 << n,
            classes.len()
        );
    }

    println!(
        "[1/9] parsimony over full keyspaces PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_2_simulator_encoder_consistency() {
    let start = Instant::now();
    for name in ["a51", "threshold5", "summation4", "gifford"] {
        let gen = GeneratorSpec::by_name(name).unwrap();
        let len = 144;
        let enc = encode(&gen, len).unwrap();
        let mut template = Solver::new(&enc.cnf, SolverConfig::default());
        for seed in 0..1000u64 {
            let key = random_key(&gen, seed.wrapping_add(0xC2B2AE3D27D4EB4F));
            let stream = gen.keystream(&key, len).unwrap();
            // key and keystream together: propagation must totalize with no
            // conflict
            let pairs: Vec<(u32, bool)> = enc
                .key_vars
                .iter()
                .copied()
                .zip(key.iter().copied())
                .chain(
                    enc.keystream_vars
                        .iter()
                        .copied()
                        .zip(stream.iter().copied()),
                )
                .collect();
            match template.propagate_under(&pairs).unwrap() {
                PropagationOutcome::Extended(full) => {
                    assert_eq!(
                        full.len() as u32,
                        enc.cnf.num_vars(),
                        "{name} seed {seed}: propagation left variables open"
                    );
                    if seed < 10 {
                        // spot-check the honest assignment against the bound
                        // formula clause by clause
                        let bound = enc.bound_cnf(&stream).unwrap();
                        assert!(evaluate(&bound, &full).unwrap(), "{name} seed {seed}");
                    }
                }
                PropagationOutcome::Conflict => panic!("{name} seed {seed}: honest key conflicts"),
            }
            // from the key alone propagation must also totalize
            let key_only: Vec<(u32, bool)> = enc
                .key_vars
                .iter()
                .copied()
                .zip(key.iter().copied())
                .collect();
            match template.propagate_under(&key_only).unwrap() {
                PropagationOutcome::Extended(full) => {
                    for (&v, &bit) in enc.keystream_vars.iter().zip(&stream) {
                        assert_eq!(full.get(v), Some(bit), "{name} seed {seed}");
                    }
                }
                PropagationOutcome::Conflict => panic!("{name} seed {seed}: key-only conflict"),
            }
        }
        println!("  {name}: 1000 keys consistent");
    }
    println!(
        "[2/9] simulator/encoder consistency PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

fn stream_and_cell(enc: &Encoding, stream: &[bool], cell_bits: &[(u32, bool)]) -> Vec<(u32, bool)> {
    enc.keystream_vars
        .iter()
        .copied()
        .zip(stream.iter().copied())
        .chain(cell_bits.iter().copied())
        .collect()
}

#[test]
fn criterion_3_a51_correct_cell_under_60s() {
    let _guard = TIMING_LOCK.lock().unwrap();
    let start = Instant::now();
    let gen = GeneratorSpec::by_name("a51").unwrap();
    let enc = encode(&gen, 144).unwrap();
    let set = DecompositionSet::parse("1-9,20-30,42-52").unwrap();
    let mut template = Solver::new(&enc.cnf, SolverConfig::input_guided());
    template.set_max_time(Some(Duration::from_secs(60)));
    let mut times = Vec::new();
    for seed in 0..20u64 {
        let key = random_key(&gen, seed.wrapping_add(0x9E37));
        let stream = gen.keystream(&key, 144).unwrap();
        let cell_bits: Vec<(u32, bool)> = set
            .variables()
            .iter()
            .map(|&v| (v, key[v as usize - 1]))
            .collect();
        let pairs = stream_and_cell(&enc, &stream, &cell_bits);
        let cell_start = Instant::now();
        let result = template.solve_under(&pairs).unwrap();
        let elapsed = cell_start.elapsed();
        assert_eq!(result.status, SolveStatus::Sat, "seed {seed}");
        assert!(
            elapsed <= Duration::from_secs(60),
            "seed {seed}: {elapsed:?}"
        );
        let model = result.model.unwrap();
        let recovered = enc.key_from_model(&model).unwrap();
        assert_eq!(gen.keystream(&recovered, 144).unwrap(), stream, "seed {seed}");
        times.push(elapsed.as_secs_f64());
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    println!(
        "[3/9] correct A5/1 cell solved for 20 keys, mean {:.3}s per cell PASS ({:.1}s)",
        mean,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_4_random_cells_and_length_grid() {
    let _guard = TIMING_LOCK.lock().unwrap();
    let start = Instant::now();
    let gen = GeneratorSpec::by_name("a51").unwrap();
    let set = DecompositionSet::parse("1-9,20-30,42-52").unwrap();
    let key = random_key(&gen, 0xA5A5);

    // 200 random cells on the 144-bit instance, each within the default
    // budget
    let enc = encode(&gen, 144).unwrap();
    let stream = gen.keystream(&key, 144).unwrap();
    let mut template = Solver::new(&enc.cnf, SolverConfig::input_guided());
    template.set_max_time(Some(Duration::from_secs(60)));
    let mut state = 0xDEADBEEFu64;
    let mut total = 0.0f64;
    for i in 0..200 {
        let cell_index = xorshift(&mut state) & ((1 << 31) - 1);
        let cell = set.assignment_for(cell_index);
        let pairs: Vec<(u32, bool)> = enc
            .keystream_vars
            .iter()
            .copied()
            .zip(stream.iter().copied())
            .chain(cell.iter())
            .collect();
        let result = template.solve_under(&pairs).unwrap();
        assert_ne!(
            result.status,
            SolveStatus::BudgetExceeded,
            "cell {i} blew the budget"
        );
        total += result.stats.wall.as_secs_f64();
    }
    let mean_144 = total / 200.0;

    // the grid: mean over a smaller sample per keystream length
    println!("  len  mean_cell_seconds  est_family_seconds (d=31)");
    for len in [128usize, 144, 160, 176, 192] {
        let enc = encode(&gen, len).unwrap();
        let stream = gen.keystream(&key, len).unwrap();
        let mut solver = Solver::new(&enc.cnf, SolverConfig::input_guided());
        solver.set_max_time(Some(Duration::from_secs(60)));
        let mut state = (len as u64).wrapping_mul(0x9E3779B97F4A7C15);
        let mut total = 0.0f64;
        let mut capped = 0u32;
        let samples = 30;
        for _ in 0..samples {
            let cell = set.assignment_for(xorshift(&mut state) & ((1 << 31) - 1));
            let pairs: Vec<(u32, bool)> = enc
                .keystream_vars
                .iter()
                .copied()
                .zip(stream.iter().copied())
                .chain(cell.iter())
                .collect();
            let result = solver.solve_under(&pairs).unwrap();
            if result.status == SolveStatus::BudgetExceeded {
                capped += 1;
            }
            total += result.stats.wall.as_secs_f64();
        }
        let mean = total / samples as f64;
        assert!(mean > 0.0);
        println!(
            "  {len:>4} {mean:>18.6} {:>19.1}  (capped cells: {capped})",
            mean * (1u64 << 31) as f64
        );
    }
    println!(
        "[4/9] 200 random cells within budget, mean {:.4}s at len 144 PASS ({:.1}s)",
        mean_144,
        start.elapsed().as_secs_f64()
    );
}

fn toy_instance(len: usize) -> (GeneratorSpec, Cnf, DecompositionSet) {
    let gen = GeneratorSpec::Threshold(
        ThresholdSpec::new(vec![
            LfsrSpec::new(7, vec![1, 7]).unwrap(),
            LfsrSpec::new(8, vec![1, 5, 6, 8]).unwrap(),
            LfsrSpec::new(9, vec![4, 9]).unwrap(),
        ])
        .unwrap(),
    );
    let key = random_key(&gen, 0x1234);
    let stream = gen.keystream(&key, len).unwrap();
    let enc = encode(&gen, len).unwrap();
    let cnf = enc.bound_cnf(&stream).unwrap();
    let set = DecompositionSet::new((1..=16).collect()).unwrap();
    (gen, cnf, set)
}

/// Measured total sequential wall time over every cell of the family.
fn measure_full_enumeration(cnf: &Cnf, set: &DecompositionSet) -> f64 {
    let template = Solver::new(cnf, SolverConfig::input_guided());
    let mut total = 0.0;
    for index in 0..set.num_cells().unwrap() {
        let pairs: Vec<(u32, bool)> = set.assignment_for(index).iter().collect();
        let result = template.clone().solve_under(&pairs).unwrap();
        total += result.stats.wall.as_secs_f64();
    }
    total
}

#[test]
fn criterion_5_prediction_within_2x() {
    let _guard = TIMING_LOCK.lock().unwrap();
    let start = Instant::now();
    let (_, cnf, set) = toy_instance(32);
    let config = SolverConfig::input_guided();
    measure_full_enumeration(&cnf, &set); // warm-up pass
    let actual = measure_full_enumeration(&cnf, &set);
    for seed in 0..5u64 {
        let params = PredictionParams {
            q: 1000,
            r: 4096, // 2^16 cells force sampling
            g_budget: 1e9,
            seed,
            cost_model: CostModel::WallSeconds,
        };
        let outcome = predict(&cnf, &set, &params, &config).unwrap();
        assert_eq!(outcome.status, PredictionStatus::Estimated);
        let t = outcome.t.unwrap();
        let ratio = t / actual;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "seed {seed}: predicted {t:.4}s vs measured {actual:.4}s (ratio {ratio:.2})"
        );
        println!("  seed {seed}: predicted {t:.4}s, measured {actual:.4}s, ratio {ratio:.2}");
    }
    println!(
        "[5/9] prediction within 2x of full enumeration over 5 seeds PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_6_minimizer_sanity_and_dominated_abort() {
    let _guard = TIMING_LOCK.lock().unwrap();
    let start = Instant::now();
    let (_, cnf, set) = toy_instance(32);
    let config = SolverConfig::input_guided();
    measure_full_enumeration(&cnf, &set); // warm-up pass
    let params = PredictionParams {
        q: 1000,
        r: 4096,
        g_budget: 1e9,
        seed: 1,
        cost_model: CostModel::WallSeconds,
    };
    let (best, _, _) =
        minimize(&cnf, &set, MinimizeStrategy::RemoveLast, &params, &config).unwrap();

    // exhaustively time every candidate on the remove-last chain
    let mut chain_best = f64::INFINITY;
    let mut current = set.clone();
    loop {
        let measured = measure_full_enumeration(&cnf, &current);
        chain_best = chain_best.min(measured);
        if current.power() == 1 {
            break;
        }
        current = current.without(current.power() - 1).unwrap();
    }
    let best_measured = measure_full_enumeration(&cnf, &best);
    let ratio = best_measured / chain_best;
    assert!(
        ratio <= 2.0,
        "returned set measures {best_measured:.4}s vs best chain candidate {chain_best:.4}s"
    );
    println!(
        "  minimize returned {} ({best_measured:.5}s); best chain candidate {chain_best:.5}s, ratio {ratio:.2}",
        best.format()
    );

    // oversized initial set under the conflict cost model: the full set
    // propagates conflict-free (T = 0), so any candidate that conflicts at
    // all is cut off as dominated
    let conflict_params = PredictionParams {
        q: 200,
        r: 4096,
        g_budget: 1e9,
        seed: 2,
        cost_model: CostModel::Conflicts,
    };
    let (_, _, trace) = minimize(
        &cnf,
        &set,
        MinimizeStrategy::GreedyBest,
        &conflict_params,
        &config,
    )
    .unwrap();
    let dominated = trace
        .records
        .iter()
        .filter(|r| r.abort == inversat::decomposition::AbortReason::Dominated)
        .count();
    assert!(dominated >= 1, "expected at least one dominated abort");
    println!("  dominated aborts in greedy trace: {dominated}");
    println!(
        "[6/9] minimizer sanity PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_7_parallel_attack_scaling() {
    let _guard = TIMING_LOCK.lock().unwrap();
    let start = Instant::now();
    let gen = GeneratorSpec::Threshold(
        ThresholdSpec::new(vec![
            LfsrSpec::new(7, vec![1, 7]).unwrap(),
            LfsrSpec::new(8, vec![1, 5, 6, 8]).unwrap(),
            LfsrSpec::new(9, vec![4, 9]).unwrap(),
        ])
        .unwrap(),
    );
    assert_eq!(gen.key_len(), 24);
    let key = random_key(&gen, 0xFEED);
    let len = 48;
    let stream = gen.keystream(&key, len).unwrap();
    let enc = encode(&gen, len).unwrap();
    let set = DecompositionSet::new((1..=10).collect()).unwrap();

    let mut reference: Option<Vec<Vec<bool>>> = None;
    let mut walls: HashMap<usize, f64> = HashMap::new();
    for workers in [1usize, 2, 4, 8] {
        // first-SAT: planted key recovered
        let first = run_attack(
            &enc,
            &gen,
            &stream,
            &set,
            &AttackConfig {
                workers,
                k: 4,
                mode: AttackMode::FirstSat,
                ..AttackConfig::default()
            },
        )
        .unwrap();
        assert_eq!(first.status, AttackStatus::KeyFound, "M={workers}");
        assert!(first.keys.contains(&key), "M={workers}");

        // find-all: identical result sets, timed
        let all_start = Instant::now();
        let all = run_attack(
            &enc,
            &gen,
            &stream,
            &set,
            &AttackConfig {
                workers,
                k: 4,
                mode: AttackMode::FindAll,
                ..AttackConfig::default()
            },
        )
        .unwrap();
        let wall = all_start.elapsed().as_secs_f64();
        walls.insert(workers, wall);
        assert!(all.keys.contains(&key), "M={workers}");
        assert_eq!(all.cells_solved, 1024, "M={workers}");
        match &reference {
            None => reference = Some(all.keys),
            Some(r) => assert_eq!(&all.keys, r, "M={workers}: scheduling variance"),
        }
        println!("  M={workers}: find-all wall {wall:.3}s");
    }
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if cores >= 8 {
        assert!(
            walls[&8] <= 0.5 * walls[&1],
            "M=8 wall {:.3}s vs M=1 wall {:.3}s",
            walls[&8], walls[&1]
        );
        println!(
            "[7/9] parallel attack: planted key at every M, invariant result sets, {:.1}x speedup at M=8 PASS ({:.1}s)",
            walls[&1] / walls[&8],
            start.elapsed().as_secs_f64()
        );
    } else {
        // the speedup bound needs real cores; correctness and scheduling
        // invariance were still checked at every M
        println!(
            "[7/9] parallel attack: planted key at every M, invariant result sets; speedup bound skipped ({cores} core(s) available) PASS ({:.1}s)",
            start.elapsed().as_secs_f64()
        );
    }
}

#[test]
fn criterion_8_collision_replay() {
    let start = Instant::now();
    let gen = GeneratorSpec::by_name("a51").unwrap();
    let original = gen.parse_key("2C1A7:3D35B9:EEAF2").unwrap();
    let coll_a = gen.parse_key("2C1A7:3E9ADC:EEAF2").unwrap();
    let coll_b = gen.parse_key("2C1A7:3D35B9:77579").unwrap();
    let reference = gen.keystream(&original, 144).unwrap();
    assert_eq!(reference, gen.keystream(&coll_a, 144).unwrap());
    assert_eq!(reference, gen.keystream(&coll_b, 144).unwrap());
    assert_ne!(original, coll_a);
    assert_ne!(original, coll_b);
    println!(
        "[8/9] documented A5/1 collision triple agrees on 144 bits PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

// --- independent truth-table oracle for criterion 9 ------------------------

fn brute_force_sat(c: &Cnf) -> bool {
    let n = c.num_vars() as usize;
    let blocks: u64 = if n <= 6 { 1 } else { 1 << (n - 6) };
    let tail_mask: u64 = if n < 6 { (1u64 << (1 << n)) - 1 } else { !0 };
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    for block in 0..blocks {
        let mut word = tail_mask;
        for clause in c.clauses() {
            let mut cv = 0u64;
            for lit in clause.literals() {
                let i = (lit.var() - 1) as usize;
                let pat = if i < 6 {
                    PATTERNS[i]
                } else if block >> (i - 6) & 1 == 1 {
                    !0u64
                } else {
                    0u64
                };
                cv |= if lit.is_positive() { pat } else { !pat };
            }
            word &= cv;
            if word == 0 {
                break;
            }
        }
        if word != 0 {
            return true;
        }
    }
    false
}

fn random_3cnf(num_vars: u32, num_clauses: usize, seed: u64) -> Cnf {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    let mut clauses = Vec::with_capacity(num_clauses);
    while clauses.len() < num_clauses {
        let mut vars: Vec<u32> = Vec::new();
        while vars.len() < 3 {
            let v = (xorshift(&mut state) % num_vars as u64) as u32 + 1;
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let lits: Vec<Literal> = vars
            .into_iter()
            .map(|v| Literal::new(v, xorshift(&mut state) & 1 == 1))
            .collect();
        clauses.push(Clause::new(lits).unwrap());
    }
    Cnf::new(num_vars, clauses, vec![]).unwrap()
}

#[test]
fn criterion_9_solver_oracle_equivalence() {
    let start = Instant::now();
    let results: Vec<(u64, bool, bool)> = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let n = 8 + (seed % 13) as u32; // 8..=20 variables
            let m = (n as f64 * 4.26).round() as usize;
            let c = random_3cnf(n, m, seed.wrapping_add(0xFACE));
            let expected = brute_force_sat(&c);
            let got = solve(&c, &PartialAssignment::new(), SolverConfig::default())
                .unwrap()
                .status
                == SolveStatus::Sat;
            (seed, expected, got)
        })
        .collect();
    for (seed, expected, got) in &results {
        assert_eq!(got, expected, "seed {seed}");
    }
    println!(
        "[9/9] 10000 random 3-CNFs agree with the truth-table oracle PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

