//! Propositional encodings of the keystream generators.
//!
//! The encoding is built gate by gate with the Tseitin transformation: each
//! gate output gets a fresh auxiliary variable defined by a handful of
//! clauses. Constants are folded away before a gate is emitted, so a partly
//! known state never produces dead variables. Every auxiliary variable is
//! functionally determined by the key variables through unit propagation
//! alone — fixing the key and propagating assigns every variable of the
//! formula without search.
//!
//! Variable layout: key variables `1..=n` (also recorded as the formula's
//! input variables), keystream variables `n+1..=n+L`, auxiliaries above
//! those. Keystream variables are tied to the circuit outputs with
//! equivalence clauses so that observed bits can be assumed directly.

use thiserror::Error;

use crate::cnf::{Clause, Cnf, CnfError, Literal, PartialAssignment};
use crate::dimacs::{parse_dimacs_full, write_dimacs_annotated, DimacsError};
use crate::generators::{A51Spec, GeneratorSpec, SummationSpec, ThresholdSpec};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("keystream length must be >= 1")]
    EmptyKeystream,
    #[error("keystream has {got} bits but the encoding expects {expected}")]
    KeystreamLengthMismatch { expected: usize, got: usize },
    #[error("DIMACS text lacks keystream annotations")]
    MissingAnnotations,
    #[error("DIMACS keystream annotations are not contiguous from position 0")]
    BadAnnotations,
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// A signal in the circuit: either a known constant or a (possibly negated)
/// variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wire {
    Const(bool),
    Lit(Literal),
}

impl Wire {
    fn negated(self) -> Wire {
        match self {
            Wire::Const(b) => Wire::Const(!b),
            Wire::Lit(l) => Wire::Lit(l.negated()),
        }
    }
}

/// Emits Tseitin gates into a growing clause list.
struct Builder {
    next_var: u32,
    clauses: Vec<Clause>,
    aux_count: u32,
}

impl Builder {
    fn new(first_aux_var: u32) -> Builder {
        Builder {
            next_var: first_aux_var,
            clauses: Vec::new(),
            aux_count: 0,
        }
    }

    fn fresh(&mut self) -> Literal {
        let v = self.next_var;
        self.next_var += 1;
        self.aux_count += 1;
        Literal::positive(v)
    }

    /// Adds a clause over wires; constants fold (a true constant satisfies
    /// the clause, false constants are dropped).
    fn clause(&mut self, wires: &[Wire]) {
        let mut lits = Vec::with_capacity(wires.len());
        for &w in wires {
            match w {
                Wire::Const(true) => return,
                Wire::Const(false) => {}
                Wire::Lit(l) => lits.push(l),
            }
        }
        debug_assert!(!lits.is_empty(), "gate clause folded to empty");
        self.clauses.push(Clause::new(lits).expect("gate clause is well formed"));
    }

    fn xor2(&mut self, a: Wire, b: Wire) -> Wire {
        match (a, b) {
            (Wire::Const(x), w) | (w, Wire::Const(x)) => {
                if x {
                    w.negated()
                } else {
                    w
                }
            }
            (Wire::Lit(la), Wire::Lit(lb)) => {
                if la == lb {
                    return Wire::Const(false);
                }
                if la == lb.negated() {
                    return Wire::Const(true);
                }
                let z = Wire::Lit(self.fresh());
                self.clause(&[a.negated(), b.negated(), z.negated()]);
                self.clause(&[a, b, z.negated()]);
                self.clause(&[a, b.negated(), z]);
                self.clause(&[a.negated(), b, z]);
                z
            }
        }
    }

    fn xor_many(&mut self, wires: &[Wire]) -> Wire {
        wires
            .iter()
            .copied()
            .fold(Wire::Const(false), |acc, w| self.xor2(acc, w))
    }

    fn and2(&mut self, a: Wire, b: Wire) -> Wire {
        match (a, b) {
            (Wire::Const(true), w) | (w, Wire::Const(true)) => w,
            (Wire::Const(false), _) | (_, Wire::Const(false)) => Wire::Const(false),
            (Wire::Lit(la), Wire::Lit(lb)) => {
                if la == lb {
                    return a;
                }
                if la == lb.negated() {
                    return Wire::Const(false);
                }
                let z = Wire::Lit(self.fresh());
                self.clause(&[a.negated(), b.negated(), z]);
                self.clause(&[a, z.negated()]);
                self.clause(&[b, z.negated()]);
                z
            }
        }
    }

    /// z = if s then a else b.
    fn mux(&mut self, s: Wire, a: Wire, b: Wire) -> Wire {
        match s {
            Wire::Const(true) => return a,
            Wire::Const(false) => return b,
            Wire::Lit(_) => {}
        }
        if a == b {
            return a;
        }
        if let (Wire::Const(x), Wire::Const(y)) = (a, b) {
            debug_assert_ne!(x, y);
            return if x { s } else { s.negated() };
        }
        let z = Wire::Lit(self.fresh());
        self.clause(&[s.negated(), a.negated(), z]);
        self.clause(&[s.negated(), a, z.negated()]);
        self.clause(&[s, b.negated(), z]);
        self.clause(&[s, b, z.negated()]);
        z
    }

    /// z = [at least `threshold` of `wires` are true].
    fn at_least(&mut self, wires: &[Wire], threshold: usize) -> Wire {
        let mut lits: Vec<Wire> = Vec::new();
        let mut need = threshold as isize;
        for &w in wires {
            match w {
                Wire::Const(true) => need -= 1,
                Wire::Const(false) => {}
                Wire::Lit(_) => lits.push(w),
            }
        }
        if need <= 0 {
            return Wire::Const(true);
        }
        let k = need as usize;
        let m = lits.len();
        if k > m {
            return Wire::Const(false);
        }
        if m == 1 {
            return lits[0];
        }
        let z = Wire::Lit(self.fresh());
        // any k true force z
        for_each_subset(m, k, &mut |subset| {
            let mut c: Vec<Wire> = subset.iter().map(|&i| lits[i].negated()).collect();
            c.push(z);
            self.clauses.push(wires_to_clause(&c));
        });
        // any m-k+1 false force not-z
        for_each_subset(m, m - k + 1, &mut |subset| {
            let mut c: Vec<Wire> = subset.iter().map(|&i| lits[i]).collect();
            c.push(z.negated());
            self.clauses.push(wires_to_clause(&c));
        });
        z
    }

    /// Majority vote over an odd number of wires.
    fn majority(&mut self, wires: &[Wire]) -> Wire {
        debug_assert!(wires.len() % 2 == 1);
        self.at_least(wires, wires.len() / 2 + 1)
    }

    /// Full-adder sum of `a + b`, numbers as little-endian wire vectors.
    fn ripple_add(&mut self, a: &[Wire], b: &[Wire]) -> Vec<Wire> {
        let width = a.len().max(b.len());
        let mut out = Vec::with_capacity(width + 1);
        let mut carry = Wire::Const(false);
        for i in 0..width {
            let x = a.get(i).copied().unwrap_or(Wire::Const(false));
            let y = b.get(i).copied().unwrap_or(Wire::Const(false));
            let sum = self.xor_many(&[x, y, carry]);
            carry = self.at_least(&[x, y, carry], 2);
            out.push(sum);
        }
        out.push(carry);
        out
    }

    /// Binary count of set bits, little-endian.
    fn popcount(&mut self, bits: &[Wire]) -> Vec<Wire> {
        let mut acc: Vec<Wire> = Vec::new();
        for &bit in bits {
            let mut carry = bit;
            for slot in acc.iter_mut() {
                let s = self.xor2(*slot, carry);
                carry = self.and2(*slot, carry);
                *slot = s;
            }
            acc.push(carry);
        }
        acc
    }

    /// Shift-and-add product of two little-endian numbers.
    fn multiply(&mut self, a: &[Wire], b: &[Wire]) -> Vec<Wire> {
        let mut acc: Vec<Wire> = vec![Wire::Const(false); a.len() + b.len()];
        for (k, &ak) in a.iter().enumerate() {
            if ak == Wire::Const(false) {
                continue;
            }
            let partial: Vec<Wire> = b.iter().map(|&bj| self.and2(ak, bj)).collect();
            let shifted_sum = self.ripple_add(&acc[k..], &partial);
            for (i, w) in shifted_sum.into_iter().enumerate() {
                if k + i < acc.len() {
                    acc[k + i] = w;
                }
            }
        }
        acc
    }

    /// Forces `var` to equal `wire`.
    fn tie(&mut self, var: u32, wire: Wire) {
        let v = Wire::Lit(Literal::positive(var));
        match wire {
            Wire::Const(true) => self.clause(&[v]),
            Wire::Const(false) => self.clause(&[v.negated()]),
            Wire::Lit(_) => {
                self.clause(&[v.negated(), wire]);
                self.clause(&[v, wire.negated()]);
            }
        }
    }
}

fn wires_to_clause(wires: &[Wire]) -> Clause {
    let lits: Vec<Literal> = wires
        .iter()
        .map(|w| match w {
            Wire::Lit(l) => *l,
            Wire::Const(_) => unreachable!("constant in subset clause"),
        })
        .collect();
    Clause::new(lits).expect("subset clause is well formed")
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut chosen = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for i in start..n {
            if n - i < k - chosen.len() {
                break;
            }
            chosen.push(i);
            rec(i + 1, n, k, chosen, f);
            chosen.pop();
        }
    }
    rec(0, n, k, &mut chosen, f);
}

/// A generator encoded over the first `L` keystream bits.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub cnf: Cnf,
    /// Key variables, `1..=n`, in key-bit order.
    pub key_vars: Vec<u32>,
    /// One variable per keystream position, `n+1..=n+L`.
    pub keystream_vars: Vec<u32>,
    pub aux_count: u32,
}

impl Encoding {
    /// Assignment binding the keystream variables to observed bits.
    pub fn bind_keystream(&self, bits: &[bool]) -> Result<PartialAssignment, EncodeError> {
        if bits.len() != self.keystream_vars.len() {
            return Err(EncodeError::KeystreamLengthMismatch {
                expected: self.keystream_vars.len(),
                got: bits.len(),
            });
        }
        Ok(PartialAssignment::from_pairs(
            self.keystream_vars.iter().copied().zip(bits.iter().copied()),
        )?)
    }

    /// The encoding with the observed keystream fixed: the same formula plus
    /// one unit clause per keystream bit.
    pub fn bound_cnf(&self, bits: &[bool]) -> Result<Cnf, EncodeError> {
        if bits.len() != self.keystream_vars.len() {
            return Err(EncodeError::KeystreamLengthMismatch {
                expected: self.keystream_vars.len(),
                got: bits.len(),
            });
        }
        let mut clauses = self.cnf.clauses().to_vec();
        for (&var, &bit) in self.keystream_vars.iter().zip(bits) {
            clauses.push(Clause::new(vec![Literal::new(var, bit)]).expect("unit clause"));
        }
        Ok(Cnf::new(
            self.cnf.num_vars(),
            clauses,
            self.cnf.input_vars().to_vec(),
        )?)
    }

    /// Reads key bits out of a total model.
    pub fn key_from_model(&self, model: &PartialAssignment) -> Option<Vec<bool>> {
        self.key_vars.iter().map(|&v| model.get(v)).collect()
    }

    pub fn to_dimacs(&self) -> Vec<u8> {
        let annotations: Vec<(usize, u32)> = self
            .keystream_vars
            .iter()
            .copied()
            .enumerate()
            .collect();
        write_dimacs_annotated(&self.cnf, &annotations)
    }

    pub fn from_dimacs(text: &[u8]) -> Result<Encoding, EncodeError> {
        let parsed = parse_dimacs_full(text)?;
        if parsed.keystream_vars.is_empty() {
            return Err(EncodeError::MissingAnnotations);
        }
        let mut keystream = parsed.keystream_vars.clone();
        keystream.sort_unstable();
        let contiguous = keystream
            .iter()
            .enumerate()
            .all(|(i, &(t, _))| t == i);
        if !contiguous {
            return Err(EncodeError::BadAnnotations);
        }
        let key_vars = parsed.cnf.input_vars().to_vec();
        let keystream_vars: Vec<u32> = keystream.into_iter().map(|(_, v)| v).collect();
        let aux_count = parsed
            .cnf
            .num_vars()
            .saturating_sub((key_vars.len() + keystream_vars.len()) as u32);
        Ok(Encoding {
            cnf: parsed.cnf,
            key_vars,
            keystream_vars,
            aux_count,
        })
    }
}

/// Encodes the first `len` keystream bits of `gen` as a CNF formula.
pub fn encode(gen: &GeneratorSpec, len: usize) -> Result<Encoding, EncodeError> {
    if len == 0 {
        return Err(EncodeError::EmptyKeystream);
    }
    let n = gen.key_len() as u32;
    let key_vars: Vec<u32> = (1..=n).collect();
    let keystream_vars: Vec<u32> = (n + 1..=n + len as u32).collect();
    let mut builder = Builder::new(n + len as u32 + 1);
    let outputs = match gen {
        GeneratorSpec::A51(spec) => a51_outputs(&mut builder, spec, len),
        GeneratorSpec::Threshold(spec) => threshold_outputs(&mut builder, spec, len),
        GeneratorSpec::Summation(spec) => summation_outputs(&mut builder, spec, len),
        GeneratorSpec::Gifford => gifford_outputs(&mut builder, len),
    };
    debug_assert_eq!(outputs.len(), len);
    for (&var, wire) in keystream_vars.iter().zip(outputs) {
        builder.tie(var, wire);
    }
    let num_vars = builder.next_var - 1;
    let cnf = Cnf::new(num_vars, builder.clauses, key_vars.clone())?;
    Ok(Encoding {
        cnf,
        key_vars,
        keystream_vars,
        aux_count: builder.aux_count,
    })
}

/// Key bits as wires, one register fill per entry, mirroring the simulator's
/// key layout.
fn key_fills(lengths: &[usize], first_var: u32) -> Vec<Vec<Wire>> {
    let mut fills = Vec::with_capacity(lengths.len());
    let mut var = first_var;
    for &len in lengths {
        fills.push(
            (0..len)
                .map(|i| Wire::Lit(Literal::positive(var + i as u32)))
                .collect(),
        );
        var += len as u32;
    }
    fills
}

fn lfsr_feedback(builder: &mut Builder, state: &[Wire], taps: &[usize]) -> Wire {
    let tapped: Vec<Wire> = taps.iter().map(|&t| state[t - 1]).collect();
    builder.xor_many(&tapped)
}

/// Unconditional LFSR shift.
fn lfsr_step(builder: &mut Builder, state: &mut Vec<Wire>, taps: &[usize]) {
    let fb = lfsr_feedback(builder, state, taps);
    state.rotate_right(1);
    state[0] = fb;
}

/// Conditional LFSR shift: shifts when `move_bit` holds, otherwise keeps the
/// old state.
fn lfsr_step_if(builder: &mut Builder, state: &mut Vec<Wire>, taps: &[usize], move_bit: Wire) {
    let fb = lfsr_feedback(builder, state, taps);
    let mut next = Vec::with_capacity(state.len());
    next.push(builder.mux(move_bit, fb, state[0]));
    for i in 1..state.len() {
        next.push(builder.mux(move_bit, state[i - 1], state[i]));
    }
    *state = next;
}

fn a51_outputs(builder: &mut Builder, spec: &A51Spec, len: usize) -> Vec<Wire> {
    let lengths: Vec<usize> = spec.registers().iter().map(|r| r.length()).collect();
    let mut states = key_fills(&lengths, 1);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let cb: Vec<Wire> = (0..3)
            .map(|r| states[r][spec.clock_cells()[r] - 1])
            .collect();
        let m = builder.majority(&cb);
        for r in 0..3 {
            // register r moves iff its clocking bit agrees with the majority
            let agree = builder.xor2(cb[r], m).negated();
            lfsr_step_if(builder, &mut states[r], spec.registers()[r].taps(), agree);
        }
        let lasts: Vec<Wire> = states.iter().map(|s| *s.last().unwrap()).collect();
        out.push(builder.xor_many(&lasts));
    }
    out
}

fn threshold_outputs(builder: &mut Builder, spec: &ThresholdSpec, len: usize) -> Vec<Wire> {
    let lengths: Vec<usize> = spec.registers().iter().map(|r| r.length()).collect();
    let mut states = key_fills(&lengths, 1);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        for (state, reg) in states.iter_mut().zip(spec.registers()) {
            lfsr_step(builder, state, reg.taps());
        }
        let lasts: Vec<Wire> = states.iter().map(|s| *s.last().unwrap()).collect();
        out.push(builder.majority(&lasts));
    }
    out
}

fn summation_outputs(builder: &mut Builder, spec: &SummationSpec, len: usize) -> Vec<Wire> {
    let w = spec.carry_width();
    // carry key bits are most significant first; the adder wants little-endian
    let mut carry: Vec<Wire> = (0..w)
        .map(|j| Wire::Lit(Literal::positive((w - j) as u32)))
        .collect();
    let lengths: Vec<usize> = spec.registers().iter().map(|r| r.length()).collect();
    let mut states = key_fills(&lengths, w as u32 + 1);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut zs = Vec::with_capacity(states.len());
        for (state, reg) in states.iter_mut().zip(spec.registers()) {
            lfsr_step(builder, state, reg.taps());
            zs.push(*state.last().unwrap());
        }
        let count = builder.popcount(&zs);
        let total = builder.ripple_add(&count, &carry);
        out.push(total[0]);
        carry = (0..w)
            .map(|j| total.get(1 + j).copied().unwrap_or(Wire::Const(false)))
            .collect();
    }
    out
}

fn gifford_outputs(builder: &mut Builder, len: usize) -> Vec<Wire> {
    // eight byte cells, each most significant bit first, filled from the key
    let mut cells: Vec<Vec<Wire>> = (0..8)
        .map(|i| {
            (0..8)
                .map(|j| Wire::Lit(Literal::positive((i * 8 + j) as u32 + 1)))
                .collect()
        })
        .collect();
    let steps = len.div_ceil(8);
    let mut bits = Vec::with_capacity(steps * 8);
    for _ in 0..steps {
        let a_le = to_little_endian(&cells[0], &cells[2]);
        let b_le = to_little_endian(&cells[4], &cells[7]);
        let product = builder.multiply(&a_le, &b_le);
        // output byte is bits 15..8 of the product, most significant first
        for k in (8..16).rev() {
            bits.push(product[k]);
        }
        let fb: Vec<Wire> = (0..8)
            .map(|j| {
                let sticky = if j == 0 { cells[1][0] } else { cells[1][j - 1] };
                let shifted = if j == 7 {
                    Wire::Const(false)
                } else {
                    cells[7][j + 1]
                };
                let t = builder.xor2(cells[0][j], sticky);
                builder.xor2(t, shifted)
            })
            .collect();
        cells.rotate_right(1);
        cells[0] = fb;
    }
    bits.truncate(len);
    bits
}

/// Concatenates a high and a low byte (both MSB-first) into a little-endian
/// 16-bit vector.
fn to_little_endian(high: &[Wire], low: &[Wire]) -> Vec<Wire> {
    let mut out = Vec::with_capacity(16);
    out.extend(low.iter().rev());
    out.extend(high.iter().rev());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::evaluate;
    use crate::solver::{propagate_only, PropagationOutcome};

    fn enumerate_truth_table(
        builder_inputs: usize,
        build: impl Fn(&mut Builder, &[Wire]) -> Wire,
        expected: impl Fn(&[bool]) -> bool,
    ) {
        for mask in 0..1u32 << builder_inputs {
            let values: Vec<bool> = (0..builder_inputs).map(|i| mask >> i & 1 == 1).collect();
            // symbolic: inputs are variables 1..=k, gate output checked by
            // propagation through the emitted clauses
            let mut builder = Builder::new(builder_inputs as u32 + 1);
            let wires: Vec<Wire> = (1..=builder_inputs as u32)
                .map(|v| Wire::Lit(Literal::positive(v)))
                .collect();
            let z = build(&mut builder, &wires);
            let num_vars = builder.next_var - 1;
            let cnf = Cnf::new(num_vars, builder.clauses, vec![]).unwrap();
            let pa = PartialAssignment::from_pairs(
                (1..=builder_inputs as u32).map(|v| (v, values[v as usize - 1])),
            )
            .unwrap();
            match propagate_only(&cnf, &pa).unwrap() {
                PropagationOutcome::Extended(full) => {
                    let got = match z {
                        Wire::Const(b) => b,
                        Wire::Lit(l) => {
                            let v = full
                                .get(l.var())
                                .expect("gate output determined by propagation");
                            l.eval(v)
                        }
                    };
                    assert_eq!(got, expected(&values), "inputs {values:?}");
                }
                PropagationOutcome::Conflict => panic!("gate clauses conflict on {values:?}"),
            }
        }
    }

    #[test]
    fn xor_gate_truth_table() {
        enumerate_truth_table(3, |b, w| b.xor_many(w), |v| {
            v.iter().fold(false, |a, &x| a ^ x)
        });
    }

    #[test]
    fn and_gate_truth_table() {
        enumerate_truth_table(2, |b, w| b.and2(w[0], w[1]), |v| v[0] && v[1]);
    }

    #[test]
    fn mux_gate_truth_table() {
        enumerate_truth_table(3, |b, w| b.mux(w[0], w[1], w[2]), |v| {
            if v[0] {
                v[1]
            } else {
                v[2]
            }
        });
    }

    #[test]
    fn majority_gate_truth_tables() {
        enumerate_truth_table(3, |b, w| b.majority(w), |v| {
            v.iter().filter(|&&x| x).count() >= 2
        });
        enumerate_truth_table(5, |b, w| b.majority(w), |v| {
            v.iter().filter(|&&x| x).count() >= 3
        });
    }

    #[test]
    fn popcount_and_adder_by_enumeration() {
        enumerate_truth_table(4, |b, w| {
            let c = b.popcount(w);
            c[1]
        }, |v| {
            let n = v.iter().filter(|&&x| x).count();
            n >> 1 & 1 == 1
        });
        enumerate_truth_table(4, |b, w| {
            let s = b.ripple_add(&w[..2], &w[2..]);
            s[1]
        }, |v| {
            let a = v[0] as usize + 2 * v[1] as usize;
            let b = v[2] as usize + 2 * v[3] as usize;
            (a + b) >> 1 & 1 == 1
        });
    }

    #[test]
    fn multiplier_matches_integer_product() {
        // 4x4 multiplier enumerated exhaustively
        for x in 0..16u32 {
            for y in 0..16u32 {
                let mut builder = Builder::new(9);
                let a: Vec<Wire> = (1..=4).map(|v| Wire::Lit(Literal::positive(v))).collect();
                let b: Vec<Wire> = (5..=8).map(|v| Wire::Lit(Literal::positive(v))).collect();
                let product = builder.multiply(&a, &b);
                let cnf = Cnf::new(builder.next_var - 1, builder.clauses, vec![]).unwrap();
                let pa = PartialAssignment::from_pairs(
                    (0..4)
                        .map(|i| (i as u32 + 1, x >> i & 1 == 1))
                        .chain((0..4).map(|i| (i as u32 + 5, y >> i & 1 == 1))),
                )
                .unwrap();
                let full = match propagate_only(&cnf, &pa).unwrap() {
                    PropagationOutcome::Extended(f) => f,
                    PropagationOutcome::Conflict => panic!("conflict for {x}*{y}"),
                };
                let got: u32 = product
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let bit = match w {
                            Wire::Const(b) => *b,
                            Wire::Lit(l) => l.eval(full.get(l.var()).unwrap()),
                        };
                        (bit as u32) << i
                    })
                    .sum();
                assert_eq!(got, x * y, "{x} * {y}");
            }
        }
    }

    fn test_key(gen: &GeneratorSpec, seed: u64) -> Vec<bool> {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        (0..gen.key_len())
            .map(|_| {
                state ^= state >> 12;
                state ^= state << 25;
                state ^= state >> 27;
                state.wrapping_mul(0x2545F4914F6CDD1D) & 1 == 1
            })
            .collect()
    }

    /// The honest assignment — key bits plus the simulated keystream plus
    /// the propagated gate values — satisfies the encoding, and unit
    /// propagation alone determines every variable.
    fn check_honest_assignment(gen: &GeneratorSpec, len: usize, seed: u64) {
        let enc = encode(gen, len).unwrap();
        let key = test_key(gen, seed);
        let stream = gen.keystream(&key, len).unwrap();
        let pa = PartialAssignment::from_pairs(
            enc.key_vars.iter().copied().zip(key.iter().copied()),
        )
        .unwrap();
        let full = match propagate_only(&enc.cnf, &pa).unwrap() {
            PropagationOutcome::Extended(f) => f,
            PropagationOutcome::Conflict => panic!("honest key conflicts"),
        };
        assert_eq!(
            full.len() as u32,
            enc.cnf.num_vars(),
            "propagation must fix every variable"
        );
        for (t, (&v, &bit)) in enc.keystream_vars.iter().zip(&stream).enumerate() {
            assert_eq!(full.get(v), Some(bit), "keystream bit {t}");
        }
        assert!(evaluate(&enc.cnf, &full).unwrap());
    }

    #[test]
    fn a51_encoding_matches_simulator() {
        let gen = GeneratorSpec::by_name("a51").unwrap();
        for seed in 0..5 {
            check_honest_assignment(&gen, 40, seed);
        }
    }

    #[test]
    fn threshold_encoding_matches_simulator() {
        let gen = GeneratorSpec::by_name("threshold5").unwrap();
        for seed in 0..5 {
            check_honest_assignment(&gen, 40, seed);
        }
    }

    #[test]
    fn summation_encoding_matches_simulator() {
        let gen = GeneratorSpec::by_name("summation4").unwrap();
        for seed in 0..5 {
            check_honest_assignment(&gen, 40, seed);
        }
    }

    #[test]
    fn gifford_encoding_matches_simulator() {
        let gen = GeneratorSpec::by_name("gifford").unwrap();
        for seed in 0..3 {
            check_honest_assignment(&gen, 24, seed);
        }
        // a length that is not a whole number of bytes
        check_honest_assignment(&gen, 13, 9);
    }

    #[test]
    fn keystream_binding_rejects_wrong_length() {
        let gen = GeneratorSpec::by_name("threshold5").unwrap();
        let enc = encode(&gen, 16).unwrap();
        assert!(matches!(
            enc.bind_keystream(&[true; 10]),
            Err(EncodeError::KeystreamLengthMismatch { expected: 16, got: 10 })
        ));
    }

    #[test]
    fn encode_rejects_empty_keystream() {
        let gen = GeneratorSpec::by_name("a51").unwrap();
        assert!(matches!(encode(&gen, 0), Err(EncodeError::EmptyKeystream)));
    }

    #[test]
    fn dimacs_round_trip_preserves_structure() {
        let gen = GeneratorSpec::by_name("summation4").unwrap();
        let enc = encode(&gen, 12).unwrap();
        let text = enc.to_dimacs();
        let back = Encoding::from_dimacs(&text).unwrap();
        assert_eq!(back.key_vars, enc.key_vars);
        assert_eq!(back.keystream_vars, enc.keystream_vars);
        assert_eq!(back.cnf.num_vars(), enc.cnf.num_vars());
        assert_eq!(back.cnf.num_clauses(), enc.cnf.num_clauses());
        assert_eq!(back.aux_count, enc.aux_count);
    }

    #[test]
    fn variable_layout_is_key_then_keystream_then_aux() {
        let gen = GeneratorSpec::by_name("threshold5").unwrap();
        let enc = encode(&gen, 8).unwrap();
        assert_eq!(enc.key_vars, (1..=80).collect::<Vec<u32>>());
        assert_eq!(enc.keystream_vars, (81..=88).collect::<Vec<u32>>());
        assert_eq!(
            enc.cnf.num_vars(),
            80 + 8 + enc.aux_count
        );
        assert_eq!(enc.cnf.input_vars(), &enc.key_vars[..]);
    }
}
