//! Bit-exact reference simulators for the keystream generators under attack:
//! A5/1, the threshold generator, the summation generator and the Gifford
//! generator. These are the ground truth the encoder and solver are checked
//! against, and the oracle used to verify every recovered key.
//!
//! Bit-numbering convention: key bit x_1 is the most significant bit of the
//! first register's hex rendering; registers are listed in order. A register
//! shifts by moving each cell one position up (new cell i = old cell i-1) and
//! feeding the XOR of its tap cells into cell 1; the output tap is the last
//! (highest-index) cell. The keystream bit of A5/1 is computed from the
//! post-shift state.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("state length {got} does not match register length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("register length must be >= 2, got {0}")]
    BadRegisterLength(usize),
    #[error("tap {tap} outside register of length {length}")]
    BadTap { tap: usize, length: usize },
    #[error("clocking cell {cell} outside register of length {length}")]
    BadClockCell { cell: usize, length: usize },
    #[error("threshold generator needs an odd number >= 3 of registers, got {0}")]
    BadRegisterCount(usize),
    #[error("key has {got} bits, expected {expected}")]
    BadKeyLength { expected: usize, got: usize },
    #[error("bad hex key field {field:?}: {msg}")]
    BadKeyHex { field: String, msg: String },
    #[error("unknown generator name {0:?}")]
    UnknownName(String),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("bad spec file: {0}")]
    BadSpecFile(String),
}

/// One LFSR: its length in cells and the exponents of its connection
/// polynomial (excluding the constant term).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    length: usize,
    taps: Vec<usize>,
}

impl LfsrSpec {
    pub fn new(length: usize, taps: Vec<usize>) -> Result<LfsrSpec, GenError> {
        if length < 2 {
            return Err(GenError::BadRegisterLength(length));
        }
        for &tap in &taps {
            if tap < 1 || tap > length {
                return Err(GenError::BadTap { tap, length });
            }
        }
        Ok(LfsrSpec { length, taps })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn taps(&self) -> &[usize] {
        &self.taps
    }

    fn feedback(&self, state: &[bool]) -> bool {
        self.taps.iter().fold(false, |acc, &t| acc ^ state[t - 1])
    }

    fn step_in_place(&self, state: &mut [bool]) {
        let fb = self.feedback(state);
        for i in (1..state.len()).rev() {
            state[i] = state[i - 1];
        }
        state[0] = fb;
    }
}

/// Single LFSR step: new cell 1 = XOR of the tap cells, every other cell
/// takes the value of its predecessor.
pub fn lfsr_step(state: &[bool], spec: &LfsrSpec) -> Result<Vec<bool>, GenError> {
    if state.len() != spec.length() {
        return Err(GenError::LengthMismatch {
            expected: spec.length(),
            got: state.len(),
        });
    }
    let mut next = state.to_vec();
    spec.step_in_place(&mut next);
    Ok(next)
}

pub fn majority(a: bool, b: bool, c: bool) -> bool {
    (a && b) || (a && c) || (b && c)
}

/// An A5/1-style generator: three majority-clocked LFSRs. `clock_cells` are
/// 1-based cell indices local to each register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct A51Spec {
    registers: [LfsrSpec; 3],
    clock_cells: [usize; 3],
}

impl A51Spec {
    pub fn new(registers: [LfsrSpec; 3], clock_cells: [usize; 3]) -> Result<A51Spec, GenError> {
        for (reg, &cell) in registers.iter().zip(&clock_cells) {
            if cell < 1 || cell > reg.length() {
                return Err(GenError::BadClockCell {
                    cell,
                    length: reg.length(),
                });
            }
        }
        Ok(A51Spec {
            registers,
            clock_cells,
        })
    }

    /// The GSM A5/1 generator: registers of 19/22/23 cells, clocking bits at
    /// global key positions 9, 30 and 52.
    pub fn standard() -> A51Spec {
        A51Spec::new(
            [
                LfsrSpec::new(19, vec![14, 17, 18, 19]).unwrap(),
                LfsrSpec::new(22, vec![21, 22]).unwrap(),
                LfsrSpec::new(23, vec![8, 21, 22, 23]).unwrap(),
            ],
            [9, 11, 11],
        )
        .unwrap()
    }

    pub fn registers(&self) -> &[LfsrSpec; 3] {
        &self.registers
    }

    pub fn clock_cells(&self) -> &[usize; 3] {
        &self.clock_cells
    }

    pub fn key_len(&self) -> usize {
        self.registers.iter().map(|r| r.length()).sum()
    }
}

pub fn a51_keystream(spec: &A51Spec, key: &[bool], len: usize) -> Result<Vec<bool>, GenError> {
    let expected = spec.key_len();
    if key.len() != expected {
        return Err(GenError::BadKeyLength {
            expected,
            got: key.len(),
        });
    }
    let mut states: Vec<Vec<bool>> = Vec::with_capacity(3);
    let mut offset = 0;
    for reg in spec.registers.iter() {
        states.push(key[offset..offset + reg.length()].to_vec());
        offset += reg.length();
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let cb: Vec<bool> = (0..3)
            .map(|r| states[r][spec.clock_cells[r] - 1])
            .collect();
        let m = majority(cb[0], cb[1], cb[2]);
        for r in 0..3 {
            if cb[r] == m {
                spec.registers[r].step_in_place(&mut states[r]);
            }
        }
        let bit = (0..3).fold(false, |acc, r| acc ^ *states[r].last().unwrap());
        out.push(bit);
    }
    Ok(out)
}

/// Threshold generator: R simultaneously shifted LFSRs feeding a majority
/// vote of their output cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdSpec {
    registers: Vec<LfsrSpec>,
}

impl ThresholdSpec {
    pub fn new(registers: Vec<LfsrSpec>) -> Result<ThresholdSpec, GenError> {
        if registers.len() < 3 || registers.len() % 2 == 0 {
            return Err(GenError::BadRegisterCount(registers.len()));
        }
        Ok(ThresholdSpec { registers })
    }

    /// The five-register threshold generator attacked in the experiments
    /// (80-bit key).
    pub fn five_lfsr() -> ThresholdSpec {
        ThresholdSpec::new(vec![
            LfsrSpec::new(13, vec![5, 8, 10, 13]).unwrap(),
            LfsrSpec::new(15, vec![1, 3, 13, 15]).unwrap(),
            LfsrSpec::new(16, vec![2, 8, 13, 16]).unwrap(),
            LfsrSpec::new(17, vec![2, 4, 6, 17]).unwrap(),
            LfsrSpec::new(19, vec![14, 17, 18, 19]).unwrap(),
        ])
        .unwrap()
    }

    pub fn registers(&self) -> &[LfsrSpec] {
        &self.registers
    }

    pub fn key_len(&self) -> usize {
        self.registers.iter().map(|r| r.length()).sum()
    }
}

pub fn threshold_keystream(
    spec: &ThresholdSpec,
    key: &[bool],
    len: usize,
) -> Result<Vec<bool>, GenError> {
    let expected = spec.key_len();
    if key.len() != expected {
        return Err(GenError::BadKeyLength {
            expected,
            got: key.len(),
        });
    }
    let mut states = split_fills(key, &spec.registers);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut ones = 0usize;
        for (reg, state) in spec.registers.iter().zip(states.iter_mut()) {
            reg.step_in_place(state);
            if *state.last().unwrap() {
                ones += 1;
            }
        }
        out.push(2 * ones > spec.registers.len());
    }
    Ok(out)
}

/// Summation generator: R simultaneously shifted LFSRs plus a carry
/// register. The key is the carry bits (most significant first) followed by
/// the register fills.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummationSpec {
    registers: Vec<LfsrSpec>,
}

impl SummationSpec {
    pub fn new(registers: Vec<LfsrSpec>) -> Result<SummationSpec, GenError> {
        if registers.len() < 2 {
            return Err(GenError::BadRegisterCount(registers.len()));
        }
        Ok(SummationSpec { registers })
    }

    /// The four-register summation generator attacked in the experiments
    /// (63-bit key: 2 carry bits + 61 register bits).
    pub fn four_lfsr() -> SummationSpec {
        SummationSpec::new(vec![
            LfsrSpec::new(13, vec![1, 3, 4, 13]).unwrap(),
            LfsrSpec::new(15, vec![2, 4, 5, 15]).unwrap(),
            LfsrSpec::new(16, vec![1, 4, 6, 16]).unwrap(),
            LfsrSpec::new(17, vec![2, 4, 6, 17]).unwrap(),
        ])
        .unwrap()
    }

    pub fn registers(&self) -> &[LfsrSpec] {
        &self.registers
    }

    /// Number of carry bits: ceil(log2(R)).
    pub fn carry_width(&self) -> usize {
        let r = self.registers.len();
        (usize::BITS - (r - 1).leading_zeros()) as usize
    }

    pub fn key_len(&self) -> usize {
        self.carry_width() + self.registers.iter().map(|r| r.length()).sum::<usize>()
    }
}

/// One summation step: S = sum(z) + carry, output S mod 2, new carry
/// floor(S/2).
pub(crate) fn summation_step(zs: &[bool], carry: u32) -> (bool, u32) {
    let s = zs.iter().filter(|&&z| z).count() as u32 + carry;
    (s & 1 == 1, s >> 1)
}

pub fn summation_keystream(
    spec: &SummationSpec,
    key: &[bool],
    len: usize,
) -> Result<Vec<bool>, GenError> {
    let expected = spec.key_len();
    if key.len() != expected {
        return Err(GenError::BadKeyLength {
            expected,
            got: key.len(),
        });
    }
    let w = spec.carry_width();
    let mut carry = key[..w].iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
    let mut states = split_fills(&key[w..], &spec.registers);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut zs = Vec::with_capacity(spec.registers.len());
        for (reg, state) in spec.registers.iter().zip(states.iter_mut()) {
            reg.step_in_place(state);
            zs.push(*state.last().unwrap());
        }
        let (bit, next_carry) = summation_step(&zs, carry);
        out.push(bit);
        carry = next_carry;
    }
    Ok(out)
}

fn split_fills(bits: &[bool], registers: &[LfsrSpec]) -> Vec<Vec<bool>> {
    let mut states = Vec::with_capacity(registers.len());
    let mut offset = 0;
    for reg in registers {
        states.push(bits[offset..offset + reg.length()].to_vec());
        offset += reg.length();
    }
    states
}

/// Sticky right shift by one bit: the high-order bit is preserved.
pub(crate) fn sticky_shr(x: u8) -> u8 {
    (x >> 1) | (x & 0x80)
}

/// Gifford generator: eight byte cells, a byte-wise feedback shift and a
/// 16x16 multiplier output function. 64-bit key, one output byte per step.
pub fn gifford_keystream(key: &[bool], len_bytes: usize) -> Result<Vec<u8>, GenError> {
    if key.len() != 64 {
        return Err(GenError::BadKeyLength {
            expected: 64,
            got: key.len(),
        });
    }
    let mut cells = [0u8; 8];
    for (i, chunk) in key.chunks(8).enumerate() {
        cells[i] = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
    }
    let mut out = Vec::with_capacity(len_bytes);
    for _ in 0..len_bytes {
        let a = u32::from(u16::from_be_bytes([cells[0], cells[2]]));
        let b = u32::from(u16::from_be_bytes([cells[4], cells[7]]));
        let product = a * b;
        out.push((product >> 8) as u8);
        let feedback = cells[0] ^ sticky_shr(cells[1]) ^ (cells[7] << 1);
        for i in (1..8).rev() {
            cells[i] = cells[i - 1];
        }
        cells[0] = feedback;
    }
    Ok(out)
}

/// A generator description the whole pipeline is parameterized over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    A51(A51Spec),
    Threshold(ThresholdSpec),
    Summation(SummationSpec),
    Gifford,
}

impl GeneratorSpec {
    /// Built-in named generators.
    pub fn by_name(name: &str) -> Result<GeneratorSpec, GenError> {
        match name {
            "a51" => Ok(GeneratorSpec::A51(A51Spec::standard())),
            "threshold5" => Ok(GeneratorSpec::Threshold(ThresholdSpec::five_lfsr())),
            "summation4" => Ok(GeneratorSpec::Summation(SummationSpec::four_lfsr())),
            "gifford" => Ok(GeneratorSpec::Gifford),
            other => Err(GenError::UnknownName(other.to_string())),
        }
    }

    pub fn key_len(&self) -> usize {
        match self {
            GeneratorSpec::A51(s) => s.key_len(),
            GeneratorSpec::Threshold(s) => s.key_len(),
            GeneratorSpec::Summation(s) => s.key_len(),
            GeneratorSpec::Gifford => 64,
        }
    }

    /// First `len` keystream bits for the given key. Gifford output bytes are
    /// flattened most significant bit first.
    pub fn keystream(&self, key: &[bool], len: usize) -> Result<Vec<bool>, GenError> {
        match self {
            GeneratorSpec::A51(s) => a51_keystream(s, key, len),
            GeneratorSpec::Threshold(s) => threshold_keystream(s, key, len),
            GeneratorSpec::Summation(s) => summation_keystream(s, key, len),
            GeneratorSpec::Gifford => {
                let bytes = gifford_keystream(key, len.div_ceil(8))?;
                Ok(bytes_to_bits(&bytes)[..len].to_vec())
            }
        }
    }

    /// Parses a colon-separated MSB-first hex key. One field per register;
    /// the summation generator takes the carry as an extra leading field and
    /// Gifford takes a single 16-digit field.
    pub fn parse_key(&self, text: &str) -> Result<Vec<bool>, GenError> {
        let fields: Vec<&str> = text.split(':').collect();
        let widths = self.key_field_widths();
        if fields.len() != widths.len() {
            return Err(GenError::BadKeyHex {
                field: text.to_string(),
                msg: format!("expected {} colon-separated fields, got {}", widths.len(), fields.len()),
            });
        }
        let mut bits = Vec::with_capacity(self.key_len());
        for (field, &width) in fields.iter().zip(&widths) {
            bits.extend(hex_field_to_bits(field, width)?);
        }
        Ok(bits)
    }

    pub fn format_key(&self, key: &[bool]) -> Result<String, GenError> {
        if key.len() != self.key_len() {
            return Err(GenError::BadKeyLength {
                expected: self.key_len(),
                got: key.len(),
            });
        }
        let mut fields = Vec::new();
        let mut offset = 0;
        for width in self.key_field_widths() {
            fields.push(bits_to_hex_field(&key[offset..offset + width]));
            offset += width;
        }
        Ok(fields.join(":"))
    }

    fn key_field_widths(&self) -> Vec<usize> {
        match self {
            GeneratorSpec::A51(s) => s.registers().iter().map(|r| r.length()).collect(),
            GeneratorSpec::Threshold(s) => s.registers().iter().map(|r| r.length()).collect(),
            GeneratorSpec::Summation(s) => {
                let mut widths = vec![s.carry_width()];
                widths.extend(s.registers().iter().map(|r| r.length()));
                widths
            }
            GeneratorSpec::Gifford => vec![64],
        }
    }
}

/// True iff simulating `key` reproduces the observed keystream prefix.
pub fn verify_key(gen: &GeneratorSpec, key: &[bool], keystream: &[bool]) -> bool {
    match gen.keystream(key, keystream.len()) {
        Ok(stream) => stream == keystream,
        Err(_) => false,
    }
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            bits.push((b >> i) & 1 == 1);
        }
    }
    bits
}

fn hex_field_to_bits(field: &str, width: usize) -> Result<Vec<bool>, GenError> {
    let value = u128::from_str_radix(field, 16).map_err(|e| GenError::BadKeyHex {
        field: field.to_string(),
        msg: e.to_string(),
    })?;
    if width < 128 && value >> width != 0 {
        return Err(GenError::BadKeyHex {
            field: field.to_string(),
            msg: format!("value does not fit in {width} bits"),
        });
    }
    Ok((0..width).map(|i| (value >> (width - 1 - i)) & 1 == 1).collect())
}

fn bits_to_hex_field(bits: &[bool]) -> String {
    let value = bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128);
    format!("{value:X}")
}

// ---------------------------------------------------------------------------
// Spec files

#[derive(Deserialize)]
struct SpecFile {
    kind: String,
    #[serde(default)]
    registers: Vec<RegisterDef>,
}

#[derive(Deserialize)]
struct RegisterDef {
    length: usize,
    taps: Vec<usize>,
    clock: Option<usize>,
}

impl GeneratorSpec {
    /// Reads a generator description from TOML text:
    ///
    /// ```toml
    /// kind = "a51"          # a51 | threshold | summation | gifford
    /// [[registers]]
    /// length = 19
    /// taps = [14, 17, 18, 19]
    /// clock = 9             # a51 only: local clocking cell
    /// ```
    pub fn from_toml_str(text: &str) -> Result<GeneratorSpec, GenError> {
        let file: SpecFile =
            toml::from_str(text).map_err(|e| GenError::BadSpecFile(e.to_string()))?;
        let regs: Result<Vec<LfsrSpec>, GenError> = file
            .registers
            .iter()
            .map(|r| LfsrSpec::new(r.length, r.taps.clone()))
            .collect();
        let regs = regs?;
        match file.kind.as_str() {
            "a51" => {
                if regs.len() != 3 {
                    return Err(GenError::BadSpec(format!(
                        "a51 needs exactly 3 registers, got {}",
                        regs.len()
                    )));
                }
                let clocks: Vec<usize> = file
                    .registers
                    .iter()
                    .map(|r| r.clock.ok_or_else(|| GenError::BadSpec("a51 registers need a `clock` cell".into())))
                    .collect::<Result<_, _>>()?;
                let mut it = regs.into_iter();
                let spec = A51Spec::new(
                    [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
                    [clocks[0], clocks[1], clocks[2]],
                )?;
                Ok(GeneratorSpec::A51(spec))
            }
            "threshold" => Ok(GeneratorSpec::Threshold(ThresholdSpec::new(regs)?)),
            "summation" => Ok(GeneratorSpec::Summation(SummationSpec::new(regs)?)),
            "gifford" => Ok(GeneratorSpec::Gifford),
            other => Err(GenError::BadSpec(format!("unknown kind {other:?}"))),
        }
    }
}
