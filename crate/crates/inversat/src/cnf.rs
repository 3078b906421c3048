//! Propositional core: literals, clauses, CNF formulas, partial assignments,
//! substitution and evaluation.
//!
//! Variables are 1-based throughout, matching the DIMACS numbering. All types
//! are immutable values after construction and can be shared freely between
//! worker threads.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable index must be >= 1")]
    ZeroVariable,
    #[error("clause contains repeated literal {0}")]
    RepeatedLiteral(i32),
    #[error("clause contains complementary literals on variable {0}")]
    ComplementaryLiterals(u32),
    #[error("literal references variable {var} but formula has only {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("input variables must be distinct and <= num_vars")]
    BadInputVars,
    #[error("variable {0} is already bound")]
    AlreadyBound(u32),
    #[error("binding references variable {var} beyond num_vars {num_vars}")]
    BindingOutOfRange { var: u32, num_vars: u32 },
    #[error("variable {0} is unbound in a total evaluation")]
    Unbound(u32),
}

/// A variable occurrence with a polarity. `var` is always >= 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Literal {
        assert!(var >= 1, "variable index must be >= 1");
        Literal { var, positive }
    }

    pub fn positive(var: u32) -> Literal {
        Literal::new(var, true)
    }

    pub fn negative(var: u32) -> Literal {
        Literal::new(var, false)
    }

    pub fn from_dimacs(code: i32) -> Result<Literal, CnfError> {
        if code == 0 {
            return Err(CnfError::ZeroVariable);
        }
        Ok(Literal {
            var: code.unsigned_abs(),
            positive: code > 0,
        })
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Literal {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn dimacs(self) -> i32 {
        if self.positive {
            self.var as i32
        } else {
            -(self.var as i32)
        }
    }

    /// Value of the literal under `value` assigned to its variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dimacs())
    }
}

/// A disjunction of literals without repeated or complementary pairs.
/// The empty clause is permitted and is trivially unsatisfiable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Clause, CnfError> {
        let mut seen: Vec<(u32, bool)> = Vec::with_capacity(literals.len());
        for lit in &literals {
            for &(v, pos) in &seen {
                if v == lit.var() {
                    if pos == lit.is_positive() {
                        return Err(CnfError::RepeatedLiteral(lit.dimacs()));
                    }
                    return Err(CnfError::ComplementaryLiterals(v));
                }
            }
            seen.push((lit.var(), lit.is_positive()));
        }
        Ok(Clause { literals })
    }

    pub fn empty() -> Clause {
        Clause { literals: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{:?}", lit)?;
        }
        write!(f, ")")
    }
}

/// A CNF formula together with the marked set of input variables of the
/// encoded function.
#[derive(Clone, PartialEq, Eq)]
pub struct Cnf {
    clauses: Vec<Clause>,
    num_vars: u32,
    input_vars: Vec<u32>,
}

impl Cnf {
    pub fn new(num_vars: u32, clauses: Vec<Clause>, input_vars: Vec<u32>) -> Result<Cnf, CnfError> {
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var() > num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: lit.var(),
                        num_vars,
                    });
                }
            }
        }
        let mut sorted = input_vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != input_vars.len() || input_vars.iter().any(|&v| v == 0 || v > num_vars) {
            return Err(CnfError::BadInputVars);
        }
        Ok(Cnf {
            clauses,
            num_vars,
            input_vars,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn input_vars(&self) -> &[u32] {
        &self.input_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }
}

impl fmt::Debug for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cnf[{} vars, {} clauses]", self.num_vars, self.clauses.len())
    }
}

/// A map from variables to Boolean values; each variable bound at most once.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    bindings: BTreeMap<u32, bool>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    pub fn bind(&mut self, var: u32, value: bool) -> Result<(), CnfError> {
        if var == 0 {
            return Err(CnfError::ZeroVariable);
        }
        if self.bindings.contains_key(&var) {
            return Err(CnfError::AlreadyBound(var));
        }
        self.bindings.insert(var, value);
        Ok(())
    }

    pub fn from_pairs<I: IntoIterator<Item = (u32, bool)>>(
        pairs: I,
    ) -> Result<PartialAssignment, CnfError> {
        let mut pa = PartialAssignment::new();
        for (var, value) in pairs {
            pa.bind(var, value)?;
        }
        Ok(pa)
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.bindings.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.bindings.iter().map(|(&v, &b)| (v, b))
    }
}

impl fmt::Debug for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.bindings.iter()).finish()
    }
}

/// Substitutes bound values into `cnf`: satisfied clauses are removed and
/// falsified literals are deleted. Variable numbering is preserved. If any
/// clause is falsified entirely, the result is the canonical CNF consisting
/// of a single empty clause.
pub fn substitute(cnf: &Cnf, pa: &PartialAssignment) -> Result<Cnf, CnfError> {
    for (var, _) in pa.iter() {
        if var > cnf.num_vars() {
            return Err(CnfError::BindingOutOfRange {
                var,
                num_vars: cnf.num_vars(),
            });
        }
    }
    let mut out = Vec::with_capacity(cnf.num_clauses());
    for clause in cnf.clauses() {
        let mut satisfied = false;
        let mut remaining = Vec::with_capacity(clause.len());
        for &lit in clause.literals() {
            match pa.get(lit.var()) {
                Some(value) if lit.eval(value) => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None => remaining.push(lit),
            }
        }
        if satisfied {
            continue;
        }
        if remaining.is_empty() {
            return Cnf::new(
                cnf.num_vars(),
                vec![Clause::empty()],
                cnf.input_vars().to_vec(),
            );
        }
        out.push(Clause { literals: remaining });
    }
    Cnf::new(cnf.num_vars(), out, cnf.input_vars().to_vec())
}

/// Evaluates `cnf` under a total assignment of its occurring variables.
pub fn evaluate(cnf: &Cnf, full: &PartialAssignment) -> Result<bool, CnfError> {
    for clause in cnf.clauses() {
        let mut clause_value = false;
        for &lit in clause.literals() {
            match full.get(lit.var()) {
                Some(value) => {
                    if lit.eval(value) {
                        clause_value = true;
                        break;
                    }
                }
                None => return Err(CnfError::Unbound(lit.var())),
            }
        }
        if !clause_value {
            return Ok(false);
        }
    }
    Ok(true)
}
