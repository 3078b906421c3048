//! DIMACS CNF reading and writing.
//!
//! Beyond the plain format, two comment annotations are understood:
//! `c input <name> <var>` marks an input variable of the encoded function and
//! `c keystream <t> <var>` ties a keystream position to a CNF variable.
//! `parse_dimacs` / `write_dimacs` round-trip on the [`Cnf`] data model.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, CnfError, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {msg}")]
    BadHeader { line: usize, msg: String },
    #[error("line {line}: expected integer token, got {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range (header declares {num_vars} variables)")]
    LiteralOutOfRange { line: usize, lit: i32, num_vars: u32 },
    #[error("line {line}: clause is not terminated by 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: malformed clause: {source}")]
    BadClause { line: usize, source: CnfError },
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("line {line}: bad annotation: {msg}")]
    BadAnnotation { line: usize, msg: String },
    #[error("invalid formula: {0}")]
    Invalid(#[from] CnfError),
}

/// A parsed DIMACS file: the formula plus any keystream annotations.
#[derive(Debug, Clone)]
pub struct ParsedDimacs {
    pub cnf: Cnf,
    /// Pairs of (keystream position, variable), in file order.
    pub keystream_vars: Vec<(usize, u32)>,
}

pub fn parse_dimacs(text: &[u8]) -> Result<Cnf, DimacsError> {
    Ok(parse_dimacs_full(text)?.cnf)
}

pub fn parse_dimacs_full(text: &[u8]) -> Result<ParsedDimacs, DimacsError> {
    let text = String::from_utf8_lossy(text);
    let mut header: Option<(u32, usize)> = None;
    let mut input_vars: Vec<u32> = Vec::new();
    let mut keystream_vars: Vec<(usize, u32)> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut open_clause_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('c') {
            parse_annotation(comment.trim(), line_no, &mut input_vars, &mut keystream_vars)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(DimacsError::BadHeader {
                    line: line_no,
                    msg: format!("expected `p cnf <vars> <clauses>`, got {line:?}"),
                });
            }
            let vars = fields[1].parse::<u32>().map_err(|_| DimacsError::BadHeader {
                line: line_no,
                msg: format!("bad variable count {:?}", fields[1]),
            })?;
            let ncls = fields[2].parse::<usize>().map_err(|_| DimacsError::BadHeader {
                line: line_no,
                msg: format!("bad clause count {:?}", fields[2]),
            })?;
            header = Some((vars, ncls));
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::BadHeader {
            line: line_no,
            msg: "clause data before `p cnf` header".into(),
        })?;
        for token in line.split_whitespace() {
            let code = token.parse::<i32>().map_err(|_| DimacsError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if code == 0 {
                let lits = std::mem::take(&mut current);
                let clause = Clause::new(lits)
                    .map_err(|source| DimacsError::BadClause { line: line_no, source })?;
                clauses.push(clause);
            } else {
                if code.unsigned_abs() > num_vars {
                    return Err(DimacsError::LiteralOutOfRange {
                        line: line_no,
                        lit: code,
                        num_vars,
                    });
                }
                if current.is_empty() {
                    open_clause_line = line_no;
                }
                current.push(Literal::from_dimacs(code).expect("nonzero"));
            }
        }
    }

    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator {
            line: open_clause_line,
        });
    }
    let (num_vars, declared) = header.ok_or(DimacsError::BadHeader {
        line: 1,
        msg: "missing `p cnf` header".into(),
    })?;
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    let cnf = Cnf::new(num_vars, clauses, input_vars)?;
    Ok(ParsedDimacs { cnf, keystream_vars })
}

fn parse_annotation(
    comment: &str,
    line: usize,
    input_vars: &mut Vec<u32>,
    keystream_vars: &mut Vec<(usize, u32)>,
) -> Result<(), DimacsError> {
    let fields: Vec<&str> = comment.split_whitespace().collect();
    match fields.first() {
        Some(&"input") => {
            if fields.len() != 3 {
                return Err(DimacsError::BadAnnotation {
                    line,
                    msg: format!("expected `c input <name> <var>`, got {comment:?}"),
                });
            }
            let var = fields[2].parse::<u32>().map_err(|_| DimacsError::BadAnnotation {
                line,
                msg: format!("bad variable {:?}", fields[2]),
            })?;
            input_vars.push(var);
        }
        Some(&"keystream") => {
            if fields.len() != 3 {
                return Err(DimacsError::BadAnnotation {
                    line,
                    msg: format!("expected `c keystream <t> <var>`, got {comment:?}"),
                });
            }
            let t = fields[1].parse::<usize>().map_err(|_| DimacsError::BadAnnotation {
                line,
                msg: format!("bad position {:?}", fields[1]),
            })?;
            let var = fields[2].parse::<u32>().map_err(|_| DimacsError::BadAnnotation {
                line,
                msg: format!("bad variable {:?}", fields[2]),
            })?;
            keystream_vars.push((t, var));
        }
        _ => {} // ordinary comment
    }
    Ok(())
}

pub fn write_dimacs(cnf: &Cnf) -> Vec<u8> {
    write_dimacs_annotated(cnf, &[])
}

/// Writes a formula with `c input` lines for every input variable and one
/// `c keystream <t> <var>` line per supplied pair.
pub fn write_dimacs_annotated(cnf: &Cnf, keystream_vars: &[(usize, u32)]) -> Vec<u8> {
    let mut out = String::new();
    for &var in cnf.input_vars() {
        writeln!(out, "c input x{var} {var}").unwrap();
    }
    for &(t, var) in keystream_vars {
        writeln!(out, "c keystream {t} {var}").unwrap();
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.num_clauses()).unwrap();
    for clause in cnf.clauses() {
        for lit in clause.literals() {
            write!(out, "{} ", lit.dimacs()).unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_basic_formula() {
        let cnf = parse_dimacs(b"p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(cnf.num_vars(), 2);
        assert_eq!(cnf.num_clauses(), 1);
        assert_eq!(cnf.clauses()[0].literals()[0].dimacs(), 1);
        assert_eq!(cnf.clauses()[0].literals()[1].dimacs(), -2);
    }

    #[test]
    fn parses_empty_clause_list() {
        let cnf = parse_dimacs(b"p cnf 1 0\n").unwrap();
        assert_eq!(cnf.num_vars(), 1);
        assert_eq!(cnf.num_clauses(), 0);
    }

    #[test]
    fn parses_input_annotations() {
        let cnf = parse_dimacs(b"c input x2 2\nc input x1 1\np cnf 2 1\n1 2 0\n").unwrap();
        assert_eq!(cnf.input_vars(), &[2, 1]);
    }

    #[test]
    fn reports_line_numbers() {
        assert!(matches!(
            parse_dimacs(b"p cnf nope 1\n"),
            Err(DimacsError::BadHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs(b"p cnf 2 1\n1 5 0\n"),
            Err(DimacsError::LiteralOutOfRange { line: 2, lit: 5, .. })
        ));
        assert!(matches!(
            parse_dimacs(b"p cnf 2 1\n1 -2\n"),
            Err(DimacsError::MissingTerminator { line: 2 })
        ));
        assert!(matches!(
            parse_dimacs(b"p cnf 2 2\n1 0\n"),
            Err(DimacsError::ClauseCountMismatch { declared: 2, found: 1 })
        ));
    }

    #[test]
    fn writes_expected_text() {
        let cnf = Cnf::new(
            2,
            vec![Clause::new(vec![Literal::positive(1), Literal::negative(2)]).unwrap()],
            vec![],
        )
        .unwrap();
        assert_eq!(write_dimacs(&cnf), b"p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn keystream_annotations_round_trip() {
        let cnf = Cnf::new(
            3,
            vec![Clause::new(vec![Literal::positive(3)]).unwrap()],
            vec![1],
        )
        .unwrap();
        let text = write_dimacs_annotated(&cnf, &[(1, 3)]);
        let parsed = parse_dimacs_full(&text).unwrap();
        assert_eq!(parsed.cnf, cnf);
        assert_eq!(parsed.keystream_vars, vec![(1, 3)]);
    }

    fn arb_cnf() -> impl Strategy<Value = Cnf> {
        (2u32..10).prop_flat_map(|num_vars| {
            let clause = proptest::collection::vec((1..=num_vars, any::<bool>()), 1..5)
                .prop_filter_map("distinct vars", move |lits| {
                    let mut vars: Vec<u32> = lits.iter().map(|&(v, _)| v).collect();
                    vars.sort_unstable();
                    vars.dedup();
                    if vars.len() != lits.len() {
                        return None;
                    }
                    Clause::new(lits.into_iter().map(|(v, p)| Literal::new(v, p)).collect()).ok()
                });
            (
                proptest::collection::vec(clause, 0..12),
                proptest::sample::subsequence((1..=num_vars).collect::<Vec<u32>>(), 0..3),
            )
                .prop_map(move |(clauses, inputs)| Cnf::new(num_vars, clauses, inputs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn parse_write_round_trip(cnf in arb_cnf()) {
            let text = write_dimacs(&cnf);
            let reparsed = parse_dimacs(&text).unwrap();
            prop_assert_eq!(reparsed, cnf);
        }
    }
}
