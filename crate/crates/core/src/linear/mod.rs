//! Fixed-length linear programs over a small register machine, evolved to
//! sort integer lists.
//!
//! A program is a fixed-length sequence of statements from one of three
//! statement sets. The machine has `v` writable variables numbered
//! `1..=v`, plus two read-only ones: variable 0 always reads 0 and
//! variable `v+1` always reads the length of the list being sorted.
//! Variable values index into the list; out-of-range indices make list
//! operations no-ops (see [`vm`]).
//!
//! Programs can be dumped to and loaded from a line-oriented text format,
//! one statement per line with `v<i>` variable operands and a bare integer
//! jump target:
//!
//! ```text
//! # statement_set 1
//! # variables 2
//! For v1 v0 v3
//! For v2 v0 v3
//! CompareSwap v1 v2
//! ```

mod fitness;
mod text;
pub mod vm;

pub use fitness::{
    forward_distance, normalized_metric, reverse_distance, sort_fitness, SortContext,
    SortingSystem, DEFAULT_LIST_SIZES,
};
pub use text::{parse_program, program_to_text};
pub use vm::{execute, loop_budget, BudgetModel, ExecResult, HaltReason};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::EvoRng;

/// One statement. Operands are variable indices in `[0, v+1]` except for
/// `GoTo`, whose target is a statement index in `[0, program_length]`
/// (one past the end halts).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Statement {
    /// Compare the list entries indexed by the two variable values and
    /// swap them if the first is larger.
    CompareSwap { a: usize, b: usize },
    /// C-style loop: copy `init`'s value into `var`, then treat every
    /// following statement as the loop body.
    For { var: usize, init: usize, limit: usize },
    /// Execute the next statement only if `value(a) < value(b)`.
    IfVarLess { a: usize, b: usize },
    IncrementVar { var: usize },
    AssignVar { dst: usize, src: usize },
    GoTo { target: usize },
    /// Execute the next statement only if `list[value(a)] < list[value(b)]`
    /// (false on any out-of-range index).
    IfListLess { a: usize, b: usize },
    /// Unconditionally exchange the two indexed list entries.
    Swap { a: usize, b: usize },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Opcode {
    CompareSwap,
    For,
    IfVarLess,
    IncrementVar,
    AssignVar,
    GoTo,
    IfListLess,
    Swap,
}

impl Statement {
    pub fn opcode(&self) -> Opcode {
        match self {
            Statement::CompareSwap { .. } => Opcode::CompareSwap,
            Statement::For { .. } => Opcode::For,
            Statement::IfVarLess { .. } => Opcode::IfVarLess,
            Statement::IncrementVar { .. } => Opcode::IncrementVar,
            Statement::AssignVar { .. } => Opcode::AssignVar,
            Statement::GoTo { .. } => Opcode::GoTo,
            Statement::IfListLess { .. } => Opcode::IfListLess,
            Statement::Swap { .. } => Opcode::Swap,
        }
    }
}

/// The three statement vocabularies.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StatementSet {
    Set1,
    Set2,
    Set3,
}

impl StatementSet {
    pub fn opcodes(self) -> &'static [Opcode] {
        match self {
            StatementSet::Set1 => &[Opcode::CompareSwap, Opcode::For],
            StatementSet::Set2 => &[
                Opcode::IfVarLess,
                Opcode::IncrementVar,
                Opcode::AssignVar,
                Opcode::GoTo,
                Opcode::CompareSwap,
            ],
            StatementSet::Set3 => &[
                Opcode::IfVarLess,
                Opcode::IncrementVar,
                Opcode::AssignVar,
                Opcode::GoTo,
                Opcode::IfListLess,
                Opcode::Swap,
            ],
        }
    }

    pub fn index(self) -> u32 {
        match self {
            StatementSet::Set1 => 1,
            StatementSet::Set2 => 2,
            StatementSet::Set3 => 3,
        }
    }

    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(StatementSet::Set1),
            2 => Ok(StatementSet::Set2),
            3 => Ok(StatementSet::Set3),
            other => Err(Error::InvalidArgument(format!(
                "statement set must be 1, 2 or 3, got {other}"
            ))),
        }
    }

    /// Default program length used with this set.
    pub fn default_program_length(self) -> usize {
        match self {
            StatementSet::Set1 => 5,
            StatementSet::Set2 => 25,
            StatementSet::Set3 => 30,
        }
    }
}

/// Fixed-length program genome.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearProgram {
    pub statements: Vec<Statement>,
    pub statement_set: StatementSet,
    /// Number of writable variables `v`; readable indices run over
    /// `[0, v+1]`.
    pub writable_vars: usize,
}

impl LinearProgram {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Check the genome invariants: opcode closure under the declared set,
    /// operand ranges, writable write positions, jump targets.
    pub fn validate(&self) -> Result<()> {
        let v = self.writable_vars;
        let len = self.statements.len();
        if len == 0 {
            return Err(Error::InvalidArgument("program must have at least one statement".into()));
        }
        if v == 0 {
            return Err(Error::InvalidArgument("at least one writable variable required".into()));
        }
        let read_ok = |i: usize| i <= v + 1;
        let write_ok = |i: usize| (1..=v).contains(&i);
        for (pos, s) in self.statements.iter().enumerate() {
            if !self.statement_set.opcodes().contains(&s.opcode()) {
                return Err(Error::InvalidArgument(format!(
                    "statement {pos}: opcode {:?} not in set {}",
                    s.opcode(),
                    self.statement_set.index()
                )));
            }
            let ok = match *s {
                Statement::CompareSwap { a, b }
                | Statement::IfVarLess { a, b }
                | Statement::IfListLess { a, b }
                | Statement::Swap { a, b } => read_ok(a) && read_ok(b),
                Statement::For { var, init, limit } => {
                    write_ok(var) && read_ok(init) && read_ok(limit)
                }
                Statement::IncrementVar { var } => write_ok(var),
                Statement::AssignVar { dst, src } => write_ok(dst) && read_ok(src),
                Statement::GoTo { target } => target <= len,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "statement {pos}: operand out of range: {s:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Draw a statement uniformly: opcode uniform over the set, operands
/// uniform over their legal ranges (write positions over `[1, v]`, reads
/// over `[0, v+1]`, jump targets over `[0, program_length]`).
pub fn random_statement(
    set: StatementSet,
    program_length: usize,
    v: usize,
    rng: &mut EvoRng,
) -> Statement {
    let opcodes = set.opcodes();
    let opcode = opcodes[rng.gen_range(0..opcodes.len())];
    let read = |rng: &mut EvoRng| rng.gen_range(0..=v + 1);
    let write = |rng: &mut EvoRng| rng.gen_range(1..=v);
    match opcode {
        // TEMP CALIBRATION: CS operands writable-only
        Opcode::CompareSwap => Statement::CompareSwap { a: write(rng), b: write(rng) },
        Opcode::For => Statement::For {
            var: write(rng),
            init: read(rng),
            limit: read(rng),
        },
        Opcode::IfVarLess => Statement::IfVarLess { a: read(rng), b: read(rng) },
        Opcode::IncrementVar => Statement::IncrementVar { var: write(rng) },
        Opcode::AssignVar => Statement::AssignVar { dst: write(rng), src: read(rng) },
        Opcode::GoTo => Statement::GoTo { target: rng.gen_range(0..=program_length) },
        Opcode::IfListLess => Statement::IfListLess { a: read(rng), b: read(rng) },
        Opcode::Swap => Statement::Swap { a: read(rng), b: read(rng) },
    }
}

/// Draw a whole random program.
pub fn random_program(
    set: StatementSet,
    length: usize,
    v: usize,
    rng: &mut EvoRng,
) -> LinearProgram {
    debug_assert!(length >= 1 && v >= 1);
    LinearProgram {
        statements: (0..length)
            .map(|_| random_statement(set, length, v, rng))
            .collect(),
        statement_set: set,
        writable_vars: v,
    }
}

/// One-point crossover with the breeding-event mutation folded in: a cut
/// index is drawn uniformly in `[1, length-1]` and the suffixes are
/// exchanged; then, with probability `mutation_prob`, one uniformly
/// chosen statement of one uniformly chosen child mutates into a fresh
/// random statement. Length-1 programs have no valid cut; their children
/// start as copies of the parents.
pub fn crossover_linear(
    a: &LinearProgram,
    b: &LinearProgram,
    mutation_prob: f64,
    rng: &mut EvoRng,
) -> (LinearProgram, LinearProgram) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.statement_set, b.statement_set);
    let len = a.len();
    let (mut c1, mut c2) = (a.clone(), b.clone());
    if len >= 2 {
        let cut = rng.gen_range(1..len);
        c1.statements[cut..].copy_from_slice(&b.statements[cut..]);
        c2.statements[cut..].copy_from_slice(&a.statements[cut..]);
    }
    if mutation_prob > 0.0 && rng.gen::<f64>() < mutation_prob {
        let child = if rng.gen::<bool>() { &mut c1 } else { &mut c2 };
        let i = rng.gen_range(0..len);
        child.statements[i] =
            random_statement(child.statement_set, len, child.writable_vars, rng);
    }
    (c1, c2)
}

/// The three-statement exchange sort that motivates the execution budget:
/// two nested full-range loops around one `CompareSwap`. With the
/// operand-ordered comparison, the ascending direction needs the inner
/// loop variable as the first operand.
pub fn canonical_bubble_sort(v: usize) -> LinearProgram {
    assert!(v >= 2, "the canonical sort needs two loop variables");
    LinearProgram {
        statements: vec![
            Statement::For { var: 1, init: 0, limit: v + 1 },
            Statement::For { var: 2, init: 0, limit: v + 1 },
            Statement::CompareSwap { a: 2, b: 1 },
        ],
        statement_set: StatementSet::Set1,
        writable_vars: v,
    }
}
