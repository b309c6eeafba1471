//! Statement interpreter with an execution budget.
//!
//! Execution model:
//!
//! * Writable variables start at 0. Variable 0 always reads 0, variable
//!   `v+1` always reads the list length; writes to either are no-ops.
//! * A `For` statement copies its init variable into the loop variable and
//!   opens a loop frame whose body is every following statement.
//!   Re-executing a `For` replaces any frame opened at that position.
//! * When control falls past the last statement, the innermost open frame
//!   increments its loop variable; if it is still below the limit
//!   variable's value control jumps back to the statement after the `For`,
//!   otherwise the frame closes and the next frame out is checked the same
//!   way. With no open frame an implicit `End` statement runs and the
//!   program halts. (`GoTo` one past the end discards all frames, so the
//!   `End` runs immediately.)
//! * Every statement execution counts against the budget: ordinary
//!   statements, each loop re-entry check, and the final `End`. When the
//!   budget runs out the program halts with `HaltReason::BudgetExceeded`
//!   and whatever list state it reached. No fitness penalty is attached to
//!   that condition.
//!
//! List accesses are defined for every input: a list operation whose
//! variable values are not both valid indices is a no-op, and a list
//! comparison with an out-of-range index is false.

use super::{LinearProgram, Statement};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HaltReason {
    Finished,
    BudgetExceeded,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExecResult {
    pub final_list: Vec<i64>,
    /// Number of statement executions charged, including loop re-entry
    /// checks and the implicit `End`.
    pub executed: u64,
    pub halt_reason: HaltReason,
}

/// Budget model: a program gets `factor` times the statement count of the
/// canonical three-statement exchange sort, which executes
/// `quadratic*L^2 + linear*L + constant` statements on a list of length
/// `L` (2, 2 and 2 for the canonical program under this VM's accounting).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BudgetModel {
    pub quadratic: u64,
    pub linear: u64,
    pub constant: u64,
    pub factor: u64,
}

impl Default for BudgetModel {
    fn default() -> Self {
        BudgetModel { quadratic: 2, linear: 2, constant: 2, factor: 10 }
    }
}

impl BudgetModel {
    pub fn reference_count(&self, list_len: usize) -> u64 {
        let l = list_len as u64;
        self.quadratic * l * l + self.linear * l + self.constant
    }

    pub fn budget(&self, list_len: usize) -> u64 {
        self.factor * self.reference_count(list_len)
    }
}

/// Execution budget for a list of length `L` under the default model:
/// `10 * (2L^2 + 2L + 2)`.
pub fn loop_budget(list_len: usize) -> u64 {
    BudgetModel::default().budget(list_len)
}

struct Frame {
    pos: usize,
    var: usize,
    limit: usize,
}

/// Run `program` against a copy of `input_list` under `budget`.
pub fn execute(program: &LinearProgram, input_list: &[i64], budget: u64) -> ExecResult {
    let mut list = input_list.to_vec();
    let (executed, halt_reason) = execute_in_place(program, &mut list, budget);
    ExecResult { final_list: list, executed, halt_reason }
}

/// Run `program` against `list` in place; returns the charged statement
/// count and the halt reason.
pub fn execute_in_place(
    program: &LinearProgram,
    list: &mut [i64],
    budget: u64,
) -> (u64, HaltReason) {
    let stmts = &program.statements;
    let len = stmts.len();
    let v = program.writable_vars;
    let l = list.len();

    let mut vals = vec![0i64; v + 2];
    vals[v + 1] = l as i64;
    let mut frames: Vec<Frame> = Vec::new();
    let mut pc = 0usize;
    let mut executed = 0u64;

    macro_rules! write_var {
        ($idx:expr, $val:expr) => {
            if (1..=v).contains(&$idx) {
                vals[$idx] = $val;
            }
        };
    }
    let index_of = |value: i64| -> Option<usize> {
        if value >= 0 && (value as usize) < l {
            Some(value as usize)
        } else {
            None
        }
    };

    loop {
        if executed == budget {
            return (executed, HaltReason::BudgetExceeded);
        }
        if pc >= len {
            executed += 1;
            match frames.last() {
                Some(f) => {
                    let (pos, var, limit) = (f.pos, f.var, f.limit);
                    write_var!(var, vals[var] + 1);
                    if vals[var] < vals[limit] {
                        pc = pos + 1;
                    } else {
                        frames.pop();
                    }
                }
                None => return (executed, HaltReason::Finished),
            }
            continue;
        }
        executed += 1;
        match stmts[pc] {
            Statement::CompareSwap { a, b } => {
                if let (Some(i), Some(j)) = (index_of(vals[a]), index_of(vals[b])) {
                    if list[i] > list[j] {
                        list.swap(i, j);
                    }
                }
                pc += 1;
            }
            Statement::For { var, init, limit } => {
                write_var!(var, vals[init]);
                frames.retain(|f| f.pos != pc);
                frames.push(Frame { pos: pc, var, limit });
                pc += 1;
            }
            Statement::IfVarLess { a, b } => {
                pc += if vals[a] < vals[b] { 1 } else { 2 };
            }
            Statement::IncrementVar { var } => {
                write_var!(var, vals[var] + 1);
                pc += 1;
            }
            Statement::AssignVar { dst, src } => {
                write_var!(dst, vals[src]);
                pc += 1;
            }
            Statement::GoTo { target } => {
                if target >= len {
                    frames.clear();
                }
                pc = target;
            }
            Statement::IfListLess { a, b } => {
                let cond = match (index_of(vals[a]), index_of(vals[b])) {
                    (Some(i), Some(j)) => list[i] < list[j],
                    _ => false,
                };
                pc += if cond { 1 } else { 2 };
            }
            Statement::Swap { a, b } => {
                if let (Some(i), Some(j)) = (index_of(vals[a]), index_of(vals[b])) {
                    list.swap(i, j);
                }
                pc += 1;
            }
        }
    }
}
