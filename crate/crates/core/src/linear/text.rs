//! Line-oriented text format for linear programs: two comment headers
//! carrying the statement set and variable count, then one statement per
//! line. Variable operands are written `v<i>`, `GoTo` targets as bare
//! statement indices.

use super::{LinearProgram, Statement, StatementSet};
use crate::error::{Error, Result};

pub fn program_to_text(program: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(&format!("# statement_set {}\n", program.statement_set.index()));
    out.push_str(&format!("# variables {}\n", program.writable_vars));
    for s in &program.statements {
        let line = match *s {
            Statement::CompareSwap { a, b } => format!("CompareSwap v{a} v{b}"),
            Statement::For { var, init, limit } => format!("For v{var} v{init} v{limit}"),
            Statement::IfVarLess { a, b } => format!("IfVarLess v{a} v{b}"),
            Statement::IncrementVar { var } => format!("IncrementVar v{var}"),
            Statement::AssignVar { dst, src } => format!("AssignVar v{dst} v{src}"),
            Statement::GoTo { target } => format!("GoTo {target}"),
            Statement::IfListLess { a, b } => format!("IfListLess v{a} v{b}"),
            Statement::Swap { a, b } => format!("Swap v{a} v{b}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn parse_var(token: &str, line_no: usize) -> Result<usize> {
    token
        .strip_prefix('v')
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("line {line_no}: expected variable like v1, got {token:?}")))
}

pub fn parse_program(text: &str) -> Result<LinearProgram> {
    let mut statement_set: Option<StatementSet> = None;
    let mut writable_vars: Option<usize> = None;
    let mut statements = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("statement_set"), Some(n)) => {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {line_no}: bad statement_set")))?;
                    statement_set = Some(StatementSet::from_index(n)?);
                }
                (Some("variables"), Some(n)) => {
                    writable_vars = Some(n.parse().map_err(|_| {
                        Error::Parse(format!("line {line_no}: bad variable count"))
                    })?);
                }
                _ => {} // unknown comments are ignored
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        let op = tok.next().unwrap();
        let args: Vec<&str> = tok.collect();
        let need = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "line {line_no}: {op} takes {n} operand(s), got {}",
                    args.len()
                )))
            }
        };
        let s = match op {
            "CompareSwap" => {
                need(2)?;
                Statement::CompareSwap { a: parse_var(args[0], line_no)?, b: parse_var(args[1], line_no)? }
            }
            "For" => {
                need(3)?;
                Statement::For {
                    var: parse_var(args[0], line_no)?,
                    init: parse_var(args[1], line_no)?,
                    limit: parse_var(args[2], line_no)?,
                }
            }
            "IfVarLess" => {
                need(2)?;
                Statement::IfVarLess { a: parse_var(args[0], line_no)?, b: parse_var(args[1], line_no)? }
            }
            "IncrementVar" => {
                need(1)?;
                Statement::IncrementVar { var: parse_var(args[0], line_no)? }
            }
            "AssignVar" => {
                need(2)?;
                Statement::AssignVar { dst: parse_var(args[0], line_no)?, src: parse_var(args[1], line_no)? }
            }
            "GoTo" => {
                need(1)?;
                Statement::GoTo {
                    target: args[0]
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {line_no}: bad jump target")))?,
                }
            }
            "IfListLess" => {
                need(2)?;
                Statement::IfListLess { a: parse_var(args[0], line_no)?, b: parse_var(args[1], line_no)? }
            }
            "Swap" => {
                need(2)?;
                Statement::Swap { a: parse_var(args[0], line_no)?, b: parse_var(args[1], line_no)? }
            }
            other => {
                return Err(Error::Parse(format!("line {line_no}: unknown statement {other:?}")))
            }
        };
        statements.push(s);
    }

    let statement_set = statement_set
        .ok_or_else(|| Error::Parse("missing `# statement_set N` header".into()))?;
    let writable_vars =
        writable_vars.ok_or_else(|| Error::Parse("missing `# variables N` header".into()))?;
    let program = LinearProgram { statements, statement_set, writable_vars };
    program.validate()?;
    Ok(program)
}
