//! Integer tree evaluation and the parity fitness function.
//!
//! Values are wrapping 64-bit integers. Boolean operators treat any
//! nonzero value as true and yield 0/1. `Divide` truncates toward zero
//! and aborts the whole evaluation with an arithmetic fault when the
//! divisor is zero; the caller scores that input as answered wrong.

use super::{Node, Op, TreeProgram};

/// How a program's integer output is read as a parity prediction.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum OutputInterpretation {
    /// Nonzero means 1 (the default).
    #[default]
    NonzeroOne,
    /// Output value modulo 2.
    Mod2,
}

/// Evaluate `program` on one input assignment (`inputs[i]` is bit `i`,
/// 0 or 1). `None` signals an arithmetic fault.
pub fn eval_tree(program: &TreeProgram, inputs: &[i64]) -> Option<i64> {
    debug_assert_eq!(inputs.len(), program.n_bits);
    let mut cursor = 0;
    let v = eval_expr(program, &program.main, &mut cursor, inputs, None)?;
    debug_assert_eq!(cursor, program.main.len());
    Some(v)
}

/// Evaluate and interpret the output as a 0/1 parity prediction.
pub fn predict(
    program: &TreeProgram,
    inputs: &[i64],
    interpretation: OutputInterpretation,
) -> Option<u8> {
    eval_tree(program, inputs).map(|v| match interpretation {
        OutputInterpretation::NonzeroOne => (v != 0) as u8,
        OutputInterpretation::Mod2 => v.rem_euclid(2) as u8,
    })
}

fn truthy(v: i64) -> bool {
    v != 0
}

fn eval_expr(
    program: &TreeProgram,
    nodes: &[Node],
    cursor: &mut usize,
    inputs: &[i64],
    args: Option<(i64, i64)>,
) -> Option<i64> {
    let node = nodes[*cursor];
    *cursor += 1;
    match node {
        Node::Const(c) => Some(c),
        Node::Input(i) => Some(inputs[i as usize]),
        Node::Arg(a) => {
            let (a0, a1) = args.expect("argument node outside a subroutine body");
            Some(if a == 0 { a0 } else { a1 })
        }
        Node::Op(op) => {
            let a = eval_expr(program, nodes, cursor, inputs, args)?;
            let b = if op.arity() == 2 {
                eval_expr(program, nodes, cursor, inputs, args)?
            } else {
                0
            };
            apply_op(op, a, b)
        }
        Node::Call(s) => {
            let a0 = eval_expr(program, nodes, cursor, inputs, args)?;
            let a1 = eval_expr(program, nodes, cursor, inputs, args)?;
            let body = &program.subroutines[s as usize];
            let mut sub_cursor = 0;
            let v = eval_expr(program, body, &mut sub_cursor, inputs, Some((a0, a1)))?;
            debug_assert_eq!(sub_cursor, body.len());
            Some(v)
        }
    }
}

fn apply_op(op: Op, a: i64, b: i64) -> Option<i64> {
    Some(match op {
        Op::Xor => (truthy(a) ^ truthy(b)) as i64,
        Op::And => (truthy(a) && truthy(b)) as i64,
        Op::Or => (truthy(a) || truthy(b)) as i64,
        Op::Not => (!truthy(a)) as i64,
        Op::Nand => !(truthy(a) && truthy(b)) as i64,
        Op::Nor => !(truthy(a) || truthy(b)) as i64,
        Op::Plus => a.wrapping_add(b),
        Op::Minus => a.wrapping_sub(b),
        Op::Times => a.wrapping_mul(b),
        Op::Divide => {
            if b == 0 {
                return None;
            }
            a.wrapping_div(b)
        }
        Op::Negate => a.wrapping_neg(),
    })
}

/// Number of the `2^n` input assignments for which the program predicts
/// the odd-parity bit correctly. Faulting inputs count as wrong.
pub fn parity_fitness(program: &TreeProgram, interpretation: OutputInterpretation) -> u64 {
    let n = program.n_bits;
    debug_assert!(n <= 20, "parity fitness enumerates all 2^n inputs");
    let mut inputs = [0i64; 20];
    let mut correct = 0u64;
    for mask in 0u32..(1u32 << n) {
        for (i, slot) in inputs[..n].iter_mut().enumerate() {
            *slot = ((mask >> i) & 1) as i64;
        }
        let parity = (mask.count_ones() & 1) as u8;
        if predict(program, &inputs[..n], interpretation) == Some(parity) {
            correct += 1;
        }
    }
    correct
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeStatementSet;

    fn program(main: Vec<Node>, n_bits: usize, set: TreeStatementSet) -> TreeProgram {
        let p = TreeProgram { main, subroutines: vec![], statement_set: set, n_bits };
        p.validate().unwrap();
        p
    }

    #[test]
    fn xor_truth_table() {
        let p = program(
            vec![Node::Op(Op::Xor), Node::Input(0), Node::Input(1)],
            2,
            TreeStatementSet::Set1,
        );
        assert_eq!(eval_tree(&p, &[1, 1]), Some(0));
        assert_eq!(eval_tree(&p, &[1, 0]), Some(1));
        assert_eq!(eval_tree(&p, &[0, 1]), Some(1));
        assert_eq!(eval_tree(&p, &[0, 0]), Some(0));
    }

    #[test]
    fn divide_by_zero_faults() {
        let p = program(
            vec![Node::Op(Op::Divide), Node::Const(1), Node::Const(0)],
            1,
            TreeStatementSet::Set4,
        );
        assert_eq!(eval_tree(&p, &[0]), None);
        assert_eq!(predict(&p, &[0], OutputInterpretation::NonzeroOne), None);
    }

    #[test]
    fn arithmetic_evaluation_example() {
        // Minus(Input0, Negate(Input1)) on (1, 1) = 1 - (-1) = 2,
        // prediction 1 under the nonzero interpretation.
        let p = program(
            vec![
                Node::Op(Op::Minus),
                Node::Input(0),
                Node::Op(Op::Negate),
                Node::Input(1),
            ],
            2,
            TreeStatementSet::Set4,
        );
        assert_eq!(eval_tree(&p, &[1, 1]), Some(2));
        assert_eq!(predict(&p, &[1, 1], OutputInterpretation::NonzeroOne), Some(1));
        assert_eq!(predict(&p, &[1, 1], OutputInterpretation::Mod2), Some(0));
    }

    #[test]
    fn full_xor_chain_is_perfect_parity() {
        for n in 2..=6usize {
            let mut main = Vec::new();
            for _ in 0..n - 1 {
                main.push(Node::Op(Op::Xor));
            }
            for i in 0..n {
                main.push(Node::Input(i as u8));
            }
            let p = program(main, n, TreeStatementSet::Set1);
            assert_eq!(parity_fitness(&p, OutputInterpretation::NonzeroOne), 1 << n);
        }
    }

    #[test]
    fn constant_zero_scores_the_even_inputs() {
        let p = program(vec![Node::Const(0)], 4, TreeStatementSet::Set1);
        assert_eq!(parity_fitness(&p, OutputInterpretation::NonzeroOne), 8);
    }

    #[test]
    fn subroutine_call_binds_arguments() {
        // sub0(a, b) = Xor(a, b); main = Call0(Input0, Call0(Input1, Input2)).
        let p = TreeProgram {
            main: vec![
                Node::Call(0),
                Node::Input(0),
                Node::Call(0),
                Node::Input(1),
                Node::Input(2),
            ],
            subroutines: vec![vec![Node::Op(Op::Xor), Node::Arg(0), Node::Arg(1)]],
            statement_set: TreeStatementSet::Set1,
            n_bits: 3,
        };
        p.validate().unwrap();
        assert_eq!(parity_fitness(&p, OutputInterpretation::NonzeroOne), 8);
    }

    #[test]
    fn wrapping_arithmetic_does_not_panic() {
        // Times chain that overflows 64 bits must wrap, not abort.
        let mut main = vec![Node::Op(Op::Times); 40];
        main.extend(std::iter::repeat(Node::Const(3)).take(41));
        let p = program(main, 1, TreeStatementSet::Set4);
        assert!(eval_tree(&p, &[1]).is_some());
        // i64::MIN / -1 wraps rather than trapping.
        let p = program(
            vec![
                Node::Op(Op::Divide),
                Node::Op(Op::Negate),
                Node::Const(1),
                Node::Op(Op::Negate),
                Node::Const(1),
            ],
            1,
            TreeStatementSet::Set4,
        );
        assert_eq!(eval_tree(&p, &[0]), Some(1));
    }
}
