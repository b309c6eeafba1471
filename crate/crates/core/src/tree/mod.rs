//! Tree-structured programs computing n-bit parity.
//!
//! A program is a main expression tree plus up to four two-argument
//! subroutine trees, capped at 200 nodes in total. Trees are stored in
//! preorder (`Vec<Node>`), which makes node counting, subtree extraction
//! and splicing cheap. Subroutine `i` may call only subroutines with a
//! smaller index, so the call graph is acyclic by construction.
//!
//! Programs serialize to s-expressions, e.g.
//! `(Xor (Input 0) (And (Input 1) (Const 1)))`; see [`sexpr`].

mod eval;
mod generate;
mod selfconsist;
pub mod sexpr;
mod variation;

pub use eval::{eval_tree, parity_fitness, predict, OutputInterpretation};
pub use generate::{random_expr, random_tree, ExprContext, LengthDistribution};
pub use selfconsist::{
    iterate_to_fixed_point, self_consistent_distribution, SelfConsistOptions,
    SelfConsistentResult,
};
pub use variation::{architecture_event, subtree_crossover, subtree_mutation, ArchProbs};

use crate::error::{Error, Result};
use crate::rng::EvoRng;
use crate::system::System;

/// Hard cap on the total node count of a program (main plus subroutine
/// bodies).
pub const NODE_CAP: usize = 200;
/// At most this many subroutines per program.
pub const MAX_SUBROUTINES: usize = 4;
/// Subroutines always take two arguments.
pub const SUBROUTINE_ARITY: usize = 2;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Op {
    Xor,
    And,
    Or,
    Not,
    Nand,
    Nor,
    Plus,
    Minus,
    Times,
    Divide,
    Negate,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Not | Op::Negate => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Xor => "Xor",
            Op::And => "And",
            Op::Or => "Or",
            Op::Not => "Not",
            Op::Nand => "Nand",
            Op::Nor => "Nor",
            Op::Plus => "Plus",
            Op::Minus => "Minus",
            Op::Times => "Times",
            Op::Divide => "Divide",
            Op::Negate => "Negate",
        }
    }
}

/// One node of a preorder-encoded expression.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Node {
    Op(Op),
    Const(i64),
    Input(u8),
    /// Call of subroutine `i` with two argument subtrees.
    Call(u8),
    /// Argument 0 or 1 of the enclosing subroutine body.
    Arg(u8),
}

impl Node {
    pub fn arity(self) -> usize {
        match self {
            Node::Op(op) => op.arity(),
            Node::Call(_) => SUBROUTINE_ARITY,
            _ => 0,
        }
    }
}

/// The five node vocabularies. Boolean sets carry constants 0/1;
/// arithmetic sets carry integer constants in [-3, 3].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreeStatementSet {
    Set1,
    Set2,
    Set3,
    Set4,
    Set5,
}

impl TreeStatementSet {
    pub fn ops(self) -> &'static [Op] {
        match self {
            TreeStatementSet::Set1 => &[Op::Xor, Op::And, Op::Or, Op::Not],
            TreeStatementSet::Set2 => &[Op::And, Op::Or, Op::Nand, Op::Nor, Op::Not],
            TreeStatementSet::Set3 => &[Op::And, Op::Or, Op::Not],
            TreeStatementSet::Set4 => &[Op::Plus, Op::Minus, Op::Times, Op::Divide, Op::Negate],
            TreeStatementSet::Set5 => &[
                Op::Plus,
                Op::Minus,
                Op::Times,
                Op::Divide,
                Op::Negate,
                Op::And,
                Op::Or,
                Op::Not,
            ],
        }
    }

    pub fn const_range(self) -> std::ops::RangeInclusive<i64> {
        match self {
            TreeStatementSet::Set1 | TreeStatementSet::Set2 | TreeStatementSet::Set3 => 0..=1,
            TreeStatementSet::Set4 | TreeStatementSet::Set5 => -3..=3,
        }
    }

    /// The set's unary operators (every set has at least one, so any node
    /// budget >= 1 is reachable exactly).
    pub fn unary_ops(self) -> &'static [Op] {
        match self {
            TreeStatementSet::Set1
            | TreeStatementSet::Set2
            | TreeStatementSet::Set3 => &[Op::Not],
            TreeStatementSet::Set4 => &[Op::Negate],
            TreeStatementSet::Set5 => &[Op::Negate, Op::Not],
        }
    }

    pub fn index(self) -> u32 {
        match self {
            TreeStatementSet::Set1 => 1,
            TreeStatementSet::Set2 => 2,
            TreeStatementSet::Set3 => 3,
            TreeStatementSet::Set4 => 4,
            TreeStatementSet::Set5 => 5,
        }
    }

    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(TreeStatementSet::Set1),
            2 => Ok(TreeStatementSet::Set2),
            3 => Ok(TreeStatementSet::Set3),
            4 => Ok(TreeStatementSet::Set4),
            5 => Ok(TreeStatementSet::Set5),
            other => Err(Error::InvalidArgument(format!(
                "tree statement set must be 1..=5, got {other}"
            ))),
        }
    }
}

/// A parity program: main expression plus optional subroutine bodies.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeProgram {
    pub main: Vec<Node>,
    pub subroutines: Vec<Vec<Node>>,
    pub statement_set: TreeStatementSet,
    pub n_bits: usize,
}

/// One-past-the-end index of the subtree rooted at `start` in a preorder
/// buffer. The buffer must be well-formed (see
/// [`checked_subtree_end`] for untrusted input).
pub fn subtree_end(nodes: &[Node], start: usize) -> usize {
    let mut remaining = 1usize;
    let mut i = start;
    while remaining > 0 {
        remaining = remaining - 1 + nodes[i].arity();
        i += 1;
    }
    i
}

/// Like [`subtree_end`] but returns `None` when the buffer ends before
/// the expression is complete.
pub fn checked_subtree_end(nodes: &[Node], start: usize) -> Option<usize> {
    let mut remaining = 1usize;
    let mut i = start;
    while remaining > 0 {
        remaining = remaining - 1 + nodes.get(i)?.arity();
        i += 1;
    }
    Some(i)
}

impl TreeProgram {
    pub fn total_nodes(&self) -> usize {
        self.main.len() + self.subroutines.iter().map(Vec::len).sum::<usize>()
    }

    /// Check all structural invariants: preorder buffers are exactly one
    /// expression, node kinds stay inside the statement set, inputs index
    /// real bits, `Arg` appears only inside subroutine bodies, calls are
    /// acyclic (body `i` calls only `j < i`) and the node cap holds.
    pub fn validate(&self) -> Result<()> {
        if self.total_nodes() > NODE_CAP {
            return Err(Error::InvalidArgument(format!(
                "program has {} nodes, cap is {NODE_CAP}",
                self.total_nodes()
            )));
        }
        if self.subroutines.len() > MAX_SUBROUTINES {
            return Err(Error::InvalidArgument(format!(
                "{} subroutines, cap is {MAX_SUBROUTINES}",
                self.subroutines.len()
            )));
        }
        let check_expr = |nodes: &[Node], callable: usize, args_ok: bool| -> Result<()> {
            if nodes.is_empty() {
                return Err(Error::InvalidArgument("empty expression".into()));
            }
            for &node in nodes {
                match node {
                    Node::Op(op) => {
                        if !self.statement_set.ops().contains(&op) {
                            return Err(Error::InvalidArgument(format!(
                                "operator {op:?} not in set {}",
                                self.statement_set.index()
                            )));
                        }
                    }
                    Node::Const(c) => {
                        if !self.statement_set.const_range().contains(&c) {
                            return Err(Error::InvalidArgument(format!(
                                "constant {c} outside the set's range"
                            )));
                        }
                    }
                    Node::Input(i) => {
                        if i as usize >= self.n_bits {
                            return Err(Error::InvalidArgument(format!(
                                "input {i} out of range for {} bits",
                                self.n_bits
                            )));
                        }
                    }
                    Node::Call(s) => {
                        if s as usize >= callable {
                            return Err(Error::InvalidArgument(format!(
                                "call of subroutine {s} violates the acyclic order"
                            )));
                        }
                    }
                    Node::Arg(a) => {
                        if !args_ok {
                            return Err(Error::InvalidArgument(
                                "argument node outside a subroutine body".into(),
                            ));
                        }
                        if a as usize >= SUBROUTINE_ARITY {
                            return Err(Error::InvalidArgument(format!("argument index {a}")));
                        }
                    }
                }
            }
            if checked_subtree_end(nodes, 0) != Some(nodes.len()) {
                return Err(Error::InvalidArgument(
                    "preorder buffer is not exactly one expression".into(),
                ));
            }
            Ok(())
        };
        check_expr(&self.main, self.subroutines.len(), false)?;
        for (i, body) in self.subroutines.iter().enumerate() {
            check_expr(body, i, true)?;
        }
        Ok(())
    }
}

/// The n-bit parity problem as an evolvable system. Fitness counts the
/// inputs classified correctly, so it lies in `[0, 2^n]` and the usual
/// termination values are fractions of `2^n`.
#[derive(Clone, Debug)]
pub struct ParitySystem {
    pub statement_set: TreeStatementSet,
    pub n_bits: usize,
    pub length_distribution: LengthDistribution,
    /// Architecture-event probabilities; `None` disables subroutines.
    pub adf: Option<ArchProbs>,
    pub interpretation: OutputInterpretation,
}

impl ParitySystem {
    pub fn new(statement_set: TreeStatementSet, n_bits: usize) -> Self {
        ParitySystem {
            statement_set,
            n_bits,
            length_distribution: LengthDistribution::seed_default(),
            adf: None,
            interpretation: OutputInterpretation::NonzeroOne,
        }
    }

    pub fn with_subroutines(mut self) -> Self {
        self.adf = Some(ArchProbs::default());
        self
    }

    pub fn with_distribution(mut self, dist: LengthDistribution) -> Self {
        self.length_distribution = dist;
        self
    }
}

impl System for ParitySystem {
    type Genome = TreeProgram;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> TreeProgram {
        random_tree(
            self.statement_set,
            &self.length_distribution,
            self.n_bits,
            self.adf.is_some(),
            rng,
        )
    }

    fn generation_context(&self, _rng: &mut EvoRng) {}

    fn fitness(&self, genome: &TreeProgram, _ctx: &()) -> f64 {
        parity_fitness(genome, self.interpretation) as f64
    }

    fn crossover(
        &self,
        a: &TreeProgram,
        b: &TreeProgram,
        rng: &mut EvoRng,
    ) -> (TreeProgram, TreeProgram) {
        subtree_crossover(a, b, rng)
    }

    fn mutate(&self, genome: &TreeProgram, rng: &mut EvoRng) -> TreeProgram {
        subtree_mutation(genome, rng)
    }

    fn post_variation(&self, genome: TreeProgram, rng: &mut EvoRng) -> TreeProgram {
        match &self.adf {
            Some(probs) => architecture_event(genome, probs, rng),
            None => genome,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtree_end_walks_preorder() {
        // (Xor (Not (Input 0)) (Const 1))
        let nodes = vec![
            Node::Op(Op::Xor),
            Node::Op(Op::Not),
            Node::Input(0),
            Node::Const(1),
        ];
        assert_eq!(subtree_end(&nodes, 0), 4);
        assert_eq!(subtree_end(&nodes, 1), 3);
        assert_eq!(subtree_end(&nodes, 2), 3);
        assert_eq!(subtree_end(&nodes, 3), 4);
    }

    #[test]
    fn validate_catches_structural_errors() {
        let set = TreeStatementSet::Set1;
        let ok = TreeProgram {
            main: vec![Node::Op(Op::Xor), Node::Input(0), Node::Input(1)],
            subroutines: vec![],
            statement_set: set,
            n_bits: 2,
        };
        ok.validate().unwrap();

        let truncated = TreeProgram {
            main: vec![Node::Op(Op::Xor), Node::Input(0)],
            ..ok.clone()
        };
        assert!(truncated.validate().is_err());

        let wrong_set = TreeProgram {
            main: vec![Node::Op(Op::Nand), Node::Input(0), Node::Input(1)],
            ..ok.clone()
        };
        assert!(wrong_set.validate().is_err());

        let arg_in_main = TreeProgram {
            main: vec![Node::Op(Op::Xor), Node::Arg(0), Node::Input(1)],
            ..ok.clone()
        };
        assert!(arg_in_main.validate().is_err());

        let bad_call_order = TreeProgram {
            main: vec![Node::Input(0)],
            subroutines: vec![vec![Node::Op(Op::Xor), Node::Arg(0), Node::Call(0)]],
            ..ok.clone()
        };
        assert!(bad_call_order.validate().is_err());

        let bad_const = TreeProgram {
            main: vec![Node::Const(2)],
            ..ok
        };
        assert!(bad_const.validate().is_err());
    }
}
