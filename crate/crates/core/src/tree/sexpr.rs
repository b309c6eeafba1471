//! S-expression text format for tree programs.
//!
//! A plain program is one expression, e.g.
//! `(Xor (Input 0) (And (Input 1) (Const 1)))`. A program with
//! subroutines wraps its components:
//! `(program (main <expr>) (sub <expr>) ...)`, where subroutine bodies
//! may use `(Arg 0)` / `(Arg 1)` and any component may contain
//! `(Call <i> <arg0> <arg1>)`.

use super::{Node, Op, TreeProgram, TreeStatementSet};
use crate::error::{Error, Result};

pub fn to_sexpr(program: &TreeProgram) -> String {
    let mut out = String::new();
    if program.subroutines.is_empty() {
        write_expr(&program.main, &mut 0, &mut out);
    } else {
        out.push_str("(program (main ");
        write_expr(&program.main, &mut 0, &mut out);
        out.push(')');
        for body in &program.subroutines {
            out.push_str(" (sub ");
            write_expr(body, &mut 0, &mut out);
            out.push(')');
        }
        out.push(')');
    }
    out
}

fn write_expr(nodes: &[Node], cursor: &mut usize, out: &mut String) {
    let node = nodes[*cursor];
    *cursor += 1;
    match node {
        Node::Const(c) => out.push_str(&format!("(Const {c})")),
        Node::Input(i) => out.push_str(&format!("(Input {i})")),
        Node::Arg(a) => out.push_str(&format!("(Arg {a})")),
        Node::Op(op) => {
            out.push('(');
            out.push_str(op.name());
            for _ in 0..op.arity() {
                out.push(' ');
                write_expr(nodes, cursor, out);
            }
            out.push(')');
        }
        Node::Call(s) => {
            out.push_str(&format!("(Call {s}"));
            for _ in 0..2 {
                out.push(' ');
                write_expr(nodes, cursor, out);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Word(String),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !word.is_empty() {
                    tokens.push(Token::Word(std::mem::take(&mut word)));
                }
                tokens.push(if ch == '(' { Token::Open } else { Token::Close });
            }
            c if c.is_whitespace() => {
                if !word.is_empty() {
                    tokens.push(Token::Word(std::mem::take(&mut word)));
                }
            }
            c => word.push(c),
        }
    }
    if !word.is_empty() {
        tokens.push(Token::Word(word));
    }
    if tokens.is_empty() {
        return Err(Error::Parse("empty s-expression".into()));
    }
    Ok(tokens)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn expect_open(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(Token::Open) => {
                self.pos += 1;
                Ok(())
            }
            other => Err(Error::Parse(format!("expected '(', got {other:?}"))),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(Token::Close) => {
                self.pos += 1;
                Ok(())
            }
            other => Err(Error::Parse(format!("expected ')', got {other:?}"))),
        }
    }

    fn word(&mut self) -> Result<&'t str> {
        match self.tokens.get(self.pos) {
            Some(Token::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            other => Err(Error::Parse(format!("expected a symbol, got {other:?}"))),
        }
    }

    fn peek_word(&self) -> Option<&'t str> {
        match self.tokens.get(self.pos) {
            Some(Token::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T> {
        let w = self.word()?;
        w.parse::<T>()
            .map_err(|_| Error::Parse(format!("expected a number, got {w:?}")))
    }

    fn expr(&mut self, out: &mut Vec<Node>) -> Result<()> {
        self.expect_open()?;
        let head = self.word()?.to_owned();
        match head.as_str() {
            "Const" => out.push(Node::Const(self.number()?)),
            "Input" => out.push(Node::Input(self.number()?)),
            "Arg" => out.push(Node::Arg(self.number()?)),
            "Call" => {
                out.push(Node::Call(self.number()?));
                self.expr(out)?;
                self.expr(out)?;
            }
            name => {
                let op = op_by_name(name)?;
                out.push(Node::Op(op));
                for _ in 0..op.arity() {
                    self.expr(out)?;
                }
            }
        }
        self.expect_close()
    }
}

fn op_by_name(name: &str) -> Result<Op> {
    Ok(match name {
        "Xor" => Op::Xor,
        "And" => Op::And,
        "Or" => Op::Or,
        "Not" => Op::Not,
        "Nand" => Op::Nand,
        "Nor" => Op::Nor,
        "Plus" => Op::Plus,
        "Minus" => Op::Minus,
        "Times" => Op::Times,
        "Divide" => Op::Divide,
        "Negate" => Op::Negate,
        other => return Err(Error::Parse(format!("unknown operator {other:?}"))),
    })
}

/// Parse a program dumped by [`to_sexpr`]. The statement set and bit
/// count are context the text does not carry; the result is validated
/// against them.
pub fn from_sexpr(text: &str, set: TreeStatementSet, n_bits: usize) -> Result<TreeProgram> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens: &tokens, pos: 0 };

    let mut main = Vec::new();
    let mut subroutines = Vec::new();
    if tokens.get(1) == Some(&Token::Word("program".into())) {
        parser.expect_open()?;
        parser.word()?; // "program"
        parser.expect_open()?;
        if parser.word()? != "main" {
            return Err(Error::Parse("expected (main ...)".into()));
        }
        parser.expr(&mut main)?;
        parser.expect_close()?;
        while parser.peek_word().is_none() && parser.tokens.get(parser.pos) == Some(&Token::Open) {
            parser.expect_open()?;
            if parser.word()? != "sub" {
                return Err(Error::Parse("expected (sub ...)".into()));
            }
            let mut body = Vec::new();
            parser.expr(&mut body)?;
            parser.expect_close()?;
            subroutines.push(body);
        }
        parser.expect_close()?;
    } else {
        parser.expr(&mut main)?;
    }
    if parser.pos != tokens.len() {
        return Err(Error::Parse("trailing tokens after the expression".into()));
    }
    let program = TreeProgram { main, subroutines, statement_set: set, n_bits };
    program.validate()?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tree::{random_tree, LengthDistribution};
    use proptest::prelude::*;

    #[test]
    fn documented_example_parses() {
        let text = "(Xor (Input 0) (And (Input 1) (Const 1)))";
        let p = from_sexpr(text, TreeStatementSet::Set1, 2).unwrap();
        assert_eq!(
            p.main,
            vec![
                Node::Op(Op::Xor),
                Node::Input(0),
                Node::Op(Op::And),
                Node::Input(1),
                Node::Const(1),
            ]
        );
        assert_eq!(to_sexpr(&p), text);
    }

    #[test]
    fn subroutine_form_round_trips() {
        let p = TreeProgram {
            main: vec![Node::Call(0), Node::Input(0), Node::Input(1)],
            subroutines: vec![vec![Node::Op(Op::Xor), Node::Arg(0), Node::Arg(1)]],
            statement_set: TreeStatementSet::Set1,
            n_bits: 2,
        };
        let text = to_sexpr(&p);
        assert_eq!(
            text,
            "(program (main (Call 0 (Input 0) (Input 1))) (sub (Xor (Arg 0) (Arg 1))))"
        );
        assert_eq!(from_sexpr(&text, TreeStatementSet::Set1, 2).unwrap(), p);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        for bad in [
            "",
            "(Xor (Input 0))",                       // missing operand
            "(Frob (Input 0) (Input 1))",            // unknown operator
            "(Xor (Input 0) (Input 1)) extra",       // trailing tokens
            "(Xor (Input 0) (Input 9))",             // input out of range
            "(Xor (Arg 0) (Input 0))",               // Arg outside a subroutine
        ] {
            assert!(
                from_sexpr(bad, TreeStatementSet::Set1, 2).is_err(),
                "accepted {bad:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn random_programs_round_trip(seed in 0u64..300) {
            let mut rng = rng_from_seed(seed);
            let dist = LengthDistribution::seed_default_with_subroutines();
            let p = random_tree(TreeStatementSet::Set5, &dist, 4, true, &mut rng);
            let text = to_sexpr(&p);
            let parsed = from_sexpr(&text, TreeStatementSet::Set5, 4).unwrap();
            prop_assert_eq!(parsed, p);
        }
    }
}
