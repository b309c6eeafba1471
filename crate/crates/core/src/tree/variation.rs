//! Subtree crossover and mutation, plus the subroutine architecture
//! events (create / duplicate / delete).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::{random_expr, ExprContext};
use super::{subtree_end, Node, TreeProgram, MAX_SUBROUTINES, NODE_CAP};
use crate::rng::EvoRng;

/// Which component of a program a node index falls in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Component {
    Main,
    Sub(usize),
}

fn locate(program: &TreeProgram, mut index: usize) -> (Component, usize) {
    if index < program.main.len() {
        return (Component::Main, index);
    }
    index -= program.main.len();
    for (k, body) in program.subroutines.iter().enumerate() {
        if index < body.len() {
            return (Component::Sub(k), index);
        }
        index -= body.len();
    }
    unreachable!("node index out of range");
}

fn component_slice<'p>(program: &'p TreeProgram, c: Component) -> &'p [Node] {
    match c {
        Component::Main => &program.main,
        Component::Sub(k) => &program.subroutines[k],
    }
}

fn splice(program: &TreeProgram, c: Component, start: usize, end: usize, donor: &[Node]) -> TreeProgram {
    let mut child = program.clone();
    let buf = match c {
        Component::Main => &mut child.main,
        Component::Sub(k) => &mut child.subroutines[k],
    };
    buf.splice(start..end, donor.iter().copied());
    child
}

/// Highest subroutine index called anywhere in `nodes`, if any.
fn max_call_index(nodes: &[Node]) -> Option<usize> {
    nodes
        .iter()
        .filter_map(|n| match n {
            Node::Call(s) => Some(*s as usize),
            _ => None,
        })
        .max()
}

/// Swap uniformly chosen subtrees between two parents. The crossover
/// point is uniform over all of parent `a`'s nodes (so a subroutine body
/// is picked with probability proportional to its size); the matching
/// point in `b` comes from the same component kind (main with main,
/// subroutine `k` with subroutine `k`), falling back to main when `b`
/// lacks that subroutine. A child that would exceed the node cap, or
/// whose transplanted subtree calls a subroutine the child does not have,
/// is replaced by a copy of its first parent.
pub fn subtree_crossover(
    a: &TreeProgram,
    b: &TreeProgram,
    rng: &mut EvoRng,
) -> (TreeProgram, TreeProgram) {
    debug_assert_eq!(a.statement_set, b.statement_set);
    let (mut comp_a, mut local_a) = locate(a, rng.gen_range(0..a.total_nodes()));
    let comp_b = match comp_a {
        Component::Main => Component::Main,
        Component::Sub(k) if k < b.subroutines.len() => Component::Sub(k),
        Component::Sub(_) => {
            // No matching context in b: cross the main trees instead.
            comp_a = Component::Main;
            local_a = rng.gen_range(0..a.main.len());
            Component::Main
        }
    };
    let slice_a = component_slice(a, comp_a);
    let slice_b = component_slice(b, comp_b);
    let sa = local_a;
    let ea = subtree_end(slice_a, sa);
    let sb = rng.gen_range(0..slice_b.len());
    let eb = subtree_end(slice_b, sb);

    let make_child = |base: &TreeProgram,
                      base_comp: Component,
                      start: usize,
                      end: usize,
                      donor: &[Node]|
     -> TreeProgram {
        // Reject a transplant that references subroutines the child lacks
        // (only possible for main-to-main moves between programs with
        // different architectures).
        let callable = match base_comp {
            Component::Main => base.subroutines.len(),
            Component::Sub(k) => k,
        };
        if max_call_index(donor).is_some_and(|m| m >= callable) {
            return base.clone();
        }
        let child = splice(base, base_comp, start, end, donor);
        if child.total_nodes() > NODE_CAP {
            base.clone()
        } else {
            child
        }
    };

    let child1 = make_child(a, comp_a, sa, ea, &slice_b[sb..eb]);
    let child2 = make_child(b, comp_b, sb, eb, &slice_a[sa..ea]);
    (child1, child2)
}

/// Replace a uniformly chosen subtree by a fresh random subtree of random
/// target size chosen so the node cap holds.
pub fn subtree_mutation(a: &TreeProgram, rng: &mut EvoRng) -> TreeProgram {
    let (comp, start) = locate(a, rng.gen_range(0..a.total_nodes()));
    let slice = component_slice(a, comp);
    let end = subtree_end(slice, start);
    let removed = end - start;
    let available = NODE_CAP - (a.total_nodes() - removed);
    let target = rng.gen_range(1..=available);
    let ctx = match comp {
        Component::Main => ExprContext {
            n_bits: a.n_bits,
            args_allowed: false,
            callable_subs: a.subroutines.len(),
        },
        Component::Sub(k) => ExprContext {
            n_bits: a.n_bits,
            args_allowed: true,
            callable_subs: k,
        },
    };
    let mut replacement = Vec::with_capacity(target);
    random_expr(a.statement_set, target, &ctx, &mut replacement, rng);
    splice(a, comp, start, end, &replacement)
}

/// Probabilities of the three subroutine architecture events, applied to
/// each child after variation. At most one event fires per child.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchProbs {
    pub create: f64,
    pub duplicate: f64,
    pub delete: f64,
}

impl Default for ArchProbs {
    fn default() -> Self {
        ArchProbs { create: 0.005, duplicate: 0.005, delete: 0.005 }
    }
}

/// Roll for one architecture event. Events that would break a limit
/// (subroutine capacity, node cap) degrade to no-ops.
pub fn architecture_event(program: TreeProgram, probs: &ArchProbs, rng: &mut EvoRng) -> TreeProgram {
    let u = rng.gen::<f64>();
    if u < probs.create {
        create_subroutine(program, rng)
    } else if u < probs.create + probs.duplicate {
        duplicate_subroutine(program, rng)
    } else if u < probs.create + probs.duplicate + probs.delete {
        delete_subroutine(program, rng)
    } else {
        program
    }
}

/// Excise a random subtree of the main tree into a new two-argument
/// subroutine: two of its leaves become the arguments and the subtree is
/// replaced by a call whose argument expressions are those leaves. The
/// transformation preserves program semantics and adds exactly 3 nodes.
pub fn create_subroutine(program: TreeProgram, rng: &mut EvoRng) -> TreeProgram {
    if program.subroutines.len() >= MAX_SUBROUTINES
        || program.total_nodes() + 3 > NODE_CAP
    {
        return program;
    }
    let start = rng.gen_range(0..program.main.len());
    let end = subtree_end(&program.main, start);
    let mut body: Vec<Node> = program.main[start..end].to_vec();
    let leaves: Vec<usize> = (0..body.len()).filter(|&i| body[i].arity() == 0).collect();
    let i0 = rng.gen_range(0..leaves.len());
    let l0 = leaves[i0];
    let l1 = if leaves.len() >= 2 {
        let mut j = rng.gen_range(0..leaves.len() - 1);
        if j >= i0 {
            j += 1;
        }
        leaves[j]
    } else {
        l0
    };
    let arg0 = body[l0];
    let arg1 = body[l1];
    body[l0] = Node::Arg(0);
    if l1 != l0 {
        body[l1] = Node::Arg(1);
    }
    let new_index = program.subroutines.len() as u8;
    let mut child = program;
    child.subroutines.push(body);
    child
        .main
        .splice(start..end, [Node::Call(new_index), arg0, arg1]);
    debug_assert!(child.validate().is_ok());
    child
}

/// Copy a random subroutine into a free slot and rebind a random subset
/// of its main-tree call sites to the copy. Semantics are unchanged.
pub fn duplicate_subroutine(program: TreeProgram, rng: &mut EvoRng) -> TreeProgram {
    if program.subroutines.is_empty() || program.subroutines.len() >= MAX_SUBROUTINES {
        return program;
    }
    let src = rng.gen_range(0..program.subroutines.len());
    let body = program.subroutines[src].clone();
    if program.total_nodes() + body.len() > NODE_CAP {
        return program;
    }
    let new_index = program.subroutines.len() as u8;
    let mut child = program;
    child.subroutines.push(body);
    // Only main-tree call sites may rebind: a site inside an earlier
    // subroutine body cannot legally reference the new, higher index.
    for node in child.main.iter_mut() {
        if *node == Node::Call(src as u8) && rng.gen::<bool>() {
            *node = Node::Call(new_index);
        }
    }
    debug_assert!(child.validate().is_ok());
    child
}

/// Inline a random subroutine into all of its call sites and drop it.
/// A result that would exceed the node cap leaves the program unchanged.
pub fn delete_subroutine(program: TreeProgram, rng: &mut EvoRng) -> TreeProgram {
    if program.subroutines.is_empty() {
        return program;
    }
    let target = rng.gen_range(0..program.subroutines.len());
    let body = program.subroutines[target].clone();

    let inline = |nodes: &[Node]| -> Option<Vec<Node>> {
        let mut out = Vec::with_capacity(nodes.len());
        let mut cursor = 0;
        while cursor < nodes.len() {
            if !inline_expr(nodes, &mut cursor, target as u8, &body, &mut out) {
                return None;
            }
        }
        Some(out)
    };

    let new_main = match inline(&program.main) {
        Some(m) => m,
        None => return program,
    };
    // Only bodies after `target` can call it.
    let mut new_subs: Vec<Vec<Node>> = Vec::with_capacity(program.subroutines.len() - 1);
    for (k, sub) in program.subroutines.iter().enumerate() {
        if k == target {
            continue;
        }
        if k < target {
            new_subs.push(sub.clone());
        } else {
            match inline(sub) {
                Some(s) => new_subs.push(s),
                None => return program,
            }
        }
    }
    let total: usize = new_main.len() + new_subs.iter().map(Vec::len).sum::<usize>();
    if total > NODE_CAP {
        return program;
    }
    // Reindex calls above the removed slot.
    let reindex = |nodes: &mut Vec<Node>| {
        for n in nodes.iter_mut() {
            if let Node::Call(s) = n {
                if (*s as usize) > target {
                    *s -= 1;
                }
            }
        }
    };
    let mut child = TreeProgram {
        main: new_main,
        subroutines: new_subs,
        statement_set: program.statement_set,
        n_bits: program.n_bits,
    };
    reindex(&mut child.main);
    for sub in child.subroutines.iter_mut() {
        reindex(sub);
    }
    debug_assert!(child.validate().is_ok());
    child
}

/// Copy one expression from `nodes` to `out`, expanding every call of
/// `target` by substituting its (already expanded) argument expressions
/// into the body's `Arg` leaves. Bails out (returning false) as soon as
/// `out` grows past the node cap.
fn inline_expr(
    nodes: &[Node],
    cursor: &mut usize,
    target: u8,
    body: &[Node],
    out: &mut Vec<Node>,
) -> bool {
    let node = nodes[*cursor];
    *cursor += 1;
    match node {
        Node::Call(c) if c == target => {
            let mut a0 = Vec::new();
            let mut a1 = Vec::new();
            if !inline_expr(nodes, cursor, target, body, &mut a0)
                || !inline_expr(nodes, cursor, target, body, &mut a1)
            {
                return false;
            }
            for &bn in body {
                match bn {
                    Node::Arg(0) => out.extend_from_slice(&a0),
                    Node::Arg(_) => out.extend_from_slice(&a1),
                    other => out.push(other),
                }
                if out.len() > NODE_CAP {
                    return false;
                }
            }
            true
        }
        other => {
            out.push(other);
            if out.len() > NODE_CAP {
                return false;
            }
            (0..other.arity()).all(|_| inline_expr(nodes, cursor, target, body, out))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tree::{
        parity_fitness, random_tree, LengthDistribution, OutputInterpretation, TreeStatementSet,
    };

    fn sample_program(seed: u64, subs: bool) -> TreeProgram {
        let mut rng = rng_from_seed(seed);
        let dist = if subs {
            LengthDistribution::seed_default_with_subroutines()
        } else {
            LengthDistribution::seed_default()
        };
        random_tree(TreeStatementSet::Set1, &dist, 4, subs, &mut rng)
    }

    #[test]
    fn crossover_at_roots_exchanges_mains() {
        // Drive the RNG until both points land on the roots; with whole
        // mains swapped the children are the parents with mains exchanged.
        let a = sample_program(1, false);
        let b = sample_program(2, false);
        for seed in 0..10_000u64 {
            let mut rng = rng_from_seed(seed);
            let (c1, c2) = subtree_crossover(&a, &b, &mut rng);
            if c1.main == b.main && c2.main == a.main {
                return; // found a root-root swap
            }
        }
        panic!("no root-root swap over 10^4 seeds");
    }

    #[test]
    fn crossover_conserves_nodes_or_copies_parent() {
        let mut rng = rng_from_seed(3);
        let dist = LengthDistribution::seed_default();
        for _ in 0..2_000 {
            let a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            let b = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            let (c1, c2) = subtree_crossover(&a, &b, &mut rng);
            c1.validate().unwrap();
            c2.validate().unwrap();
            let parents = a.total_nodes() + b.total_nodes();
            let children = c1.total_nodes() + c2.total_nodes();
            let copied = c1 == a || c2 == b;
            assert!(
                children == parents || copied,
                "nodes not conserved without a cap copy"
            );
        }
    }

    #[test]
    fn crossover_cap_trip_copies_first_parent() {
        // Parents near the cap with very lopsided subtrees will sooner or
        // later produce an over-cap child, which must be a node-identical
        // copy of its first parent.
        let mut rng = rng_from_seed(4);
        let dist = LengthDistribution {
            buckets: {
                let mut b = [0.0; 20];
                b[19] = 1.0; // 191..=200 nodes
                b
            },
            subroutine_counts: None,
        };
        let mut tripped = false;
        for _ in 0..2_000 {
            let a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            let b = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            let (c1, c2) = subtree_crossover(&a, &b, &mut rng);
            assert!(c1.total_nodes() <= NODE_CAP && c2.total_nodes() <= NODE_CAP);
            let parents = a.total_nodes() + b.total_nodes();
            if c1.total_nodes() + c2.total_nodes() != parents {
                assert!(c1 == a || c2 == b);
                tripped = true;
            }
        }
        assert!(tripped, "cap never tripped near the node limit");
    }

    #[test]
    fn mutation_respects_cap_and_changes_something() {
        let mut rng = rng_from_seed(5);
        let dist = LengthDistribution::seed_default();
        let mut changed = 0;
        for _ in 0..2_000 {
            let a = random_tree(TreeStatementSet::Set5, &dist, 4, false, &mut rng);
            let m = subtree_mutation(&a, &mut rng);
            m.validate().unwrap();
            assert!(m.total_nodes() <= NODE_CAP);
            if m != a {
                changed += 1;
            }
        }
        // Equality only happens when the replacement reproduces the
        // removed subtree, which is rare.
        assert!(changed > 1_900, "only {changed} of 2000 mutations changed the tree");
    }

    #[test]
    fn create_event_is_semantics_preserving() {
        let mut rng = rng_from_seed(6);
        let dist = LengthDistribution::seed_default();
        for _ in 0..300 {
            let a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            let before = parity_fitness(&a, OutputInterpretation::NonzeroOne);
            let b = create_subroutine(a.clone(), &mut rng);
            b.validate().unwrap();
            if b != a {
                assert_eq!(b.subroutines.len(), a.subroutines.len() + 1);
                assert_eq!(b.total_nodes(), a.total_nodes() + 3);
            }
            assert_eq!(parity_fitness(&b, OutputInterpretation::NonzeroOne), before);
        }
    }

    #[test]
    fn create_event_at_capacity_is_noop() {
        let mut rng = rng_from_seed(7);
        let dist = LengthDistribution::seed_default();
        let mut a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
        for _ in 0..MAX_SUBROUTINES {
            a = create_subroutine(a, &mut rng);
        }
        assert_eq!(a.subroutines.len(), MAX_SUBROUTINES);
        let b = create_subroutine(a.clone(), &mut rng);
        assert_eq!(a, b);
    }

    #[test]
    fn delete_event_inlines_without_changing_fitness() {
        let mut rng = rng_from_seed(8);
        let dist = LengthDistribution::seed_default();
        let mut deletions = 0;
        for _ in 0..300 {
            let mut a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            a = create_subroutine(a, &mut rng);
            let before = parity_fitness(&a, OutputInterpretation::NonzeroOne);
            let b = delete_subroutine(a.clone(), &mut rng);
            b.validate().unwrap();
            assert_eq!(parity_fitness(&b, OutputInterpretation::NonzeroOne), before);
            if b.subroutines.len() < a.subroutines.len() {
                deletions += 1;
            }
        }
        assert!(deletions > 0);
    }

    #[test]
    fn duplicate_then_delete_copy_restores_semantics() {
        let mut rng = rng_from_seed(9);
        let dist = LengthDistribution::seed_default();
        for _ in 0..200 {
            let mut a = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            a = create_subroutine(a, &mut rng);
            if a.subroutines.is_empty() {
                continue;
            }
            let before = parity_fitness(&a, OutputInterpretation::NonzeroOne);
            let b = duplicate_subroutine(a.clone(), &mut rng);
            b.validate().unwrap();
            assert_eq!(parity_fitness(&b, OutputInterpretation::NonzeroOne), before);
            let c = delete_subroutine(b, &mut rng);
            c.validate().unwrap();
            assert_eq!(parity_fitness(&c, OutputInterpretation::NonzeroOne), before);
        }
    }

    #[test]
    fn architecture_events_fuzz_keeps_invariants() {
        let mut rng = rng_from_seed(10);
        let dist = LengthDistribution::seed_default_with_subroutines();
        let probs = ArchProbs { create: 0.4, duplicate: 0.3, delete: 0.3 };
        let mut p = random_tree(TreeStatementSet::Set5, &dist, 4, true, &mut rng);
        for _ in 0..3_000 {
            p = architecture_event(p, &probs, &mut rng);
            p.validate().unwrap();
            assert!(p.total_nodes() <= NODE_CAP);
            assert!(p.subroutines.len() <= MAX_SUBROUTINES);
            // Shake the tree so the events keep seeing fresh structures.
            p = subtree_mutation(&p, &mut rng);
            p.validate().unwrap();
        }
    }
}
