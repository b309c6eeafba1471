//! Random program generation steered by a node-count distribution.
//!
//! The universe of all possible trees is dominated by maximum-length
//! programs (roughly half of all distinct trees have the full 200 nodes),
//! which looks nothing like the programs evolution actually produces.
//! Density measurements therefore sample from an explicit
//! [`LengthDistribution`], ideally the self-consistent one computed by
//! [`self_consistent_distribution`](super::self_consistent_distribution).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Node, TreeProgram, TreeStatementSet, MAX_SUBROUTINES, NODE_CAP};
use crate::rng::EvoRng;

/// Number of node-count buckets.
pub const LENGTH_BUCKETS: usize = 20;
/// Width of each bucket: bucket `k` covers node counts
/// `[10k + 1, 10k + 10]`.
pub const BUCKET_WIDTH: usize = 10;

/// Histogram over program node counts (bucket width 10 spanning 1..=200),
/// with an optional histogram over subroutine counts 0..=4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthDistribution {
    pub buckets: [f64; LENGTH_BUCKETS],
    pub subroutine_counts: Option<[f64; MAX_SUBROUTINES + 1]>,
}

impl LengthDistribution {
    /// The default seed distribution: uniform weight on lengths 10..=50
    /// with a linear tail falling to zero at 100 (the shape of evolved
    /// working programs).
    pub fn seed_default() -> Self {
        let mut buckets = [0.0; LENGTH_BUCKETS];
        for (k, bucket) in buckets.iter_mut().enumerate() {
            let weight: f64 = (1..=BUCKET_WIDTH)
                .map(|off| {
                    let len = k * BUCKET_WIDTH + off;
                    if (10..=50).contains(&len) {
                        1.0
                    } else if (51..=100).contains(&len) {
                        (100 - len) as f64 / 50.0
                    } else {
                        0.0
                    }
                })
                .sum();
            *bucket = weight;
        }
        let mut dist = LengthDistribution { buckets, subroutine_counts: None };
        dist.normalize();
        dist
    }

    /// Seed distribution with a uniform subroutine-count histogram.
    pub fn seed_default_with_subroutines() -> Self {
        let mut dist = Self::seed_default();
        dist.subroutine_counts = Some([0.2; MAX_SUBROUTINES + 1]);
        dist
    }

    pub fn normalize(&mut self) {
        let total: f64 = self.buckets.iter().sum();
        assert!(total > 0.0, "length distribution has no mass");
        for b in self.buckets.iter_mut() {
            *b /= total;
        }
        if let Some(subs) = self.subroutine_counts.as_mut() {
            let total: f64 = subs.iter().sum();
            assert!(total > 0.0, "subroutine distribution has no mass");
            for s in subs.iter_mut() {
                *s /= total;
            }
        }
    }

    /// Histogram of observed node counts (and subroutine counts when
    /// given).
    pub fn from_observations(lengths: &[usize], sub_counts: Option<&[usize]>) -> Self {
        assert!(!lengths.is_empty());
        let mut buckets = [0.0; LENGTH_BUCKETS];
        for &len in lengths {
            buckets[Self::bucket_of(len)] += 1.0;
        }
        let subroutine_counts = sub_counts.map(|counts| {
            let mut hist = [0.0; MAX_SUBROUTINES + 1];
            for &c in counts {
                hist[c.min(MAX_SUBROUTINES)] += 1.0;
            }
            hist
        });
        let mut dist = LengthDistribution { buckets, subroutine_counts };
        dist.normalize();
        dist
    }

    pub fn bucket_of(length: usize) -> usize {
        (length.clamp(1, NODE_CAP) - 1) / BUCKET_WIDTH
    }

    /// Draw a node-count target: bucket by weight, then uniform within the
    /// bucket.
    pub fn sample_length(&self, rng: &mut EvoRng) -> usize {
        let k = sample_weighted(&self.buckets, rng);
        rng.gen_range(k * BUCKET_WIDTH + 1..=(k + 1) * BUCKET_WIDTH)
    }

    pub fn sample_subroutine_count(&self, rng: &mut EvoRng) -> usize {
        match &self.subroutine_counts {
            Some(hist) => sample_weighted(hist, rng),
            None => 0,
        }
    }

    /// Total-variation distance over the length buckets, combined with the
    /// subroutine histograms (when both sides carry one) by taking the
    /// larger of the two distances.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let tv_len = 0.5
            * self
                .buckets
                .iter()
                .zip(&other.buckets)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        match (&self.subroutine_counts, &other.subroutine_counts) {
            (Some(a), Some(b)) => {
                let tv_sub =
                    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
                tv_len.max(tv_sub)
            }
            _ => tv_len,
        }
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn blend(&self, other: &Self, w: f64) -> Self {
        let mut buckets = [0.0; LENGTH_BUCKETS];
        for (i, b) in buckets.iter_mut().enumerate() {
            *b = w * self.buckets[i] + (1.0 - w) * other.buckets[i];
        }
        let subroutine_counts = match (&self.subroutine_counts, &other.subroutine_counts) {
            (Some(a), Some(b)) => {
                let mut hist = [0.0; MAX_SUBROUTINES + 1];
                for (i, h) in hist.iter_mut().enumerate() {
                    *h = w * a[i] + (1.0 - w) * b[i];
                }
                Some(hist)
            }
            (Some(a), None) => Some(*a),
            (None, Some(b)) => Some(*b),
            (None, None) => None,
        };
        let mut dist = LengthDistribution { buckets, subroutine_counts };
        dist.normalize();
        dist
    }
}

fn sample_weighted(weights: &[f64], rng: &mut EvoRng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// What may appear inside the expression being generated.
#[derive(Clone, Copy, Debug)]
pub struct ExprContext {
    pub n_bits: usize,
    /// Argument leaves allowed (inside a subroutine body).
    pub args_allowed: bool,
    /// Subroutines 0..callable_subs may be called.
    pub callable_subs: usize,
}

/// Grow a random expression with exactly `budget` nodes: node kinds drawn
/// uniformly among the choices the remaining budget permits, binary
/// operators splitting the remainder uniformly between their children.
pub fn random_expr(
    set: TreeStatementSet,
    budget: usize,
    ctx: &ExprContext,
    out: &mut Vec<Node>,
    rng: &mut EvoRng,
) {
    debug_assert!(budget >= 1);
    if budget == 1 {
        let kinds = if ctx.args_allowed { 3 } else { 2 };
        match rng.gen_range(0..kinds) {
            0 => out.push(Node::Input(rng.gen_range(0..ctx.n_bits) as u8)),
            1 => {
                let range = set.const_range();
                out.push(Node::Const(rng.gen_range(*range.start()..=*range.end())));
            }
            _ => out.push(Node::Arg(rng.gen_range(0..2u8))),
        }
        return;
    }
    if budget == 2 {
        let unary = set.unary_ops();
        out.push(Node::Op(unary[rng.gen_range(0..unary.len())]));
        random_expr(set, 1, ctx, out, rng);
        return;
    }
    // budget >= 3: every operator (and a subroutine call) fits.
    let ops = set.ops();
    let n_choices = ops.len() + usize::from(ctx.callable_subs > 0);
    let choice = rng.gen_range(0..n_choices);
    let arity = if choice < ops.len() {
        let op = ops[choice];
        out.push(Node::Op(op));
        op.arity()
    } else {
        out.push(Node::Call(rng.gen_range(0..ctx.callable_subs) as u8));
        2
    };
    if arity == 1 {
        random_expr(set, budget - 1, ctx, out, rng);
    } else {
        let left = rng.gen_range(1..=budget - 2);
        random_expr(set, left, ctx, out, rng);
        random_expr(set, budget - 1 - left, ctx, out, rng);
    }
}

/// Draw a whole program whose total node count follows the distribution:
/// a target is sampled, split across the subroutine bodies (when enabled)
/// and the main tree, and each component is grown to its exact share.
pub fn random_tree(
    set: TreeStatementSet,
    dist: &LengthDistribution,
    n_bits: usize,
    subroutines_enabled: bool,
    rng: &mut EvoRng,
) -> TreeProgram {
    let target = dist.sample_length(rng);
    let sub_count = if subroutines_enabled {
        dist.sample_subroutine_count(rng)
    } else {
        0
    };
    // Each subroutine body takes an equal share of the budget, but never
    // so much that the main tree would starve.
    let mut remaining = target;
    let mut subroutines: Vec<Vec<Node>> = Vec::with_capacity(sub_count);
    for i in 0..sub_count {
        let components_left = sub_count - i + 1;
        let share = (remaining / components_left).clamp(1, remaining.saturating_sub(components_left - 1).max(1));
        let mut body = Vec::with_capacity(share);
        random_expr(
            set,
            share,
            &ExprContext { n_bits, args_allowed: true, callable_subs: i },
            &mut body,
            rng,
        );
        remaining -= share;
        subroutines.push(body);
    }
    let mut main = Vec::with_capacity(remaining.max(1));
    random_expr(
        set,
        remaining.max(1),
        &ExprContext { n_bits, args_allowed: false, callable_subs: subroutines.len() },
        &mut main,
        rng,
    );
    TreeProgram { main, subroutines, statement_set: set, n_bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn seed_distribution_shape() {
        let d = LengthDistribution::seed_default();
        assert!((d.buckets.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Uniform across 11..=50, tailing off to zero by 100.
        assert!(d.buckets[1] > 0.0 && d.buckets[4] > 0.0);
        assert!((d.buckets[1] - d.buckets[4]).abs() < 1e-12);
        assert!(d.buckets[5] < d.buckets[4]);
        assert!(d.buckets[9] < d.buckets[6]);
        for k in 10..LENGTH_BUCKETS {
            assert_eq!(d.buckets[k], 0.0);
        }
    }

    #[test]
    fn target_one_gives_a_single_leaf() {
        let mut rng = rng_from_seed(0);
        let ctx = ExprContext { n_bits: 4, args_allowed: false, callable_subs: 0 };
        for _ in 0..100 {
            let mut out = Vec::new();
            random_expr(TreeStatementSet::Set1, 1, &ctx, &mut out, &mut rng);
            assert_eq!(out.len(), 1);
            assert!(matches!(out[0], Node::Input(_) | Node::Const(_)));
        }
    }

    #[test]
    fn generated_node_count_hits_target_exactly() {
        let mut rng = rng_from_seed(1);
        let ctx = ExprContext { n_bits: 4, args_allowed: false, callable_subs: 0 };
        for set in [
            TreeStatementSet::Set1,
            TreeStatementSet::Set2,
            TreeStatementSet::Set3,
            TreeStatementSet::Set4,
            TreeStatementSet::Set5,
        ] {
            for target in [1usize, 2, 3, 7, 20, 200] {
                let mut out = Vec::new();
                random_expr(set, target, &ctx, &mut out, &mut rng);
                assert_eq!(out.len(), target, "set {set:?} target {target}");
                assert_eq!(super::super::subtree_end(&out, 0), target);
            }
        }
    }

    #[test]
    fn generated_programs_validate_and_respect_set_closure() {
        let mut rng = rng_from_seed(2);
        let dist = LengthDistribution::seed_default();
        for _ in 0..500 {
            let p = random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng);
            p.validate().unwrap();
            for n in &p.main {
                match n {
                    Node::Op(op) => assert!(TreeStatementSet::Set1.ops().contains(op)),
                    Node::Const(c) => assert!((0..=1).contains(c)),
                    Node::Input(i) => assert!((*i as usize) < 4),
                    other => panic!("unexpected node {other:?} without subroutines"),
                }
            }
        }
    }

    #[test]
    fn generated_programs_with_subroutines_validate() {
        let mut rng = rng_from_seed(3);
        let dist = LengthDistribution::seed_default_with_subroutines();
        let mut saw_subs = false;
        for _ in 0..500 {
            let p = random_tree(TreeStatementSet::Set5, &dist, 4, true, &mut rng);
            p.validate().unwrap();
            saw_subs |= !p.subroutines.is_empty();
            assert!(p.total_nodes() <= NODE_CAP);
        }
        assert!(saw_subs);
    }

    #[test]
    fn sampled_lengths_match_requested_distribution() {
        // Empirical bucket histogram of 10^4 generated programs within
        // total variation 0.05 of the requested distribution.
        let mut rng = rng_from_seed(4);
        let dist = LengthDistribution::seed_default();
        let lengths: Vec<usize> = (0..10_000)
            .map(|_| random_tree(TreeStatementSet::Set1, &dist, 4, false, &mut rng).total_nodes())
            .collect();
        let observed = LengthDistribution::from_observations(&lengths, None);
        let tv = dist.tv_distance(&observed);
        assert!(tv < 0.05, "total variation {tv}");
    }

    #[test]
    fn tv_distance_and_blend() {
        let a = LengthDistribution::seed_default();
        assert_eq!(a.tv_distance(&a), 0.0);
        let mut b = a.clone();
        b.buckets.rotate_right(5);
        let tv = a.tv_distance(&b);
        assert!(tv > 0.1 && tv <= 1.0);
        let half = a.blend(&b, 0.5);
        let expected = 0.5 * a.tv_distance(&b);
        assert!((a.tv_distance(&half) - expected).abs() < 1e-9);
    }
}
