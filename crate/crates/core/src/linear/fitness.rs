//! Sorting fitness: distance metrics and the three-list evaluation.

use rand::seq::SliceRandom;

use super::vm::{execute_in_place, BudgetModel};
use super::{crossover_linear, random_program, random_statement, LinearProgram, StatementSet};
use crate::rng::EvoRng;
use crate::system::System;

/// The three list lengths every program is scored on.
pub const DEFAULT_LIST_SIZES: [usize; 3] = [10, 30, 50];

/// Sum over positions of `|list[k] - (k+1)|`: zero for a sorted list.
pub fn forward_distance(list: &[i64]) -> u64 {
    list.iter()
        .enumerate()
        .map(|(k, &x)| (x - (k as i64 + 1)).unsigned_abs())
        .sum()
}

/// Sum over positions of `|list[k] - (L-k)|`: zero for a reverse-sorted
/// list.
pub fn reverse_distance(list: &[i64]) -> u64 {
    let l = list.len() as i64;
    list.iter()
        .enumerate()
        .map(|(k, &x)| (x - (l - k as i64)).unsigned_abs())
        .sum()
}

/// `(reverse - forward) / (reverse + forward)`: 1 for a sorted list, -1
/// for a reverse-sorted one. The degenerate 0/0 case (unreachable for
/// permutations of length >= 2) is defined as 0.
pub fn normalized_metric(forward: u64, reverse: u64) -> f64 {
    let sum = forward + reverse;
    if sum == 0 {
        return 0.0;
    }
    (reverse as f64 - forward as f64) / sum as f64
}

/// Evaluation context for one generation: freshly shuffled lists, shared
/// by every program scored that generation, each with its own execution
/// budget.
#[derive(Clone, Debug)]
pub struct SortContext {
    pub lists: Vec<Vec<i64>>,
    pub budgets: Vec<u64>,
}

impl SortContext {
    pub fn random(sizes: &[usize], budget: &BudgetModel, rng: &mut EvoRng) -> Self {
        let lists: Vec<Vec<i64>> = sizes
            .iter()
            .map(|&l| {
                let mut list: Vec<i64> = (1..=l as i64).collect();
                list.shuffle(rng);
                list
            })
            .collect();
        let budgets = sizes.iter().map(|&l| budget.budget(l)).collect();
        SortContext { lists, budgets }
    }
}

/// Average of the normalized metrics the program achieves on the context's
/// lists. Budget exhaustion carries no penalty beyond the list state at
/// termination.
pub fn sort_fitness(program: &LinearProgram, ctx: &SortContext) -> f64 {
    let mut total = 0.0;
    let mut scratch: Vec<i64> = Vec::with_capacity(64);
    for (list, &budget) in ctx.lists.iter().zip(&ctx.budgets) {
        scratch.clear();
        scratch.extend_from_slice(list);
        execute_in_place(program, &mut scratch, budget);
        total += normalized_metric(forward_distance(&scratch), reverse_distance(&scratch));
    }
    total / ctx.lists.len() as f64
}

/// The linear sorting problem as an evolvable system. Working means a
/// fitness of exactly 1.0 (all three lists sorted), so runs use a
/// termination value of 1.0.
#[derive(Clone, Debug)]
pub struct SortingSystem {
    pub statement_set: StatementSet,
    pub program_length: usize,
    pub writable_vars: usize,
    pub list_sizes: Vec<usize>,
    pub budget: BudgetModel,
}

impl SortingSystem {
    pub fn new(statement_set: StatementSet, program_length: usize, writable_vars: usize) -> Self {
        SortingSystem {
            statement_set,
            program_length,
            writable_vars,
            list_sizes: DEFAULT_LIST_SIZES.to_vec(),
            budget: BudgetModel::default(),
        }
    }
}

impl System for SortingSystem {
    type Genome = LinearProgram;
    type Context = SortContext;

    fn random_genome(&self, rng: &mut EvoRng) -> LinearProgram {
        random_program(self.statement_set, self.program_length, self.writable_vars, rng)
    }

    fn generation_context(&self, rng: &mut EvoRng) -> SortContext {
        SortContext::random(&self.list_sizes, &self.budget, rng)
    }

    fn fitness(&self, genome: &LinearProgram, ctx: &SortContext) -> f64 {
        sort_fitness(genome, ctx)
    }

    fn crossover(
        &self,
        a: &LinearProgram,
        b: &LinearProgram,
        rng: &mut EvoRng,
    ) -> (LinearProgram, LinearProgram) {
        crossover_linear(a, b, 0.0, rng)
    }

    /// Whole-genome mutation step (tournament scheme only; the truncation
    /// scheme mutates per statement inside breeding): one uniformly chosen
    /// statement is replaced by a fresh random one.
    fn mutate(&self, genome: &LinearProgram, rng: &mut EvoRng) -> LinearProgram {
        use rand::Rng;
        let mut child = genome.clone();
        let i = rng.gen_range(0..child.statements.len());
        child.statements[i] =
            random_statement(self.statement_set, self.program_length, self.writable_vars, rng);
        child
    }

    fn crossover_with_mutation(
        &self,
        a: &LinearProgram,
        b: &LinearProgram,
        mutation_prob: f64,
        rng: &mut EvoRng,
    ) -> (LinearProgram, LinearProgram) {
        crossover_linear(a, b, mutation_prob, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::canonical_bubble_sort;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    #[test]
    fn distance_examples() {
        assert_eq!(forward_distance(&[1, 2, 3, 4]), 0);
        assert_eq!(reverse_distance(&[1, 2, 3, 4]), 8);
        assert_eq!(forward_distance(&[4, 3, 2, 1]), 8);
        assert_eq!(reverse_distance(&[4, 3, 2, 1]), 0);
        // Direct summation: |2-1|+|1-2|+|4-3|+|3-4| and
        // |2-4|+|1-3|+|4-2|+|3-1|.
        assert_eq!(forward_distance(&[2, 1, 4, 3]), 4);
        assert_eq!(reverse_distance(&[2, 1, 4, 3]), 8);
    }

    #[test]
    fn metric_endpoints() {
        assert_eq!(normalized_metric(0, 8), 1.0);
        assert_eq!(normalized_metric(8, 0), -1.0);
        assert_eq!(normalized_metric(5, 5), 0.0);
        assert_eq!(normalized_metric(0, 0), 0.0);
    }

    #[test]
    fn canonical_sort_scores_one() {
        let sys = SortingSystem::new(StatementSet::Set1, 3, 2);
        let mut rng = rng_from_seed(0);
        let ctx = sys.generation_context(&mut rng);
        let fitness = sys.fitness(&canonical_bubble_sort(2), &ctx);
        assert_eq!(fitness, 1.0);
    }

    #[test]
    fn no_effect_program_scores_the_unchanged_lists() {
        // A program that cannot touch the list must score exactly the
        // metric of the context's lists as they stand.
        use crate::linear::Statement;
        let sys = SortingSystem::new(StatementSet::Set1, 5, 2);
        let mut rng = rng_from_seed(3);
        let ctx = sys.generation_context(&mut rng);
        let p = LinearProgram {
            statements: vec![Statement::CompareSwap { a: 0, b: 0 }; 5],
            statement_set: StatementSet::Set1,
            writable_vars: 2,
        };
        let expected: f64 = ctx
            .lists
            .iter()
            .map(|l| normalized_metric(forward_distance(l), reverse_distance(l)))
            .sum::<f64>()
            / 3.0;
        assert_relative_eq!(sys.fitness(&p, &ctx), expected, max_relative = 1e-12);
    }

    #[test]
    fn fitness_stays_in_bounds_for_random_programs() {
        let sys = SortingSystem::new(StatementSet::Set3, 8, 3);
        let mut rng = rng_from_seed(4);
        let ctx = sys.generation_context(&mut rng);
        for _ in 0..500 {
            let p = sys.random_genome(&mut rng);
            let f = sys.fitness(&p, &ctx);
            assert!((-1.0..=1.0).contains(&f), "fitness {f}");
        }
    }

    #[test]
    fn context_lists_are_fresh_permutations() {
        let sys = SortingSystem::new(StatementSet::Set1, 5, 2);
        let mut rng = rng_from_seed(5);
        let a = sys.generation_context(&mut rng);
        let b = sys.generation_context(&mut rng);
        assert_ne!(a.lists, b.lists);
        for ctx in [&a, &b] {
            for (list, &size) in ctx.lists.iter().zip(&DEFAULT_LIST_SIZES) {
                let mut sorted = list.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, (1..=size as i64).collect::<Vec<_>>());
            }
        }
        assert_eq!(a.budgets, vec![2220, 18620, 51020]);
    }
}
