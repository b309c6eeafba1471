//! The interface a problem system exposes to the evolution engine.

use crate::rng::EvoRng;

/// A complete problem definition: genome sampler, fitness function and
/// variation operators.
///
/// `Context` carries per-generation evaluation state shared by the whole
/// population of that generation (the sorting system draws three fresh
/// lists each generation); systems with a fixed fitness landscape use `()`.
pub trait System: Sync {
    type Genome: Clone + Send + Sync;
    type Context: Send + Sync;

    /// Draw one genome from the system's sampling distribution.
    fn random_genome(&self, rng: &mut EvoRng) -> Self::Genome;

    /// Draw the evaluation context for one generation.
    fn generation_context(&self, rng: &mut EvoRng) -> Self::Context;

    fn fitness(&self, genome: &Self::Genome, ctx: &Self::Context) -> f64;

    /// Recombine two parents into two children. No mutation.
    fn crossover(
        &self,
        a: &Self::Genome,
        b: &Self::Genome,
        rng: &mut EvoRng,
    ) -> (Self::Genome, Self::Genome);

    /// The system's whole-genome mutation step. Under tournament selection
    /// the engine applies it to each child with probability
    /// `mutation_prob`.
    fn mutate(&self, genome: &Self::Genome, rng: &mut EvoRng) -> Self::Genome;

    /// Breeding step for truncation selection: crossover with the mutation
    /// rate folded in. The default treats `mutation_prob` as a per-child
    /// whole-genome mutation probability; systems with per-element mutation
    /// (the linear sorting system mutates each statement independently)
    /// override this.
    fn crossover_with_mutation(
        &self,
        a: &Self::Genome,
        b: &Self::Genome,
        mutation_prob: f64,
        rng: &mut EvoRng,
    ) -> (Self::Genome, Self::Genome) {
        use rand::Rng;
        let (mut c1, mut c2) = self.crossover(a, b, rng);
        if rng.gen::<f64>() < mutation_prob {
            c1 = self.mutate(&c1, rng);
        }
        if rng.gen::<f64>() < mutation_prob {
            c2 = self.mutate(&c2, rng);
        }
        (c1, c2)
    }

    /// Hook applied to every child after variation. Used by the tree system
    /// for subroutine architecture events; identity elsewhere.
    fn post_variation(&self, genome: Self::Genome, _rng: &mut EvoRng) -> Self::Genome {
        genome
    }
}
