//! Data-like genomes: real or integer coordinate vectors evaluated by
//! smooth or table-driven fitness landscapes.
//!
//! The parallel landscapes (Gaussian, "highest", linear, binary) reward
//! each coordinate independently. Their anti-parallel ("twisted")
//! counterparts are built either by a rotation-plus-scaling of the real
//! landscapes or by an integer pairing transform of the binary one, so
//! that no single coordinate can be optimized in isolation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::EvoRng;
use crate::system::System;

/// Real genome: `n` coordinates, each in `[-1.0, 1.0)`.
pub type RealGenome = Vec<f64>;
/// Integer genome: `n` coordinates over a system-specific inclusive range.
pub type IntGenome = Vec<i64>;

// ---------------------------------------------------------------------------
// Fitness landscapes
// ---------------------------------------------------------------------------

/// `e^{-r^2}` with `r` the Euclidean distance to the origin.
pub fn gaussian_fitness(x: &[f64]) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>()).exp()
}

/// `1 - sum(|x_i|)`.
pub fn linear_fitness(x: &[f64]) -> f64 {
    1.0 - x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Number of coordinates equal to `p`; a genome works when all of them
/// are, i.e. fitness equals the dimension count.
pub fn highest_fitness(x: &[i64], p: i64) -> u64 {
    x.iter().filter(|&&v| v == p).count() as u64
}

/// Per-dimension fitness table for the binary landscape: the 0-based entry
/// at index `i` is the least set bit of `i + 1`. For `b` bits the table
/// has `2^b - 1` entries.
pub fn least_set_bit_table(bits: u32) -> Vec<i64> {
    let n = (1u64 << bits) - 1;
    (1..=n as i64).map(|v| v & v.wrapping_neg()).collect()
}

/// Sum of table values over the coordinates. `table` must come from
/// [`least_set_bit_table`] for the system's bit width.
pub fn binary_fitness(x: &[i64], table: &[i64]) -> i64 {
    x.iter().map(|&v| table[v as usize]).sum()
}

/// The integer pairing transform that twists the binary landscape:
/// `u = (x + y) div 2` (integer division), `v = |x - y|`.
pub fn twist_pair(x: i64, y: i64) -> (i64, i64) {
    ((x + y).div_euclid(2), (x - y).abs())
}

/// Twisted binary fitness: coordinates are consumed in adjacent pairs,
/// each pair transformed by [`twist_pair`] before the table lookup, so the
/// dimension count must be even.
pub fn twisted_binary_fitness(x: &[i64], table: &[i64]) -> i64 {
    debug_assert!(x.len() % 2 == 0);
    x.chunks_exact(2)
        .map(|pair| {
            let (u, v) = twist_pair(pair[0], pair[1]);
            table[u as usize] + table[v as usize]
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Rotation + scaling (the real-genome twist)
// ---------------------------------------------------------------------------

/// Rotation-and-scaling transform: a chain of 45-degree plane rotations on
/// adjacent coordinate pairs followed by scaling coordinate `i` by
/// `scale_base^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistConfig {
    pub dims: usize,
    pub scale_base: f64,
}

impl TwistConfig {
    pub fn new(dims: usize) -> Self {
        TwistConfig { dims, scale_base: 1.5 }
    }

    /// Apply the rotation chain only: for i = 0..n-2 in order, the pair
    /// `(w_i, w_{i+1})` is replaced by
    /// `(c*w_i - s*w_{i+1}, s*w_i + c*w_{i+1})` with `c = s = sqrt(2)/2`.
    /// The composition is orthonormal, so it preserves Euclidean length.
    pub fn rotate(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dims);
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let mut w = x.to_vec();
        for i in 0..w.len().saturating_sub(1) {
            let (a, b) = (w[i], w[i + 1]);
            w[i] = c * a - c * b;
            w[i + 1] = c * a + c * b;
        }
        w
    }

    /// Full transform `w = S * Q * x`.
    pub fn rotate_scale(&self, x: &[f64]) -> Vec<f64> {
        let mut w = self.rotate(x);
        let mut scale = 1.0;
        for wi in w.iter_mut() {
            *wi *= scale;
            scale *= self.scale_base;
        }
        w
    }

    /// Product of the per-coordinate scale factors, i.e. the volume ratio
    /// the transform applies: `scale_base^(n(n-1)/2)`.
    pub fn scale_product(&self) -> f64 {
        let exponent = (self.dims * self.dims.saturating_sub(1) / 2) as f64;
        self.scale_base.powf(exponent)
    }

    /// Smallest per-coordinate scale factor.
    pub fn min_scale(&self) -> f64 {
        if self.scale_base >= 1.0 {
            1.0
        } else {
            self.scale_base.powi(self.dims as i32 - 1)
        }
    }
}

/// `1 - sum(|w_i|)` over the rotated and scaled coordinates.
pub fn twisted_linear_fitness(x: &[f64], cfg: &TwistConfig) -> f64 {
    1.0 - cfg.rotate_scale(x).iter().map(|v| v.abs()).sum::<f64>()
}

/// `e^{-R^2}` with `R` the Euclidean length of the rotated and scaled
/// vector.
pub fn twisted_gaussian_fitness(x: &[f64], cfg: &TwistConfig) -> f64 {
    (-cfg.rotate_scale(x).iter().map(|v| v * v).sum::<f64>()).exp()
}

// ---------------------------------------------------------------------------
// Variation operators
// ---------------------------------------------------------------------------

/// Replace one uniformly chosen coordinate with a fresh uniform draw from
/// `[-1, 1)`; every other coordinate is untouched.
pub fn mutate_one_real(x: &[f64], rng: &mut EvoRng) -> Vec<f64> {
    let mut child = x.to_vec();
    let i = rng.gen_range(0..child.len());
    child[i] = rng.gen_range(-1.0..1.0);
    child
}

/// Replace one uniformly chosen coordinate with a fresh uniform draw from
/// `[lo, hi]`.
pub fn mutate_one_int(x: &[i64], lo: i64, hi: i64, rng: &mut EvoRng) -> Vec<i64> {
    let mut child = x.to_vec();
    let i = rng.gen_range(0..child.len());
    child[i] = rng.gen_range(lo..=hi);
    child
}

/// Single-cut crossover: cut index uniform in `[1, n-1]`, suffixes
/// exchanged. One-dimensional genomes have no cut; the children are
/// copies.
pub fn crossover_vec<T: Clone>(a: &[T], b: &[T], rng: &mut EvoRng) -> (Vec<T>, Vec<T>) {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return (a.to_vec(), b.to_vec());
    }
    let cut = rng.gen_range(1..n);
    let mut c1 = a[..cut].to_vec();
    c1.extend_from_slice(&b[cut..]);
    let mut c2 = b[..cut].to_vec();
    c2.extend_from_slice(&a[cut..]);
    (c1, c2)
}

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

macro_rules! real_system {
    ($name:ident, $doc:literal, $fitness:expr) => {
        #[doc = $doc]
        #[derive(Clone, Debug)]
        pub struct $name {
            pub dims: usize,
        }

        impl System for $name {
            type Genome = RealGenome;
            type Context = ();

            fn random_genome(&self, rng: &mut EvoRng) -> RealGenome {
                (0..self.dims).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            fn generation_context(&self, _rng: &mut EvoRng) {}
            fn fitness(&self, g: &RealGenome, _ctx: &()) -> f64 {
                #[allow(clippy::redundant_closure_call)]
                ($fitness)(self, g)
            }
            fn crossover(
                &self,
                a: &RealGenome,
                b: &RealGenome,
                rng: &mut EvoRng,
            ) -> (RealGenome, RealGenome) {
                crossover_vec(a, b, rng)
            }
            fn mutate(&self, g: &RealGenome, rng: &mut EvoRng) -> RealGenome {
                mutate_one_real(g, rng)
            }
        }
    };
}

real_system!(
    GaussianSystem,
    "Smooth parallel landscape: `e^{-r^2}` over the real cube.",
    |_s: &GaussianSystem, g: &RealGenome| gaussian_fitness(g)
);

real_system!(
    LinearVectorSystem,
    "Piecewise-linear parallel landscape: `1 - sum(|x_i|)`.",
    |_s: &LinearVectorSystem, g: &RealGenome| linear_fitness(g)
);

/// Anti-parallel variant of [`LinearVectorSystem`] via rotation and
/// scaling: a diagonal ridge no axis-parallel move can climb.
#[derive(Clone, Debug)]
pub struct TwistedLinearSystem {
    pub twist: TwistConfig,
}

impl System for TwistedLinearSystem {
    type Genome = RealGenome;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> RealGenome {
        (0..self.twist.dims).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
    fn generation_context(&self, _rng: &mut EvoRng) {}
    fn fitness(&self, g: &RealGenome, _ctx: &()) -> f64 {
        twisted_linear_fitness(g, &self.twist)
    }
    fn crossover(&self, a: &RealGenome, b: &RealGenome, rng: &mut EvoRng) -> (RealGenome, RealGenome) {
        crossover_vec(a, b, rng)
    }
    fn mutate(&self, g: &RealGenome, rng: &mut EvoRng) -> RealGenome {
        mutate_one_real(g, rng)
    }
}

/// Anti-parallel variant of [`GaussianSystem`] via the same rotation and
/// scaling; smooth, so single-coordinate progress is always possible away
/// from the peak.
#[derive(Clone, Debug)]
pub struct TwistedGaussianSystem {
    pub twist: TwistConfig,
}

impl System for TwistedGaussianSystem {
    type Genome = RealGenome;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> RealGenome {
        (0..self.twist.dims).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
    fn generation_context(&self, _rng: &mut EvoRng) {}
    fn fitness(&self, g: &RealGenome, _ctx: &()) -> f64 {
        twisted_gaussian_fitness(g, &self.twist)
    }
    fn crossover(&self, a: &RealGenome, b: &RealGenome, rng: &mut EvoRng) -> (RealGenome, RealGenome) {
        crossover_vec(a, b, rng)
    }
    fn mutate(&self, g: &RealGenome, rng: &mut EvoRng) -> RealGenome {
        mutate_one_real(g, rng)
    }
}

/// Integer parallel landscape: coordinates in `[1, p]`, fitness = number
/// of coordinates at `p`. Working requires fitness `n`, so use a
/// termination value of `dims`.
#[derive(Clone, Debug)]
pub struct HighestSystem {
    pub dims: usize,
    pub p: i64,
}

impl System for HighestSystem {
    type Genome = IntGenome;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> IntGenome {
        (0..self.dims).map(|_| rng.gen_range(1..=self.p)).collect()
    }
    fn generation_context(&self, _rng: &mut EvoRng) {}
    fn fitness(&self, g: &IntGenome, _ctx: &()) -> f64 {
        highest_fitness(g, self.p) as f64
    }
    fn crossover(&self, a: &IntGenome, b: &IntGenome, rng: &mut EvoRng) -> (IntGenome, IntGenome) {
        crossover_vec(a, b, rng)
    }
    fn mutate(&self, g: &IntGenome, rng: &mut EvoRng) -> IntGenome {
        mutate_one_int(g, 1, self.p, rng)
    }
}

/// Integer parallel landscape over `[0, 2^b - 2]` scored by the least-set-
/// bit table. Maximum fitness is `n * 2^(b-1)`, attained only with every
/// coordinate at `2^(b-1) - 1`.
#[derive(Clone, Debug)]
pub struct BinarySystem {
    pub dims: usize,
    pub bits: u32,
    table: Vec<i64>,
}

impl BinarySystem {
    pub fn new(dims: usize, bits: u32) -> Self {
        BinarySystem { dims, bits, table: least_set_bit_table(bits) }
    }

    pub fn coord_max(&self) -> i64 {
        (1i64 << self.bits) - 2
    }
}

impl System for BinarySystem {
    type Genome = IntGenome;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> IntGenome {
        let hi = self.coord_max();
        (0..self.dims).map(|_| rng.gen_range(0..=hi)).collect()
    }
    fn generation_context(&self, _rng: &mut EvoRng) {}
    fn fitness(&self, g: &IntGenome, _ctx: &()) -> f64 {
        binary_fitness(g, &self.table) as f64
    }
    fn crossover(&self, a: &IntGenome, b: &IntGenome, rng: &mut EvoRng) -> (IntGenome, IntGenome) {
        crossover_vec(a, b, rng)
    }
    fn mutate(&self, g: &IntGenome, rng: &mut EvoRng) -> IntGenome {
        mutate_one_int(g, 0, self.coord_max(), rng)
    }
}

/// Anti-parallel variant of [`BinarySystem`] via the integer pairing
/// transform; requires an even dimension count.
#[derive(Clone, Debug)]
pub struct TwistedBinarySystem {
    pub dims: usize,
    pub bits: u32,
    table: Vec<i64>,
}

impl TwistedBinarySystem {
    pub fn new(dims: usize, bits: u32) -> crate::error::Result<Self> {
        if dims % 2 != 0 {
            return Err(crate::error::Error::InvalidArgument(
                "the twisted binary system pairs coordinates; the dimension count must be even"
                    .into(),
            ));
        }
        Ok(TwistedBinarySystem { dims, bits, table: least_set_bit_table(bits) })
    }

    pub fn coord_max(&self) -> i64 {
        (1i64 << self.bits) - 2
    }

    pub fn fitness_of(&self, g: &[i64]) -> i64 {
        twisted_binary_fitness(g, &self.table)
    }
}

impl System for TwistedBinarySystem {
    type Genome = IntGenome;
    type Context = ();

    fn random_genome(&self, rng: &mut EvoRng) -> IntGenome {
        let hi = self.coord_max();
        (0..self.dims).map(|_| rng.gen_range(0..=hi)).collect()
    }
    fn generation_context(&self, _rng: &mut EvoRng) {}
    fn fitness(&self, g: &IntGenome, _ctx: &()) -> f64 {
        self.fitness_of(g) as f64
    }
    fn crossover(&self, a: &IntGenome, b: &IntGenome, rng: &mut EvoRng) -> (IntGenome, IntGenome) {
        crossover_vec(a, b, rng)
    }
    fn mutate(&self, g: &IntGenome, rng: &mut EvoRng) -> IntGenome {
        mutate_one_int(g, 0, self.coord_max(), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_fitness_examples() {
        assert_eq!(gaussian_fitness(&[0.0, 0.0]), 1.0);
        assert_relative_eq!(
            gaussian_fitness(&[0.1, 0.1]),
            0.980199,
            max_relative = 1e-5
        );
        // Strictly decreasing as any coordinate moves outward.
        let mut prev = gaussian_fitness(&[0.0, 0.3]);
        for step in 1..=10 {
            let f = gaussian_fitness(&[step as f64 * 0.1, 0.3]);
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn highest_fitness_examples() {
        assert_eq!(highest_fitness(&[5, 5, 5], 5), 3);
        assert_eq!(highest_fitness(&[1, 1, 1], 5), 0);
        assert_eq!(highest_fitness(&[5, 1, 5], 5), 2);
    }

    #[test]
    fn least_set_bit_tables() {
        assert_eq!(
            least_set_bit_table(4),
            vec![1, 2, 1, 4, 1, 2, 1, 8, 1, 2, 1, 4, 1, 2, 1]
        );
        assert_eq!(least_set_bit_table(3), vec![1, 2, 1, 4, 1, 2, 1]);
        for b in 1..=8 {
            assert_eq!(least_set_bit_table(b)[0], 1);
        }
    }

    #[test]
    fn binary_fitness_examples() {
        let t3 = least_set_bit_table(3);
        assert_eq!(binary_fitness(&[3, 3], &t3), 8);
        assert_eq!(binary_fitness(&[0, 0, 0], &t3), 3);
        // Maximum n * 2^(b-1), attained only at coordinate 2^(b-1) - 1.
        for b in 2..=6u32 {
            let t = least_set_bit_table(b);
            let argmax: Vec<usize> = (0..t.len())
                .filter(|&i| t[i] == *t.iter().max().unwrap())
                .collect();
            assert_eq!(argmax, vec![(1usize << (b - 1)) - 1]);
            assert_eq!(*t.iter().max().unwrap(), 1i64 << (b - 1));
        }
    }

    #[test]
    fn twist_pair_examples() {
        assert_eq!(twist_pair(2, 5), (3, 3));
        assert_eq!(twist_pair(5, 2), (3, 3));
        assert_eq!(twist_pair(0, 3), (1, 3));
        assert_eq!(twist_pair(0, 0), (0, 0));
        let t3 = least_set_bit_table(3);
        assert_eq!(twisted_binary_fitness(&[2, 5], &t3), 8);
        assert_eq!(twisted_binary_fitness(&[0, 3], &t3), 6);
    }

    #[test]
    fn twisted_binary_b3_landscape_structure() {
        // Exactly the six published fitness-6 points, exactly two
        // fitness-8 points, and no fitness-7 point anywhere in the
        // 49-genome space.
        let sys = TwistedBinarySystem::new(2, 3).unwrap();
        let mut six = vec![];
        let mut eight = vec![];
        for x in 0..=6i64 {
            for y in 0..=6i64 {
                match sys.fitness_of(&[x, y]) {
                    6 => six.push((x, y)),
                    8 => eight.push((x, y)),
                    7 => panic!("fitness 7 should be impossible, got it at ({x},{y})"),
                    _ => {}
                }
            }
        }
        six.sort_unstable();
        assert_eq!(six, vec![(0, 3), (1, 6), (3, 0), (3, 4), (4, 3), (6, 1)]);
        eight.sort_unstable();
        assert_eq!(eight, vec![(2, 5), (5, 2)]);
    }

    #[test]
    fn linear_fitness_examples() {
        assert_eq!(linear_fitness(&[0.0, 0.0]), 1.0);
        assert_eq!(linear_fitness(&[0.5, -0.5]), 0.0);
        let mut rng = rng_from_seed(0);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = linear_fitness(&x);
            assert!(f > 1.0 - 4.0 && f <= 1.0);
        }
    }

    #[test]
    fn rotate_scale_two_dim_diagonal() {
        // x = (a, a) lands on (0, 1.5 * sqrt(2) * a).
        let cfg = TwistConfig::new(2);
        for a in [0.2, -0.4, 0.77] {
            let w = cfg.rotate_scale(&[a, a]);
            assert_relative_eq!(w[0], 0.0, epsilon = 1e-12);
            assert_relative_eq!(w[1], 1.5 * std::f64::consts::SQRT_2 * a, max_relative = 1e-12);
        }
        let w = cfg.rotate_scale(&[0.0, 0.0]);
        assert_eq!(w, vec![0.0, 0.0]);
        assert_eq!(twisted_linear_fitness(&[0.0, 0.0], &cfg), 1.0);
        assert_eq!(twisted_gaussian_fitness(&[0.0, 0.0], &cfg), 1.0);
    }

    #[test]
    fn rotation_is_an_isometry() {
        let mut rng = rng_from_seed(9);
        for n in [2usize, 3, 5, 8] {
            let cfg = TwistConfig::new(n);
            for _ in 0..2_500 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w = cfg.rotate(&x);
                let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nw: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((nx - nw).abs() < 1e-12, "n={n} |x|={nx} |Qx|={nw}");
            }
        }
    }

    #[test]
    fn mutation_changes_at_most_one_coordinate() {
        let mut rng = rng_from_seed(1);
        for _ in 0..500 {
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = mutate_one_real(&x, &mut rng);
            let diffs = x.iter().zip(&y).filter(|(a, b)| a != b).count();
            assert!(diffs <= 1);
            let xi: Vec<i64> = (0..6).map(|_| rng.gen_range(1..=50)).collect();
            let yi = mutate_one_int(&xi, 1, 50, &mut rng);
            assert!(xi.iter().zip(&yi).filter(|(a, b)| a != b).count() <= 1);
        }
        // One-dimensional genomes resample their single coordinate.
        let y = mutate_one_real(&[0.3], &mut rng);
        assert_eq!(y.len(), 1);
    }

    #[test]
    fn mutated_coordinate_is_uniform() {
        // Kolmogorov-Smirnov check of the resampled coordinate against
        // U[-1, 1) over 10^5 draws; critical value 1.63/sqrt(n) at
        // alpha = 0.01.
        let mut rng = rng_from_seed(2);
        let n = 100_000;
        let mut draws: Vec<f64> = Vec::with_capacity(n);
        let x = vec![0.0f64];
        for _ in 0..n {
            draws.push(mutate_one_real(&x, &mut rng)[0]);
        }
        draws.sort_by(|a, b| a.total_cmp(b));
        let mut d_stat: f64 = 0.0;
        for (i, &v) in draws.iter().enumerate() {
            let cdf = (v + 1.0) / 2.0;
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            d_stat = d_stat.max((cdf - emp_lo).abs()).max((emp_hi - cdf).abs());
        }
        assert!(d_stat < 1.63 / (n as f64).sqrt(), "KS statistic {d_stat}");
    }

    #[test]
    fn crossover_definition_and_conservation() {
        let mut rng = rng_from_seed(3);
        let a: Vec<i64> = (0..8).collect();
        let b: Vec<i64> = (100..108).collect();
        let (c1, c2) = crossover_vec(&a, &b, &mut rng);
        let cut = (0..8).find(|&i| c1[i] != a[i]).unwrap_or(8);
        assert_eq!(&c1[..cut], &a[..cut]);
        assert_eq!(&c1[cut..], &b[cut..]);
        assert_eq!(&c2[..cut], &b[..cut]);
        assert_eq!(&c2[cut..], &a[cut..]);
        // Positionwise multiset conservation across the pair.
        for i in 0..8 {
            let mut before = [a[i], b[i]];
            let mut after = [c1[i], c2[i]];
            before.sort_unstable();
            after.sort_unstable();
            assert_eq!(before, after);
        }
        // Identical parents reproduce themselves; n = 1 yields copies.
        let (d1, d2) = crossover_vec(&a, &a, &mut rng);
        assert_eq!(d1, a);
        assert_eq!(d2, a);
        let (e1, e2) = crossover_vec(&[1], &[2], &mut rng);
        assert_eq!((e1, e2), (vec![1], vec![2]));
    }

    #[test]
    fn parallel_landscapes_reward_coordinatewise_greed() {
        // Moving one coordinate toward the optimum with the others held
        // fixed never hurts, and strictly helps off-optimum.
        let mut rng = rng_from_seed(4);
        for _ in 0..300 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let i = rng.gen_range(0..4);
            let mut closer = x.clone();
            closer[i] *= 0.5; // toward 0, the optimum of both real landscapes
            if x[i] != 0.0 {
                assert!(gaussian_fitness(&closer) > gaussian_fitness(&x));
                assert!(linear_fitness(&closer) > linear_fitness(&x));
            }
            let xi: Vec<i64> = (0..4).map(|_| rng.gen_range(1..=10)).collect();
            let mut better = xi.clone();
            better[i] = 10;
            assert!(highest_fitness(&better, 10) >= highest_fitness(&xi, 10));
        }
    }

    #[test]
    fn twisted_linear_ridge_is_anti_parallel() {
        // On the two-dimensional ridge x = (a, -a), any single-coordinate
        // change strictly reduces fitness.
        let cfg = TwistConfig::new(2);
        for step in 0..1_000 {
            let a = -0.69 + 1.38 * (step as f64) / 999.0;
            let x = [a, -a];
            let f0 = twisted_linear_fitness(&x, &cfg);
            for eps in [-0.1, -0.01, 0.01, 0.1] {
                for coord in 0..2 {
                    let mut y = x;
                    y[coord] += eps;
                    if y[coord] < -1.0 || y[coord] >= 1.0 {
                        continue;
                    }
                    assert!(
                        twisted_linear_fitness(&y, &cfg) < f0,
                        "ridge point {x:?}, coord {coord}, eps {eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn twisted_gaussian_always_improvable_off_peak() {
        // The smooth twisted landscape has a nonzero gradient everywhere
        // except the origin: some single-coordinate nudge always raises
        // fitness.
        let mut rng = rng_from_seed(5);
        let cfg = TwistConfig::new(4);
        let h = 1e-4;
        for _ in 0..1_000 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.9..0.9)).collect();
            if x.iter().map(|v| v * v).sum::<f64>() < 1e-6 {
                continue;
            }
            let f0 = twisted_gaussian_fitness(&x, &cfg);
            let improvable = (0..4).any(|i| {
                [h, -h].iter().any(|&eps| {
                    let mut y = x.clone();
                    y[i] += eps;
                    twisted_gaussian_fitness(&y, &cfg) > f0
                })
            });
            assert!(improvable, "no single-coordinate improvement at {x:?}");
        }
    }

    #[test]
    fn twisted_binary_requires_even_dims() {
        assert!(TwistedBinarySystem::new(3, 3).is_err());
        assert!(TwistedBinarySystem::new(2, 3).is_ok());
    }

    #[test]
    fn genome_samplers_respect_bounds() {
        let mut rng = rng_from_seed(6);
        let g = GaussianSystem { dims: 5 };
        let h = HighestSystem { dims: 3, p: 7 };
        let b = BinarySystem::new(4, 3);
        for _ in 0..2_000 {
            assert!(g.random_genome(&mut rng).iter().all(|&v| (-1.0..1.0).contains(&v)));
            assert!(h.random_genome(&mut rng).iter().all(|&v| (1..=7).contains(&v)));
            assert!(b.random_genome(&mut rng).iter().all(|&v| (0..=6).contains(&v)));
        }
    }
}
