//! Seed derivation and scalar samplers for reproducible simulation.
//!
//! Every randomized operation in this crate takes an explicit 64-bit seed and
//! derives per-task substreams from it with [`substream_seed`], a chain of
//! SplitMix64 finalizer rounds (one per tag). A (seed, tag path) pair
//! therefore maps to a fixed child generator no matter how work is scheduled
//! across threads, which is what makes the parallel operations bitwise
//! reproducible.
//!
//! Samplers are fixed algorithms so that a given substream always yields the
//! same draws:
//! - standard normal: Box-Muller, cosine branch, two uniforms per draw;
//! - Student t(4): normal over sqrt(chi-square(4)/4), chi-square as the sum
//!   of four squared normals;
//! - two-component normal mixture: one uniform for the fair component pick,
//!   then one normal draw.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a path of tags.
pub fn substream_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(GOLDEN_GAMMA));
    }
    state
}

/// A seeded generator for the substream identified by `tags`.
pub fn substream_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, tags))
}

/// Standard normal draw (Box-Muller, cosine branch; consumes two uniforms).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // 1 - gen() lies in (0, 1], keeping the log argument positive.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    mean + sd * standard_normal(rng)
}

/// Student t draw with 4 degrees of freedom.
pub fn student_t4<R: Rng>(rng: &mut R) -> f64 {
    let z = standard_normal(rng);
    let chi2: f64 = (0..4).map(|_| standard_normal(rng).powi(2)).sum();
    z / (chi2 / 4.0).sqrt()
}

/// Equal-weight mixture of N(mean_a, sd) and N(mean_b, sd).
pub fn normal_mixture<R: Rng>(rng: &mut R, mean_a: f64, mean_b: f64, sd: f64) -> f64 {
    let mean = if rng.gen::<f64>() < 0.5 { mean_a } else { mean_b };
    normal(rng, mean, sd)
}

/// Sample `k` distinct indices from `0..population` (partial Fisher-Yates).
/// Returned in selection order.
pub fn sample_without_replacement<R: Rng>(rng: &mut R, population: usize, k: usize) -> Vec<usize> {
    assert!(k <= population, "cannot sample {k} from {population}");
    let mut pool: Vec<usize> = (0..population).collect();
    for i in 0..k {
        let j = rng.gen_range(i..population);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
