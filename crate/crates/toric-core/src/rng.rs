//! Named deterministic generator for seeded experiment families.
//!
//! The algorithm is recorded in every report so other implementations can
//! reproduce the exact metric families: splitmix64 applied to a counter,
//! i.e. out_k = mix64(seed_word + (k+1)·0x9E3779B97F4A7C15). Splitting is by
//! re-keying with a stream index, which keeps substreams independent of how
//! many draws the parent has made.

pub const ALGORITHM_ID: &str = "splitmix64-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed, state: seed }
    }

    /// Derive an independent substream; keyed off the construction seed, so
    /// the result does not depend on draws already taken from `self`.
    pub fn split(&self, stream: u64) -> Self {
        Self::new(mix64(self.seed ^ GOLDEN.wrapping_mul(stream.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 significand bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform point of the standard simplex Δ_n (componentwise ≥ 0, Σ ≤ 1),
    /// by normalizing n+1 exponential draws.
    pub fn next_simplex_point(&mut self, n: usize) -> Vec<f64> {
        let exps: Vec<f64> = (0..=n)
            .map(|_| -(1.0 - self.next_f64()).ln())
            .collect();
        let total: f64 = exps.iter().sum();
        exps[1..].iter().map(|&e| e / total).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn split_is_independent_of_parent_position() {
        let parent = SplitMix64::new(7);
        let mut advanced = parent.clone();
        for _ in 0..5 {
            advanced.next_u64();
        }
        assert_eq!(
            parent.split(3).next_u64(),
            advanced.split(3).next_u64(),
            "split streams must not depend on parent draws"
        );
    }

    #[test]
    fn simplex_points_are_feasible() {
        let mut rng = SplitMix64::new(123);
        for n in 1..=4 {
            for _ in 0..100 {
                let a = rng.next_simplex_point(n);
                assert_eq!(a.len(), n);
                assert!(a.iter().all(|&v| v >= 0.0));
                assert!(a.iter().sum::<f64>() <= 1.0 + 1e-12);
            }
        }
    }
}
