//! White Gaussian channel noise, realized through its integral.
//!
//! `∫Z(t)dt` is a Wiener process with variance rate `N0/2`, so the sampler
//! only ever asks for increments `∫_{s}^{t} Z`, each an exact
//! `N(0, (N0/2)(t − s))` draw. `Z(t)` itself is never evaluated pointwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone)]
pub struct NoiseProcess<T> {
    n0: T,
    seed: u64,
    state: T,
    rng: ChaCha8Rng,
}

impl<T: Scalar> NoiseProcess<T> {
    /// A fresh stream positioned at `start`.
    pub fn new(n0: T, seed: u64, start: T) -> Result<Self> {
        if !(n0 >= T::zero()) || !n0.is_finite() {
            return Err(Error::param(
                "n0",
                "spectral density must be finite and nonnegative",
            ));
        }
        Ok(Self {
            n0,
            seed,
            state: start,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// A noiseless channel.
    pub fn silent(start: T) -> Self {
        Self::new(T::zero(), 0, start).expect("zero density is valid")
    }

    pub fn n0(&self) -> T {
        self.n0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn state(&self) -> T {
        self.state
    }

    /// Samples `∫_{state}^{t_next} Z(t) dt` and advances to `t_next`.
    ///
    /// Every call consumes exactly one standard-normal draw, including
    /// zero-length ones, so the stream position depends only on the number
    /// of calls.
    pub fn increment(&mut self, t_next: T) -> Result<T> {
        if t_next < self.state {
            return Err(Error::OutOfOrder {
                requested: t_next.to_f64().unwrap_or(f64::NAN),
                state: self.state.to_f64().unwrap_or(f64::NAN),
            });
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let width = t_next - self.state;
        self.state = t_next;
        if width == T::zero() || self.n0 == T::zero() {
            return Ok(T::zero());
        }
        let scale = (self.n0 / T::lit(2.0) * width).sqrt();
        Ok(T::lit(z) * scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_and_zero_density() {
        let mut p = NoiseProcess::new(2.0, 9, 0.0).unwrap();
        assert_eq!(p.increment(0.0).unwrap(), 0.0);
        let mut q = NoiseProcess::silent(-0.5);
        for k in 1..10 {
            assert_eq!(q.increment(-0.5 + k as f64 * 0.1).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_out_of_order() {
        let mut p = NoiseProcess::new(1.0, 1, 0.0).unwrap();
        p.increment(1.0).unwrap();
        assert!(matches!(p.increment(0.5), Err(Error::OutOfOrder { .. })));
        assert!(NoiseProcess::new(-1.0, 1, 0.0).is_err());
    }

    #[test]
    fn unit_variance_when_n0_is_two() {
        let mut p = NoiseProcess::new(2.0, 2024, 0.0).unwrap();
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 1..=n {
            let x = p.increment(k as f64).unwrap();
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn variance_adds_over_adjacent_intervals() {
        // Var[I(0,δ1) + I(δ1,δ1+δ2)] vs Var[I(0,δ1+δ2)] for fresh streams.
        let (d1, d2, n0) = (0.3, 0.7, 1.5);
        let trials = 100_000;
        let (mut split, mut whole) = (0.0, 0.0);
        for k in 0..trials {
            let mut a = NoiseProcess::new(n0, 2 * k, 0.0).unwrap();
            let x = a.increment(d1).unwrap() + a.increment(d1 + d2).unwrap();
            split += x * x;
            let mut b = NoiseProcess::new(n0, 2 * k + 1, 0.0).unwrap();
            let y = b.increment(d1 + d2).unwrap();
            whole += y * y;
        }
        let expected = n0 / 2.0 * (d1 + d2);
        // 4σ band for a sample variance of n normal draws: σ ≈ var·√(2/n).
        let band = 4.0 * expected * (2.0 / trials as f64).sqrt();
        for v in [split / trials as f64, whole / trials as f64] {
            assert!((v - expected).abs() < band, "{v} vs {expected} ± {band}");
        }
    }

    #[test]
    fn reproducible_for_same_seed() {
        let run = |seed| {
            let mut p = NoiseProcess::new(0.8, seed, 0.0).unwrap();
            (1..50)
                .map(|k| p.increment(k as f64 * 0.01).unwrap())
                .collect::<Vec<f64>>()
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn scaling_in_n0_is_exact() {
        let mut a = NoiseProcess::new(0.3, 5, 0.0).unwrap();
        let mut b = NoiseProcess::new(1.2, 5, 0.0).unwrap();
        for k in 1..200 {
            let t = k as f64 * 0.013;
            assert_eq!(2.0 * a.increment(t).unwrap(), b.increment(t).unwrap());
        }
    }
}
