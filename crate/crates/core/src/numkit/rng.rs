use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator used for every randomized routine in the crate.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`; used for parallel batches.
pub fn substream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from `N(mean, sd^2)`.
pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    debug_assert!(sd >= 0.0, "negative standard deviation {sd}");
    if sd == 0.0 {
        return mean;
    }
    let z: f64 = rng.sample(StandardNormal);
    mean + sd * z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{mean, sample_variance};

    #[test]
    fn zero_sd_returns_mean() {
        let mut rng = seeded_rng(1);
        assert_eq!(sample_normal(&mut rng, 3.25, 0.0), 3.25);
    }

    #[test]
    fn deterministic_streams() {
        let mut a = seeded_rng(99);
        let mut b = seeded_rng(99);
        let xs: Vec<f64> = (0..100).map(|_| sample_normal(&mut a, 0.0, 1.0)).collect();
        let ys: Vec<f64> = (0..100).map(|_| sample_normal(&mut b, 0.0, 1.0)).collect();
        assert_eq!(xs, ys);
        let mut c = substream_rng(99, 1);
        let zs: Vec<f64> = (0..100).map(|_| sample_normal(&mut c, 0.0, 1.0)).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn moments_of_many_draws() {
        let mut rng = seeded_rng(2024);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        assert!(mean(&xs).abs() < 0.02);
        assert!((sample_variance(&xs).sqrt() - 1.0).abs() < 0.02);
    }
}
