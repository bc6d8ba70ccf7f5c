use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::LinkSpec;

/// Per-MT SNR process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum SnrProcess {
    /// Independent draws, uniform on `[min_db, max_db]`, every slot.
    Uniform { min_db: f64, max_db: f64 },
    /// First-order autoregressive process around the band centre, clamped to
    /// the band. `correlation` is the lag-one coefficient.
    GaussMarkov {
        min_db: f64,
        max_db: f64,
        correlation: f64,
        std_db: f64,
    },
}

impl Default for SnrProcess {
    fn default() -> Self {
        SnrProcess::Uniform {
            min_db: 8.0,
            max_db: 21.0,
        }
    }
}

impl SnrProcess {
    pub fn range(&self) -> (f64, f64) {
        match *self {
            SnrProcess::Uniform { min_db, max_db }
            | SnrProcess::GaussMarkov { min_db, max_db, .. } => (min_db, max_db),
        }
    }

    /// Next SNR given the previous one (ignored by the uniform process).
    pub fn sample<R: Rng + ?Sized>(&self, prev_db: f64, rng: &mut R) -> f64 {
        match *self {
            SnrProcess::Uniform { min_db, max_db } => rng.random_range(min_db..=max_db),
            SnrProcess::GaussMarkov {
                min_db,
                max_db,
                correlation,
                std_db,
            } => {
                let mean = 0.5 * (min_db + max_db);
                let innov = (1.0 - correlation * correlation).max(0.0).sqrt() * std_db;
                let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
                (mean + correlation * (prev_db - mean) + innov * z).clamp(min_db, max_db)
            }
        }
    }

    /// Draw from the stationary distribution (used at start-up).
    pub fn initial<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SnrProcess::Uniform { .. } => self.sample(0.0, rng),
            SnrProcess::GaussMarkov {
                min_db,
                max_db,
                std_db,
                ..
            } => {
                let mean = 0.5 * (min_db + max_db);
                let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
                (mean + std_db * z).clamp(min_db, max_db)
            }
        }
    }
}

/// Draw one SNR sample for an MT from the default band.
pub fn sample_snr<R: Rng + ?Sized>(rng: &mut R, process: &SnrProcess, prev_db: f64) -> f64 {
    process.sample(prev_db, rng)
}

/// Logistic block-error curve: `1 / (1 + exp(slope * (snr - snr50)))`.
pub fn block_error_probability(link: &LinkSpec, mcs: usize, snr_db: f64) -> f64 {
    let m = &link.mcs[mcs];
    let x = m.slope * (snr_db - m.snr50_db);
    if x > 700.0 {
        0.0
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LinkKind, McsEntry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn link() -> LinkSpec {
        let mcs = (0..29)
            .map(|m| McsEntry {
                rate_bps_per_unit: 10_000.0 * (m + 1) as f64,
                snr50_db: -5.0 + 0.9 * m as f64,
                slope: 1.5,
            })
            .collect();
        LinkSpec::new(
            "lte",
            LinkKind::ResourceBlock,
            50.0,
            LinkSpec::uniform_levels(50.0, 10),
            mcs,
        )
        .unwrap()
    }

    #[test]
    fn uniform_snr_stays_in_band() {
        let p = SnrProcess::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_snr(&mut rng, &p, 0.0))
            .collect();
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(min >= 8.0 && max <= 21.0);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        // Standard error is 13/sqrt(12 * 1e5) ~ 0.012.
        assert!((mean - 14.5).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn snr_sequence_is_seeded() {
        let p = SnrProcess::default();
        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| sample_snr(&mut r, &p, 0.0)).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| sample_snr(&mut r, &p, 0.0)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn gauss_markov_is_clamped_and_correlated() {
        let p = SnrProcess::GaussMarkov {
            min_db: 8.0,
            max_db: 21.0,
            correlation: 0.9,
            std_db: 3.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = p.initial(&mut rng);
        let mut xs = Vec::new();
        for _ in 0..20_000 {
            x = p.sample(x, &mut rng);
            assert!((8.0..=21.0).contains(&x));
            xs.push(x);
        }
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let cov: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>();
        let var: f64 = xs.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        assert!(cov / var > 0.8);
    }

    #[test]
    fn bler_midpoint_and_asymptotes() {
        let l = link();
        for m in 0..29 {
            let mid = l.mcs[m].snr50_db;
            assert!((block_error_probability(&l, m, mid) - 0.5).abs() < 1e-15);
            assert!(block_error_probability(&l, m, 1e6) < 1e-300);
            assert_eq!(block_error_probability(&l, m, -1e6), 1.0);
        }
    }

    #[test]
    fn bler_monotone_over_grid() {
        let l = link();
        let snrs: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
        for m in 0..29 {
            for w in snrs.windows(2) {
                assert!(
                    block_error_probability(&l, m, w[1]) <= block_error_probability(&l, m, w[0])
                );
            }
            if m > 0 {
                for &s in &snrs {
                    assert!(
                        block_error_probability(&l, m, s) >= block_error_probability(&l, m - 1, s)
                    );
                }
            }
        }
    }
}
