//! Monte Carlo symbol-error-probability sweeps.
//!
//! Every trial draws its symbols and its noise from seeds derived from
//! `(master seed, bandwidth index, SNR index, trial index)`, so results do not
//! depend on how trials are scheduled across workers.

mod config;
mod output;
mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{ExperimentConfig, KEYS};
pub use output::{to_csv, to_svg, write_atomic, CSV_HEADER};
pub use trace::{trace_trial, TraceReport};

use crate::demod::demodulate_block;
use crate::noise::NoiseProcess;
use crate::numerics::seed;
use crate::sampler::{default_horizon, sample, start_time, IftemParams};
use crate::signal::{GaussianPulse, PamConstellation, TxBlock};
use crate::{Error, Result, Scalar};

const SYMBOL_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// `N0` for a given `Eb/N0` in dB.
///
/// With unit average symbol energy the energy per symbol is the pulse
/// energy `∫p² = √(π/2)/a`, and `Eb = Es/log₂M`.
pub fn snr_to_n0<T: Scalar>(ebn0_db: T, pulse: &GaussianPulse<T>, m: usize) -> T {
    let bits = T::from_usize_lossy(m.trailing_zeros().max(1) as usize);
    let eb = pulse.energy() / bits;
    eb * T::lit(10.0).powf(-ebn0_db / T::lit(10.0))
}

/// Position in the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub bandwidth_index: usize,
    pub snr_index: usize,
    pub b3db_tsym: f64,
    pub ebn0_db: f64,
}

impl GridPoint {
    /// All grid points, bandwidth-major.
    pub fn all(cfg: &ExperimentConfig) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(cfg.b3db_tsym.len() * cfg.ebn0_db.len());
        for (bi, &bt) in cfg.b3db_tsym.iter().enumerate() {
            for (si, &snr) in cfg.ebn0_db.iter().enumerate() {
                out.push(GridPoint {
                    bandwidth_index: bi,
                    snr_index: si,
                    b3db_tsym: bt,
                    ebn0_db: snr,
                });
            }
        }
        out
    }

    pub fn seed(&self, master: u64, trial: usize, stream: u64) -> u64 {
        seed::derive(
            master,
            &[
                self.bandwidth_index as u64,
                self.snr_index as u64,
                trial as u64,
                stream,
            ],
        )
    }
}

/// Per-grid-point state shared by all of its trials.
#[derive(Debug, Clone)]
pub struct PreparedPoint<T> {
    pub point: GridPoint,
    pub constellation: PamConstellation<T>,
    pub pulse: GaussianPulse<T>,
    pub params: IftemParams<T>,
    pub n0: T,
}

impl<T: Scalar> PreparedPoint<T> {
    pub fn new(cfg: &ExperimentConfig, point: GridPoint) -> Result<Self> {
        let constellation = PamConstellation::new(cfg.m)?;
        let tsym = T::one();
        let pulse = GaussianPulse::new(T::lit(point.b3db_tsym), tsym)?;
        let params = IftemParams::design(
            pulse,
            cfg.l,
            constellation.max_level(),
            cfg.target_firings_per_symbol,
            T::lit(cfg.bias_margin),
            cfg.dt_divisor,
        )?;
        let n0 = snr_to_n0(T::lit(point.ebn0_db), &pulse, cfg.m);
        Ok(Self {
            point,
            constellation,
            pulse,
            params,
            n0,
        })
    }

    /// The block transmitted in `trial`.
    pub fn block(&self, cfg: &ExperimentConfig, trial: usize) -> Result<TxBlock<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.point.seed(cfg.seed, trial, SYMBOL_STREAM));
        let m = self.constellation.size();
        let indices = (0..cfg.l).map(|_| rng.random_range(0..m)).collect();
        TxBlock::new(&self.constellation, indices, self.pulse)
    }

    pub fn noise(&self, cfg: &ExperimentConfig, trial: usize) -> Result<NoiseProcess<T>> {
        NoiseProcess::new(
            self.n0,
            self.point.seed(cfg.seed, trial, NOISE_STREAM),
            start_time(self.pulse.tsym()),
        )
    }
}

/// How one simulated block ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialOutcome {
    Decoded {
        errors: usize,
        symbols: usize,
    },
    /// A symbol interval held fewer than two firings.
    FiringDeficit,
    /// The integrator stalled (no firing for too long).
    Stalled,
    IllConditioned,
}

pub fn run_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    point: &PreparedPoint<T>,
    trial: usize,
) -> Result<TrialOutcome> {
    let block = point.block(cfg, trial)?;
    let mut noise = point.noise(cfg, trial)?;
    let record = match sample(&block, &mut noise, &point.params, default_horizon(&block)) {
        Ok(r) => r,
        Err(Error::NonPositiveDrive { .. }) => return Ok(TrialOutcome::Stalled),
        Err(e) => return Err(e),
    };
    let estimate = demodulate_block(
        &record,
        &point.params,
        &point.pulse,
        cfg.l,
        &point.constellation,
        T::lit(cfg.cond_cap),
    );
    match estimate {
        Ok(est) => {
            let errors = est
                .decisions
                .iter()
                .zip(block.indices())
                .filter(|(a, b)| a != b)
                .count();
            Ok(TrialOutcome::Decoded {
                errors,
                symbols: cfg.l,
            })
        }
        Err(Error::FiringDeficit(_)) => Ok(TrialOutcome::FiringDeficit),
        Err(Error::IllConditioned { .. }) => Ok(TrialOutcome::IllConditioned),
        Err(e) => Err(e),
    }
}

/// Aggregated outcome at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SepResult {
    pub b3db_tsym: f64,
    pub ebn0_db: f64,
    pub trials: usize,
    /// Symbols in successfully demodulated blocks.
    pub symbols: usize,
    pub errors: usize,
    pub sep: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    /// Blocks lost to firing deficits, including integrator stalls.
    pub deficit_count: usize,
    /// Of `deficit_count`, blocks where the integrator stalled.
    pub stall_count: usize,
    pub illcond_count: usize,
}

impl SepResult {
    pub fn from_outcomes(point: &GridPoint, outcomes: &[TrialOutcome]) -> Self {
        let (mut symbols, mut errors, mut deficit, mut stall, mut ill) = (0, 0, 0, 0, 0);
        for o in outcomes {
            match *o {
                TrialOutcome::Decoded {
                    errors: e,
                    symbols: s,
                } => {
                    errors += e;
                    symbols += s;
                }
                TrialOutcome::FiringDeficit => deficit += 1,
                TrialOutcome::Stalled => {
                    deficit += 1;
                    stall += 1;
                }
                TrialOutcome::IllConditioned => ill += 1,
            }
        }
        let (lo, hi) = wilson_interval(errors, symbols);
        SepResult {
            b3db_tsym: point.b3db_tsym,
            ebn0_db: point.ebn0_db,
            trials: outcomes.len(),
            symbols,
            errors,
            sep: if symbols > 0 {
                errors as f64 / symbols as f64
            } else {
                0.0
            },
            ci95_lo: lo,
            ci95_hi: hi,
            deficit_count: deficit,
            stall_count: stall,
            illcond_count: ill,
        }
    }

    /// Half-width of the 95% Wilson interval.
    pub fn ci95(&self) -> f64 {
        (self.ci95_hi - self.ci95_lo) / 2.0
    }
}

/// 95% Wilson score interval for `errors` out of `n`; `(0, 1)` when `n = 0`.
pub fn wilson_interval(errors: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if errors == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Runs every trial at one grid point on the current rayon pool.
pub fn run_point<T: Scalar>(cfg: &ExperimentConfig, point: GridPoint) -> Result<SepResult> {
    let prepared = PreparedPoint::<T>::new(cfg, point)?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &prepared, trial))
        .collect::<Result<Vec<_>>>()?;
    Ok(SepResult::from_outcomes(&point, &outcomes))
}

/// Runs the full grid, bandwidth-major, with `cfg.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SepResult>> {
    run_experiment_with::<f64>(cfg)
}

pub fn run_experiment_with<T: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<SepResult>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        GridPoint::all(cfg)
            .into_iter()
            .map(|p| run_point::<T>(cfg, p))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            l: 8,
            b3db_tsym: vec![1.0],
            ebn0_db: vec![6.0],
            trials,
            dt_divisor: 256,
            workers: 1,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn snr_conversion() {
        let unit_a = GaussianPulse::new((2f64.ln() / 2.0).sqrt(), 1.0).unwrap();
        assert!((unit_a.energy() - 1.253_314_137_315_500_3).abs() < 1e-14);
        assert!((snr_to_n0(0.0, &unit_a, 2) - unit_a.energy()).abs() < 1e-15);
        assert!((snr_to_n0(0.0, &unit_a, 4) - unit_a.energy() / 2.0).abs() < 1e-15);
        assert!((snr_to_n0(10.0, &unit_a, 2) - unit_a.energy() / 10.0).abs() < 1e-14);
        assert_eq!(snr_to_n0(f64::INFINITY, &unit_a, 2), 0.0);
    }

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_994_2).abs() < 1e-6);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831_4).abs() < 1e-6 && (hi - 0.596_168_6).abs() < 1e-6);
    }

    #[test]
    fn single_trial_counts_one_block() {
        let cfg = small(1);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].trials, 1);
        assert_eq!(
            res[0].symbols + 8 * (res[0].deficit_count + res[0].illcond_count),
            8
        );
    }

    #[test]
    fn noiseless_trials_are_error_free() {
        let mut cfg = small(5);
        cfg.ebn0_db = vec![f64::INFINITY];
        let point = PreparedPoint::<f64>::new(&cfg, GridPoint::all(&cfg)[0]).unwrap();
        for t in 0..5 {
            assert_eq!(
                run_trial(&cfg, &point, t).unwrap(),
                TrialOutcome::Decoded {
                    errors: 0,
                    symbols: 8
                }
            );
        }
    }

    #[test]
    fn trials_are_reproducible_and_distinct() {
        let cfg = small(2);
        let point = PreparedPoint::<f64>::new(&cfg, GridPoint::all(&cfg)[0]).unwrap();
        assert_eq!(
            run_trial(&cfg, &point, 3).unwrap(),
            run_trial(&cfg, &point, 3).unwrap()
        );
        let first = |t| point.noise(&cfg, t).unwrap().increment(0.0).unwrap();
        assert_eq!(first(0), first(0));
        assert_ne!(first(0), first(1));
    }

    #[test]
    fn grid_order_is_bandwidth_major() {
        let cfg = ExperimentConfig {
            b3db_tsym: vec![0.5, 1.0],
            ebn0_db: vec![1.0, 2.0, 3.0],
            ..ExperimentConfig::default()
        };
        let pts = GridPoint::all(&cfg);
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].b3db_tsym, pts[1].ebn0_db), (0.5, 2.0));
        assert_eq!((pts[3].b3db_tsym, pts[3].ebn0_db), (1.0, 1.0));
    }

    #[test]
    fn failures_are_tallied_separately() {
        let p = GridPoint {
            bandwidth_index: 0,
            snr_index: 0,
            b3db_tsym: 1.0,
            ebn0_db: 3.0,
        };
        let r = SepResult::from_outcomes(
            &p,
            &[
                TrialOutcome::Decoded {
                    errors: 2,
                    symbols: 10,
                },
                TrialOutcome::FiringDeficit,
                TrialOutcome::Stalled,
                TrialOutcome::IllConditioned,
            ],
        );
        assert_eq!((r.trials, r.symbols, r.errors), (4, 10, 2));
        assert_eq!((r.deficit_count, r.stall_count, r.illcond_count), (2, 1, 1));
        assert!((r.sep - 0.2).abs() < 1e-15);
        assert!(r.ci95_lo < 0.2 && 0.2 < r.ci95_hi);
    }
}
