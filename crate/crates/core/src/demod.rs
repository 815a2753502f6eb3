//! Reconstruction-free symbol recovery from firing instances.
//!
//! Firings are binned into the symbol intervals
//! `𝒯_l = [(l − ½)Tsym, (l + ½)Tsym)`. Between the first and last firing of
//! an interval the integrator crossed `κΔ` exactly `N_l − 1` times, so
//!
//! ```text
//! y_l − b = (N_l − 1)·κΔ / (t_max − t_min) − b
//!         = (1/(t_max − t_min)) ∫ X dt  +  Z'_l
//!         = Σ_j P[l][j]·s_j + Z'_l
//! ```
//!
//! with `P[l][j]` the average of `p(t − j·Tsym)` over `[t_min^(l), t_max^(l)]`.
//! The symbols come out of a zero-forcing least-squares solve followed by a
//! nearest-level slicer.

use crate::numerics::{solve_ls, LeastSquaresSolution, Matrix};
use crate::sampler::{FiringRecord, IftemParams};
use crate::signal::{GaussianPulse, PamConstellation};
use crate::{Error, Result, Scalar};

/// Lower edge of symbol interval `l`, `(l − ½)·Tsym`.
pub fn interval_start<T: Scalar>(l: usize, tsym: T) -> T {
    (T::from_usize_lossy(l) - T::lit(0.5)) * tsym
}

/// Splits sorted firings into the `len` symbol intervals.
///
/// Boundaries belong to the later interval. Firings before the first or
/// after the last interval are dropped.
pub fn bin_firings<T: Scalar>(
    record: &FiringRecord<T>,
    len: usize,
    tsym: T,
) -> Result<Vec<Vec<T>>> {
    let mut bins = vec![Vec::new(); len];
    let first = interval_start(0, tsym);
    let end = interval_start(len, tsym);
    for &t in &record.firings {
        if t < first || t >= end {
            continue;
        }
        let guess = (t / tsym + T::lit(0.5))
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(len - 1);
        let mut l = guess;
        while l > 0 && t < interval_start(l, tsym) {
            l -= 1;
        }
        while l + 1 < len && t >= interval_start(l + 1, tsym) {
            l += 1;
        }
        bins[l].push(t);
    }
    if let Some(l) = bins.iter().position(|b| b.len() < 2) {
        return Err(Error::FiringDeficit(l));
    }
    Ok(bins)
}

/// Firing statistics of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockObservation<T> {
    /// `N_l`: firing instances inside interval `l`.
    pub counts: Vec<usize>,
    pub t_min: Vec<T>,
    pub t_max: Vec<T>,
    /// `(N_l − 1)·κΔ/(t_max − t_min)`, bias still included.
    pub y: Vec<T>,
}

impl<T: Scalar> BlockObservation<T> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn span(&self, l: usize) -> T {
        self.t_max[l] - self.t_min[l]
    }

    /// `y − b·1`.
    pub fn debiased(&self, bias: T) -> Vec<T> {
        self.y.iter().map(|&y| y - bias).collect()
    }
}

pub fn build_observation<T: Scalar>(
    bins: &[Vec<T>],
    params: &IftemParams<T>,
) -> Result<BlockObservation<T>> {
    let threshold = params.threshold();
    let mut obs = BlockObservation {
        counts: Vec::with_capacity(bins.len()),
        t_min: Vec::with_capacity(bins.len()),
        t_max: Vec::with_capacity(bins.len()),
        y: Vec::with_capacity(bins.len()),
    };
    for (l, bin) in bins.iter().enumerate() {
        let (Some(&lo), Some(&hi)) = (bin.first(), bin.last()) else {
            return Err(Error::FiringDeficit(l));
        };
        if bin.len() < 2 || !(hi > lo) {
            return Err(Error::FiringDeficit(l));
        }
        let gaps = T::from_usize_lossy(bin.len() - 1);
        obs.counts.push(bin.len());
        obs.t_min.push(lo);
        obs.t_max.push(hi);
        obs.y.push(gaps * threshold / (hi - lo));
    }
    Ok(obs)
}

/// Interference matrix: row `l` is observation interval `l`, column `j` is
/// symbol `s_j`, entry the mean of `p(t − j·Tsym)` over the interval.
pub fn build_p<T: Scalar>(
    t_min: &[T],
    t_max: &[T],
    pulse: &GaussianPulse<T>,
    len: usize,
) -> Result<Matrix<T>> {
    if t_min.len() != len || t_max.len() != len {
        return Err(Error::Dimension(format!(
            "{} / {} interval endpoints for {len} symbols",
            t_min.len(),
            t_max.len()
        )));
    }
    for l in 0..len {
        if !(t_max[l] > t_min[l]) {
            return Err(Error::InvalidInterval {
                lo: t_min[l].to_f64().unwrap_or(f64::NAN),
                hi: t_max[l].to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let tsym = pulse.tsym();
    let mut p = Matrix::zeros(len, len);
    for l in 0..len {
        let span = t_max[l] - t_min[l];
        for j in 0..len {
            let shift = T::from_usize_lossy(j) * tsym;
            p[(l, j)] = pulse.integral(t_min[l], t_max[l], shift)? / span;
        }
    }
    Ok(p)
}

/// Zero-forcing estimate `argmin ‖P·s − y‖₂` for the debiased observation.
pub fn zf_detect<T: Scalar>(
    y_debiased: &[T],
    p: &Matrix<T>,
    cond_cap: T,
) -> Result<LeastSquaresSolution<T>> {
    solve_ls(p, y_debiased, cond_cap)
}

pub fn hard_decision<T: Scalar>(soft: &[T], constellation: &PamConstellation<T>) -> Vec<usize> {
    soft.iter()
        .map(|&x| constellation.nearest_index(x))
        .collect()
}

/// Everything the receiver computed for one block.
#[derive(Debug, Clone)]
pub struct BlockEstimate<T> {
    pub observation: BlockObservation<T>,
    pub p: Matrix<T>,
    pub zf: LeastSquaresSolution<T>,
    /// Constellation indices of the decided symbols.
    pub decisions: Vec<usize>,
}

impl<T: Scalar> BlockEstimate<T> {
    pub fn soft(&self) -> &[T] {
        &self.zf.solution
    }
}

/// Bin → observe → remove bias → build `P` → zero-force → slice.
pub fn demodulate_block<T: Scalar>(
    record: &FiringRecord<T>,
    params: &IftemParams<T>,
    pulse: &GaussianPulse<T>,
    len: usize,
    constellation: &PamConstellation<T>,
    cond_cap: T,
) -> Result<BlockEstimate<T>> {
    if len == 0 {
        return Err(Error::param("L", "block length must be at least 1"));
    }
    let bins = bin_firings(record, len, pulse.tsym())?;
    let observation = build_observation(&bins, params)?;
    let p = build_p(&observation.t_min, &observation.t_max, pulse, len)?;
    let zf = zf_detect(&observation.debiased(params.bias), &p, cond_cap)?;
    let decisions = hard_decision(&zf.solution, constellation);
    Ok(BlockEstimate {
        observation,
        p,
        zf,
        decisions,
    })
}
