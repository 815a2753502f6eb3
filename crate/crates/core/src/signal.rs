//! PAM constellations, the Gaussian transmit pulse and the analytic
//! transmitted waveform `X(t) = Σ s_l·p(t − l·Tsym)`.

use crate::numerics::{golden_section_max, q_function};
use crate::{Error, Result, Scalar};

/// Equidistant, zero-mean, unit-average-energy M-PAM alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct PamConstellation<T> {
    levels: Vec<T>,
    spacing: T,
}

impl<T: Scalar> PamConstellation<T> {
    /// Levels `(2m − 1 − M)·d`, `m = 1..=M`, with `d = √(3/(M² − 1))`.
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::ConstellationSize(m));
        }
        let mf = T::from_usize_lossy(m);
        let d = (T::lit(3.0) / (mf * mf - T::one())).sqrt();
        let levels = (1..=m)
            .map(|i| (T::from_usize_lossy(2 * i) - T::one() - mf) * d)
            .collect();
        Ok(Self { levels, spacing: d })
    }

    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> T {
        self.levels[index]
    }

    /// Half the distance between adjacent levels.
    pub fn half_spacing(&self) -> T {
        self.spacing
    }

    pub fn max_level(&self) -> T {
        *self.levels.last().expect("nonempty")
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.levels.len().trailing_zeros()
    }

    /// Nearest-level slicer. A value exactly midway between two levels maps
    /// to the lower one.
    pub fn nearest_index(&self, x: T) -> usize {
        let m = self.levels.len();
        let pos = (x / self.spacing + T::from_usize_lossy(m - 1)) / T::lit(2.0);
        let idx = (pos - T::lit(0.5)).ceil();
        if !(idx > T::zero()) {
            0
        } else {
            idx.to_usize().unwrap_or(m - 1).min(m - 1)
        }
    }
}

/// `p(t) = (√π/a)·exp(−π²t²/a²)`: a zero-mean normal density with standard
/// deviation `a/(√2·π)`, so it has unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse<T> {
    a: T,
    bt: T,
    tsym: T,
    cutoff: T,
}

impl<T: Scalar> GaussianPulse<T> {
    /// Builds the pulse from the 3 dB bandwidth–symbol period product.
    pub fn new(b3db_tsym: T, tsym: T) -> Result<Self> {
        if !(b3db_tsym > T::zero()) || !b3db_tsym.is_finite() {
            return Err(Error::param("b3db_tsym", "must be positive and finite"));
        }
        if !(tsym > T::zero()) || !tsym.is_finite() {
            return Err(Error::param("tsym", "must be positive and finite"));
        }
        let a = (T::LN_2() / T::lit(2.0)).sqrt() / b3db_tsym * tsym;
        Ok(Self {
            a,
            bt: b3db_tsym,
            tsym,
            cutoff: Self::default_cutoff(a),
        })
    }

    /// Radius beyond which `p` is below `1e−15` of its peak.
    pub fn default_cutoff(a: T) -> T {
        a * T::lit(1e15).ln().sqrt() / T::PI()
    }

    /// Overrides the truncation radius used by [`TxBlock`] evaluation.
    pub fn with_cutoff(mut self, radius: T) -> Self {
        self.cutoff = radius;
        self
    }

    pub fn shaping(&self) -> T {
        self.a
    }

    pub fn b3db_tsym(&self) -> T {
        self.bt
    }

    pub fn tsym(&self) -> T {
        self.tsym
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    /// Standard deviation of the pulse viewed as a density, `a/(√2·π)`.
    pub fn sigma(&self) -> T {
        self.a * T::FRAC_1_SQRT_2() / T::PI()
    }

    pub fn peak(&self) -> T {
        T::PI().sqrt() / self.a
    }

    pub fn value(&self, t: T) -> T {
        let u = T::PI() * t / self.a;
        self.peak() * (-u * u).exp()
    }

    /// `∫ p²(t) dt = √(π/2)/a`.
    pub fn energy(&self) -> T {
        (T::PI() / T::lit(2.0)).sqrt() / self.a
    }

    /// `∫_{t_lo}^{t_hi} p(t − shift) dt` as a difference of Gaussian tails.
    pub fn integral(&self, t_lo: T, t_hi: T, shift: T) -> Result<T> {
        if t_lo > t_hi {
            return Err(Error::InvalidInterval {
                lo: t_lo.to_f64().unwrap_or(f64::NAN),
                hi: t_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let s = self.sigma();
        Ok(area_between((t_lo - shift) / s, (t_hi - shift) / s))
    }
}

/// Standard normal mass on `[x_lo, x_hi]`, always formed from the smaller
/// tail so that differences of nearly equal probabilities keep their digits.
#[inline]
pub(crate) fn area_between<T: Scalar>(x_lo: T, x_hi: T) -> T {
    if x_lo == x_hi {
        T::zero()
    } else if x_lo >= T::zero() {
        q_function(x_lo) - q_function(x_hi)
    } else if x_hi <= T::zero() {
        q_function(-x_hi) - q_function(-x_lo)
    } else {
        T::one() - q_function(-x_lo) - q_function(x_hi)
    }
}

/// A length-L block of constellation symbols and the waveform it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct TxBlock<T> {
    indices: Vec<usize>,
    symbols: Vec<T>,
    pulse: GaussianPulse<T>,
}

impl<T: Scalar> TxBlock<T> {
    /// Builds a block from constellation indices, which guarantees every
    /// symbol is an alphabet member.
    pub fn new(
        constellation: &PamConstellation<T>,
        indices: Vec<usize>,
        pulse: GaussianPulse<T>,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::param("L", "block length must be at least 1"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= constellation.size()) {
            return Err(Error::param(
                "symbols",
                format!(
                    "index {bad} outside a {}-point constellation",
                    constellation.size()
                ),
            ));
        }
        let symbols = indices.iter().map(|&i| constellation.level(i)).collect();
        Ok(Self {
            indices,
            symbols,
            pulse,
        })
    }

    /// Every symbol set to the same level (`L` copies of `level`).
    ///
    /// Used for worst-case amplitude designs and for the all-zero corner,
    /// so `level` need not belong to a constellation.
    pub fn constant(level: T, len: usize, pulse: GaussianPulse<T>) -> Result<Self> {
        if len == 0 {
            return Err(Error::param("L", "block length must be at least 1"));
        }
        Ok(Self {
            indices: vec![0; len],
            symbols: vec![level; len],
            pulse,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[T] {
        &self.symbols
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn pulse(&self) -> &GaussianPulse<T> {
        &self.pulse
    }

    /// Indices of symbols whose centre lies within `radius` of `[t_lo, t_hi]`.
    pub(crate) fn window(&self, t_lo: T, t_hi: T, radius: T) -> std::ops::Range<usize> {
        let tsym = self.pulse.tsym;
        let first = ((t_lo - radius) / tsym).ceil();
        let last = ((t_hi + radius) / tsym).floor();
        let n = self.len();
        let first = if first <= T::zero() {
            0
        } else {
            first.to_usize().unwrap_or(n).min(n)
        };
        let end = if last < T::zero() {
            0
        } else {
            last.to_usize().map_or(n, |l| (l + 1).min(n))
        };
        first..end.max(first)
    }

    pub(crate) fn center(&self, l: usize) -> T {
        T::from_usize_lossy(l) * self.pulse.tsym
    }

    /// `X(t)`, skipping pulses centred farther than the cutoff radius.
    pub fn value(&self, t: T) -> T {
        self.window(t, t, self.pulse.cutoff)
            .map(|l| self.symbols[l] * self.pulse.value(t - self.center(l)))
            .sum()
    }

    /// `dX/dt`.
    pub fn derivative(&self, t: T) -> T {
        let k = T::lit(2.0) * T::PI() * T::PI() / (self.pulse.a * self.pulse.a);
        self.window(t, t, self.pulse.cutoff)
            .map(|l| {
                let u = t - self.center(l);
                -self.symbols[l] * k * u * self.pulse.value(u)
            })
            .sum()
    }

    /// `∫_{t_lo}^{t_hi} X(t) dt` in closed form.
    pub fn integral(&self, t_lo: T, t_hi: T) -> Result<T> {
        if t_lo > t_hi {
            return Err(Error::InvalidInterval {
                lo: t_lo.to_f64().unwrap_or(f64::NAN),
                hi: t_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let s = self.pulse.sigma();
        Ok(self
            .window(t_lo, t_hi, self.pulse.cutoff)
            .map(|l| {
                let c = self.center(l);
                self.symbols[l] * area_between((t_lo - c) / s, (t_hi - c) / s)
            })
            .sum())
    }

    /// Peak `|X(t)|` over `[−Tsym/2, (L − ½)·Tsym]`: a 64-points-per-symbol
    /// scan followed by golden-section refinement of the best grid peaks.
    pub fn max_abs(&self) -> T {
        const PER_SYMBOL: usize = 64;
        const CANDIDATES: usize = 8;
        let tsym = self.pulse.tsym;
        let lo = -tsym / T::lit(2.0);
        let hi = (T::from_usize_lossy(self.len()) - T::lit(0.5)) * tsym;
        let steps = PER_SYMBOL * self.len();
        let h = (hi - lo) / T::from_usize_lossy(steps);
        let grid: Vec<T> = (0..=steps)
            .map(|i| self.value(lo + T::from_usize_lossy(i) * h).abs())
            .collect();

        let mut peaks: Vec<usize> = (0..=steps)
            .filter(|&i| {
                let left = i == 0 || grid[i - 1] <= grid[i];
                let right = i == steps || grid[i + 1] <= grid[i];
                left && right
            })
            .collect();
        peaks.sort_by(|&i, &j| {
            grid[j]
                .partial_cmp(&grid[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        peaks.truncate(CANDIDATES);

        let mut best = grid.iter().copied().fold(T::zero(), T::max);
        if best == T::zero() {
            return best;
        }
        let tol = tsym * T::lit(1e-12);
        for i in peaks {
            let t = lo + T::from_usize_lossy(i) * h;
            let a = (t - h).max(lo);
            let b = (t + h).min(hi);
            let (_, v) = golden_section_max(|x| self.value(x).abs(), a, b, tol);
            best = best.max(v);
        }
        best
    }
}
