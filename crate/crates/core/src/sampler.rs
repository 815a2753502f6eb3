//! Integrate-and-fire time encoding of `Y(t) = X(t) + Z(t)`.
//!
//! The sampler walks a uniform grid from `t0 = −Tsym/2`. Each step adds the
//! exact signal area (closed-form Gaussian tails), the bias area `b·dt` and
//! one exact noise increment to the integrator. When the integrator reaches
//! `κΔ` the firing time is located inside the step, `κΔ` is subtracted and
//! the surplus carries into the next interval, so every inter-firing
//! integral of `Y + b` equals `κΔ` up to the within-step location error.

use crate::noise::NoiseProcess;
use crate::signal::{GaussianPulse, TxBlock};
use crate::{Error, Result, Scalar};

/// Smallest allowed number of grid steps per symbol period.
pub const MIN_STEPS_PER_SYMBOL: usize = 256;
pub const DEFAULT_STEPS_PER_SYMBOL: usize = 1024;

/// How a threshold crossing is placed inside a grid step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossingLocator {
    /// Integral assumed linear across the step; location error `O(dt²)`.
    Linear,
    /// Cubic Hermite model of the signal-plus-bias integral using the
    /// integrand at both step ends, noise apportioned linearly; location
    /// error `O(dt⁴)` for the deterministic part.
    #[default]
    Hermite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IftemParams<T> {
    pub bias: T,
    pub kappa: T,
    pub delta: T,
    pub dt: T,
    pub locator: CrossingLocator,
}

impl<T: Scalar> IftemParams<T> {
    pub fn new(bias: T, kappa: T, delta: T, dt: T) -> Result<Self> {
        for (name, v) in [("b", bias), ("kappa", kappa), ("delta", delta), ("dt", dt)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(Self {
            bias,
            kappa,
            delta,
            dt,
            locator: CrossingLocator::default(),
        })
    }

    pub fn with_locator(mut self, locator: CrossingLocator) -> Self {
        self.locator = locator;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    /// Integrator level at which the sampler fires, `κΔ`.
    pub fn threshold(&self) -> T {
        self.kappa * self.delta
    }

    /// Checks the grid resolution floor `dt ≤ Tsym/256`.
    pub fn validate(&self, tsym: T) -> Result<()> {
        if self.dt > tsym / T::from_usize_lossy(MIN_STEPS_PER_SYMBOL) {
            return Err(Error::param(
                "dt",
                format!("{} exceeds Tsym/{MIN_STEPS_PER_SYMBOL}", self.dt),
            ));
        }
        Ok(())
    }

    /// Designs a sampler for blocks of `len` symbols whose largest magnitude
    /// is `peak_level`.
    ///
    /// `b = bias_margin · c_max` where `c_max` is the peak of the all-
    /// `peak_level` block (floored at 1 for a silent input), `κ = 1`, and
    /// `Δ = b·Tsym/(κ·target_firings_per_symbol)` so the bias alone fires
    /// `target_firings_per_symbol` times per symbol.
    pub fn design(
        pulse: GaussianPulse<T>,
        len: usize,
        peak_level: T,
        target_firings_per_symbol: usize,
        bias_margin: T,
        steps_per_symbol: usize,
    ) -> Result<Self> {
        if target_firings_per_symbol < 4 {
            return Err(Error::param(
                "target_firings_per_symbol",
                "must be at least 4",
            ));
        }
        if !(bias_margin > T::one()) {
            return Err(Error::param("bias_margin", "must exceed 1"));
        }
        if steps_per_symbol < MIN_STEPS_PER_SYMBOL {
            return Err(Error::param(
                "dt_divisor",
                format!("must be at least {MIN_STEPS_PER_SYMBOL}"),
            ));
        }
        let worst = TxBlock::constant(peak_level.abs(), len.max(1), pulse)?;
        let c_max = worst.max_abs();
        let bias = if c_max > T::zero() {
            (bias_margin * c_max).max(T::one())
        } else {
            T::one()
        };
        let kappa = T::one();
        let tsym = pulse.tsym();
        let delta = bias * tsym / (kappa * T::from_usize_lossy(target_firings_per_symbol));
        let dt = tsym / T::from_usize_lossy(steps_per_symbol);
        Self::new(bias, kappa, delta, dt)
    }
}

/// [`IftemParams::design`] sized from the block's own largest symbol, with
/// the default grid.
pub fn default_params<T: Scalar>(
    block: &TxBlock<T>,
    target_firings_per_symbol: usize,
    bias_margin: T,
) -> Result<IftemParams<T>> {
    let peak = block
        .symbols()
        .iter()
        .fold(T::zero(), |m, s| m.max(s.abs()));
    IftemParams::design(
        *block.pulse(),
        block.len(),
        peak,
        target_firings_per_symbol,
        bias_margin,
        DEFAULT_STEPS_PER_SYMBOL,
    )
}

/// Recording start `t0 = −Tsym/2`.
pub fn start_time<T: Scalar>(tsym: T) -> T {
    -tsym / T::lit(2.0)
}

/// `(L − ½)·Tsym + 3a`: the last symbol interval plus a pulse-tail allowance.
pub fn default_horizon<T: Scalar>(block: &TxBlock<T>) -> T {
    let p = block.pulse();
    (T::from_usize_lossy(block.len()) - T::lit(0.5)) * p.tsym() + T::lit(3.0) * p.shaping()
}

/// Firing instances from one sampler run, anchored at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringRecord<T> {
    pub t0: T,
    pub firings: Vec<T>,
}

impl<T: Scalar> FiringRecord<T> {
    pub fn new(t0: T, firings: Vec<T>) -> Self {
        Self { t0, firings }
    }

    /// Rebuilds a record from time encodings.
    pub fn from_encodings(encodings: &[T], t0: T) -> Result<Self> {
        Ok(Self {
            t0,
            firings: decode_firings(encodings, t0)?,
        })
    }

    pub fn len(&self) -> usize {
        self.firings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firings.is_empty()
    }

    pub fn encodings(&self) -> Vec<T> {
        encode(self)
    }
}

/// Time encodings `T_k = t_k − t_{k−1}` with `t_{−1} = t0`.
pub fn encode<T: Scalar>(record: &FiringRecord<T>) -> Vec<T> {
    let mut prev = record.t0;
    record
        .firings
        .iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect()
}

/// Firing instances from time encodings: prefix sums anchored at `t0`.
pub fn decode_firings<T: Scalar>(encodings: &[T], t0: T) -> Result<Vec<T>> {
    let mut t = t0;
    encodings
        .iter()
        .enumerate()
        .map(|(index, &e)| {
            if !(e > T::zero()) {
                return Err(Error::NonPositiveEncoding {
                    index,
                    value: e.to_f64().unwrap_or(f64::NAN),
                });
            }
            t += e;
            Ok(t)
        })
        .collect()
}

/// Runs the IF-TEM on `X + Z` from `t0 = −Tsym/2` until `horizon`.
///
/// The integrator starts at rest. Firings are returned for `(t0, horizon]`,
/// so one landing exactly on `horizon` is kept. The noise stream is
/// advanced to `t0` first if it starts earlier.
pub fn sample<T: Scalar>(
    block: &TxBlock<T>,
    noise: &mut NoiseProcess<T>,
    params: &IftemParams<T>,
    horizon: T,
) -> Result<FiringRecord<T>> {
    let pulse = *block.pulse();
    let tsym = pulse.tsym();
    params.validate(tsym)?;
    let t0 = start_time(tsym);
    if horizon < t0 {
        return Err(Error::InvalidHorizon {
            horizon: horizon.to_f64().unwrap_or(f64::NAN),
            t0: t0.to_f64().unwrap_or(f64::NAN),
        });
    }
    if noise.state() < t0 {
        noise.increment(t0)?;
    }

    let threshold = params.threshold();
    let bias = params.bias;
    let c_max = block.max_abs();
    let stall_limit = if bias > c_max {
        T::lit(4.0) * threshold / (bias - c_max)
    } else {
        T::infinity()
    };

    // Crossings that miss the threshold only by accumulated rounding still
    // count, so exact-arithmetic firing grids are reproduced.
    let slack = threshold * T::epsilon() * T::lit(16.0);

    let dt = params.dt;
    let steps = ((horizon - t0) / dt).ceil().to_usize().unwrap_or(0);
    let mut areas = StepAreas::new(block);
    let mut firings = Vec::with_capacity(steps / 8 + 1);
    let mut acc = T::zero();
    let mut last_fire = t0;

    for n in 0..steps {
        let ta = t0 + T::from_usize_lossy(n) * dt;
        let tb = (t0 + T::from_usize_lossy(n + 1) * dt).min(horizon);
        if tb <= ta {
            break;
        }
        let h = tb - ta;
        let det = areas.step(n, ta, tb) + bias * h;
        let w = noise.increment(tb)?;
        let inc = det + w;
        let next = acc + inc;

        if next >= threshold - slack {
            let mut target = threshold - acc;
            let mut u_lo = T::zero();
            let mut fired = T::zero();
            let crossing = StepModel::new(block, params, ta, tb, det, w);
            while target <= inc + slack {
                let u = crossing.locate(target, u_lo);
                firings.push(ta + u * h);
                u_lo = u;
                fired += T::one();
                target = (fired + T::one()) * threshold - acc;
            }
            acc = next - fired * threshold;
            last_fire = *firings.last().expect("at least one firing");
        } else {
            acc = next;
        }

        if tb - last_fire > stall_limit {
            return Err(Error::NonPositiveDrive {
                since: last_fire.to_f64().unwrap_or(f64::NAN),
                stalled: (tb - last_fire).to_f64().unwrap_or(f64::NAN),
                limit: stall_limit.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(FiringRecord { t0, firings })
}

/// Per-step signal area with each pulse's Gaussian tail cached at the shared
/// grid point between consecutive steps.
struct StepAreas<'a, T> {
    block: &'a TxBlock<T>,
    sigma: T,
    radius: T,
    /// `(Q(|x|), x < 0)` at grid index `stamp[l]`.
    tails: Vec<(T, bool)>,
    stamp: Vec<usize>,
}

impl<'a, T: Scalar> StepAreas<'a, T> {
    fn new(block: &'a TxBlock<T>) -> Self {
        let n = block.len();
        Self {
            block,
            sigma: block.pulse().sigma(),
            radius: block.pulse().cutoff(),
            tails: vec![(T::zero(), false); n],
            stamp: vec![usize::MAX; n],
        }
    }

    #[inline]
    fn tail(&self, l: usize, t: T) -> (T, bool) {
        let x = (t - self.block.center(l)) / self.sigma;
        (crate::numerics::q_function(x.abs()), x < T::zero())
    }

    fn step(&mut self, n: usize, ta: T, tb: T) -> T {
        let mut area = T::zero();
        for l in self.block.window(ta, tb, self.radius) {
            let (qa, na) = if self.stamp[l] == n {
                self.tails[l]
            } else {
                self.tail(l, ta)
            };
            let (qb, nb) = self.tail(l, tb);
            self.tails[l] = (qb, nb);
            self.stamp[l] = n + 1;
            let mass = match (na, nb) {
                (false, false) => qa - qb,
                (true, true) => qb - qa,
                (true, false) => T::one() - qa - qb,
                (false, true) => -(T::one() - qa - qb),
            };
            area += self.block.symbols()[l] * mass;
        }
        area
    }
}

/// Within-step model `F(u)` of the integrator increment, `u ∈ [0, 1]`.
struct StepModel<T> {
    locator: CrossingLocator,
    total: T,
    det: T,
    noise: T,
    slope_a: T,
    slope_b: T,
}

impl<T: Scalar> StepModel<T> {
    fn new(block: &TxBlock<T>, params: &IftemParams<T>, ta: T, tb: T, det: T, noise: T) -> Self {
        let h = tb - ta;
        let (slope_a, slope_b) = match params.locator {
            CrossingLocator::Linear => (T::zero(), T::zero()),
            CrossingLocator::Hermite => (
                h * (block.value(ta) + params.bias),
                h * (block.value(tb) + params.bias),
            ),
        };
        Self {
            locator: params.locator,
            total: det + noise,
            det,
            noise,
            slope_a,
            slope_b,
        }
    }

    fn eval(&self, u: T) -> (T, T) {
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let u2 = u * u;
        let u3 = u2 * u;
        let h10 = u3 - two * u2 + u;
        let h01 = three * u2 - two * u3;
        let h11 = u3 - u2;
        let d10 = three * u2 - T::lit(4.0) * u + one;
        let d01 = T::lit(6.0) * (u - u2);
        let d11 = three * u2 - two * u;
        let f = h10 * self.slope_a + h01 * self.det + h11 * self.slope_b + u * self.noise;
        let df = d10 * self.slope_a + d01 * self.det + d11 * self.slope_b + self.noise;
        (f, df)
    }

    /// Smallest-bracket root of `F(u) = target` on `[u_lo, 1]`, where
    /// `F(u_lo) < target ≤ F(1)`.
    fn locate(&self, target: T, u_lo: T) -> T {
        if self.locator == CrossingLocator::Linear || !(self.total > T::zero()) {
            let u = if self.total > T::zero() {
                target / self.total
            } else {
                T::one()
            };
            return u.max(u_lo).min(T::one());
        }
        let (mut lo, mut hi) = (u_lo, T::one());
        let mut u = (target / self.total).max(lo).min(hi);
        let tol = T::epsilon() * T::lit(4.0);
        for _ in 0..100 {
            let (f, df) = self.eval(u);
            let g = f - target;
            if g < T::zero() {
                lo = u;
            } else {
                hi = u;
            }
            let newton = if df > T::zero() { u - g / df } else { T::nan() };
            let next = if newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) / T::lit(2.0)
            };
            if (next - u).abs() <= tol || hi - lo <= tol {
                u = next;
                break;
            }
            u = next;
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::PamConstellation;

    fn silent_block(len: usize) -> TxBlock<f64> {
        TxBlock::constant(0.0, len, GaussianPulse::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_drive_fires_uniformly() {
        let block = silent_block(2);
        let params = IftemParams::new(2.0, 1.0, 0.05, 1.0 / 1024.0).unwrap();
        let mut noise = NoiseProcess::silent(-0.5);
        let rec = sample(&block, &mut noise, &params, 1.0).unwrap();
        assert_eq!(rec.len(), 60);
        for e in rec.encodings() {
            assert!((e - 0.025).abs() < 1e-9, "{e}");
        }
    }

    #[test]
    fn linear_locator_is_exact_for_constant_drive() {
        let block = silent_block(2);
        let params = IftemParams::new(2.0, 1.0, 0.05, 1.0 / 1024.0)
            .unwrap()
            .with_locator(CrossingLocator::Linear);
        let rec = sample(&block, &mut NoiseProcess::silent(-0.5), &params, 1.0).unwrap();
        assert!(rec.encodings().iter().all(|e| (e - 0.025).abs() < 1e-9));
    }

    #[test]
    fn several_firings_in_one_step() {
        // κΔ far below b·dt forces multiple crossings per grid step.
        let block = silent_block(1);
        let params = IftemParams::new(1.0, 1.0, 1.0 / 4096.0, 1.0 / 1024.0).unwrap();
        let rec = sample(&block, &mut NoiseProcess::silent(-0.5), &params, 0.5).unwrap();
        assert_eq!(rec.len(), 4096);
        assert!(rec.firings.windows(2).all(|w| w[1] > w[0]));
        assert!(rec
            .encodings()
            .iter()
            .all(|e| (e - 1.0 / 4096.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(IftemParams::new(0.0, 1.0, 1.0, 1e-3).is_err());
        assert!(IftemParams::new(1.0, 1.0, -1.0, 1e-3).is_err());
        let block = silent_block(2);
        let coarse = IftemParams::new(1.0, 1.0, 0.1, 1.0 / 100.0).unwrap();
        assert!(sample(&block, &mut NoiseProcess::silent(-0.5), &coarse, 1.0).is_err());
        let ok = IftemParams::new(1.0, 1.0, 0.1, 1.0 / 512.0).unwrap();
        assert!(matches!(
            sample(&block, &mut NoiseProcess::silent(-0.5), &ok, -0.6),
            Err(Error::InvalidHorizon { .. })
        ));
    }

    #[test]
    fn stall_is_reported() {
        // Bias below the signal peak with a strongly negative symbol: the
        // drive stays negative for a long stretch.
        let pulse = GaussianPulse::new(0.3, 1.0).unwrap();
        let block = TxBlock::constant(-5.0, 6, pulse).unwrap();
        let params = IftemParams::new(1.0, 1.0, 1.0 / 16.0, 1.0 / 1024.0).unwrap();
        let rec = sample(&block, &mut NoiseProcess::silent(-0.5), &params, 5.5);
        // b ≤ c_max: no finite limit, the run simply goes quiet.
        let rec = rec.unwrap();
        assert!(rec.firings.iter().all(|&t| t < 0.0));

        // With b > c_max a huge noise excursion is needed to stall; a large
        // negative noise jump does it.
        let block = TxBlock::constant(0.0, 4, pulse).unwrap();
        let mut noise = NoiseProcess::new(400.0, 3, -0.5).unwrap();
        let mut stalled = false;
        for seed in 0..20 {
            noise = NoiseProcess::new(noise.n0(), seed, -0.5).unwrap();
            if let Err(Error::NonPositiveDrive {
                stalled: s, limit, ..
            }) = sample(&block, &mut noise, &params, 3.5)
            {
                assert!(s > limit);
                stalled = true;
                break;
            }
        }
        assert!(stalled);
    }

    #[test]
    fn encode_examples() {
        let rec = FiringRecord::new(-0.5, vec![0.0, 0.5, 1.25]);
        assert_eq!(encode(&rec), vec![0.5, 0.5, 0.75]);
        assert!(encode(&FiringRecord::<f64>::new(-0.5, vec![])).is_empty());
        assert_eq!(decode_firings(&[0.5, 0.5], -0.5).unwrap(), vec![0.0, 0.5]);
        assert_eq!(decode_firings(&[0.025], -0.5).unwrap(), vec![-0.475]);
        assert!(matches!(
            decode_firings(&[0.5, 0.0], -0.5),
            Err(Error::NonPositiveEncoding { index: 1, .. })
        ));
    }

    #[test]
    fn design_point_for_silent_input() {
        let pulse = GaussianPulse::new(1.0, 1.0).unwrap();
        let p = IftemParams::<f64>::design(pulse, 8, 0.0, 16, 1.5, 1024).unwrap();
        assert_eq!(p.bias, 1.0);
        assert_eq!(p.kappa, 1.0);
        assert!((p.delta - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn design_keeps_bias_above_peak() {
        let c = PamConstellation::<f64>::new(2).unwrap();
        let pulse = GaussianPulse::new(1.0, 1.0).unwrap();
        let block = TxBlock::new(&c, vec![1, 0, 1, 1], pulse).unwrap();
        let p = default_params(&block, 16, 1.5).unwrap();
        let c_max = TxBlock::constant(1.0, 4, pulse).unwrap().max_abs();
        assert!((p.bias - 1.5 * c_max).abs() < 1e-12);
        assert!(p.bias > block.max_abs());
        assert!(IftemParams::design(pulse, 4, 1.0, 3, 1.5, 1024).is_err());
        assert!(IftemParams::design(pulse, 4, 1.0, 16, 1.0, 1024).is_err());
        assert!(IftemParams::design(pulse, 4, 1.0, 16, 1.5, 128).is_err());
    }

    #[test]
    fn bias_only_rate_matches_target() {
        let c = PamConstellation::<f64>::new(2).unwrap();
        let pulse = GaussianPulse::new(1.0, 1.0).unwrap();
        let block = TxBlock::new(&c, vec![1; 8], pulse).unwrap();
        let params = default_params(&block, 16, 1.5).unwrap();
        let silent = TxBlock::constant(0.0, 8, pulse).unwrap();
        let rec = sample(&silent, &mut NoiseProcess::silent(-0.5), &params, 7.5).unwrap();
        let per_symbol = rec.len() as f64 / 8.0;
        assert!((per_symbol - 16.0).abs() <= 1.0, "{per_symbol}");
    }

    #[test]
    fn noiseless_run_is_deterministic() {
        let c = PamConstellation::<f64>::new(4).unwrap();
        let pulse = GaussianPulse::new(0.5, 1.0).unwrap();
        let block = TxBlock::new(&c, vec![0, 3, 2, 1, 3], pulse).unwrap();
        let params = default_params(&block, 16, 1.5).unwrap();
        let h = default_horizon(&block);
        let a = sample(&block, &mut NoiseProcess::silent(-0.5), &params, h).unwrap();
        let b = sample(&block, &mut NoiseProcess::silent(-0.5), &params, h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn runs_in_single_precision() {
        let pulse = GaussianPulse::<f32>::new(1.0, 1.0).unwrap();
        let c = PamConstellation::<f32>::new(2).unwrap();
        let block = TxBlock::new(&c, vec![1, 0, 0, 1], pulse).unwrap();
        let params = default_params(&block, 16, 1.5).unwrap();
        let rec = sample(&block, &mut NoiseProcess::silent(-0.5), &params, 3.5).unwrap();
        assert!((60..=72).contains(&rec.len()), "{}", rec.len());
    }
}
