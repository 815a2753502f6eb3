use std::fmt::{self, Write as _};

use super::{ExperimentConfig, GridPoint, PreparedPoint};
use crate::demod::{demodulate_block, BlockEstimate};
use crate::sampler::{default_horizon, sample, FiringRecord};
use crate::signal::TxBlock;
use crate::{Error, Result};

/// Full receiver state for one simulated block.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub trial: usize,
    pub prepared: PreparedPoint<f64>,
    pub block: TxBlock<f64>,
    pub record: FiringRecord<f64>,
    /// The receiver's result, or why it gave up.
    pub estimate: std::result::Result<BlockEstimate<f64>, Error>,
}

/// Re-runs trial `trial` of grid point `point_index` (bandwidth-major order).
pub fn trace_trial(
    cfg: &ExperimentConfig,
    point_index: usize,
    trial: usize,
) -> Result<TraceReport> {
    cfg.validate()?;
    let points = GridPoint::all(cfg);
    let point = *points.get(point_index).ok_or_else(|| {
        Error::Config(format!(
            "grid point {point_index} out of range (grid has {})",
            points.len()
        ))
    })?;
    let prepared = PreparedPoint::<f64>::new(cfg, point)?;
    let block = prepared.block(cfg, trial)?;
    let mut noise = prepared.noise(cfg, trial)?;
    let record = sample(
        &block,
        &mut noise,
        &prepared.params,
        default_horizon(&block),
    )?;
    let estimate = demodulate_block(
        &record,
        &prepared.params,
        &prepared.pulse,
        cfg.l,
        &prepared.constellation,
        cfg.cond_cap,
    );
    Ok(TraceReport {
        trial,
        prepared,
        block,
        record,
        estimate,
    })
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(" ")
}

fn sci(v: f64) -> String {
    format!("{v:.12e}")
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.prepared;
        let mut s = String::new();
        let _ = writeln!(s, "[point]");
        let _ = writeln!(s, "b3db_tsym = {}", p.point.b3db_tsym);
        let _ = writeln!(s, "ebn0_db = {}", p.point.ebn0_db);
        let _ = writeln!(s, "trial = {}", self.trial);
        let _ = writeln!(s, "n0 = {}", sci(p.n0));
        let _ = writeln!(s, "shaping_a = {}", sci(p.pulse.shaping()));
        let _ = writeln!(s, "bias = {}", sci(p.params.bias));
        let _ = writeln!(s, "kappa = {}", sci(p.params.kappa));
        let _ = writeln!(s, "delta = {}", sci(p.params.delta));
        let _ = writeln!(s, "dt = {}", sci(p.params.dt));
        let _ = writeln!(s, "\n[symbols]");
        let _ = writeln!(
            s,
            "indices = {}",
            join(self.block.indices().iter().map(|i| i.to_string()))
        );
        let _ = writeln!(
            s,
            "levels = {}",
            join(self.block.symbols().iter().map(|&v| sci(v)))
        );
        let _ = writeln!(s, "\n[firings]");
        let _ = writeln!(s, "t0 = {}", sci(self.record.t0));
        let _ = writeln!(s, "count = {}", self.record.len());
        let _ = writeln!(
            s,
            "instants = {}",
            join(self.record.firings.iter().map(|&v| sci(v)))
        );
        let _ = writeln!(
            s,
            "encodings = {}",
            join(self.record.encodings().into_iter().map(sci))
        );

        match &self.estimate {
            Err(e) => {
                let _ = writeln!(s, "\n[receiver]\nfailure = {e}");
            }
            Ok(est) => {
                let obs = &est.observation;
                let yb = obs.debiased(p.params.bias);
                let ps = est.p.mul_vec(self.block.symbols());
                let _ = writeln!(s, "\n[intervals]");
                let _ = writeln!(s, "# l N t_min t_max y y_minus_b P_times_s");
                for l in 0..obs.len() {
                    let _ = writeln!(
                        s,
                        "{l} {} {} {} {} {} {}",
                        obs.counts[l],
                        sci(obs.t_min[l]),
                        sci(obs.t_max[l]),
                        sci(obs.y[l]),
                        sci(yb[l]),
                        sci(ps[l])
                    );
                }
                let _ = writeln!(s, "\n[matrix]");
                let _ = writeln!(s, "condition = {}", sci(est.zf.condition));
                for r in 0..est.p.rows() {
                    let _ = writeln!(s, "{}", join(est.p.row(r).iter().map(|&v| sci(v))));
                }
                let errors = est
                    .decisions
                    .iter()
                    .zip(self.block.indices())
                    .filter(|(a, b)| a != b)
                    .count();
                let _ = writeln!(s, "\n[decisions]");
                let _ = writeln!(s, "soft = {}", join(est.soft().iter().map(|&v| sci(v))));
                let _ = writeln!(
                    s,
                    "hard = {}",
                    join(est.decisions.iter().map(|i| i.to_string()))
                );
                let _ = writeln!(s, "residual_norm = {}", sci(est.zf.residual_norm));
                let _ = writeln!(s, "symbol_errors = {errors}");
            }
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(ebn0: f64) -> ExperimentConfig {
        ExperimentConfig {
            l: 6,
            ebn0_db: vec![ebn0],
            dt_divisor: 256,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_trace_is_self_consistent() {
        let report = trace_trial(&cfg(f64::INFINITY), 0, 0).unwrap();
        let est = report.estimate.as_ref().unwrap();
        let yb = est.observation.debiased(report.prepared.params.bias);
        let ps = est.p.mul_vec(report.block.symbols());
        for (a, b) in yb.iter().zip(&ps) {
            assert!((a - b).abs() < 1e-5);
        }
        let text = report.to_string();
        assert!(text.contains("symbol_errors = 0"));
        assert!(text.contains("[matrix]"));
    }

    #[test]
    fn trace_is_stable() {
        let a = trace_trial(&cfg(5.0), 0, 3).unwrap().to_string();
        let b = trace_trial(&cfg(5.0), 0, 3).unwrap().to_string();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_point() {
        assert!(matches!(
            trace_trial(&cfg(5.0), 4, 0),
            Err(Error::Config(_))
        ));
    }
}
