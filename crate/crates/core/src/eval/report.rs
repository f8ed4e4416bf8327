use std::fmt::Write as _;

use super::metrics::{evaluate_params, Evaluation};
use crate::data::{TrajectorySample, FUTURE_LEN};
use crate::error::{Error, Result};
use crate::model::{Checkpoint, CueConfig};

pub const REPORT_TSV_HEADER: &str = "method\tinput\trmse_m\tsamples\tcheckpoint\tdisp_1\tdisp_2\tdisp_3\tdisp_4\tdisp_5\tdisp_6\tdisp_7\tdisp_8\tdisp_9\tdisp_10";

#[derive(Debug, Clone, PartialEq)]
pub struct MethodMetrics {
    pub cue: CueConfig,
    pub checkpoint_id: String,
    pub rmse: f64,
    /// Mean displacement at `t+Δt … t+10Δt`, m.
    pub per_horizon: [f64; FUTURE_LEN],
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Hex SHA-256 of the split manifest shared by every checkpoint.
    pub corpus_id: String,
    pub methods: Vec<MethodMetrics>,
}

impl MetricsReport {
    /// Aligned table: method, input streams, RMSE.
    pub fn to_table(&self) -> String {
        let input_w = self
            .methods
            .iter()
            .map(|m| m.cue.input_description().len())
            .chain(["Input".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!("split {}\n", self.corpus_id);
        let _ = writeln!(out, "{:<10}  {:<input_w$}  {:>10}", "Method", "Input", "RMSE (m)");
        for m in &self.methods {
            let _ = writeln!(out, "{:<10}  {:<input_w$}  {:>10.4}", m.cue.name(), m.cue.input_description(), m.rmse);
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{REPORT_TSV_HEADER}\n");
        for m in &self.methods {
            let _ = write!(
                out,
                "{}\t{}\t{:.6}\t{}\t{}",
                m.cue.name(),
                m.cue.input_description(),
                m.rmse,
                m.samples,
                m.checkpoint_id
            );
            for d in m.per_horizon {
                let _ = write!(out, "\t{d:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates every checkpoint on the same test samples. All checkpoints
/// must carry the same split digest.
pub fn compare_methods(test: &[TrajectorySample], checkpoints: &[&Checkpoint]) -> Result<MetricsReport> {
    let first = checkpoints
        .first()
        .ok_or_else(|| Error::InvalidArgument("no checkpoints to compare".into()))?;
    for c in checkpoints {
        if c.split_digest != first.split_digest {
            return Err(Error::Data(format!(
                "checkpoint {} ({}) was trained on a different split than {} ({})",
                c.identifier(),
                c.params.cue,
                first.identifier(),
                first.params.cue
            )));
        }
    }
    let mut methods = Vec::with_capacity(checkpoints.len());
    for c in checkpoints {
        let Evaluation {
            rmse,
            per_horizon,
            samples,
        } = evaluate_params(&c.params, test)?;
        methods.push(MethodMetrics {
            cue: c.params.cue,
            checkpoint_id: c.identifier(),
            rmse,
            per_horizon,
            samples,
        });
    }
    Ok(MetricsReport {
        corpus_id: hex::encode(first.split_digest),
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_parameters, ModelDims};

    fn samples() -> Vec<TrajectorySample> {
        (0..4)
            .map(|i| {
                let s = i as f64;
                TrajectorySample {
                    ped_past: std::array::from_fn(|k| [0.1 * (k as f64 - 4.0), 0.2 * s]),
                    veh_past: std::array::from_fn(|k| [-20.0 + k as f64, 2.0]),
                    head_past: [0.5 * s; 5],
                    ped_future: std::array::from_fn(|k| [0.1 * (k + 1) as f64, 0.3 * s]),
                    origin_world: [s, 0.0],
                    t: s,
                }
            })
            .collect()
    }

    fn ckpt(cue: CueConfig, digest: u8) -> Checkpoint {
        let mut c = Checkpoint::new(init_parameters(ModelDims { encoder_hidden: 3, decoder_hidden: 4 }, cue, 2).unwrap());
        c.split_digest = [digest; 32];
        c
    }

    #[test]
    fn same_checkpoint_three_times_gives_identical_rows() {
        let c = ckpt(CueConfig::METHOD2, 1);
        let r = compare_methods(&samples(), &[&c, &c, &c]).unwrap();
        assert_eq!(r.methods.len(), 3);
        assert!(r.methods.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(r, compare_methods(&samples(), &[&c, &c, &c]).unwrap());
    }

    #[test]
    fn digest_mismatch_rejected() {
        let a = ckpt(CueConfig::BASELINE, 1);
        let b = ckpt(CueConfig::METHOD1, 2);
        assert!(matches!(compare_methods(&samples(), &[&a, &b]), Err(Error::Data(_))));
        assert!(compare_methods(&samples(), &[]).is_err());
    }

    #[test]
    fn table_and_tsv_shape() {
        let cs: Vec<Checkpoint> = CueConfig::EXPERIMENTS.iter().map(|&c| ckpt(c, 0)).collect();
        let refs: Vec<&Checkpoint> = cs.iter().collect();
        let r = compare_methods(&samples(), &refs).unwrap();
        let table = r.to_table();
        assert_eq!(table.lines().count(), 5);
        assert!(table.contains("ped. and veh. pos, and head orientation"));
        let tsv = r.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split('\t').count() == 15));
        assert!(lines[1].starts_with("baseline\tped. pos. only\t"));
    }
}
