//! Compute-equivalent comparison of training runs.
//!
//! Every iteration is assumed to take the run's average time, so a run's
//! wall-clock at step `s` is `s / throughput`. Rescaling each step by
//! `t_run(s) / t_baseline(s)` puts all runs on the baseline's step axis,
//! where losses are compared at equal compute.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub run_id: String,
    /// Iterations per second.
    pub mean_throughput: f64,
    pub samples: Vec<(u64, f64)>,
    /// Compare on the raw step axis (e.g. when the run's throughput is not
    /// representative).
    pub skip_normalization: bool,
    /// The run stopped before its planned end.
    pub truncated: bool,
}

impl RunLog {
    pub fn new(run_id: impl Into<String>, mean_throughput: f64, samples: Vec<(u64, f64)>) -> Result<Self> {
        let run = RunLog {
            run_id: run_id.into(),
            mean_throughput,
            samples,
            skip_normalization: false,
            truncated: false,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidRun {
            run_id: self.run_id.clone(),
            message,
        };
        if !(self.mean_throughput > 0.0 && self.mean_throughput.is_finite()) {
            return Err(invalid(format!("throughput {} must be positive", self.mean_throughput)));
        }
        if let Some(w) = self.samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(invalid(format!(
                "steps not strictly increasing at {} -> {}",
                w[0].0, w[1].0
            )));
        }
        Ok(())
    }

    /// Wall-clock time to reach `step`.
    pub fn time_at(&self, step: f64) -> f64 {
        step / self.mean_throughput
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCurve {
    pub run_id: String,
    pub samples: Vec<(f64, f64)>,
    pub truncated: bool,
}

/// `s' = s · T̄_baseline / T̄_run` for every logged sample.
pub fn time_normalize(run: &RunLog, baseline: &RunLog) -> Result<NormalizedCurve> {
    run.validate()?;
    baseline.validate()?;
    let scale = if run.skip_normalization {
        1.0
    } else {
        baseline.mean_throughput / run.mean_throughput
    };
    Ok(NormalizedCurve {
        run_id: run.run_id.clone(),
        samples: run
            .samples
            .iter()
            .map(|&(step, loss)| (step as f64 * scale, loss))
            .collect(),
        truncated: run.truncated,
    })
}

impl NormalizedCurve {
    /// Linear interpolation at `x`; `None` outside the logged span.
    pub fn loss_at(&self, x: f64) -> Option<f64> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if x < first.0 || x > last.0 {
            return None;
        }
        let hi = self.samples.partition_point(|&(s, _)| s < x);
        let (s1, l1) = self.samples[hi];
        if s1 == x || hi == 0 {
            return Some(l1);
        }
        let (s0, l0) = self.samples[hi - 1];
        Some(l0 + (l1 - l0) * (x - s0) / (s1 - s0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub probes: Vec<f64>,
    /// Sorted by run id.
    pub rows: Vec<LossRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub run_id: String,
    pub truncated: bool,
    pub losses: Vec<Option<f64>>,
}

pub fn loss_at_equal_compute(curves: &[NormalizedCurve], probes: &[f64]) -> Result<LossTable> {
    if let Some(empty) = curves.iter().find(|c| c.samples.is_empty()) {
        return Err(Error::EmptyCurve(empty.run_id.clone()));
    }
    let mut rows: Vec<LossRow> = curves
        .iter()
        .map(|c| LossRow {
            run_id: c.run_id.clone(),
            truncated: c.truncated,
            losses: probes.iter().map(|&p| c.loss_at(p)).collect(),
        })
        .collect();
    rows.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(LossTable {
        probes: probes.to_vec(),
        rows,
    })
}

impl LossTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["run".to_string(), "truncated".to_string()];
        header.extend(self.probes.iter().map(|p| p.to_string()));
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.run_id.clone(), row.truncated.to_string()];
            record.extend(
                row.losses
                    .iter()
                    .map(|l| l.map(|v| format!("{v:.6}")).unwrap_or_default()),
            );
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalTriple {
    pub arc_easy: f64,
    pub hellaswag: f64,
    pub lambada: f64,
}

impl EvalTriple {
    pub fn new(arc_easy: f64, hellaswag: f64, lambada: f64) -> Result<Self> {
        for (name, v) in [("arc_easy", arc_easy), ("hellaswag", hellaswag), ("lambada", lambada)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ScoreRange {
                    context: name.to_string(),
                    value: v,
                });
            }
        }
        Ok(EvalTriple {
            arc_easy,
            hellaswag,
            lambada,
        })
    }

    pub fn values(&self) -> [f64; 3] {
        [self.arc_easy, self.hellaswag, self.lambada]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub arc_easy: bool,
    pub hellaswag: bool,
    pub lambada: bool,
    pub n_better: u8,
}

/// Strictly-greater comparison per task.
pub fn score_vs_baseline(run: &EvalTriple, baseline: &EvalTriple) -> BaselineComparison {
    let flags = [
        run.arc_easy > baseline.arc_easy,
        run.hellaswag > baseline.hellaswag,
        run.lambada > baseline.lambada,
    ];
    BaselineComparison {
        arc_easy: flags[0],
        hellaswag: flags[1],
        lambada: flags[2],
        n_better: flags.iter().filter(|&&b| b).count() as u8,
    }
}

/// One line of an ablation results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub run: String,
    /// `None` when the run was not evaluated.
    pub eval: Option<EvalTriple>,
    pub truncated: bool,
}

/// Read `run,arc_easy,hellaswag,lambada[,truncated]`. Empty task cells mean
/// the run was not evaluated.
pub fn read_evals_csv<R: std::io::Read>(input: R) -> Result<Vec<AblationEntry>> {
    #[derive(Deserialize)]
    struct Raw {
        run: String,
        arc_easy: Option<f64>,
        hellaswag: Option<f64>,
        lambada: Option<f64>,
        #[serde(default)]
        truncated: Option<bool>,
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        let raw: Raw = rec?;
        let eval = match (raw.arc_easy, raw.hellaswag, raw.lambada) {
            (Some(a), Some(h), Some(l)) => Some(EvalTriple::new(a, h, l)?),
            (None, None, None) => None,
            _ => {
                return Err(Error::Invalid(format!(
                    "run {:?} has a partial evaluation row",
                    raw.run
                )))
            }
        };
        out.push(AblationEntry {
            run: raw.run,
            eval,
            truncated: raw.truncated.unwrap_or(false),
        });
    }
    Ok(out)
}

fn find_baseline<'a>(entries: &'a [AblationEntry], baseline: &str) -> Result<&'a EvalTriple> {
    entries
        .iter()
        .find(|e| e.run == baseline)
        .and_then(|e| e.eval.as_ref())
        .ok_or_else(|| Error::Invalid(format!("baseline {baseline:?} missing or not evaluated")))
}

/// Per-task maximum over evaluated entries.
fn best_per_task(entries: &[AblationEntry]) -> [f64; 3] {
    let mut best = [f64::NEG_INFINITY; 3];
    for e in entries.iter().filter_map(|e| e.eval.as_ref()) {
        for (b, v) in best.iter_mut().zip(e.values()) {
            *b = b.max(v);
        }
    }
    best
}

/// Markdown table: best per task in bold, better than baseline underlined,
/// truncated runs italic, and an empty interpretation column.
pub fn render_markdown(entries: &[AblationEntry], baseline: &str) -> Result<String> {
    let base = find_baseline(entries, baseline)?;
    let best = best_per_task(entries);
    let mut out = String::from("| Change | ARC Easy | HellaSwag | LAMBADA | Interpretation |\n");
    out.push_str("|---|---:|---:|---:|---|\n");
    for e in entries {
        let name = if e.truncated {
            format!("*{}*", e.run)
        } else {
            e.run.clone()
        };
        let cells: Vec<String> = match &e.eval {
            None => vec!["-".into(); 3],
            Some(eval) => {
                let cmp = score_vs_baseline(eval, base);
                let better = [cmp.arc_easy, cmp.hellaswag, cmp.lambada];
                eval.values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let mut cell = format!("{v:.3}");
                        if better[i] && e.run != baseline {
                            cell = format!("<u>{cell}</u>");
                        }
                        if v == best[i] {
                            cell = format!("**{cell}**");
                        }
                        if e.truncated {
                            cell = format!("*{cell}*");
                        }
                        cell
                    })
                    .collect()
            }
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} |  |\n",
            name, cells[0], cells[1], cells[2]
        ));
    }
    Ok(out)
}

pub fn write_scores_csv<W: Write>(out: W, entries: &[AblationEntry], baseline: &str) -> Result<()> {
    let base = find_baseline(entries, baseline)?;
    let best = best_per_task(entries);
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "run",
        "arc_easy",
        "hellaswag",
        "lambada",
        "arc_easy_better",
        "hellaswag_better",
        "lambada_better",
        "n_better",
        "best_tasks",
        "truncated",
    ])?;
    for e in entries {
        let Some(eval) = &e.eval else {
            writer.write_record([e.run.as_str(), "", "", "", "", "", "", "", "", &e.truncated.to_string()])?;
            continue;
        };
        let cmp = score_vs_baseline(eval, base);
        let best_tasks = ["arc_easy", "hellaswag", "lambada"]
            .iter()
            .zip(eval.values().iter().zip(best))
            .filter(|(_, (v, b))| **v == *b)
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(";");
        writer.write_record([
            e.run.clone(),
            format!("{:.3}", eval.arc_easy),
            format!("{:.3}", eval.hellaswag),
            format!("{:.3}", eval.lambada),
            cmp.arc_easy.to_string(),
            cmp.hellaswag.to_string(),
            cmp.lambada.to_string(),
            cmp.n_better.to_string(),
            best_tasks,
            e.truncated.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[derive(Deserialize)]
struct Sidecar {
    run_id: String,
    mean_throughput: f64,
    #[serde(default)]
    skip_normalization: bool,
    #[serde(default)]
    truncated: bool,
}

/// Load a run from `<name>.csv` (`step,loss`) and its `<name>.json` sidecar.
pub fn load_run(csv_path: impl AsRef<Path>) -> Result<RunLog> {
    let csv_path = csv_path.as_ref();
    let sidecar_path: PathBuf = csv_path.with_extension("json");
    let sidecar_text = std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&sidecar_text)?;

    #[derive(Deserialize)]
    struct Row {
        step: u64,
        loss: f64,
    }
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let samples = reader
        .deserialize()
        .map(|r| r.map(|row: Row| (row.step, row.loss)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let run = RunLog {
        run_id: sidecar.run_id,
        mean_throughput: sidecar.mean_throughput,
        samples,
        skip_normalization: sidecar.skip_normalization,
        truncated: sidecar.truncated,
    };
    run.validate()?;
    Ok(run)
}

pub fn write_curves_csv<W: Write>(out: W, curves: &[NormalizedCurve], raw: &BTreeMap<String, RunLog>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["run", "step", "normalized_step", "loss"])?;
    for curve in curves {
        let steps = raw.get(&curve.run_id).map(|r| r.samples.as_slice()).unwrap_or(&[]);
        for (i, (norm, loss)) in curve.samples.iter().enumerate() {
            let step = steps.get(i).map(|s| s.0.to_string()).unwrap_or_default();
            writer.write_record([curve.run_id.clone(), step, format!("{norm:.4}"), format!("{loss:.6}")])?;
        }
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
