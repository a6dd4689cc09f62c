//! Learning-rate schedules: linear warmup into a half-cosine decay, plus the
//! three continued-pretraining variants.
//!
//! [`ScheduleVariant::CosineWarmup`] is defined on `0..=total_steps`. The
//! continued variants start from the rate in effect at the hand-off point
//! (`handoff_lr`) and are defined on `0..=continuation_steps`, counted from
//! that hand-off:
//!
//! - `FullRewarmup`: linear from `handoff_lr` to `lr_max` over
//!   `warmup_steps`, then cosine down to `lr_min`.
//! - `PartialRewarmup`: the same with a peak of `lr_max / 4`.
//! - `ContinueDecay`: cosine from `handoff_lr` to `0.05 · lr_max`.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terminal rate of `ContinueDecay`, as a fraction of `lr_max`.
pub const CONTINUE_DECAY_FLOOR: f64 = 0.05;
/// Peak of `PartialRewarmup`, as a fraction of `lr_max`.
pub const PARTIAL_REWARMUP_PEAK: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleVariant {
    CosineWarmup,
    ContinueDecay,
    FullRewarmup,
    PartialRewarmup,
}

impl FromStr for ScheduleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine-warmup" => Ok(ScheduleVariant::CosineWarmup),
            "continue-decay" => Ok(ScheduleVariant::ContinueDecay),
            "full-rewarmup" => Ok(ScheduleVariant::FullRewarmup),
            "partial-rewarmup" => Ok(ScheduleVariant::PartialRewarmup),
            other => Err(Error::Invalid(format!("unknown schedule variant {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleSpec {
    pub variant: ScheduleVariant,
    pub lr_start: f64,
    pub lr_max: f64,
    pub lr_min: f64,
    pub warmup_steps: u64,
    pub total_steps: u64,
    pub handoff_lr: f64,
    pub continuation_steps: u64,
}

impl Default for ScheduleSpec {
    /// Initial pretraining values: 3e-5 rising to 3e-4 over 10,000 steps,
    /// decaying to 1.5e-5.
    fn default() -> Self {
        ScheduleSpec {
            variant: ScheduleVariant::CosineWarmup,
            lr_start: 3e-5,
            lr_max: 3e-4,
            lr_min: 1.5e-5,
            warmup_steps: 10_000,
            total_steps: 250_000,
            handoff_lr: 1e-4,
            continuation_steps: 250_000,
        }
    }
}

/// Linear warmup then half-cosine: the shared shape of every variant.
struct Segment {
    start: f64,
    peak: f64,
    end: f64,
    warmup: u64,
    len: u64,
}

impl Segment {
    fn at(&self, step: u64) -> f64 {
        if step < self.warmup {
            let frac = step as f64 / self.warmup as f64;
            return self.start + (self.peak - self.start) * frac;
        }
        if step == self.warmup {
            return self.peak;
        }
        if step >= self.len {
            return self.end;
        }
        let decay = self.len - self.warmup;
        let progress = (step - self.warmup) as f64 / decay as f64;
        self.end + (self.peak - self.end) * 0.5 * (1.0 + (PI * progress).cos())
    }
}

impl ScheduleSpec {
    pub fn with_variant(variant: ScheduleVariant) -> Self {
        ScheduleSpec {
            variant,
            ..ScheduleSpec::default()
        }
    }

    /// Last valid step.
    pub fn end_step(&self) -> u64 {
        match self.variant {
            ScheduleVariant::CosineWarmup => self.total_steps,
            _ => self.continuation_steps,
        }
    }

    pub fn peak(&self) -> f64 {
        match self.variant {
            ScheduleVariant::CosineWarmup | ScheduleVariant::FullRewarmup => self.lr_max,
            ScheduleVariant::PartialRewarmup => self.lr_max * PARTIAL_REWARMUP_PEAK,
            ScheduleVariant::ContinueDecay => self.handoff_lr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        for (name, v) in [
            ("lr_start", self.lr_start),
            ("lr_max", self.lr_max),
            ("lr_min", self.lr_min),
            ("handoff_lr", self.handoff_lr),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_max) {
            return bad(format!("need 0 < lr_min ({}) <= lr_max ({})", self.lr_min, self.lr_max));
        }
        match self.variant {
            ScheduleVariant::CosineWarmup => {
                if self.warmup_steps > self.total_steps {
                    return bad("warmup_steps exceeds total_steps".into());
                }
            }
            ScheduleVariant::FullRewarmup | ScheduleVariant::PartialRewarmup => {
                if self.warmup_steps > self.continuation_steps {
                    return bad("warmup_steps exceeds continuation_steps".into());
                }
                if self.peak() < self.lr_min {
                    return bad(format!("rewarmup peak {} is below lr_min {}", self.peak(), self.lr_min));
                }
            }
            ScheduleVariant::ContinueDecay => {
                let floor = CONTINUE_DECAY_FLOOR * self.lr_max;
                if self.handoff_lr < floor {
                    return bad(format!(
                        "handoff_lr {} is below the decay floor {floor}",
                        self.handoff_lr
                    ));
                }
            }
        }
        Ok(())
    }

    fn segment(&self) -> Segment {
        match self.variant {
            ScheduleVariant::CosineWarmup => Segment {
                start: self.lr_start,
                peak: self.lr_max,
                end: self.lr_min,
                warmup: self.warmup_steps,
                len: self.total_steps,
            },
            ScheduleVariant::FullRewarmup | ScheduleVariant::PartialRewarmup => Segment {
                start: self.handoff_lr,
                peak: self.peak(),
                end: self.lr_min,
                warmup: self.warmup_steps,
                len: self.continuation_steps,
            },
            ScheduleVariant::ContinueDecay => Segment {
                start: self.handoff_lr,
                peak: self.handoff_lr,
                end: CONTINUE_DECAY_FLOOR * self.lr_max,
                warmup: 0,
                len: self.continuation_steps,
            },
        }
    }
}

pub fn lr_at(spec: &ScheduleSpec, step: u64) -> Result<f64> {
    spec.validate()?;
    let end = spec.end_step();
    if step > end {
        return Err(Error::StepOutOfRange { step, end });
    }
    Ok(spec.segment().at(step))
}

/// `resolution` evenly spaced samples including both endpoints.
pub fn render_schedule(spec: &ScheduleSpec, resolution: usize) -> Result<Vec<(u64, f64)>> {
    if resolution < 2 {
        return Err(Error::Invalid(format!("resolution must be >= 2, got {resolution}")));
    }
    spec.validate()?;
    let end = spec.end_step() as u128;
    let last = (resolution - 1) as u128;
    let segment = spec.segment();
    Ok((0..resolution as u128)
        .map(|i| {
            let step = ((i * end + last / 2) / last) as u64;
            (step, segment.at(step))
        })
        .collect())
}

/// Exponent notation with at most ten significant digits, trailing zeros
/// trimmed (`1.4999999999999999e-5` prints as `1.5e-5`).
pub fn format_lr(lr: f64) -> String {
    let s = format!("{lr:.9e}");
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}e{exp}")
}

pub fn write_schedule_csv<W: Write>(out: W, series: &[(u64, f64)]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["step", "lr"])?;
    for (step, lr) in series {
        writer.write_record([step.to_string(), format_lr(*lr)])?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
