//! Sequence packing for supervised fine-tuning.
//!
//! Samples are placed whole into fixed-capacity sequences. Each segment
//! carries a loss mask that is false on instruction tokens and true on
//! response tokens; residual capacity is padding with a false mask.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bpe::TokenId;
use crate::error::{Error, Result};

pub const DEFAULT_CAPACITY: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingPolicy {
    #[default]
    FirstFitDecreasing,
    /// Next-fit in input order.
    Sequential,
}

/// `[false; instruction_len] ++ [true; response_len]`.
pub fn build_loss_mask(instruction_len: usize, response_len: usize) -> Result<Vec<bool>> {
    if response_len == 0 {
        return Err(Error::EmptyResponse);
    }
    let mut mask = vec![false; instruction_len];
    mask.resize(instruction_len + response_len, true);
    Ok(mask)
}

/// Lengths of one sample, for layout planning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackItem {
    pub id: String,
    pub instruction_len: usize,
    pub response_len: usize,
}

impl PackItem {
    pub fn len(&self) -> usize {
        self.instruction_len + self.response_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assignment of item indices to packs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackLayout {
    pub members: Vec<usize>,
    pub used: usize,
}

/// Place every item into a pack of `capacity` tokens.
///
/// First-fit decreasing sorts by total length (descending, stable on input
/// order) and puts each item into the first pack with room. Sequential keeps
/// one open pack and starts a new one whenever the next item does not fit.
pub fn plan_packs(items: &[PackItem], capacity: usize, policy: PackingPolicy) -> Result<Vec<PackLayout>> {
    for item in items {
        if item.response_len == 0 {
            return Err(Error::EmptyResponse);
        }
        if item.len() > capacity {
            return Err(Error::SampleTooLong {
                id: item.id.clone(),
                length: item.len(),
                capacity,
            });
        }
    }
    let mut packs: Vec<PackLayout> = Vec::new();
    match policy {
        PackingPolicy::FirstFitDecreasing => {
            let mut order: Vec<usize> = (0..items.len()).collect();
            order.sort_by(|&a, &b| items[b].len().cmp(&items[a].len()));
            for idx in order {
                let len = items[idx].len();
                match packs.iter_mut().find(|p| p.used + len <= capacity) {
                    Some(pack) => {
                        pack.members.push(idx);
                        pack.used += len;
                    }
                    None => packs.push(PackLayout {
                        members: vec![idx],
                        used: len,
                    }),
                }
            }
        }
        PackingPolicy::Sequential => {
            for (idx, item) in items.iter().enumerate() {
                let len = item.len();
                match packs.last_mut() {
                    Some(pack) if pack.used + len <= capacity => {
                        pack.members.push(idx);
                        pack.used += len;
                    }
                    _ => packs.push(PackLayout {
                        members: vec![idx],
                        used: len,
                    }),
                }
            }
        }
    }
    Ok(packs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedSample {
    pub id: String,
    pub instruction: Vec<TokenId>,
    pub response: Vec<TokenId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(rename = "id")]
    pub sample_id: String,
    #[serde(rename = "tokens")]
    pub token_ids: Vec<TokenId>,
    #[serde(rename = "mask")]
    pub loss_mask: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSequence {
    pub capacity: usize,
    pub segments: Vec<Segment>,
}

impl PackedSequence {
    pub fn filled(&self) -> usize {
        self.segments.iter().map(|s| s.token_ids.len()).sum()
    }

    pub fn utilization(&self) -> f64 {
        self.filled() as f64 / self.capacity as f64
    }

    /// Start offset of every segment, for building attention boundaries.
    pub fn boundaries(&self) -> Vec<usize> {
        self.segments
            .iter()
            .scan(0, |offset, s| {
                let start = *offset;
                *offset += s.token_ids.len();
                Some(start)
            })
            .collect()
    }

    /// Full-capacity token and mask arrays, padded with `pad_id`.
    pub fn to_dense(&self, pad_id: TokenId) -> (Vec<TokenId>, Vec<bool>) {
        let mut tokens = Vec::with_capacity(self.capacity);
        let mut mask = Vec::with_capacity(self.capacity);
        for s in &self.segments {
            tokens.extend_from_slice(&s.token_ids);
            mask.extend_from_slice(&s.loss_mask);
        }
        tokens.resize(self.capacity, pad_id);
        mask.resize(self.capacity, false);
        (tokens, mask)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PackConfig {
    pub capacity: usize,
    pub policy: PackingPolicy,
    /// Clip the response tail of over-long samples instead of failing.
    /// Instructions are never clipped.
    pub truncate_response: bool,
}

impl Default for PackConfig {
    fn default() -> Self {
        PackConfig {
            capacity: DEFAULT_CAPACITY,
            policy: PackingPolicy::FirstFitDecreasing,
            truncate_response: false,
        }
    }
}

/// Pack tokenized samples into sequences with loss masks.
pub fn pack_samples(samples: &[TokenizedSample], config: &PackConfig) -> Result<Vec<PackedSequence>> {
    let mut prepared: Vec<TokenizedSample> = Vec::with_capacity(samples.len());
    for s in samples {
        let mut s = s.clone();
        let total = s.instruction.len() + s.response.len();
        if config.truncate_response && total > config.capacity && s.instruction.len() < config.capacity {
            s.response.truncate(config.capacity - s.instruction.len());
        }
        prepared.push(s);
    }
    let items: Vec<PackItem> = prepared
        .iter()
        .map(|s| PackItem {
            id: s.id.clone(),
            instruction_len: s.instruction.len(),
            response_len: s.response.len(),
        })
        .collect();
    let layouts = plan_packs(&items, config.capacity, config.policy)?;
    layouts
        .into_iter()
        .map(|layout| {
            let segments = layout
                .members
                .iter()
                .map(|&i| {
                    let s = &prepared[i];
                    let mut token_ids = s.instruction.clone();
                    token_ids.extend_from_slice(&s.response);
                    Ok(Segment {
                        sample_id: s.id.clone(),
                        token_ids,
                        loss_mask: build_loss_mask(s.instruction.len(), s.response.len())?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PackedSequence {
                capacity: config.capacity,
                segments,
            })
        })
        .collect()
}

pub fn write_packs_jsonl<W: Write>(mut out: W, packs: &[PackedSequence]) -> Result<()> {
    for pack in packs {
        serde_json::to_writer(&mut out, pack)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}
