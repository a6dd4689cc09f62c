//! Byte-level BPE: balanced training-sample construction, greedy merge
//! training, encoding and decoding.
//!
//! Token ids are laid out as the 256 byte values, then the reserved special
//! tokens, then one id per learned token in merge order. Pre-tokenization
//! splits text at the start of every whitespace run that follows a
//! non-whitespace character, so each pre-token is one word plus the
//! whitespace that precedes it. Merges never cross pre-token boundaries and
//! encoding stays lossless.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, TokenCounter};
use crate::error::{Error, Result};
use crate::lang::LanguageTag;

pub type TokenId = u32;

pub const BYTE_ALPHABET: usize = 256;

/// Reserved special tokens, in id order. A vocab reserves a prefix of this
/// list.
pub const SPECIAL_TOKENS: [&str; 3] = ["<|bos|>", "<|eos|>", "<|pad|>"];

const VOCAB_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pretokenize {
    #[default]
    WhitespaceSplit,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub vocab_size: usize,
    /// Documents drawn per language for the training sample.
    pub per_language_quota: usize,
    /// Languages to balance over. Empty means every language in the corpus
    /// except `unknown`.
    pub languages: Vec<LanguageTag>,
    pub special_count: usize,
    pub pretokenize: Pretokenize,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            vocab_size: 512,
            per_language_quota: 100,
            languages: Vec::new(),
            special_count: SPECIAL_TOKENS.len(),
            pretokenize: Pretokenize::WhitespaceSplit,
            seed: 0,
        }
    }
}

/// Split `text` into pre-tokens (see module docs).
pub fn pretokenize(text: &str, mode: Pretokenize) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    if mode == Pretokenize::None {
        return vec![text];
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev_ws = true;
    for (i, ch) in text.char_indices() {
        let ws = ch.is_whitespace();
        if ws && !prev_ws && i > start {
            out.push(&text[start..i]);
            start = i;
        }
        prev_ws = ws;
    }
    out.push(&text[start..]);
    out
}

/// Draw exactly `per_language_quota` documents per language by seeded
/// uniform sampling without replacement.
///
/// Candidates are ordered by id before sampling, so the selection does not
/// depend on corpus order. Selected documents are returned grouped by
/// language, in id order within each group.
pub fn build_training_sample(docs: &[Document], config: &TrainerConfig) -> Result<Vec<Document>> {
    let mut by_lang: BTreeMap<LanguageTag, Vec<&Document>> = BTreeMap::new();
    for doc in docs {
        by_lang.entry(doc.language).or_default().push(doc);
    }
    let languages: Vec<LanguageTag> = if config.languages.is_empty() {
        by_lang.keys().copied().filter(|l| *l != LanguageTag::Unknown).collect()
    } else {
        let mut langs = config.languages.clone();
        langs.sort();
        langs.dedup();
        langs
    };

    let quota = config.per_language_quota;
    for &lang in &languages {
        let available = by_lang.get(&lang).map_or(0, Vec::len);
        if available < quota {
            return Err(Error::InsufficientDocuments {
                language: lang,
                quota,
                available,
                shortfall: quota - available,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sample = Vec::with_capacity(quota * languages.len());
    for lang in languages {
        let mut pool = by_lang.remove(&lang).unwrap_or_default();
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        let mut picked = index::sample(&mut rng, pool.len(), quota).into_vec();
        picked.sort_unstable();
        sample.extend(picked.into_iter().map(|i| pool[i].clone()));
    }
    Ok(sample)
}

#[derive(Clone, Debug)]
pub struct Vocab {
    merges: Vec<(TokenId, TokenId)>,
    /// Result id of each merge, parallel to `merges`.
    merge_results: Vec<TokenId>,
    tokens: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, TokenId>,
    ranks: HashMap<(TokenId, TokenId), (usize, TokenId)>,
    special_count: usize,
    pretokenize: Pretokenize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence(pub Vec<TokenId>);

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.0
    }
}

impl Vocab {
    /// A vocab with no merges: every byte is its own token.
    pub fn bytes_only(special_count: usize, pretokenize: Pretokenize) -> Result<Vocab> {
        if special_count > SPECIAL_TOKENS.len() {
            return Err(Error::Invalid(format!(
                "special_count {special_count} exceeds the {} reserved specials",
                SPECIAL_TOKENS.len()
            )));
        }
        let mut tokens = Vec::with_capacity(BYTE_ALPHABET + special_count);
        let mut ids = HashMap::new();
        for b in 0..=255u8 {
            ids.insert(vec![b], b as TokenId);
            tokens.push(vec![b]);
        }
        for special in &SPECIAL_TOKENS[..special_count] {
            tokens.push(special.as_bytes().to_vec());
        }
        Ok(Vocab {
            merges: Vec::new(),
            merge_results: Vec::new(),
            tokens,
            ids,
            ranks: HashMap::new(),
            special_count,
            pretokenize,
        })
    }

    /// Append a merge of two existing tokens. Returns the id of the merged
    /// token, which is an existing id when the concatenated bytes are
    /// already in the table.
    fn push_merge(&mut self, left: TokenId, right: TokenId) -> TokenId {
        let mut bytes = self.tokens[left as usize].clone();
        bytes.extend_from_slice(&self.tokens[right as usize]);
        let result = match self.ids.get(&bytes) {
            Some(&id) => id,
            None => {
                let id = self.tokens.len() as TokenId;
                self.tokens.push(bytes.clone());
                self.ids.insert(bytes, id);
                id
            }
        };
        self.ranks.entry((left, right)).or_insert((self.merges.len(), result));
        self.merges.push((left, right));
        self.merge_results.push(result);
        result
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn merges(&self) -> &[(TokenId, TokenId)] {
        &self.merges
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn special_count(&self) -> usize {
        self.special_count
    }

    pub fn pretokenize_mode(&self) -> Pretokenize {
        self.pretokenize
    }

    pub fn token_bytes(&self, id: TokenId) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub fn special_id(&self, name: &str) -> Option<TokenId> {
        SPECIAL_TOKENS[..self.special_count]
            .iter()
            .position(|s| *s == name)
            .map(|i| (BYTE_ALPHABET + i) as TokenId)
    }

    /// Id of a learned or byte token with exactly these bytes.
    pub fn token_id(&self, bytes: &[u8]) -> Option<TokenId> {
        self.ids.get(bytes).copied()
    }

    /// A copy keeping only the first `n` merges.
    pub fn with_merge_limit(&self, n: usize) -> Vocab {
        let mut out = Vocab::bytes_only(self.special_count, self.pretokenize).expect("special count already validated");
        for &(left, right) in self.merges.iter().take(n) {
            out.push_merge(left, right);
        }
        out
    }

    fn encode_word(&self, word: &[u8], out: &mut Vec<TokenId>) {
        let mut parts: Vec<TokenId> = word.iter().map(|&b| b as TokenId).collect();
        while parts.len() > 1 {
            let best = parts
                .windows(2)
                .filter_map(|w| {
                    self.ranks
                        .get(&(w[0], w[1]))
                        .map(|&(rank, res)| (rank, w[0], w[1], res))
                })
                .min_by_key(|&(rank, ..)| rank);
            let Some((_, left, right, result)) = best else {
                break;
            };
            parts = merge_pair(&parts, left, right, result);
        }
        out.extend_from_slice(&parts);
    }

    pub fn encode(&self, text: &str) -> TokenSequence {
        let mut ids = Vec::with_capacity(text.len());
        for piece in pretokenize(text, self.pretokenize) {
            self.encode_word(piece.as_bytes(), &mut ids);
        }
        TokenSequence(ids)
    }

    /// Concatenate token bytes and decode as UTF-8, substituting U+FFFD for
    /// invalid sequences.
    pub fn decode(&self, tokens: &[TokenId]) -> Result<String> {
        let mut bytes = Vec::with_capacity(tokens.len() * 2);
        for &id in tokens {
            let token = self.tokens.get(id as usize).ok_or(Error::UnknownTokenId(id))?;
            bytes.extend_from_slice(token);
        }
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = VocabFile {
            version: VOCAB_FORMAT_VERSION,
            pretokenize: self.pretokenize,
            specials: SPECIAL_TOKENS[..self.special_count]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            merges: self
                .merges
                .iter()
                .map(|&(l, r)| {
                    [
                        escape_bytes(&self.tokens[l as usize]),
                        escape_bytes(&self.tokens[r as usize]),
                    ]
                })
                .collect(),
        };
        let mut json = serde_json::to_string_pretty(&file)?;
        json.push('\n');
        Ok(json)
    }

    pub fn from_json(json: &str) -> Result<Vocab> {
        let file: VocabFile = serde_json::from_str(json)?;
        if file.version != VOCAB_FORMAT_VERSION {
            return Err(Error::Invalid(format!("unsupported vocab version {}", file.version)));
        }
        let special_count = file.specials.len();
        if file.specials[..] != SPECIAL_TOKENS[..special_count.min(SPECIAL_TOKENS.len())] {
            return Err(Error::Invalid(format!(
                "specials {:?} are not a prefix of {:?}",
                file.specials, SPECIAL_TOKENS
            )));
        }
        let mut vocab = Vocab::bytes_only(special_count, file.pretokenize)?;
        for (rank, [left, right]) in file.merges.iter().enumerate() {
            let lookup = |s: &str| -> Result<TokenId> {
                let bytes = unescape_bytes(s)?;
                vocab
                    .token_id(&bytes)
                    .ok_or_else(|| Error::Invalid(format!("merge {rank}: token {s:?} not defined by earlier merges")))
            };
            let (l, r) = (lookup(left)?, lookup(right)?);
            vocab.push_merge(l, r);
        }
        Ok(vocab)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_json()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocab> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocab::from_json(&json)
    }
}

impl TokenCounter for Vocab {
    fn count_tokens(&self, text: &str) -> u64 {
        self.encode(text).len() as u64
    }
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    version: u32,
    pretokenize: Pretokenize,
    specials: Vec<String>,
    merges: Vec<[String; 2]>,
}

/// Printable ASCII except `\` passes through; everything else is `\xHH`.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            0x21..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

pub fn unescape_bytes(s: &str) -> Result<Vec<u8>> {
    let bad = || Error::Invalid(format!("bad byte escape in {s:?}"));
    let raw = s.as_bytes();
    let mut out = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        if raw[i] != b'\\' {
            out.push(raw[i]);
            i += 1;
            continue;
        }
        match raw.get(i + 1) {
            Some(b'\\') => {
                out.push(b'\\');
                i += 2;
            }
            Some(b'x') => {
                let hex = s.get(i + 2..i + 4).ok_or_else(bad)?;
                out.push(u8::from_str_radix(hex, 16).map_err(|_| bad())?);
                i += 4;
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

fn merge_pair(parts: &[TokenId], left: TokenId, right: TokenId, result: TokenId) -> Vec<TokenId> {
    let mut out = Vec::with_capacity(parts.len());
    let mut i = 0;
    while i < parts.len() {
        if i + 1 < parts.len() && parts[i] == left && parts[i + 1] == right {
            out.push(result);
            i += 2;
        } else {
            out.push(parts[i]);
            i += 1;
        }
    }
    out
}

/// Heap entry: highest count first, then the lexicographically smallest
/// `(left bytes, right bytes)`.
#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: Vec<u8>,
    right: Vec<u8>,
    pair: (TokenId, TokenId),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn count_pretokens<S: AsRef<str> + Sync>(texts: &[S], mode: Pretokenize) -> Vec<(Vec<u8>, u64)> {
    let counts = texts
        .par_iter()
        .fold(HashMap::<&str, u64>::new, |mut acc, text| {
            for piece in pretokenize(text.as_ref(), mode) {
                *acc.entry(piece).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut words: Vec<(Vec<u8>, u64)> = counts.into_iter().map(|(k, v)| (k.as_bytes().to_vec(), v)).collect();
    words.sort_unstable();
    words
}

/// Greedy most-frequent-pair BPE over the pre-tokens of `texts`.
///
/// Stops when the table holds `vocab_size` tokens, or earlier if no
/// adjacent pair remains to merge.
pub fn train_on_texts<S: AsRef<str> + Sync>(texts: &[S], config: &TrainerConfig) -> Result<Vocab> {
    let minimum = BYTE_ALPHABET + config.special_count;
    if config.vocab_size <= minimum {
        return Err(Error::VocabTooSmall {
            requested: config.vocab_size,
            minimum,
        });
    }
    if texts.is_empty() {
        return Err(Error::Invalid("no training documents".into()));
    }
    let mut vocab = Vocab::bytes_only(config.special_count, config.pretokenize)?;

    let unique = count_pretokens(texts, config.pretokenize);
    let freqs: Vec<u64> = unique.iter().map(|(_, f)| *f).collect();
    let mut words: Vec<Vec<TokenId>> = unique
        .iter()
        .map(|(w, _)| w.iter().map(|&b| b as TokenId).collect())
        .collect();

    let mut pair_counts: HashMap<(TokenId, TokenId), u64> = HashMap::new();
    let mut where_found: HashMap<(TokenId, TokenId), HashSet<usize>> = HashMap::new();
    for (idx, word) in words.iter().enumerate() {
        for w in word.windows(2) {
            *pair_counts.entry((w[0], w[1])).or_default() += freqs[idx];
            where_found.entry((w[0], w[1])).or_default().insert(idx);
        }
    }

    let candidate = |vocab: &Vocab, pair: (TokenId, TokenId), count: u64| Candidate {
        count,
        left: vocab.tokens[pair.0 as usize].clone(),
        right: vocab.tokens[pair.1 as usize].clone(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&pair, &count)| candidate(&vocab, pair, count))
        .collect();

    while vocab.len() < config.vocab_size {
        let Some(top) = heap.pop() else {
            log::warn!(
                "no pairs left to merge; vocab stopped at {} of {} tokens",
                vocab.len(),
                config.vocab_size
            );
            break;
        };
        let current = pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current != top.count || current == 0 {
            continue;
        }
        let (left, right) = top.pair;
        let result = vocab.push_merge(left, right);

        let mut touched: HashSet<(TokenId, TokenId)> = HashSet::new();
        let mut affected: Vec<usize> = where_found.remove(&top.pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        for idx in affected {
            let word = &words[idx];
            if !word.windows(2).any(|w| w[0] == left && w[1] == right) {
                continue;
            }
            let freq = freqs[idx];
            for w in word.windows(2) {
                let p = (w[0], w[1]);
                if let Some(c) = pair_counts.get_mut(&p) {
                    *c -= freq;
                }
                touched.insert(p);
            }
            let merged = merge_pair(word, left, right, result);
            for w in merged.windows(2) {
                let p = (w[0], w[1]);
                *pair_counts.entry(p).or_default() += freq;
                where_found.entry(p).or_default().insert(idx);
                touched.insert(p);
            }
            words[idx] = merged;
        }
        for p in touched {
            let count = pair_counts.get(&p).copied().unwrap_or(0);
            if count == 0 {
                pair_counts.remove(&p);
            } else {
                heap.push(candidate(&vocab, p, count));
            }
        }
    }
    Ok(vocab)
}

/// Train on a balanced sample of `docs` drawn by [`build_training_sample`].
/// Document order does not affect the result.
pub fn train_bpe(docs: &[Document], config: &TrainerConfig) -> Result<Vocab> {
    let sample = build_training_sample(docs, config)?;
    let texts: Vec<&str> = sample.iter().map(|d| d.text.as_str()).collect();
    train_on_texts(&texts, config)
}
