//! Seeded synthetic data: multilingual text with language-specific
//! morphology, parallel sentences, instruction samples, toxicity scores and
//! training-loss curves. Used for fixtures, demos and tests; nothing here is
//! meant to look like real language beyond its statistical shape.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ablation::RunLog;
use crate::corpus::{Document, Source};
use crate::lang::LanguageTag;
use crate::metrics::{Attribute, ToxicityRecord};
use crate::selection::InstructionSample;

/// Onsets, vowels and codas. Languages share some material so that a
/// tokenizer trained on one transfers partially to its neighbours.
struct Phonology {
    onsets: &'static [&'static str],
    vowels: &'static [&'static str],
    codas: &'static [&'static str],
    /// Typical syllables per word (inclusive range).
    syllables: (usize, usize),
}

const LATIN_ONSETS: &[&str] = &["b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v"];

fn phonology(lang: LanguageTag) -> Phonology {
    use LanguageTag::*;
    let p = |onsets, vowels, codas, syllables| Phonology {
        onsets,
        vowels,
        codas,
        syllables,
    };
    match lang {
        En => p(
            &[
                "th", "w", "b", "c", "d", "f", "h", "l", "m", "n", "p", "r", "s", "t", "sh", "wh",
            ],
            &["a", "e", "i", "o", "u", "ea", "ou", "ee"],
            &["", "", "t", "d", "n", "s", "ng", "ght", "ll"],
            (1, 2),
        ),
        De => p(
            &["sch", "st", "b", "d", "g", "h", "k", "m", "n", "w", "z", "pf", "spr"],
            &["a", "e", "i", "o", "u", "ä", "ö", "ü", "ei", "au", "ie"],
            &["", "n", "r", "t", "ch", "cht", "ng", "ung", "keit", "lich"],
            (2, 4),
        ),
        Fr => p(
            &["qu", "ch", "b", "d", "f", "l", "m", "p", "r", "s", "t", "v"],
            &["a", "e", "é", "è", "i", "o", "ou", "eau", "ai"],
            &["", "", "s", "x", "nt", "r", "re", "ion"],
            (1, 3),
        ),
        Es => p(
            &["ll", "ñ", "b", "c", "d", "g", "l", "m", "p", "r", "s", "t"],
            &["a", "e", "i", "o", "u", "á", "ó", "ue", "ie"],
            &["", "", "s", "n", "r", "l", "ción", "dad"],
            (2, 3),
        ),
        It => p(
            &["gl", "gn", "sc", "b", "c", "d", "f", "l", "m", "p", "r", "t", "v", "z"],
            &["a", "e", "i", "o", "u", "ì", "à"],
            &["", "", "", "zz", "tt", "ll", "ne", "re"],
            (2, 3),
        ),
        Pt => p(
            &["lh", "nh", "b", "c", "d", "f", "l", "m", "p", "r", "s", "t", "v"],
            &["a", "e", "i", "o", "u", "ã", "õ", "ão", "ê"],
            &["", "", "s", "m", "r", "ção", "ões"],
            (2, 3),
        ),
        Fi => p(
            &["k", "t", "p", "s", "h", "j", "l", "m", "n", "r", "v"],
            &["a", "e", "i", "o", "u", "y", "ä", "ö", "aa", "ää", "uu", "ii"],
            &["", "", "n", "t", "kk", "tt", "ssa", "llä", "inen", "ksi"],
            (3, 5),
        ),
        Hu => p(
            &["sz", "gy", "zs", "cs", "ny", "ty", "b", "d", "k", "l", "m", "t", "v"],
            &["a", "e", "i", "o", "u", "á", "é", "ő", "ű", "ö", "ü"],
            &["", "k", "t", "nak", "nek", "ban", "ben", "ség", "ból"],
            (3, 5),
        ),
        Et => p(
            &["k", "t", "p", "s", "h", "j", "l", "m", "n", "r", "v"],
            &["a", "e", "i", "o", "u", "õ", "ä", "ö", "ü", "aa"],
            &["", "d", "s", "st", "ga", "ks", "le"],
            (2, 4),
        ),
        Nl => p(
            &["sch", "gr", "b", "d", "g", "h", "k", "l", "m", "n", "v", "w", "z"],
            &["a", "e", "i", "o", "u", "aa", "ee", "oo", "ij", "ui"],
            &["", "n", "en", "t", "cht", "ng", "heid"],
            (2, 3),
        ),
        Da => p(
            &["sk", "st", "b", "d", "f", "g", "h", "k", "l", "m", "n", "v"],
            &["a", "e", "i", "o", "u", "y", "æ", "ø", "å"],
            &["", "r", "n", "t", "de", "ne", "hed"],
            (1, 3),
        ),
        Sv => p(
            &["sk", "sj", "tj", "b", "d", "f", "g", "h", "k", "l", "m", "n", "v"],
            &["a", "e", "i", "o", "u", "y", "ä", "ö", "å"],
            &["", "r", "n", "t", "ar", "na", "het"],
            (1, 3),
        ),
        Pl => p(
            &["prz", "szcz", "cz", "sz", "rz", "dz", "b", "d", "k", "l", "m", "w", "z"],
            &["a", "e", "i", "o", "u", "y", "ą", "ę", "ó"],
            &["", "ć", "ń", "ś", "ł", "k", "ski", "nie"],
            (2, 4),
        ),
        Cs => p(
            &["př", "st", "ch", "b", "d", "k", "l", "m", "n", "p", "v", "z"],
            &["a", "e", "i", "o", "u", "á", "é", "í", "ů", "ě"],
            &["", "k", "t", "č", "ř", "ní", "ost"],
            (2, 3),
        ),
        Sk => p(
            &["st", "ch", "dž", "b", "d", "k", "l", "m", "n", "p", "v", "z"],
            &["a", "e", "i", "o", "u", "á", "ä", "ô", "ia", "ie"],
            &["", "k", "t", "ť", "ľ", "nie", "osť"],
            (2, 3),
        ),
        Sl => p(
            &["st", "č", "š", "ž", "b", "d", "k", "l", "m", "n", "p", "v"],
            &["a", "e", "i", "o", "u"],
            &["", "j", "k", "t", "ti", "nje", "ost"],
            (2, 3),
        ),
        Hr => p(
            &["st", "č", "ć", "š", "ž", "dž", "b", "d", "k", "l", "m", "n", "v"],
            &["a", "e", "i", "o", "u", "ije"],
            &["", "j", "k", "t", "ti", "nje", "ost"],
            (2, 3),
        ),
        Ro => p(
            &["ș", "ț", "st", "b", "c", "d", "f", "l", "m", "p", "r", "t", "v"],
            &["a", "e", "i", "o", "u", "ă", "â", "î", "ea"],
            &["", "", "ul", "le", "lor", "re", "ție"],
            (2, 3),
        ),
        Lt => p(
            &["š", "ž", "č", "b", "d", "g", "k", "l", "m", "n", "p", "t", "v"],
            &["a", "e", "i", "o", "u", "ą", "ę", "ė", "į", "ų", "ū"],
            &["", "s", "as", "is", "us", "ai", "ių"],
            (2, 4),
        ),
        Lv => p(
            &["š", "ž", "č", "ķ", "b", "d", "g", "k", "l", "m", "n", "p", "t", "v"],
            &["a", "e", "i", "o", "u", "ā", "ē", "ī", "ū"],
            &["", "s", "š", "as", "ai", "ām", "ība"],
            (2, 4),
        ),
        Ga => p(
            &[
                "bh", "mh", "ch", "dh", "gh", "b", "c", "d", "f", "l", "m", "n", "s", "t",
            ],
            &["a", "e", "i", "o", "u", "á", "é", "í", "ó", "ú", "ao"],
            &["", "n", "r", "ch", "idh", "acht"],
            (1, 3),
        ),
        Mt => p(
            &["ħ", "ġ", "ż", "għ", "b", "d", "f", "k", "l", "m", "n", "r", "s", "t"],
            &["a", "e", "i", "o", "u", "ie"],
            &["", "t", "n", "ija", "ment"],
            (2, 3),
        ),
        El => p(
            &["θ", "χ", "ψ", "β", "γ", "δ", "κ", "λ", "μ", "ν", "π", "ρ", "σ", "τ"],
            &["α", "ε", "η", "ι", "ο", "υ", "ω", "ά", "έ", "ί", "ού"],
            &["", "ς", "ν", "ση", "τα", "ος"],
            (2, 4),
        ),
        Bg => p(
            &[
                "ж", "ш", "щ", "ч", "б", "в", "г", "д", "к", "л", "м", "н", "п", "р", "с", "т",
            ],
            &["а", "е", "и", "о", "у", "ъ", "я", "ю"],
            &["", "т", "н", "та", "ите", "ост", "ски"],
            (2, 3),
        ),
        Code => p(
            &["fn", "let", "var", "self", "get", "set", "is", "to", "on", "_"],
            &["_", ".", "(", ")", "x", "id", "len"],
            &["", "()", "[i]", "=0;", "->", "{}"],
            (1, 3),
        ),
        Unknown => p(LATIN_ONSETS, &["a", "e", "i", "o", "u"], &["", "n", "s"], (1, 3)),
    }
}

fn derive_seed(seed: u64, salt: &[u64]) -> u64 {
    // splitmix64 over the salt words
    let mut x = seed;
    for &s in salt {
        x = x.wrapping_add(s).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}

fn lang_salt(lang: LanguageTag) -> u64 {
    lang.as_str().bytes().fold(0u64, |acc, b| acc * 131 + b as u64)
}

/// Build `size` distinct words for `lang`.
pub fn lexicon(lang: LanguageTag, size: usize, seed: u64) -> Vec<String> {
    let ph = phonology(lang);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[lang_salt(lang)]));
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::with_capacity(size);
    let mut attempts = 0usize;
    while words.len() < size {
        attempts += 1;
        let extra = attempts / (size * 20 + 1);
        let n = rng.gen_range(ph.syllables.0..=ph.syllables.1) + extra;
        let mut w = String::new();
        for i in 0..n {
            w.push_str(ph.onsets.choose(&mut rng).unwrap());
            w.push_str(ph.vowels.choose(&mut rng).unwrap());
            if i + 1 == n || rng.gen_bool(0.2) {
                w.push_str(ph.codas.choose(&mut rng).unwrap());
            }
        }
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

/// Deterministic generator of parallel multilingual text.
///
/// Sentence `i` expresses the same sequence of concepts in every language,
/// so word counts line up across languages the way a parallel corpus does.
pub struct Synth {
    seed: u64,
    lexicons: BTreeMap<LanguageTag, Vec<String>>,
    zipf: WeightedIndex<f64>,
}

impl Synth {
    pub const LEXICON_SIZE: usize = 1500;

    pub fn new(seed: u64) -> Self {
        let mut langs: Vec<LanguageTag> = LanguageTag::EU24.to_vec();
        langs.push(LanguageTag::Code);
        let lexicons = langs
            .into_iter()
            .map(|l| (l, lexicon(l, Self::LEXICON_SIZE, seed)))
            .collect();
        let weights: Vec<f64> = (0..Self::LEXICON_SIZE).map(|r| 1.0 / (r as f64 + 2.0)).collect();
        Synth {
            seed,
            lexicons,
            zipf: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    fn concepts(&self, index: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[0xC0C0, index]));
        let n = rng.gen_range(6..=14);
        (0..n).map(|_| self.zipf.sample(&mut rng)).collect()
    }

    /// The `index`-th sentence of the parallel stream in `lang`.
    pub fn sentence(&self, lang: LanguageTag, index: u64) -> String {
        let lex = &self.lexicons[&self.canonical(lang)];
        let words: Vec<&str> = self.concepts(index).into_iter().map(|c| lex[c].as_str()).collect();
        let mut s = words.join(" ");
        if let Some(first) = s.chars().next() {
            let upper: String = first.to_uppercase().collect();
            s.replace_range(..first.len_utf8(), &upper);
        }
        s.push('.');
        s
    }

    fn canonical(&self, lang: LanguageTag) -> LanguageTag {
        if self.lexicons.contains_key(&lang) {
            lang
        } else {
            LanguageTag::En
        }
    }

    pub fn parallel(&self, languages: &[LanguageTag], sentences: usize) -> BTreeMap<LanguageTag, Vec<String>> {
        languages
            .iter()
            .map(|&l| (l, (0..sentences as u64).map(|i| self.sentence(l, i)).collect()))
            .collect()
    }

    /// `count` documents in `lang`, each a few sentences drawn from a stream
    /// disjoint from the parallel one.
    pub fn documents(&self, lang: LanguageTag, source: Source, count: usize) -> Vec<Document> {
        let src = match source {
            Source::Web => "web",
            Source::Curated => "cur",
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[lang_salt(lang), source as u64]));
        (0..count)
            .map(|j| {
                let n = rng.gen_range(2..=8);
                let text = (0..n)
                    .map(|_| self.sentence(lang, 1 << 32 | rng.gen_range(0..1u64 << 24)))
                    .collect::<Vec<_>>()
                    .join(" ");
                Document::new(format!("{}-{src}-{j:05}", lang.as_str()), lang, source, text)
            })
            .collect()
    }

    /// Instruction samples spread over `datasets`, with random raw scores and
    /// `dim`-dimensional embeddings. Roughly one in five samples is a near
    /// duplicate of an earlier one, to give the diversity filter work.
    pub fn instruction_samples(
        &self,
        datasets: &[(&str, usize)],
        languages: &[LanguageTag],
        dim: usize,
    ) -> Vec<InstructionSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[0x5F7]));
        let mut out: Vec<InstructionSample> = Vec::new();
        let mut counter = 0u64;
        for &(dataset, n) in datasets {
            let start = out.len();
            for k in 0..n {
                let lang = languages[rng.gen_range(0..languages.len())];
                let embedding: Vec<f64> = if k > 0 && rng.gen_bool(0.2) {
                    let base = &out[start + rng.gen_range(0..k)].embedding;
                    base.iter().map(|x| x + rng.gen_range(-0.02..0.02)).collect()
                } else {
                    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
                };
                let embedding = if embedding.iter().all(|x| *x == 0.0) {
                    vec![1.0; dim]
                } else {
                    embedding
                };
                counter += 1;
                out.push(InstructionSample {
                    id: format!("{dataset}-{k:05}"),
                    instruction: self.sentence(lang, 2 << 32 | counter),
                    response: format!(
                        "{} {}",
                        self.sentence(lang, 3 << 32 | counter),
                        self.sentence(lang, 4 << 32 | counter)
                    ),
                    language: lang,
                    dataset: dataset.to_string(),
                    raw_quality: (rng.gen_range(1.0..10.0f64) * 100.0).round() / 100.0,
                    raw_complexity: (rng.gen_range(1.0..10.0f64) * 100.0).round() / 100.0,
                    embedding,
                });
            }
        }
        out
    }

    /// `prompts` records per (language, attribute) with `k` generations each;
    /// scores skew low, with `tox_rate` controlling the heavy tail.
    pub fn toxicity_records(
        &self,
        languages: &[LanguageTag],
        prompts: usize,
        k: usize,
        tox_rate: f64,
    ) -> Vec<ToxicityRecord> {
        let mut out = Vec::new();
        for &lang in languages {
            for attribute in [Attribute::Profanity, Attribute::Toxicity] {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[0x70C, lang_salt(lang), attribute as u64]));
                for p in 0..prompts {
                    let scores = (0..k)
                        .map(|_| {
                            let u: f64 = rng.gen();
                            let s = if rng.gen_bool(tox_rate) {
                                0.5 + 0.5 * u
                            } else {
                                0.5 * u.powi(3)
                            };
                            (s * 1000.0).round() / 1000.0
                        })
                        .collect();
                    out.push(ToxicityRecord {
                        prompt_id: format!("{}-{p:04}", lang.as_str()),
                        language: lang,
                        attribute,
                        scores,
                    });
                }
            }
        }
        out
    }

    /// Power-law loss curve `floor + scale · s^(−exponent)` with small noise,
    /// logged every `every` steps up to `steps`.
    pub fn loss_curve(&self, run_id: &str, throughput: f64, steps: u64, every: u64, floor: f64) -> RunLog {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[run_id.len() as u64, steps]));
        let samples = (1..=steps / every)
            .map(|i| {
                let s = i * every;
                let loss = floor + 6.0 * (s as f64).powf(-0.3) + rng.gen_range(-0.01..0.01);
                (s, (loss * 1e4).round() / 1e4)
            })
            .collect();
        RunLog {
            run_id: run_id.to_string(),
            mean_throughput: throughput,
            samples,
            skip_normalization: false,
            truncated: false,
        }
    }
}
