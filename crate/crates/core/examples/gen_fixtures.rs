//! Regenerate the synthetic demo fixtures under `data/demo/`.
//!
//!     cargo run -p eumix-core --example gen_fixtures -- data/demo

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use eumix::corpus::{write_documents, Source};
use eumix::synth::Synth;
use eumix::LanguageTag::{self, *};

const SEED: u64 = 20240930;
const LANGS: [LanguageTag; 5] = [De, En, Fi, Fr, Hu];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/demo".into()));
    fs::create_dir_all(root.join("parallel"))?;
    fs::create_dir_all(root.join("runs"))?;
    let synth = Synth::new(SEED);

    let mut docs = Vec::new();
    for (i, &lang) in LANGS.iter().enumerate() {
        docs.extend(synth.documents(lang, Source::Web, 40 + 10 * i));
        docs.extend(synth.documents(lang, Source::Curated, 15));
    }
    write_documents(BufWriter::new(File::create(root.join("corpus.jsonl"))?), &docs)?;

    for (lang, sentences) in synth.parallel(&LANGS, 200) {
        let mut f = BufWriter::new(File::create(
            root.join("parallel").join(format!("{}.txt", lang.as_str())),
        )?);
        for s in sentences {
            writeln!(f, "{s}")?;
        }
    }

    let samples = synth.instruction_samples(
        &[("sigma", 300), ("sigma_evolved", 200), ("self_awareness", 113)],
        &LANGS,
        16,
    );
    let mut f = BufWriter::new(File::create(root.join("sft.jsonl"))?);
    for s in &samples {
        serde_json::to_writer(&mut f, s)?;
        writeln!(f)?;
    }

    let mut f = BufWriter::new(File::create(root.join("toxicity.jsonl"))?);
    for r in synth.toxicity_records(&LANGS, 100, 1, 0.08) {
        serde_json::to_writer(&mut f, &r)?;
        writeln!(f)?;
    }

    for (id, throughput, floor, truncated) in [
        ("baseline", 1.0, 2.10, false),
        ("swiglu", 0.93, 2.06, false),
        ("adan", 0.97, 2.02, false),
        ("4xlr", 1.0, 2.04, true),
    ] {
        let steps = if truncated { 24_000 } else { 40_000 };
        let mut run = synth.loss_curve(id, throughput, steps, 500, floor);
        run.truncated = truncated;
        let mut f = BufWriter::new(File::create(root.join("runs").join(format!("{id}.csv")))?);
        writeln!(f, "step,loss")?;
        for (s, l) in &run.samples {
            writeln!(f, "{s},{l}")?;
        }
        let sidecar = serde_json::json!({
            "run_id": run.run_id,
            "mean_throughput": run.mean_throughput,
            "truncated": run.truncated,
        });
        fs::write(
            root.join("runs").join(format!("{id}.json")),
            serde_json::to_string_pretty(&sidecar)? + "\n",
        )?;
    }
    Ok(())
}
