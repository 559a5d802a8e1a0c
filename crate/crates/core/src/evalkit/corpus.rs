use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::fsutil::write_atomic;
use crate::skeleton_io::{parse_sequence, write_sequence, SequenceFormat, SkeletonSequence};

/// File listing the samples of a corpus directory, one JSON object per line.
pub const CORPUS_MANIFEST: &str = "corpus.jsonl";

/// A skeleton sequence with its class label and performer.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub sample_id: String,
    pub label: String,
    pub subject: u32,
    pub sequence: SkeletonSequence,
}

/// One line of `corpus.jsonl`; `path` is relative to the corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub sample_id: String,
    pub label: String,
    #[serde(default)]
    pub subject: u32,
    pub path: String,
}

/// Writes each sequence as `<sample_id>.jsonl` plus the corpus manifest.
pub fn write_corpus(
    dir: &Path,
    samples: &[LabeledSequence],
) -> Result<Vec<CorpusEntry>, EvalError> {
    let mut entries = Vec::with_capacity(samples.len());
    let mut manifest = String::new();
    for s in samples {
        let rel = format!("{}.jsonl", s.sample_id);
        let text = write_sequence(&s.sequence, SequenceFormat::CanonicalJson);
        let path = dir.join(&rel);
        write_atomic(&path, text.as_bytes()).map_err(|e| EvalError::io(&path, e))?;
        let entry = CorpusEntry {
            sample_id: s.sample_id.clone(),
            label: s.label.clone(),
            subject: s.subject,
            path: rel,
        };
        manifest.push_str(&serde_json::to_string(&entry).expect("entry serializes"));
        manifest.push('\n');
        entries.push(entry);
    }
    let path = dir.join(CORPUS_MANIFEST);
    write_atomic(&path, manifest.as_bytes()).map_err(|e| EvalError::io(&path, e))?;
    Ok(entries)
}

/// Loads every sequence listed in `<dir>/corpus.jsonl`.
pub fn read_corpus(dir: &Path) -> Result<Vec<LabeledSequence>, EvalError> {
    let path = dir.join(CORPUS_MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| EvalError::io(&path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry = serde_json::from_str(line)
            .map_err(|e| EvalError::Manifest(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let seq_path = dir.join(&entry.path);
        let file = fs::File::open(&seq_path).map_err(|e| EvalError::io(&seq_path, e))?;
        let sequence = parse_sequence(file, SequenceFormat::CanonicalJson, &entry.sample_id)?;
        out.push(LabeledSequence {
            sample_id: entry.sample_id,
            label: entry.label,
            subject: entry.subject,
            sequence,
        });
    }
    Ok(out)
}
