use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalError, LabeledSequence};
use crate::encoding::EncodingParams;
use crate::fsutil::write_atomic;
use crate::geometry::{Plane, ViewGrid};
use crate::rasterizer::{image_file_name, render_all, RenderSettings};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// One rendered image. `path` is relative to the directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub label: String,
    pub theta: f64,
    pub psi: f64,
    pub plane: Plane,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<(), EvalError> {
    let mut text = String::new();
    for e in entries {
        text.push_str(&serde_json::to_string(e).expect("entry serializes"));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes()).map_err(|e| EvalError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, EvalError> {
    let text = fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| EvalError::Manifest(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Renders every view and plane of one sample into `out_dir` and returns
/// the manifest rows, in grid order then plane order.
pub fn encode_sample(
    sample: &LabeledSequence,
    grid: &ViewGrid,
    planes: &[Plane],
    params: &EncodingParams,
    settings: &RenderSettings,
    out_dir: &Path,
) -> Result<Vec<ManifestEntry>, EvalError> {
    let renders = render_all(&sample.sequence, grid, params, settings)?;
    let mut entries = Vec::new();
    for view in &renders {
        for &plane in planes {
            let name = image_file_name(&sample.sample_id, view.angles, plane);
            let path = out_dir.join(&name);
            let png = view.plane(plane).to_png()?;
            write_atomic(&path, &png).map_err(|e| EvalError::io(&path, e))?;
            entries.push(ManifestEntry {
                sample_id: sample.sample_id.clone(),
                label: sample.label.clone(),
                theta: view.angles.theta,
                psi: view.angles.psi,
                plane,
                path: name,
                split: None,
            });
        }
    }
    Ok(entries)
}

/// How samples are assigned to splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitRule {
    /// Within each label, samples in order of first appearance alternate
    /// train (even ordinal) and test (odd ordinal).
    Parity,
    /// Everything goes to one named split.
    All(String),
}

impl SplitRule {
    fn assign(&self, entries: &[ManifestEntry]) -> HashMap<String, String> {
        let mut out = HashMap::new();
        let mut per_label: HashMap<&str, usize> = HashMap::new();
        for e in entries {
            if out.contains_key(&e.sample_id) {
                continue;
            }
            let split = match self {
                SplitRule::All(name) => name.clone(),
                SplitRule::Parity => {
                    let ord = per_label.entry(e.label.as_str()).or_insert(0);
                    let s = if *ord % 2 == 0 { "train" } else { "test" };
                    *ord += 1;
                    s.to_string()
                }
            };
            out.insert(e.sample_id.clone(), split);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExportSummary {
    /// Files written per split name.
    pub per_split: BTreeMap<String, usize>,
    pub total: usize,
}

/// Copies the images listed in `entries` (paths relative to `source_root`)
/// into `out_dir/<split>/<plane>/<label>/<file>` and writes the updated
/// manifest to `out_dir/manifest.jsonl`.
pub fn export_dataset(
    entries: &[ManifestEntry],
    source_root: &Path,
    out_dir: &Path,
    rule: &SplitRule,
) -> Result<ExportSummary, EvalError> {
    for e in entries {
        if !source_root.join(&e.path).is_file() {
            return Err(EvalError::Manifest(format!(
                "{} listed for {:?} does not exist",
                e.path, e.sample_id
            )));
        }
    }
    let splits = rule.assign(entries);
    let mut summary = ExportSummary::default();
    let mut exported = Vec::with_capacity(entries.len());
    for e in entries {
        let split = &splits[&e.sample_id];
        let file = Path::new(&e.path)
            .file_name()
            .ok_or_else(|| EvalError::Manifest(format!("{:?} has no file name", e.path)))?;
        let rel = Path::new(split)
            .join(e.plane.name())
            .join(&e.label)
            .join(file);
        let src = source_root.join(&e.path);
        let bytes = fs::read(&src).map_err(|err| EvalError::io(&src, err))?;
        let dst = out_dir.join(&rel);
        write_atomic(&dst, &bytes).map_err(|err| EvalError::io(&dst, err))?;
        *summary.per_split.entry(split.clone()).or_insert(0) += 1;
        summary.total += 1;
        exported.push(ManifestEntry {
            path: rel.to_string_lossy().replace('\\', "/"),
            split: Some(split.clone()),
            ..e.clone()
        });
    }
    write_manifest(&out_dir.join(MANIFEST_FILE), &exported)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::{generate_synthetic, standard_specs};
    use crate::geometry::ViewGrid;

    fn walk(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, out);
            } else {
                out.push(p);
            }
        }
    }

    fn encode(samples: &[LabeledSequence], dir: &Path) -> Vec<ManifestEntry> {
        let settings = RenderSettings::with_size(32, 32);
        samples
            .iter()
            .flat_map(|s| {
                encode_sample(
                    s,
                    &ViewGrid::identity(),
                    &Plane::ALL,
                    &EncodingParams::default(),
                    &settings,
                    dir,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn two_by_two_parity_export() {
        let tmp = tempfile::tempdir().unwrap();
        let samples = generate_synthetic(&standard_specs()[..2], 2, 1);
        let entries = encode(&samples, &tmp.path().join("src"));
        let out = tmp.path().join("out");
        let summary =
            export_dataset(&entries, &tmp.path().join("src"), &out, &SplitRule::Parity).unwrap();
        assert_eq!(summary.total, 12);
        assert_eq!(summary.per_split["train"], 6);
        assert_eq!(summary.per_split["test"], 6);
        assert!(out
            .join("train/front/circle-cw/circle-cw_000__t0_p0__front.png")
            .is_file());
        assert!(out
            .join("test/side/circle-ccw/circle-ccw_001__t0_p0__side.png")
            .is_file());
        let mut files = Vec::new();
        walk(&out, &mut files);
        assert_eq!(files.len(), 13);
    }

    #[test]
    fn every_manifest_row_has_one_file_and_reexport_is_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let samples = generate_synthetic(&standard_specs(), 3, 77);
        let src = tmp.path().join("src");
        let entries = encode(&samples, &src);
        let a = tmp.path().join("a");
        let b = tmp.path().join("b");
        export_dataset(&entries, &src, &a, &SplitRule::Parity).unwrap();
        export_dataset(&entries, &src, &b, &SplitRule::Parity).unwrap();
        // Re-export into an existing tree leaves it unchanged as well.
        export_dataset(&entries, &src, &a, &SplitRule::Parity).unwrap();

        let manifest = read_manifest(&a.join(MANIFEST_FILE)).unwrap();
        let mut files = Vec::new();
        walk(&a, &mut files);
        files.retain(|p| p.file_name().unwrap() != MANIFEST_FILE);
        files.sort();
        let mut listed: Vec<_> = manifest.iter().map(|e| a.join(&e.path)).collect();
        listed.sort();
        assert_eq!(files, listed);

        let mut other = Vec::new();
        walk(&b, &mut other);
        other.sort();
        let mut all_a = Vec::new();
        walk(&a, &mut all_a);
        all_a.sort();
        assert_eq!(all_a.len(), other.len());
        for (x, y) in all_a.iter().zip(&other) {
            assert_eq!(x.strip_prefix(&a).unwrap(), y.strip_prefix(&b).unwrap());
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }

    #[test]
    fn missing_source_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let entry = ManifestEntry {
            sample_id: "s".into(),
            label: "l".into(),
            theta: 0.0,
            psi: 0.0,
            plane: Plane::Front,
            path: "nope.png".into(),
            split: None,
        };
        let err = export_dataset(
            &[entry],
            tmp.path(),
            &tmp.path().join("o"),
            &SplitRule::Parity,
        );
        assert!(matches!(err, Err(EvalError::Manifest(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let entries = vec![ManifestEntry {
            sample_id: "s".into(),
            label: "l".into(),
            theta: 15.0,
            psi: -22.5,
            plane: Plane::Top,
            path: "s__t15_p-22.5__top.png".into(),
            split: Some("train".into()),
        }];
        let p = tmp.path().join(MANIFEST_FILE);
        write_manifest(&p, &entries).unwrap();
        assert_eq!(read_manifest(&p).unwrap(), entries);
    }
}
