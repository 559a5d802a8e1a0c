use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::knn::{knn_scores, ImageSample, KnnConfig};
use super::{EvalError, LabeledSequence};
use crate::encoding::{EncodingLevel, EncodingParams};
use crate::fusion::{accuracy, fuse, multiply_fuse, FusionMethod, ScoreMatrix};
use crate::geometry::{fmt_angle, Plane, ViewAngles, ViewGrid};
use crate::rasterizer::{render_view, RenderSettings};

/// Train/test assignment for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Protocol {
    /// Within each label, even ordinals train and odd ordinals test.
    #[default]
    ParitySplit,
    /// One fold per subject, tested on that subject and trained on the rest.
    LeaveOneSubjectOut,
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "parity" | "split" => Ok(Protocol::ParitySplit),
            "loso" | "leave-one-subject-out" => Ok(Protocol::LeaveOneSubjectOut),
            other => Err(format!("unknown protocol {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub params: EncodingParams,
    pub settings: RenderSettings,
    pub knn: KnnConfig,
    pub protocol: Protocol,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            params: EncodingParams::default(),
            settings: RenderSettings::with_size(64, 64),
            knn: KnnConfig::default(),
            protocol: Protocol::ParitySplit,
        }
    }
}

/// `(train, test)` index lists per fold. Folds with an empty side are dropped.
pub fn split_folds(
    corpus: &[LabeledSequence],
    protocol: Protocol,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    match protocol {
        Protocol::ParitySplit => {
            let mut ord: HashMap<&str, usize> = HashMap::new();
            let (mut train, mut test) = (Vec::new(), Vec::new());
            for (i, s) in corpus.iter().enumerate() {
                let o = ord.entry(s.label.as_str()).or_insert(0);
                if *o % 2 == 0 {
                    train.push(i);
                } else {
                    test.push(i);
                }
                *o += 1;
            }
            vec![(train, test)]
        }
        Protocol::LeaveOneSubjectOut => {
            let subjects: BTreeSet<u32> = corpus.iter().map(|s| s.subject).collect();
            subjects
                .into_iter()
                .map(|subj| {
                    (0..corpus.len()).partition::<Vec<usize>, _>(|&i| corpus[i].subject != subj)
                })
                .filter(|(tr, te)| !tr.is_empty() && !te.is_empty())
                .collect()
        }
    }
}

/// Renders every sample at one view; one image per plane, in corpus order.
pub fn render_corpus(
    corpus: &[LabeledSequence],
    angles: ViewAngles,
    params: &EncodingParams,
    settings: &RenderSettings,
) -> Result<Vec<[ImageSample; 3]>, EvalError> {
    corpus
        .par_iter()
        .map(|s| {
            let canvases = render_view(&s.sequence, angles, params, settings)?;
            Ok(canvases.map(|c| ImageSample::from_canvas(&s.sample_id, &s.label, &c)))
        })
        .collect()
}

fn class_list(corpus: &[LabeledSequence]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in corpus {
        if !out.contains(&s.label) {
            out.push(s.label.clone());
        }
    }
    out
}

/// Shared state of one experiment: folds, classes and ground truth.
struct Setup<'a> {
    corpus: &'a [LabeledSequence],
    folds: Vec<(Vec<usize>, Vec<usize>)>,
    classes: Vec<String>,
    truth: HashMap<String, String>,
}

impl<'a> Setup<'a> {
    fn new(corpus: &'a [LabeledSequence], protocol: Protocol) -> Result<Self, EvalError> {
        if corpus.is_empty() {
            return Err(EvalError::Empty("corpus is empty".into()));
        }
        let folds = split_folds(corpus, protocol);
        if folds.is_empty() || folds.iter().all(|(_, te)| te.is_empty()) {
            return Err(EvalError::Empty(
                "protocol leaves no fold with both training and test samples".into(),
            ));
        }
        Ok(Self {
            corpus,
            folds,
            classes: class_list(corpus),
            truth: corpus
                .iter()
                .map(|s| (s.sample_id.clone(), s.label.clone()))
                .collect(),
        })
    }

    /// Test scores per plane for one view, rows stacked fold by fold.
    fn plane_scores(
        &self,
        angles: ViewAngles,
        params: &EncodingParams,
        cfg: &EvalConfig,
    ) -> Result<[ScoreMatrix; 3], EvalError> {
        let images = render_corpus(self.corpus, angles, params, &cfg.settings)?;
        let mut out = Vec::with_capacity(3);
        for p in 0..3 {
            let mut ids = Vec::new();
            let mut rows = Vec::new();
            for (train, test) in &self.folds {
                let tr: Vec<ImageSample> = train.iter().map(|&i| images[i][p].clone()).collect();
                let te: Vec<ImageSample> = test.iter().map(|&i| images[i][p].clone()).collect();
                let m = knn_scores(&tr, &te, &self.classes, &cfg.knn)?;
                for r in 0..m.rows() {
                    ids.push(m.sample_ids()[r].clone());
                    rows.push(m.row(r).to_vec());
                }
            }
            out.push(ScoreMatrix::new(ids, self.classes.clone(), rows)?);
        }
        Ok(out.try_into().expect("three planes"))
    }

    fn accuracy(&self, m: &ScoreMatrix) -> f64 {
        accuracy(m, |id| self.truth.get(id).cloned())
    }
}

/// Test-set scores of the three planes at one view, one row per test sample
/// (each fold's test samples in corpus order, folds in order).
pub fn score_planes(
    corpus: &[LabeledSequence],
    angles: ViewAngles,
    cfg: &EvalConfig,
) -> Result<[ScoreMatrix; 3], EvalError> {
    Setup::new(corpus, cfg.protocol)?.plane_scores(angles, &cfg.params, cfg)
}

/// One row of the encoding ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub level: EncodingLevel,
    pub front: f64,
    pub top: f64,
    pub side: f64,
    pub fused: f64,
}

impl AblationRow {
    pub fn max_plane(&self) -> f64 {
        self.front.max(self.top).max(self.side)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<AblationRow>,
}

impl ExperimentReport {
    pub fn row(&self, level: EncodingLevel) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.level == level)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,front,top,side,fusion\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.level.name(),
                r.front,
                r.top,
                r.side,
                r.fused
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<14} {:>7} {:>7} {:>7} {:>7}\n",
            "level", "front", "top", "side", "fusion"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<14} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                r.level.name(),
                r.front,
                r.top,
                r.side,
                r.fused
            );
        }
        s
    }
}

/// Per level: renders the three planes at the identity view, scores each
/// with the nearest-neighbour baseline and multiplies the three score sets.
pub fn run_ablation(
    corpus: &[LabeledSequence],
    levels: &[EncodingLevel],
    cfg: &EvalConfig,
) -> Result<ExperimentReport, EvalError> {
    let setup = Setup::new(corpus, cfg.protocol)?;
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let params = EncodingParams {
            level,
            ..cfg.params.clone()
        };
        let planes = setup.plane_scores(ViewAngles::IDENTITY, &params, cfg)?;
        let fused = multiply_fuse(&planes)?;
        rows.push(AblationRow {
            level,
            front: setup.accuracy(&planes[0]),
            top: setup.accuracy(&planes[1]),
            side: setup.accuracy(&planes[2]),
            fused: setup.accuracy(&fused),
        });
    }
    Ok(ExperimentReport { rows })
}

/// Plane accuracies and the fused accuracy of each fusion method.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionComparison {
    pub level: EncodingLevel,
    pub planes: [f64; 3],
    pub methods: Vec<(FusionMethod, f64)>,
}

impl FusionComparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,accuracy\n");
        for (p, a) in Plane::ALL.iter().zip(self.planes) {
            let _ = writeln!(s, "{},{a}", p.name());
        }
        for (m, a) in &self.methods {
            let _ = writeln!(s, "{},{a}", m.name());
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:<10} {:>8}\n", "method", "accuracy");
        for (p, a) in Plane::ALL.iter().zip(self.planes) {
            let _ = writeln!(s, "{:<10} {:>8.4}", p.name(), a);
        }
        for (m, a) in &self.methods {
            let _ = writeln!(s, "{:<10} {:>8.4}", m.name(), a);
        }
        s
    }
}

pub fn run_fusion_comparison(
    corpus: &[LabeledSequence],
    cfg: &EvalConfig,
) -> Result<FusionComparison, EvalError> {
    let setup = Setup::new(corpus, cfg.protocol)?;
    let planes = setup.plane_scores(ViewAngles::IDENTITY, &cfg.params, cfg)?;
    let methods = FusionMethod::ALL
        .iter()
        .map(|&m| Ok((m, setup.accuracy(&fuse(&planes, m)?))))
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(FusionComparison {
        level: cfg.params.level,
        planes: [0, 1, 2].map(|p| setup.accuracy(&planes[p])),
        methods,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewGridCell {
    pub angles: ViewAngles,
    pub front: f64,
    pub top: f64,
    pub side: f64,
    pub fused: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewGridReport {
    pub cells: Vec<ViewGridCell>,
    /// Accuracy of the product of every plane of every view.
    pub all_views_fused: f64,
}

impl ViewGridReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,psi,front,top,side,fusion\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_angle(c.angles.theta),
                fmt_angle(c.angles.psi),
                c.front,
                c.top,
                c.side,
                c.fused
            );
        }
        let _ = writeln!(s, "all,all,,,,{}", self.all_views_fused);
        s
    }

    /// Fused accuracy laid out with theta down and psi across.
    pub fn to_table(&self) -> String {
        let mut thetas: Vec<f64> = Vec::new();
        let mut psis: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !thetas.contains(&c.angles.theta) {
                thetas.push(c.angles.theta);
            }
            if !psis.contains(&c.angles.psi) {
                psis.push(c.angles.psi);
            }
        }
        let mut s = format!("{:>8}", "θ \\ ψ");
        for p in &psis {
            let _ = write!(s, " {:>7}", fmt_angle(*p));
        }
        s.push('\n');
        for t in &thetas {
            let _ = write!(s, "{:>8}", fmt_angle(*t));
            for p in &psis {
                match self
                    .cells
                    .iter()
                    .find(|c| c.angles.theta == *t && c.angles.psi == *p)
                {
                    Some(c) => {
                        let _ = write!(s, " {:>7.4}", c.fused);
                    }
                    None => {
                        let _ = write!(s, " {:>7}", "-");
                    }
                }
            }
            s.push('\n');
        }
        let _ = writeln!(s, "all views fused: {:.4}", self.all_views_fused);
        s
    }
}

/// Divides every row by its largest entry. Leaves argmax unchanged and
/// keeps long products away from underflow.
fn rescale_rows(m: &mut ScoreMatrix) {
    for r in 0..m.rows() {
        let max = m.row(r).iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            m.scale_row(r, 1.0 / max);
        }
    }
}

/// Fused three-plane accuracy per view, plus the product over all views.
pub fn run_viewgrid(
    corpus: &[LabeledSequence],
    grid: &ViewGrid,
    cfg: &EvalConfig,
) -> Result<ViewGridReport, EvalError> {
    let setup = Setup::new(corpus, cfg.protocol)?;
    let mut cells = Vec::with_capacity(grid.len());
    let mut running: Option<ScoreMatrix> = None;
    for &angles in grid.views() {
        let planes = setup.plane_scores(angles, &cfg.params, cfg)?;
        let fused = multiply_fuse(&planes)?;
        cells.push(ViewGridCell {
            angles,
            front: setup.accuracy(&planes[0]),
            top: setup.accuracy(&planes[1]),
            side: setup.accuracy(&planes[2]),
            fused: setup.accuracy(&fused),
        });
        let mut next = match running.take() {
            None => fused,
            Some(acc) => multiply_fuse(&[acc, fused])?,
        };
        rescale_rows(&mut next);
        running = Some(next);
    }
    let all = running.ok_or_else(|| EvalError::Empty("view grid is empty".into()))?;
    Ok(ViewGridReport {
        cells,
        all_views_fused: setup.accuracy(&all),
    })
}
