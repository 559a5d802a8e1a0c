use std::fs;
use std::path::Path;

use jtm_core::encoding::{ColorMapKind, PartColormaps};
use jtm_core::evalkit::{
    direction_magnitude_specs, encode_sample, export_dataset, generate_synthetic, read_corpus,
    run_ablation, run_fusion_comparison, run_viewgrid, score_planes, standard_specs, write_corpus,
    write_manifest, EvalConfig, KnnConfig, LabeledSequence, Protocol, SplitRule,
    SyntheticClassSpec, MANIFEST_FILE,
};
use jtm_core::fsutil::write_atomic;
use jtm_core::fusion::{fuse as fuse_scores, predict, FusionError};
use jtm_core::geometry::symmetric;
use jtm_core::skeleton_io::parse_sequence;
use jtm_core::{
    ColorMap, EncodingLevel, EncodingParams, FusionMethod, JointPartition, Plane, RenderSettings,
    ScoreMatrix, SequenceFormat, ViewAngles, ViewGrid,
};

use crate::config::ConfigFile;
use crate::{
    AblateArgs, CliError, ColormapArgs, CorpusOpts, DatasetArgs, EncodeArgs, EvalArgs, EvalOpts,
    FuseArgs, RenderOpts, SynthArgs, ViewgridArgs,
};

const DEFAULT_SEED: u64 = 2024;
const DEFAULT_PER_CLASS: usize = 30;
const EVAL_SIZE: u32 = 64;

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn parse_with<T>(
    what: &str,
    value: &str,
    f: impl FnOnce(&str) -> Option<T>,
) -> Result<T, CliError> {
    f(value).ok_or_else(|| CliError::usage(format!("invalid {what} {value:?}")))
}

fn base_colormap(spec: &str) -> Result<ColorMap, CliError> {
    let kind = match spec.to_ascii_lowercase().replace('-', "_").as_str() {
        "jet" => Some(ColorMapKind::Jet),
        "jet_reversed" => Some(ColorMapKind::JetReversed),
        "grayscale" | "gray" => Some(ColorMapKind::Grayscale),
        _ => None,
    };
    if let Some(map) = kind.and_then(ColorMap::by_kind) {
        return Ok(map);
    }
    let text = fs::read_to_string(spec).map_err(|e| {
        CliError::usage(format!(
            "colormap {spec:?} is neither a known name nor a readable file: {e}"
        ))
    })?;
    ColorMap::from_csv(&text).map_err(|e| CliError::data(format!("{spec}: {e}")))
}

pub fn encoding_params(cfg: &ConfigFile, o: &RenderOpts) -> Result<EncodingParams, CliError> {
    let d = EncodingParams::default();
    let level = match cfg.opt::<String>("level", o.level.clone())? {
        Some(l) => l
            .parse::<EncodingLevel>()
            .map_err(|e| CliError::usage(e.to_string()))?,
        None => d.level,
    };
    let colormaps = match cfg.opt::<String>("colormap", o.colormap.clone())? {
        Some(spec) => PartColormaps::from_base(base_colormap(&spec)?),
        None => d.colormaps.clone(),
    };
    let partition = match cfg.opt::<String>(
        "partition",
        o.partition.as_ref().map(|p| p.display().to_string()),
    )? {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("cannot read partition {path}: {e}")))?;
            JointPartition::parse(&text).map_err(|e| CliError::data(format!("{path}: {e}")))?
        }
        None => d.partition.clone(),
    };
    let params = EncodingParams {
        s_min: cfg.get("s_min", o.s_min, d.s_min)?,
        s_max: cfg.get("s_max", o.s_max, d.s_max)?,
        b_min: cfg.get("b_min", o.b_min, d.b_min)?,
        b_max: cfg.get("b_max", o.b_max, d.b_max)?,
        level,
        partition,
        colormaps,
    };
    params
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(params)
}

pub fn render_settings(
    cfg: &ConfigFile,
    o: &RenderOpts,
    default_size: u32,
) -> Result<RenderSettings, CliError> {
    let d = RenderSettings::default();
    let size = cfg.get("size", o.size, default_size)?;
    let s = RenderSettings {
        width: cfg.get("width", o.width, size)?,
        height: cfg.get("height", o.height, size)?,
        thickness: cfg.get("thickness", o.thickness, d.thickness)?,
        margin: cfg.get("margin", o.margin, d.margin)?,
        background: d.background,
    };
    s.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(s)
}

fn planes(spec: &str) -> Result<Vec<Plane>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(Plane::ALL.to_vec());
    }
    spec.split(',')
        .map(|p| p.trim().parse::<Plane>().map_err(CliError::usage))
        .collect()
}

fn named_grid(name: &str) -> Result<ViewGrid, CliError> {
    parse_with("view grid", name, |n| {
        match n.to_ascii_lowercase().as_str() {
            "identity" | "none" => Some(ViewGrid::identity()),
            "default" => Some(ViewGrid::augmentation_default()),
            "study" => Some(ViewGrid::orthogonal_study()),
            _ => None,
        }
    })
}

fn eval_config(cfg: &ConfigFile, r: &RenderOpts, e: &EvalOpts) -> Result<EvalConfig, CliError> {
    let d = KnnConfig::default();
    let protocol = match cfg.opt::<String>("protocol", e.protocol.clone())? {
        Some(p) => p.parse::<Protocol>().map_err(CliError::usage)?,
        None => Protocol::default(),
    };
    Ok(EvalConfig {
        params: encoding_params(cfg, r)?,
        settings: render_settings(cfg, r, EVAL_SIZE)?,
        knn: KnnConfig {
            k: cfg.get("k", e.k, d.k)?,
            temperature: cfg.get("temperature", e.temperature, d.temperature)?,
            metric: d.metric,
        },
        protocol,
    })
}

fn synthetic_specs(set: &str, jitter: Option<f64>) -> Result<Vec<SyntheticClassSpec>, CliError> {
    let mut specs = parse_with("synthetic set", set, |s| match s {
        "standard" => Some(standard_specs()),
        "direction-magnitude" | "direction_magnitude" => Some(direction_magnitude_specs()),
        _ => None,
    })?;
    if let Some(j) = jitter {
        if !(j >= 0.0 && j.is_finite()) {
            return Err(CliError::usage(format!("jitter must be >= 0, got {j}")));
        }
        for s in &mut specs {
            s.jitter = j;
        }
    }
    Ok(specs)
}

fn load_corpus(cfg: &ConfigFile, o: &CorpusOpts) -> Result<Vec<LabeledSequence>, CliError> {
    if let Some(dir) = &o.corpus {
        return read_corpus(dir).map_err(CliError::data);
    }
    let set = cfg.get("set", o.set.clone(), "standard".to_string())?;
    let specs = synthetic_specs(&set, cfg.opt("jitter", o.jitter)?)?;
    let per_class = cfg.get("per_class", o.per_class, DEFAULT_PER_CLASS)?;
    if per_class == 0 {
        return Err(CliError::usage("per_class must be at least 1"));
    }
    Ok(generate_synthetic(
        &specs,
        per_class,
        cfg.get("seed", o.seed, DEFAULT_SEED)?,
    ))
}

fn read_input(path: &Path, joints: usize) -> Result<LabeledSequence, CliError> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::usage(format!("{} has no file name", path.display())))?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => SequenceFormat::CanonicalJson,
        _ => SequenceFormat::PlainXyz {
            joint_count: joints,
        },
    };
    let file =
        fs::File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let sequence = parse_sequence(file, format, &stem)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(LabeledSequence {
        sample_id: stem,
        label: String::new(),
        subject: 0,
        sequence,
    })
}

pub fn encode(cfg: &ConfigFile, a: EncodeArgs) -> Result<(), CliError> {
    let params = encoding_params(cfg, &a.render)?;
    let settings = render_settings(cfg, &a.render, RenderSettings::default().width)?;
    let planes = planes(&cfg.get("plane", a.plane, "all".to_string())?)?;
    let theta = cfg.opt("theta", a.theta)?;
    let psi = cfg.opt("psi", a.psi)?;
    let grid = if theta.is_some() || psi.is_some() {
        ViewGrid::new(vec![ViewAngles::new(
            theta.unwrap_or(0.0),
            psi.unwrap_or(0.0),
        )])
        .map_err(|e| CliError::usage(e.to_string()))?
    } else {
        named_grid(&cfg.get("views", a.views, "identity".to_string())?)?
    };
    let joints = a.joints.unwrap_or(20);
    let label = a.label.unwrap_or_else(|| "unknown".to_string());
    let mut entries = Vec::new();
    for input in &a.inputs {
        let mut sample = read_input(input, joints)?;
        sample.label = label.clone();
        entries.extend(
            encode_sample(&sample, &grid, &planes, &params, &settings, &a.out)
                .map_err(CliError::data)?,
        );
    }
    write_manifest(&a.out.join(MANIFEST_FILE), &entries).map_err(CliError::data)?;
    println!("wrote {} images to {}", entries.len(), a.out.display());
    Ok(())
}

pub fn dataset(cfg: &ConfigFile, a: DatasetArgs) -> Result<(), CliError> {
    let params = encoding_params(cfg, &a.render)?;
    let settings = render_settings(cfg, &a.render, RenderSettings::default().width)?;
    let planes = planes(&cfg.get("plane", a.plane, "all".to_string())?)?;
    let grid = named_grid(&cfg.get("views", a.views, "identity".to_string())?)?;
    let rule = match cfg.get("split", a.split, "parity".to_string())?.as_str() {
        "parity" => SplitRule::Parity,
        "" => return Err(CliError::usage("split name must not be empty")),
        name => SplitRule::All(name.to_string()),
    };
    let corpus = read_corpus(&a.corpus).map_err(CliError::data)?;
    let staging = tempfile::tempdir().map_err(CliError::data)?;
    let mut entries = Vec::new();
    for sample in &corpus {
        entries.extend(
            encode_sample(sample, &grid, &planes, &params, &settings, staging.path())
                .map_err(CliError::data)?,
        );
    }
    let summary =
        export_dataset(&entries, staging.path(), &a.out, &rule).map_err(CliError::data)?;
    for (split, n) in &summary.per_split {
        println!("{split}: {n}");
    }
    println!("total: {}", summary.total);
    Ok(())
}

fn fusion_error(e: FusionError) -> CliError {
    match e {
        FusionError::IdMismatch(m) => CliError::usage(format!("ID_MISMATCH: {m}")),
        FusionError::ShapeMismatch(m) => CliError::usage(format!("SHAPE_MISMATCH: {m}")),
        other => CliError::data(other),
    }
}

pub fn fuse(cfg: &ConfigFile, a: FuseArgs) -> Result<(), CliError> {
    let method = cfg
        .get("method", a.method, "multiply".to_string())?
        .parse::<FusionMethod>()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut matrices = Vec::with_capacity(a.inputs.len());
    for p in &a.inputs {
        let file =
            fs::File::open(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        matrices.push(
            ScoreMatrix::read_csv(file)
                .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?,
        );
    }
    let fused = fuse_scores(&matrices, method).map_err(fusion_error)?;
    let text = fused.to_csv_string();
    match &a.out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.predictions {
        let mut out = String::from("sample_id,predicted\n");
        for (id, label) in predict(&fused) {
            out.push_str(&format!("{id},{label}\n"));
        }
        write_text(p, &out)?;
    }
    Ok(())
}

pub fn eval(cfg: &ConfigFile, a: EvalArgs) -> Result<(), CliError> {
    let ecfg = eval_config(cfg, &a.render, &a.eval)?;
    let corpus = load_corpus(cfg, &a.corpus)?;
    let report = run_fusion_comparison(&corpus, &ecfg).map_err(CliError::data)?;
    if let Some(dir) = &a.scores {
        let planes = score_planes(&corpus, ViewAngles::IDENTITY, &ecfg).map_err(CliError::data)?;
        for (plane, m) in Plane::ALL.iter().zip(&planes) {
            write_text(
                &dir.join(format!("{}.csv", plane.name())),
                &m.to_csv_string(),
            )?;
        }
    }
    if let Some(p) = &a.out {
        write_text(p, &report.to_csv())?;
    }
    print!("{}", report.to_table());
    Ok(())
}

pub fn ablate(cfg: &ConfigFile, a: AblateArgs) -> Result<(), CliError> {
    let ecfg = eval_config(cfg, &a.render, &a.eval)?;
    let levels = match a.levels {
        Some(list) => list
            .split(',')
            .map(|l| {
                l.parse::<EncodingLevel>()
                    .map_err(|e| CliError::usage(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => EncodingLevel::ALL.to_vec(),
    };
    let corpus = load_corpus(cfg, &a.corpus)?;
    let report = run_ablation(&corpus, &levels, &ecfg).map_err(CliError::data)?;
    if let Some(p) = &a.out {
        write_text(p, &report.to_csv())?;
    }
    print!("{}", report.to_table());
    Ok(())
}

pub fn viewgrid(cfg: &ConfigFile, a: ViewgridArgs) -> Result<(), CliError> {
    let ecfg = eval_config(cfg, &a.render, &a.eval)?;
    let grid = match cfg.opt::<String>("views", a.views)? {
        Some(name) => named_grid(&name)?,
        None => symmetric(
            cfg.get("range", a.range, 45.0)?,
            cfg.get("step", a.step, 22.5)?,
        )
        .map_err(|e| CliError::usage(e.to_string()))?,
    };
    let corpus = load_corpus(cfg, &a.corpus)?;
    let report = run_viewgrid(&corpus, &grid, &ecfg).map_err(CliError::data)?;
    if let Some(p) = &a.out {
        write_text(p, &report.to_csv())?;
    }
    print!("{}", report.to_table());
    Ok(())
}

pub fn synth(cfg: &ConfigFile, a: SynthArgs) -> Result<(), CliError> {
    let opts = CorpusOpts {
        corpus: None,
        set: a.set,
        per_class: a.per_class,
        seed: a.seed,
        jitter: a.jitter,
    };
    let corpus = load_corpus(cfg, &opts)?;
    write_corpus(&a.out, &corpus).map_err(CliError::data)?;
    println!("wrote {} sequences to {}", corpus.len(), a.out.display());
    Ok(())
}

pub fn colormap(_cfg: &ConfigFile, a: ColormapArgs) -> Result<(), CliError> {
    let name = a.name.unwrap_or_else(|| "jet".to_string());
    let map = parse_with("colormap", &name, |n| {
        match n.to_ascii_lowercase().replace('-', "_").as_str() {
            "jet" => Some(ColorMap::jet()),
            "jet_reversed" => Some(ColorMap::jet_reversed()),
            "grayscale" | "gray" => Some(ColorMap::grayscale()),
            _ => None,
        }
    })?;
    match &a.out {
        Some(p) => write_text(p, &map.to_csv()),
        None => {
            print!("{}", map.to_csv());
            Ok(())
        }
    }
}
