//! Trajectory colouring.
//!
//! Each segment gets a colour from a 256-entry colormap indexed by its
//! temporal position, the colormap being chosen by the body part of the
//! joint. The speed of the joint then overrides the HSV saturation and/or
//! value channel of that colour, depending on the [`EncodingLevel`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton_io::{BodyPart, JointPartition};

pub const COLORMAP_LEN: usize = 256;

/// Linear RGB colour with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn channels(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn in_unit_range(&self) -> bool {
        self.channels().iter().all(|c| (0.0..=1.0).contains(c))
    }

    /// 8-bit channels, rounding half up.
    pub fn to_rgb8(&self) -> [u8; 3] {
        self.channels()
            .map(|c| (c.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8)
    }
}

/// Hue in `[0, 6)` sextants, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn rgb_to_hsv(c: Rgb) -> Hsv {
    let max = c.r.max(c.g).max(c.b);
    let min = c.r.min(c.g).min(c.b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == c.r {
        ((c.g - c.b) / delta).rem_euclid(6.0)
    } else if max == c.g {
        (c.b - c.r) / delta + 2.0
    } else {
        (c.r - c.g) / delta + 4.0
    };
    Hsv { h, s, v: max }
}

pub fn hsv_to_rgb(hsv: Hsv) -> Rgb {
    let Hsv { h, s, v } = hsv;
    let sector = h.floor();
    let f = h - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match (sector as i64).rem_euclid(6) {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    Rgb::new(r, g, b)
}

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("value {value} outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error("frame step {q} outside 1..={max} (n = {n})")]
    StepOutOfRange { q: usize, n: usize, max: usize },
    #[error("colormap needs exactly {COLORMAP_LEN} entries in [0, 1]: {0}")]
    BadColormap(String),
    #[error("invalid encoding parameters: {0}")]
    BadParams(String),
    #[error("unknown encoding level {0:?}")]
    UnknownLevel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMapKind {
    Jet,
    JetReversed,
    Grayscale,
    Custom,
}

/// A 256-entry lookup table sampled uniformly on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    kind: ColorMapKind,
    entries: Vec<Rgb>,
}

/// Piecewise-linear jet: blue, cyan, yellow, red, each channel a clamped tent.
pub fn jet(x: f64) -> Rgb {
    let tent = |center: f64| (1.5 - (4.0 * x - center).abs()).clamp(0.0, 1.0);
    Rgb::new(tent(3.0), tent(2.0), tent(1.0))
}

/// Lightest grey at the start of the grayscale map.
pub const GRAYSCALE_START: f64 = 0.8;

impl ColorMap {
    pub fn jet() -> Self {
        Self {
            kind: ColorMapKind::Jet,
            entries: table(jet),
        }
    }

    pub fn jet_reversed() -> Self {
        Self::jet().reversed()
    }

    /// Light grey (0.8) down to black.
    pub fn grayscale() -> Self {
        Self {
            kind: ColorMapKind::Grayscale,
            entries: table(|x| Rgb::gray(GRAYSCALE_START * (1.0 - x))),
        }
    }

    pub fn custom(entries: Vec<Rgb>) -> Result<Self, EncodingError> {
        if entries.len() != COLORMAP_LEN {
            return Err(EncodingError::BadColormap(format!(
                "got {} entries",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|c| !c.in_unit_range()) {
            return Err(EncodingError::BadColormap(format!(
                "entry {i} out of range"
            )));
        }
        Ok(Self {
            kind: ColorMapKind::Custom,
            entries,
        })
    }

    pub fn by_kind(kind: ColorMapKind) -> Option<Self> {
        match kind {
            ColorMapKind::Jet => Some(Self::jet()),
            ColorMapKind::JetReversed => Some(Self::jet_reversed()),
            ColorMapKind::Grayscale => Some(Self::grayscale()),
            ColorMapKind::Custom => None,
        }
    }

    /// Same entries in reverse order. Jet reverses to `JetReversed` and back.
    pub fn reversed(&self) -> Self {
        let kind = match self.kind {
            ColorMapKind::Jet => ColorMapKind::JetReversed,
            ColorMapKind::JetReversed => ColorMapKind::Jet,
            _ => ColorMapKind::Custom,
        };
        let mut entries = self.entries.clone();
        entries.reverse();
        Self { kind, entries }
    }

    pub fn kind(&self) -> ColorMapKind {
        self.kind
    }

    pub fn entries(&self) -> &[Rgb] {
        &self.entries
    }

    /// Index selected for position `l`: `round(l * 255)`.
    pub fn index_of(l: f64) -> Result<usize, EncodingError> {
        if !(0.0..=1.0).contains(&l) {
            return Err(EncodingError::OutOfRange { value: l });
        }
        Ok((l * (COLORMAP_LEN - 1) as f64).round() as usize)
    }

    pub fn sample(&self, l: f64) -> Result<Rgb, EncodingError> {
        Ok(self.entries[Self::index_of(l)?])
    }

    /// `r,g,b` header followed by 256 rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,g,b\n");
        for c in &self.entries {
            out.push_str(&format!("{:?},{:?},{:?}\n", c.r, c.g, c.b));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, EncodingError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "r,g,b" => {}
            other => {
                return Err(EncodingError::BadColormap(format!(
                    "expected header `r,g,b`, got {other:?}"
                )))
            }
        }
        let entries = lines
            .enumerate()
            .map(|(i, line)| {
                let vals: Vec<f64> = line
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| EncodingError::BadColormap(format!("row {i}: {e}")))?;
                match vals[..] {
                    [r, g, b] => Ok(Rgb::new(r, g, b)),
                    _ => Err(EncodingError::BadColormap(format!(
                        "row {i} has {} values",
                        vals.len()
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::custom(entries)
    }
}

fn table(f: impl Fn(f64) -> Rgb) -> Vec<Rgb> {
    (0..COLORMAP_LEN)
        .map(|i| f(i as f64 / (COLORMAP_LEN - 1) as f64))
        .collect()
}

/// Colormaps for the left, right and middle body parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PartColormaps {
    pub left: ColorMap,
    pub right: ColorMap,
    pub middle: ColorMap,
}

impl PartColormaps {
    /// `base` for the left side, its reverse for the right, grayscale middle.
    pub fn from_base(base: ColorMap) -> Self {
        Self {
            right: base.reversed(),
            left: base,
            middle: ColorMap::grayscale(),
        }
    }

    pub fn for_part(&self, part: BodyPart) -> &ColorMap {
        match part {
            BodyPart::Left => &self.left,
            BodyPart::Right => &self.right,
            BodyPart::Middle => &self.middle,
        }
    }
}

impl Default for PartColormaps {
    fn default() -> Self {
        Self::from_base(ColorMap::jet())
    }
}

/// Cumulative encoding stages, one per ablation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingLevel {
    /// Plain black trajectories.
    Raw,
    /// Temporal position coloured with the base colormap.
    Hue,
    /// One colormap per body part.
    HueParts,
    /// Parts plus speed in saturation.
    HuePartsSat,
    /// Parts plus speed in brightness.
    HuePartsBri,
    /// Parts plus speed in saturation and brightness.
    Full,
}

impl EncodingLevel {
    pub const ALL: [EncodingLevel; 6] = [
        EncodingLevel::Raw,
        EncodingLevel::Hue,
        EncodingLevel::HueParts,
        EncodingLevel::HuePartsSat,
        EncodingLevel::HuePartsBri,
        EncodingLevel::Full,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EncodingLevel::Raw => "raw",
            EncodingLevel::Hue => "hue",
            EncodingLevel::HueParts => "hue_parts",
            EncodingLevel::HuePartsSat => "hue_parts_sat",
            EncodingLevel::HuePartsBri => "hue_parts_bri",
            EncodingLevel::Full => "full",
        }
    }

    pub fn uses_parts(&self) -> bool {
        *self >= EncodingLevel::HueParts
    }

    pub fn modulates_saturation(&self) -> bool {
        matches!(self, EncodingLevel::HuePartsSat | EncodingLevel::Full)
    }

    pub fn modulates_brightness(&self) -> bool {
        matches!(self, EncodingLevel::HuePartsBri | EncodingLevel::Full)
    }
}

impl fmt::Display for EncodingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingLevel {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        EncodingLevel::ALL
            .into_iter()
            .find(|l| l.name() == norm)
            .ok_or_else(|| EncodingError::UnknownLevel(s.to_string()))
    }
}

/// Colour used for every segment at [`EncodingLevel::Raw`].
pub const RAW_INK: Rgb = Rgb::BLACK;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingParams {
    pub s_min: f64,
    pub s_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub level: EncodingLevel,
    pub partition: JointPartition,
    pub colormaps: PartColormaps,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self {
            s_min: 0.0,
            s_max: 1.0,
            b_min: 0.0,
            b_max: 1.0,
            level: EncodingLevel::Full,
            partition: JointPartition::kinect_v1(),
            colormaps: PartColormaps::default(),
        }
    }
}

impl EncodingParams {
    pub fn with_level(level: EncodingLevel) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        let ordered = |lo: f64, hi: f64| 0.0 <= lo && lo <= hi && hi <= 1.0;
        if !ordered(self.s_min, self.s_max) {
            return Err(EncodingError::BadParams(format!(
                "need 0 <= s_min <= s_max <= 1, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if !ordered(self.b_min, self.b_max) {
            return Err(EncodingError::BadParams(format!(
                "need 0 <= b_min <= b_max <= 1, got [{}, {}]",
                self.b_min, self.b_max
            )));
        }
        Ok(())
    }
}

/// Temporal position of frame step `q` (1-based) in a sequence of `n`
/// frames: `q / (n - 1)`.
pub fn hue_position(q: usize, n: usize) -> Result<f64, EncodingError> {
    if n < 2 || q == 0 || q > n - 1 {
        return Err(EncodingError::StepOutOfRange {
            q,
            n,
            max: n.saturating_sub(1),
        });
    }
    Ok(q as f64 / (n - 1) as f64)
}

/// `v / v_max`, defined as 0 for a static sequence.
fn speed_ratio(v: f64, v_max: f64) -> f64 {
    if v_max > 0.0 {
        (v / v_max).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// `lo + r (hi - lo)` written so that `r = 0` and `r = 1` give `lo` and `hi`
/// exactly.
fn lerp(r: f64, lo: f64, hi: f64) -> f64 {
    (1.0 - r) * lo + r * hi
}

/// Speed mapped linearly onto `[s_min, s_max]`.
pub fn saturation(v: f64, v_max: f64, params: &EncodingParams) -> f64 {
    lerp(speed_ratio(v, v_max), params.s_min, params.s_max)
}

/// Speed mapped linearly onto `[b_min, b_max]`.
pub fn brightness(v: f64, v_max: f64, params: &EncodingParams) -> f64 {
    lerp(speed_ratio(v, v_max), params.b_min, params.b_max)
}

/// Final colour of the segment of joint `joint` at frame step `q` (1-based)
/// with speed `v`.
pub fn colorize_segment(
    q: usize,
    joint: usize,
    v: f64,
    v_max: f64,
    n: usize,
    params: &EncodingParams,
) -> Result<Rgb, EncodingError> {
    let l = hue_position(q, n)?;
    let level = params.level;
    let base = match level {
        EncodingLevel::Raw => return Ok(RAW_INK),
        EncodingLevel::Hue => params.colormaps.left.sample(l)?,
        _ => {
            let part = params.partition.part_of(joint).ok_or_else(|| {
                EncodingError::BadParams(format!("joint {joint} missing from partition"))
            })?;
            params.colormaps.for_part(part).sample(l)?
        }
    };
    if !(level.modulates_saturation() || level.modulates_brightness()) {
        return Ok(base);
    }
    let original = rgb_to_hsv(base);
    let mut hsv = original;
    // Hue is undefined for greys, so saturation is left alone there.
    if level.modulates_saturation() && hsv.s > 0.0 {
        hsv.s = saturation(v, v_max, params);
    }
    if level.modulates_brightness() {
        hsv.v = brightness(v, v_max, params);
    }
    if hsv == original {
        return Ok(base);
    }
    Ok(hsv_to_rgb(hsv))
}
