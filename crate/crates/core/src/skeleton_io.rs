//! Skeleton sequence data model, text formats and validation.
//!
//! Two interchange formats are supported:
//!
//! * **Canonical JSON-lines.** The first line is a header object, every
//!   following line holds one frame:
//!
//!   ```text
//!   {"format":"jtm-skeleton","version":1,"source_id":"s01","joint_count":2,"joint_names":["a","b"]}
//!   {"frame":0,"joints":[[0.0,1.0,2.0],[0.5,1.5,2.5]]}
//!   {"frame":1,"joints":[[0.0,1.1,2.0],[0.5,1.6,2.5]]}
//!   ```
//!
//!   `joint_names` may be omitted. Coordinates are written with the shortest
//!   decimal form that parses back to the same `f64`, so a write/parse cycle
//!   is bit-exact. A missing (occluded) coordinate is written as `null` and
//!   reads back as NaN.
//!
//! * **Plain XYZ.** One line per frame holding `3 * m` whitespace-separated
//!   numbers (`x y z` per joint). The joint count is supplied by the caller.
//!   Blank lines and lines starting with `#` are skipped unless `m == 0`, in
//!   which case every line is an (empty) frame.

use std::fmt;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const FORMAT_TAG: &str = "jtm-skeleton";
const FORMAT_VERSION: u32 = 1;

/// A 3D joint position in camera coordinates (meters; x right, y up, z depth).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn sub(self, other: Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn add(self, other: Point3) -> Point3 {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// One skeleton: the joint positions of a single frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub joints: Vec<Point3>,
}

impl Frame {
    pub fn new(joints: Vec<Point3>) -> Self {
        Self { joints }
    }
}

/// An action sample: `n` frames of `m` joints each.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    frames: Vec<Frame>,
    joint_count: usize,
    joint_names: Option<Vec<String>>,
    source_id: String,
}

/// Interchange format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    CanonicalJson,
    /// Whitespace-separated triples with the joint count given out of band.
    PlainXyz {
        joint_count: usize,
    },
}

/// A single invariant violation reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The sequence has no frames.
    Empty,
    /// Frame `frame` has `found` joints instead of the declared `expected`.
    Shape {
        frame: usize,
        expected: usize,
        found: usize,
    },
    /// A NaN or infinite coordinate.
    NonFinite { frame: usize, joint: usize },
    /// The joint name list does not have one label per joint.
    JointNames { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "sequence has no frames"),
            Violation::Shape {
                frame,
                expected,
                found,
            } => write!(f, "frame {frame} has {found} joints, expected {expected}"),
            Violation::NonFinite { frame, joint } => {
                write!(f, "non-finite coordinate at frame {frame}, joint {joint}")
            }
            Violation::JointNames { expected, found } => {
                write!(f, "{found} joint names given for {expected} joints")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("shape error: {0}")]
    Shape(Violation),
    #[error("non-finite coordinate at frame {frame}, joint {joint}")]
    NonFinite { frame: usize, joint: usize },
    #[error("invalid sequence: {0}")]
    Invalid(Violation),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SkeletonError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        SkeletonError::Syntax {
            line,
            message: message.into(),
        }
    }

    fn from_violation(v: Violation) -> Self {
        match v {
            Violation::Shape { .. } => SkeletonError::Shape(v),
            Violation::NonFinite { frame, joint } => SkeletonError::NonFinite { frame, joint },
            other => SkeletonError::Invalid(other),
        }
    }
}

impl SkeletonSequence {
    /// Builds a validated sequence; the first violation becomes the error.
    pub fn new(
        frames: Vec<Frame>,
        joint_count: usize,
        joint_names: Option<Vec<String>>,
        source_id: impl Into<String>,
    ) -> Result<Self, SkeletonError> {
        let seq = Self::new_unchecked(frames, joint_count, joint_names, source_id);
        match validate(&seq).into_iter().next() {
            Some(v) => Err(SkeletonError::from_violation(v)),
            None => Ok(seq),
        }
    }

    /// Builds a sequence without validation. Use [`validate`] or
    /// [`SkeletonSequence::into_validated`] before handing it to the encoders.
    pub fn new_unchecked(
        frames: Vec<Frame>,
        joint_count: usize,
        joint_names: Option<Vec<String>>,
        source_id: impl Into<String>,
    ) -> Self {
        Self {
            frames,
            joint_count,
            joint_names,
            source_id: source_id.into(),
        }
    }

    /// Convenience constructor from nested coordinate arrays, joint count
    /// taken from the first frame.
    pub fn from_points(
        frames: Vec<Vec<Point3>>,
        source_id: impl Into<String>,
    ) -> Result<Self, SkeletonError> {
        let m = frames.first().map_or(0, Vec::len);
        Self::new(
            frames.into_iter().map(Frame::new).collect(),
            m,
            None,
            source_id,
        )
    }

    pub fn into_validated(self) -> Result<Self, SkeletonError> {
        match validate(&self).into_iter().next() {
            Some(v) => Err(SkeletonError::from_violation(v)),
            None => Ok(self),
        }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    pub fn joint_names(&self) -> Option<&[String]> {
        self.joint_names.as_deref()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn joint(&self, frame: usize, joint: usize) -> Point3 {
        self.frames[frame].joints[joint]
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    /// Applies `f` to every joint position, keeping shape and metadata.
    pub fn map_points(&self, mut f: impl FnMut(Point3) -> Point3) -> Self {
        let frames = self
            .frames
            .iter()
            .map(|fr| Frame::new(fr.joints.iter().map(|&p| f(p)).collect()))
            .collect();
        Self {
            frames,
            joint_count: self.joint_count,
            joint_names: self.joint_names.clone(),
            source_id: self.source_id.clone(),
        }
    }

    /// The same sequence with frame order reversed.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.frames.reverse();
        out
    }

    /// Adds a constant offset to every joint of every frame.
    pub fn translated(&self, offset: Point3) -> Self {
        self.map_points(|p| p.add(offset))
    }
}

/// Returns every invariant violation of `seq`; empty means valid.
pub fn validate(seq: &SkeletonSequence) -> Vec<Violation> {
    let mut out = Vec::new();
    if seq.frames.is_empty() {
        out.push(Violation::Empty);
    }
    if let Some(names) = &seq.joint_names {
        if names.len() != seq.joint_count {
            out.push(Violation::JointNames {
                expected: seq.joint_count,
                found: names.len(),
            });
        }
    }
    for (i, frame) in seq.frames.iter().enumerate() {
        if frame.joints.len() != seq.joint_count {
            out.push(Violation::Shape {
                frame: i,
                expected: seq.joint_count,
                found: frame.joints.len(),
            });
        }
        for (j, p) in frame.joints.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::NonFinite { frame: i, joint: j });
            }
        }
    }
    out
}

/// Fills non-finite joint positions by linear interpolation over time,
/// per joint. Leading/trailing gaps copy the nearest valid frame. Joints
/// with no valid frame at all are left untouched. Returns the number of
/// repaired positions.
pub fn repair_missing(seq: &mut SkeletonSequence) -> usize {
    let n = seq.frames.len();
    let mut repaired = 0;
    for j in 0..seq.joint_count {
        let valid: Vec<usize> = (0..n)
            .filter(|&i| seq.frames[i].joints.get(j).is_some_and(|p| p.is_finite()))
            .collect();
        if valid.is_empty() {
            continue;
        }
        for i in 0..n {
            let Some(p) = seq.frames[i].joints.get(j) else {
                continue;
            };
            if p.is_finite() {
                continue;
            }
            let next = valid.partition_point(|&v| v < i);
            let fill = match (next.checked_sub(1).map(|k| valid[k]), valid.get(next)) {
                (Some(a), Some(&b)) => {
                    let t = (i - a) as f64 / (b - a) as f64;
                    let pa = seq.frames[a].joints[j];
                    let pb = seq.frames[b].joints[j];
                    Point3::new(
                        pa.x + (pb.x - pa.x) * t,
                        pa.y + (pb.y - pa.y) * t,
                        pa.z + (pb.z - pa.z) * t,
                    )
                }
                (Some(a), None) => seq.frames[a].joints[j],
                (None, Some(&b)) => seq.frames[b].joints[j],
                (None, None) => unreachable!(),
            };
            seq.frames[i].joints[j] = fill;
            repaired += 1;
        }
    }
    repaired
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    #[serde(default)]
    source_id: String,
    joint_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint_names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame: usize,
    joints: Vec<[Option<f64>; 3]>,
}

/// Parses without validating. Missing coordinates become NaN.
pub fn parse_unvalidated(
    input: impl Read,
    format: SequenceFormat,
    source_id: &str,
) -> Result<SkeletonSequence, SkeletonError> {
    match format {
        SequenceFormat::CanonicalJson => parse_canonical(input, source_id),
        SequenceFormat::PlainXyz { joint_count } => parse_plain(input, joint_count, source_id),
    }
}

/// Parses and validates a sequence. `source_id` is used when the format
/// carries none (plain XYZ, or a canonical header without one).
pub fn parse_sequence(
    input: impl Read,
    format: SequenceFormat,
    source_id: &str,
) -> Result<SkeletonSequence, SkeletonError> {
    parse_unvalidated(input, format, source_id)?.into_validated()
}

fn parse_canonical(input: impl Read, fallback_id: &str) -> Result<SkeletonSequence, SkeletonError> {
    let reader = BufReader::new(input);
    let mut header: Option<Header> = None;
    let mut frames = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match &header {
            None => {
                let h: Header = serde_json::from_str(&line)
                    .map_err(|e| SkeletonError::syntax(lineno, format!("bad header: {e}")))?;
                if h.format != FORMAT_TAG {
                    return Err(SkeletonError::syntax(
                        lineno,
                        format!("unknown format tag {:?}", h.format),
                    ));
                }
                if h.version != FORMAT_VERSION {
                    return Err(SkeletonError::syntax(
                        lineno,
                        format!("unsupported version {}", h.version),
                    ));
                }
                header = Some(h);
            }
            Some(_) => {
                let rec: FrameRecord = serde_json::from_str(&line)
                    .map_err(|e| SkeletonError::syntax(lineno, format!("bad frame: {e}")))?;
                if rec.frame != frames.len() {
                    return Err(SkeletonError::syntax(
                        lineno,
                        format!(
                            "frame index {} out of order, expected {}",
                            rec.frame,
                            frames.len()
                        ),
                    ));
                }
                let joints = rec
                    .joints
                    .iter()
                    .map(|c| {
                        Point3::new(
                            c[0].unwrap_or(f64::NAN),
                            c[1].unwrap_or(f64::NAN),
                            c[2].unwrap_or(f64::NAN),
                        )
                    })
                    .collect();
                frames.push(Frame::new(joints));
            }
        }
    }
    let header = header.ok_or_else(|| SkeletonError::syntax(1, "missing header"))?;
    let source_id = if header.source_id.is_empty() {
        fallback_id.to_string()
    } else {
        header.source_id
    };
    Ok(SkeletonSequence::new_unchecked(
        frames,
        header.joint_count,
        header.joint_names,
        source_id,
    ))
}

fn parse_plain(
    input: impl Read,
    joint_count: usize,
    source_id: &str,
) -> Result<SkeletonSequence, SkeletonError> {
    let reader = BufReader::new(input);
    let mut frames = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if joint_count > 0 && (trimmed.is_empty() || trimmed.starts_with('#')) {
            continue;
        }
        let values = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| SkeletonError::syntax(lineno, format!("not a number: {tok:?}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() % 3 != 0 {
            return Err(SkeletonError::syntax(
                lineno,
                format!(
                    "{} values is not a whole number of xyz triples",
                    values.len()
                ),
            ));
        }
        let joints = values
            .chunks_exact(3)
            .map(|c| Point3::new(c[0], c[1], c[2]))
            .collect();
        frames.push(Frame::new(joints));
    }
    Ok(SkeletonSequence::new_unchecked(
        frames,
        joint_count,
        None,
        source_id,
    ))
}

fn coord_json(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Serializes a sequence. The output re-parses to an identical sequence.
pub fn write_sequence(seq: &SkeletonSequence, format: SequenceFormat) -> String {
    let mut out = String::new();
    match format {
        SequenceFormat::CanonicalJson => {
            let header = Header {
                format: FORMAT_TAG.to_string(),
                version: FORMAT_VERSION,
                source_id: seq.source_id.clone(),
                joint_count: seq.joint_count,
                joint_names: seq.joint_names.clone(),
            };
            out.push_str(&serde_json::to_string(&header).expect("header serializes"));
            out.push('\n');
            for (i, frame) in seq.frames.iter().enumerate() {
                let rec = FrameRecord {
                    frame: i,
                    joints: frame
                        .joints
                        .iter()
                        .map(|p| [coord_json(p.x), coord_json(p.y), coord_json(p.z)])
                        .collect(),
                };
                out.push_str(&serde_json::to_string(&rec).expect("frame serializes"));
                out.push('\n');
            }
        }
        SequenceFormat::PlainXyz { .. } => {
            for frame in &seq.frames {
                let line: Vec<String> = frame
                    .joints
                    .iter()
                    .flat_map(|p| [p.x, p.y, p.z])
                    .map(|v| format!("{v:?}"))
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

/// Body part label used to pick a colormap per joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyPart {
    Left,
    Right,
    Middle,
}

impl std::str::FromStr for BodyPart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(BodyPart::Left),
            "right" => Ok(BodyPart::Right),
            "middle" => Ok(BodyPart::Middle),
            other => Err(format!("unknown body part {other:?}")),
        }
    }
}

/// Kinect V1 joint order (20 joints).
pub const KINECT_V1_JOINTS: [&str; 20] = [
    "hip_center",
    "spine",
    "shoulder_center",
    "head",
    "shoulder_left",
    "elbow_left",
    "wrist_left",
    "hand_left",
    "shoulder_right",
    "elbow_right",
    "wrist_right",
    "hand_right",
    "hip_left",
    "knee_left",
    "ankle_left",
    "foot_left",
    "hip_right",
    "knee_right",
    "ankle_right",
    "foot_right",
];

/// Total map from joint index to body part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPartition {
    parts: Vec<BodyPart>,
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("partition file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("joint {0} is not assigned to a body part")]
    Unassigned(usize),
    #[error("joint {0} assigned twice")]
    Duplicate(usize),
}

impl JointPartition {
    pub fn new(parts: Vec<BodyPart>) -> Self {
        Self { parts }
    }

    /// Left/right limbs and the middle trunk for the Kinect V1 layout:
    /// head, neck (shoulder center), torso (spine) and hip center are MIDDLE.
    pub fn kinect_v1() -> Self {
        let parts = KINECT_V1_JOINTS
            .iter()
            .map(|name| {
                if name.ends_with("_left") {
                    BodyPart::Left
                } else if name.ends_with("_right") {
                    BodyPart::Right
                } else {
                    BodyPart::Middle
                }
            })
            .collect();
        Self { parts }
    }

    /// Every joint in one part.
    pub fn uniform(joint_count: usize, part: BodyPart) -> Self {
        Self {
            parts: vec![part; joint_count],
        }
    }

    /// Parses `<joint index> <left|right|middle>` lines; `#` starts a comment.
    /// Every index in `0..max+1` must appear exactly once.
    pub fn parse(text: &str) -> Result<Self, PartitionError> {
        let mut entries: Vec<Option<BodyPart>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| PartitionError::Syntax {
                line: idx + 1,
                message,
            };
            let mut toks = line.split_whitespace();
            let (Some(i), Some(p), None) = (toks.next(), toks.next(), toks.next()) else {
                return Err(syntax(format!("expected `<index> <part>`, got {line:?}")));
            };
            let i: usize = i.parse().map_err(|_| syntax(format!("bad index {i:?}")))?;
            let p: BodyPart = p.parse().map_err(syntax)?;
            if entries.len() <= i {
                entries.resize(i + 1, None);
            }
            if entries[i].replace(p).is_some() {
                return Err(PartitionError::Duplicate(i));
            }
        }
        let parts = entries
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or(PartitionError::Unassigned(i)))
            .collect::<Result<_, _>>()?;
        Ok(Self { parts })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn part_of(&self, joint: usize) -> Option<BodyPart> {
        self.parts.get(joint).copied()
    }

    pub fn covers(&self, joint_count: usize) -> bool {
        self.parts.len() == joint_count
    }
}

impl Default for JointPartition {
    fn default() -> Self {
        Self::kinect_v1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plain(m: usize) -> SequenceFormat {
        SequenceFormat::PlainXyz { joint_count: m }
    }

    #[test]
    fn plain_two_frames_one_joint() {
        let seq = parse_sequence("0 0 1\n0 1 1".as_bytes(), plain(1), "s").unwrap();
        assert_eq!(seq.frame_count(), 2);
        assert_eq!(seq.joint_count(), 1);
        assert_eq!(seq.joint(1, 0), Point3::new(0.0, 1.0, 1.0));
    }

    #[test]
    fn wrong_joint_count_is_shape_error() {
        let row19 = vec!["1 2 3"; 19].join(" ");
        let row20 = vec!["1 2 3"; 20].join(" ");
        let text = format!("{row20}\n{row19}\n");
        let err = parse_sequence(text.as_bytes(), plain(20), "s").unwrap_err();
        assert!(
            matches!(
                err,
                SkeletonError::Shape(Violation::Shape {
                    frame: 1,
                    expected: 20,
                    found: 19
                })
            ),
            "{err}"
        );
    }

    #[test]
    fn malformed_inputs_are_syntax_errors() {
        assert!(matches!(
            parse_sequence("0 0 x\n".as_bytes(), plain(1), "s"),
            Err(SkeletonError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_sequence("0 0\n".as_bytes(), plain(1), "s"),
            Err(SkeletonError::Syntax { .. })
        ));
        assert!(matches!(
            parse_sequence("{not json".as_bytes(), SequenceFormat::CanonicalJson, "s"),
            Err(SkeletonError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_sequence("".as_bytes(), SequenceFormat::CanonicalJson, "s"),
            Err(SkeletonError::Syntax { .. })
        ));
    }

    #[test]
    fn nan_is_nonfinite_error() {
        let err = parse_sequence("0 0 1\nnan 1 1".as_bytes(), plain(1), "s").unwrap_err();
        assert!(matches!(
            err,
            SkeletonError::NonFinite { frame: 1, joint: 0 }
        ));
        let json = "{\"format\":\"jtm-skeleton\",\"version\":1,\"joint_count\":1}\n\
                    {\"frame\":0,\"joints\":[[0.0,null,1.0]]}\n";
        let err = parse_sequence(json.as_bytes(), SequenceFormat::CanonicalJson, "s").unwrap_err();
        assert!(matches!(
            err,
            SkeletonError::NonFinite { frame: 0, joint: 0 }
        ));
    }

    #[test]
    fn validate_reports_violations_as_data() {
        let good = SkeletonSequence::from_points(vec![vec![Point3::default(); 4]], "g").unwrap();
        assert!(validate(&good).is_empty());

        let mut frames = vec![Frame::new(vec![Point3::default(); 4])];
        frames[0].joints[3].x = f64::NAN;
        let bad = SkeletonSequence::new_unchecked(frames, 4, None, "b");
        assert_eq!(
            validate(&bad),
            vec![Violation::NonFinite { frame: 0, joint: 3 }]
        );
        assert_eq!(validate(&bad), validate(&bad));

        let ragged = SkeletonSequence::new_unchecked(
            vec![
                Frame::new(vec![Point3::default(); 2]),
                Frame::new(vec![Point3::default(); 1]),
            ],
            2,
            None,
            "r",
        );
        assert_eq!(
            validate(&ragged),
            vec![Violation::Shape {
                frame: 1,
                expected: 2,
                found: 1
            }]
        );
    }

    #[test]
    fn empty_frame_sequence_writes_minimal_document() {
        let seq = SkeletonSequence::new(vec![Frame::default()], 0, None, "e").unwrap();
        let text = write_sequence(&seq, SequenceFormat::CanonicalJson);
        assert_eq!(
            text,
            "{\"format\":\"jtm-skeleton\",\"version\":1,\"source_id\":\"e\",\"joint_count\":0}\n\
             {\"frame\":0,\"joints\":[]}\n"
        );
        let back = parse_sequence(text.as_bytes(), SequenceFormat::CanonicalJson, "x").unwrap();
        assert_eq!(back, seq);

        let plain_text = write_sequence(&seq, plain(0));
        assert_eq!(plain_text, "\n");
        let back = parse_sequence(plain_text.as_bytes(), plain(0), "e").unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn tenth_survives_round_trip() {
        let seq = SkeletonSequence::from_points(vec![vec![Point3::new(0.1, -0.1, 0.1 + 0.2)]], "t")
            .unwrap();
        for fmt in [SequenceFormat::CanonicalJson, plain(1)] {
            let back = parse_sequence(write_sequence(&seq, fmt).as_bytes(), fmt, "t").unwrap();
            assert_eq!(back.joint(0, 0).x.to_bits(), 0.1f64.to_bits());
            assert_eq!(back.joint(0, 0).z.to_bits(), (0.1f64 + 0.2).to_bits());
        }
    }

    #[test]
    fn kinect_partition_matches_joint_layout() {
        let p = JointPartition::kinect_v1();
        assert_eq!(p.len(), 20);
        let count = |part| (0..20).filter(|&j| p.part_of(j) == Some(part)).count();
        assert_eq!(count(BodyPart::Left), 8);
        assert_eq!(count(BodyPart::Right), 8);
        assert_eq!(count(BodyPart::Middle), 4);
        assert_eq!(p.part_of(3), Some(BodyPart::Middle));
        assert_eq!(p.part_of(7), Some(BodyPart::Left));
        assert_eq!(p.part_of(11), Some(BodyPart::Right));
    }

    #[test]
    fn partition_file_parsing() {
        let p = JointPartition::parse("# demo\n0 middle\n2 right\n1 left # arm\n").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.part_of(1), Some(BodyPart::Left));
        assert!(matches!(
            JointPartition::parse("0 left\n2 right\n"),
            Err(PartitionError::Unassigned(1))
        ));
        assert!(matches!(
            JointPartition::parse("0 left\n0 right\n"),
            Err(PartitionError::Duplicate(0))
        ));
        assert!(matches!(
            JointPartition::parse("0 up\n"),
            Err(PartitionError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn repair_interpolates_gaps() {
        let nan = Point3::new(f64::NAN, f64::NAN, f64::NAN);
        let mut seq = SkeletonSequence::new_unchecked(
            vec![
                Frame::new(vec![nan]),
                Frame::new(vec![Point3::new(0.0, 0.0, 0.0)]),
                Frame::new(vec![nan]),
                Frame::new(vec![Point3::new(2.0, 4.0, 6.0)]),
                Frame::new(vec![nan]),
            ],
            1,
            None,
            "r",
        );
        assert_eq!(repair_missing(&mut seq), 3);
        assert!(validate(&seq).is_empty());
        assert_eq!(seq.joint(0, 0), Point3::new(0.0, 0.0, 0.0));
        assert_eq!(seq.joint(2, 0), Point3::new(1.0, 2.0, 3.0));
        assert_eq!(seq.joint(4, 0), Point3::new(2.0, 4.0, 6.0));
    }

    fn arb_sequence() -> impl Strategy<Value = SkeletonSequence> {
        (1usize..6, 0usize..25).prop_flat_map(|(n, m)| {
            let coord = prop_oneof![
                any::<f64>().prop_filter("finite", |v| v.is_finite()),
                -10.0f64..10.0,
            ];
            proptest::collection::vec(
                proptest::collection::vec((coord.clone(), coord.clone(), coord), m),
                n,
            )
            .prop_map(move |frames| {
                let frames = frames
                    .into_iter()
                    .map(|f| {
                        Frame::new(
                            f.into_iter()
                                .map(|(x, y, z)| Point3::new(x, y, z))
                                .collect(),
                        )
                    })
                    .collect();
                SkeletonSequence::new(frames, m, None, "prop").unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn canonical_round_trip_is_exact(seq in arb_sequence()) {
            let fmt = SequenceFormat::CanonicalJson;
            let text = write_sequence(&seq, fmt);
            let back = parse_sequence(text.as_bytes(), fmt, "other").unwrap();
            prop_assert_eq!(&back, &seq);
            prop_assert_eq!(write_sequence(&back, fmt), text);
        }

        #[test]
        fn plain_round_trip_is_exact(seq in arb_sequence()) {
            let fmt = plain(seq.joint_count());
            let text = write_sequence(&seq, fmt);
            let back = parse_sequence(text.as_bytes(), fmt, "prop").unwrap();
            prop_assert_eq!(&back, &seq);
            prop_assert_eq!(write_sequence(&back, fmt), text);
        }
    }
}
