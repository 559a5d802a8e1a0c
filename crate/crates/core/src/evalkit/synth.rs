//! Parametric synthetic actions on a 20-joint Kinect V1 body.
//!
//! Each generator animates the arms of a static standing body; every other
//! joint stays at its rest position. Classes come in pairs that share a
//! spatial path and differ only in timing:
//!
//! * direction: a circle drawn clockwise vs counter-clockwise,
//! * magnitude: a sweep that accelerates vs one that decelerates,
//! * coordination: both hands moving in phase vs in anti-phase.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LabeledSequence;
use crate::skeleton_io::{Frame, Point3, SkeletonSequence, KINECT_V1_JOINTS};

const HAND_R: usize = 11;
const WRIST_R: usize = 10;
const ELBOW_R: usize = 9;
const SHOULDER_R: usize = 8;
const HAND_L: usize = 7;
const WRIST_L: usize = 6;
const ELBOW_L: usize = 5;
const SHOULDER_L: usize = 4;

/// Performers per corpus; sample `j` of a class belongs to subject `j % 5 + 1`.
pub const SUBJECTS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    CircleCw,
    CircleCcw,
    SweepAccelerating,
    SweepDecelerating,
    ArmsInPhase,
    ArmsAntiPhase,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::CircleCw => "circle-cw",
            Generator::CircleCcw => "circle-ccw",
            Generator::SweepAccelerating => "sweep-accel",
            Generator::SweepDecelerating => "sweep-decel",
            Generator::ArmsInPhase => "arms-in-phase",
            Generator::ArmsAntiPhase => "arms-anti-phase",
        }
    }
}

/// One synthetic class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClassSpec {
    pub label: String,
    pub generator: Generator,
    /// Standard deviation of per-coordinate Gaussian noise, meters.
    pub jitter: f64,
    /// Inclusive frame count range.
    pub frames: (usize, usize),
    /// Mixed into the corpus seed for this class.
    pub seed: u64,
}

impl SyntheticClassSpec {
    pub fn new(generator: Generator) -> Self {
        Self {
            label: generator.name().to_string(),
            generator,
            jitter: 0.01,
            frames: (30, 50),
            seed: generator as u64,
        }
    }
}

/// All six classes.
pub fn standard_specs() -> Vec<SyntheticClassSpec> {
    [
        Generator::CircleCw,
        Generator::CircleCcw,
        Generator::SweepAccelerating,
        Generator::SweepDecelerating,
        Generator::ArmsInPhase,
        Generator::ArmsAntiPhase,
    ]
    .into_iter()
    .map(SyntheticClassSpec::new)
    .collect()
}

/// The direction pair and the magnitude pair.
pub fn direction_magnitude_specs() -> Vec<SyntheticClassSpec> {
    [
        Generator::CircleCw,
        Generator::CircleCcw,
        Generator::SweepAccelerating,
        Generator::SweepDecelerating,
    ]
    .into_iter()
    .map(SyntheticClassSpec::new)
    .collect()
}

/// Standing body about 3 m in front of the camera, arms down.
pub fn rest_pose() -> Vec<Point3> {
    let half: [(f64, f64, f64); 8] = [
        (0.18, 0.42, 3.0),   // shoulder
        (0.24, 0.16, 3.0),   // elbow
        (0.27, -0.06, 2.98), // wrist
        (0.28, -0.13, 2.97), // hand
        (0.10, -0.05, 3.0),  // hip
        (0.11, -0.50, 3.02), // knee
        (0.12, -0.90, 3.04), // ankle
        (0.12, -0.96, 2.94), // foot
    ];
    let mirror = |sign: f64| half.map(|(x, y, z)| Point3::new(sign * x, y, z));
    let left = mirror(-1.0);
    let right = mirror(1.0);
    let mut pose = vec![
        Point3::new(0.0, 0.0, 3.0),  // hip center
        Point3::new(0.0, 0.2, 3.0),  // spine
        Point3::new(0.0, 0.45, 3.0), // shoulder center
        Point3::new(0.0, 0.66, 3.0), // head
    ];
    pose.extend_from_slice(&left[..4]);
    pose.extend_from_slice(&right[..4]);
    pose.extend_from_slice(&left[4..]);
    pose.extend_from_slice(&right[4..]);
    debug_assert_eq!(pose.len(), KINECT_V1_JOINTS.len());
    pose
}

/// Elbow and wrist placed along the shoulder-hand line, elbow dropped a bit.
fn place_arm(
    pose: &mut [Point3],
    shoulder: usize,
    elbow: usize,
    wrist: usize,
    hand: usize,
    target: Point3,
) {
    let s = pose[shoulder];
    let lerp = |a: Point3, b: Point3, t: f64| {
        Point3::new(
            a.x + (b.x - a.x) * t,
            a.y + (b.y - a.y) * t,
            a.z + (b.z - a.z) * t,
        )
    };
    let e = lerp(s, target, 0.5).add(Point3::new(0.0, -0.08, 0.0));
    pose[elbow] = e;
    pose[wrist] = lerp(e, target, 0.85);
    pose[hand] = target;
}

/// Per-sample shape parameters drawn once.
struct Shape {
    scale: f64,
}

fn frame_at(generator: Generator, shape: &Shape, n: usize, i: usize) -> Vec<Point3> {
    let mut pose = rest_pose();
    let last = (n - 1) as f64;
    let r = 0.15 * shape.scale;
    match generator {
        Generator::CircleCw | Generator::CircleCcw => {
            // Counter-clockwise replays the clockwise frames backwards.
            let idx = if generator == Generator::CircleCw {
                i
            } else {
                n - 1 - i
            };
            let u = idx as f64 / last;
            let phi = PI / 2.0 - 2.0 * PI * u;
            let c = Point3::new(0.32, 0.32, 2.75);
            let hand = Point3::new(c.x + r * phi.cos(), c.y + r * phi.sin(), c.z);
            place_arm(&mut pose, SHOULDER_R, ELBOW_R, WRIST_R, HAND_R, hand);
        }
        Generator::SweepAccelerating | Generator::SweepDecelerating => {
            let t = i as f64 / last;
            let u = if generator == Generator::SweepAccelerating {
                t * t
            } else {
                1.0 - (1.0 - t) * (1.0 - t)
            };
            let span = 2.0 * r * 2.0;
            let hand = Point3::new(-0.05 + span * u, 0.30, 2.72);
            place_arm(&mut pose, SHOULDER_R, ELBOW_R, WRIST_R, HAND_R, hand);
        }
        Generator::ArmsInPhase | Generator::ArmsAntiPhase => {
            let u = i as f64 / last;
            let lift = 1.5 * r * (2.0 * PI * u).sin();
            let other = if generator == Generator::ArmsInPhase {
                lift
            } else {
                -lift
            };
            let right = Point3::new(0.36, 0.15 + lift, 2.8);
            let left = Point3::new(-0.36, 0.15 + other, 2.8);
            place_arm(&mut pose, SHOULDER_R, ELBOW_R, WRIST_R, HAND_R, right);
            place_arm(&mut pose, SHOULDER_L, ELBOW_L, WRIST_L, HAND_L, left);
        }
    }
    pose
}

fn sample_rng(
    seed: u64,
    spec: &SyntheticClassSpec,
    class: usize,
    sample: usize,
    stream: u64,
) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&spec.seed.to_le_bytes());
    key[16..24].copy_from_slice(&(class as u64).to_le_bytes());
    key[24..].copy_from_slice(&(sample as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// `per_class` samples of every spec, in spec order. Sample ids are
/// `<label>_<index:03>`. Shape parameters and noise come from separate
/// random streams, so changing `jitter` leaves the noiseless path unchanged.
pub fn generate_synthetic(
    specs: &[SyntheticClassSpec],
    per_class: usize,
    seed: u64,
) -> Vec<LabeledSequence> {
    let mut out = Vec::with_capacity(specs.len() * per_class);
    for (c, spec) in specs.iter().enumerate() {
        for j in 0..per_class {
            let mut shape_rng = sample_rng(seed, spec, c, j, 0);
            let mut noise_rng = sample_rng(seed, spec, c, j, 1);
            let (lo, hi) = (
                spec.frames.0.max(2),
                spec.frames.1.max(spec.frames.0.max(2)),
            );
            let n = shape_rng.gen_range(lo..=hi);
            let shape = Shape {
                scale: shape_rng.gen_range(0.85..1.15),
            };
            let noise = Normal::new(0.0, spec.jitter.max(0.0)).expect("finite std");
            let frames = (0..n)
                .map(|i| {
                    let mut pose = frame_at(spec.generator, &shape, n, i);
                    if spec.jitter > 0.0 {
                        for p in &mut pose {
                            p.x += noise.sample(&mut noise_rng);
                            p.y += noise.sample(&mut noise_rng);
                            p.z += noise.sample(&mut noise_rng);
                        }
                    }
                    Frame::new(pose)
                })
                .collect();
            let sample_id = format!("{}_{j:03}", spec.label);
            let names = KINECT_V1_JOINTS.iter().map(|s| s.to_string()).collect();
            let sequence =
                SkeletonSequence::new(frames, KINECT_V1_JOINTS.len(), Some(names), &sample_id)
                    .expect("generated sequences are finite");
            out.push(LabeledSequence {
                sample_id,
                label: spec.label.clone(),
                subject: (j as u32 % SUBJECTS) + 1,
                sequence,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton_io::validate;

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate_synthetic(&standard_specs(), 3, 42);
        let b = generate_synthetic(&standard_specs(), 3, 42);
        assert_eq!(a, b);
        let c = generate_synthetic(&standard_specs(), 3, 43);
        assert_ne!(a, c);
        assert_eq!(a.len(), 18);
        for s in &a {
            assert!(validate(&s.sequence).is_empty());
            assert_eq!(s.sequence.joint_count(), 20);
            assert!((30..=50).contains(&s.sequence.frame_count()));
        }
    }

    #[test]
    fn circle_directions_share_points_in_opposite_order() {
        let mut cw = SyntheticClassSpec::new(Generator::CircleCw);
        let mut ccw = SyntheticClassSpec::new(Generator::CircleCcw);
        cw.jitter = 0.0;
        ccw.jitter = 0.0;
        // Same shape stream for both: give them the same salt and class slot.
        ccw.seed = cw.seed;
        let a = generate_synthetic(&[cw], 4, 9);
        let b = generate_synthetic(&[ccw], 4, 9);
        for (x, y) in a.iter().zip(&b) {
            let n = x.sequence.frame_count();
            assert_eq!(n, y.sequence.frame_count());
            for i in 0..n {
                assert_eq!(x.sequence.frames()[i], y.sequence.frames()[n - 1 - i]);
            }
            assert_ne!(x.sequence, y.sequence);
        }
    }

    #[test]
    fn jitter_stays_within_five_sigma() {
        let mut noisy = SyntheticClassSpec::new(Generator::SweepAccelerating);
        noisy.jitter = 0.01;
        let mut clean = noisy.clone();
        clean.jitter = 0.0;
        let a = generate_synthetic(&[noisy], 100, 5);
        let b = generate_synthetic(&[clean], 100, 5);
        let (mut sum_sq, mut count) = (0.0, 0usize);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.sequence.frame_count(), y.sequence.frame_count());
            for j in 0..20 {
                // RMS deviation of one joint over the whole sample.
                let mut joint_sq = 0.0;
                for f in 0..x.sequence.frame_count() {
                    let d = x.sequence.joint(f, j).sub(y.sequence.joint(f, j));
                    joint_sq += d.x * d.x + d.y * d.y + d.z * d.z;
                }
                let n = 3 * x.sequence.frame_count();
                let rms = (joint_sq / n as f64).sqrt();
                assert!(rms < 5.0 * 0.01, "joint {j} rms {rms}");
                sum_sq += joint_sq;
                count += n;
            }
        }
        let std = (sum_sq / count as f64).sqrt();
        assert!((std - 0.01).abs() < 0.0005, "empirical std {std}");
    }

    #[test]
    fn subjects_cycle() {
        let s = generate_synthetic(&direction_magnitude_specs(), 7, 1);
        let subjects: Vec<u32> = s.iter().take(7).map(|x| x.subject).collect();
        assert_eq!(subjects, vec![1, 2, 3, 4, 5, 1, 2]);
    }
}
