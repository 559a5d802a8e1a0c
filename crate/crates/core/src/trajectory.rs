//! Per-joint trajectory segments between consecutive frames, and joint speeds.

use thiserror::Error;

use crate::skeleton_io::{Point3, SkeletonSequence};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("sequence has {frames} frame(s); at least 2 are needed for trajectories")]
pub struct TooShort {
    pub frames: usize,
}

/// Straight piece of a joint trajectory from one frame to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment3 {
    pub start: Point3,
    pub end: Point3,
}

impl Segment3 {
    pub fn displacement(&self) -> Point3 {
        self.end.sub(self.start)
    }
}

/// `(n - 1) x m` segments, row-major by frame step then joint.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    steps: usize,
    joint_count: usize,
    segments: Vec<Segment3>,
}

impl TrajectorySet {
    /// Number of frame steps, `n - 1`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    /// Segment of joint `joint` from frame `step` to `step + 1` (0-based).
    pub fn segment(&self, step: usize, joint: usize) -> Segment3 {
        self.segments[step * self.joint_count + joint]
    }

    pub fn displacement(&self, step: usize, joint: usize) -> Point3 {
        self.segment(step, joint).displacement()
    }

    pub fn segments(&self) -> &[Segment3] {
        &self.segments
    }
}

/// Speeds `‖P(i+1) - P(i)‖` per step and joint, with the sequence maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedField {
    joint_count: usize,
    speeds: Vec<f64>,
    max: f64,
}

impl SpeedField {
    pub fn speed(&self, step: usize, joint: usize) -> f64 {
        self.speeds[step * self.joint_count + joint]
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }
}

fn check_len(seq: &SkeletonSequence) -> Result<(), TooShort> {
    if seq.frame_count() < 2 {
        return Err(TooShort {
            frames: seq.frame_count(),
        });
    }
    Ok(())
}

pub fn compute_trajectories(seq: &SkeletonSequence) -> Result<TrajectorySet, TooShort> {
    check_len(seq)?;
    let segments = seq
        .frames()
        .windows(2)
        .flat_map(|w| {
            w[0].joints
                .iter()
                .zip(&w[1].joints)
                .map(|(&start, &end)| Segment3 { start, end })
        })
        .collect();
    Ok(TrajectorySet {
        steps: seq.frame_count() - 1,
        joint_count: seq.joint_count(),
        segments,
    })
}

pub fn compute_speeds(seq: &SkeletonSequence) -> Result<SpeedField, TooShort> {
    let traj = compute_trajectories(seq)?;
    Ok(speeds_of(&traj))
}

pub fn speeds_of(traj: &TrajectorySet) -> SpeedField {
    let speeds: Vec<f64> = traj
        .segments
        .iter()
        .map(|s| s.displacement().norm())
        .collect();
    let max = speeds.iter().copied().fold(0.0, f64::max);
    SpeedField {
        joint_count: traj.joint_count,
        speeds,
        max,
    }
}
