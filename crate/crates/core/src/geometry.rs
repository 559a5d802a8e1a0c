//! View rotation of skeletons, view-grid enumeration and plane projection.
//!
//! A view is a pair of angles in degrees: the polar angle `theta` and the
//! azimuthal angle `psi`. A joint `(x, y, z)` is moved to
//!
//! ```text
//! [x_r, y_r, z_r, 1]^T = Tr_y(psi) * Tr_x(theta) * [x, y, z, 1]^T
//! ```
//!
//! where each `Tr` is a 4x4 homogeneous matrix `[R T; 0 1]` with
//!
//! ```text
//! R_y(psi)   = [1 0 0; 0 cos -sin; 0 sin cos]      T_y(psi)   = [0, z sin, z (1 - cos)]
//! R_x(theta) = [cos 0 sin; 0 1 0; -sin 0 cos]      T_x(theta) = [-z sin, 0, z (1 - cos)]
//! ```
//!
//! The matrices are used exactly as printed, including the block labelled
//! `R_y` being a rotation about the x axis and vice versa. The `z` inside a
//! translation column is the z coordinate of the point that transform is
//! applied to: the original z for `Tr_x`, and the z produced by `Tr_x` for
//! `Tr_y`. Rotation is about the camera origin.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton_io::{Point3, SkeletonSequence};

/// Polar (`theta`) and azimuthal (`psi`) view angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewAngles {
    pub theta: f64,
    pub psi: f64,
}

impl ViewAngles {
    pub const IDENTITY: ViewAngles = ViewAngles {
        theta: 0.0,
        psi: 0.0,
    };

    pub const fn new(theta: f64, psi: f64) -> Self {
        Self { theta, psi }
    }

    pub fn is_identity(&self) -> bool {
        self.theta == 0.0 && self.psi == 0.0
    }

    /// Tag used in image file names, e.g. `t15_p-30` or `t22.5_p0`.
    pub fn file_tag(&self) -> String {
        format!("t{}_p{}", fmt_angle(self.theta), fmt_angle(self.psi))
    }
}

impl fmt::Display for ViewAngles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_angle(self.theta), fmt_angle(self.psi))
    }
}

/// Shortest decimal form with negative zero folded to zero.
pub fn fmt_angle(deg: f64) -> String {
    format!("{}", deg + 0.0)
}

/// Row-major 4x4 homogeneous transform.
pub type Mat4 = [[f64; 4]; 4];

/// The pair of homogeneous transforms for one view, bound to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationTransform {
    angles: ViewAngles,
    sin_theta: f64,
    cos_theta: f64,
    sin_psi: f64,
    cos_psi: f64,
}

impl RotationTransform {
    pub fn new(angles: ViewAngles) -> Self {
        let (sin_theta, cos_theta) = angles.theta.to_radians().sin_cos();
        let (sin_psi, cos_psi) = angles.psi.to_radians().sin_cos();
        Self {
            angles,
            sin_theta,
            cos_theta,
            sin_psi,
            cos_psi,
        }
    }

    pub fn angles(&self) -> ViewAngles {
        self.angles
    }

    /// `Tr_x(theta)` with its translation column evaluated at depth `z`.
    pub fn tr_x(&self, z: f64) -> Mat4 {
        let (s, c) = (self.sin_theta, self.cos_theta);
        [
            [c, 0.0, s, -z * s],
            [0.0, 1.0, 0.0, 0.0],
            [-s, 0.0, c, z * (1.0 - c)],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    /// `Tr_y(psi)` with its translation column evaluated at depth `z`.
    pub fn tr_y(&self, z: f64) -> Mat4 {
        let (s, c) = (self.sin_psi, self.cos_psi);
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, -s, z * s],
            [0.0, s, c, z * (1.0 - c)],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let h = [p.x, p.y, p.z, 1.0];
        let after_x = mul_vec(&self.tr_x(p.z), h);
        let after_y = mul_vec(&self.tr_y(after_x[2]), after_x);
        Point3::new(after_y[0], after_y[1], after_y[2])
    }
}

fn mul_vec(m: &Mat4, v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (row, o) in m.iter().zip(out.iter_mut()) {
        *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

/// Moves one joint to the given view.
pub fn rotate_point(p: Point3, angles: ViewAngles) -> Point3 {
    RotationTransform::new(angles).apply(p)
}

/// Rotates every joint of every frame. Identity angles return an exact copy.
pub fn rotate_sequence(seq: &SkeletonSequence, angles: ViewAngles) -> SkeletonSequence {
    if angles.is_identity() {
        return seq.clone();
    }
    let tr = RotationTransform::new(angles);
    seq.map_points(|p| tr.apply(p))
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("view grid is empty: {0}")]
    Empty(String),
    #[error("angle step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("duplicate view {0}")]
    Duplicate(ViewAngles),
}

/// Inclusive angle range in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl AngleRange {
    pub const fn new(start: f64, end: f64, step: f64) -> Self {
        Self { start, end, step }
    }

    /// Values `start + i * step` not exceeding `end` (with a 1e-9 degree
    /// allowance for the last step).
    pub fn values(&self) -> Result<Vec<f64>, GridError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(GridError::BadStep(self.step));
        }
        if !(self.start.is_finite() && self.end.is_finite()) || self.end < self.start {
            return Err(GridError::Empty(format!(
                "range [{}, {}] contains no angle",
                self.start, self.end
            )));
        }
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

/// Ordered, duplicate-free list of views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewGrid {
    views: Vec<ViewAngles>,
}

impl ViewGrid {
    pub fn new(views: Vec<ViewAngles>) -> Result<Self, GridError> {
        if views.is_empty() {
            return Err(GridError::Empty("no views given".into()));
        }
        for (i, v) in views.iter().enumerate() {
            if views[..i].contains(v) {
                return Err(GridError::Duplicate(*v));
            }
        }
        Ok(Self { views })
    }

    pub fn identity() -> Self {
        Self {
            views: vec![ViewAngles::IDENTITY],
        }
    }

    /// theta in [0, 45] and psi in [-45, 45], both in 15 degree steps: 28 views.
    pub fn augmentation_default() -> Self {
        enumerate_views(
            AngleRange::new(0.0, 45.0, 15.0),
            AngleRange::new(-45.0, 45.0, 15.0),
        )
        .expect("default grid is non-empty")
    }

    /// Both angles in [-45, 45] with a 22.5 degree step: 25 views.
    pub fn orthogonal_study() -> Self {
        symmetric(45.0, 22.5).expect("study grid is non-empty")
    }

    pub fn views(&self) -> &[ViewAngles] {
        &self.views
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

/// Inclusive Cartesian grid, theta outer and psi inner.
pub fn enumerate_views(theta: AngleRange, psi: AngleRange) -> Result<ViewGrid, GridError> {
    let thetas = theta.values()?;
    let psis = psi.values()?;
    let views = thetas
        .iter()
        .flat_map(|&t| psis.iter().map(move |&p| ViewAngles::new(t, p)))
        .collect();
    ViewGrid::new(views)
}

/// Both angles over `[-range, range]` with the same step.
pub fn symmetric(range: f64, step: f64) -> Result<ViewGrid, GridError> {
    let r = AngleRange::new(-range, range, step);
    enumerate_views(r, r)
}

/// One of the three orthogonal projection planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Front,
    Top,
    Side,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Front, Plane::Top, Plane::Side];

    pub fn name(&self) -> &'static str {
        match self {
            Plane::Front => "front",
            Plane::Top => "top",
            Plane::Side => "side",
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Plane {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "front" => Ok(Plane::Front),
            "top" => Ok(Plane::Top),
            "side" => Ok(Plane::Side),
            other => Err(format!("unknown plane {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// FRONT drops z, TOP drops y, SIDE drops x.
pub fn project(p: Point3, plane: Plane) -> Point2 {
    match plane {
        Plane::Front => Point2::new(p.x, p.y),
        Plane::Top => Point2::new(p.x, p.z),
        Plane::Side => Point2::new(p.z, p.y),
    }
}
