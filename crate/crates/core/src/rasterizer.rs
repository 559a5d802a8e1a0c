//! Drawing coloured trajectories into joint trajectory map images.
//!
//! For one view and plane the pipeline is: rotate the sequence, compute
//! segments and 3D speeds, colour every segment, project its endpoints,
//! fit the projected points into the canvas, and paint segments in
//! chronological order (frame step, then joint index). Later segments
//! overwrite earlier ones.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::{colorize_segment, EncodingError, EncodingParams, Rgb};
use crate::geometry::{project, rotate_sequence, Plane, Point2, ViewAngles, ViewGrid};
use crate::skeleton_io::SkeletonSequence;
use crate::trajectory::{compute_trajectories, speeds_of, TooShort};

/// Smallest world extent used when fitting a box with a flat axis.
pub const MIN_EXTENT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    TooShort(#[from] TooShort),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("partition covers {partition} joints but the sequence has {joints}")]
    PartitionMismatch { joints: usize, partition: usize },
    #[error("invalid render settings: {0}")]
    Settings(String),
    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

/// One rendered map: row-major RGB pixels on a solid background.
#[derive(Debug, Clone, PartialEq)]
pub struct JtmCanvas {
    width: u32,
    height: u32,
    plane: Plane,
    background: Rgb,
    pixels: Vec<Rgb>,
}

impl JtmCanvas {
    pub fn new(width: u32, height: u32, plane: Plane, background: Rgb) -> Self {
        Self {
            width,
            height,
            plane,
            background,
            pixels: vec![background; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn background(&self) -> Rgb {
        self.background
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as u32) < self.width && (p.y as u32) < self.height
    }

    pub fn get(&self, p: Pixel) -> Option<Rgb> {
        self.contains(p)
            .then(|| self.pixels[p.y as usize * self.width as usize + p.x as usize])
    }

    /// Paints one pixel; out-of-canvas pixels are ignored.
    pub fn put(&mut self, p: Pixel, rgb: Rgb) {
        if self.contains(p) {
            let w = self.width as usize;
            self.pixels[p.y as usize * w + p.x as usize] = rgb;
        }
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    /// 8-bit RGB bytes, row-major, rounding half up.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|c| c.to_rgb8()).collect()
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.to_rgb8())?;
        }
        Ok(out)
    }

    pub fn write_png(&self, path: &Path) -> Result<(), RenderError> {
        let bytes = self.to_png()?;
        crate::fsutil::write_atomic(path, &bytes)?;
        Ok(())
    }
}

/// Decodes an 8-bit RGB PNG into raw bytes plus dimensions.
pub fn read_png_rgb8(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), String> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(format!(
            "expected 8-bit RGB, got {:?} {:?}",
            info.color_type, info.bit_depth
        ));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

/// Bounding box of projected points with a fractional canvas margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBox {
    pub min: Point2,
    pub max: Point2,
    pub margin: f64,
}

impl NormalizationBox {
    pub fn from_points(points: impl IntoIterator<Item = Point2>, margin: f64) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some(Self { min, max, margin })
    }
}

/// Pixel coordinates are rounded to this fraction of a pixel before snapping,
/// so float noise of a few ulps (from translating the input, say) cannot tip
/// a point that sits exactly on a half-pixel.
pub const SUBPIXEL_GRID: f64 = 1.0 / 65536.0;

/// Aspect-preserving fit of the box into the canvas minus margins, centred,
/// with world y pointing up the image.
pub fn world_to_pixel(p: Point2, bx: &NormalizationBox, width: u32, height: u32) -> Pixel {
    let (wmax, hmax) = ((width - 1) as f64, (height - 1) as f64);
    let ex = (bx.max.x - bx.min.x).max(MIN_EXTENT);
    let ey = (bx.max.y - bx.min.y).max(MIN_EXTENT);
    let keep = 1.0 - 2.0 * bx.margin;
    let scale = (wmax * keep / ex).min(hmax * keep / ey);
    let cx = 0.5 * (bx.min.x + bx.max.x);
    let cy = 0.5 * (bx.min.y + bx.max.y);
    let px = 0.5 * wmax + (p.x - cx) * scale;
    let py = 0.5 * hmax - (p.y - cy) * scale;
    let snap = |v: f64, hi: f64| {
        let v = (v / SUBPIXEL_GRID).round() * SUBPIXEL_GRID;
        (v + 0.5).floor().clamp(0.0, hi) as i32
    };
    Pixel::new(snap(px, wmax), snap(py, hmax))
}

/// Integer Bresenham line from `a` to `b`, both endpoints included.
///
/// Along the major axis every pixel is visited once; the minor coordinate
/// at major step `i` is `a + floor(i * d / D + 1/2)` where `d` is the signed
/// minor delta and `D` the major length, tracked with an integer error term.
/// Halves always round towards +inf, so swapping `a` and `b` gives the same
/// pixel set.
pub fn bresenham(a: Pixel, b: Pixel) -> Vec<Pixel> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let x_major = dx.abs() >= dy.abs();
    let (major_len, major_step, minor_delta) = if x_major {
        (dx.abs(), dx.signum(), dy)
    } else {
        (dy.abs(), dy.signum(), dx)
    };
    if major_len == 0 {
        return vec![a];
    }
    let two_len = 2 * major_len;
    let (mut major, mut minor) = if x_major { (a.x, a.y) } else { (a.y, a.x) };
    // error = (2 i d + D) mod 2D, starting at i = 0.
    let mut err = major_len;
    let mut out = Vec::with_capacity(major_len as usize + 1);
    for i in 0..=major_len {
        out.push(if x_major {
            Pixel::new(major, minor)
        } else {
            Pixel::new(minor, major)
        });
        if i == major_len {
            break;
        }
        major += major_step;
        err += 2 * minor_delta;
        if err >= two_len {
            err -= two_len;
            minor += 1;
        } else if err < 0 {
            err += two_len;
            minor -= 1;
        }
    }
    out
}

/// Paints the Bresenham line from `a` to `b` with a 1-pixel pen.
pub fn draw_segment(canvas: &mut JtmCanvas, a: Pixel, b: Pixel, rgb: Rgb) {
    draw_segment_thick(canvas, a, b, rgb, 1);
}

/// Paints the line with a square pen `thickness` pixels wide.
pub fn draw_segment_thick(canvas: &mut JtmCanvas, a: Pixel, b: Pixel, rgb: Rgb, thickness: u32) {
    let t = thickness.max(1) as i32;
    let lo = -(t - 1) / 2;
    let hi = t / 2;
    for p in bresenham(a, b) {
        if t == 1 {
            canvas.put(p, rgb);
            continue;
        }
        for oy in lo..=hi {
            for ox in lo..=hi {
                canvas.put(Pixel::new(p.x + ox, p.y + oy), rgb);
            }
        }
    }
}

/// Non-background pixels.
pub fn footprint(canvas: &JtmCanvas) -> BTreeSet<Pixel> {
    let w = canvas.width as usize;
    canvas
        .pixels
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != canvas.background)
        .map(|(i, _)| Pixel::new((i % w) as i32, (i / w) as i32))
        .collect()
}

/// Canvas geometry and pen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    /// Fraction of each canvas dimension kept free on both sides.
    pub margin: f64,
    pub thickness: u32,
    pub background: Rgb,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            margin: 0.05,
            thickness: 1,
            background: Rgb::WHITE,
        }
    }
}

impl RenderSettings {
    pub fn with_size(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::Settings(format!(
                "canvas must be non-empty, got {}x{}",
                self.width, self.height
            )));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(RenderError::Settings(format!(
                "margin must be in [0, 0.5), got {}",
                self.margin
            )));
        }
        if self.thickness == 0 {
            return Err(RenderError::Settings("thickness must be at least 1".into()));
        }
        if !self.background.in_unit_range() {
            return Err(RenderError::Settings("background out of range".into()));
        }
        Ok(())
    }
}

/// Segment colours of one view, shared by its three planes.
struct ColoredView {
    seq: SkeletonSequence,
    colors: Vec<Rgb>,
}

fn color_view(
    seq: &SkeletonSequence,
    angles: ViewAngles,
    params: &EncodingParams,
    settings: &RenderSettings,
) -> Result<ColoredView, RenderError> {
    settings.validate()?;
    params.validate()?;
    let n = seq.frame_count();
    let m = seq.joint_count();
    if params.level.uses_parts() && !params.partition.covers(m) {
        return Err(RenderError::PartitionMismatch {
            joints: m,
            partition: params.partition.len(),
        });
    }
    let rotated = rotate_sequence(seq, angles);
    let traj = compute_trajectories(&rotated)?;
    let speeds = speeds_of(&traj);
    let mut colors = Vec::with_capacity(traj.segments().len());
    for step in 0..traj.steps() {
        for k in 0..m {
            colors.push(colorize_segment(
                step + 1,
                k,
                speeds.speed(step, k),
                speeds.max(),
                n,
                params,
            )?);
        }
    }
    Ok(ColoredView {
        seq: rotated,
        colors,
    })
}

fn paint_plane(view: &ColoredView, plane: Plane, settings: &RenderSettings) -> JtmCanvas {
    let seq = &view.seq;
    let m = seq.joint_count();
    let projected: Vec<Point2> = seq
        .frames()
        .iter()
        .flat_map(|f| f.joints.iter().map(|&p| project(p, plane)))
        .collect();
    let mut canvas = JtmCanvas::new(settings.width, settings.height, plane, settings.background);
    let Some(bx) = NormalizationBox::from_points(projected.iter().copied(), settings.margin) else {
        return canvas;
    };
    let pixels: Vec<Pixel> = projected
        .iter()
        .map(|&p| world_to_pixel(p, &bx, settings.width, settings.height))
        .collect();
    for step in 0..seq.frame_count() - 1 {
        for k in 0..m {
            let a = pixels[step * m + k];
            let b = pixels[(step + 1) * m + k];
            draw_segment_thick(
                &mut canvas,
                a,
                b,
                view.colors[step * m + k],
                settings.thickness,
            );
        }
    }
    canvas
}

/// Renders the map of one plane for one view.
pub fn render_jtm(
    seq: &SkeletonSequence,
    plane: Plane,
    angles: ViewAngles,
    params: &EncodingParams,
    settings: &RenderSettings,
) -> Result<JtmCanvas, RenderError> {
    let view = color_view(seq, angles, params, settings)?;
    Ok(paint_plane(&view, plane, settings))
}

/// Renders the front, top and side maps of one view.
pub fn render_view(
    seq: &SkeletonSequence,
    angles: ViewAngles,
    params: &EncodingParams,
    settings: &RenderSettings,
) -> Result<[JtmCanvas; 3], RenderError> {
    let view = color_view(seq, angles, params, settings)?;
    Ok(Plane::ALL.map(|p| paint_plane(&view, p, settings)))
}

/// The three maps of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRender {
    pub angles: ViewAngles,
    pub canvases: [JtmCanvas; 3],
}

impl ViewRender {
    pub fn plane(&self, plane: Plane) -> &JtmCanvas {
        &self.canvases[Plane::ALL
            .iter()
            .position(|&p| p == plane)
            .expect("known plane")]
    }
}

/// Renders every (view, plane) pair of the grid in parallel, in grid order.
pub fn render_all(
    seq: &SkeletonSequence,
    grid: &ViewGrid,
    params: &EncodingParams,
    settings: &RenderSettings,
) -> Result<Vec<ViewRender>, RenderError> {
    let views: Vec<ColoredView> = grid
        .views()
        .par_iter()
        .map(|&v| color_view(seq, v, params, settings))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, Plane)> = (0..views.len())
        .flat_map(|i| Plane::ALL.map(|p| (i, p)))
        .collect();
    let mut canvases: Vec<JtmCanvas> = jobs
        .par_iter()
        .map(|&(i, p)| paint_plane(&views[i], p, settings))
        .collect();
    let mut out = Vec::with_capacity(views.len());
    for &angles in grid.views().iter().rev() {
        let side = canvases.pop().expect("three per view");
        let top = canvases.pop().expect("three per view");
        let front = canvases.pop().expect("three per view");
        out.push(ViewRender {
            angles,
            canvases: [front, top, side],
        });
    }
    out.reverse();
    Ok(out)
}

/// `<sample_id>__t<theta>_p<psi>__<plane>.png`
pub fn image_file_name(sample_id: &str, angles: ViewAngles, plane: Plane) -> String {
    format!("{sample_id}__{}__{}.png", angles.file_tag(), plane.name())
}
