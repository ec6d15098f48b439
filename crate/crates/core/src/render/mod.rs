//! Point-cloud surface rendering.
//!
//! `f` is sampled on a regular grid, every finite sample is mapped to the
//! screen (and optionally moved by a [`ComposedTransform`]), and one pixel is
//! drawn per sample into the back buffer, colored by its height. The buffer
//! is committed once, after the last sample.

mod colormap;
mod framebuffer;
mod ppm;

pub use colormap::{color_for, ColorMap};
pub use framebuffer::{Framebuffer, Rgb, MAX_DIMENSION};
pub use ppm::write_ppm;

use thiserror::Error;

use crate::expr::{EvalError, Expr, ParamEnv};
use crate::geometry::{LogicalPoint, MappedPoint, Projection};
use crate::transform::ComposedTransform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("image size must be between 1x1 and {max}x{max}, got {width}x{height}", max = MAX_DIMENSION)]
    InvalidSize { width: usize, height: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid needs at least 2 samples per axis, got {nx}x{ny}")]
    InvalidGrid { nx: usize, ny: usize },
    #[error("invalid colormap: {0}")]
    InvalidColorMap(String),
    #[error("z range [{z_min}, {z_max}] is empty")]
    InvalidZRange { z_min: f64, z_max: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("empty plot: no sample produced a finite value")]
    EmptyPlot,
}

/// Rectangular sampling region in logical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, RenderError> {
        let d = Domain {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        d.validate()?;
        Ok(d)
    }

    /// `[-a, a]²`.
    pub fn symmetric(a: f64) -> Result<Self, RenderError> {
        Domain::new(-a, a, -a, a)
    }

    fn validate(&self) -> Result<(), RenderError> {
        let all_finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(RenderError::InvalidDomain("bounds must be finite".into()));
        }
        if !(self.x_min < self.x_max) {
            return Err(RenderError::InvalidDomain(format!(
                "x_min {} must be below x_max {}",
                self.x_min, self.x_max
            )));
        }
        if !(self.y_min < self.y_max) {
            return Err(RenderError::InvalidDomain(format!(
                "y_min {} must be below y_max {}",
                self.y_min, self.y_max
            )));
        }
        Ok(())
    }
}

/// Everything needed to draw one surface.
#[derive(Debug, Clone)]
pub struct PlotJob {
    pub expr: Expr,
    pub params: ParamEnv,
    pub domain: Domain,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub projection: Projection,
    pub transform: Option<ComposedTransform>,
    pub colormap: ColorMap,
    pub width: usize,
    pub height: usize,
}

impl PlotJob {
    /// A job with a 300×300 grid, no transform and the default colormap.
    pub fn new(
        expr: Expr,
        params: ParamEnv,
        domain: Domain,
        projection: Projection,
        width: usize,
        height: usize,
    ) -> Self {
        PlotJob {
            expr,
            params,
            domain,
            grid_nx: 300,
            grid_ny: 300,
            projection,
            transform: None,
            colormap: ColorMap::default(),
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        self.domain.validate()?;
        if self.grid_nx < 2 || self.grid_ny < 2 {
            return Err(RenderError::InvalidGrid {
                nx: self.grid_nx,
                ny: self.grid_ny,
            });
        }
        if self.width == 0 || self.height == 0 || self.width > MAX_DIMENSION || self.height > MAX_DIMENSION {
            return Err(RenderError::InvalidSize {
                width: self.width,
                height: self.height,
            });
        }
        self.params.check_bound(&self.expr)?;
        Ok(())
    }

    fn sample_x(&self, i: usize) -> f64 {
        lerp(self.domain.x_min, self.domain.x_max, i, self.grid_nx)
    }

    fn sample_y(&self, j: usize) -> f64 {
        lerp(self.domain.y_min, self.domain.y_max, j, self.grid_ny)
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    lo + (hi - lo) * (i as f64 / (n - 1) as f64)
}

/// Counters from one render.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RenderStats {
    pub z_min: f64,
    pub z_max: f64,
    /// Samples drawn inside the framebuffer.
    pub plotted: usize,
    /// Samples whose `f` value was not finite.
    pub skipped: usize,
    /// Finite samples that mapped outside the framebuffer.
    pub clipped: usize,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub framebuffer: Framebuffer,
    pub stats: RenderStats,
}

/// Nearest pixel, rounding half away from zero. `None` for positions that
/// are not finite or do not fit in `i64`.
fn to_pixel(v: f64) -> Option<i64> {
    let r = v.round();
    (r.is_finite() && r.abs() < 9.0e18).then_some(r as i64)
}

/// Samples, maps and rasterizes `job`.
///
/// Pass 1 evaluates `f` over the grid and records the finite z range. Pass 2
/// draws in grid order, `x` outer and `y` inner, so later samples overwrite
/// earlier ones. A constant surface is colored at the middle of the map.
pub fn render_surface(job: &PlotJob) -> Result<Rendered, RenderError> {
    job.validate()?;

    let mut samples = Vec::with_capacity(job.grid_nx * job.grid_ny);
    let mut z_range: Option<(f64, f64)> = None;
    for i in 0..job.grid_nx {
        let x = job.sample_x(i);
        for j in 0..job.grid_ny {
            let y = job.sample_y(j);
            let z = job.expr.evaluate(x, y, &job.params)?;
            if z.is_finite() {
                z_range = Some(match z_range {
                    None => (z, z),
                    Some((lo, hi)) => (lo.min(z), hi.max(z)),
                });
            }
            samples.push((x, y, z));
        }
    }
    let (z_min, z_max) = z_range.ok_or(RenderError::EmptyPlot)?;

    let mut fb = Framebuffer::new(job.width, job.height)?;
    let mut stats = RenderStats {
        z_min,
        z_max,
        ..RenderStats::default()
    };
    for &(x, y, z) in &samples {
        if !z.is_finite() {
            stats.skipped += 1;
            continue;
        }
        let color = if z_min < z_max {
            job.colormap.color_for(z, z_min, z_max)?
        } else {
            job.colormap.color_at(0.5)
        };
        let written = screen_position(job, LogicalPoint::new(x, y, z))
            .and_then(|q| Some((to_pixel(q.sx)?, to_pixel(q.sy)?)))
            .is_some_and(|(px, py)| fb.put_pixel(px, py, color));
        if written {
            stats.plotted += 1;
        } else {
            stats.clipped += 1;
        }
    }
    fb.commit();
    Ok(Rendered {
        framebuffer: fb,
        stats,
    })
}

fn screen_position(job: &PlotJob, p: LogicalPoint) -> Option<MappedPoint> {
    let q = job.projection.forward_map(p).ok()?;
    Some(match &job.transform {
        Some(ct) => ct.apply_unchecked(q),
        None => q,
    })
}
