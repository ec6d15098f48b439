//! Surface plotting through an oblique 3-D → 2-D coordinate mapping.
//!
//! * [`geometry`]: the forward map, its 3×3 matrix form and the exact inverse.
//! * [`transform`]: logical-space transforms conjugated into screen space.
//! * [`expr`]: the `f(x, y)` expression language.
//! * [`render`]: grid sampling, double-buffered rasterization and PPM output.
//! * [`cli`]: the `obliplot` command.

pub mod cli;
pub mod expr;
pub mod geometry;
pub mod render;
pub mod transform;

pub use expr::{Expr, ParamEnv};
pub use geometry::{LogicalPoint, MappedPoint, Matrix3, Projection};
pub use render::{render_surface, write_ppm, ColorMap, Domain, Framebuffer, PlotJob, Rgb};
pub use transform::{Axis, ComposedTransform, GraphicsTransform};
