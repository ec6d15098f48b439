use std::str::FromStr;

use super::{RenderError, Rgb};

/// Piecewise-linear color gradient over `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    stops: Vec<(f64, Rgb)>,
}

impl ColorMap {
    /// Stops must be strictly increasing in `t`, start at 0 and end at 1.
    pub fn new(stops: Vec<(f64, Rgb)>) -> Result<Self, RenderError> {
        let invalid = |reason: &str| Err(RenderError::InvalidColorMap(reason.to_string()));
        if stops.len() < 2 {
            return invalid("need at least two stops");
        }
        if stops[0].0 != 0.0 || stops[stops.len() - 1].0 != 1.0 {
            return invalid("first stop must be at 0 and last at 1");
        }
        if stops.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return invalid("stops must be strictly increasing");
        }
        Ok(ColorMap { stops })
    }

    pub fn two_stop(from: Rgb, to: Rgb) -> Self {
        ColorMap {
            stops: vec![(0.0, from), (1.0, to)],
        }
    }

    pub fn stops(&self) -> &[(f64, Rgb)] {
        &self.stops
    }

    /// Color at `t`, clamped to `[0, 1]`. Channels are interpolated linearly
    /// and rounded half away from zero.
    pub fn color_at(&self, t: f64) -> Rgb {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let upper = self
            .stops
            .iter()
            .position(|&(s, _)| s >= t)
            .unwrap_or(self.stops.len() - 1)
            .max(1);
        let (t0, c0) = self.stops[upper - 1];
        let (t1, c1) = self.stops[upper];
        let u = (t - t0) / (t1 - t0);
        let lerp = |a: u8, b: u8| {
            let v = f64::from(a) + (f64::from(b) - f64::from(a)) * u;
            v.round().clamp(0.0, 255.0) as u8
        };
        Rgb::new(lerp(c0.r, c1.r), lerp(c0.g, c1.g), lerp(c0.b, c1.b))
    }

    /// Color for `z` normalized over `[z_min, z_max]`.
    pub fn color_for(&self, z: f64, z_min: f64, z_max: f64) -> Result<Rgb, RenderError> {
        if !(z_min < z_max) {
            return Err(RenderError::InvalidZRange { z_min, z_max });
        }
        Ok(self.color_at((z - z_min) / (z_max - z_min)))
    }
}

impl Default for ColorMap {
    /// Dark blue through green to red.
    fn default() -> Self {
        ColorMap {
            stops: vec![
                (0.0, Rgb::new(0, 0, 160)),
                (0.5, Rgb::new(0, 200, 120)),
                (1.0, Rgb::new(255, 40, 40)),
            ],
        }
    }
}

/// Parses `t:rrggbb[,t:rrggbb...]`, e.g. `0:000000,1:ffffff`.
impl FromStr for ColorMap {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let stops = s
            .split(',')
            .map(|stop| {
                let (t, color) = stop.trim().split_once(':').ok_or_else(|| {
                    RenderError::InvalidColorMap(format!("stop `{stop}` is not `t:rrggbb`"))
                })?;
                let t: f64 = t
                    .trim()
                    .parse()
                    .map_err(|_| RenderError::InvalidColorMap(format!("bad position `{t}`")))?;
                let color: Rgb = color.trim().parse().map_err(RenderError::InvalidColorMap)?;
                Ok((t, color))
            })
            .collect::<Result<Vec<_>, RenderError>>()?;
        ColorMap::new(stops)
    }
}

/// Free-function form of [`ColorMap::color_for`].
pub fn color_for(cm: &ColorMap, z: f64, z_min: f64, z_max: f64) -> Result<Rgb, RenderError> {
    cm.color_for(z, z_min, z_max)
}
