use std::fmt;
use std::str::FromStr;

use super::RenderError;

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

/// Parses `rrggbb` with an optional leading `#`.
impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("`{s}` is not a 6-digit hex color"));
        }
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|e| e.to_string());
        Ok(Rgb::new(channel(0)?, channel(2)?, channel(4)?))
    }
}

/// A double-buffered RGB raster.
///
/// Drawing goes to the back buffer; readers only see the front buffer, which
/// changes on [`Framebuffer::commit`].
#[derive(Debug, Clone, PartialEq)]
pub struct Framebuffer {
    width: usize,
    height: usize,
    front: Vec<Rgb>,
    back: Vec<Rgb>,
}

impl Framebuffer {
    pub fn new(width: usize, height: usize) -> Result<Self, RenderError> {
        Framebuffer::with_background(width, height, Rgb::BLACK)
    }

    pub fn with_background(width: usize, height: usize, background: Rgb) -> Result<Self, RenderError> {
        if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
            return Err(RenderError::InvalidSize { width, height });
        }
        let pixels = vec![background; width * height];
        Ok(Framebuffer {
            width,
            height,
            front: pixels.clone(),
            back: pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn index(&self, px: i64, py: i64) -> Option<usize> {
        let x = usize::try_from(px).ok().filter(|&x| x < self.width)?;
        let y = usize::try_from(py).ok().filter(|&y| y < self.height)?;
        Some(y * self.width + x)
    }

    /// Sets a back-buffer pixel. Out-of-bounds coordinates are ignored;
    /// the return value says whether anything was written.
    pub fn put_pixel(&mut self, px: i64, py: i64, color: Rgb) -> bool {
        match self.index(px, py) {
            Some(i) => {
                self.back[i] = color;
                true
            }
            None => false,
        }
    }

    /// Publishes the back buffer.
    pub fn commit(&mut self) {
        self.front.copy_from_slice(&self.back);
    }

    /// Front-buffer pixel.
    pub fn pixel(&self, px: i64, py: i64) -> Option<Rgb> {
        self.index(px, py).map(|i| self.front[i])
    }

    pub fn back_pixel(&self, px: i64, py: i64) -> Option<Rgb> {
        self.index(px, py).map(|i| self.back[i])
    }

    /// Front buffer, row-major, top row first.
    pub fn pixels(&self) -> &[Rgb] {
        &self.front
    }

    /// Front buffer as packed RGB bytes.
    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.front.iter().flat_map(|c| c.channels()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RED: Rgb = Rgb::new(255, 0, 0);
    const GREEN: Rgb = Rgb::new(0, 255, 0);

    #[test]
    fn single_pixel_buffer() {
        let mut fb = Framebuffer::new(1, 1).unwrap();
        assert!(fb.put_pixel(0, 0, RED));
        assert_eq!(fb.back_pixel(0, 0), Some(RED));
    }

    #[test]
    fn out_of_bounds_is_a_no_op() {
        let mut fb = Framebuffer::new(4, 3).unwrap();
        let before = fb.clone();
        for (x, y) in [(-1, 5), (4, 0), (0, 3), (i64::MIN, i64::MAX), (-1, -1)] {
            assert!(!fb.put_pixel(x, y, RED));
        }
        assert_eq!(fb, before);
    }

    #[test]
    fn writes_become_visible_on_commit() {
        let mut fb = Framebuffer::new(2, 2).unwrap();
        fb.commit();
        assert!(fb.pixels().iter().all(|&c| c == Rgb::BLACK));

        fb.put_pixel(0, 0, RED);
        fb.put_pixel(1, 1, GREEN);
        assert_eq!(fb.pixel(0, 0), Some(Rgb::BLACK));
        fb.commit();
        assert_eq!(fb.pixel(0, 0), Some(RED));
        assert_eq!(fb.pixel(1, 1), Some(GREEN));

        fb.put_pixel(0, 1, GREEN);
        assert_eq!(fb.pixel(0, 1), Some(Rgb::BLACK));
        fb.commit();
        assert_eq!(fb.pixel(0, 1), Some(GREEN));
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(Framebuffer::new(0, 1).is_err());
        assert!(Framebuffer::new(1, 0).is_err());
        assert!(Framebuffer::new(MAX_DIMENSION + 1, 1).is_err());
    }

    #[test]
    fn hex_colors() {
        assert_eq!("ff2828".parse::<Rgb>(), Ok(Rgb::new(255, 40, 40)));
        assert_eq!("#0000A0".parse::<Rgb>(), Ok(Rgb::new(0, 0, 160)));
        assert!("fff".parse::<Rgb>().is_err());
        assert!("gg0000".parse::<Rgb>().is_err());
        assert_eq!(Rgb::new(0, 200, 120).to_string(), "00c878");
    }
}
