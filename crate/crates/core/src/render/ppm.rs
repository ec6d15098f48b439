use std::io::{self, Write};

use super::Framebuffer;

/// Writes the front buffer as binary PPM (`P6`, maxval 255), top row first.
/// Returns the number of bytes written.
pub fn write_ppm<W: Write>(fb: &Framebuffer, mut sink: W) -> io::Result<usize> {
    let header = format!("P6\n{} {}\n255\n", fb.width(), fb.height());
    let payload = fb.to_rgb_bytes();
    sink.write_all(header.as_bytes())?;
    sink.write_all(&payload)?;
    sink.flush()?;
    Ok(header.len() + payload.len())
}
