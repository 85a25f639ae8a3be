//! Binary Netpbm io: P6 for RGB images, P5 for gray planes and masks.
//! Headers use a single newline separator and maxval 255; readers accept
//! arbitrary whitespace and `#` comments per the format definition.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{ImageError, Result};
use crate::image::ImageU8;

pub fn write_ppm(path: impl AsRef<Path>, img: &ImageU8) -> Result<()> {
    img.expect_channels(3)?;
    write_netpbm(path.as_ref(), b"P6", img.width, img.height, &img.data)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &ImageU8) -> Result<()> {
    img.expect_channels(1)?;
    write_netpbm(path.as_ref(), b"P5", img.width, img.height, &img.data)
}

fn write_netpbm(path: &Path, magic: &[u8], w: usize, h: usize, data: &[u8]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(magic)?;
    out.write_all(format!("\n{w} {h}\n255\n").as_bytes())?;
    out.write_all(data)?;
    out.flush()?;
    Ok(())
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<ImageU8> {
    read_netpbm(path.as_ref(), b"P6", 3)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<ImageU8> {
    read_netpbm(path.as_ref(), b"P5", 1)
}

fn read_netpbm(path: &Path, magic: &[u8], channels: usize) -> Result<ImageU8> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(ImageError::Format(format!(
            "expected {} file",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut pos = 2;
    let w = read_header_int(&bytes, &mut pos)?;
    let h = read_header_int(&bytes, &mut pos)?;
    let maxval = read_header_int(&bytes, &mut pos)?;
    if maxval != 255 {
        return Err(ImageError::Format(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(ImageError::Format("missing header terminator".into()));
    }
    pos += 1;
    let n = w * h * channels;
    if bytes.len() - pos < n {
        return Err(ImageError::Format(format!(
            "payload truncated: need {n} bytes, have {}",
            bytes.len() - pos
        )));
    }
    Ok(ImageU8::from_data(w, h, channels, bytes[pos..pos + n].to_vec()))
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and # comments that run to end of line.
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(ImageError::Format("expected integer in header".into()));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).unwrap();
    text.parse::<usize>().map_err(|_| ImageError::Format(format!("bad integer {text}")))
}
