//! Image and depth-map file formats.
//!
//! Depth maps are either 16-bit grayscale PNG, where `depth_mm = raw / scale`
//! and raw 0 marks an invalid pixel, or a raw float map:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SBDM"
//! 4       1     version (1)
//! 5       1     byte order: b'L' little endian, b'B' big endian
//! 6       2     reserved, zero
//! 8       4     width  (u32, declared byte order)
//! 12      4     height (u32, declared byte order)
//! 16      4·w·h f32 depths in mm, row-major; <= 0 or non-finite is invalid
//! ```

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian, ReadBytesExt, WriteBytesExt};
use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::metrics::DepthMap;

pub const FLOAT_MAP_MAGIC: &[u8; 4] = b"SBDM";
pub const FLOAT_MAP_VERSION: u8 = 1;
pub const FLOAT_MAP_EXTENSION: &str = "dmap";
pub const DEFAULT_DEPTH_SCALE: f64 = 256.0;

/// How a depth file stores millimeters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DepthEncoding {
    /// 16-bit grayscale PNG, `depth_mm = raw / scale`.
    Png16 { scale: f64 },
    /// Raw `f32` map with a small header.
    FloatMap,
}

impl DepthEncoding {
    /// Picks the encoding from the file extension (`.dmap` = float map,
    /// anything else = PNG with the given scale).
    pub fn for_path(path: &Path, scale: f64) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case(FLOAT_MAP_EXTENSION) => DepthEncoding::FloatMap,
            _ => DepthEncoding::Png16 { scale },
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Decodes 8- or 16-bit RGB(A) or grayscale PNG bytes into `[0, 1]`.
/// Alpha is dropped; gray is replicated to three channels.
pub fn decode_image(bytes: &[u8], path: &Path) -> Result<Image> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| Error::decode(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let sixteen_bit = matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    if sixteen_bit {
        let data: Vec<f32> = img.to_rgb16().into_raw().iter().map(|&v| v as f32 / 65535.0).collect();
        Image::new(w, h, data).map_err(|e| Error::decode(path, e))
    } else {
        let rgb = img.to_rgb8();
        Image::from_rgb8(w, h, rgb.as_raw()).map_err(|e| Error::decode(path, e))
    }
}

pub fn load_image(path: &Path) -> Result<Image> {
    decode_image(&read_bytes(path)?, path)
}

/// 8-bit RGB PNG bytes, quantized with `round(v · 255)`.
pub fn encode_image_png(img: &Image) -> Vec<u8> {
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8()).expect("buffer size matches");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}

pub fn save_image(img: &Image, path: &Path) -> Result<()> {
    write_bytes(path, &encode_image_png(img))
}

/// A decoded depth map and the caller-facing warning for all-invalid files.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedDepth {
    pub depth: DepthMap,
    pub warning: Option<String>,
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("depth scale {scale} must be > 0")))
    }
}

pub fn decode_depth(bytes: &[u8], encoding: DepthEncoding, path: &Path) -> Result<LoadedDepth> {
    let depth = match encoding {
        DepthEncoding::Png16 { scale } => {
            check_scale(scale)?;
            let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
                .map_err(|e| Error::decode(path, e))?;
            let gray = match img {
                DynamicImage::ImageLuma16(g) => g,
                other => {
                    return Err(Error::decode(
                        path,
                        format!("expected 16-bit grayscale PNG, found {:?}", other.color()),
                    ))
                }
            };
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            let values = gray.into_raw().iter().map(|&raw| raw as f64 / scale).collect();
            DepthMap::new(w, h, values).map_err(|e| Error::decode(path, e))?
        }
        DepthEncoding::FloatMap => decode_float_map(bytes).map_err(|e| Error::decode(path, e))?,
    };
    let warning = (depth.valid_count() == 0).then(|| format!("{}: no valid depth pixels", path.display()));
    Ok(LoadedDepth { depth, warning })
}

pub fn load_depth(path: &Path, encoding: DepthEncoding) -> Result<LoadedDepth> {
    decode_depth(&read_bytes(path)?, encoding, path)
}

fn decode_float_map(bytes: &[u8]) -> std::result::Result<DepthMap, String> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| "truncated header")?;
    if &magic != FLOAT_MAP_MAGIC {
        return Err("bad magic".into());
    }
    let version = r.read_u8().map_err(|_| "truncated header")?;
    if version != FLOAT_MAP_VERSION {
        return Err(format!("unsupported float map version {version}"));
    }
    let order = r.read_u8().map_err(|_| "truncated header")?;
    let mut reserved = [0u8; 2];
    r.read_exact(&mut reserved).map_err(|_| "truncated header")?;
    let body = &bytes[8..];
    let read_u32 = |b: &[u8]| match order {
        b'L' => Ok(LittleEndian::read_u32(b)),
        b'B' => Ok(BigEndian::read_u32(b)),
        _ => Err(format!("unknown byte order tag {order:#04x}")),
    };
    if body.len() < 8 {
        return Err("truncated header".into());
    }
    let w = read_u32(&body[0..4])? as usize;
    let h = read_u32(&body[4..8])? as usize;
    let payload = &body[8..];
    let n = w.checked_mul(h).ok_or("dimensions overflow")?;
    if payload.len() != n * 4 {
        return Err(format!("payload holds {} bytes, expected {}", payload.len(), n * 4));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| match order {
            b'L' => LittleEndian::read_f32(c) as f64,
            _ => BigEndian::read_f32(c) as f64,
        })
        .collect();
    DepthMap::new(w, h, values).map_err(|e| e.to_string())
}

/// 16-bit PNG bytes with `raw = round(depth · scale)` (saturating), invalid = 0.
pub fn encode_depth_png16(depth: &DepthMap, scale: f64) -> Result<Vec<u8>> {
    check_scale(scale)?;
    let raw: Vec<u16> = depth
        .values()
        .iter()
        .zip(depth.mask())
        .map(|(&v, &ok)| if ok { (v * scale).round().clamp(1.0, 65535.0) as u16 } else { 0 })
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width() as u32, depth.height() as u32, raw).expect("buffer size matches");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    Ok(out.into_inner())
}

/// Little-endian float map bytes; invalid pixels are written as 0.
pub fn encode_float_map(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + depth.len() * 4);
    out.extend_from_slice(FLOAT_MAP_MAGIC);
    out.push(FLOAT_MAP_VERSION);
    out.push(b'L');
    out.extend_from_slice(&[0, 0]);
    out.write_u32::<LittleEndian>(depth.width() as u32).unwrap();
    out.write_u32::<LittleEndian>(depth.height() as u32).unwrap();
    for (&v, &ok) in depth.values().iter().zip(depth.mask()) {
        out.write_f32::<LittleEndian>(if ok { v as f32 } else { 0.0 }).unwrap();
    }
    out
}

pub fn save_depth(depth: &DepthMap, path: &Path, encoding: DepthEncoding) -> Result<()> {
    let bytes = match encoding {
        DepthEncoding::Png16 { scale } => encode_depth_png16(depth, scale)?,
        DepthEncoding::FloatMap => encode_float_map(depth),
    };
    write_bytes(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray8_png_replicates_channels() {
        let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(2, 1, vec![0, 255]).unwrap();
        let mut bytes = Cursor::new(Vec::new());
        buf.write_to(&mut bytes, ImageFormat::Png).unwrap();
        let img = decode_image(bytes.get_ref(), Path::new("g.png")).unwrap();
        assert_eq!(img.pixel(0, 0), [0.0; 3]);
        assert_eq!(img.pixel(1, 0), [1.0; 3]);
    }

    #[test]
    fn rgb16_png_normalizes() {
        let buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_raw(1, 1, vec![65535, 0, 32768]).unwrap();
        let mut bytes = Cursor::new(Vec::new());
        buf.write_to(&mut bytes, ImageFormat::Png).unwrap();
        let img = decode_image(bytes.get_ref(), Path::new("c.png")).unwrap();
        let p = img.pixel(0, 0);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.0);
        assert!((p[2] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn garbage_is_a_decode_error_with_path() {
        let err = decode_image(b"not a png", Path::new("x/y.png")).unwrap_err();
        assert!(matches!(err, Error::Decode { ref path, .. } if path == Path::new("x/y.png")));
        let err = decode_depth(b"SBDM\x01L\0\0", DepthEncoding::FloatMap, Path::new("d.dmap")).unwrap_err();
        assert!(matches!(err, Error::Decode { .. }));
    }

    #[test]
    fn png16_scale_and_invalid_zero() {
        let d = DepthMap::with_mask(2, 1, vec![100.0, 7.0], vec![true, false]).unwrap();
        let bytes = encode_depth_png16(&d, 256.0).unwrap();
        let back = decode_depth(&bytes, DepthEncoding::Png16 { scale: 256.0 }, Path::new("d.png")).unwrap();
        assert_eq!(back.depth.get(0, 0), Some(100.0));
        assert_eq!(back.depth.get(1, 0), None);
        assert!(back.warning.is_none());
    }

    #[test]
    fn png16_rejects_rgb() {
        let img = Image::gray(2, 2, 0.5);
        let err = decode_depth(&encode_image_png(&img), DepthEncoding::Png16 { scale: 256.0 }, Path::new("a.png"));
        assert!(err.is_err());
    }

    #[test]
    fn all_invalid_map_warns() {
        let d = DepthMap::new(2, 2, vec![0.0; 4]).unwrap();
        let back = decode_depth(&encode_float_map(&d), DepthEncoding::FloatMap, Path::new("z.dmap")).unwrap();
        assert!(back.warning.is_some());
    }

    #[test]
    fn float_map_big_endian_is_readable() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"SBDM\x01B\0\0");
        bytes.write_u32::<BigEndian>(2).unwrap();
        bytes.write_u32::<BigEndian>(1).unwrap();
        bytes.write_f32::<BigEndian>(12.5).unwrap();
        bytes.write_f32::<BigEndian>(-1.0).unwrap();
        let d = decode_depth(&bytes, DepthEncoding::FloatMap, Path::new("b.dmap")).unwrap().depth;
        assert_eq!(d.get(0, 0), Some(12.5));
        assert_eq!(d.get(1, 0), None);
    }

    #[test]
    fn float_map_header_layout() {
        let d = DepthMap::new(3, 2, vec![1.0; 6]).unwrap();
        let bytes = encode_float_map(&d);
        assert_eq!(&bytes[..8], b"SBDM\x01L\0\0");
        assert_eq!(&bytes[8..16], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 6 * 4);
        assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
    }

    #[test]
    fn encoding_from_extension() {
        assert_eq!(DepthEncoding::for_path(Path::new("a/b.dmap"), 256.0), DepthEncoding::FloatMap);
        assert_eq!(
            DepthEncoding::for_path(Path::new("a/b.png"), 100.0),
            DepthEncoding::Png16 { scale: 100.0 }
        );
    }
}
