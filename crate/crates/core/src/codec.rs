//! Image and video file I/O.
//!
//! Binary PPM (`P6`, maxval up to 255) is always available; 8-bit PNG is
//! decoded and encoded through the `png` crate. A video is a directory of
//! frames, ordered by file name.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{quantize, Image, Raster8, VideoSequence};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 1 << 16;

fn is_ppm_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | b'\x0b' | b'\x0c')
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if is_ppm_space(b) {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut v: usize = 0;
        while let Some(&b) = self.data.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add(usize::from(b - b'0')))
                .filter(|&v| v <= u32::MAX as usize)
                .ok_or_else(|| Error::Decode(format!("PPM {what} is too large")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Decode(format!("PPM header: expected {what}")));
        }
        Ok(v)
    }
}

/// Decodes a binary `P6` file into an 8-bit raster.
pub fn decode_ppm(data: &[u8]) -> Result<Raster8> {
    if data.len() < 2 || &data[..2] != b"P6" {
        return Err(Error::Decode("not a binary PPM (missing P6 magic)".into()));
    }
    let mut r = HeaderReader { data, pos: 2 };
    match data.get(2) {
        Some(&b) if is_ppm_space(b) || b == b'#' => {}
        _ => return Err(Error::Decode("PPM header: expected whitespace after magic".into())),
    }
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Decode(format!("PPM has empty size {width}x{height}")));
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::Decode(format!("PPM size {width}x{height} exceeds limit")));
    }
    if maxval == 0 {
        return Err(Error::Decode("PPM maxval must be positive".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth(format!(
            "PPM maxval {maxval} needs 16-bit samples"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(r.pos) {
        Some(&b) if is_ppm_space(b) => r.pos += 1,
        _ => return Err(Error::Decode("PPM header: expected whitespace before raster".into())),
    }
    let len = width * height * 3;
    let raster = data
        .get(r.pos..r.pos + len)
        .ok_or_else(|| Error::Decode(format!(
            "PPM raster truncated: need {len} bytes, have {}",
            data.len() - r.pos
        )))?;
    let samples = if maxval == 255 {
        raster.to_vec()
    } else {
        raster
            .iter()
            .map(|&v| {
                if usize::from(v) > maxval {
                    Err(Error::Decode(format!("PPM sample {v} exceeds maxval {maxval}")))
                } else {
                    Ok(((usize::from(v) * 255 + maxval / 2) / maxval) as u8)
                }
            })
            .collect::<Result<_>>()?
    };
    Ok(Raster8 {
        height,
        width,
        channels: 3,
        data: samples,
    })
}

pub fn encode_ppm(r: &Raster8) -> Result<Vec<u8>> {
    if r.channels != 3 {
        return Err(Error::Shape(format!("PPM needs 3 channels, got {}", r.channels)));
    }
    let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.extend_from_slice(&r.data);
    Ok(out)
}

/// Decodes an 8-bit PNG, expanding palette and gray inputs to RGB and
/// dropping alpha.
pub fn decode_png(data: &[u8]) -> Result<Raster8> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(data));
    decoder.set_transformations(png::Transformations::EXPAND);
    decoder.set_limits(png::Limits { bytes: 1 << 28 });
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Decode(format!("PNG: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Decode("PNG: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Decode(format!("PNG: {e}")))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedBitDepth(format!(
            "PNG bit depth {:?}",
            info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let src_ch = info.color_type.samples();
    let buf = &buf[..info.buffer_size()];
    let mut rgb = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        let row = &buf[y * info.line_size..][..w * src_ch];
        for px in row.chunks_exact(src_ch) {
            match src_ch {
                1 | 2 => rgb.extend_from_slice(&[px[0]; 3]),
                _ => rgb.extend_from_slice(&px[..3]),
            }
        }
    }
    Ok(Raster8 {
        height: h,
        width: w,
        channels: 3,
        data: rgb,
    })
}

pub fn encode_png(r: &Raster8) -> Result<Vec<u8>> {
    let color = match r.channels {
        1 => png::ColorType::Grayscale,
        3 => png::ColorType::Rgb,
        4 => png::ColorType::Rgba,
        c => return Err(Error::Shape(format!("cannot write {c}-channel PNG"))),
    };
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, r.width as u32, r.height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| Error::Decode(format!("PNG: {e}")))?;
        w.write_image_data(&r.data)
            .map_err(|e| Error::Decode(format!("PNG: {e}")))?;
    }
    Ok(out)
}

/// Decodes PPM or PNG bytes, chosen by magic number, into an RGB image.
pub fn decode_image(data: &[u8]) -> Result<Image> {
    let raster = if data.starts_with(PNG_MAGIC) {
        decode_png(data)?
    } else if data.starts_with(b"P6") {
        decode_ppm(data)?
    } else {
        return Err(Error::Decode("unrecognized image format (expected P6 PPM or PNG)".into()));
    };
    Ok(raster.to_image())
}

fn is_png_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| e.in_file(path))
}

/// Writes bytes to a temporary sibling and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Quantizes and writes PNG for `.png` paths, PPM otherwise.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raster = quantize(img);
    let bytes = if is_png_path(path) {
        encode_png(&raster)?
    } else {
        encode_ppm(&raster)?
    };
    write_atomic(path, &bytes)
}

fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| ["ppm", "png"].iter().any(|x| e.eq_ignore_ascii_case(x)))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loads every `.ppm`/`.png` in `dir`, in lexicographic file-name order.
pub fn load_video(dir: impl AsRef<Path>) -> Result<VideoSequence> {
    let dir = dir.as_ref();
    let files = frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::File {
            path: dir.to_path_buf(),
            source: Box::new(Error::Decode("no frames found".into())),
        });
    }
    let frames = files.iter().map(load_image).collect::<Result<Vec<_>>>()?;
    VideoSequence::new(frames).map_err(|e| e.in_file(dir))
}

/// Writes `frame_0000.<ext>`, `frame_0001.<ext>`, ... into `dir`, creating it
/// if needed.
pub fn save_video(video: &VideoSequence, dir: impl AsRef<Path>, ext: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = video.frame_count().to_string().len().max(4);
    video
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(format!("frame_{i:0width$}.{ext}"));
            save_image(f, &path)?;
            Ok(path)
        })
        .collect()
}
