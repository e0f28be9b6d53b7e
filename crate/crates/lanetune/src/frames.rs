//! PNG frames on disk and the two ways of naming a clip: a directory whose
//! frames are taken in filename order, or a list file of paths.

use std::fs;
use std::path::{Path, PathBuf};

use lanetune_core::image::FrameRgb;

use crate::error::{Error, Result};

pub fn read_frame(path: &Path) -> Result<FrameRgb> {
    let image = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_owned(),
            source,
        })?
        .into_rgb8();
    let (w, h) = (image.width() as usize, image.height() as usize);
    Ok(FrameRgb::from_rgb(w, h, image.into_raw())?)
}

pub fn write_frame(path: &Path, frame: &FrameRgb) -> Result<()> {
    let (w, h) = frame.dims();
    let buffer = image::RgbImage::from_raw(w as u32, h as u32, frame.to_rgb())
        .expect("frame buffer matches its dimensions");
    buffer
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_owned(),
            source,
        })
}

fn is_png(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Frames of a clip in processing order.
///
/// A directory yields its PNG files sorted by file name. Any other file is
/// read as a list of frame paths, one per line, kept in the given order;
/// blank lines and lines starting with `#` are skipped and relative paths
/// resolve against the list file's directory.
pub fn clip_frames(input: &Path) -> Result<Vec<PathBuf>> {
    let frames = if input.is_dir() {
        let mut found = Vec::new();
        for entry in fs::read_dir(input).map_err(|e| Error::io(input, e))? {
            let path = entry.map_err(|e| Error::io(input, e))?.path();
            if is_png(&path) {
                found.push(path);
            }
        }
        found.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        found
    } else {
        let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
        let base = input.parent().unwrap_or(Path::new(""));
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    if frames.is_empty() {
        return Err(Error::NoFrames(input.to_owned()));
    }
    Ok(frames)
}

/// File name an output frame is written under: the input's stem with a
/// `.png` extension.
pub fn output_name(input: &Path) -> PathBuf {
    let stem = input.file_stem().unwrap_or(input.as_os_str());
    Path::new(stem).with_extension("png")
}
