//! On-disk scene formats.
//!
//! A cube is a text header plus a raw payload:
//!
//! ```text
//! HGCUBE1
//! width = 40
//! height = 40
//! bands = 32
//! dtype = f32
//! layout = xyλ
//! byte_order = little-endian
//! payload = scene.hgcube.raw
//! ```
//!
//! The payload holds `width * height * bands` little-endian `f32` values with the band index
//! fastest, then `y`, then `x`. Label rasters use the magic `HGLAB1`, the keys `width`,
//! `height`, `dtype = u16`, `byte_order` and `payload`, and `width * height` little-endian `u16`
//! values with `y` fastest. `payload` is resolved relative to the header's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::{HsiCube, LabelMap};
use crate::{Error, Result};

pub const CUBE_MAGIC: &str = "HGCUBE1";
pub const LABEL_MAGIC: &str = "HGLAB1";

struct Header {
    fields: BTreeMap<String, String>,
}

impl Header {
    fn parse(text: &str, magic: &str, allowed: &[&str]) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(magic) {
            return Err(Error::Format(format!("header does not start with {magic}")));
        }
        let mut fields = BTreeMap::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !allowed.contains(&k) {
                return Err(Error::Format(format!("unknown header key `{k}`")));
            }
            if fields.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Format(format!("duplicate header key `{k}`")));
            }
        }
        for k in allowed {
            if !fields.contains_key(*k) {
                return Err(Error::Format(format!("missing header key `{k}`")));
            }
        }
        Ok(Self { fields })
    }

    fn get(&self, key: &str) -> &str {
        &self.fields[key]
    }

    fn extent(&self, key: &str) -> Result<usize> {
        match self.get(key).parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::Format(format!("`{key}` must be a positive integer, got `{}`", self.get(key)))),
        }
    }

    fn expect(&self, key: &str, value: &str) -> Result<()> {
        if self.get(key) != value {
            return Err(Error::Format(format!("`{key}` must be `{value}`, got `{}`", self.get(key))));
        }
        Ok(())
    }
}

fn payload_path(header: &Path, name: &str) -> PathBuf {
    header.parent().unwrap_or_else(|| Path::new("")).join(name)
}

fn payload_name(header: &Path) -> String {
    let file = header.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{file}.raw")
}

pub fn write_cube(path: impl AsRef<Path>, cube: &HsiCube) -> Result<()> {
    let path = path.as_ref();
    let name = payload_name(path);
    let header = format!(
        "{CUBE_MAGIC}\nwidth = {}\nheight = {}\nbands = {}\ndtype = f32\nlayout = xyλ\nbyte_order = little-endian\npayload = {name}\n",
        cube.width(),
        cube.height(),
        cube.bands()
    );
    let bytes: Vec<u8> = cube.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(payload_path(path, &name), bytes)?;
    fs::write(path, header)?;
    Ok(())
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let header = Header::parse(
        &fs::read_to_string(path)?,
        CUBE_MAGIC,
        &["width", "height", "bands", "dtype", "layout", "byte_order", "payload"],
    )?;
    header.expect("dtype", "f32")?;
    header.expect("layout", "xyλ")?;
    header.expect("byte_order", "little-endian")?;
    let (w, h, b) = (header.extent("width")?, header.extent("height")?, header.extent("bands")?);
    let bytes = fs::read(payload_path(path, header.get("payload")))?;
    let expected = w * h * b * 4;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch { expected, found: bytes.len() });
    }
    let values = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    HsiCube::from_vec(w, h, b, values)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    let path = path.as_ref();
    let name = payload_name(path);
    let header = format!(
        "{LABEL_MAGIC}\nwidth = {}\nheight = {}\ndtype = u16\nbyte_order = little-endian\npayload = {name}\n",
        labels.width(),
        labels.height()
    );
    let bytes: Vec<u8> = labels.labels().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(payload_path(path, &name), bytes)?;
    fs::write(path, header)?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let header = Header::parse(
        &fs::read_to_string(path)?,
        LABEL_MAGIC,
        &["width", "height", "dtype", "byte_order", "payload"],
    )?;
    header.expect("dtype", "u16")?;
    header.expect("byte_order", "little-endian")?;
    let (w, h) = (header.extent("width")?, header.extent("height")?);
    let bytes = fs::read(payload_path(path, header.get("payload")))?;
    if bytes.len() != w * h * 2 {
        return Err(Error::SizeMismatch { expected: w * h * 2, found: bytes.len() });
    }
    let values = bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
    LabelMap::new(w, h, values)
}

/// Loads a cube and its label raster, checking that their spatial extents agree.
pub fn load_scene(cube_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<(HsiCube, LabelMap)> {
    let cube = read_cube(cube_path)?;
    let labels = read_labels(label_path)?;
    labels.check_matches(&cube)?;
    Ok((cube, labels))
}

/// Writes `<base>.hgcube` and `<base>.hglab` (plus their `.raw` payloads); returns both header paths.
pub fn save_scene(base: impl AsRef<Path>, cube: &HsiCube, labels: &LabelMap) -> Result<(PathBuf, PathBuf)> {
    labels.check_matches(cube)?;
    let base = base.as_ref();
    let with_ext = |ext: &str| {
        let mut s = base.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    let (cube_path, label_path) = (with_ext(".hgcube"), with_ext(".hglab"));
    write_cube(&cube_path, cube)?;
    write_labels(&label_path, labels)?;
    Ok((cube_path, label_path))
}
