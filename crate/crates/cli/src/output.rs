use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use newton_planar::raster::RgbImage;
use newton_planar::Error;

use crate::args::Command;

/// A failed run together with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or out-of-domain parameters (exit 2).
    Usage(String),
    /// The map is outside what the requested analysis can handle (exit 3).
    Math(String),
    /// An output could not be written (exit 4).
    Output(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Math(_) => 3,
            Failure::Output(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Math(m) | Failure::Output(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::GridMismatch(_) => Failure::Usage(msg),
            Error::Format(_) => Failure::Output(msg),
            _ => Failure::Math(msg),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Fails early, before any computation, if `path` cannot be created.
pub fn check_writable(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    let meta = fs::metadata(&dir).map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display())))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        return Err(Failure::Output(format!("cannot write {}: {} is not a writable directory", path.display(), dir.display())));
    }
    if path.is_dir() {
        return Err(Failure::Output(format!("cannot write {}: it is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| Failure::Output(format!("cannot write {}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| Failure::Output(format!("{} is not a file path", path.display())))?;
    let tmp = parent_dir(path).join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fail)
}

pub fn image_format(path: &Path) -> CliResult<&'static str> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok("png"),
        Some("ppm") => Ok("ppm"),
        _ => Err(Failure::Usage(format!("image path {} must end in .png or .ppm", path.display()))),
    }
}

pub fn encode_image(img: &RgbImage, format: &str) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if format == "ppm" {
        img.write_ppm(&mut buf).map_err(|e| Failure::Output(e.to_string()))?;
        return Ok(buf);
    }
    let encoder = image::codecs::png::PngEncoder::new(&mut buf);
    image::ImageEncoder::write_image(encoder, &img.data, img.width as u32, img.height as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| Failure::Output(format!("png encoding failed: {e}")))?;
    Ok(buf)
}

pub fn write_image(path: &Path, img: &RgbImage) -> CliResult<()> {
    write_atomic(path, &encode_image(img, image_format(path)?)?)
}

pub fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

/// Everything needed to rerun a command: the resolved configuration, plus the
/// outputs it produced and a short summary of the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub config: Command,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

impl RunRecord {
    pub fn new(config: &Command, outputs: Vec<PathBuf>, summary: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            outputs,
            summary,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{} is not a run record: {e}", path.display())))
    }
}

/// `<path>.run.json`.
pub fn record_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/a.txt"), b"x").is_err());
        assert!(check_writable(&dir.path().join("missing/a.txt")).is_err());
        assert!(check_writable(&p).is_ok());
    }

    #[test]
    fn png_and_ppm_encodings() {
        let img = RgbImage::new(3, 2, [10, 20, 30]);
        let ppm = encode_image(&img, "ppm").unwrap();
        assert!(ppm.starts_with(b"P6\n3 2\n255\n"));
        let png = encode_image(&img, "png").unwrap();
        let back = image::load_from_memory(&png).unwrap().to_rgb8();
        assert_eq!(back.into_raw(), img.data);
        assert!(image_format(Path::new("x.jpg")).is_err());
        assert_eq!(record_path(Path::new("out/b.png")), PathBuf::from("out/b.png.run.json"));
    }
}
