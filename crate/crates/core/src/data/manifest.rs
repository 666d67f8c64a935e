use std::path::{Path, PathBuf};

use crate::{Error, Result};

pub const MANIFEST_HEADER: &str = "video,audio,label";

/// One clip pair; label 1 is the positive class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRow {
    pub video: PathBuf,
    pub audio: PathBuf,
    pub label: usize,
}

/// CSV with header `video,audio,label`. Relative paths resolve against the
/// manifest's own directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Format("manifest has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.video.as_os_str().is_empty() || r.audio.as_os_str().is_empty() {
                return Err(Error::Format(format!("manifest row {i}: empty path")));
            }
            if r.label > 1 {
                return Err(Error::Format(format!("manifest row {i}: label {} not in {{0, 1}}", r.label)));
            }
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
            other => {
                return Err(Error::Format(format!(
                    "manifest header must be '{MANIFEST_HEADER}', found {:?}",
                    other.map(|(_, l)| l)
                )))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [video, audio, label] = fields[..] else {
                return Err(Error::Format(format!("manifest line {}: expected 3 fields", n + 1)));
            };
            let label = match label {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Format(format!("manifest line {}: label '{other}' not 0 or 1", n + 1))),
            };
            let resolve = |p: &str| if p.is_empty() { PathBuf::new() } else { base.join(p) };
            rows.push(ManifestRow { video: resolve(video), audio: resolve(audio), label });
        }
        Self::new(rows)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// Paths are written relative to `base` where possible.
    pub fn to_csv(&self, base: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
        let mut s = format!("{MANIFEST_HEADER}\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", rel(&r.video), rel(&r.audio), r.label));
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(path.parent().unwrap_or(Path::new(""))))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_resolve() {
        let m = Manifest::parse("video,audio,label\nv0.ntc,a0.wav,0\nsub/v1.ntc,a1.wav,1\n", Path::new("/d")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rows[1].video, PathBuf::from("/d/sub/v1.ntc"));
        assert_eq!(m.labels(), vec![0, 1]);
        assert_eq!(m.to_csv(Path::new("/d")), "video,audio,label\nv0.ntc,a0.wav,0\nsub/v1.ntc,a1.wav,1\n");
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        for text in [
            "",
            "video,audio,label\n",
            "a,b,c\nv,a,0\n",
            "video,audio,label\nv,a,2\n",
            "video,audio,label\nv,a\n",
            "video,audio,label\n,a,1\n",
        ] {
            assert!(matches!(Manifest::parse(text, base), Err(Error::Format(_))), "{text:?}");
        }
    }
}
