//! Run configuration: global constants, data paths, precision and threads.
//!
//! Config files are plain `key=value` text; `#` starts a comment. Flags
//! override file values; defaults match the shipped data.

use crate::error::{Error, Result};
use crate::inputs::{DkTable, EpsilonTable, GlobalConstants, ZeroDensityTable, ZetaZeroFile};
use std::path::{Path, PathBuf};

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "CHEBBOUNDS_CONFIG";

#[derive(Clone, Debug, Default)]
pub struct DataPaths {
    pub epsilon_csv: Option<PathBuf>,
    pub zerodensity_csv: Option<PathBuf>,
    pub zeros_file: Option<PathBuf>,
    pub dk_fixtures: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub constants: GlobalConstants,
    pub paths: DataPaths,
    /// Working precision in significant decimal digits (6..=30).
    pub precision: usize,
    /// Worker threads; 0 means the library default.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            constants: GlobalConstants::default(),
            paths: DataPaths::default(),
            precision: crate::conservative::DEFAULT_DIGITS,
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Reads the file named by the environment variable, when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        for (ln, raw) in content.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: ln + 1,
                msg: "expected key=value".into(),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: ln + 1,
                msg: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fnum = || -> Result<f64> {
            value
                .parse()
                .map_err(|e| Error::Domain(format!("{key}: {e}")))
        };
        match key {
            "H" | "h" => self.constants.h = fnum()?,
            "R" | "r" => self.constants.r = fnum()?,
            "c0" => self.constants.c0 = fnum()?,
            "alpha" => self.constants.alpha = fnum()?,
            "x1" => {
                self.constants.x1 = fnum()?;
                self.constants.j = self.constants.x1.ln();
            }
            "J" | "j" => self.constants.j = fnum()?,
            "J0" | "j0" => self.constants.j0 = fnum()?,
            "K" | "k_cut" => self.constants.k_cut = fnum()?,
            "precision" => {
                self.precision = value
                    .parse()
                    .map_err(|e| Error::Domain(format!("precision: {e}")))?;
            }
            "threads" => {
                self.threads = value
                    .parse()
                    .map_err(|e| Error::Domain(format!("threads: {e}")))?;
            }
            "epsilon_csv" => self.paths.epsilon_csv = Some(PathBuf::from(value)),
            "zerodensity_csv" => self.paths.zerodensity_csv = Some(PathBuf::from(value)),
            "zeros_file" => self.paths.zeros_file = Some(PathBuf::from(value)),
            "dk_fixtures" => self.paths.dk_fixtures = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Domain(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(6..=30).contains(&self.precision) {
            return Err(Error::Domain(format!(
                "precision {} outside 6..=30",
                self.precision
            )));
        }
        for p in [
            &self.paths.epsilon_csv,
            &self.paths.zerodensity_csv,
            &self.paths.zeros_file,
            &self.paths.dk_fixtures,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("configured file {} does not exist", p.display()),
                )));
            }
        }
        Ok(())
    }

    /// Applies the configured working precision to the numerics layer.
    pub fn apply_precision(&self) -> Result<()> {
        crate::conservative::set_working_digits(self.precision)
    }

    pub fn epsilon_table(&self) -> Result<EpsilonTable> {
        match &self.paths.epsilon_csv {
            Some(p) => EpsilonTable::load(p),
            None => Ok(EpsilonTable::default_table()),
        }
    }

    pub fn zero_density_table(&self) -> Result<ZeroDensityTable> {
        match &self.paths.zerodensity_csv {
            Some(p) => ZeroDensityTable::load(p),
            None => Ok(ZeroDensityTable::default_table()),
        }
    }

    pub fn dk_table(&self) -> Result<DkTable> {
        match &self.paths.dk_fixtures {
            Some(p) => DkTable::load(p),
            None => Ok(DkTable::default_table()),
        }
    }

    pub fn zeros_file(&self) -> Result<ZetaZeroFile> {
        match &self.paths.zeros_file {
            Some(p) => ZetaZeroFile::load(p),
            None => Ok(ZetaZeroFile::default_file()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        let mut fh = std::fs::File::create(&path).unwrap();
        writeln!(fh, "# comment\nR = 5.6\nprecision= 12\nthreads =4").unwrap();
        drop(fh);
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.constants.r, 5.6);
        assert_eq!(cfg.precision, 12);
        assert_eq!(cfg.threads, 4);

        let bad = dir.path().join("bad.conf");
        std::fs::write(&bad, "precision=40\n").unwrap();
        assert!(RunConfig::load(&bad).is_err());
        let missing = dir.path().join("missing.conf");
        std::fs::write(&missing, "epsilon_csv=/nonexistent/file.csv\n").unwrap();
        assert!(RunConfig::load(&missing).is_err());
        let unknown = dir.path().join("unknown.conf");
        std::fs::write(&unknown, "frobnicate=1\n").unwrap();
        assert!(RunConfig::load(&unknown).is_err());
    }
}
