use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Serialize, Serializer};

use crate::CliError;

/// Inclusive sampling grid `start:stop:count`, log-spaced with a `log:`
/// prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count, log: false }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / n;
                if k == 0 {
                    self.start
                } else if k == self.count - 1 {
                    self.stop
                } else if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (log, body) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let grid = Grid {
            start: num(start)?,
            stop: num(stop)?,
            count: count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?,
            log,
        };
        if !grid.start.is_finite() || !grid.stop.is_finite() {
            return Err("grid bounds must be finite".into());
        }
        if grid.count == 0 {
            return Err("grid must have at least one point".into());
        }
        if grid.count > 1 && grid.stop <= grid.start {
            return Err("grid must be strictly increasing".into());
        }
        if grid.count == 1 && grid.stop != grid.start {
            return Err("a one-point grid needs start == stop".into());
        }
        if log && grid.start <= 0.0 {
            return Err("log grid needs a positive start".into());
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log {
            write!(f, "log:")?;
        }
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by the physics subcommands. Everything is optional here so
/// that values from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Cooperativity C = g²N/(2κγ)
    #[arg(long = "C", allow_negative_numbers = true)]
    pub cooperativity: Option<f64>,
    /// Intracavity intensity I = Ω²/γ²
    #[arg(long = "I", allow_negative_numbers = true)]
    pub intensity: Option<f64>,
    /// Normalised cavity detuning
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Cavity half-linewidth, units of γ
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Normalised two-photon detuning
    #[arg(long = "delta-bar", allow_negative_numbers = true)]
    pub delta_bar: Option<f64>,
    /// Ground-state decoherence rate, units of γ
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Atom number (only recorded)
    #[arg(long = "N")]
    pub atom_number: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [env: CPT_SIM_THREADS]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Classify stability from drift eigenvalues instead of the threshold
    /// formula
    #[arg(long)]
    pub exact_stability: bool,
    /// key=value file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parsed `key=value` file. Keys are flag names without the dashes.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key=value", n + 1)));
            };
            let key = k.trim().trim_start_matches('-').replace('_', "-");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Self { values, used: Default::default() })
    }

    /// `flag`, else the file value under `key`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.used.borrow_mut().push(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(self.pick(flag.then_some(true), key)?.unwrap_or(false))
    }

    /// Fails on keys that no lookup asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(k)) {
            Some(k) => Err(CliError::Config(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Fully resolved run settings, embedded in every output header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub cooperativity: f64,
    pub kappa: f64,
    pub phi: f64,
    pub delta_bar: f64,
    pub gamma0: f64,
    pub atom_number: Option<f64>,
    pub intensity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_range: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_range: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_range: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub format: Format,
    pub seed: u64,
    pub exact_stability: bool,
    // execution details that do not change the numbers
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 0;

impl RunConfig {
    /// Resolve shared flags against the config file and defaults.
    pub fn resolve(command: &'static str, args: &CommonArgs, file: &ConfigFile) -> Result<Self, CliError> {
        let d = cpt_core::SystemParams64::default();
        Ok(Self {
            command,
            cooperativity: file.pick(args.cooperativity, "C")?.unwrap_or(d.cooperativity),
            kappa: file.pick(args.kappa, "kappa")?.unwrap_or(d.kappa),
            phi: file.pick(args.phi, "phi")?.unwrap_or(d.phi),
            delta_bar: file.pick(args.delta_bar, "delta-bar")?.unwrap_or(d.delta_bar),
            gamma0: file.pick(args.gamma0, "gamma0")?.unwrap_or(d.gamma0),
            atom_number: file.pick(args.atom_number, "N")?,
            intensity: file.pick(args.intensity, "I")?.unwrap_or(144.0),
            delta_range: None,
            omega_range: None,
            phi_range: None,
            alpha: None,
            format: file.pick(args.format, "format")?.unwrap_or(Format::Csv),
            seed: file.pick(args.seed, "seed")?.unwrap_or(DEFAULT_SEED),
            exact_stability: file.flag(args.exact_stability, "exact-stability")?,
            threads: threads_setting(file.pick(args.threads, "threads")?)?,
            out: file.pick(args.out.clone(), "out")?,
        })
    }

    pub fn params(&self) -> Result<cpt_core::SystemParams64, CliError> {
        let mut p = cpt_core::SystemParams64::new(self.cooperativity, self.kappa, self.phi, self.delta_bar)
            .and_then(|p| p.with_gamma0(self.gamma0))
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(n) = self.atom_number {
            p = p.with_atom_number(n).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(p)
    }

    pub fn header(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

/// `--threads`, falling back to `CPT_SIM_THREADS`.
pub fn threads_setting(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("CPT_SIM_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|e| CliError::Config(format!("CPT_SIM_THREADS: {e}")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "-3:3:601".parse().unwrap();
        assert_eq!(g.points().len(), 601);
        assert_eq!(g.points()[300], 0.0);
        assert_eq!(*g.points().last().unwrap(), 3.0);
        let g: Grid = "log:1e-3:1:4".parse().unwrap();
        let p = g.points();
        assert!((p[1] - 1e-2).abs() < 1e-15 && (p[3] - 1.0).abs() < 1e-15);
        assert_eq!(g.to_string(), "log:0.001:1:4");
        for bad in ["1:2", "2:1:5", "0:1:0", "log:0:1:3", "a:1:2", "1:1:3", "1:2:1"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
        assert_eq!("0.5:0.5:1".parse::<Grid>().unwrap().points(), vec![0.5]);
    }

    #[test]
    fn file_values_fill_gaps_and_flags_win() {
        let file = ConfigFile::parse("# comment\nC = 250\nphi=0.5\n--seed=9\n").unwrap();
        let args = CommonArgs {
            phi: Some(2.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("steady", &args, &file).unwrap();
        file.finish().unwrap();
        assert_eq!(cfg.cooperativity, 250.0);
        assert_eq!(cfg.phi, 2.0);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        let file = ConfigFile::parse("C=1\nbogus=2\n").unwrap();
        RunConfig::resolve("steady", &CommonArgs::default(), &file).unwrap();
        assert!(file.finish().is_err());
        assert!(ConfigFile::parse("C").is_err());
        assert!(ConfigFile::parse("C=1\nC=2").is_err());
        let file = ConfigFile::parse("C=abc").unwrap();
        assert!(RunConfig::resolve("steady", &CommonArgs::default(), &file).is_err());
    }

    #[test]
    fn header_omits_execution_details() {
        let file = ConfigFile::default();
        let args = CommonArgs {
            threads: Some(3),
            out: Some("x.csv".into()),
            ..Default::default()
        };
        let h = RunConfig::resolve("spectrum", &args, &file).unwrap().header();
        assert!(!h.contains("threads") && !h.contains("x.csv"));
        assert!(h.starts_with("{\"command\":\"spectrum\""));
    }
}
