use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Densities, comma separated or repeated
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub a: Vec<f64>,
    #[arg(long)]
    pub a_min: Option<f64>,
    #[arg(long)]
    pub a_max: Option<f64>,
    /// Number of intervals between --a-min and --a-max
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of Hermite functions
    #[arg(long)]
    pub n: Option<usize>,
    /// Lattice radius (sigma-check: truncation radius)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Sampling prefactor
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Radial step of the planar quadrature
    #[arg(long)]
    pub grid: Option<f64>,
    /// Integration margin beyond the extremal radius
    #[arg(long)]
    pub margin: Option<f64>,
    /// Disc radius of the sigma growth check
    #[arg(long)]
    pub test_radius: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed for iteration start vectors
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat key=value file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

const KEYS: &[&str] = &[
    "a",
    "a-min",
    "a-max",
    "steps",
    "n",
    "rho",
    "c0",
    "eps",
    "grid",
    "margin",
    "test-radius",
    "out",
    "format",
    "workers",
    "seed",
    "quick",
];

/// Parses `key = value` lines; `#` starts a comment. Keys are the long flag
/// names without the leading dashes.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(bad(format!("config line {}: unknown key `{}`", i + 1, k.trim())));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(bad(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(map)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| bad(format!("config key `{key}`: cannot parse `{v}`")))
}

/// Fills unset flags from the config entries.
pub fn merge(flags: &Flags, file: &BTreeMap<String, String>) -> Result<Flags, ConfigError> {
    let mut out = flags.clone();
    for (k, v) in file {
        match k.as_str() {
            "a" if out.a.is_empty() => {
                out.a = v
                    .split(',')
                    .map(|s| parse(k, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "a-min" if out.a_min.is_none() => out.a_min = Some(parse(k, v)?),
            "a-max" if out.a_max.is_none() => out.a_max = Some(parse(k, v)?),
            "steps" if out.steps.is_none() => out.steps = Some(parse(k, v)?),
            "n" if out.n.is_none() => out.n = Some(parse(k, v)?),
            "rho" if out.rho.is_none() => out.rho = Some(parse(k, v)?),
            "c0" if out.c0.is_none() => out.c0 = Some(parse(k, v)?),
            "eps" if out.eps.is_none() => out.eps = Some(parse(k, v)?),
            "grid" if out.grid.is_none() => out.grid = Some(parse(k, v)?),
            "margin" if out.margin.is_none() => out.margin = Some(parse(k, v)?),
            "test-radius" if out.test_radius.is_none() => out.test_radius = Some(parse(k, v)?),
            "out" if out.out.is_none() => out.out = Some(PathBuf::from(v)),
            "format" if out.format.is_none() => {
                out.format = Some(Format::from_str(v, true).map_err(|_| bad(format!("config key `format`: `{v}`")))?)
            }
            "workers" if out.workers.is_none() => out.workers = Some(parse(k, v)?),
            "seed" if out.seed.is_none() => out.seed = Some(parse(k, v)?),
            "quick" if !out.quick => out.quick = parse(k, v)?,
            _ => {}
        }
    }
    Ok(out)
}

pub fn load(flags: &Flags) -> Result<Flags, ConfigError> {
    match &flags.config {
        Some(path) => {
            let text = read(path)?;
            merge(flags, &parse_config_text(&text)?)
        }
        None => Ok(flags.clone()),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))
}

/// Density list from `--a` or from `a_min + k (a_max - a_min) / steps`,
/// `k = 0..=steps`.
pub fn densities(flags: &Flags, default_range: Option<(f64, f64, usize)>) -> Result<Vec<f64>, ConfigError> {
    let range = match (flags.a_min, flags.a_max, flags.steps) {
        (None, None, None) => None,
        (Some(lo), Some(hi), steps) => Some((lo, hi, steps.unwrap_or(1))),
        (lo, hi, steps) => match default_range {
            Some((dlo, dhi, dsteps)) => Some((lo.unwrap_or(dlo), hi.unwrap_or(dhi), steps.unwrap_or(dsteps))),
            None => return Err(bad("--a-min and --a-max must be given together")),
        },
    };
    if !flags.a.is_empty() {
        if range.is_some() {
            return Err(bad("--a cannot be combined with --a-min/--a-max/--steps"));
        }
        return Ok(flags.a.clone());
    }
    let (lo, hi, steps) = match range.or(default_range) {
        Some(r) => r,
        None => return Err(bad("no densities given; use --a or --a-min/--a-max")),
    };
    if steps == 0 {
        return Err(bad("--steps must be at least 1"));
    }
    if !(lo <= hi) {
        return Err(bad(format!("--a-min {lo} exceeds --a-max {hi}")));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    Ok((0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .collect())
}

pub fn check_frame_densities(a: &[f64]) -> Result<(), ConfigError> {
    match a.iter().find(|&&x| !(x > 0.5 && x < 1.0)) {
        Some(x) => Err(bad(format!("density a = {x} must lie in (0.5, 1)"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let m = parse_config_text("# sweep\na-min = 0.6\nsteps=7 # intervals\n\nformat = json\n").unwrap();
        assert_eq!(m["a-min"], "0.6");
        assert_eq!(m["steps"], "7");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("n 12").is_err());
        assert!(parse_config_text("n=1\nn=2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let flags = Flags {
            n: Some(40),
            ..Flags::default()
        };
        let file = parse_config_text("n = 80\nseed = 9\na = 0.7,0.8").unwrap();
        let m = merge(&flags, &file).unwrap();
        assert_eq!(m.n, Some(40));
        assert_eq!(m.seed, Some(9));
        assert_eq!(m.a, vec![0.7, 0.8]);
        assert!(merge(&Flags::default(), &parse_config_text("n = x").unwrap()).is_err());
    }

    #[test]
    fn density_ranges() {
        let f = Flags {
            a_min: Some(0.6),
            a_max: Some(0.95),
            steps: Some(7),
            ..Flags::default()
        };
        let a = densities(&f, None).unwrap();
        assert_eq!(a.len(), 8);
        assert!((a[1] - 0.65).abs() < 1e-15 && (a[7] - 0.95).abs() < 1e-15);
        let zero = Flags {
            steps: Some(0),
            ..f.clone()
        };
        assert!(densities(&zero, None).is_err());
        let both = Flags {
            a: vec![0.7],
            ..f
        };
        assert!(densities(&both, None).is_err());
        assert!(densities(&Flags::default(), None).is_err());
        assert_eq!(densities(&Flags::default(), Some((0.6, 0.8, 2))).unwrap().len(), 3);
        assert!(check_frame_densities(&[0.7, 1.0]).is_err());
    }
}
