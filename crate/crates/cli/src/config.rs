//! Run configuration: flat `key = value` text or a JSON object with the
//! same dotted keys. Every parameter is validated before any computation
//! and error messages name the offending key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rshe_core::grid::{make_grid, GridSpec};
use rshe_core::noise::NoiseSpec;
use rshe_core::scheme::SchemeConfig;
use rshe_core::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid_n: usize,
    pub cutoff: Option<usize>,
    pub lambda: f64,
    pub seed: u64,
    pub h: f64,
    pub t_horizon: f64,
    pub paths: usize,
    pub record_every: usize,
    pub zero_noise: bool,
    pub t_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub levels: usize,
    pub probes: usize,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub out_dir: Option<PathBuf>,
    pub sample_file: Option<PathBuf>,
    pub properties_functions: usize,
    pub properties_triples: usize,
    pub properties_pairs: usize,
    pub properties_noise_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_n: 64,
            cutoff: None,
            lambda: 0.75,
            seed: 0x5EED_2026,
            h: 1e-3,
            t_horizon: 0.5,
            paths: 1000,
            record_every: 1,
            zero_noise: false,
            t_grid: vec![0.02, 0.04, 0.08, 0.16, 0.32, 0.64, 1.0],
            eps_grid: vec![0.05, 0.02, 0.01, 0.005],
            levels: 4,
            probes: 3,
            alpha: 40.0,
            delta: 0.05,
            epsilon: 0.0,
            out_dir: None,
            sample_file: None,
            properties_functions: 10_000,
            properties_triples: 1_000,
            properties_pairs: 1_000,
            properties_noise_samples: 100_000,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let map = if text.trim_start().starts_with('{') {
            parse_json(&text)?
        } else {
            parse_flat(&text)?
        };
        RunConfig::from_map(map)
    }

    fn from_map(map: BTreeMap<String, String>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (key, value) in &map {
            match key.as_str() {
                "grid.n" => cfg.grid_n = parse(key, value)?,
                "modes.cutoff" => cfg.cutoff = Some(parse(key, value)?),
                "noise.lambda" => cfg.lambda = parse(key, value)?,
                "noise.seed" => cfg.seed = parse(key, value)?,
                "noise.zero" => cfg.zero_noise = parse(key, value)?,
                "scheme.h" => cfg.h = parse(key, value)?,
                "scheme.T" => cfg.t_horizon = parse(key, value)?,
                "scheme.record_every" => cfg.record_every = parse(key, value)?,
                "ensemble.paths" => cfg.paths = parse(key, value)?,
                "t_grid" => cfg.t_grid = parse_list(key, value)?,
                "eps_grid" => cfg.eps_grid = parse_list(key, value)?,
                "levels" => cfg.levels = parse(key, value)?,
                "probes" => cfg.probes = parse(key, value)?,
                "alpha" => cfg.alpha = parse(key, value)?,
                "delta" => cfg.delta = parse(key, value)?,
                "epsilon" => cfg.epsilon = parse(key, value)?,
                "output.dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "bridge.sample_file" => cfg.sample_file = Some(PathBuf::from(value)),
                "properties.functions" => cfg.properties_functions = parse(key, value)?,
                "properties.triples" => cfg.properties_triples = parse(key, value)?,
                "properties.pairs" => cfg.properties_pairs = parse(key, value)?,
                "properties.noise_samples" => cfg.properties_noise_samples = parse(key, value)?,
                _ => return Err(Error::Config(format!("unknown configuration key: {key}"))),
            }
        }
        Ok(cfg)
    }

    /// Grid, rejecting odd or out-of-range sizes.
    pub fn grid(&self) -> Result<GridSpec> {
        make_grid(self.grid_n)
    }

    /// Noise specification; the cutoff defaults to the grid Nyquist.
    pub fn noise(&self) -> Result<NoiseSpec> {
        let grid = self.grid()?;
        let cutoff = self.cutoff.unwrap_or_else(|| grid.nyquist_cutoff());
        if cutoff > grid.nyquist_cutoff() {
            return Err(Error::Config(format!(
                "modes.cutoff {} exceeds n/2 - 1 = {}",
                cutoff,
                grid.nyquist_cutoff()
            )));
        }
        NoiseSpec::new(self.lambda, cutoff, self.seed)
    }

    /// Full scheme configuration with every invariant validated.
    pub fn scheme(&self) -> Result<SchemeConfig> {
        if self.paths < 1 {
            return Err(Error::Config("ensemble.paths must be >= 1".to_string()));
        }
        Ok(SchemeConfig::new(self.grid()?, self.noise()?, self.h, self.t_horizon)?
            .with_record_every(self.record_every))
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse value {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse(key, v))
        .collect::<Result<Vec<f64>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config(format!("{key}: empty list")))
            } else {
                Ok(v)
            }
        })
}

fn parse_flat(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line {}: expected key = value", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_json(text: &str) -> Result<BTreeMap<String, String>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("config JSON must be an object".to_string()))?;
    let mut map = BTreeMap::new();
    for (key, v) in obj {
        flatten_json(key, v, &mut map)?;
    }
    Ok(map)
}

/// Accepts both flat dotted keys and nested objects encoding the same keys.
fn flatten_json(
    key: &str,
    value: &serde_json::Value,
    map: &mut BTreeMap<String, String>,
) -> Result<()> {
    match value {
        serde_json::Value::Object(inner) => {
            for (k, v) in inner {
                flatten_json(&format!("{key}.{k}"), v, map)?;
            }
            Ok(())
        }
        serde_json::Value::Array(items) => {
            let rendered: Vec<String> = items
                .iter()
                .map(|v| match v {
                    serde_json::Value::Number(n) => Ok(n.to_string()),
                    _ => Err(Error::Config(format!("{key}: lists must be numeric"))),
                })
                .collect::<Result<_>>()?;
            map.insert(key.to_string(), rendered.join(","));
            Ok(())
        }
        serde_json::Value::Number(n) => {
            map.insert(key.to_string(), n.to_string());
            Ok(())
        }
        serde_json::Value::Bool(b) => {
            map.insert(key.to_string(), b.to_string());
            Ok(())
        }
        serde_json::Value::String(s) => {
            map.insert(key.to_string(), s.clone());
            Ok(())
        }
        serde_json::Value::Null => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_json_encodings_agree() {
        let flat = parse_flat("grid.n = 32\nnoise.lambda = 0.8 # comment\nt_grid = 0.1, 0.2\n").unwrap();
        let json = parse_json(r#"{"grid": {"n": 32}, "noise.lambda": 0.8, "t_grid": [0.1, 0.2]}"#)
            .unwrap();
        let a = RunConfig::from_map(flat).unwrap();
        let b = RunConfig::from_map(json).unwrap();
        for cfg in [&a, &b] {
            assert_eq!(cfg.grid_n, 32);
            assert_eq!(cfg.lambda, 0.8);
            assert_eq!(cfg.t_grid, vec![0.1, 0.2]);
        }
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let map = parse_flat("grid.m = 32\n").unwrap();
        let err = RunConfig::from_map(map).unwrap_err();
        assert!(err.to_string().contains("grid.m"), "{err}");
    }

    #[test]
    fn lambda_below_half_names_the_key() {
        let map = parse_flat("noise.lambda = 0.3\n").unwrap();
        let cfg = RunConfig::from_map(map).unwrap();
        let err = cfg.noise().unwrap_err();
        assert!(err.to_string().contains("noise.lambda must exceed 0.5"), "{err}");
    }
}
