//! Plain-text `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma-separated,
//! except `models` and `martingale_models`, which are `;`-separated because
//! model specs contain commas. Numbers may be written as fractions (`8/3`).
//! The reference constants `c`, `C`, `C1`, `beta` and `K` have no defaults.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LoclabError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Constants {
    pub c: Option<f64>,
    #[serde(rename = "C")]
    pub big_c: Option<f64>,
    #[serde(rename = "C1")]
    pub c1: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "K")]
    pub kls_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub seed: u64,
    pub n_paths: usize,
    pub h: f64,
    pub models: Vec<String>,
    pub times: Vec<f64>,
    pub tail_threshold: f64,
    pub moment_p: Vec<f64>,
    pub ef_d0: Vec<f64>,
    pub ef_r0: f64,
    pub ef_times: Vec<f64>,
    pub oracle_dims: Vec<usize>,
    pub oracle_times: Vec<f64>,
    pub oracle_paths: usize,
    pub martingale_models: Vec<String>,
    pub martingale_horizon: f64,
    pub martingale_paths: usize,
    pub potential_d0: Vec<f64>,
    pub potential_r0: Vec<f64>,
    pub grid_points: usize,
    pub ladder_ln_p: f64,
    pub ladder_ln_n: f64,
    pub gronwall_p_min: f64,
    pub gronwall_p_max: f64,
    pub gronwall_p_points: usize,
    pub constants: Constants,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            n_paths: 10_000,
            h: 1e-3,
            models: vec![
                "gaussian(8)".into(),
                "product(uniform*8)".into(),
                "product(dexp*8)".into(),
                "product(uniform*4,dexp*4)".into(),
            ],
            times: vec![0.05, 0.1, 0.2, 0.375, 1.0],
            tail_threshold: 8.0 / 3.0,
            moment_p: vec![1.0, 2.0, 3.0, 4.0],
            ef_d0: vec![5.0, 50.0],
            ef_r0: 8.0 / 3.0,
            ef_times: vec![0.1, 0.2, 0.4],
            oracle_dims: vec![1, 4, 16],
            oracle_times: vec![0.1, 0.5, 1.0],
            oracle_paths: 8,
            martingale_models: vec!["gaussian(1)".into(), "product(uniform*4)".into()],
            martingale_horizon: 0.25,
            martingale_paths: 10_000,
            potential_d0: vec![5.0, 10.0, 50.0, 1000.0],
            potential_r0: vec![7.0 / 3.0, 2.5, 8.0 / 3.0],
            grid_points: 10_000,
            ladder_ln_p: 125.0,
            ladder_ln_n: 1e300,
            gronwall_p_min: 1e3,
            gronwall_p_max: 1e6,
            gronwall_p_points: 61,
            constants: Constants::default(),
            base_dir: None,
        }
    }
}

/// Parses a float or a fraction `a/b`.
pub fn parse_number(v: &str) -> Option<f64> {
    match v.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => v.parse().ok(),
    }
}

fn list<T>(v: &str, sep: char, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    v.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

impl Config {
    /// Parses `text` on top of the defaults.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Config> {
        let mut cfg = Config { base_dir: base_dir.map(Path::to_path_buf), ..Config::default() };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LoclabError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| LoclabError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoclabError::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text, path.parent())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let bad = || format!("bad value '{v}' for {key}");
        let num = || parse_number(v).ok_or_else(bad);
        let count = || v.parse::<usize>().map_err(|_| bad());
        let nums = || list(v, ',', parse_number).ok_or_else(bad);
        let opt = || if v.is_empty() { Ok(None) } else { parse_number(v).map(Some).ok_or_else(bad) };
        match key {
            "seed" => self.seed = v.parse().map_err(|_| bad())?,
            "n_paths" => self.n_paths = count()?,
            "h" => self.h = num()?,
            "models" => self.models = list(v, ';', |s| Some(s.to_string())).ok_or_else(bad)?,
            "times" => self.times = nums()?,
            "tail_threshold" => self.tail_threshold = num()?,
            "moment_p" => self.moment_p = nums()?,
            "ef_d0" => self.ef_d0 = nums()?,
            "ef_r0" => self.ef_r0 = num()?,
            "ef_times" => self.ef_times = nums()?,
            "oracle_dims" => self.oracle_dims = list(v, ',', |s| s.parse().ok()).ok_or_else(bad)?,
            "oracle_times" => self.oracle_times = nums()?,
            "oracle_paths" => self.oracle_paths = count()?,
            "martingale_models" => self.martingale_models = list(v, ';', |s| Some(s.to_string())).ok_or_else(bad)?,
            "martingale_horizon" => self.martingale_horizon = num()?,
            "martingale_paths" => self.martingale_paths = count()?,
            "potential_d0" => self.potential_d0 = nums()?,
            "potential_r0" => self.potential_r0 = nums()?,
            "grid_points" => self.grid_points = count()?,
            "ladder_ln_p" => self.ladder_ln_p = num()?,
            "ladder_ln_n" => self.ladder_ln_n = num()?,
            "gronwall_p_min" => self.gronwall_p_min = num()?,
            "gronwall_p_max" => self.gronwall_p_max = num()?,
            "gronwall_p_points" => self.gronwall_p_points = count()?,
            "c" => self.constants.c = opt()?,
            "C" => self.constants.big_c = opt()?,
            "C1" => self.constants.c1 = opt()?,
            "beta" => self.constants.beta = opt()?,
            "K" => self.constants.kls_k = opt()?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(LoclabError::Config(m.to_string()));
        if self.n_paths == 0 || self.oracle_paths == 0 {
            return fail("path counts must be positive");
        }
        if self.martingale_paths < 100 {
            return fail("martingale_paths must be at least 100");
        }
        if !(self.h > 0.0) {
            return fail("h must be positive");
        }
        if self.models.is_empty() {
            return fail("models must not be empty");
        }
        if self.moment_p.iter().any(|&p| !(p >= 1.0)) {
            return fail("moment_p entries must be at least 1");
        }
        if !(self.tail_threshold > 0.0) {
            return fail("tail_threshold must be positive");
        }
        if self.ef_times.first().is_some_and(|&t| !(t > 0.0)) {
            return fail("ef_times must start above 0");
        }
        if self.grid_points < 1000 {
            return fail("grid_points must be at least 1000");
        }
        if !(self.gronwall_p_min > 1.0 && self.gronwall_p_min <= self.gronwall_p_max && self.gronwall_p_points >= 2) {
            return fail("bad gronwall p range");
        }
        for (name, v) in [
            ("c", self.constants.c),
            ("C", self.constants.big_c),
            ("C1", self.constants.c1),
            ("beta", self.constants.beta),
        ] {
            if v.is_some_and(|x| !(x > 0.0)) {
                return fail(&format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    /// Union of `times` and `ef_times`, sorted.
    pub fn matrix_schedule(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.times.iter().chain(&self.ef_times).copied().collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    pub fn require_c1(&self) -> Result<f64> {
        self.constants
            .c1
            .ok_or_else(|| LoclabError::Config("C1 must be set (no default is assumed)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_fractions() {
        let cfg = Config::parse(
            "# reduced\nseed = 7\nn_paths=200\nmodels = gaussian(2); product(uniform*2,dexp*1)\nef_r0 = 8/3\nC1 = 1\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.n_paths, 200);
        assert_eq!(cfg.models, vec!["gaussian(2)", "product(uniform*2,dexp*1)"]);
        assert_eq!(cfg.ef_r0, 8.0 / 3.0);
        assert_eq!(cfg.constants.c1, Some(1.0));
        assert_eq!(cfg.constants.c, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(Config::parse("speed = 3", None), Err(LoclabError::Config(_))));
        assert!(matches!(Config::parse("h = fast", None), Err(LoclabError::Config(_))));
        assert!(matches!(Config::parse("h = -1", None), Err(LoclabError::Config(_))));
        assert!(matches!(Config::parse("just words", None), Err(LoclabError::Config(_))));
    }

    #[test]
    fn matrix_schedule_is_a_sorted_union() {
        let cfg = Config::default();
        assert_eq!(cfg.matrix_schedule(), vec![0.05, 0.1, 0.2, 0.375, 0.4, 1.0]);
    }

    #[test]
    fn constants_have_no_defaults() {
        let cfg = Config::default();
        assert_eq!(cfg.constants, Constants::default());
        assert!(cfg.require_c1().is_err());
    }
}
