//! Flag/config-file resolution and the resolved-config record that
//! accompanies every run.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Simple `key = value` file mirroring the long option names; `#` starts
/// a comment. Values from the command line take precedence.
pub fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                lineno + 1
            );
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn take_f64(map: &HashMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(s) => Ok(Some(
            s.parse::<f64>()
                .with_context(|| format!("config key `{key}`: bad number `{s}`"))?,
        )),
    }
}

pub fn take_usize(map: &HashMap<String, String>, key: &str) -> Result<Option<usize>> {
    match map.get(key) {
        None => Ok(None),
        Some(s) => Ok(Some(
            s.parse::<usize>()
                .with_context(|| format!("config key `{key}`: bad integer `{s}`"))?,
        )),
    }
}

pub fn take_u64(map: &HashMap<String, String>, key: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(s) => Ok(Some(
            s.parse::<u64>()
                .with_context(|| format!("config key `{key}`: bad integer `{s}`"))?,
        )),
    }
}

pub fn take_pair(map: &HashMap<String, String>, key: &str) -> Result<Option<(f64, f64)>> {
    match map.get(key) {
        None => Ok(None),
        Some(s) => Ok(Some(parse_pair(s)?)),
    }
}

pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let Some((a, b)) = s.split_once(',') else {
        bail!("expected `x,y`, got `{s}`");
    };
    Ok((
        a.trim().parse::<f64>().with_context(|| format!("bad number `{a}`"))?,
        b.trim().parse::<f64>().with_context(|| format!("bad number `{b}`"))?,
    ))
}

/// The full configuration a run resolved to (flags merged over config
/// file over defaults). Serialized next to file outputs so any artifact
/// can be reproduced; round-trips losslessly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ResolvedConfig {
    pub command: String,
    pub r: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_keep: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent_starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirm: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parses_and_ignores_comments() {
        let dir = std::env::temp_dir().join("pzmap-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "# comment\nr = 0.5\nbeta=2.0\ninit = 0.32,0.82\n").unwrap();
        let map = load_config_file(&path).unwrap();
        assert_eq!(take_f64(&map, "r").unwrap(), Some(0.5));
        assert_eq!(take_f64(&map, "beta").unwrap(), Some(2.0));
        assert_eq!(take_pair(&map, "init").unwrap(), Some((0.32, 0.82)));
        assert_eq!(take_f64(&map, "gamma").unwrap(), None);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ResolvedConfig {
            command: "sweep".into(),
            r: 0.5,
            beta: 2.0,
            gamma: 1.0,
            theta_lo: Some(0.01),
            theta_hi: Some(2.0),
            steps: Some(400),
            init: Some((0.1234567890123456, 0.82)),
            n: Some(10_000),
            burn_in: Some(0.5),
            tail_keep: Some(100),
            seed: Some(42),
            format: "csv".into(),
            output: Some("out.csv".into()),
            ..Default::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ResolvedConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
