//! Parsers for the small string formats accepted on the command line.

use std::path::{Path, PathBuf};

use gadmp::manifold::ManifoldDescriptor;
use gadmp::{Error, Result};

pub fn descriptor(s: &str) -> Result<ManifoldDescriptor> {
    s.parse()
}

/// `1.5`, `2tau`, `0.5τ` or `2*tau`; multiples are of `tau`.
pub fn time(s: &str, tau: f64) -> Result<f64> {
    let s = s.trim();
    let (number, scale) = match s.strip_suffix("tau").or_else(|| s.strip_suffix('τ')) {
        Some(rest) => (rest.trim_end_matches('*').trim(), tau),
        None => (s, 1.0),
    };
    let value = if number.is_empty() { 1.0 } else { float(number, "time")? };
    let t = value * scale;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got '{s}'")));
    }
    Ok(t)
}

pub fn float(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("{what}: cannot parse '{s}' as a number")))
}

pub fn floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| float(v, what)).collect()
}

/// `t=<time>:goal=<path>`.
pub fn goal_switch(s: &str, tau: f64) -> Result<(f64, PathBuf)> {
    let bad = || Error::InvalidArgument(format!("goal switch must look like t=<time>:goal=<path>, got '{s}'"));
    let rest = s.strip_prefix("t=").ok_or_else(bad)?;
    let (t, path) = rest.split_once(":goal=").ok_or_else(bad)?;
    if path.is_empty() {
        return Err(bad());
    }
    Ok((time(t, tau)?, Path::new(path).to_path_buf()))
}

/// `<dir>/<stem><suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_in_seconds_and_tau() {
        assert_eq!(time("1.5", 2.0).unwrap(), 1.5);
        assert_eq!(time("0.5tau", 2.0).unwrap(), 1.0);
        assert_eq!(time("3τ", 2.0).unwrap(), 6.0);
        assert_eq!(time("2*tau", 0.5).unwrap(), 1.0);
        assert_eq!(time("tau", 0.7).unwrap(), 0.7);
        assert!(time("-1", 1.0).is_err());
        assert!(time("soon", 1.0).is_err());
    }

    #[test]
    fn goal_switch_specs() {
        let (t, p) = goal_switch("t=0.5tau:goal=dir/g.csv", 2.0).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(p, PathBuf::from("dir/g.csv"));
        assert!(goal_switch("0.5:goal=g.csv", 1.0).is_err());
        assert!(goal_switch("t=0.5:goal=", 1.0).is_err());
        assert!(goal_switch("t=0.5", 1.0).is_err());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("a/b.csv"), ".svg"), PathBuf::from("a/b.svg"));
        assert_eq!(sibling(Path::new("b.csv"), ".summary.json"), PathBuf::from("b.summary.json"));
    }

    #[test]
    fn float_lists() {
        assert_eq!(floats("0.6, 0.6,1", "links").unwrap(), vec![0.6, 0.6, 1.0]);
        assert!(floats("0.6,,1", "links").is_err());
    }
}
