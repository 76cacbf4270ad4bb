//! Model specs: `gaussian(N)` or `product(ITEM, ...)` with
//! `ITEM := uniform*K | dexp*K | gauss*K | grid:FILE*K` (`*K` defaults to 1).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{Block, Component1D, ComponentKind, MeasureModel};
use crate::error::{LoclabError, Result};

/// Parses a model spec. Relative grid paths resolve against `base_dir`.
pub fn parse_model(spec: &str, base_dir: Option<&Path>) -> Result<MeasureModel> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |msg: &str| LoclabError::ModelSpec(format!("{msg} in '{spec}'"));
    if let Some(inner) = s.strip_prefix("gaussian(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = inner.parse().map_err(|_| bad("bad gaussian dimension"))?;
        return MeasureModel::gaussian(n);
    }
    let inner = s
        .strip_prefix("product(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad("expected gaussian(N) or product(...)"))?;
    if inner.is_empty() {
        return Err(bad("empty product"));
    }
    let mut blocks = Vec::new();
    for item in inner.split(',') {
        let (name, k) = match item.rsplit_once('*') {
            Some((name, k)) => (name, k.parse::<usize>().map_err(|_| bad("bad multiplicity"))?),
            None => (item, 1),
        };
        if k == 0 {
            return Err(bad("multiplicity must be positive"));
        }
        let kind = match name {
            "uniform" => ComponentKind::Uniform { a: -1.0, b: 1.0 },
            "dexp" => ComponentKind::TwoSidedExponential { rate: 1.0 },
            "gauss" => ComponentKind::Gaussian,
            _ => match name.strip_prefix("grid:") {
                Some(file) if !file.is_empty() => {
                    let path = match base_dir {
                        Some(d) if Path::new(file).is_relative() => d.join(file),
                        _ => PathBuf::from(file),
                    };
                    let (xs, log_density) = read_grid_file(&path)?;
                    ComponentKind::GridLogDensity { xs, log_density }
                }
                _ => return Err(bad(&format!("unknown component '{name}'"))),
            },
        };
        blocks.push(Block {
            label: name.to_string(),
            component: Arc::new(Component1D::new(kind)?),
            multiplicity: k,
        });
    }
    MeasureModel::product(blocks)
}

/// Reads `x log_density` pairs, one per line; blank lines and `#` comments
/// are skipped.
pub fn read_grid_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let parsed = match cols.as_slice() {
            [x, l] => x.parse::<f64>().ok().zip(l.parse::<f64>().ok()),
            _ => None,
        };
        let (x, l) = parsed.ok_or_else(|| {
            LoclabError::ModelSpec(format!("{}:{}: expected two numbers", path.display(), lineno + 1))
        })?;
        xs.push(x);
        ls.push(l);
    }
    Ok((xs, ls))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_gaussian_and_products() {
        assert_eq!(parse_model("gaussian(8)", None).unwrap().dim(), 8);
        let m = parse_model(" product( uniform*4 , dexp*4 ) ", None).unwrap();
        assert_eq!(m.dim(), 8);
        assert_eq!(parse_model("product(gauss,dexp*2)", None).unwrap().dim(), 3);
    }

    #[test]
    fn rejects_malformed_specs() {
        for s in ["gaussian(0)", "gaussian(x)", "product()", "product(cauchy*2)", "product(dexp*0)", "uniform*3"] {
            assert!(matches!(parse_model(s, None), Err(LoclabError::ModelSpec(_))), "{s}");
        }
    }

    #[test]
    fn reads_grid_files_relative_to_base() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = fs::File::create(dir.path().join("tri.txt")).unwrap();
        writeln!(f, "# triangle law").unwrap();
        for i in -10..=10 {
            let x = i as f64 / 10.0;
            writeln!(f, "{x} {}", (1.0 - x.abs()).max(1e-3).ln()).unwrap();
        }
        drop(f);
        // ln(1 - |x|) is concave
        let m = parse_model("product(grid:tri.txt*2)", Some(dir.path())).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.to_string(), "product(grid:tri.txt*2)");
    }

    #[test]
    fn grid_file_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        fs::write(&p, "0 0\n1 oops\n").unwrap();
        let e = read_grid_file(&p).unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
    }
}
