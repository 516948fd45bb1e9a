//! Problem files: a `[set]` block, an `[objective]` block and a
//! `[problem]` block with `r` and `nu`.
//!
//! Objective keys: `kind` (linear, least-squares, zero), `c_file` or
//! `graph` (MatrixMarket, read as its Laplacian) for linear objectives,
//! `scale`, `a_files` and `b` for least squares, and `mu` for an added
//! (μ/2)‖X‖_F² term.

use std::path::{Path, PathBuf};

use crate::config::{KeyValues, Section};
use crate::error::{Error, Result};
use crate::graph;
use crate::matrix::Matrix;
use crate::sets::io::{read_matrix_file, set_from_section};

use super::{Objective, ProblemSpec};

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn objective_from_section(sec: &Section<'_>, base: &Path, shape: (usize, usize)) -> Result<Objective> {
    let kind = sec.get("kind").unwrap_or("linear");
    let scale: f64 = sec.parse_or("scale", 1.0)?;
    let obj = match kind {
        "zero" => Objective::zero(shape.0, shape.1),
        "linear" => {
            let c = match (sec.get("c_file"), sec.get("graph")) {
                (Some(f), None) => read_matrix_file(&resolve(base, f))?,
                (None, Some(g)) => graph::ingest_graph(&resolve(base, g))?,
                (Some(_), Some(_)) => {
                    return Err(sec.bad_value("graph", "give either `c_file` or `graph`, not both"))
                }
                (None, None) => {
                    return Err(Error::arg(format!(
                        "missing key `{}.c_file` or `{}.graph`",
                        sec.name(),
                        sec.name()
                    )))
                }
            };
            let c = if scale == 1.0 {
                c
            } else {
                Matrix::wrap(c.as_dmatrix() * scale, c.is_symmetric())
            };
            Objective::linear(&c)
        }
        "least-squares" => {
            let files: Vec<String> = sec
                .parse_list("a_files")?
                .ok_or_else(|| sec.missing("a_files"))?;
            let b: Vec<f64> = sec
                .parse_list("b")?
                .ok_or_else(|| sec.missing("b"))?;
            let ops = files
                .iter()
                .map(|f| read_matrix_file(&resolve(base, f)))
                .collect::<Result<Vec<_>>>()?;
            Objective::least_squares(&ops, &b)?
        }
        other => return Err(sec.bad_value("kind", format!("unknown objective `{other}`"))),
    };
    match sec.parse::<f64>("mu")? {
        Some(mu) if mu != 0.0 => Objective::quadratic_regularized(obj, mu),
        _ => Ok(obj),
    }
}

pub fn problem_from_config(kv: &KeyValues, base: &Path) -> Result<ProblemSpec> {
    if !kv.has_section("set") {
        return Err(Error::arg("problem file needs a [set] section"));
    }
    let set = set_from_section(&kv.section("set"), base)?;
    let objective = objective_from_section(&kv.section("objective"), base, set.shape())?;
    let prob = kv.section("problem");
    let r: usize = prob.parse_or("r", 1)?;
    let nu: f64 = prob.parse_or("nu", 0.0)?;
    ProblemSpec::new(objective, set, r)?.with_nu(nu)
}

pub fn read_problem_file(path: &Path) -> Result<ProblemSpec> {
    let kv = KeyValues::read_file(path)?;
    problem_from_config(&kv, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxcut_from_graph_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("edge.mtx"),
            "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n",
        )
        .unwrap();
        let text = "[set]\nfamily = correlation\nn = 2\n\n[objective]\ngraph = edge.mtx\n\n[problem]\nr = 1\nnu = 0.1\n";
        let kv = KeyValues::parse(text).unwrap();
        let p = problem_from_config(&kv, dir.path()).unwrap();
        assert_eq!(p.r, 1);
        assert_eq!(p.nu, 0.1);
        let ones = Matrix::symmetric(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.objective.value(&ones).unwrap(), 0.0);
        assert_eq!(p.objective.value(&Matrix::identity(2)).unwrap(), 2.0);
    }

    #[test]
    fn shape_mismatch_is_named() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.txt"), "3 3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
        let text = "[set]\nfamily = correlation\nn = 2\n[objective]\nc_file = c.txt\n";
        let err = problem_from_config(&KeyValues::parse(text).unwrap(), dir.path()).unwrap_err();
        assert!(matches!(err, Error::Dimension { ref field, .. } if field == "objective"), "{err}");
    }
}
