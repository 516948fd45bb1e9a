//! Constraint sets as key=value blocks, and MatrixMarket coordinate files.
//!
//! Keys: `family`, `n`, `m`, `r`, `radius`, `norm`, `psd`, `symmetric`,
//! `b_file`, `c_file`, `b1`, `b2`, `k`, `p`, `a_files`, `b`.
//! File paths are resolved against the directory of the block's file.

use std::path::{Path, PathBuf};

use crate::config::{KeyValues, Section};
use crate::error::{Error, Result};
use crate::matrix::{max_asymmetry, Mat, Matrix};

use super::{ConstraintSet, Family, NormKind};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMarket {
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    pub pattern: bool,
    /// (row, col, value, source line), 0-based indices.
    pub entries: Vec<(usize, usize, f64, usize)>,
}

impl MatrixMarket {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, banner) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "empty MatrixMarket file"))?;
        let words: Vec<String> = banner.split_whitespace().map(|w| w.to_lowercase()).collect();
        if words.first().map(String::as_str) != Some("%%matrixmarket") {
            return Err(Error::parse(1, 1, "missing %%MatrixMarket banner"));
        }
        if words.len() != 5 || words[1] != "matrix" || words[2] != "coordinate" {
            return Err(Error::parse(1, 1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
        }
        let pattern = match words[3].as_str() {
            "real" | "integer" => false,
            "pattern" => true,
            other => return Err(Error::parse(1, 1, format!("unsupported field `{other}`"))),
        };
        let symmetric = match words[4].as_str() {
            "general" => false,
            "symmetric" => true,
            other => return Err(Error::parse(1, 1, format!("unsupported symmetry `{other}`"))),
        };
        let mut body = lines.filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%')
        });
        let (sline, size) = body
            .next()
            .ok_or_else(|| Error::parse(2, 1, "missing size line"))?;
        let nums = numbers(size, sline + 1, 3)?;
        let (rows, cols, nnz) = (nums[0] as usize, nums[1] as usize, nums[2] as usize);
        if nums.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return Err(Error::parse(sline + 1, 1, "size entries must be nonnegative integers"));
        }
        let want = if pattern { 2 } else { 3 };
        let mut entries = Vec::with_capacity(nnz);
        for (lno, line) in body {
            let vals = numbers(line, lno + 1, want)?;
            let (i, j) = (vals[0], vals[1]);
            if i < 1.0 || j < 1.0 || i > rows as f64 || j > cols as f64 || i.fract() != 0.0 || j.fract() != 0.0 {
                return Err(Error::parse(lno + 1, 1, format!("index ({i}, {j}) outside {rows}x{cols}")));
            }
            let v = if pattern { 1.0 } else { vals[2] };
            entries.push((i as usize - 1, j as usize - 1, v, lno + 1));
        }
        if entries.len() != nnz {
            return Err(Error::parse(
                sline + 1,
                1,
                format!("size line announces {nnz} entries, found {}", entries.len()),
            ));
        }
        Ok(MatrixMarket {
            rows,
            cols,
            symmetric,
            pattern,
            entries,
        })
    }

    /// Dense matrix; symmetric storage is mirrored.
    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols);
        for &(i, j, v, _) in &self.entries {
            m[(i, j)] += v;
            if self.symmetric && i != j {
                m[(j, i)] += v;
            }
        }
        m
    }
}

fn numbers(line: &str, lno: usize, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut col = 1;
    let mut rest = line;
    while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
        col += start;
        rest = &rest[start..];
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let tok = &rest[..end];
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::parse(lno, col, format!("invalid number `{tok}`")))?;
        out.push(v);
        col += end;
        rest = &rest[end..];
    }
    if out.len() != count {
        return Err(Error::parse(lno, 1, format!("expected {count} fields, found {}", out.len())));
    }
    Ok(out)
}

/// Reads a dense-text or MatrixMarket file. Square inputs that are
/// symmetric within 1e-12 come back flagged symmetric.
pub fn read_matrix_file(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let located = |e: Error| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    };
    let m = if text.trim_start().starts_with("%%") {
        let mm = MatrixMarket::parse(&text).map_err(located)?;
        mm.to_dense()
    } else {
        let m = Matrix::from_text(&text).map_err(located)?;
        if m.is_symmetric() {
            return Ok(m);
        }
        m.into_dmatrix()
    };
    if m.is_square() && max_asymmetry(&m) <= 1e-12 {
        Matrix::from_dmatrix_sym(m)
    } else {
        Matrix::from_dmatrix(m)
    }
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Builds a set from a key=value section.
pub fn set_from_section(sec: &Section<'_>, base: &Path) -> Result<ConstraintSet> {
    let family = sec.require_str("family")?;
    let n_opt: Option<usize> = sec.parse("n")?;
    let need_n = || n_opt.ok_or_else(|| sec.missing("n"));
    match family {
        "ambient" => {
            let n = need_n()?;
            if sec.parse_bool("symmetric", false)? {
                ConstraintSet::ambient_sym(n)
            } else {
                ConstraintSet::ambient(n, sec.parse_or("m", n)?)
            }
        }
        "norm-ball" => {
            let n = need_n()?;
            let norm_str = sec.require_str("norm")?;
            let norm = NormKind::parse(norm_str).map_err(|e| sec.bad_value("norm", e.to_string()))?;
            let radius = sec.parse_or("radius", 1.0)?;
            let psd = sec.parse_bool("psd", false)?;
            if psd || sec.parse_bool("symmetric", false)? {
                ConstraintSet::norm_ball_sym(norm, radius, n, psd)
            } else {
                ConstraintSet::norm_ball(norm, radius, n, sec.parse_or("m", n)?)
            }
        }
        "frobenius-sphere" => {
            let n = need_n()?;
            let radius = sec.parse_or("radius", 1.0)?;
            if sec.parse_bool("symmetric", false)? {
                ConstraintSet::frobenius_sphere_sym(radius, n)
            } else {
                ConstraintSet::frobenius_sphere(radius, n, sec.parse_or("m", n)?)
            }
        }
        "psd-cone" => ConstraintSet::psd_cone(need_n()?),
        "rank-set" => {
            let n = need_n()?;
            ConstraintSet::rank_set(sec.require("r")?, n, sec.parse_or("m", n)?)
        }
        "psd-rank-set" => ConstraintSet::psd_rank_set(sec.require("r")?, need_n()?),
        "correlation" => ConstraintSet::correlation(need_n()?),
        "two-trace" => {
            let b = read_matrix_file(&resolve(base, sec.require_str("b_file")?))?;
            let c = read_matrix_file(&resolve(base, sec.require_str("c_file")?))?;
            ConstraintSet::two_trace(&b, &c, sec.require("b1")?, sec.require("b2")?)
        }
        "quad-diag" => ConstraintSet::quad_diag(need_n()?),
        "block-trace" => ConstraintSet::block_trace(sec.require("k")?, sec.require("p")?),
        "row-stochastic" => ConstraintSet::row_stochastic(need_n()?),
        "doubly-stochastic" => ConstraintSet::doubly_stochastic(need_n()?),
        "binary-qp" => {
            let files: Vec<String> = sec
                .parse_list("a_files")?
                .ok_or_else(|| sec.missing("a_files"))?;
            let b: Vec<f64> = sec
                .parse_list("b")?
                .ok_or_else(|| sec.missing("b"))?;
            let mats = files
                .iter()
                .map(|f| read_matrix_file(&resolve(base, f)))
                .collect::<Result<Vec<_>>>()?;
            ConstraintSet::binary_qp(&mats, &b)
        }
        other => Err(sec.bad_value("family", format!("unknown family `{other}`"))),
    }
}

/// Parses a standalone block (keys may sit in the unnamed section or `[set]`).
pub fn parse_set(text: &str, base: &Path) -> Result<ConstraintSet> {
    let kv = KeyValues::parse(text)?;
    if kv.has_section("set") {
        set_from_section(&kv.section("set"), base)
    } else {
        set_from_section(&kv.section(""), base)
    }
}

pub fn read_set_file(path: &Path) -> Result<ConstraintSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_set(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Serializes a set; data matrices are written next to it as
/// `<stem>_B.txt`, `<stem>_C.txt`, `<stem>_A<i>.txt`.
pub fn write_set(set: &ConstraintSet, dir: &Path, stem: &str) -> Result<String> {
    let mut kv = KeyValues::new();
    let s = "";
    kv.set(s, "family", set.family().tag());
    kv.set(s, "n", set.rows().to_string());
    let put_shape = |kv: &mut KeyValues| {
        if set.is_symmetric() {
            kv.set(s, "symmetric", "true");
        } else {
            kv.set(s, "m", set.cols().to_string());
        }
    };
    let write = |m: &Mat, name: &str| -> Result<String> {
        let file = format!("{stem}_{name}.txt");
        Matrix::wrap(m.clone(), true).write_file(&dir.join(&file))?;
        Ok(file)
    };
    match set.family() {
        Family::Ambient => put_shape(&mut kv),
        Family::NormBall { norm, radius } => {
            kv.set(s, "norm", norm.name());
            kv.set(s, "radius", format!("{radius:?}"));
            if set.psd_intersected() {
                kv.set(s, "psd", "true");
            } else {
                put_shape(&mut kv);
            }
        }
        Family::FrobeniusSphere { radius } => {
            kv.set(s, "radius", format!("{radius:?}"));
            put_shape(&mut kv);
        }
        Family::RankSet { r } => {
            kv.set(s, "r", r.to_string());
            kv.set(s, "m", set.cols().to_string());
        }
        Family::PsdRankSet { r } => kv.set(s, "r", r.to_string()),
        Family::TwoTrace { b, c, b1, b2 } => {
            kv.set(s, "b_file", write(b, "B")?);
            kv.set(s, "c_file", write(c, "C")?);
            kv.set(s, "b1", format!("{b1:?}"));
            kv.set(s, "b2", format!("{b2:?}"));
        }
        Family::BlockTrace { k, p } => {
            kv.set(s, "k", k.to_string());
            kv.set(s, "p", p.to_string());
        }
        Family::BinaryQp { a, b } => {
            let files = a
                .iter()
                .enumerate()
                .map(|(i, ai)| write(ai, &format!("A{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            kv.set(s, "a_files", files.join(", "));
            let bs: Vec<String> = b.iter().map(|v| format!("{v:?}")).collect();
            kv.set(s, "b", bs.join(", "));
        }
        Family::PsdCone
        | Family::Correlation
        | Family::QuadDiag
        | Family::RowStochastic
        | Family::DoublyStochastic => {}
    }
    Ok(kv.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_symmetric_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 2\n2 1 1.5\n3 3 2\n";
        let mm = MatrixMarket::parse(text).unwrap();
        let d = mm.to_dense();
        assert_eq!(d[(0, 1)], 1.5);
        assert_eq!(d[(1, 0)], 1.5);
        assert_eq!(d[(2, 2)], 2.0);
    }

    #[test]
    fn matrix_market_errors_have_locations() {
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n";
        assert!(matches!(MatrixMarket::parse(bad), Err(Error::Parse { line: 3, column: 3, .. })));
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 3\n";
        assert!(matches!(MatrixMarket::parse(bad), Err(Error::Parse { line: 3, .. })));
        let bad = "%%MatrixMarket matrix array real general\n";
        assert!(matches!(MatrixMarket::parse(bad), Err(Error::Parse { line: 1, .. })));
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3\n";
        assert!(matches!(MatrixMarket::parse(bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn set_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let b = Matrix::diag(&[1.0, 2.0]).unwrap();
        let c = Matrix::identity(2);
        let sets = vec![
            ConstraintSet::correlation(3).unwrap(),
            ConstraintSet::norm_ball(NormKind::Nuclear, 2.5, 2, 3).unwrap(),
            ConstraintSet::norm_ball_sym(NormKind::Spectral, 1.0, 2, true).unwrap(),
            ConstraintSet::two_trace(&b, &c, 1.0, 3.0).unwrap(),
            ConstraintSet::block_trace(2, 2).unwrap(),
            ConstraintSet::binary_qp(&[Matrix::identity(2)], &[3.0]).unwrap(),
            ConstraintSet::rank_set(1, 2, 4).unwrap(),
        ];
        for (i, set) in sets.iter().enumerate() {
            let text = write_set(set, dir.path(), &format!("s{i}")).unwrap();
            let back = parse_set(&text, dir.path()).unwrap();
            assert_eq!(back.family().tag(), set.family().tag());
            assert_eq!(back.shape(), set.shape());
            assert_eq!(back.psd_intersected(), set.psd_intersected());
            assert_eq!(back.is_symmetric(), set.is_symmetric());
        }
    }

    #[test]
    fn unknown_family_is_located() {
        let err = parse_set("family = blob\nn = 2\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 10, .. }));
    }
}
