//! Matrix Market reader/writer for dense complex matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{validate, BseHamiltonian};
use crate::error::{Error, Result};
use crate::matkernel::{c64, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

/// A parsed file: the matrix plus its `%` comment lines (without the leading `%`).
#[derive(Clone, Debug)]
pub struct MtxFile {
    pub matrix: CMatrix,
    pub comments: Vec<String>,
}

struct Parser<'a> {
    path: &'a Path,
}

impl Parser<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    fn header(&self, line: &str) -> Result<(Layout, Field, Symmetry)> {
        let words: Vec<String> = line.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
        if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
            return Err(self.err(1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
        }
        let layout = match words[2].as_str() {
            "array" => Layout::Array,
            "coordinate" => Layout::Coordinate,
            other => return Err(self.err(1, format!("unsupported layout '{other}'"))),
        };
        let field = match words[3].as_str() {
            "real" | "integer" | "double" => Field::Real,
            "complex" => Field::Complex,
            other => return Err(self.err(1, format!("unsupported field '{other}'"))),
        };
        let symmetry = match words[4].as_str() {
            "general" => Symmetry::General,
            "symmetric" => Symmetry::Symmetric,
            "hermitian" => Symmetry::Hermitian,
            "skew-symmetric" => Symmetry::SkewSymmetric,
            other => return Err(self.err(1, format!("unsupported symmetry '{other}'"))),
        };
        Ok((layout, field, symmetry))
    }

    fn numbers<T: std::str::FromStr>(&self, line_no: usize, line: &str, count: usize) -> Result<Vec<T>> {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != count {
            return Err(self.err(line_no, format!("expected {count} fields, found {}", words.len())));
        }
        words
            .iter()
            .map(|w| w.parse::<T>().map_err(|_| self.err(line_no, format!("cannot parse '{w}'"))))
            .collect()
    }

    fn parse(&self, text: &str) -> Result<MtxFile> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (layout, field, symmetry) = match lines.next() {
            Some((_, l)) => self.header(l)?,
            None => return Err(self.err(1, "empty file")),
        };
        if field == Field::Real && symmetry == Symmetry::Hermitian {
            return Err(self.err(1, "hermitian symmetry requires a complex field"));
        }

        let mut comments = Vec::new();
        let mut data = Vec::new();
        for (no, l) in lines {
            let t = l.trim();
            if let Some(c) = t.strip_prefix('%') {
                comments.push(c.trim_start().to_string());
            } else if !t.is_empty() {
                data.push((no, t));
            }
        }
        let last_line = text.lines().count().max(1);
        let mut data = data.into_iter();

        let size_fields = if layout == Layout::Array { 2 } else { 3 };
        let (no, size_line) = data.next().ok_or_else(|| self.err(last_line, "missing size line"))?;
        let size: Vec<usize> = self.numbers(no, size_line, size_fields)?;
        let (rows, cols) = (size[0], size[1]);
        if rows == 0 || cols == 0 {
            return Err(self.err(no, "matrix dimensions must be positive"));
        }
        if symmetry != Symmetry::General && rows != cols {
            return Err(self.err(no, "symmetric storage requires a square matrix"));
        }

        let width = if field == Field::Complex { 2 } else { 1 };
        let mut m = CMatrix::zeros(rows, cols);
        let mut put = |i: usize, j: usize, v: c64| {
            m[(i, j)] = v;
            if i != j {
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => m[(j, i)] = v,
                    Symmetry::Hermitian => m[(j, i)] = v.conj(),
                    Symmetry::SkewSymmetric => m[(j, i)] = -v,
                }
            }
        };
        let value = |vals: &[f64], base: usize| {
            if width == 2 {
                c64::new(vals[base], vals[base + 1])
            } else {
                c64::new(vals[base], 0.0)
            }
        };

        match layout {
            Layout::Array => {
                // Column-major; symmetric variants store the lower triangle only.
                let mut slots = Vec::new();
                for j in 0..cols {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::SkewSymmetric => j + 1,
                        _ => j,
                    };
                    for i in start..rows {
                        slots.push((i, j));
                    }
                }
                for &(i, j) in &slots {
                    let (no, l) = data
                        .next()
                        .ok_or_else(|| self.err(last_line, format!("expected {} entries", slots.len())))?;
                    let vals: Vec<f64> = self.numbers(no, l, width)?;
                    put(i, j, value(&vals, 0));
                }
            }
            Layout::Coordinate => {
                let nnz = size[2];
                for _ in 0..nnz {
                    let (no, l) = data
                        .next()
                        .ok_or_else(|| self.err(last_line, format!("expected {nnz} entries")))?;
                    let words: Vec<&str> = l.split_whitespace().collect();
                    if words.len() != 2 + width {
                        return Err(self.err(no, format!("expected {} fields, found {}", 2 + width, words.len())));
                    }
                    let idx: Vec<usize> = self.numbers(no, &words[..2].join(" "), 2)?;
                    let vals: Vec<f64> = self.numbers(no, &words[2..].join(" "), width)?;
                    let (i, j) = (idx[0], idx[1]);
                    if i == 0 || j == 0 || i > rows || j > cols {
                        return Err(self.err(no, format!("index ({i}, {j}) out of range")));
                    }
                    put(i - 1, j - 1, value(&vals, 0));
                }
            }
        }
        if let Some((no, _)) = data.next() {
            return Err(self.err(no, "unexpected trailing data"));
        }
        for j in 0..cols {
            for i in 0..rows {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(self.err(last_line, format!("non-finite entry at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(MtxFile { matrix: m, comments })
    }
}

pub fn read_mtx(path: impl AsRef<Path>) -> Result<MtxFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Parser { path }.parse(&text)
}

/// Write `m` as `array complex general`, one `re im` pair per line in column-major
/// order. Values use the shortest representation that parses back exactly.
pub fn write_mtx(path: impl AsRef<Path>, m: &CMatrix, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::from("%%MatrixMarket matrix array complex general\n");
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "% {line}");
        }
    }
    let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            let _ = writeln!(s, "{:e} {:e}", z.re, z.im);
        }
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn load_mtx(path_a: impl AsRef<Path>, path_b: impl AsRef<Path>, tol: f64) -> Result<BseHamiltonian> {
    let a = read_mtx(path_a)?;
    let b = read_mtx(path_b)?;
    validate(a.matrix, b.matrix, tol)
}

pub fn save_mtx(
    p: &BseHamiltonian,
    path_a: impl AsRef<Path>,
    path_b: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let tag = |name: &str| -> Vec<String> {
        let mut c = comments.to_vec();
        c.push(format!("block {name} of H = [A, B; -conj(B), -conj(A)]"));
        c
    };
    write_mtx(path_a, p.a(), &tag("A"))?;
    write_mtx(path_b, p.b(), &tag("B"))
}
