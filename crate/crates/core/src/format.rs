//! Plain-text problem files.
//!
//! ```text
//! gave <n>          hlcp <n>
//! <n rows of A>     <n rows of M>
//! <n rows of B>     <n rows of N>
//! <b on one line>   <q on one line>
//! ```
//!
//! Entries are whitespace separated. Blank lines and lines starting with `#`
//! are ignored on input. Numbers are written in shortest round-trip form, so
//! writing and reading a problem reproduces it bit for bit.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::linalg::{DenseMatrix, RealVector};
use crate::model::{self, GaveProblem, HlcpProblem, ModelError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid problem: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFile {
    Gave(GaveProblem),
    Hlcp(HlcpProblem),
}

impl ProblemFile {
    /// The GAVE form, converting HLCP data with `A = M + N`, `B = M - N`.
    pub fn into_gave(self) -> GaveProblem {
        match self {
            ProblemFile::Gave(p) => p,
            ProblemFile::Hlcp(h) => model::hlcp_to_gave(&h),
        }
    }
}

struct Lines<R> {
    inner: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank, non-comment line with its 1-based line number.
    fn next_content(&mut self) -> Result<Option<(usize, String)>, FormatError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line, t.to_string())));
        }
        Ok(None)
    }

    fn row(&mut self, n: usize, what: &str) -> Result<Vec<f64>, FormatError> {
        let Some((line, text)) = self.next_content()? else {
            return Err(FormatError::Parse {
                line: self.line + 1,
                message: format!("unexpected end of file while reading {what}"),
            });
        };
        let values = text
            .split_whitespace()
            .map(|tok| {
                let v: f64 = tok.parse().map_err(|_| FormatError::Parse {
                    line,
                    message: format!("invalid number `{tok}` in {what}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(FormatError::Parse {
                        line,
                        message: format!("non-finite value `{tok}` in {what}"),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != n {
            return Err(FormatError::Parse {
                line,
                message: format!("{what}: expected {n} values, found {}", values.len()),
            });
        }
        Ok(values)
    }

    fn matrix(&mut self, n: usize, what: &str) -> Result<DenseMatrix, FormatError> {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            data.extend(self.row(n, what)?);
        }
        Ok(DenseMatrix::from_row_major(n, n, data).map_err(ModelError::from)?)
    }
}

pub fn read_problem<R: BufRead>(reader: R) -> Result<ProblemFile, FormatError> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let Some((line, header)) = lines.next_content()? else {
        return Err(FormatError::Parse {
            line: 1,
            message: "empty file".into(),
        });
    };
    let mut parts = header.split_whitespace();
    let kind = parts.next().unwrap_or_default().to_string();
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| FormatError::Parse {
            line,
            message: "header must be `gave <n>` or `hlcp <n>`".into(),
        })?;
    if parts.next().is_some() {
        return Err(FormatError::Parse {
            line,
            message: "trailing tokens after header".into(),
        });
    }
    let names = match kind.as_str() {
        "gave" => ["A", "B", "b"],
        "hlcp" => ["M", "N", "q"],
        other => {
            return Err(FormatError::Parse {
                line,
                message: format!("unknown problem kind `{other}`"),
            })
        }
    };
    let first = lines.matrix(n, names[0])?;
    let second = lines.matrix(n, names[1])?;
    let vector = RealVector::new(lines.row(n, names[2])?).map_err(ModelError::from)?;
    if let Some((line, _)) = lines.next_content()? {
        return Err(FormatError::Parse {
            line,
            message: "unexpected content after the right-hand side".into(),
        });
    }
    Ok(if kind == "gave" {
        ProblemFile::Gave(GaveProblem::new(first, second, vector)?)
    } else {
        ProblemFile::Hlcp(HlcpProblem::new(first, second, vector)?)
    })
}

fn write_row<W: Write>(w: &mut W, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        write!(w, "{v:?}")?;
    }
    writeln!(w)
}

fn write_parts<W: Write>(
    mut w: W,
    kind: &str,
    first: &DenseMatrix,
    second: &DenseMatrix,
    v: &[f64],
) -> io::Result<()> {
    writeln!(w, "{kind} {}", v.len())?;
    for m in [first, second] {
        for i in 0..m.rows() {
            write_row(&mut w, m.row(i))?;
        }
    }
    write_row(&mut w, v)?;
    w.flush()
}

pub fn write_gave<W: Write>(w: W, p: &GaveProblem) -> io::Result<()> {
    write_parts(w, "gave", p.a(), p.b_mat(), p.rhs())
}

pub fn write_hlcp<W: Write>(w: W, h: &HlcpProblem) -> io::Result<()> {
    write_parts(w, "hlcp", h.m_mat(), h.n_mat(), h.q())
}
