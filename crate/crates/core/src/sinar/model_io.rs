//! Plain-text model files.
//!
//! ```text
//! sinar-model 1
//! m 2
//! p 1
//! lambda 5.0000000000000003e-2
//! method sequential-threshold
//! constant 0
//! terms 5
//! 0 1 0
//! ...
//! xi
//! <m rows of v numbers>
//! covariance 1
//! <m rows of m numbers>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Floats are written
//! with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::dictionary::{Dictionary, Term, MAX_EXPONENT};
use super::model::{FitDiagnostics, Method, NarModel, Solver};
use crate::error::{Error, Result};

const MAGIC: &str = "sinar-model 1";
const MAX_DIM: usize = 1 << 10;
const MAX_DEPTH: usize = 1 << 12;
const MAX_TERMS: usize = 1 << 16;

pub fn write_model(model: &NarModel) -> String {
    let d = &model.dictionary;
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "m {}", d.m());
    let _ = writeln!(s, "p {}", d.max_delay());
    let _ = writeln!(s, "lambda {:.16e}", model.lambda);
    let _ = writeln!(s, "method {}", model.method.as_str());
    let _ = writeln!(s, "constant {}", u8::from(d.has_constant()));
    let _ = writeln!(s, "terms {}", d.terms().len());
    for t in d.terms() {
        let _ = write!(s, "{}", t.delay);
        for e in &t.exponents {
            let _ = write!(s, " {e}");
        }
        s.push('\n');
    }
    s.push_str("xi\n");
    write_matrix(&mut s, &model.xi);
    match &model.noise_cov {
        Some(c) => {
            s.push_str("covariance 1\n");
            write_matrix(&mut s, c);
        }
        None => s.push_str("covariance 0\n"),
    }
    s
}

fn write_matrix(s: &mut String, m: &DMatrix<f64>) {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(t);
        }
        Err(Error::parse(self.last + 1, "unexpected end of file"))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.last, msg)
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected `{key} <value>`"))),
        }
    }

    fn keyed_usize(&mut self, key: &str, max: usize) -> Result<usize> {
        let v = self.keyed(key)?;
        let n: usize = v.parse().map_err(|_| self.err(format!("bad {key}: {v}")))?;
        if n > max {
            return Err(self.err(format!("{key} {n} exceeds limit {max}")));
        }
        Ok(n)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            let line = self.next()?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("bad number: {t}"))))
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(self.err(format!("expected {cols} values, found {}", vals.len())));
            }
            for (j, v) in vals.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }
}

pub fn parse_model(text: &str) -> Result<NarModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("expected header `{MAGIC}`")));
    }
    let m = lines.keyed_usize("m", MAX_DIM)?;
    let p = lines.keyed_usize("p", MAX_DEPTH)?;
    let lambda_s = lines.keyed("lambda")?;
    let lambda: f64 = lambda_s
        .parse()
        .map_err(|_| lines.err(format!("bad lambda: {lambda_s}")))?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(lines.err("lambda must be finite and >= 0"));
    }
    let method_s = lines.keyed("method")?;
    let method = Method::parse(method_s).ok_or_else(|| lines.err(format!("unknown method `{method_s}`")))?;
    let constant = match lines.keyed("constant")? {
        "0" => false,
        "1" => true,
        other => return Err(lines.err(format!("constant must be 0 or 1, got {other}"))),
    };
    let n_terms = lines.keyed_usize("terms", MAX_TERMS)?;
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let line = lines.next()?;
        let nums: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|_| lines.err(format!("bad integer: {t}"))))
            .collect::<Result<_>>()?;
        if nums.len() != m + 1 {
            return Err(lines.err(format!("term needs a delay and {m} exponents")));
        }
        if nums[1..].iter().any(|&e| e > MAX_EXPONENT as u64) {
            return Err(lines.err("exponent too large"));
        }
        terms.push(Term::new(
            nums[0] as usize,
            nums[1..].iter().map(|&e| e as u32).collect(),
        ));
    }
    let dictionary = Dictionary::new(m, p, constant, terms).map_err(|e| lines.err(e.to_string()))?;
    if lines.next()? != "xi" {
        return Err(lines.err("expected `xi`"));
    }
    let xi = lines.matrix(m, dictionary.len())?;
    let noise_cov = match lines.keyed("covariance")? {
        "0" => None,
        "1" => Some(lines.matrix(m, m)?),
        other => return Err(lines.err(format!("covariance must be 0 or 1, got {other}"))),
    };
    if let Ok(extra) = lines.next() {
        return Err(lines.err(format!("unexpected trailing content `{extra}`")));
    }
    Ok(NarModel {
        dictionary,
        xi,
        lambda,
        method,
        noise_cov,
        diagnostics: FitDiagnostics {
            solver: Solver::LeastSquares,
            n_samples: 0,
            rank: None,
            rank_deficient: false,
            sweeps: Vec::new(),
        },
    })
}
