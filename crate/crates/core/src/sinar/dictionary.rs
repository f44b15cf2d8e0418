//! Delay-structured monomial dictionaries.
//!
//! A dictionary maps a stacked delay vector `[x_t; x_{t-1}; …; x_{t-p+1}]`
//! (newest first, `m` coordinates per delay) to feature values. Every term is
//! a monomial in the coordinates of exactly one delay, so no feature couples
//! two different times. An optional constant feature comes first; the
//! remaining terms are ordered delay-major, and within a delay in the order
//! the builder lists them.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest exponent accepted for any coordinate of a term.
pub const MAX_EXPONENT: u32 = 64;

/// A monomial `Π_j (x_{t-delay})_j^{exponents[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub delay: usize,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn new(delay: usize, exponents: Vec<u32>) -> Term {
        Term { delay, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    #[inline]
    fn evaluate(&self, stacked: &[f64], m: usize) -> f64 {
        let x = &stacked[self.delay * m..(self.delay + 1) * m];
        self.exponents
            .iter()
            .zip(x)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &v)| if e == 1 { v } else { v.powi(e as i32) })
            .product()
    }

    /// Human-readable label such as `x1(t-1)^2*x2(t-1)`.
    pub fn label(&self) -> String {
        let time = if self.delay == 0 {
            "t".to_string()
        } else {
            format!("t-{}", self.delay)
        };
        let mut parts = Vec::new();
        for (j, &e) in self.exponents.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("x{}({time})", j + 1)),
                _ => parts.push(format!("x{}({time})^{e}", j + 1)),
            }
        }
        parts.join("*")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    m: usize,
    p: usize,
    constant: bool,
    terms: Vec<Term>,
}

impl Dictionary {
    /// Validates and builds a dictionary for `m`-dimensional observables and
    /// memory depth `p`.
    pub fn new(m: usize, p: usize, constant: bool, terms: Vec<Term>) -> Result<Dictionary> {
        if m == 0 || p == 0 {
            return Err(Error::invalid("dictionary needs m >= 1 and p >= 1"));
        }
        let mut last_delay = 0;
        for (i, t) in terms.iter().enumerate() {
            if t.exponents.len() != m {
                return Err(Error::invalid(format!(
                    "term {i} has {} exponents for m = {m}",
                    t.exponents.len()
                )));
            }
            if t.delay >= p {
                return Err(Error::invalid(format!(
                    "term {i} uses delay {} beyond depth {p}",
                    t.delay
                )));
            }
            if t.degree() == 0 {
                return Err(Error::invalid(format!(
                    "term {i} is constant; use the constant flag instead"
                )));
            }
            if t.exponents.iter().any(|&e| e > MAX_EXPONENT) {
                return Err(Error::invalid(format!("term {i} has an exponent above {MAX_EXPONENT}")));
            }
            if t.delay < last_delay {
                return Err(Error::invalid("terms must be ordered by delay"));
            }
            last_delay = t.delay;
            if terms[..i].contains(t) {
                return Err(Error::invalid(format!("term {i} is duplicated")));
            }
        }
        if !constant && terms.is_empty() {
            return Err(Error::invalid("dictionary has no features"));
        }
        Ok(Dictionary {
            m,
            p,
            constant,
            terms,
        })
    }

    /// Opinion-percentage dictionary for two coordinates: per delay
    /// `x1, x2, x1², x2², x1·x2`, no constant, `5p` features.
    pub fn opinion(p: usize) -> Result<Dictionary> {
        let per_delay = [[1, 0], [0, 1], [2, 0], [0, 2], [1, 1]];
        let terms = (0..p)
            .flat_map(|k| per_delay.iter().map(move |e| Term::new(k, e.to_vec())))
            .collect();
        Dictionary::new(2, p, false, terms)
    }

    /// Scalar dictionary `[1, x_t², x_t, x_{t-1}, …, x_{t-p+1}]`.
    pub fn henon(p: usize) -> Result<Dictionary> {
        if p == 0 {
            return Err(Error::invalid("dictionary needs p >= 1"));
        }
        let mut terms = vec![Term::new(0, vec![2])];
        terms.extend((0..p).map(|k| Term::new(k, vec![1])));
        Dictionary::new(1, p, true, terms)
    }

    /// Plain linear autoregressive features: every coordinate at every delay.
    pub fn linear(m: usize, p: usize) -> Result<Dictionary> {
        let terms = (0..p)
            .flat_map(|k| {
                (0..m).map(move |j| {
                    let mut e = vec![0; m];
                    e[j] = 1;
                    Term::new(k, e)
                })
            })
            .collect();
        Dictionary::new(m, p, false, terms)
    }

    /// All monomials of total degree `1..=degree` per delay, in graded
    /// lexicographic order, optionally with a constant.
    pub fn polynomial(m: usize, p: usize, degree: u32, constant: bool) -> Result<Dictionary> {
        if degree == 0 || degree > MAX_EXPONENT {
            return Err(Error::invalid(format!("polynomial degree {degree} out of range")));
        }
        let mut per_delay = Vec::new();
        for d in 1..=degree {
            let mut e = vec![0u32; m];
            monomials_of_degree(&mut e, 0, d, &mut per_delay);
        }
        let terms = (0..p)
            .flat_map(|k| per_delay.iter().map(move |e| Term::new(k, e.clone())))
            .collect();
        Dictionary::new(m, p, constant, terms)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_delay(&self) -> usize {
        self.p
    }

    pub fn has_constant(&self) -> bool {
        self.constant
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of features `v`, the constant included.
    pub fn len(&self) -> usize {
        self.terms.len() + usize::from(self.constant)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature values for one stacked delay vector of length `m·p`.
    pub fn evaluate_into(&self, stacked: &[f64], out: &mut [f64]) {
        debug_assert_eq!(stacked.len(), self.m * self.p);
        debug_assert_eq!(out.len(), self.len());
        let offset = usize::from(self.constant);
        if self.constant {
            out[0] = 1.0;
        }
        for (o, t) in out[offset..].iter_mut().zip(&self.terms) {
            *o = t.evaluate(stacked, self.m);
        }
    }

    pub fn evaluate(&self, stacked: &[f64]) -> Result<Vec<f64>> {
        if stacked.len() != self.m * self.p {
            return Err(Error::invalid(format!(
                "stacked vector has length {}, expected {}",
                stacked.len(),
                self.m * self.p
            )));
        }
        let mut out = vec![0.0; self.len()];
        self.evaluate_into(stacked, &mut out);
        Ok(out)
    }

    /// Label of feature `i` (the constant is `1`).
    pub fn label(&self, i: usize) -> String {
        if self.constant {
            if i == 0 {
                return "1".into();
            }
            self.terms[i - 1].label()
        } else {
            self.terms[i].label()
        }
    }

    /// Number of terms per delay when every delay carries the same number of
    /// terms, `None` otherwise.
    pub fn terms_per_delay(&self) -> Option<usize> {
        let mut counts = vec![0usize; self.p];
        for t in &self.terms {
            counts[t.delay] += 1;
        }
        counts.iter().all(|&c| c == counts[0]).then_some(counts[0])
    }

    /// Compact textual description, one line per term.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() {
            let _ = writeln!(s, "{i}: {}", self.label(i));
        }
        s
    }
}

fn monomials_of_degree(e: &mut Vec<u32>, j: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if j + 1 == e.len() {
        e[j] = remaining;
        out.push(e.clone());
        e[j] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        e[j] = k;
        monomials_of_degree(e, j + 1, remaining - k, out);
    }
    e[j] = 0;
}
