//! Quaternary cubic forms.

use std::fmt;
use std::str::FromStr;

use crate::error::ParseError;

/// Header line of the surface file format.
pub const SURFACE_HEADER: &str = "cubic-surface v1";

/// Exponents of the 20 cubic monomials in degree-lex order over (x, y, z, w).
pub const MONOMIALS: [[u32; 4]; 20] = [
    [3, 0, 0, 0],
    [2, 1, 0, 0],
    [2, 0, 1, 0],
    [2, 0, 0, 1],
    [1, 2, 0, 0],
    [1, 1, 1, 0],
    [1, 1, 0, 1],
    [1, 0, 2, 0],
    [1, 0, 1, 1],
    [1, 0, 0, 2],
    [0, 3, 0, 0],
    [0, 2, 1, 0],
    [0, 2, 0, 1],
    [0, 1, 2, 0],
    [0, 1, 1, 1],
    [0, 1, 0, 2],
    [0, 0, 3, 0],
    [0, 0, 2, 1],
    [0, 0, 1, 2],
    [0, 0, 0, 3],
];

const VARS: [&str; 4] = ["x", "y", "z", "w"];

/// A homogeneous integer polynomial in four variables, as a sparse term list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub terms: Vec<([u32; 4], i64)>,
}

impl Form {
    pub fn degree(&self) -> u32 {
        self.terms.first().map_or(0, |(e, _)| e.iter().sum())
    }

    pub fn derivative(&self, var: usize) -> Form {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[var] > 0)
            .map(|(e, c)| {
                let mut e2 = *e;
                e2[var] -= 1;
                (e2, c * e[var] as i64)
            })
            .collect();
        Form { terms }
    }

    pub fn eval_i128(&self, x: &[i128; 4]) -> i128 {
        self.terms.iter().map(|(e, c)| (0..4).fold(*c as i128, |acc, i| acc * x[i].pow(e[i]))).sum()
    }

    /// Value modulo `m` (`m < 2⁶³`) at a residue vector.
    pub fn eval_mod(&self, x: &[u64; 4], m: u64) -> u64 {
        let m128 = m as u128;
        let mut pows = [[1u128; 4]; 4];
        for i in 0..4 {
            for k in 1..4 {
                pows[i][k] = pows[i][k - 1] * (x[i] as u128 % m128) % m128;
            }
        }
        let mut acc = 0u128;
        for (e, c) in &self.terms {
            let mut t = (*c as i128).rem_euclid(m as i128) as u128;
            for i in 0..4 {
                t = t * pows[i][e[i] as usize] % m128;
            }
            acc = (acc + t) % m128;
        }
        acc as u64
    }

    pub fn eval_f64(&self, x: &[f64; 4]) -> f64 {
        self.terms.iter().map(|(e, c)| (0..4).fold(*c as f64, |acc, i| acc * x[i].powi(e[i] as i32))).sum()
    }
}

/// A cubic surface given by an integral quaternary cubic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModel {
    pub coeffs: [i64; 20],
    form: Form,
    partials: [Form; 4],
}

impl SurfaceModel {
    pub fn new(coeffs: [i64; 20]) -> crate::Result<Self> {
        if coeffs.iter().all(|&c| c == 0) {
            return Err(crate::Error::InvalidInput("the zero form".into()));
        }
        let terms = MONOMIALS.iter().zip(coeffs).filter(|(_, c)| *c != 0).map(|(e, c)| (*e, c)).collect();
        let form = Form { terms };
        let partials = std::array::from_fn(|i| form.derivative(i));
        Ok(SurfaceModel { coeffs, form, partials })
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn partials(&self) -> &[Form; 4] {
        &self.partials
    }

    /// Gcd of the coefficients.
    pub fn content(&self) -> i64 {
        self.coeffs.iter().fold(0i64, |g, &c| num_integer::gcd(g, c))
    }

    /// Divides out the content.
    pub fn primitive(&self) -> SurfaceModel {
        let g = self.content();
        SurfaceModel::new(self.coeffs.map(|c| c / g)).expect("nonzero")
    }

    pub fn eval_i128(&self, x: &[i128; 4]) -> i128 {
        self.form.eval_i128(x)
    }

    pub fn eval_mod(&self, x: &[u64; 4], m: u64) -> u64 {
        self.form.eval_mod(x, m)
    }

    pub fn eval_f64(&self, x: &[f64; 4]) -> f64 {
        self.form.eval_f64(x)
    }

    pub fn gradient_f64(&self, x: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| self.partials[i].eval_f64(x))
    }

    pub fn gradient_mod(&self, x: &[u64; 4], m: u64) -> [u64; 4] {
        std::array::from_fn(|i| self.partials[i].eval_mod(x, m))
    }

    /// The classical Fermat cubic `x³ + y³ + z³ + w³`.
    pub fn fermat() -> SurfaceModel {
        let mut c = [0i64; 20];
        for (i, e) in MONOMIALS.iter().enumerate() {
            if e.contains(&3) {
                c[i] = 1;
            }
        }
        SurfaceModel::new(c).expect("nonzero")
    }

    /// Serializes in the versioned surface file format.
    pub fn to_file_string(&self) -> String {
        let nums: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        format!("{SURFACE_HEADER}\n{}\n", nums.join(" "))
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in MONOMIALS.iter().zip(self.coeffs) {
            if c == 0 {
                continue;
            }
            let mono: String = (0..4)
                .filter(|&i| e[i] > 0)
                .map(|i| if e[i] == 1 { VARS[i].to_string() } else { format!("{}^{}", VARS[i], e[i]) })
                .collect::<Vec<_>>()
                .join("*");
            let sign = match (first, c < 0) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let mag = c.abs();
            let coef = if mag == 1 { String::new() } else { format!("{mag}*") };
            write!(f, "{sign}{coef}{mono}")?;
            first = false;
        }
        Ok(())
    }
}

/// Strips `#` comments and blank lines, yielding `(line number, content)`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Checks the versioned header line.
pub(crate) fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    header: &str,
) -> Result<(), ParseError> {
    match lines.next() {
        Some((_, l)) if l == header => Ok(()),
        Some((n, l)) => Err(ParseError::at(n, format!("expected header {header:?}, found {l:?}"))),
        None => Err(ParseError::msg(format!("empty file; expected header {header:?}"))),
    }
}

impl FromStr for SurfaceModel {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, SURFACE_HEADER)?;
        let mut coeffs = Vec::with_capacity(20);
        for (n, l) in lines {
            for tok in l.split_whitespace() {
                let c = tok.parse::<i64>().map_err(|_| ParseError::at(n, format!("not an integer: {tok:?}")))?;
                if coeffs.len() == 20 {
                    return Err(ParseError::at(n, "more than 20 coefficients"));
                }
                coeffs.push(c);
            }
        }
        let coeffs: [i64; 20] = coeffs
            .try_into()
            .map_err(|v: Vec<i64>| ParseError::msg(format!("expected 20 coefficients, found {}", v.len())))?;
        SurfaceModel::new(coeffs).map_err(|e| ParseError::msg(e.to_string()))
    }
}
