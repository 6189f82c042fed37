//! The local evaluation map of a Brauer class, local mass tables and the
//! adelic Brauer-allowed fraction.
//!
//! The class attached to an invariant double-six is evaluated through the
//! function `g = F30/F15²`, where `F15` and `F30` are the products of the
//! obvious and non-obvious tritangent forms; at a place `p` the local value at
//! a point `x` is the Hilbert symbol `(core, g(x))_p`, read as `0` or `1/2`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::counting::{box_mass, box_state, level_one_boxes, BoxState, ResidueBox};
use super::hilbert::{hilbert_symbol, Place};
use super::surface::{content_lines, expect_header, SurfaceModel};
use crate::arith::valuation_rat;
use crate::cohomology::AbelianInvariants;
use crate::error::{Error, ParseError, Result};
use crate::lines27::LineLabel;

pub const TRITANGENT_HEADER: &str = "tritangent v1";
pub const MASS_TABLE_HEADER: &str = "mass-table v1";

/// Arithmetic in `Q(θ) = Q[T]/(m(T))`; elements are coefficient vectors in the power basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    /// Monic minimal polynomial, ascending coefficients, leading 1 included.
    modulus: Vec<BigRational>,
}

pub type NfElem = Vec<BigRational>;

impl NumberField {
    pub fn new(min_poly_desc: &[BigRational]) -> Result<Self> {
        if min_poly_desc.len() < 2 || min_poly_desc[0].is_zero() {
            return Err(Error::InvalidInput("minimal polynomial must have degree ≥ 1".into()));
        }
        let lc = min_poly_desc[0].clone();
        let modulus = min_poly_desc.iter().rev().map(|c| c / &lc).collect();
        Ok(NumberField { modulus })
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn zero(&self) -> NfElem {
        vec![BigRational::zero(); self.degree()]
    }

    pub fn from_rational(&self, q: BigRational) -> NfElem {
        let mut e = self.zero();
        e[0] = q;
        e
    }

    pub fn add(&self, a: &NfElem, b: &NfElem) -> NfElem {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn mul(&self, a: &NfElem, b: &NfElem) -> NfElem {
        let n = self.degree();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                prod[i + j] += x * y;
            }
        }
        for k in (n..prod.len()).rev() {
            let c = std::mem::take(&mut prod[k]);
            if c.is_zero() {
                continue;
            }
            for i in 0..n {
                prod[k - n + i] -= &c * &self.modulus[i];
            }
        }
        prod.truncate(n);
        prod
    }

    /// The rational value of an element lying in `Q`.
    pub fn as_rational(&self, a: &NfElem) -> Option<BigRational> {
        a[1..].iter().all(Zero::is_zero).then(|| a[0].clone())
    }
}

/// One tritangent linear form with coefficients in `Q(θ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TritangentForm {
    pub coeffs: [NfElem; 4],
    pub obvious: bool,
}

/// Tritangent forms of a surface over the field of a primitive element `θ`.
/// The data is trusted input: the forms are not checked against the surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TritangentData {
    pub field: NumberField,
    pub min_poly: Vec<BigRational>,
    pub forms: Vec<TritangentForm>,
    pub double_six: Option<Vec<LineLabel>>,
    /// Constant multiplying the product of the non-obvious forms.
    pub scale: BigRational,
}

/// Polynomials over `Q(θ)` in four variables, for the one-time expansion of the products.
type NfForm = BTreeMap<[u32; 4], NfElem>;

fn mul_linear(k: &NumberField, f: &NfForm, l: &[NfElem; 4]) -> NfForm {
    let mut out: NfForm = BTreeMap::new();
    for (e, c) in f {
        for (v, lc) in l.iter().enumerate() {
            if lc.iter().all(Zero::is_zero) {
                continue;
            }
            let mut e2 = *e;
            e2[v] += 1;
            let t = k.mul(c, lc);
            let slot = out.entry(e2).or_insert_with(|| k.zero());
            *slot = k.add(slot, &t);
        }
    }
    out.retain(|_, c| c.iter().any(|x| !x.is_zero()));
    out
}

fn mul_forms(k: &NumberField, f: &NfForm, g: &NfForm) -> NfForm {
    let mut out: NfForm = BTreeMap::new();
    for (e, c) in f {
        for (e2, c2) in g {
            let e3 = [e[0] + e2[0], e[1] + e2[1], e[2] + e2[2], e[3] + e2[3]];
            let t = k.mul(c, c2);
            let slot = out.entry(e3).or_insert_with(|| k.zero());
            *slot = k.add(slot, &t);
        }
    }
    out.retain(|_, c| c.iter().any(|x| !x.is_zero()));
    out
}

/// A positive rational `M` making `M·f` integral, if `f` has rational coefficients.
fn integralizer(k: &NumberField, f: &NfForm) -> Result<BigRational> {
    let mut den = BigInt::one();
    for c in f.values() {
        let q = k
            .as_rational(c)
            .ok_or_else(|| Error::InvalidInput("product of tritangent forms is not rational".into()))?;
        den = den.lcm(q.denom());
    }
    Ok(BigRational::from_integer(den))
}

/// The evaluation function `g = scale·F30/F15²`, prepared for exact evaluation.
pub struct EvaluationFunction {
    data: TritangentData,
    /// `M_N` and `M_D` with `M_N·scale·F30` and `M_D·F15²` integral forms.
    num_clear: BigRational,
    den_clear: BigRational,
    /// The fast path when every form is defined over `Q`.
    rational: Option<RationalForms>,
}

/// With rational forms, `F15²` is a square and drops out of the symbol, and so
/// does every non-obvious form of even multiplicity; what remains is
/// `g ≡ K·ΠL_i` modulo squares, with integral `L_i`.
struct RationalForms {
    odd_forms: Vec<[i128; 4]>,
    constant: BigRational,
}

impl RationalForms {
    fn new(k: &NumberField, data: &TritangentData) -> Option<Self> {
        let mut constant = data.scale.clone();
        let mut counts: BTreeMap<Vec<BigInt>, usize> = BTreeMap::new();
        for f in data.forms.iter().filter(|f| !f.obvious) {
            let q: Vec<BigRational> = f.coeffs.iter().map(|c| k.as_rational(c)).collect::<Option<_>>()?;
            // Normalize to a primitive integral form with positive leading coefficient.
            let den = q.iter().fold(BigInt::one(), |d, c| d.lcm(c.denom()));
            let ints: Vec<BigInt> =
                q.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
            let mut g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            if ints.iter().find(|c| !c.is_zero()).is_some_and(|c| c < &BigInt::zero()) {
                g = -g;
            }
            constant = constant * BigRational::new(g.clone(), den);
            *counts.entry(ints.iter().map(|c| c / &g).collect()).or_default() += 1;
        }
        let obvious_rational =
            data.forms.iter().filter(|f| f.obvious).all(|f| f.coeffs.iter().all(|c| k.as_rational(c).is_some()));
        if !obvious_rational {
            return None;
        }
        let odd_forms = counts
            .into_iter()
            .filter(|(_, n)| n % 2 == 1)
            .map(|(f, _)| {
                f.iter().map(|c| c.to_i128()).collect::<Option<Vec<i128>>>().map(|v| [v[0], v[1], v[2], v[3]])
            })
            .collect::<Option<Vec<_>>>()?;
        Some(RationalForms { odd_forms, constant })
    }

    /// Valuation and unit residue modulo `p^r` of `ΠL_i(x)`, if every factor is digit-stable.
    fn stable_product(&self, x: &[u64; 4], p: u64, level: u32, r: u32) -> Option<(u64, u64)> {
        let pr = p.pow(r) as i128;
        let (mut v_total, mut unit) = (0u64, 1i128);
        for f in &self.odd_forms {
            let mut l: i128 = 0;
            for (c, &xi) in f.iter().zip(x) {
                l = l.checked_add(c.checked_mul(xi as i128)?)?;
            }
            if l == 0 {
                return None;
            }
            let mut v = 0u32;
            while l % p as i128 == 0 {
                l /= p as i128;
                v += 1;
            }
            if v + r > level {
                return None;
            }
            v_total += v as u64;
            unit = unit * l.rem_euclid(pr) % pr;
        }
        Some((v_total, unit as u64))
    }
}

/// Exact values of the numerator and denominator at an integral point.
pub struct FunctionValue {
    pub numerator: BigRational,
    pub denominator: BigRational,
}

impl FunctionValue {
    pub fn ratio(&self) -> Option<BigRational> {
        (!self.denominator.is_zero()).then(|| &self.numerator / &self.denominator)
    }
}

impl EvaluationFunction {
    pub fn new(data: TritangentData) -> Result<Self> {
        let k = &data.field;
        let obvious = data.forms.iter().filter(|f| f.obvious).count();
        if data.forms.len() != 45 || obvious != 15 {
            return Err(Error::InvalidInput(format!(
                "expected 45 tritangent forms (15 obvious), found {} ({obvious} obvious)",
                data.forms.len()
            )));
        }
        let unit: NfForm = BTreeMap::from([([0; 4], k.from_rational(data.scale.clone()))]);
        let one: NfForm = BTreeMap::from([([0; 4], k.from_rational(BigRational::one()))]);
        let num = data.forms.iter().filter(|f| !f.obvious).fold(unit, |acc, f| mul_linear(k, &acc, &f.coeffs));
        let f15 = data.forms.iter().filter(|f| f.obvious).fold(one, |acc, f| mul_linear(k, &acc, &f.coeffs));
        let den = mul_forms(k, &f15, &f15);
        if num.is_empty() || den.is_empty() {
            return Err(Error::Degenerate("a tritangent product vanishes identically".into()));
        }
        let num_clear = integralizer(k, &num)?;
        let den_clear = integralizer(k, &den)?;
        let rational = RationalForms::new(k, &data);
        Ok(EvaluationFunction { data, num_clear, den_clear, rational })
    }

    pub fn data(&self) -> &TritangentData {
        &self.data
    }

    /// Values of the integral numerator and denominator forms at `x`.
    pub fn eval(&self, x: &[u64; 4]) -> FunctionValue {
        let k = &self.data.field;
        let lin = |f: &TritangentForm| {
            f.coeffs.iter().zip(x).fold(k.zero(), |acc, (c, &xi)| {
                let xi = BigRational::from_integer(BigInt::from(xi));
                k.add(&acc, &c.iter().map(|a| a * &xi).collect())
            })
        };
        let one = k.from_rational(BigRational::one());
        let n = self.data.forms.iter().filter(|f| !f.obvious).fold(one.clone(), |acc, f| k.mul(&acc, &lin(f)));
        let d = self.data.forms.iter().filter(|f| f.obvious).fold(one, |acc, f| k.mul(&acc, &lin(f)));
        let d2 = k.mul(&d, &d);
        let numerator = k.as_rational(&n).expect("checked rational") * &self.data.scale * &self.num_clear;
        let denominator = k.as_rational(&d2).expect("checked rational") * &self.den_clear;
        FunctionValue { numerator, denominator }
    }

    /// The local character value at a box, if constant on the box.
    ///
    /// Points of the box agree with its centre modulo `p^level`, and so do the
    /// values of integral forms; a value of valuation `v` then keeps its
    /// leading `r` digits (`r = 1`, or `3` at `p = 2`), hence its square class,
    /// whenever `v + r ≤ level`. With rational forms the test runs form by
    /// form, otherwise on the expanded numerator and denominator.
    pub fn box_value(&self, b: &ResidueBox, p: u64, core: &BigInt) -> Option<u8> {
        let r = if p == 2 { 3 } else { 1 };
        let stable = |v: i64| v + r <= b.level as i64;
        let core_q = BigRational::from_integer(core.clone());
        let g = match &self.rational {
            Some(rf) => {
                let (v, u) = rf.stable_product(&b.x, p, b.level, r as u32)?;
                let pv = BigInt::from(p).pow(v as u32);
                &rf.constant * BigRational::from_integer(pv * BigInt::from(u))
            }
            None => {
                let val = self.eval(&b.x);
                let g = val.ratio().filter(|g| !g.is_zero())?;
                if !stable(valuation_rat(&val.numerator, p)) || !stable(valuation_rat(&val.denominator, p)) {
                    return None;
                }
                g
            }
        };
        Some(if hilbert_symbol(&core_q, &g, Place::Finite(p)) == 1 { 0 } else { 1 })
    }
}

pub(crate) fn parse_rat(tok: &str, line: usize) -> std::result::Result<BigRational, ParseError> {
    let bad = || ParseError::at(line, format!("not a rational: {tok:?}"));
    match tok.split_once('/') {
        Some((n, d)) => {
            let (n, d): (BigInt, BigInt) = (n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?);
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(tok.parse().map_err(|_| bad())?)),
    }
}

fn fmt_rat(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

impl FromStr for TritangentData {
    type Err = ParseError;

    /// Format: header; `minpoly c_n … c_0`; `scale q`; optional `double-six` with
    /// twelve line labels; then 45 records `obvious|nonobvious v_x | v_y | v_z | v_w`,
    /// each `v` a coefficient vector in the power basis of `θ`.
    fn from_str(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, TRITANGENT_HEADER)?;
        let (mut min_poly, mut scale, mut double_six) = (None, None, None);
        let mut raw_forms = Vec::new();
        for (n, l) in lines {
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            match key {
                "minpoly" => {
                    min_poly = Some(
                        rest.split_whitespace().map(|t| parse_rat(t, n)).collect::<std::result::Result<Vec<_>, _>>()?,
                    )
                }
                "scale" => scale = Some(parse_rat(rest.trim(), n)?),
                "double-six" => {
                    let labels = rest
                        .split_whitespace()
                        .map(|t| t.parse::<LineLabel>().map_err(|e| ParseError::at(n, e.message)))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    if labels.len() != 12 {
                        return Err(ParseError::at(n, "a double-six needs twelve lines"));
                    }
                    double_six = Some(labels);
                }
                "obvious" | "nonobvious" => raw_forms.push((n, key == "obvious", rest.to_string())),
                _ => return Err(ParseError::at(n, format!("unknown record {key:?}"))),
            }
        }
        let min_poly = min_poly.ok_or_else(|| ParseError::msg("missing minpoly record"))?;
        let field = NumberField::new(&min_poly).map_err(|e| ParseError::msg(e.to_string()))?;
        let deg = field.degree();
        let mut forms = Vec::with_capacity(raw_forms.len());
        for (n, obvious, rest) in raw_forms {
            let parts: Vec<&str> = rest.split('|').collect();
            if parts.len() != 4 {
                return Err(ParseError::at(n, "a form needs four coefficient vectors separated by '|'"));
            }
            let mut coeffs: [NfElem; 4] = Default::default();
            for (i, part) in parts.iter().enumerate() {
                let v = part.split_whitespace().map(|t| parse_rat(t, n)).collect::<std::result::Result<Vec<_>, _>>()?;
                if v.len() != deg {
                    return Err(ParseError::at(
                        n,
                        format!("coefficient vector of length {} (field degree {deg})", v.len()),
                    ));
                }
                coeffs[i] = v;
            }
            forms.push(TritangentForm { coeffs, obvious });
        }
        let scale = scale.unwrap_or_else(BigRational::one);
        Ok(TritangentData { field, min_poly, forms, double_six, scale })
    }
}

impl TritangentData {
    pub fn to_file_string(&self) -> String {
        let mut s = format!("{TRITANGENT_HEADER}\n");
        s += &format!("minpoly {}\n", self.min_poly.iter().map(fmt_rat).collect::<Vec<_>>().join(" "));
        s += &format!("scale {}\n", fmt_rat(&self.scale));
        if let Some(d) = &self.double_six {
            s += &format!("double-six {}\n", d.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "));
        }
        for f in &self.forms {
            let vecs: Vec<String> =
                f.coeffs.iter().map(|v| v.iter().map(fmt_rat).collect::<Vec<_>>().join(" ")).collect();
            s += &format!("{} {}\n", if f.obvious { "obvious" } else { "nonobvious" }, vecs.join(" | "));
        }
        s
    }
}

/// A measure: exact, or a value with an error bound (one standard error for
/// Monte Carlo estimates, a half-width for truncation intervals).
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Exact(BigRational),
    Approx { value: f64, err: f64 },
}

impl Measure {
    pub fn zero() -> Self {
        Measure::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Measure::Exact(BigRational::one())
    }

    pub fn value(&self) -> f64 {
        match self {
            Measure::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Measure::Approx { value, .. } => *value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            Measure::Exact(_) => 0.0,
            Measure::Approx { err, .. } => *err,
        }
    }

    pub fn add(&self, o: &Measure) -> Measure {
        match (self, o) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a + b),
            _ => Measure::Approx { value: self.value() + o.value(), err: self.err() + o.err() },
        }
    }

    pub fn mul(&self, o: &Measure) -> Measure {
        match (self, o) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a * b),
            _ => {
                let (a, b, ea, eb) = (self.value(), o.value(), self.err(), o.err());
                Measure::Approx { value: a * b, err: a.abs() * eb + b.abs() * ea + ea * eb }
            }
        }
    }

    pub fn div(&self, o: &Measure) -> Result<Measure> {
        if o.value() == 0.0 {
            return Err(Error::Degenerate("division by a zero measure".into()));
        }
        Ok(match (self, o) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a / b),
            _ => {
                let (a, b, ea, eb) = (self.value(), o.value(), self.err(), o.err());
                let value = a / b;
                Measure::Approx { value, err: (ea + value.abs() * eb) / (b.abs() - eb).max(f64::MIN_POSITIVE) }
            }
        })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Exact(q) => write!(f, "{}", fmt_rat(q)),
            Measure::Approx { value, err } => write!(f, "{value}+-{err}"),
        }
    }
}

impl FromStr for Measure {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        if s.contains('/') || !s.contains(['.', 'e', '+']) {
            return parse_rat(s, 0).map(Measure::Exact).map_err(|_| ParseError::msg(format!("not a measure: {s:?}")));
        }
        let (v, e) = s.split_once("+-").unwrap_or((s, "0"));
        let bad = || ParseError::msg(format!("not a measure: {s:?}"));
        Ok(Measure::Approx { value: v.parse().map_err(|_| bad())?, err: e.parse().map_err(|_| bad())? })
    }
}

/// A character value: one element of `(1/n_i)Z/Z` per invariant `n_i`.
pub type CharValue = Vec<BigRational>;

fn reduce_mod_one(q: &BigRational) -> BigRational {
    q - BigRational::from_integer(q.floor().to_integer())
}

/// The fibres of the local evaluation map at one place.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMassTable {
    pub place: Place,
    /// Invariants of the character group of the Brauer quotient.
    pub group: AbelianInvariants,
    pub entries: Vec<(CharValue, Measure)>,
    /// Mass of boxes left undecided at the precision limit (exact tables only).
    pub unresolved: BigRational,
}

impl LocalMassTable {
    /// Total measure including the undecided part.
    pub fn total(&self) -> Measure {
        self.entries.iter().fold(Measure::Exact(self.unresolved.clone()), |acc, (_, m)| acc.add(m))
    }

    /// The table with every measure multiplied by `factor` (e.g. an Euler factor).
    pub fn scaled(&self, factor: &BigRational) -> LocalMassTable {
        let f = Measure::Exact(factor.clone());
        LocalMassTable {
            place: self.place,
            group: self.group.clone(),
            entries: self.entries.iter().map(|(c, m)| (c.clone(), m.mul(&f))).collect(),
            unresolved: &self.unresolved * factor,
        }
    }

    /// Whether all (resolved) mass sits on a single character value.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().filter(|(_, m)| m.value() != 0.0).count() <= 1
    }

    fn check(&self) -> Result<()> {
        for (c, m) in &self.entries {
            if c.len() != self.group.0.len() {
                return Err(Error::InvalidInput(format!(
                    "character value of length {} for group {}",
                    c.len(),
                    self.group
                )));
            }
            for (v, &n) in c.iter().zip(&self.group.0) {
                if !(v * BigRational::from_integer(n.into())).is_integer() {
                    return Err(Error::InvalidInput(format!("character value {v} not of order dividing {n}")));
                }
            }
            if m.value() < 0.0 {
                return Err(Error::InvalidInput("negative measure".into()));
            }
        }
        Ok(())
    }

    pub fn to_file_string(&self) -> String {
        let mut s = format!(
            "{MASS_TABLE_HEADER}\nplace {}\ngroup {}\n",
            self.place,
            self.group.0.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
        );
        for (c, m) in &self.entries {
            s += &format!("entry {} : {m}\n", c.iter().map(fmt_rat).collect::<Vec<_>>().join(" "));
        }
        s += &format!("unresolved {}\n", fmt_rat(&self.unresolved));
        s
    }
}

impl FromStr for LocalMassTable {
    type Err = ParseError;

    fn from_str(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, MASS_TABLE_HEADER)?;
        let (mut place, mut group) = (None, None);
        let mut entries = Vec::new();
        let mut unresolved = BigRational::zero();
        for (n, l) in lines {
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            match key {
                "place" => place = Some(rest.parse::<Place>().map_err(|e| ParseError::at(n, e.message))?),
                "group" => {
                    let g = rest
                        .split_whitespace()
                        .map(|t| t.parse::<u64>().map_err(|_| ParseError::at(n, format!("bad invariant {t:?}"))))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    group = Some(AbelianInvariants(g));
                }
                "entry" => {
                    let (c, m) =
                        rest.split_once(':').ok_or_else(|| ParseError::at(n, "entry needs 'value : measure'"))?;
                    let c = c
                        .split_whitespace()
                        .map(|t| parse_rat(t, n).map(|q| reduce_mod_one(&q)))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    let m = m.trim().parse::<Measure>().map_err(|e| ParseError::at(n, e.message))?;
                    entries.push((c, m));
                }
                "unresolved" => unresolved = parse_rat(rest.trim(), n)?,
                _ => return Err(ParseError::at(n, format!("unknown record {key:?}"))),
            }
        }
        let table = LocalMassTable {
            place: place.ok_or_else(|| ParseError::msg("missing place record"))?,
            group: group.ok_or_else(|| ParseError::msg("missing group record"))?,
            entries,
            unresolved,
        };
        table.check().map_err(|e| ParseError::msg(e.to_string()))?;
        Ok(table)
    }
}

/// A two-valued table for the group `Z/2`, from `(mass at 0, mass at 1/2)`.
pub fn z2_table(place: Place, zero: Measure, half: Measure) -> LocalMassTable {
    LocalMassTable {
        place,
        group: AbelianInvariants(vec![2]),
        entries: vec![(vec![BigRational::zero()], zero), (vec![BigRational::new(1.into(), 2.into())], half)],
        unresolved: BigRational::zero(),
    }
}

/// Options for [`local_evaluation_table`].
#[derive(Clone, Copy, Debug)]
pub struct EvaluationOptions {
    /// Deepest box level; boxes still undecided there are reported as unresolved.
    pub max_level: u32,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions { max_level: 8 }
    }
}

#[derive(Default)]
struct Tally {
    mass: [BigRational; 2],
    unresolved: BigRational,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.mass[0] += &o.mass[0];
        self.mass[1] += &o.mass[1];
        self.unresolved += o.unresolved;
        self
    }
}

fn on_surface(s: &SurfaceModel, b: &ResidueBox, p: u64) -> bool {
    p.checked_pow(b.level).is_some_and(|m| s.eval_mod(&b.x, m) == 0)
}

fn evaluate_box(
    s: &SurfaceModel,
    g: &EvaluationFunction,
    core: &BigInt,
    b: &ResidueBox,
    p: u64,
    opts: EvaluationOptions,
) -> Result<Tally> {
    let mut t = Tally::default();
    match box_state(s, b, p)? {
        BoxState::Resolved { nonempty: false, .. } => return Ok(t),
        BoxState::Resolved { j, nonempty: true } => {
            if let Some(v) = g.box_value(b, p, core) {
                t.mass[v as usize] = BigRational::new(BigInt::one(), BigInt::from(p).pow(2 * b.level - j));
                return Ok(t);
            }
            if b.level >= opts.max_level {
                t.unresolved = box_mass(s, b, p)?;
                return Ok(t);
            }
        }
        BoxState::Unresolved => {
            if b.level >= opts.max_level {
                t.unresolved = box_mass(s, b, p)?;
                return Ok(t);
            }
        }
    }
    for c in b.children(p) {
        if on_surface(s, &c, p) {
            t = t.merge(evaluate_box(s, g, core, &c, p, opts)?);
        }
    }
    Ok(t)
}

/// The fibres of `x ↦ (core, g(x))_p` on `S(Q_p)`, measured by the normalized
/// count `lim #S(Z/p^m)/p^{2m}`, refined until digit-stable.
pub fn local_evaluation_table(
    s: &SurfaceModel,
    g: &EvaluationFunction,
    core: &BigInt,
    p: u64,
    opts: EvaluationOptions,
) -> Result<LocalMassTable> {
    let parts: Result<Vec<Tally>> = level_one_boxes(p)
        .into_par_iter()
        .filter(|b| on_surface(s, b, p))
        .map(|b| evaluate_box(s, g, core, &b, p, opts))
        .collect();
    let t = parts?.into_iter().fold(Tally::default(), Tally::merge);
    let [m0, m1] = t.mass;
    let mut table = z2_table(Place::Finite(p), Measure::Exact(m0), Measure::Exact(m1));
    table.unresolved = t.unresolved;
    Ok(table)
}

/// Checks a proposed scaling constant: at each listed (non-critical) prime the
/// evaluation must be constantly zero.
pub fn verify_scaling(
    s: &SurfaceModel,
    g: &EvaluationFunction,
    core: &BigInt,
    primes: &[u64],
    opts: EvaluationOptions,
) -> Result<Vec<(u64, bool)>> {
    primes
        .iter()
        .map(|&p| {
            let t = local_evaluation_table(s, g, core, p, opts)?;
            Ok((p, t.entries[1].1.value() == 0.0))
        })
        .collect()
}

/// Fraction of the adelic measure on which the evaluations sum to zero in `Q/Z`.
///
/// Non-listed places contribute the zero character. Undecided mass in exact
/// tables widens the result into an interval.
pub fn brauer_allowed_fraction(tables: &[LocalMassTable], group: &AbelianInvariants) -> Result<Measure> {
    let zero_char: CharValue = vec![BigRational::zero(); group.0.len()];
    let mut dist: BTreeMap<CharValue, Measure> = BTreeMap::from([(zero_char.clone(), Measure::one())]);
    let mut total = Measure::one();
    let mut totals = Vec::new();
    for t in tables {
        if t.group != *group {
            return Err(Error::InvalidInput(format!(
                "table at {} has character group {}, expected {group}",
                t.place, t.group
            )));
        }
        t.check()?;
        let mut next: BTreeMap<CharValue, Measure> = BTreeMap::new();
        for (a, ma) in &dist {
            for (b, mb) in &t.entries {
                let c: CharValue = a.iter().zip(b).map(|(x, y)| reduce_mod_one(&(x + y))).collect();
                let m = ma.mul(mb);
                let slot = next.entry(c).or_insert_with(Measure::zero);
                *slot = slot.add(&m);
            }
        }
        dist = next;
        let tt = t.total();
        total = total.mul(&tt);
        totals.push(tt);
    }
    let allowed = dist.remove(&zero_char).unwrap_or_else(Measure::zero);
    let lower = allowed.div(&total)?;
    // Undecided mass at one place can add at most (its mass × the other totals).
    let mut slack = 0.0;
    for (i, t) in tables.iter().enumerate() {
        if t.unresolved.is_zero() {
            continue;
        }
        let others: f64 = totals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| m.value()).product();
        slack += t.unresolved.to_f64().unwrap_or(f64::INFINITY) * others / total.value();
    }
    if slack == 0.0 {
        return Ok(lower);
    }
    Ok(Measure::Approx { value: lower.value() + slack / 2.0, err: lower.err() + slack / 2.0 })
}
