//! Peyre's constant: the effective-cone volume `α`, the cohomological factor
//! `β`, the Artin L-value of the Picard character and the Tamagawa measure of
//! the Brauer-unobstructed adelic points, together with a rational point search
//! for comparison with the predicted count.
//!
//! `Pic(S)` is taken to be the Galois-fixed sublattice of the geometric Picard
//! group; `α` pairs through the intersection form.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::primes_up_to;
use crate::cohomology::{AbelianInvariants, PicMat};
use crate::error::{Error, Result};
use crate::local_arith::evaluation::Measure;
use crate::local_arith::real::real_roots;
use crate::local_arith::surface::MONOMIALS;
use crate::local_arith::{euler_factor, SurfaceModel};
use crate::poly::det_rational;

type QVec = Vec<BigRational>;

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |s, (x, y)| s + x * y)
}

/// Row-reduces `rows` in place; returns the pivot columns.
fn row_reduce(rows: &mut [QVec]) -> Vec<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(k) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else { continue };
        rows.swap(r, k);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for k in 0..rows.len() {
            if k != r && !rows[k][c].is_zero() {
                let f = rows[k][c].clone();
                for j in 0..cols {
                    let d = &f * &rows[r][j];
                    rows[k][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn rank(vectors: &[QVec]) -> usize {
    row_reduce(&mut vectors.to_vec()).len()
}

/// A generator of the kernel of a rank-`(t−1)` system in `t` unknowns.
fn kernel_line(rows: &[QVec], t: usize) -> Option<QVec> {
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m);
    if pivots.len() != t - 1 {
        return None;
    }
    let free = (0..t).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); t];
    v[free] = BigRational::one();
    for (row, &c) in pivots.iter().enumerate() {
        v[c] = -m[row][free].clone();
    }
    Some(v)
}

/// `α = t · vol{x : ⟨x, e⟩ ≥ 0 for every effective generator e, ⟨x, −K⟩ ≤ 1}`,
/// the volume taken in coordinates of the rank-`t` lattice with Gram matrix
/// `gram`, and `⟨x, y⟩ = xᵀ·gram·y`.
///
/// The truncated dual cone is triangulated exactly: its extreme rays are
/// normalized to `⟨r, −K⟩ = 1`, the cone is split by pulling from one ray
/// recursively through its facets, and each simplex contributes `|det|/t!`.
pub fn alpha(gram: &[Vec<i64>], generators: &[Vec<i64>], anticanonical: &[BigRational]) -> Result<BigRational> {
    let t = gram.len();
    if t == 0 || gram.iter().any(|r| r.len() != t) || anticanonical.len() != t {
        return Err(Error::InvalidInput("Gram matrix and anticanonical class must have rank t".into()));
    }
    if generators.iter().any(|g| g.len() != t) {
        return Err(Error::InvalidInput("effective generators must have length t".into()));
    }
    let g: Vec<QVec> = gram.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let pair_row = |v: &[BigRational]| -> QVec {
        (0..t).map(|j| (0..t).fold(BigRational::zero(), |s, i| s + &v[i] * &g[i][j])).collect()
    };
    let ineq: Vec<QVec> = generators
        .iter()
        .map(|e| pair_row(&e.iter().map(|&x| BigRational::from_integer(x.into())).collect::<Vec<_>>()))
        .collect();
    let level = pair_row(anticanonical);
    if rank(&ineq) < t {
        return Err(Error::Degenerate("effective generators do not span: the dual cone is not pointed".into()));
    }

    let rays = extreme_rays(&ineq, &level, t)?;
    let mut simplices = Vec::new();
    let all: Vec<usize> = (0..rays.len()).collect();
    triangulate(&rays, &ineq, &all, t, &mut simplices);
    let fact: BigInt = (1..=t as u64).map(BigInt::from).product();
    let mut vol = BigRational::zero();
    for s in &simplices {
        vol += det_rational(s.iter().map(|&i| rays[i].clone()).collect()).abs();
    }
    Ok(vol / BigRational::from_integer(fact) * BigRational::from_integer(BigInt::from(t)))
}

/// Extreme rays of `{x : a·x ≥ 0}`, scaled to `level·x = 1`.
fn extreme_rays(ineq: &[QVec], level: &[BigRational], t: usize) -> Result<Vec<QVec>> {
    if t == 1 {
        let mut out = Vec::new();
        for s in [1i64, -1] {
            let r = vec![BigRational::from_integer(s.into())];
            if ineq.iter().all(|a| !dot(a, &r).is_negative()) {
                out.push(r);
            }
        }
        return normalize(out, level);
    }
    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    let n = ineq.len();
    let mut subset: Vec<usize> = (0..t - 1).collect();
    loop {
        let rows: Vec<QVec> = subset.iter().map(|&i| ineq[i].clone()).collect();
        if let Some(v) = kernel_line(&rows, t) {
            for sign in [1i64, -1] {
                let r: QVec = v.iter().map(|x| x * BigInt::from(sign)).collect();
                if ineq.iter().all(|a| !dot(a, &r).is_negative()) {
                    found.insert(r);
                }
            }
        }
        // Next (t−1)-subset in lexicographic order.
        let Some(k) = (0..t - 1).rev().find(|&k| subset[k] < n - (t - 1) + k) else { break };
        subset[k] += 1;
        for j in k + 1..t - 1 {
            subset[j] = subset[j - 1] + 1;
        }
    }
    normalize(found.into_iter().collect(), level)
}

fn normalize(rays: Vec<QVec>, level: &[BigRational]) -> Result<Vec<QVec>> {
    let mut out: Vec<QVec> = Vec::new();
    for r in rays {
        let l = dot(&r, level);
        if !l.is_positive() {
            return Err(Error::Degenerate("the anticanonical class is not interior to the effective cone".into()));
        }
        let r: QVec = r.iter().map(|x| x / &l).collect();
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out.sort();
    Ok(out)
}

/// Pulling triangulation of the cone over `face` (ray indices, dimension `dim`).
fn triangulate(rays: &[QVec], ineq: &[QVec], face: &[usize], dim: usize, out: &mut Vec<Vec<usize>>) {
    if face.len() == dim {
        out.push(face.to_vec());
        return;
    }
    let apex = face[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for a in ineq {
        if dot(a, &rays[apex]).is_zero() {
            continue;
        }
        let sub: Vec<usize> = face.iter().copied().filter(|&i| dot(a, &rays[i]).is_zero()).collect();
        if sub.len() >= dim - 1 && rank(&sub.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>()) == dim - 1 {
            facets.insert(sub);
        }
    }
    for facet in facets {
        let mut part = Vec::new();
        triangulate(rays, ineq, &facet, dim - 1, &mut part);
        for mut s in part {
            s.push(apex);
            out.push(s);
        }
    }
}

/// `β = #H¹(G, Pic)`.
pub fn beta(h1: &AbelianInvariants) -> u64 {
    h1.order()
}

/// A truncated Euler product for `L(1, χ_P)`.
#[derive(Clone, Debug)]
pub struct LValue {
    pub value: f64,
    /// Heuristic size of the omitted tail `Π_{p > cutoff}`.
    pub tail_bound: f64,
    pub cutoff: u64,
    /// Primes with no Frobenius datum (bad or ramified); their factors are omitted.
    pub skipped: Vec<u64>,
}

impl LValue {
    pub const LABEL: &'static str = "heuristic truncation";

    pub fn measure(&self) -> Measure {
        Measure::Approx { value: self.value, err: self.tail_bound }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} +- {:.2e} ({}, p <= {})", self.value, self.tail_bound, Self::LABEL, self.cutoff)
    }
}

/// `Π_{p ≤ cutoff} det(1 − p⁻¹ Frob_p | P)⁻¹` where `Pic ⊗ Q = Q^t ⊕ P`.
///
/// The local factor is `(1 − 1/p)^t / det(1 − p⁻¹ Frob_p | Pic)`, exact before
/// conversion. The tail bound assumes square-root cancellation in the
/// character sums: `dim P · 2/(√X · log X)` relative to the value.
pub fn artin_l_value(sampler: impl Fn(u64) -> Option<PicMat> + Sync, t: usize, cutoff: u64) -> LValue {
    let primes = primes_up_to(cutoff);
    let factors: Vec<Option<f64>> = primes
        .par_iter()
        .map(|&p| {
            let m = sampler(p)?;
            let trivial = BigRational::new(BigInt::from(p - 1), BigInt::from(p)).pow(t as i32);
            Some((trivial / euler_factor(&m, p)).to_f64().unwrap_or(f64::NAN))
        })
        .collect();
    let mut value = 1.0;
    let mut skipped = Vec::new();
    for (p, f) in primes.iter().zip(factors) {
        match f {
            Some(x) => value *= x,
            None => skipped.push(*p),
        }
    }
    let dim = 7usize.saturating_sub(t) as f64;
    let x = (cutoff.max(3)) as f64;
    let tail_bound = value.abs() * dim * 2.0 / (x.sqrt() * x.ln());
    LValue { value, tail_bound, cutoff, skipped }
}

/// Origin of a number in a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    UserSupplied,
    Published,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Computed => "computed",
            Provenance::UserSupplied => "user-supplied",
            Provenance::Published => "paper-published",
        })
    }
}

/// A value with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Sourced<T> {
    pub value: T,
    pub source: Provenance,
}

impl<T> Sourced<T> {
    pub fn new(value: T, source: Provenance) -> Self {
        Sourced { value, source }
    }
}

/// `τ_H(S(A)^Br)` as a product of labeled local factors and the Brauer fraction.
#[derive(Clone, Debug, Default)]
pub struct AdelicMass {
    /// `(place or range label, density)`.
    pub factors: Vec<(String, Sourced<Measure>)>,
    pub brauer_fraction: Option<Sourced<Measure>>,
}

impl AdelicMass {
    pub fn total(&self) -> Measure {
        let base = self.brauer_fraction.as_ref().map_or(Measure::one(), |f| f.value.clone());
        self.factors.iter().fold(base, |acc, (_, m)| acc.mul(&m.value))
    }
}

/// `Π τ_p` over primes `p ≤ bound` of good reduction unramified in the
/// splitting field, using the Weil identity `#S(F_p) = p² + tr·p + 1`:
/// `τ_p = det(1 − p⁻¹ Frob_p | Pic) · (1 + tr/p + 1/p²)`. Primes with no
/// datum are returned separately.
pub fn good_prime_product(sampler: impl Fn(u64) -> Option<PicMat> + Sync, bound: u64) -> (BigRational, Vec<u64>) {
    let primes = primes_up_to(bound);
    let parts: Vec<Option<BigRational>> = primes
        .par_iter()
        .map(|&p| {
            let m = sampler(p)?;
            let tr: i64 = (0..7).map(|i| m[i][i]).sum();
            let pq = BigRational::from_integer(BigInt::from(p));
            let mass = BigRational::one() + BigRational::from_integer(tr.into()) / &pq + (&pq * &pq).recip();
            Some(euler_factor(&m, p) * mass)
        })
        .collect();
    let mut prod = BigRational::one();
    let mut skipped = Vec::new();
    for (p, f) in primes.iter().zip(parts) {
        match f {
            Some(x) => prod *= x,
            None => skipped.push(*p),
        }
    }
    (prod, skipped)
}

/// Inputs to [`peyre_constant`]; any factor may be absent.
#[derive(Clone, Debug, Default)]
pub struct PeyreComponents {
    /// Rank of the Galois-fixed Picard lattice.
    pub pic_rank: usize,
    pub alpha: Option<Sourced<BigRational>>,
    pub beta: Option<Sourced<u64>>,
    pub l_value: Option<Sourced<Measure>>,
    pub adelic_mass: Option<AdelicMass>,
    pub tau_published: Option<f64>,
    pub actual_count: Option<Sourced<u64>>,
}

#[derive(Clone, Debug)]
pub struct PeyreReport {
    pub components: PeyreComponents,
    /// `α·β·L·τ_H`, when every factor is present.
    pub tau_recomputed: Option<Measure>,
    /// Names of absent factors.
    pub missing: Vec<&'static str>,
}

/// `τ · B · (log B)^{t−1}`.
pub fn predicted_count(tau: f64, pic_rank: usize, b: f64) -> f64 {
    tau * b * b.ln().powi(pic_rank as i32 - 1)
}

impl PeyreReport {
    /// Prefers the published `τ`, which the recomputation cannot match to four digits.
    pub fn tau(&self) -> Option<(f64, Provenance)> {
        if let Some(t) = self.components.tau_published {
            return Some((t, Provenance::Published));
        }
        self.tau_recomputed.as_ref().map(|m| (m.value(), Provenance::Computed))
    }

    pub fn predicted_count(&self, b: f64) -> Option<f64> {
        self.tau().map(|(t, _)| predicted_count(t, self.components.pic_rank, b))
    }
}

pub fn peyre_constant(components: PeyreComponents) -> PeyreReport {
    let mut missing = Vec::new();
    if components.alpha.is_none() {
        missing.push("alpha");
    }
    if components.beta.is_none() {
        missing.push("beta");
    }
    if components.l_value.is_none() {
        missing.push("l_value");
    }
    if components.adelic_mass.is_none() {
        missing.push("adelic_mass");
    }
    let tau_recomputed = match (&components.alpha, &components.beta, &components.l_value, &components.adelic_mass) {
        (Some(a), Some(b), Some(l), Some(m)) => Some(
            Measure::Exact(&a.value * BigRational::from_integer(BigInt::from(b.value))).mul(&l.value).mul(&m.total()),
        ),
        _ => None,
    };
    PeyreReport { components, tau_recomputed, missing }
}

impl fmt::Display for PeyreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.components;
        let absent = |f: &mut fmt::Formatter<'_>, name: &str| writeln!(f, "{name:<14} absent");
        writeln!(f, "pic_rank       {} (Galois-fixed sublattice)", c.pic_rank)?;
        match &c.alpha {
            Some(a) => writeln!(f, "alpha          {} [{}]", a.value, a.source)?,
            None => absent(f, "alpha")?,
        }
        match &c.beta {
            Some(b) => writeln!(f, "beta           {} [{}]", b.value, b.source)?,
            None => absent(f, "beta")?,
        }
        match &c.l_value {
            Some(l) => writeln!(f, "l_value        {} [{}; {}]", l.value, l.source, LValue::LABEL)?,
            None => absent(f, "l_value")?,
        }
        match &c.adelic_mass {
            Some(m) => {
                for (label, x) in &m.factors {
                    writeln!(f, "  tau_{label:<9} {} [{}]", x.value, x.source)?;
                }
                if let Some(fr) = &m.brauer_fraction {
                    writeln!(f, "  brauer_frac  {} [{}]", fr.value, fr.source)?;
                }
                writeln!(f, "adelic_mass    {}", m.total())?;
            }
            None => absent(f, "adelic_mass")?,
        }
        match &self.tau_recomputed {
            Some(t) => writeln!(f, "tau_recomputed {t} [computed]")?,
            None => writeln!(f, "tau_recomputed absent (missing: {})", self.missing.join(", "))?,
        }
        if let Some(t) = c.tau_published {
            writeln!(f, "tau_published  {t} [paper-published]")?;
        }
        if let Some(a) = &c.actual_count {
            writeln!(f, "actual_count   {} [{}]", a.value, a.source)?;
        }
        Ok(())
    }
}

/// Rational points of height at most `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSearch {
    pub bound: i64,
    /// Primitive representatives with first nonzero coordinate positive, sorted.
    pub points: Vec<[i64; 4]>,
}

impl PointSearch {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn to_file_string(&self) -> String {
        self.points.iter().map(|p| format!("{} {} {} {}\n", p[0], p[1], p[2], p[3])).collect()
    }
}

/// The form as a cubic in `w` with coefficients depending on `(x, y, z)`.
fn w_coefficients(s: &SurfaceModel) -> [Vec<([u32; 3], i128)>; 4] {
    let mut out: [Vec<([u32; 3], i128)>; 4] = Default::default();
    for (e, &c) in MONOMIALS.iter().zip(&s.coeffs) {
        if c != 0 {
            out[e[3] as usize].push(([e[0], e[1], e[2]], c as i128));
        }
    }
    out
}

fn is_canonical(v: &[i64; 4]) -> bool {
    let g = v.iter().fold(0i64, |g, &c| g.gcd(&c));
    g == 1 && v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// All projective points with a primitive representative of max-norm at most
/// `bound`: iterates `(x, y, z)` and solves the cubic in `w`, checking each
/// integer candidate near a real root exactly.
pub fn search_points(s: &SurfaceModel, bound: i64) -> PointSearch {
    assert!(bound >= 1, "height bound must be positive");
    let coeffs = w_coefficients(s);
    let slices: Vec<Vec<[i64; 4]>> = (-bound..=bound)
        .into_par_iter()
        .map(|x| {
            let mut found = Vec::new();
            for y in -bound..=bound {
                for z in -bound..=bound {
                    let base = [x as i128, y as i128, z as i128];
                    let c: [i128; 4] = std::array::from_fn(|k| {
                        coeffs[k]
                            .iter()
                            .map(|(e, c)| c * base[0].pow(e[0]) * base[1].pow(e[1]) * base[2].pow(e[2]))
                            .sum()
                    });
                    let eval = |w: i128| ((c[3] * w + c[2]) * w + c[1]) * w + c[0];
                    let mut push = |w: i64| {
                        let v = [x, y, z, w];
                        if is_canonical(&v) {
                            found.push(v);
                        }
                    };
                    if c.iter().all(Zero::is_zero) {
                        (-bound..=bound).for_each(&mut push);
                        continue;
                    }
                    let cf = c.map(|v| v as f64);
                    let mut cand: BTreeSet<i64> = BTreeSet::new();
                    let derivative = [cf[1], 2.0 * cf[2], 3.0 * cf[3], 0.0];
                    for r in real_roots(cf).into_iter().chain(real_roots(derivative)) {
                        if r.is_finite() && r.abs() <= bound as f64 + 2.0 {
                            let k = r.round() as i64;
                            cand.extend([k - 1, k, k + 1]);
                        }
                    }
                    for w in cand {
                        if w.abs() <= bound && eval(w as i128) == 0 {
                            push(w);
                        }
                    }
                }
            }
            found
        })
        .collect();
    let mut points: Vec<[i64; 4]> = slices.into_iter().flatten().collect();
    points.sort();
    PointSearch { bound, points }
}
