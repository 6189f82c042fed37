//! Counting points modulo prime powers and exact p-adic masses.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::singular::{has_bad_reduction, partials_resultant};
use super::surface::SurfaceModel;
use crate::cohomology::{PicMat, PicardModel};
use crate::error::{Error, Result};
use crate::hexahedral::FrobeniusDatum;
use crate::poly::det_rational;

/// Depth limit for adaptive refinement of residue boxes.
pub const MAX_DEPTH: u32 = 40;

/// A residue box: the points congruent to `x` modulo `p^level`, normalized by `x[chart] = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueBox {
    pub x: [u64; 4],
    pub chart: usize,
    pub level: u32,
}

impl ResidueBox {
    /// Children one digit deeper.
    pub fn children(&self, p: u64) -> impl Iterator<Item = ResidueBox> + '_ {
        let step = p.pow(self.level);
        let free: Vec<usize> = (0..4).filter(|&i| i != self.chart).collect();
        (0..p.pow(3)).map(move |t| {
            let mut x = self.x;
            let digits = [t % p, t / p % p, t / (p * p)];
            for (k, &i) in free.iter().enumerate() {
                x[i] += digits[k] * step;
            }
            ResidueBox { x, chart: self.chart, level: self.level + 1 }
        })
    }
}

/// The projective points of `P³(F_p)`, as level-one boxes.
pub fn level_one_boxes(p: u64) -> Vec<ResidueBox> {
    let mut out = Vec::new();
    for chart in 0..4 {
        let free = 3 - chart;
        for t in 0..p.pow(free as u32) {
            let mut x = [0u64; 4];
            x[chart] = 1;
            let mut r = t;
            for i in chart + 1..4 {
                x[i] = r % p;
                r /= p;
            }
            out.push(ResidueBox { x, chart, level: 1 });
        }
    }
    out
}

fn modulus(p: u64, e: u32) -> Result<u64> {
    p.checked_pow(e).filter(|&m| m < (1 << 62)).ok_or_else(|| Error::ResourceLimit {
        what: format!("modulus {p}^{e} exceeds 62 bits"),
        partial: String::new(),
    })
}

/// Minimal valuation of the chart partials at a box, capped at the box level.
pub fn gradient_valuation(s: &SurfaceModel, b: &ResidueBox, p: u64) -> Result<u32> {
    let m = modulus(p, b.level)?;
    let g = s.gradient_mod(&b.x, m);
    let mut best = b.level;
    for i in (0..4).filter(|&i| i != b.chart) {
        let mut v = 0;
        let mut a = g[i];
        if a == 0 {
            continue;
        }
        while a % p == 0 {
            a /= p;
            v += 1;
        }
        best = best.min(v);
    }
    Ok(best)
}

/// Outcome of inspecting a box whose centre satisfies `F ≡ 0 mod p^level`.
pub enum BoxState {
    /// Hensel applies with gradient valuation `j`; the box's mass is `p^{j−2k}` or zero.
    Resolved { j: u32, nonempty: bool },
    /// The gradient vanishes to the box level; refine.
    Unresolved,
}

pub fn box_state(s: &SurfaceModel, b: &ResidueBox, p: u64) -> Result<BoxState> {
    let j = gradient_valuation(s, b, p)?;
    if j >= b.level {
        return Ok(BoxState::Unresolved);
    }
    let m = modulus(p, b.level + j)?;
    Ok(BoxState::Resolved { j, nonempty: s.eval_mod(&b.x, m) == 0 })
}

fn on_surface(s: &SurfaceModel, b: &ResidueBox, p: u64) -> Result<bool> {
    Ok(s.eval_mod(&b.x, modulus(p, b.level)?) == 0)
}

fn count_in_box(s: &SurfaceModel, b: &ResidueBox, p: u64, m: u32) -> Result<BigUint> {
    let bp = BigUint::from(p);
    if b.level == m {
        return Ok(BigUint::one());
    }
    match box_state(s, b, p)? {
        BoxState::Resolved { j, nonempty } => {
            let k = b.level;
            if k + j <= m {
                Ok(if nonempty { bp.pow(2 * (m - k) + j) } else { BigUint::zero() })
            } else {
                let ok = s.eval_mod(&b.x, modulus(p, m)?) == 0;
                Ok(if ok { bp.pow(3 * (m - k)) } else { BigUint::zero() })
            }
        }
        BoxState::Unresolved => {
            let mut total = BigUint::zero();
            for c in b.children(p) {
                if on_surface(s, &c, p)? {
                    total += count_in_box(s, &c, p, m)?;
                }
            }
            Ok(total)
        }
    }
}

/// `#S(Z/p^m)`: primitive solutions in `(Z/p^m)⁴` divided by `#(Z/p^m)^*`.
pub fn count_points_mod(s: &SurfaceModel, p: u64, m: u32) -> Result<BigUint> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    modulus(p, m)?;
    let parts: Result<Vec<BigUint>> = level_one_boxes(p)
        .into_par_iter()
        .map(|b| if on_surface(s, &b, p)? { count_in_box(s, &b, p, m) } else { Ok(BigUint::zero()) })
        .collect();
    Ok(parts?.into_iter().sum())
}

/// Exact mass `lim #S(Z/p^m)/p^{2m}` of a box, by adaptive refinement.
pub fn box_mass(s: &SurfaceModel, b: &ResidueBox, p: u64) -> Result<BigRational> {
    if b.level > MAX_DEPTH {
        return Err(Error::ResourceLimit {
            what: format!("box refinement beyond depth {MAX_DEPTH} at p = {p}"),
            partial: format!("{b:?}"),
        });
    }
    match box_state(s, b, p)? {
        BoxState::Resolved { j, nonempty } => Ok(if nonempty {
            BigRational::new(BigInt::one(), BigInt::from(p).pow(2 * b.level - j))
        } else {
            BigRational::zero()
        }),
        BoxState::Unresolved => {
            let mut total = BigRational::zero();
            for c in b.children(p) {
                if on_surface(s, &c, p)? {
                    total += box_mass(s, &c, p)?;
                }
            }
            Ok(total)
        }
    }
}

/// Exact `lim #S(Z/p^m)/p^{2m}`.
pub fn p_adic_mass(s: &SurfaceModel, p: u64) -> Result<BigRational> {
    let parts: Result<Vec<BigRational>> = level_one_boxes(p)
        .into_par_iter()
        .map(|b| if on_surface(s, &b, p)? { box_mass(s, &b, p) } else { Ok(BigRational::zero()) })
        .collect();
    Ok(parts?.into_iter().fold(BigRational::zero(), |a, b| a + b))
}

/// `det(1 − p⁻¹ M)` for a Picard action matrix.
pub fn euler_factor(m: &PicMat, p: u64) -> BigRational {
    let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
    let rows = (0..7)
        .map(|i| {
            (0..7)
                .map(|j| {
                    let d = if i == j { BigRational::one() } else { BigRational::zero() };
                    d - &inv_p * BigInt::from(m[i][j])
                })
                .collect()
        })
        .collect();
    det_rational(rows)
}

/// Local Tamagawa density `τ_p = det(1 − p⁻¹ Frob_p | Pic) · lim #S(Z/p^m)/p^{2m}`
/// at a good prime unramified in the splitting field.
pub fn tamagawa_density(s: &SurfaceModel, frob: &FrobeniusDatum, p: u64) -> Result<BigRational> {
    if frob.p != p {
        return Err(Error::InvalidInput(format!("Frobenius datum is for {}, not {p}", frob.p)));
    }
    if has_bad_reduction(s, p, &partials_resultant(s)) {
        return Err(Error::UnsupportedPlace(format!("bad reduction at {p}: supply the Euler factor")));
    }
    let m = PicardModel::shared().action(&frob.perm);
    Ok(euler_factor(&m, p) * p_adic_mass(s, p)?)
}

/// `τ_p` from a user-supplied Euler factor (bad or ramified primes).
pub fn tamagawa_density_with_factor(s: &SurfaceModel, factor: &BigRational, p: u64) -> Result<BigRational> {
    Ok(factor * p_adic_mass(s, p)?)
}
