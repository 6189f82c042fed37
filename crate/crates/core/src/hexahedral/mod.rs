//! Arithmetic of the hexahedral model: the Coble quartic and the quadratic
//! field splitting the double-six, prime behavior, real connectivity, and
//! Frobenius elements acting on the 27 lines.
//!
//! A sextic `f` with roots `a_0..a_5` determines a cubic surface in hexahedral
//! form: the 15 obvious lines are indexed by the partitions of the six root
//! indices into three pairs (synthemes), the remaining 12 form a double-six
//! defined over `Q(√D)`. Galois elements act on the roots through `S6` and on
//! the double-six through the quadratic character of `D`.

pub mod critical;
pub mod galois;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{field_discriminant, jacobi, kronecker, squarefree_core, valuation};
use crate::cohomology::{trace, PicardModel};
use crate::error::{Error, ParseError, Result};
use crate::lines27::F_PAIRS;
use crate::local_arith::evaluation::parse_rat;
use crate::local_arith::surface::{content_lines, expect_header};
use crate::local_arith::Place;
use crate::perm::Perm;
use crate::poly::QPoly;

pub use critical::{critical_primes, CriticalOptions, CriticalReport, LocalTest, PrimeEntry, Verdict};
pub use galois::{galois_image, GaloisImage, ImageCandidate};

pub const SEXTIC_HEADER: &str = "sextic v1";

/// A permutation of the six root indices, as an image array.
pub type RootPerm = [u8; 6];

/// A monic squarefree sextic `f ∈ Q[T]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SexticSpec {
    /// Coefficients, highest degree first; `coeffs[0] = 1`.
    pub coeffs: [BigRational; 7],
    /// Elementary symmetric functions `σ1..σ6` of the roots.
    pub sigma: [BigRational; 6],
    /// Discriminant `Δ`.
    pub disc: BigRational,
}

impl SexticSpec {
    pub fn new(coeffs: [BigRational; 7]) -> Result<Self> {
        if !coeffs[0].is_one() {
            return Err(Error::InvalidInput(format!("sextic must be monic, leading coefficient {}", coeffs[0])));
        }
        let poly = QPoly::from_desc(&coeffs);
        let disc = poly.discriminant();
        if disc.is_zero() {
            return Err(Error::Degenerate("sextic has a repeated root".into()));
        }
        let sigma: [BigRational; 6] = poly.elementary_symmetric().try_into().expect("degree 6");
        Ok(SexticSpec { coeffs, sigma, disc })
    }

    pub fn from_ints(c: [i64; 7]) -> Result<Self> {
        Self::new(c.map(|x| BigRational::from_integer(x.into())))
    }

    pub fn poly(&self) -> QPoly {
        QPoly::from_desc(&self.coeffs)
    }

    pub fn to_file_string(&self) -> String {
        let nums: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{SEXTIC_HEADER}\n{}\n", nums.join(" "))
    }
}

impl FromStr for SexticSpec {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, SEXTIC_HEADER)?;
        let mut coeffs = Vec::with_capacity(7);
        for (n, l) in lines {
            for tok in l.split_whitespace() {
                if coeffs.len() == 7 {
                    return Err(ParseError::at(n, "more than 7 coefficients"));
                }
                coeffs.push(parse_rat(tok, n)?);
            }
        }
        let coeffs: [BigRational; 7] = coeffs
            .try_into()
            .map_err(|v: Vec<_>| ParseError::msg(format!("expected 7 coefficients, found {}", v.len())))?;
        SexticSpec::new(coeffs).map_err(|e| ParseError::msg(e.to_string()))
    }
}

/// The quadratic field `Q(√D)` over which the double-six splits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingData {
    /// Coble quartic value.
    pub d4: BigRational,
    /// `D = d4·Δ`.
    pub d: BigRational,
    /// Squarefree kernel of `D`; `1` means the double-six is split over Q.
    pub core: BigInt,
    /// Primes dividing the discriminant of `Q(√core)`.
    pub ramified: Vec<u64>,
}

/// Coble quartic `d4 = σ2² − 4σ4 + σ1(2σ3 − (3/2)σ1σ2 + (5/16)σ1³)`.
pub fn coble_quartic(f: &SexticSpec) -> BigRational {
    let [s1, s2, s3, s4, ..] = &f.sigma;
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let inner = s3 * r(2, 1) - s1 * s2 * r(3, 2) + s1 * s1 * s1 * r(5, 16);
    s2 * s2 - s4 * r(4, 1) + s1 * inner
}

pub fn coble_disc(f: &SexticSpec) -> Result<SplittingData> {
    let d4 = coble_quartic(f);
    if d4.is_zero() {
        return Err(Error::Degenerate("Coble quartic vanishes".into()));
    }
    let d = &d4 * &f.disc;
    let core = squarefree_core(&d);
    let ramified = if core.is_one() {
        Vec::new()
    } else {
        let disc = field_discriminant(&core);
        crate::arith::factor(&disc).into_iter().map(|(p, _)| p.to_u64().expect("ramified prime fits u64")).collect()
    };
    Ok(SplittingData { d4, d, core, ramified })
}

/// Decomposition of a place in `Q(√core)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimeBehavior {
    Split,
    Inert,
    Ramified,
    /// `core > 0`: the real place splits.
    RealPositive,
    /// `core < 0`: the real place ramifies to a complex place.
    RealNegative,
}

impl fmt::Display for PrimeBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeBehavior::Split => "split",
            PrimeBehavior::Inert => "inert",
            PrimeBehavior::Ramified => "ramified",
            PrimeBehavior::RealPositive => "real (core > 0)",
            PrimeBehavior::RealNegative => "real (core < 0)",
        })
    }
}

impl PrimeBehavior {
    /// Whether the place has a single place above it (the double-six is flipped locally).
    pub fn is_nonsplit(self) -> bool {
        !matches!(self, PrimeBehavior::Split | PrimeBehavior::RealPositive)
    }
}

/// Behavior of `place` in `Q(√core)`. Requires `core ∉ {0, 1}` squarefree.
pub fn prime_behavior(core: &BigInt, place: Place) -> PrimeBehavior {
    assert!(!core.is_zero() && !core.is_one(), "prime_behavior needs a quadratic field");
    match place {
        Place::Infinite => {
            if core.is_positive() {
                PrimeBehavior::RealPositive
            } else {
                PrimeBehavior::RealNegative
            }
        }
        Place::Finite(p) => {
            if (field_discriminant(core) % BigInt::from(p)).is_zero() {
                return PrimeBehavior::Ramified;
            }
            match kronecker(core, p) {
                1 => PrimeBehavior::Split,
                _ => PrimeBehavior::Inert,
            }
        }
    }
}

/// Behavior of `Q_p(√x)/Q_p` for a nonzero rational `x`: split when `x` is a
/// local square, inert when the extension is unramified.
pub fn local_quadratic_behavior(x: &BigRational, p: u64) -> PrimeBehavior {
    let n = x.numer() * x.denom();
    let v = valuation(&n, p);
    if v % 2 == 1 {
        return PrimeBehavior::Ramified;
    }
    let u = n / BigInt::from(p).pow(v);
    if p == 2 {
        match u.mod_floor(&BigInt::from(8)).to_u64().expect("small") {
            1 => PrimeBehavior::Split,
            5 => PrimeBehavior::Inert,
            _ => PrimeBehavior::Ramified,
        }
    } else if jacobi(&u, p) == 1 {
        PrimeBehavior::Split
    } else {
        PrimeBehavior::Inert
    }
}

/// Number of connected components of `S(R)`: two iff exactly four roots are
/// real and `d4 > 0`.
pub fn real_components(f: &SexticSpec, d4: &BigRational) -> u8 {
    if f.poly().count_real_roots() == 4 && d4.is_positive() {
        2
    } else {
        1
    }
}

/// The 15 synthemes of `{0..5}` in lexicographic order.
pub fn synthemes() -> &'static [[(u8, u8); 3]; 15] {
    static S: OnceLock<[[(u8, u8); 3]; 15]> = OnceLock::new();
    S.get_or_init(|| {
        let mut out = Vec::new();
        for b in 1..6u8 {
            let rest: Vec<u8> = (1..6).filter(|&x| x != b).collect();
            for c in 1..4 {
                let second = (rest[0], rest[c]);
                let third: Vec<u8> = rest[1..].iter().copied().filter(|&x| x != rest[c]).collect();
                out.push([(0, b), second, (third[0], third[1])]);
            }
        }
        out.try_into().expect("15 synthemes")
    })
}

/// Syntheme → `F`-line table (indices into [`F_PAIRS`]). Found once by an
/// incidence-graph isomorphism search: two obvious lines meet iff their
/// synthemes share a pair, two `F` lines meet iff their duads are disjoint.
pub const SYNTHEME_TO_F: [u8; 15] = [0, 9, 14, 10, 4, 6, 13, 5, 3, 7, 2, 11, 1, 8, 12];

fn syntheme_index(s: [(u8, u8); 3]) -> usize {
    let mut s = s.map(|(a, b)| (a.min(b), a.max(b)));
    s.sort();
    synthemes().iter().position(|t| *t == s).expect("a syntheme")
}

/// Image of a root permutation on the duads `{i, j}` of `1..6`, i.e. on the `F` lines.
pub fn duad_action(sigma: &RootPerm) -> [u8; 15] {
    let mut out = [0u8; 15];
    for (k, s) in synthemes().iter().enumerate() {
        let image = syntheme_index(s.map(|(a, b)| (sigma[a as usize], sigma[b as usize])));
        out[SYNTHEME_TO_F[k] as usize] = SYNTHEME_TO_F[image];
    }
    out
}

/// The permutation `π` of `1..6` (0-based) induced on line indices by a duad permutation.
fn point_action(duads: &[u8; 15]) -> RootPerm {
    let mut pi = [0u8; 6];
    for (i, slot) in pi.iter_mut().enumerate() {
        let i = i as u8 + 1;
        let through: Vec<usize> = (0..15).filter(|&k| F_PAIRS[k].0 == i || F_PAIRS[k].1 == i).take(2).collect();
        let (a, b) = (F_PAIRS[duads[through[0]] as usize], F_PAIRS[duads[through[1]] as usize]);
        let common = if a.0 == b.0 || a.0 == b.1 { a.0 } else { a.1 };
        *slot = common - 1;
    }
    pi
}

/// The element of the double-six stabilizer acting as `sigma` on the roots,
/// exchanging the two sixers iff `flip`.
pub fn line_action(sigma: &RootPerm, flip: bool) -> Perm {
    let duads = duad_action(sigma);
    let pi = point_action(&duads);
    let mut img = [0u8; 27];
    for i in 0..6 {
        let (e, g) = (pi[i], pi[i] + 6);
        img[i] = if flip { g } else { e };
        img[i + 6] = if flip { e } else { g };
    }
    for k in 0..15 {
        img[12 + k] = 12 + duads[k];
    }
    Perm(img)
}

/// The root permutation and flip bit of an element of the double-six stabilizer.
pub fn root_action(g: &Perm) -> (RootPerm, bool) {
    static TABLE: OnceLock<HashMap<RootPerm, RootPerm>> = OnceLock::new();
    let table =
        TABLE.get_or_init(|| all_root_perms().into_iter().map(|s| (point_action(&duad_action(&s)), s)).collect());
    let flip = g.apply(0) >= 6;
    let pi: RootPerm = std::array::from_fn(|i| (g.apply(i) % 6) as u8);
    (table[&pi], flip)
}

/// All 720 permutations of six points, in lexicographic order.
pub fn all_root_perms() -> Vec<RootPerm> {
    let mut out = Vec::with_capacity(720);
    let mut p = [0u8, 1, 2, 3, 4, 5];
    loop {
        out.push(p);
        // Next permutation in lexicographic order.
        let Some(i) = (0..5).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..6).rev().find(|&j| p[j] > p[i]).expect("successor");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Frobenius at an unramified prime, acting on the 27 lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusDatum {
    pub p: u64,
    /// Degrees of the irreducible factors of `f` over `Q_p`, ascending.
    pub cycle_type: Vec<usize>,
    /// Whether `core` is a nonsquare modulo `p` (the sixers are exchanged).
    pub flip: bool,
    /// Root permutation in the labeling fixed by the factorization.
    pub roots: RootPerm,
    pub perm: Perm,
    /// Trace on `Pic(S_Q̄) ⊗ Q`.
    pub trace: i64,
}

/// Frobenius at `p`: roots are labeled consecutively by the degrees of the
/// irreducible factors of `f` over `Q_p`, each degree-`d` factor contributing a
/// `d`-cycle. Requires every root to generate an unramified extension.
pub fn frobenius_line_action(f: &SexticSpec, p: u64, core: &BigInt) -> Result<FrobeniusDatum> {
    let local = critical::LocalRoots::new(f, p)
        .ok_or_else(|| Error::UnsupportedPlace(format!("{p} divides a denominator of f")))?;
    let Some(mut cycle_type) = local.unramified_degrees() else {
        return Err(Error::UnsupportedPlace(format!("{p} may ramify in the splitting field of f")));
    };
    cycle_type.sort();
    let flip = if core.is_one() {
        false
    } else {
        match prime_behavior(core, Place::Finite(p)) {
            PrimeBehavior::Ramified => return Err(Error::UnsupportedPlace(format!("{p} ramifies in Q(√{core})"))),
            b => b == PrimeBehavior::Inert,
        }
    };
    let mut roots = [0u8; 6];
    let mut start = 0;
    for &d in &cycle_type {
        for k in 0..d {
            roots[start + k] = (start + (k + 1) % d) as u8;
        }
        start += d;
    }
    let perm = line_action(&roots, flip);
    let tr = trace(&PicardModel::shared().action(&perm));
    Ok(FrobeniusDatum { p, cycle_type, flip, roots, perm, trace: tr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntheme_table_is_an_incidence_isomorphism() {
        let s = synthemes();
        for a in 0..15 {
            for b in 0..15 {
                if a == b {
                    continue;
                }
                let share = s[a].iter().any(|x| s[b].contains(x));
                let (da, db) = (F_PAIRS[SYNTHEME_TO_F[a] as usize], F_PAIRS[SYNTHEME_TO_F[b] as usize]);
                let disjoint = da.0 != db.0 && da.0 != db.1 && da.1 != db.0 && da.1 != db.1;
                assert_eq!(share, disjoint);
            }
        }
    }

    #[test]
    fn root_action_inverts_line_action() {
        for s in all_root_perms() {
            for flip in [false, true] {
                assert_eq!(root_action(&line_action(&s, flip)), (s, flip));
            }
        }
    }
}
