//! Singular points of reductions, lifting tests and bad-prime detection.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::counting::{gradient_valuation, level_one_boxes, ResidueBox};
use super::surface::{Form, SurfaceModel};
use crate::arith::{is_prime, primes_up_to};
use crate::lattice::determinant;
use crate::poly::FpPoly;

/// Hard cap on the number of digits used by the lifting test.
pub const LIFT_CAP: u32 = 8;
const LIFT_NODE_BUDGET: usize = 2_000_000;

/// A finite field `F_{p^e}` with elements encoded as base-`p` digit vectors.
pub struct SmallField {
    pub p: u64,
    pub e: u32,
    pub q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
}

impl SmallField {
    /// Builds `F_{p^e}` for `p^e ≤ 4096`.
    pub fn new(p: u64, e: u32) -> Self {
        let q = p.pow(e) as usize;
        assert!(q <= 4096, "field too large for tables");
        let modulus = (0..q as u64)
            .map(|t| {
                let mut c: Vec<u64> = (0..e).map(|i| t / p.pow(i) % p).collect();
                c.push(1);
                FpPoly::new(c, p)
            })
            .find(|f| f.factor_degrees() == vec![(e as usize, 1)])
            .expect("irreducible polynomials exist");
        let to_poly = |a: usize| FpPoly::new((0..e).map(|i| a as u64 / p.pow(i) % p).collect(), p);
        let from_poly =
            |f: &FpPoly| f.c.iter().enumerate().map(|(i, &d)| d as usize * p.pow(i as u32) as usize).sum::<usize>();
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            let fa = to_poly(a);
            for b in 0..q {
                let fb = to_poly(b);
                let s: Vec<u64> = (0..e as usize)
                    .map(|i| (fa.c.get(i).copied().unwrap_or(0) + fb.c.get(i).copied().unwrap_or(0)) % p)
                    .collect();
                add[a * q + b] = from_poly(&FpPoly::new(s, p)) as u16;
                mul[a * q + b] = from_poly(&fa.mul(&fb).rem(&modulus)) as u16;
            }
        }
        SmallField { p, e, q, add, mul }
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> u16 {
        c.rem_euclid(self.p as i64) as u16
    }

    pub fn eval(&self, f: &Form, x: &[u16; 4]) -> u16 {
        let mut pows = [[1u16; 4]; 4];
        for i in 0..4 {
            for k in 1..4 {
                pows[i][k] = self.mul(pows[i][k - 1], x[i]);
            }
        }
        let mut acc = 0u16;
        for (ex, c) in &f.terms {
            let mut t = self.from_int(*c);
            for i in 0..4 {
                t = self.mul(t, pows[i][ex[i] as usize]);
            }
            acc = self.add(acc, t);
        }
        acc
    }

    /// Whether an element lies in the prime field.
    pub fn is_prime_field(&self, a: u16) -> bool {
        (a as u64) < self.p
    }
}

fn is_singular_in(field: &SmallField, s: &SurfaceModel, x: &[u16; 4]) -> bool {
    field.eval(s.form(), x) == 0 && s.partials().iter().all(|d| field.eval(d, x) == 0)
}

/// Singular points of the reduction over `F_{p^e}`, normalized with first nonzero coordinate 1.
pub fn singular_points_over(s: &SurfaceModel, p: u64, e: u32) -> Vec<[u16; 4]> {
    let field = SmallField::new(p, e);
    let q = field.q;
    let mut out = Vec::new();
    for lead in 0..4 {
        let free = 3 - lead;
        for t in 0..q.pow(free as u32) {
            let mut x = [0u16; 4];
            x[lead] = 1;
            let mut r = t;
            for i in lead + 1..4 {
                x[i] = (r % q) as u16;
                r /= q;
            }
            if is_singular_in(&field, s, &x) {
                out.push(x);
            }
        }
    }
    out
}

/// Singular points of the reduction modulo `p` in `P³(F_p)`.
pub fn singular_points_fp(s: &SurfaceModel, p: u64) -> Vec<[u64; 4]> {
    level_one_boxes(p)
        .into_iter()
        .filter(|b| s.eval_mod(&b.x, p) == 0 && s.gradient_mod(&b.x, p).iter().all(|&g| g == 0))
        .map(|b| b.x)
        .collect()
}

/// Result of trying to lift a point of the reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftOutcome {
    /// Whether a solution modulo `p^k` above the point was found.
    pub lifts: bool,
    /// Deepest level reached (`k` when `lifts`).
    pub depth: u32,
    /// Whether Hensel's lemma certified lifting to all levels.
    pub hensel: bool,
    /// Whether the node budget ran out before a decision.
    pub exhausted: bool,
}

/// Whether the `F_p`-point `x0` lifts to a point of the surface modulo `p^k`.
pub fn lift_point(s: &SurfaceModel, x0: &[u64; 4], p: u64, k: u32) -> LiftOutcome {
    let chart = x0.iter().position(|&c| c % p != 0).expect("projective point");
    let inv = crate::arith::pow_mod(x0[chart], p - 2, p);
    let x = x0.map(|c| crate::arith::mul_mod(c, inv, p));
    let root = ResidueBox { x, chart, level: 1 };
    let mut out = LiftOutcome { lifts: false, depth: 0, hensel: false, exhausted: false };
    if s.eval_mod(&x, p) != 0 {
        return out;
    }
    let mut nodes = 0usize;
    let mut stack = vec![root];
    while let Some(b) = stack.pop() {
        out.depth = out.depth.max(b.level);
        if b.level >= k {
            out.lifts = true;
            return out;
        }
        if let Ok(j) = gradient_valuation(s, &b, p) {
            if j < b.level {
                if let Some(m) = p.checked_pow(b.level + j) {
                    if s.eval_mod(&b.x, m) == 0 {
                        out.lifts = true;
                        out.hensel = true;
                        out.depth = k;
                        return out;
                    }
                }
            }
        }
        let m = p.pow(b.level + 1);
        for c in b.children(p) {
            nodes += 1;
            if nodes > LIFT_NODE_BUDGET {
                out.exhausted = true;
                return out;
            }
            if s.eval_mod(&c.x, m) == 0 {
                stack.push(c);
            }
        }
    }
    out
}

/// Degree-5 monomials in four variables, in decreasing lex order.
fn monomials(deg: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in (0..=deg).rev() {
        for b in (0..=deg - a).rev() {
            for c in (0..=deg - a - b).rev() {
                out.push([a, b, c, deg - a - b - c]);
            }
        }
    }
    out
}

/// Substitutes `x ↦ A·x` into a form.
pub fn substitute(f: &Form, a: &[[i64; 4]; 4]) -> Form {
    let mut acc: HashMap<[u32; 4], i64> = HashMap::new();
    for (e, c) in &f.terms {
        let mut poly: HashMap<[u32; 4], i64> = HashMap::from([([0; 4], *c)]);
        for (i, &ei) in e.iter().enumerate() {
            for _ in 0..ei {
                let mut next: HashMap<[u32; 4], i64> = HashMap::new();
                for (m, v) in &poly {
                    for j in 0..4 {
                        if a[i][j] != 0 {
                            let mut m2 = *m;
                            m2[j] += 1;
                            *next.entry(m2).or_default() += v * a[i][j];
                        }
                    }
                }
                poly = next;
            }
        }
        for (m, v) in poly {
            *acc.entry(m).or_default() += v;
        }
    }
    let mut terms: Vec<([u32; 4], i64)> = acc.into_iter().filter(|(_, v)| *v != 0).collect();
    terms.sort_by(|a, b| b.0.cmp(&a.0));
    Form { terms }
}

fn macaulay_quotient(quadrics: &[Form; 4]) -> Option<BigInt> {
    let mons = monomials(5);
    let index: HashMap<[u32; 4], usize> = mons.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let n = mons.len();
    let mut rows = vec![vec![BigInt::zero(); n]; n];
    for (r, m) in mons.iter().enumerate() {
        let i = (0..4).find(|&i| m[i] >= 2).expect("degree 5 forces a square");
        let mut cof = *m;
        cof[i] -= 2;
        for (e, c) in &quadrics[i].terms {
            let t = [e[0] + cof[0], e[1] + cof[1], e[2] + cof[2], e[3] + cof[3]];
            rows[r][index[&t]] += *c;
        }
    }
    let nonreduced: Vec<usize> = (0..n).filter(|&r| mons[r].iter().filter(|&&x| x >= 2).count() >= 2).collect();
    let minor: Vec<Vec<BigInt>> =
        nonreduced.iter().map(|&r| nonreduced.iter().map(|&c| rows[r][c].clone()).collect()).collect();
    let dm = determinant(&minor);
    if dm.is_zero() {
        return None;
    }
    let d = determinant(&rows);
    let (q, r) = d.div_rem(&dm);
    assert!(r.is_zero(), "Macaulay extraneous factor must divide");
    Some(q)
}

/// Macaulay resultant of the four partial derivatives, up to sign. A prime `p ≥ 5`
/// divides it exactly when the reduction modulo `p` is singular.
pub fn partials_resultant(s: &SurfaceModel) -> BigInt {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d61_6361);
    let mut form = s.form().clone();
    loop {
        let partials = std::array::from_fn(|i| form.derivative(i));
        if let Some(r) = macaulay_quotient(&partials) {
            return r.abs();
        }
        // A unimodular shear leaves the resultant unchanged up to sign.
        let (i, j) = loop {
            let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
            if i != j {
                break (i, j);
            }
        };
        let mut a = [[0i64; 4]; 4];
        for (k, row) in a.iter_mut().enumerate() {
            row[k] = 1;
        }
        a[i][j] = rng.gen_range(1..4);
        form = substitute(&form, &a);
    }
}

/// Whether the reduction modulo `p` is singular over the algebraic closure.
/// Uses the resultant for `p ≥ 5` and a search over `F_{p^e}`, `e ≤ 4`, otherwise.
pub fn has_bad_reduction(s: &SurfaceModel, p: u64, resultant: &BigInt) -> bool {
    if p >= 5 {
        return (resultant % BigInt::from(p)).is_zero();
    }
    // Singular loci have Galois orbits of size ≤ 4 or contain curves.
    [3u32, 4].iter().any(|&e| !singular_points_over(s, p, e).is_empty())
}

/// Primes `≤ bound` of bad reduction.
pub fn bad_primes(s: &SurfaceModel, bound: u64) -> Vec<u64> {
    let res = partials_resultant(s);
    primes_up_to(bound).into_iter().filter(|&p| has_bad_reduction(s, p, &res)).collect()
}

/// Whether a (large) annotated prime divides the resultant.
pub fn verify_annotated_bad_prime(s: &SurfaceModel, p: u64) -> bool {
    is_prime(p) && p >= 5 && (partials_resultant(s) % BigInt::from(p)).is_zero()
}

/// One singular `F_p`-point with its lifting data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularPoint {
    pub coords: [u64; 4],
    pub lift: LiftOutcome,
}

/// Singular points of the reduction modulo `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularReport {
    pub p: u64,
    /// Digits requested for the lifting test.
    pub k: u32,
    pub rational_points: Vec<SingularPoint>,
    /// Whether the reduction is singular over the algebraic closure.
    pub geometrically_singular: bool,
}

impl SingularReport {
    /// Strategy step: the prime can be dropped when no singular point is
    /// `F_p`-rational or none lifts.
    pub fn droppable(&self) -> bool {
        self.rational_points.iter().all(|pt| !pt.lift.lifts)
    }
}

/// Lifting depth `2·v_p(resultant) + 1`, capped at [`LIFT_CAP`].
pub fn lift_depth(resultant: &BigInt, p: u64) -> u32 {
    if resultant.is_zero() {
        return LIFT_CAP;
    }
    let v = crate::arith::valuation(resultant, p);
    (2 * v + 1).min(LIFT_CAP)
}

pub fn singular_reduction_report(s: &SurfaceModel, p: u64, k: u32) -> SingularReport {
    let rational_points = singular_points_fp(s, p)
        .into_iter()
        .map(|coords| SingularPoint { coords, lift: lift_point(s, &coords, p, k) })
        .collect::<Vec<_>>();
    let geometrically_singular = !rational_points.is_empty() || {
        let res = partials_resultant(s);
        has_bad_reduction(s, p, &res)
    };
    SingularReport { p, k, rational_points, geometrically_singular }
}

/// Largest absolute coefficient, used for sizing.
pub fn height(s: &SurfaceModel) -> i64 {
    s.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
}
