//! Univariate polynomials over Q and over prime fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{mul_mod, pow_mod, valuation_rat};

/// Polynomial over Q, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(pub Vec<BigRational>);

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        QPoly(c)
    }

    /// From coefficients listed highest degree first.
    pub fn from_desc(c: &[BigRational]) -> Self {
        QPoly::new(c.iter().rev().cloned().collect())
    }

    pub fn from_ints_desc(c: &[i64]) -> Self {
        QPoly::new(c.iter().rev().map(|&x| rat(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has degree `-1`.
    pub fn degree(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn lc(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect())
    }

    pub fn scale(&self, s: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        QPoly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dl = d.lc();
        let dd = d.0.len();
        while r.len() >= dd {
            let q = r.last().expect("nonempty") / &dl;
            let shift = r.len() - dd;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        QPoly::new(r)
    }

    /// `f(T + c)`.
    pub fn shift(&self, c: &BigRational) -> QPoly {
        let mut out = vec![BigRational::zero(); self.0.len()];
        for a in self.0.iter().rev() {
            // out = out·(T + c) + a
            let mut next = vec![BigRational::zero(); out.len()];
            for i in 0..out.len() {
                if i + 1 < next.len() {
                    next[i + 1] += &out[i];
                }
                next[i] += &out[i] * c;
            }
            next[0] += a;
            out = next;
        }
        QPoly::new(out)
    }

    /// Elementary symmetric functions `σ1..σn` of the roots.
    pub fn elementary_symmetric(&self) -> Vec<BigRational> {
        let n = self.0.len() - 1;
        let lc = self.lc();
        (1..=n)
            .map(|i| {
                let s = &self.0[n - i] / &lc;
                if i % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect()
    }

    /// `Res(f, g)` by the Sylvester determinant.
    pub fn resultant(&self, g: &QPoly) -> BigRational {
        let (m, n) = (self.degree() as usize, g.degree() as usize);
        let size = m + n;
        let mut rows = vec![vec![BigRational::zero(); size]; size];
        for i in 0..n {
            for (j, c) in self.0.iter().rev().enumerate() {
                rows[i][i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in g.0.iter().rev().enumerate() {
                rows[n + i][i + j] = c.clone();
            }
        }
        det_rational(rows)
    }

    /// Discriminant `(−1)^{n(n−1)/2} Res(f, f')/lc(f)`.
    pub fn discriminant(&self) -> BigRational {
        let n = self.degree();
        let r = self.resultant(&self.derivative()) / self.lc();
        if (n * (n - 1) / 2) % 2 == 1 {
            -r
        } else {
            r
        }
    }

    /// Number of distinct real roots via a Sturm sequence.
    pub fn count_real_roots(&self) -> usize {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let k = seq.len();
            let r = seq[k - 2].rem(&seq[k - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&rat(-1)));
        }
        let changes = |signs: Vec<bool>| signs.windows(2).filter(|w| w[0] != w[1]).count();
        let at_pos = seq.iter().map(|p| p.lc().is_positive()).collect();
        let at_neg = seq.iter().map(|p| p.lc().is_positive() == (p.degree() % 2 == 0)).collect();
        changes(at_neg) - changes(at_pos)
    }

    /// Lower convex hull of the `p`-adic Newton polygon as `(length, slope)` segments.
    pub fn newton_polygon(&self, p: u64) -> Vec<(usize, BigRational)> {
        let pts: Vec<(i64, i64)> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64, valuation_rat(c, p)))
            .collect();
        let mut hull: Vec<(i64, i64)> = Vec::new();
        for &pt in &pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // Drop b if it lies on or above segment a→pt.
                if (b.1 - a.1) * (pt.0 - a.0) >= (pt.1 - a.1) * (b.0 - a.0) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        hull.windows(2)
            .map(|w| {
                let len = (w[1].0 - w[0].0) as usize;
                (len, BigRational::new(BigInt::from(w[1].1 - w[0].1), BigInt::from(len as i64)))
            })
            .collect()
    }

    /// Reduction modulo `p`; `None` if a coefficient has `p` in its denominator.
    pub fn reduce(&self, p: u64) -> Option<FpPoly> {
        let c = self.0.iter().map(|q| crate::arith::reduce_mod(q, p)).collect::<Option<Vec<_>>>()?;
        Some(FpPoly::new(c, p))
    }
}

/// Exact determinant over Q by Gaussian elimination.
pub fn det_rational(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else { return BigRational::zero() };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det *= &pv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pv;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// Polynomial over `F_p`, ascending coefficients reduced mod `p`, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub c: Vec<u64>,
    pub p: u64,
}

impl FpPoly {
    pub fn new(mut c: Vec<u64>, p: u64) -> Self {
        c.iter_mut().for_each(|x| *x %= p);
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { c, p }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(vec![1], p)
    }

    /// The monomial `T`.
    pub fn x(p: u64) -> Self {
        FpPoly::new(vec![0, 1], p)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> isize {
        self.c.len() as isize - 1
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &a| (mul_mod(acc, x, self.p) + a) % self.p)
    }

    fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn monic(&self) -> FpPoly {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let i = self.inv(l);
                FpPoly::new(self.c.iter().map(|&a| mul_mod(a, i, self.p)).collect(), self.p)
            }
        }
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let p = self.p;
        FpPoly::new(
            (0..n).map(|i| (self.c.get(i).copied().unwrap_or(0) + p - o.c.get(i).copied().unwrap_or(0)) % p).collect(),
            p,
        )
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(Vec::new(), self.p);
        }
        let mut r = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                r[i + j] = (r[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        FpPoly::new(r, self.p)
    }

    pub fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let mut r = self.c.clone();
        let dl = self.inv(*d.c.last().expect("nonzero"));
        let dd = d.c.len();
        if r.len() < dd {
            return (FpPoly::new(Vec::new(), p), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd + 1];
        while r.len() >= dd {
            let coef = mul_mod(*r.last().expect("nonempty"), dl, p);
            let shift = r.len() - dd;
            q[shift] = coef;
            for (i, &c) in d.c.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - mul_mod(coef, c, p)) % p;
            }
            while r.last() == Some(&0) {
                r.pop();
            }
            if r.len() < dd {
                break;
            }
        }
        (FpPoly::new(q, p), FpPoly::new(r, p))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> FpPoly {
        FpPoly::new(
            self.c.iter().enumerate().skip(1).map(|(i, &a)| mul_mod(a, i as u64 % self.p, self.p)).collect(),
            self.p,
        )
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u128, m: &FpPoly) -> FpPoly {
        let mut r = FpPoly::one(self.p).rem(m);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b).rem(m);
            }
            b = b.mul(&b).rem(m);
            e >>= 1;
        }
        r
    }

    /// `g` with `g(T)^p = self` when all exponents are multiples of `p`.
    fn pth_root(&self) -> FpPoly {
        FpPoly::new(self.c.iter().step_by(self.p as usize).copied().collect(), self.p)
    }

    /// Squarefree factorization: monic squarefree factors with multiplicities.
    pub fn squarefree_factors(&self) -> Vec<(FpPoly, u32)> {
        let mut out = Vec::new();
        self.sqf_rec(1, &mut out);
        out.sort_by_key(|(f, e)| (*e, f.c.clone()));
        out
    }

    fn sqf_rec(&self, mult: u32, out: &mut Vec<(FpPoly, u32)>) {
        let f = self.monic();
        if f.degree() <= 0 {
            return;
        }
        let d = f.derivative();
        if d.is_zero() {
            f.pth_root().sqf_rec(mult * self.p as u32, out);
            return;
        }
        let mut c = f.gcd(&d);
        let mut w = f.divrem(&c).0;
        let mut i = 1;
        while w.degree() > 0 {
            let y = w.gcd(&c);
            let z = w.divrem(&y).0;
            if z.degree() > 0 {
                out.push((z.monic(), i * mult));
            }
            w = y;
            c = c.divrem(&w).0;
            i += 1;
        }
        if c.degree() > 0 {
            c.pth_root().sqf_rec(mult * self.p as u32, out);
        }
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// `(d, product of the irreducible factors of degree d)`.
    pub fn distinct_degree(&self) -> Vec<(usize, FpPoly)> {
        let p = self.p;
        let mut f = self.monic();
        let mut out = Vec::new();
        let x = FpPoly::x(p);
        let mut h = x.clone();
        let mut d = 0;
        while f.degree() > 0 {
            d += 1;
            if 2 * d > f.degree() as usize {
                out.push((f.degree() as usize, f.clone()));
                break;
            }
            h = h.powmod(p as u128, &f);
            let g = f.gcd(&h.sub(&x));
            if g.degree() > 0 {
                f = f.divrem(&g).0;
                h = h.rem(&f);
                out.push((d, g));
            }
        }
        out
    }

    /// Irreducible factor degrees with multiplicities, as sorted `(degree, multiplicity)`.
    pub fn factor_degrees(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (sq, m) in self.squarefree_factors() {
            for (d, g) in sq.distinct_degree() {
                for _ in 0..(g.degree() as usize / d) {
                    out.push((d, m));
                }
            }
        }
        out.sort();
        out
    }

    /// Distinct roots in `F_p` with multiplicities (brute force; `p` small).
    pub fn roots(&self) -> Vec<(u64, u32)> {
        let p = self.p;
        (0..p)
            .filter(|&a| self.eval(a) == 0)
            .map(|a| {
                let lin = FpPoly::new(vec![(p - a) % p, 1], p);
                let mut g = self.clone();
                let mut m = 0;
                while !g.is_zero() && g.eval(a) == 0 {
                    g = g.divrem(&lin).0;
                    m += 1;
                }
                (a, m)
            })
            .collect()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }
}
