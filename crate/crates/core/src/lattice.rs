//! Integer lattices in `Z^n`: Hermite normal form, kernels, intersections,
//! Smith normal form invariants. All arithmetic is arbitrary precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Vector = Vec<BigInt>;

pub fn vec_from(v: &[i64]) -> Vector {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn zero_vec(n: usize) -> Vector {
    vec![BigInt::zero(); n]
}

fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// `a += k * b`.
fn axpy(a: &mut [BigInt], k: &BigInt, b: &[BigInt]) {
    if k.is_zero() {
        return;
    }
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x += k * y;
        }
    }
}

/// Row-reduces `rows` by unimodular row operations so that the first `k` columns
/// are in echelon form with positive pivots. Returns the pivot columns; rows past
/// the pivot count have zeros in the first `k` columns.
fn echelon(rows: &mut [Vector], k: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        if r == rows.len() {
            break;
        }
        loop {
            // Row with the smallest nonzero |entry| in column c among rows r..
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let (head, tail) = rows.split_at_mut(i);
                axpy(&mut tail[0], &-q, &head[r]);
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -&*x;
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    pivots
}

/// Reduces entries above each pivot into `[0, pivot)`.
fn reduce_above(rows: &mut [Vector], pivots: &[usize]) {
    for (r, &c) in pivots.iter().enumerate() {
        for i in 0..r {
            let q = rows[i][c].div_floor(&rows[r][c]);
            if !q.is_zero() {
                let (head, tail) = rows.split_at_mut(r);
                axpy(&mut head[i], &-q, &tail[0]);
            }
        }
    }
}

/// A sublattice of `Z^dim`, stored by its Hermite normal form basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn zero(dim: usize) -> Self {
        Lattice { dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut v = zero_vec(dim);
                v[i] = BigInt::one();
                v
            })
            .collect();
        Lattice { dim, basis, pivots: (0..dim).collect() }
    }

    pub fn from_generators<I: IntoIterator<Item = Vector>>(dim: usize, gens: I) -> Self {
        let mut rows: Vec<Vector> = gens.into_iter().filter(|v| !is_zero_vec(v)).collect();
        for v in &rows {
            assert_eq!(v.len(), dim, "generator length mismatch");
        }
        let pivots = echelon(&mut rows, dim);
        rows.truncate(pivots.len());
        reduce_above(&mut rows, &pivots);
        Lattice { dim, basis: rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// HNF basis rows.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Coordinates of `v` in the HNF basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vector> {
        let mut w = v.to_vec();
        let mut out = Vec::with_capacity(self.rank());
        let mut col = 0;
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if w[col..p].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, rem) = w[p].div_rem(&row[p]);
            if !rem.is_zero() {
                return None;
            }
            axpy(&mut w, &-&q, row);
            out.push(q);
            col = p + 1;
        }
        if is_zero_vec(&w) {
            Some(out)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        Lattice::from_generators(self.dim, self.basis.iter().chain(&other.basis).cloned())
    }

    pub fn intersect(&self, other: &Lattice) -> Lattice {
        let r1 = self.rank();
        let mut rows: Vec<Vector> = self.basis.clone();
        rows.extend(other.basis.iter().map(|v| v.iter().map(|x| -x).collect()));
        let relations = left_kernel(&rows, self.dim);
        let gens = relations.basis().iter().map(|c| combine(&c[..r1], &self.basis, self.dim));
        Lattice::from_generators(self.dim, gens)
    }

    /// Image under a linear map given as a function on vectors.
    pub fn map(&self, target_dim: usize, f: impl Fn(&[BigInt]) -> Vector) -> Lattice {
        Lattice::from_generators(target_dim, self.basis.iter().map(|v| f(v)))
    }

    /// Invariants (elementary divisors > 1) of `self / sub`. Fails if `sub` is not
    /// a full-rank sublattice.
    pub fn quotient_invariants(&self, sub: &Lattice) -> Result<Vec<BigInt>, String> {
        if sub.rank() != self.rank() {
            return Err(format!("quotient is infinite: ranks {} vs {}", self.rank(), sub.rank()));
        }
        let coords: Vec<Vector> = sub
            .basis
            .iter()
            .map(|v| v.clone())
            .map(|v| self.coords(&v).ok_or_else(|| "not a sublattice".to_string()))
            .collect::<Result<_, _>>()?;
        Ok(elementary_divisors(&coords).into_iter().filter(|d| !d.is_one()).collect())
    }

    /// Saturation: `(self ⊗ Q) ∩ Z^dim`.
    pub fn saturation(&self) -> Lattice {
        // The orthogonal complement of the orthogonal complement.
        let perp = kernel(&self.basis, self.dim);
        kernel(perp.basis(), self.dim)
    }
}

/// `Σ c_i rows_i`.
pub fn combine(c: &[BigInt], rows: &[Vector], dim: usize) -> Vector {
    let mut out = zero_vec(dim);
    for (k, r) in c.iter().zip(rows) {
        axpy(&mut out, k, r);
    }
    out
}

/// `{x ∈ Z^n : A x = 0}` for `A` given by rows of length `n`.
pub fn kernel(a: &[Vector], n: usize) -> Lattice {
    let m = a.len();
    let mut rows: Vec<Vector> = (0..n)
        .map(|j| {
            let mut r: Vector = a.iter().map(|row| row[j].clone()).collect();
            r.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let pivots = echelon(&mut rows, m);
    let gens = rows.into_iter().skip(pivots.len()).map(|r| r[m..].to_vec());
    Lattice::from_generators(n, gens)
}

/// `{c : Σ c_i rows_i = 0}`.
pub fn left_kernel(rows: &[Vector], dim: usize) -> Lattice {
    let k = rows.len();
    let transposed: Vec<Vector> = (0..dim).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    kernel(&transposed, k)
}

/// Nonzero diagonal of the Smith normal form, as a divisibility chain.
pub fn elementary_divisors(m: &[Vector]) -> Vec<BigInt> {
    let mut a: Vec<Vector> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            let (head, tail) = a.split_at_mut(i);
            axpy(&mut tail[0], &-q, &head[t]);
            if !a[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            for row in a.iter_mut() {
                let s = &q * &row[t];
                row[j] -= s;
            }
            if !a[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // Pivot must divide the rest of the block; otherwise fold a row in.
        let p = a[t][t].clone();
        let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &p).is_zero()));
        if let Some(i) = bad {
            let (head, tail) = a.split_at_mut(i);
            axpy(&mut head[t], &BigInt::one(), &tail[0]);
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    // Normalize to a divisibility chain.
    let n = diag.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = diag[i].gcd(&diag[j]);
            let l = diag[i].lcm(&diag[j]);
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

/// Determinant by fraction-free elimination.
pub fn determinant(m: &[Vector]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vector> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(dim: usize, rows: &[&[i64]]) -> Lattice {
        Lattice::from_generators(dim, rows.iter().map(|r| vec_from(r)))
    }

    #[test]
    fn hnf_is_canonical() {
        let a = lat(3, &[&[2, 4, 6], &[1, 1, 1]]);
        let b = lat(3, &[&[1, 1, 1], &[0, 2, 4], &[3, 5, 7]]);
        assert_eq!(a, b);
        assert_eq!(a.rank(), 2);
        assert!(a.contains(&vec_from(&[3, 5, 7])));
        assert!(!a.contains(&vec_from(&[0, 1, 2])));
    }

    #[test]
    fn kernel_and_intersection() {
        let k = kernel(&[vec_from(&[1, 2, 3])], 3);
        assert_eq!(k.rank(), 2);
        for v in k.basis() {
            let s: BigInt = v.iter().zip([1, 2, 3]).map(|(x, c)| x * c).sum();
            assert!(s.is_zero());
        }
        let a = lat(2, &[&[2, 0], &[0, 3]]);
        let b = lat(2, &[&[3, 0], &[0, 2]]);
        assert_eq!(a.intersect(&b), lat(2, &[&[6, 0], &[0, 6]]));
    }

    #[test]
    fn smith_invariants() {
        let d = elementary_divisors(&[vec_from(&[2, 4, 4]), vec_from(&[-6, 6, 12]), vec_from(&[10, -4, -16])]);
        assert_eq!(d, vec_from(&[2, 6, 12]));
        let full = Lattice::full(2);
        assert_eq!(full.quotient_invariants(&lat(2, &[&[2, 0], &[0, 2]])).unwrap(), vec_from(&[2, 2]));
        assert_eq!(full.quotient_invariants(&lat(2, &[&[4, 0], &[0, 1]])).unwrap(), vec_from(&[4]));
        assert!(full.quotient_invariants(&lat(2, &[&[1, 0]])).is_err());
    }

    #[test]
    fn determinant_matches_expansion() {
        let m = [vec_from(&[2, -1, 0]), vec_from(&[1, 3, 4]), vec_from(&[0, 5, -2])];
        assert_eq!(determinant(&m), BigInt::from(2 * (-6 - 20) + (-2)));
        assert_eq!(determinant(&[vec_from(&[0, 1]), vec_from(&[1, 0])]), BigInt::from(-1));
    }

    #[test]
    fn saturation() {
        let a = lat(2, &[&[2, 4]]);
        assert_eq!(a.saturation(), lat(2, &[&[1, 2]]));
    }
}
