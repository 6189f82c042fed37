//! H¹(H, Pic) for subgroups H of W(E6): Manin's formula, cyclic Tate groups,
//! the double-six cocycle, the class map and restriction criteria.
//!
//! Pic is modelled as `Z²⁷ / D0` with `D0` the radical of the pairing. Picard
//! coordinates are the blow-up basis `ℓ, e1..e6` with pairing `diag(1,−1,…,−1)`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{kernel, vec_from, Lattice, Vector};
use crate::lines27::{lines_of, DoubleSix, LineConfiguration, LineLabel};
use crate::perm::{Perm, N};
use crate::weyl::{context, PermGroup};

/// A vector in Picard coordinates `(ℓ, e1, …, e6)`.
pub type PicVec = [i64; 7];
/// A 7×7 integer matrix acting on column vectors.
pub type PicMat = [[i64; 7]; 7];

pub const PIC_RANK: usize = 7;

/// Finite abelian group by elementary divisors `d1 | d2 | …` (all > 1).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianInvariants(pub Vec<u64>);

impl AbelianInvariants {
    pub fn trivial() -> Self {
        AbelianInvariants(Vec::new())
    }

    pub fn from_bigints(d: &[BigInt]) -> Self {
        AbelianInvariants(d.iter().filter(|x| !x.is_one()).map(|x| x.to_u64().expect("small invariant")).collect())
    }

    pub fn order(&self) -> u64 {
        self.0.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_2_group(&self) -> bool {
        self.0.iter().all(|d| d.is_power_of_two())
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Pic as a quotient of the free group on the lines.
#[derive(Clone, Debug)]
pub struct PicardModel {
    /// Principal divisors: integer kernel of the pairing.
    pub d0: Lattice,
    /// Class of each line in Picard coordinates.
    pub line_class: [PicVec; N],
    /// Lift of each Picard basis vector to `Z²⁷`.
    section: [[i64; N]; PIC_RANK],
}

pub const PIC_GRAM: [i64; 7] = [1, -1, -1, -1, -1, -1, -1];

/// The anticanonical class `−K = 3ℓ − Σ e_i`.
pub const ANTICANONICAL: PicVec = [3, -1, -1, -1, -1, -1, -1];

pub fn pic_pair(a: &PicVec, b: &PicVec) -> i64 {
    (0..7).map(|i| PIC_GRAM[i] * a[i] * b[i]).sum()
}

pub fn mat_vec(m: &PicMat, v: &PicVec) -> PicVec {
    let mut out = [0; 7];
    for i in 0..7 {
        out[i] = (0..7).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

pub fn mat_mul(a: &PicMat, b: &PicMat) -> PicMat {
    let mut out = [[0; 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            out[i][j] = (0..7).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn identity_mat() -> PicMat {
    let mut m = [[0; 7]; 7];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn trace(m: &PicMat) -> i64 {
    (0..7).map(|i| m[i][i]).sum()
}

fn add(a: &PicVec, b: &PicVec) -> PicVec {
    let mut o = [0; 7];
    for i in 0..7 {
        o[i] = a[i] + b[i];
    }
    o
}

fn sub(a: &PicVec, b: &PicVec) -> PicVec {
    let mut o = [0; 7];
    for i in 0..7 {
        o[i] = a[i] - b[i];
    }
    o
}

impl PicardModel {
    pub fn new(cfg: &LineConfiguration) -> Result<Self> {
        let pairing: Vec<Vector> = cfg.matrix().iter().map(|r| vec_from(r)).collect();
        let d0 = kernel(&pairing, N);
        let mut line_class = [[0i64; 7]; N];
        for (i, c) in line_class.iter_mut().enumerate() {
            *c = match LineLabel::from_index(i) {
                LineLabel::E(a) => unit(a as usize),
                LineLabel::G(a) => {
                    let mut v = [-1; 7];
                    v[0] = 2;
                    v[a as usize] = 0;
                    v
                }
                LineLabel::F(a, b) => {
                    let mut v = [0; 7];
                    v[0] = 1;
                    v[a as usize] = -1;
                    v[b as usize] = -1;
                    v
                }
            };
        }
        let mut section = [[0i64; N]; PIC_RANK];
        section[0][LineLabel::F(1, 2).index()] = 1;
        section[0][LineLabel::E(1).index()] = 1;
        section[0][LineLabel::E(2).index()] = 1;
        for i in 1..7 {
            section[i][LineLabel::E(i as u8).index()] = 1;
        }
        let model = PicardModel { d0, line_class, section };

        // Consistency: pairing is induced, D0 = ker(projection), section splits.
        for a in 0..N {
            for b in 0..N {
                if pic_pair(&model.line_class[a], &model.line_class[b]) != cfg.pairing(a, b) {
                    return Err(Error::Inconsistent("Picard pairing mismatch".into()));
                }
            }
        }
        let proj_rows: Vec<Vector> =
            (0..7).map(|k| (0..N).map(|j| BigInt::from(model.line_class[j][k])).collect()).collect();
        if kernel(&proj_rows, N) != model.d0 || model.d0.rank() != 20 {
            return Err(Error::Inconsistent("radical differs from projection kernel".into()));
        }
        for k in 0..7 {
            if model.project(&model.section[k]) != unit(k) {
                return Err(Error::Inconsistent("section does not split".into()));
            }
        }
        Ok(model)
    }

    /// The shared model over the canonical configuration.
    pub fn shared() -> &'static PicardModel {
        static M: OnceLock<PicardModel> = OnceLock::new();
        M.get_or_init(|| PicardModel::new(&context().cfg).expect("consistent Picard model"))
    }

    /// Class in Pic of a divisor `Σ v_i L_i`.
    pub fn project(&self, v: &[i64]) -> PicVec {
        let mut out = [0; 7];
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                for k in 0..7 {
                    out[k] += c * self.line_class[i][k];
                }
            }
        }
        out
    }

    pub fn project_mask(&self, mask: u32) -> PicVec {
        let mut v = [0i64; N];
        for i in lines_of(mask) {
            v[i] = 1;
        }
        self.project(&v)
    }

    /// Matrix of `g` on Pic: column `k` is the class of `g` applied to a lift of basis vector `k`.
    pub fn action(&self, g: &Perm) -> PicMat {
        let mut m = [[0i64; 7]; 7];
        for k in 0..7 {
            let mut moved = [0i64; N];
            for j in 0..N {
                moved[g.apply(j)] += self.section[k][j];
            }
            let col = self.project(&moved);
            for i in 0..7 {
                m[i][k] = col[i];
            }
        }
        m
    }

    pub fn is_principal(&self, v: &[i64]) -> bool {
        self.d0.contains(&vec_from(v))
    }
}

fn unit(k: usize) -> PicVec {
    let mut v = [0; 7];
    v[k] = 1;
    v
}

/// Rank of the H-invariant part of Pic (rank of the Gram matrix of orbit sums).
pub fn invariant_rank(h: &PermGroup) -> usize {
    let model = PicardModel::shared();
    let gens = h.orbits().into_iter().map(|o| {
        let mut v = [0i64; N];
        for i in o {
            v[i] = 1;
        }
        vec_from(&model.project(&v))
    });
    Lattice::from_generators(7, gens).rank()
}

/// H¹(H, Pic) via Manin's formula: invariants of `(ND ∩ D0) / ND0`.
pub fn manin_h1(h: &PermGroup) -> AbelianInvariants {
    manin_h1_from_orbits(&h.orbits(), h.order())
}

/// Manin's formula depends only on the line orbits and the group order:
/// `N e_j = (|H|/|O|) Σ_{k∈O} e_k` for the orbit `O` of `j`.
pub fn manin_h1_from_orbits(orbits: &[Vec<usize>], order: usize) -> AbelianInvariants {
    let model = PicardModel::shared();
    let mut orbit_of = [0usize; N];
    for (k, o) in orbits.iter().enumerate() {
        for &i in o {
            orbit_of[i] = k;
        }
    }
    let weight: Vec<BigInt> = orbits.iter().map(|o| BigInt::from(order / o.len())).collect();
    let norm = |v: &[BigInt]| -> Vector {
        let mut sums = vec![BigInt::zero(); orbits.len()];
        for i in 0..N {
            sums[orbit_of[i]] += &v[i];
        }
        (0..N).map(|i| &sums[orbit_of[i]] * &weight[orbit_of[i]]).collect()
    };
    let nd = Lattice::from_generators(
        N,
        orbits.iter().enumerate().map(|(k, o)| {
            let mut v = vec![BigInt::zero(); N];
            for &i in o {
                v[i] = weight[k].clone();
            }
            v
        }),
    );
    let nd0 = model.d0.map(N, norm);
    let top = nd.intersect(&model.d0);
    assert!(top.contains_lattice(&nd0), "ND0 ⊆ ND ∩ D0 must hold");
    AbelianInvariants::from_bigints(&top.quotient_invariants(&nd0).expect("finite quotient"))
}

/// Which Tate group of a cyclic group of order two to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TateDegree {
    /// `Ĥ⁻¹ = ker N / im(σ−1)`; equal to H¹ for a group of order two.
    MinusOne,
    /// `Ĥ⁰ = ker(σ−1) / im(1+σ)`.
    Zero,
    /// `H¹ = ker(1+σ) / im(σ−1)`.
    One,
}

/// Tate cohomology of `Z^n` under an involution `sigma` (acting on column vectors).
pub fn cyclic_tate(sigma: &[Vec<i64>], degree: TateDegree) -> Result<AbelianInvariants> {
    let n = sigma.len();
    let sq: Vec<Vec<i64>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| sigma[i][k] * sigma[k][j]).sum()).collect()).collect();
    if (0..n).any(|i| (0..n).any(|j| sq[i][j] != (i == j) as i64)) {
        return Err(Error::InvalidInput("sigma is not an involution".into()));
    }
    let plus: Vec<Vector> =
        (0..n).map(|i| (0..n).map(|j| BigInt::from(sigma[i][j] + (i == j) as i64)).collect()).collect();
    let minus: Vec<Vector> =
        (0..n).map(|i| (0..n).map(|j| BigInt::from(sigma[i][j] - (i == j) as i64)).collect()).collect();
    let columns = |m: &[Vector]| Lattice::from_generators(n, (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()));
    let (ker, im) = match degree {
        TateDegree::MinusOne | TateDegree::One => (kernel(&plus, n), columns(&minus)),
        TateDegree::Zero => (kernel(&minus, n), columns(&plus)),
    };
    let inv = ker.quotient_invariants(&im).map_err(Error::Inconsistent)?;
    Ok(AbelianInvariants::from_bigints(&inv))
}

/// `(S0^σ ∩ NS) / NS0` for `S = Z^n` with involution `sigma` and a σ-stable
/// sublattice `s0`. Returns the numerator lattice and the invariants.
pub fn norm_quotient(sigma: &[Vec<i64>], s0: &Lattice) -> (Lattice, Lattice, AbelianInvariants) {
    let n = sigma.len();
    let apply = |v: &[BigInt]| -> Vector {
        (0..n).map(|i| (0..n).map(|j| BigInt::from(sigma[i][j]) * &v[j]).sum::<BigInt>() + &v[i]).collect()
    };
    let ns = Lattice::full(n).map(n, apply);
    let fixed: Vec<Vector> =
        (0..n).map(|i| (0..n).map(|j| BigInt::from(sigma[i][j] - (i == j) as i64)).collect()).collect();
    let s0_inv = s0.intersect(&kernel(&fixed, n));
    let top = s0_inv.intersect(&ns);
    let ns0 = s0.map(n, apply);
    let inv = top.quotient_invariants(&ns0).expect("finite quotient");
    (ns, top, AbelianInvariants::from_bigints(&inv))
}

/// A 1-cocycle `H → Pic` specified on generators, `c(gh) = c(g) + g·c(h)`.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub group: PermGroup,
    pub values: Vec<(Perm, PicVec)>,
}

impl Cocycle {
    /// Extends the generator values over the whole group, verifying well-definedness.
    pub fn expand(&self) -> Result<Vec<(Perm, PicVec)>> {
        let model = PicardModel::shared();
        let mut known: std::collections::HashMap<Perm, PicVec> = std::collections::HashMap::new();
        known.insert(Perm::identity(), [0; 7]);
        let mut order = vec![Perm::identity()];
        let mut i = 0;
        while i < order.len() {
            let g = order[i];
            let cg = known[&g];
            let ag = model.action(&g);
            for (s, cs) in &self.values {
                let gs = g.compose(s);
                let v = add(&cg, &mat_vec(&ag, cs));
                match known.get(&gs) {
                    Some(w) if *w != v => {
                        return Err(Error::InvalidInput("cocycle relation violated".into()));
                    }
                    Some(_) => {}
                    None => {
                        known.insert(gs, v);
                        order.push(gs);
                    }
                }
            }
            i += 1;
        }
        Ok(order.into_iter().map(|g| (g, known[&g])).collect())
    }

    pub fn minus(&self, other: &Cocycle) -> Cocycle {
        let values = self.values.iter().zip(&other.values).map(|((g, a), (_, b))| (*g, sub(a, b))).collect();
        Cocycle { group: self.group.clone(), values }
    }

    pub fn plus(&self, other: &Cocycle) -> Cocycle {
        let values = self.values.iter().zip(&other.values).map(|((g, a), (_, b))| (*g, add(a, b))).collect();
        Cocycle { group: self.group.clone(), values }
    }
}

/// Value of the double-six cocycle at `g ∈ stabilizer(d)`: zero on sixer-preserving
/// elements, the class of `5E − 2F` on swapping ones, where `E` sums the
/// lexicographically least sixer and `F` the 15 complementary lines.
pub fn double_six_value(d: &DoubleSix, g: &Perm) -> PicVec {
    if d.is_swapped_by(g) {
        let model = PicardModel::shared();
        let e = model.project_mask(d.sixers[0]);
        let f = model.project_mask(d.complement());
        let mut v = [0; 7];
        for i in 0..7 {
            v[i] = 5 * e[i] - 2 * f[i];
        }
        v
    } else {
        [0; 7]
    }
}

/// The double-six cocycle restricted to `h ≤ stabilizer(d)`.
pub fn double_six_cocycle(d: &DoubleSix, h: &PermGroup) -> Result<Cocycle> {
    if !h.fixes_double_six(d) {
        return Err(Error::InvalidInput(format!("group does not stabilize {d}")));
    }
    let values = h.gens().iter().map(|g| (*g, double_six_value(d, g))).collect();
    Ok(Cocycle { group: h.clone(), values })
}

/// Whether `c(s) = s·x − x` is solvable in Pic simultaneously for all generators `s`.
pub fn is_coboundary(c: &Cocycle) -> bool {
    let model = PicardModel::shared();
    let k = c.values.len();
    if k == 0 {
        return true;
    }
    let dim = 7 * k;
    let mats: Vec<PicMat> = c.values.iter().map(|(g, _)| model.action(g)).collect();
    let columns = (0..7).map(|j| {
        let mut col = Vec::with_capacity(dim);
        for m in &mats {
            for i in 0..7 {
                col.push(BigInt::from(m[i][j] - (i == j) as i64));
            }
        }
        col
    });
    let image = Lattice::from_generators(dim, columns);
    let rhs: Vector = c.values.iter().flat_map(|(_, v)| v.iter().map(|&x| BigInt::from(x))).collect();
    image.contains(&rhs)
}

/// Class of an invariant double-six in H¹(H, Pic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassId {
    Zero,
    /// Canonical index (in the full list of 36) of the least H-invariant
    /// double-six with the same class.
    Nonzero(usize),
}

/// H-invariant double-sixes as canonical indices.
pub fn invariant_double_sixes(h: &PermGroup) -> Vec<usize> {
    let st = &context().structures;
    (0..st.double_sixes.len()).filter(|&i| h.fixes_double_six(&st.double_sixes[i])).collect()
}

pub fn class_map(h: &PermGroup, d: &DoubleSix) -> Result<ClassId> {
    let c = double_six_cocycle(d, h)?;
    if is_coboundary(&c) {
        return Ok(ClassId::Zero);
    }
    let st = &context().structures;
    for i in invariant_double_sixes(h) {
        let e = &st.double_sixes[i];
        if e == d || is_coboundary(&c.minus(&double_six_cocycle(e, h)?)) {
            return Ok(ClassId::Nonzero(i));
        }
    }
    unreachable!("d itself is invariant")
}

/// Lemma-style sufficient criteria for injectivity of restriction `H¹(H) → H¹(H')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    SameOrbitStructure,
    OddIndexTwoGroup,
    NormalEqualRank,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::SameOrbitStructure => "same-orbit-structure",
            Criterion::OddIndexTwoGroup => "odd-index-2-group",
            Criterion::NormalEqualRank => "normal-equal-rank",
        })
    }
}

pub fn restriction_criteria(h: &PermGroup, sub: &PermGroup) -> Result<BTreeSet<Criterion>> {
    if !sub.is_subgroup_of(h) {
        return Err(Error::InvalidInput("H' is not contained in H".into()));
    }
    let mut out = BTreeSet::new();
    if h.orbit_count() == sub.orbit_count() {
        out.insert(Criterion::SameOrbitStructure);
    }
    if (h.order() / sub.order()) % 2 == 1 && manin_h1(h).is_2_group() {
        out.insert(Criterion::OddIndexTwoGroup);
    }
    if sub.is_normal_in(h) && invariant_rank(h) == invariant_rank(sub) {
        out.insert(Criterion::NormalEqualRank);
    }
    Ok(out)
}

/// Aggregate counts of a census.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CensusSummary {
    pub total: usize,
    pub trivial: usize,
    pub sixer: usize,
    /// Trivial H¹ without stabilizing a sixer.
    pub extra_trivial: usize,
    /// H¹ of order 2 or 4.
    pub order_2_or_4: usize,
    /// Any other nontrivial value.
    pub other: usize,
}

impl fmt::Display for CensusSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} classes / {} sixer / {} extra-trivial / {} nontrivial",
            self.total,
            self.sixer,
            self.extra_trivial,
            self.order_2_or_4 + self.other
        )
    }
}

/// Fills H¹ into each record and aggregates.
pub fn census_report(records: &mut [crate::subgroups::SubgroupClassRecord]) -> CensusSummary {
    use rayon::prelude::*;
    records.par_iter_mut().for_each(|r| {
        if r.h1.is_none() {
            r.h1 = Some(manin_h1(&r.representative));
        }
    });
    let mut s = CensusSummary { total: records.len(), ..Default::default() };
    for r in records.iter() {
        let h = r.h1.as_ref().expect("filled");
        if r.stabilizes_sixer {
            s.sixer += 1;
        }
        if h.is_trivial() {
            s.trivial += 1;
            if !r.stabilizes_sixer {
                s.extra_trivial += 1;
            }
        } else if matches!(h.order(), 2 | 4) {
            s.order_2_or_4 += 1;
        } else {
            s.other += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{standard_double_six, u1, u2, u3};

    #[test]
    fn picard_model_consistency() {
        let m = PicardModel::shared();
        assert_eq!(m.d0.rank(), 20);
        let all: u32 = (1 << 27) - 1;
        let s = m.project_mask(all);
        assert_eq!(s, ANTICANONICAL.map(|x| 9 * x));
        for i in 0..N {
            assert_eq!(pic_pair(&m.line_class[i], &ANTICANONICAL), 1);
        }
    }

    #[test]
    fn principal_divisors() {
        let m = PicardModel::shared();
        let mut v = [0i64; N];
        for i in 0..6 {
            v[i] = 5;
            v[6 + i] = 5;
        }
        for x in v.iter_mut().skip(12) {
            *x = -4;
        }
        assert!(m.is_principal(&v));
        let lab = |s: &str| s.parse::<LineLabel>().unwrap().index();
        let mut w = [0i64; N];
        for s in ["E1", "E2", "E3", "G1", "G2", "G3", "F12", "F13", "F23"] {
            w[lab(s)] += 1;
        }
        for a in 1..=3u8 {
            for b in 4..=6u8 {
                w[LineLabel::F(a, b).index()] -= 1;
            }
        }
        assert!(m.is_principal(&w));
    }

    #[test]
    fn action_is_isometry_and_homomorphism() {
        let m = PicardModel::shared();
        let g = u1().elements()[17];
        let h = u1().elements()[901];
        let (ag, ah) = (m.action(&g), m.action(&h));
        assert_eq!(mat_mul(&ag, &ah), m.action(&g.compose(&h)));
        for i in 0..N {
            assert_eq!(mat_vec(&ag, &m.line_class[i]), m.line_class[g.apply(i)]);
        }
    }

    #[test]
    fn manin_values() {
        assert_eq!(manin_h1(u1()), AbelianInvariants(vec![2]));
        assert_eq!(manin_h1(&u2()), AbelianInvariants(vec![2]));
        assert_eq!(manin_h1(&u3()), AbelianInvariants(vec![2, 2]));
        assert!(manin_h1(&PermGroup::trivial()).is_trivial());
        let sixer = u1().filter(|g| !standard_double_six().is_swapped_by(g));
        assert_eq!(sixer.order(), 720);
        assert!(manin_h1(&sixer).is_trivial());
    }

    #[test]
    fn tate_examples() {
        let swap = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]];
        assert!(cyclic_tate(&swap, TateDegree::MinusOne).unwrap().is_trivial());
        assert!(cyclic_tate(&[vec![1]], TateDegree::MinusOne).unwrap().is_trivial());
        assert_eq!(cyclic_tate(&[vec![-1]], TateDegree::One).unwrap(), AbelianInvariants(vec![2]));
        assert_eq!(cyclic_tate(&[vec![1]], TateDegree::Zero).unwrap(), AbelianInvariants(vec![2]));
        assert!(cyclic_tate(&[vec![2]], TateDegree::One).is_err());
    }

    #[test]
    fn double_six_cocycle_facts() {
        let d = standard_double_six();
        let c = double_six_cocycle(&d, u1()).unwrap();
        assert!(c.expand().is_ok());
        assert!(!is_coboundary(&c));
        let even = u1().filter(|g| !d.is_swapped_by(g));
        assert!(is_coboundary(&double_six_cocycle(&d, &even).unwrap()));
        assert!(is_coboundary(&double_six_cocycle(&d, &PermGroup::trivial()).unwrap()));
        assert_eq!(double_six_value(&d, &Perm::identity()), [0; 7]);
    }
}
