//! The critical-prime pipeline: which places can carry a Brauer–Manin
//! obstruction for the surface attached to a sextic.
//!
//! `L1` collects the primes ramified in `Q(√core)`, `L2` the bad primes that are
//! neither split nor free of liftable singular points. Each candidate is then
//! tested with the local `H¹` criterion: at unramified primes through the cyclic
//! group generated by Frobenius, elsewhere by enumerating every subgroup of the
//! double-six stabilizer that could be the local Galois image given the
//! factorization of `f` over `Q_p`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{all_root_perms, coble_disc, frobenius_line_action, prime_behavior, real_components, root_action};
use super::{local_quadratic_behavior, PrimeBehavior, RootPerm, SexticSpec, SplittingData};
use crate::arith::{reduce_mod, valuation_rat};
use crate::cohomology::{manin_h1, AbelianInvariants};
use crate::error::Result;
use crate::local_arith::singular::{
    has_bad_reduction, lift_depth, partials_resultant, singular_reduction_report, verify_annotated_bad_prime,
};
use crate::local_arith::{Place, SurfaceModel};
use crate::perm::Perm;
use crate::poly::{FpPoly, QPoly};
use crate::subgroups::{u1_class_h1, u1_classes};
use crate::weyl::PermGroup;

/// Largest prime for which the exhaustive singular-point lifting test is run.
pub const LIFT_TEST_LIMIT: u64 = 400;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalOptions {
    /// Bad primes are searched up to this bound.
    pub search_bound: u64,
    /// Bad primes beyond the bound supplied by the user.
    pub annotated: Vec<u64>,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions { search_bound: 50, annotated: Vec::new() }
    }
}

/// Outcome of the local `H¹` criterion at a prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalTest {
    NotRun,
    /// Unramified prime: `H¹` of the cyclic group generated by Frobenius.
    Frobenius {
        cycle_type: Vec<usize>,
        flip: bool,
        trace: i64,
        h1: AbelianInvariants,
    },
    /// Ramified or bad prime: candidate local Galois images consistent with the
    /// factorization of `f` over `Q_p`, and how many have nontrivial `H¹`.
    Candidates {
        consistent: usize,
        nontrivial: usize,
    },
}

impl LocalTest {
    pub fn is_trivial(&self) -> Option<bool> {
        match self {
            LocalTest::NotRun => None,
            LocalTest::Frobenius { h1, .. } => Some(h1.is_trivial()),
            LocalTest::Candidates { consistent, nontrivial } => (*consistent > 0).then_some(*nontrivial == 0),
        }
    }
}

impl fmt::Display for LocalTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalTest::NotRun => f.write_str("-"),
            LocalTest::Frobenius { cycle_type, flip, trace, h1 } => {
                write!(f, "Frobenius {cycle_type:?}{} tr={trace} H1={h1}", if *flip { " flip" } else { "" })
            }
            LocalTest::Candidates { consistent, nontrivial } => {
                write!(f, "candidates {consistent}, nontrivial H1 {nontrivial}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Kept,
    /// Split in `Q(√core)`.
    Split,
    /// No singular `F_p`-point lifts.
    NoLiftingSingularity,
    /// The local `H¹` criterion excludes the prime.
    TrivialLocalH1,
    /// Kept because its status could not be decided within the limits.
    Uncertified,
    /// Good prime, unramified in `Q(√core)`: never critical.
    Good,
}

impl Verdict {
    pub fn is_kept(self) -> bool {
        matches!(self, Verdict::Kept | Verdict::Uncertified)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Kept => "kept",
            Verdict::Split => "removed: split",
            Verdict::NoLiftingSingularity => "removed: no lifting singular point",
            Verdict::TrivialLocalH1 => "removed: local H1 trivial",
            Verdict::Uncertified => "kept: uncertified",
            Verdict::Good => "good",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeEntry {
    pub place: Place,
    pub behavior: Option<PrimeBehavior>,
    pub ramified: bool,
    /// `None` when the prime was not examined for bad reduction.
    pub bad: Option<bool>,
    pub annotated: bool,
    /// Lifting depth and whether some singular point lifts.
    pub lifting: Option<(u32, bool)>,
    pub local: LocalTest,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalReport {
    pub core: BigInt,
    pub d4: BigRational,
    pub components: u8,
    pub search_bound: u64,
    pub l1: Vec<u64>,
    pub l2: Vec<u64>,
    pub entries: Vec<PrimeEntry>,
    pub final_list: Vec<Place>,
    pub uncertified: Vec<u64>,
}

impl fmt::Display for CriticalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        writeln!(f, "core {}  d4 {}  real components {}", self.core, self.d4, self.components)?;
        writeln!(f, "L1 = {{{}}}", list(&self.l1))?;
        writeln!(f, "L2 = {{{}}}  (bad primes searched up to {})", list(&self.l2), self.search_bound)?;
        writeln!(f, "place\tbehavior\tbad\tlifting\tlocal test\tverdict")?;
        for e in &self.entries {
            let bad = match e.bad {
                Some(true) if e.annotated => "annotated",
                Some(true) => "yes",
                Some(false) => "no",
                None => "-",
            };
            let lifting =
                e.lifting.map_or("-".to_string(), |(k, l)| format!("k={k} {}", if l { "lifts" } else { "none" }));
            let behavior = e.behavior.map_or("-".to_string(), |b| b.to_string());
            writeln!(f, "{}\t{behavior}\t{bad}\t{lifting}\t{}\t{}", e.place, e.local, e.verdict)?;
        }
        let fin: Vec<String> = self.final_list.iter().map(Place::to_string).collect();
        write!(f, "L = {{{}}}", fin.join(", "))?;
        if !self.uncertified.is_empty() {
            write!(f, "  (uncertified: {})", list(&self.uncertified))?;
        }
        Ok(())
    }
}

pub fn critical_primes(f: &SexticSpec, s: &SurfaceModel, opts: &CriticalOptions) -> Result<CriticalReport> {
    let split = coble_disc(f)?;
    let components = real_components(f, &split.d4);
    let core = split.core.clone();
    let quadratic = !core.is_one();
    let behavior = |p: u64| quadratic.then(|| prime_behavior(&core, Place::Finite(p)));
    let resultant = partials_resultant(s);

    let bad: BTreeSet<u64> = crate::arith::primes_up_to(opts.search_bound)
        .into_iter()
        .filter(|&p| has_bad_reduction(s, p, &resultant))
        .collect();
    let annotated: BTreeSet<u64> = opts.annotated.iter().copied().filter(|p| !bad.contains(p)).collect();
    let mut primes: BTreeSet<u64> = split.ramified.iter().copied().collect();
    primes.extend(&bad);
    primes.extend(&annotated);

    let mut entries = Vec::new();
    let mut l2 = Vec::new();
    for &p in &primes {
        let ramified = split.ramified.contains(&p);
        let is_annotated = annotated.contains(&p);
        let is_bad = if is_annotated { verify_annotated_bad_prime(s, p) || p < 5 } else { bad.contains(&p) };
        let b = behavior(p);
        let mut entry = PrimeEntry {
            place: Place::Finite(p),
            behavior: b,
            ramified,
            bad: Some(is_bad),
            annotated: is_annotated,
            lifting: None,
            local: LocalTest::NotRun,
            verdict: Verdict::Kept,
        };
        let mut candidate = ramified;
        if is_bad && !ramified {
            if b == Some(PrimeBehavior::Split) {
                entry.verdict = Verdict::Split;
            } else if p > LIFT_TEST_LIMIT {
                entry.verdict = Verdict::Uncertified;
                l2.push(p);
            } else {
                let k = lift_depth(&resultant, p);
                let report = singular_reduction_report(s, p, k);
                let lifts = !report.droppable();
                entry.lifting = Some((k, lifts));
                if lifts {
                    l2.push(p);
                    candidate = true;
                } else {
                    entry.verdict = Verdict::NoLiftingSingularity;
                }
            }
        } else if !is_bad && !ramified {
            entry.verdict = Verdict::Good;
        }
        if candidate {
            entry.local = local_h1_test(f, &split, p);
            entry.verdict = match entry.local.is_trivial() {
                Some(true) => Verdict::TrivialLocalH1,
                Some(false) => Verdict::Kept,
                None => Verdict::Uncertified,
            };
        }
        entries.push(entry);
    }

    let infinite_critical = core.is_negative() && components == 2;
    entries.push(PrimeEntry {
        place: Place::Infinite,
        behavior: quadratic.then(|| prime_behavior(&core, Place::Infinite)),
        ramified: core.is_negative(),
        bad: None,
        annotated: false,
        lifting: None,
        local: LocalTest::NotRun,
        verdict: if infinite_critical { Verdict::Kept } else { Verdict::Good },
    });

    let final_list = entries.iter().filter(|e| e.verdict.is_kept()).map(|e| e.place).collect();
    let uncertified = entries
        .iter()
        .filter(|e| e.verdict == Verdict::Uncertified)
        .filter_map(|e| match e.place {
            Place::Finite(p) => Some(p),
            Place::Infinite => None,
        })
        .collect();
    Ok(CriticalReport {
        core,
        d4: split.d4,
        components,
        search_bound: opts.search_bound,
        l1: split.ramified.clone(),
        l2,
        entries,
        final_list,
        uncertified,
    })
}

/// Local `H¹` criterion at `p`: Frobenius when `p` is unramified in the
/// splitting field, otherwise the candidate analysis.
pub fn local_h1_test(f: &SexticSpec, split: &SplittingData, p: u64) -> LocalTest {
    match frobenius_line_action(f, p, &split.core) {
        Ok(frob) => {
            let h1 = manin_h1(&PermGroup::generate(&[frob.perm]));
            LocalTest::Frobenius { cycle_type: frob.cycle_type, flip: frob.flip, trace: frob.trace, h1 }
        }
        Err(_) => match LocalRoots::new(f, p) {
            Some(local) => {
                let quadratic = [&f.disc, &split.d, &split.d4].map(|x| local_quadratic_behavior(x, p));
                let (consistent, nontrivial) = count_candidates(&local, quadratic, p);
                LocalTest::Candidates { consistent, nontrivial }
            }
            None => LocalTest::NotRun,
        },
    }
}

/// How the roots of `f` over `Q_p` are constrained by the factorization modulo `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    /// Irreducible unramified factor of degree `d` over `Q_p`: one Galois orbit,
    /// fixed pointwise by inertia.
    Unramified { degree: usize },
    /// Roots `α` of a repeated linear factor with `v_p(α − a)` of denominator `b`:
    /// a union of orbits, inertia orbits of size divisible by `b`.
    Slope { denominator: u64 },
    /// Roots reducing to a repeated factor of degree `d > 1`: a union of orbits,
    /// each of size divisible by `d`.
    Repeated { degree: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub size: usize,
    pub kind: SegmentKind,
}

/// The root segments of `f` at `p`, labeled consecutively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRoots {
    pub segments: Vec<Segment>,
}

impl LocalRoots {
    /// `None` when `f` is not `p`-integral.
    pub fn new(f: &SexticSpec, p: u64) -> Option<Self> {
        let poly = f.poly();
        let fp = poly.reduce(p)?;
        let mut segments = Vec::new();
        for (part, m) in fp.squarefree_factors() {
            for (d, g) in part.distinct_degree() {
                let count = g.degree() as usize / d;
                if m == 1 {
                    segments
                        .extend((0..count).map(|_| Segment { size: d, kind: SegmentKind::Unramified { degree: d } }));
                } else if d > 1 {
                    segments.extend(
                        (0..count).map(|_| Segment { size: d * m as usize, kind: SegmentKind::Repeated { degree: d } }),
                    );
                } else {
                    for (a, _) in FpPoly::roots(&g) {
                        segments.extend(near_root_segments(&poly.shift(&BigRational::from_integer(a.into())), p));
                    }
                }
            }
        }
        debug_assert_eq!(segments.iter().map(|s| s.size).sum::<usize>(), 6);
        Some(LocalRoots { segments })
    }

    /// Degrees of the irreducible factors over `Q_p` when every root generates
    /// an unramified extension.
    pub fn unramified_degrees(&self) -> Option<Vec<usize>> {
        self.segments
            .iter()
            .map(|s| match s.kind {
                SegmentKind::Unramified { degree } => Some(degree),
                _ => None,
            })
            .collect()
    }

    fn segment_of(&self) -> [usize; 6] {
        let mut out = [0; 6];
        let mut r = 0;
        for (k, s) in self.segments.iter().enumerate() {
            for _ in 0..s.size {
                out[r] = k;
                r += 1;
            }
        }
        out
    }
}

/// Segments for the roots `x` of `g(x) = f(x + a)` with `v_p(x) > 0`. Integral
/// slopes with separable residual polynomial resolve into unramified factors.
fn near_root_segments(g: &QPoly, p: u64) -> Vec<Segment> {
    let lowest = g.0.iter().position(|c| !c.is_zero()).expect("nonzero polynomial");
    // Exact roots x = 0, i.e. rational roots of f.
    let mut out: Vec<Segment> =
        (0..lowest).map(|_| Segment { size: 1, kind: SegmentKind::Unramified { degree: 1 } }).collect();
    let mut start = lowest;
    for (len, slope) in g.newton_polygon(p) {
        if slope.is_negative() {
            out.extend(resolve_segment(g, p, start, len, &slope));
        }
        start += len;
    }
    out
}

fn resolve_segment(g: &QPoly, p: u64, start: usize, len: usize, slope: &BigRational) -> Vec<Segment> {
    let denominator: u64 = slope.denom().try_into().expect("small denominator");
    let fallback = vec![Segment { size: len, kind: SegmentKind::Slope { denominator } }];
    if denominator != 1 {
        return fallback;
    }
    let step: i64 = slope.numer().try_into().expect("small slope");
    let base = valuation_rat(&g.0[start], p);
    let residual: Vec<u64> = (0..=len)
        .map(|j| {
            let c = &g.0[start + j];
            let target = base + j as i64 * step;
            if c.is_zero() || valuation_rat(c, p) != target {
                return 0;
            }
            let pt = BigRational::from_integer(BigInt::from(p).pow(target.unsigned_abs() as u32));
            let unit = if target >= 0 { c / pt } else { c * pt };
            reduce_mod(&unit, p).expect("p-adic unit")
        })
        .collect();
    let r = FpPoly::new(residual, p);
    if !r.is_squarefree() {
        return fallback;
    }
    r.factor_degrees()
        .into_iter()
        .map(|(d, _)| Segment { size: d, kind: SegmentKind::Unramified { degree: d } })
        .collect()
}

/// Root orbits of a set of line permutations in the double-six stabilizer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct RootOrbits {
    id: [u8; 6],
    size: [u8; 6],
    /// Whether the quadratic characters of `Q(√Δ)`, `Q(√D)` and `Q(√d4)`
    /// (odd root permutation, sixer exchange, and their product) are nontrivial.
    chars: [bool; 3],
}

impl RootOrbits {
    fn of(elements: &[Perm]) -> Self {
        let mut id: [u8; 6] = [0, 1, 2, 3, 4, 5];
        let mut chars = [false; 3];
        for g in elements {
            let (sigma, flip) = root_action(g);
            let odd = is_odd(&sigma);
            chars[0] |= odd;
            chars[1] |= flip;
            chars[2] |= odd != flip;
            for i in 0..6 {
                let (a, b) = (id[i], id[sigma[i] as usize]);
                if a != b {
                    let (lo, hi) = (a.min(b), a.max(b));
                    id.iter_mut().filter(|x| **x == hi).for_each(|x| *x = lo);
                }
            }
        }
        let size = std::array::from_fn(|i| id.iter().filter(|&&x| x == id[i]).count() as u8);
        RootOrbits { id, size, chars }
    }
}

fn is_odd(sigma: &RootPerm) -> bool {
    let mut inversions = 0;
    for i in 0..6 {
        for j in i + 1..6 {
            inversions += (sigma[i] > sigma[j]) as u32;
        }
    }
    inversions % 2 == 1
}

/// A normal subgroup `I ⊴ H` with `H/I` cyclic, stored with what the local
/// tests need.
struct NormalSub {
    elements: Vec<Perm>,
    orbits: RootOrbits,
}

struct ClassCandidates {
    group: &'static PermGroup,
    nontrivial_h1: bool,
    orbits: RootOrbits,
    normals: Vec<NormalSub>,
}

/// Candidate data for every class of subgroups of the double-six stabilizer (cached).
fn class_candidates() -> &'static [ClassCandidates] {
    static C: OnceLock<Vec<ClassCandidates>> = OnceLock::new();
    C.get_or_init(|| {
        u1_classes()
            .par_iter()
            .zip(u1_class_h1().par_iter())
            .map(|(h, h1)| ClassCandidates {
                group: h,
                nontrivial_h1: !h1.is_trivial(),
                orbits: RootOrbits::of(h.gens()),
                normals: cyclic_quotient_kernels(h)
                    .into_iter()
                    .map(|elements| {
                        let orbits = RootOrbits::of(&elements);
                        NormalSub { elements, orbits }
                    })
                    .collect(),
            })
            .collect()
    })
}

/// All normal subgroups `I` of `h` with `h/I` cyclic, as element lists.
fn cyclic_quotient_kernels(h: &PermGroup) -> Vec<Vec<Perm>> {
    let elements = h.elements();
    let index: HashMap<Perm, usize> = elements.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let commutators: BTreeSet<Perm> = elements
        .iter()
        .flat_map(|a| elements.iter().map(move |b| a.compose(b).compose(&a.inverse()).compose(&b.inverse())))
        .collect();
    let derived = PermGroup::generate(&commutators.into_iter().collect::<Vec<_>>());

    // Cosets of the derived subgroup form the abelianization.
    let mut coset = vec![usize::MAX; elements.len()];
    let mut reps = Vec::new();
    for (i, g) in elements.iter().enumerate() {
        if coset[i] != usize::MAX {
            continue;
        }
        for k in derived.elements() {
            coset[index[&g.compose(k)]] = reps.len();
        }
        reps.push(*g);
    }
    let n = reps.len();
    let mul: Vec<Vec<usize>> =
        (0..n).map(|a| (0..n).map(|b| coset[index[&reps[a].compose(&reps[b])]]).collect()).collect();
    let identity = coset[index[&Perm::identity()]];

    let close = |gens: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([identity]);
        let mut frontier = vec![identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = mul[x][g];
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    };
    let mut subgroups: BTreeSet<BTreeSet<usize>> = BTreeSet::from([BTreeSet::from([identity])]);
    let mut queue: Vec<BTreeSet<usize>> = vec![BTreeSet::from([identity])];
    while let Some(s) = queue.pop() {
        for x in 0..n {
            if s.contains(&x) {
                continue;
            }
            let mut gens = s.clone();
            gens.insert(x);
            let t = close(&gens);
            if subgroups.insert(t.clone()) {
                queue.push(t);
            }
        }
    }

    let quotient_order = |s: &BTreeSet<usize>, x: usize| {
        let (mut y, mut k) = (x, 1);
        while !s.contains(&y) {
            y = mul[y][x];
            k += 1;
        }
        k
    };
    subgroups
        .into_iter()
        .filter(|s| {
            let q = n / s.len();
            (0..n).any(|x| quotient_order(s, x) == q)
        })
        .map(|s| elements.iter().enumerate().filter(|(i, _)| s.contains(&coset[*i])).map(|(_, g)| *g).collect())
        .collect()
}

/// Whether `(H, I)` has the shape of a local Galois group with its inertia
/// subgroup: `I` has a normal Sylow `p`-subgroup `P` with `I/P` cyclic, and some
/// lift `F` of a generator of `H/I` acts on `I/P` by `t ↦ t^p`.
fn is_local_galois_shaped(h: &[Perm], i: &[Perm], p: u64) -> bool {
    let is_p_power = |mut n: u64| {
        while n % p == 0 {
            n /= p;
        }
        n == 1
    };
    let in_i: HashSet<Perm> = i.iter().copied().collect();
    let in_p = |g: &Perm| is_p_power(g.order()) && in_i.contains(g);
    let mut p_part = 1;
    while (i.len() as u64 / p_part) % p == 0 {
        p_part *= p;
    }
    if i.iter().filter(|g| is_p_power(g.order())).count() as u64 != p_part {
        return false;
    }
    let order_mod = |x: &Perm, sub: &dyn Fn(&Perm) -> bool| {
        let (mut y, mut k) = (*x, 1);
        while !sub(&y) {
            y = y.compose(x);
            k += 1;
        }
        k
    };
    let tame = i.len() as u64 / p_part;
    let unramified = (h.len() / i.len()) as u64;
    let generators: Vec<&Perm> = i.iter().filter(|t| order_mod(t, &in_p) == tame).collect();
    h.iter().filter(|x| order_mod(x, &|g| in_i.contains(g)) == unramified).any(|frob| {
        let inv = frob.inverse();
        generators.iter().any(|t| in_p(&frob.compose(t).compose(&inv).compose(&t.pow(p).inverse())))
    })
}

fn consistent(local: &LocalRoots, segment_of: &[usize; 6], h: &RootOrbits, i: &RootOrbits) -> bool {
    all_root_perms().into_iter().any(|tau| {
        let seg = |r: usize| segment_of[tau[r] as usize];
        (0..6).all(|r| {
            let s = &local.segments[seg(r)];
            let same_orbit_same_segment = (0..6).all(|t| h.id[t] != h.id[r] || seg(t) == seg(r));
            let kind_ok = match s.kind {
                SegmentKind::Unramified { .. } => h.size[r] as usize == s.size && i.size[r] == 1,
                SegmentKind::Slope { denominator } => i.size[r] as u64 % denominator == 0,
                SegmentKind::Repeated { degree } => h.size[r] as usize % degree == 0,
            };
            same_orbit_same_segment && kind_ok
        })
    })
}

/// Counts subgroup classes `H` admitting an inertia group `I` consistent with
/// the local data, and those among them with nontrivial `H¹`.
fn count_candidates(local: &LocalRoots, quadratic: [PrimeBehavior; 3], p: u64) -> (usize, usize) {
    let segment_of = local.segment_of();
    let on_h = quadratic.map(|b| b != PrimeBehavior::Split);
    let on_i = quadratic.map(|b| b == PrimeBehavior::Ramified);
    class_candidates()
        .par_iter()
        .map(|c| {
            if c.orbits.chars != on_h {
                return (0, 0);
            }
            let ok = c.normals.iter().any(|n| {
                n.orbits.chars == on_i
                    && consistent(local, &segment_of, &c.orbits, &n.orbits)
                    && is_local_galois_shaped(c.group.elements(), &n.elements, p)
            });
            if ok {
                (1, c.nontrivial_h1 as usize)
            } else {
                (0, 0)
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}
