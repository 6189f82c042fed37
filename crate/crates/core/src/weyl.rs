//! W(E6) as the automorphism group of the line configuration, and subgroup utilities.
//!
//! Groups are stored as explicit sorted element lists. The full group has
//! 51840 elements (1.4 MB), small enough to keep whole.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use crate::lines27::{
    enumerate_structures, syzygy_type, DoubleSix, LineConfiguration, LineSet, Structures, Syzygy, TritangentPlane,
};
use crate::perm::{Perm, N};

/// Order of W(E6).
pub const WEYL_ORDER: usize = 51840;

/// A finite permutation group on the 27 lines with its full element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermGroup {
    gens: Vec<Perm>,
    elements: Vec<Perm>,
}

impl PermGroup {
    pub fn trivial() -> Self {
        PermGroup { gens: Vec::new(), elements: vec![Perm::identity()] }
    }

    /// The group generated by `gens`.
    pub fn generate(gens: &[Perm]) -> Self {
        let mut seen: HashSet<Perm> = HashSet::new();
        let mut list = vec![Perm::identity()];
        seen.insert(Perm::identity());
        let gens: Vec<Perm> = gens.iter().copied().filter(|g| !g.is_identity()).collect();
        let mut i = 0;
        while i < list.len() {
            let e = list[i];
            for g in &gens {
                let x = e.compose(g);
                if seen.insert(x) {
                    list.push(x);
                }
            }
            i += 1;
        }
        list.sort_unstable();
        PermGroup { gens, elements: list }
    }

    /// Wraps an element list known to be a group; generators are chosen greedily
    /// in sorted element order.
    pub fn from_elements(mut elements: Vec<Perm>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let gens = greedy_generators(&elements);
        PermGroup { gens, elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Line orbits, each sorted, ordered by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(&self.gens)
    }

    /// Sorted multiset of orbit sizes.
    pub fn orbit_structure(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.orbits().iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }

    /// Subgroup of elements satisfying `pred` (which must define a subgroup).
    pub fn filter(&self, pred: impl Fn(&Perm) -> bool) -> PermGroup {
        PermGroup::from_elements(self.elements.iter().copied().filter(|g| pred(g)).collect())
    }

    pub fn conjugate_by(&self, w: &Perm) -> PermGroup {
        let elements = self.elements.iter().map(|g| w.conjugate(g)).collect::<Vec<_>>();
        let gens = self.gens.iter().map(|g| w.conjugate(g)).collect();
        let mut elements = elements;
        elements.sort_unstable();
        PermGroup { gens, elements }
    }

    pub fn fixes_mask(&self, mask: LineSet) -> bool {
        self.gens.iter().all(|g| g.apply_mask(mask) == mask)
    }

    pub fn fixes_double_six(&self, d: &DoubleSix) -> bool {
        self.gens.iter().all(|g| d.is_fixed_by(g))
    }

    pub fn is_normal_in(&self, big: &PermGroup) -> bool {
        big.gens.iter().all(|w| self.gens.iter().all(|g| self.contains(&w.conjugate(g))))
    }

    /// Number of orbits on the 27 lines, i.e. the rank of the invariant part of `Z²⁷`.
    pub fn orbit_count(&self) -> usize {
        self.orbits().len()
    }
}

fn greedy_generators(sorted: &[Perm]) -> Vec<Perm> {
    let mut gens = Vec::new();
    let mut span: HashSet<Perm> = HashSet::from([Perm::identity()]);
    for g in sorted {
        if span.contains(g) {
            continue;
        }
        gens.push(*g);
        span = PermGroup::generate(&gens).elements.into_iter().collect();
        if span.len() == sorted.len() {
            break;
        }
    }
    gens
}

/// Line orbits under the group generated by `gens`.
pub fn orbits_of(gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..N).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for g in gens {
        for i in 0..N {
            let (a, b) = (find(&mut parent, i), find(&mut parent, g.apply(i)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; N];
    for i in 0..N {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = out.len();
            out.push(Vec::new());
        }
        out[root_slot[r]].push(i);
    }
    out
}

/// Checks that `g` preserves the pairing.
pub fn preserves_pairing(cfg: &LineConfiguration, g: &Perm) -> bool {
    (0..N).all(|a| (a..N).all(|b| cfg.pairing(g.apply(a), g.apply(b)) == cfg.pairing(a, b)))
}

/// All pairing-preserving permutations, found by backtracking.
pub fn automorphism_group(cfg: &LineConfiguration) -> PermGroup {
    let mut out = Vec::with_capacity(WEYL_ORDER);
    let mut img = [0u8; N];
    let mut used = [false; N];
    extend(cfg, 0, &mut img, &mut used, &mut out);
    PermGroup::from_elements(out)
}

fn extend(cfg: &LineConfiguration, i: usize, img: &mut [u8; N], used: &mut [bool; N], out: &mut Vec<Perm>) {
    if i == N {
        out.push(Perm(*img));
        return;
    }
    for c in 0..N {
        if used[c] || (0..i).any(|j| cfg.pairing(c, img[j] as usize) != cfg.pairing(i, j)) {
            continue;
        }
        img[i] = c as u8;
        used[c] = true;
        extend(cfg, i + 1, img, used, out);
        used[c] = false;
    }
}

/// Shared configuration, structures and full group, built on first use.
pub struct Context {
    pub cfg: LineConfiguration,
    pub structures: Structures,
    pub weyl: PermGroup,
}

pub fn context() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        let cfg = LineConfiguration::build();
        let structures = enumerate_structures(&cfg).expect("consistent configuration");
        let weyl = automorphism_group(&cfg);
        Context { cfg, structures, weyl }
    })
}

/// Structures whose stabilizers are supported. Triples and pairs of double-sixes
/// are stabilized memberwise (each double-six mapped to itself).
#[derive(Clone, Debug)]
pub enum Structure {
    Lines(LineSet),
    Sixer(LineSet),
    DoubleSix(DoubleSix),
    AzygeticTriple([DoubleSix; 3]),
    SyzygeticPair(DoubleSix, DoubleSix),
    DoubleSixAndPlane(DoubleSix, TritangentPlane),
}

impl Structure {
    pub fn is_fixed_by(&self, g: &Perm) -> bool {
        match self {
            Structure::Lines(m) | Structure::Sixer(m) => g.apply_mask(*m) == *m,
            Structure::DoubleSix(d) => d.is_fixed_by(g),
            Structure::AzygeticTriple(t) => t.iter().all(|d| d.is_fixed_by(g)),
            Structure::SyzygeticPair(a, b) => a.is_fixed_by(g) && b.is_fixed_by(g),
            Structure::DoubleSixAndPlane(d, p) => {
                let m = p.iter().fold(0u32, |m, &x| m | (1 << x));
                d.is_fixed_by(g) && g.apply_mask(m) == m
            }
        }
    }
}

pub fn stabilizer(g: &PermGroup, s: &Structure) -> PermGroup {
    g.filter(|x| s.is_fixed_by(x))
}

/// The standard double-six `{E1..E6 | G1..G6}`.
pub fn standard_double_six() -> DoubleSix {
    DoubleSix::new(0x3f, 0x3f << 6)
}

fn mask_of_labels(labels: &str) -> LineSet {
    labels
        .split_whitespace()
        .map(|t| t.parse::<crate::lines27::LineLabel>().expect("label").index())
        .fold(0, |m, i| m | (1 << i))
}

/// The azygetic triple containing the standard double-six and
/// `{E1 E2 E3 F56 F46 F45 | F23 F13 F12 G4 G5 G6}`.
pub fn standard_azygetic_triple() -> [DoubleSix; 3] {
    let d1 = standard_double_six();
    let d2 = DoubleSix::new(mask_of_labels("E1 E2 E3 F56 F46 F45"), mask_of_labels("F23 F13 F12 G4 G5 G6"));
    let d3 = DoubleSix::new(mask_of_labels("F23 F13 F12 E4 E5 E6"), mask_of_labels("G1 G2 G3 F56 F46 F45"));
    [d1, d2, d3]
}

/// A syzygetic partner of the standard double-six (first in canonical order).
pub fn standard_syzygetic_pair() -> (DoubleSix, DoubleSix) {
    let ctx = context();
    let d1 = standard_double_six();
    let d2 = *ctx
        .structures
        .double_sixes
        .iter()
        .find(|d| syzygy_type(&d1, d).ok() == Some(Syzygy::Syzygetic))
        .expect("syzygetic partner");
    (d1, d2)
}

/// Stabilizer of the standard double-six (order 1440).
pub fn u1() -> &'static PermGroup {
    static G: OnceLock<PermGroup> = OnceLock::new();
    G.get_or_init(|| stabilizer(&context().weyl, &Structure::DoubleSix(standard_double_six())))
}

/// Memberwise stabilizer of a syzygetic pair containing the standard double-six (order 96).
pub fn u2() -> PermGroup {
    let (a, b) = standard_syzygetic_pair();
    stabilizer(u1(), &Structure::SyzygeticPair(a, b))
}

/// Memberwise stabilizer of the standard azygetic triple (order 72).
pub fn u3() -> PermGroup {
    stabilizer(u1(), &Structure::AzygeticTriple(standard_azygetic_triple()))
}

/// Orbit of a structure key under `g`'s generators; `act` maps a key through a permutation.
pub fn orbit_of<T: Clone + Eq + std::hash::Hash>(g: &PermGroup, start: T, act: impl Fn(&Perm, &T) -> T) -> Vec<T> {
    let mut seen: HashSet<T> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    let mut out = vec![start];
    while let Some(x) = queue.pop_front() {
        for s in g.gens() {
            let y = act(s, &x);
            if seen.insert(y.clone()) {
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    out
}

/// An ambient element conjugating `h1` onto `h2`, if any.
pub fn are_conjugate(h1: &PermGroup, h2: &PermGroup, ambient: &PermGroup) -> Option<Perm> {
    if h1.order() != h2.order() || h1.orbit_structure() != h2.orbit_structure() {
        return None;
    }
    if h1 == h2 || h1.elements() == h2.elements() {
        return Some(Perm::identity());
    }
    ambient.elements().iter().find(|w| h1.gens().iter().all(|g| h2.contains(&w.conjugate(g)))).copied()
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

/// A Sylow `p`-subgroup of `h`.
pub fn sylow(h: &PermGroup, p: u64) -> PermGroup {
    let mut target = 1usize;
    let mut n = h.order();
    while n % p as usize == 0 {
        n /= p as usize;
        target *= p as usize;
    }
    let mut pg = PermGroup::trivial();
    while pg.order() < target {
        let x = h
            .elements()
            .iter()
            .find(|x| {
                !pg.contains(x)
                    && is_power_of(x.order(), p)
                    && pg.gens().iter().all(|g| pg.contains(&x.conjugate(g)))
                    && pg.contains(&x.pow(p))
            })
            .copied()
            .expect("p-element in the normalizer exists below the Sylow order");
        let mut gens = pg.gens().to_vec();
        gens.push(x);
        pg = PermGroup::generate(&gens);
    }
    pg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lines27::LineLabel;

    #[test]
    fn weyl_order_and_pairing() {
        let ctx = context();
        assert_eq!(ctx.weyl.order(), WEYL_ORDER);
        assert!(ctx.weyl.contains(&Perm::identity()));
        for g in ctx.weyl.elements().iter().step_by(997) {
            assert!(preserves_pairing(&ctx.cfg, g));
        }
        assert!(ctx.weyl.gens().len() <= 16);
    }

    #[test]
    fn stabilizer_orders() {
        let ctx = context();
        assert_eq!(u1().order(), 1440);
        assert_eq!(u2().order(), 96);
        assert_eq!(u3().order(), 72);
        assert_eq!(u1().orbit_structure(), vec![12, 15]);
        assert_eq!(u2().orbit_structure(), vec![1, 4, 6, 8, 8]);
        assert_eq!(u3().orbit_structure(), vec![6, 6, 6, 9]);
        let sixer = stabilizer(&ctx.weyl, &Structure::Sixer(0x3f));
        assert_eq!(sixer.order(), 720);
        assert_eq!(PermGroup::trivial().orbit_structure(), vec![1; 27]);
    }

    #[test]
    fn sylow_subgroups() {
        let s2 = sylow(u1(), 2);
        assert_eq!(s2.order(), 32);
        let s5 = sylow(&context().weyl, 5);
        assert_eq!(s5.order(), 5);
        assert_eq!(s5.orbit_structure(), vec![1, 1, 5, 5, 5, 5, 5]);
        let fixed: Vec<usize> = s5.orbits().into_iter().filter(|o| o.len() == 1).map(|o| o[0]).collect();
        assert_eq!(fixed.len(), 2);
        let cfg = &context().cfg;
        assert_eq!(cfg.pairing(fixed[0], fixed[1]), 0);
        assert!(sylow(&PermGroup::trivial(), 3).is_trivial());
    }

    #[test]
    fn conjugacy() {
        let ctx = context();
        let h1 = stabilizer(&ctx.weyl, &Structure::Lines(1 << LineLabel::E(1).index()));
        let h2 = stabilizer(&ctx.weyl, &Structure::Lines(1 << LineLabel::F(3, 4).index()));
        let w = are_conjugate(&h1, &h2, &ctx.weyl).expect("conjugate");
        assert!(h1.gens().iter().all(|g| h2.contains(&w.conjugate(g))));
        assert_eq!(are_conjugate(&h1, &h1, &ctx.weyl), Some(Perm::identity()));
        let sixer = stabilizer(&ctx.weyl, &Structure::Sixer(0x3f));
        assert!(are_conjugate(&sixer, u1(), &ctx.weyl).is_none());
    }
}
