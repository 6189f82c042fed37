//! Chains of subgroups certifying that restriction maps on H¹ are injective.
//!
//! A chain `top = K0 ⊇ K1 ⊇ … ⊇ Kn` in which every step satisfies one of the
//! sufficient criteria proves `H¹(top) → H¹(Kn)` injective; if `Kn ⊆ target`,
//! the restriction to `target` is injective too, because it factors the former.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::cohomology::{restriction_criteria, Criterion};
use crate::lines27::LineLabel;
use crate::perm::Perm;
use crate::subgroups::{subgroup_classes, SearchBudget};
use crate::weyl::{context, stabilizer, standard_double_six, sylow, u1, u3, PermGroup, Structure};

#[derive(Clone, Debug)]
pub struct ChainStep {
    pub big: PermGroup,
    pub small: PermGroup,
    pub criteria: BTreeSet<Criterion>,
}

fn step(big: &PermGroup, small: &PermGroup) -> Option<ChainStep> {
    let criteria = restriction_criteria(big, small).ok()?;
    (!criteria.is_empty()).then(|| ChainStep { big: big.clone(), small: small.clone(), criteria })
}

/// Checks a chain from `top` ending inside `target`.
pub fn verify_chain(chain: &[ChainStep], top: &PermGroup, target: &PermGroup) -> bool {
    let Some(first) = chain.first() else { return top.is_subgroup_of(target) };
    if first.big.elements() != top.elements() {
        return false;
    }
    let linked = chain.windows(2).all(|w| w[0].small.elements() == w[1].big.elements());
    let valid = chain.iter().all(|s| restriction_criteria(&s.big, &s.small).map_or(false, |c| !c.is_empty()));
    linked && valid && chain.last().expect("nonempty").small.is_subgroup_of(target)
}

/// The groups of the order-16 ⊂ order-48 ⊂ order-96 chain inside the standard
/// double-six stabilizer: the order-96 group also fixes the tritangent plane
/// `{F12, F34, F56}`; the order-48 group has index 2 with orbits [3,12,12];
/// the order-16 group has orbits [1,1,1,4,4,4,4,4,4].
pub struct TritangentChain {
    pub g96: PermGroup,
    pub g48: PermGroup,
    pub o16: PermGroup,
}

pub fn tritangent_chain() -> &'static TritangentChain {
    static C: OnceLock<TritangentChain> = OnceLock::new();
    C.get_or_init(|| {
        let plane = [LineLabel::F(1, 2), LineLabel::F(3, 4), LineLabel::F(5, 6)].map(|l| l.index() as u8);
        let g96 = stabilizer(u1(), &Structure::DoubleSixAndPlane(standard_double_six(), plane));
        let classes = subgroup_classes(&g96, SearchBudget::default()).expect("small group");
        let o16_orbits = vec![1, 1, 1, 4, 4, 4, 4, 4, 4];
        let mut found = None;
        'outer: for g48 in classes.iter().filter(|h| h.order() == 48 && h.orbit_structure() == vec![3, 12, 12]) {
            for o16 in classes.iter().filter(|h| h.order() == 16 && h.orbit_structure() == o16_orbits) {
                if let Some(w) =
                    g96.elements().iter().find(|w| o16.gens().iter().all(|g| g48.contains(&w.conjugate(g))))
                {
                    found = Some((g48.clone(), o16.conjugate_by(w)));
                    break 'outer;
                }
            }
        }
        let (g48, o16) = found.expect("order-16 group inside an order-48 group");
        TritangentChain { g96, g48, o16 }
    })
}

/// Extends `start` to `goal_order` inside `ambient` by adjoining normalizing
/// elements of order dividing two modulo the current group, keeping every step valid.
fn normal_tower(ambient: &PermGroup, start: &PermGroup, goal_order: usize) -> Option<Vec<ChainStep>> {
    if start.order() == goal_order {
        return Some(Vec::new());
    }
    let mut tried: Vec<PermGroup> = Vec::new();
    for x in ambient.elements() {
        if start.contains(x)
            || !start.contains(&x.compose(x))
            || !start.gens().iter().all(|g| start.contains(&x.conjugate(g)))
        {
            continue;
        }
        let mut gens = start.gens().to_vec();
        gens.push(*x);
        let next = PermGroup::generate(&gens);
        if tried.iter().any(|t| t.elements() == next.elements()) {
            continue;
        }
        tried.push(next.clone());
        if let Some(s) = step(&next, start) {
            if let Some(mut rest) = normal_tower(ambient, &next, goal_order) {
                rest.push(s);
                return Some(rest);
            }
        }
    }
    None
}

/// A chain from the double-six stabilizer down into `h` (used when `H¹(h) = Z/2`).
///
/// Restriction to `h` is reduced to its 2-Sylow subgroup `P`. Either `P` grows
/// by normal index-two steps to a 2-Sylow of the stabilizer (odd index there),
/// or a conjugate of `P` lies in the order-16 group of [`tritangent_chain`].
pub fn u1_chain(h: &PermGroup) -> Option<Vec<ChainStep>> {
    let top = u1();
    let p = sylow(h, 2);
    let sylow_order = 32;
    if let Some(tower) = normal_tower(top, &p, sylow_order) {
        let s = tower.first().map_or(p.clone(), |t| t.big.clone());
        let head = step(top, &s)?;
        let mut chain = vec![head];
        chain.extend(tower);
        return Some(chain);
    }
    let tc = tritangent_chain();
    for w in top.elements() {
        // Conjugate the fixed chain onto one containing P.
        let wi = w.inverse();
        if !p.gens().iter().all(|g| tc.o16.contains(&w.conjugate(g))) {
            continue;
        }
        let (g96, g48, o16) = (tc.g96.conjugate_by(&wi), tc.g48.conjugate_by(&wi), tc.o16.conjugate_by(&wi));
        let Some(tower) = normal_tower(&o16, &p, 16) else { continue };
        let mut chain = vec![step(top, &g96)?, step(&g96, &g48)?, step(&g48, &o16)?];
        chain.extend(tower);
        return Some(chain);
    }
    None
}

/// The subgroups of the standard azygetic-triple stabilizer with orbits [6,6,6,9].
pub fn u3_full_orbit_subgroups() -> &'static [PermGroup] {
    static C: OnceLock<Vec<PermGroup>> = OnceLock::new();
    C.get_or_init(|| {
        let big = u3();
        let target = big.orbit_structure();
        let mut out: Vec<PermGroup> = Vec::new();
        for c in subgroup_classes(&big, SearchBudget::default()).expect("small group") {
            if c.orbit_structure() != target {
                continue;
            }
            for w in big.elements() {
                let g = c.conjugate_by(w);
                if !out.iter().any(|o| o.elements() == g.elements()) {
                    out.push(g);
                }
            }
        }
        out.sort_by_key(|g| (std::cmp::Reverse(g.order()), g.elements().to_vec()));
        out
    })
}

/// For `H¹(h) = (Z/2)²`: a conjugator `w` and chain from the azygetic-triple
/// stabilizer into `w h w⁻¹`, through a subgroup with the same orbits and odd index.
pub fn u3_chain(h: &PermGroup) -> Option<(Perm, Vec<ChainStep>)> {
    let top = u3();
    for t in u3_full_orbit_subgroups() {
        if (t.order() % h.order()) != 0 || (t.order() / h.order()) % 2 == 0 {
            continue;
        }
        for w in context().weyl.elements() {
            if h.gens().iter().all(|g| t.contains(&w.conjugate(g))) {
                let hc = h.conjugate_by(w);
                let mut chain = Vec::new();
                if t.order() != top.order() {
                    chain.push(step(&top, t)?);
                }
                if hc.order() != t.order() {
                    chain.push(step(t, &hc)?);
                }
                return Some((*w, chain));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tritangent_chain_shape() {
        let tc = tritangent_chain();
        assert_eq!(tc.g96.order(), 96);
        assert_eq!(tc.g96.orbit_structure(), vec![3, 12, 12]);
        assert_eq!(tc.g48.orbit_structure(), vec![3, 12, 12]);
        assert!(tc.o16.is_subgroup_of(&tc.g48) && tc.g48.is_subgroup_of(&tc.g96));
        assert_eq!(u1().order() / tc.g96.order(), 15);
        assert!(step(u1(), &tc.g96).is_some());
        assert!(step(&tc.g96, &tc.g48).is_some());
        assert!(step(&tc.g48, &tc.o16).is_some());
    }

    #[test]
    fn u3_order_18_subgroup() {
        let subs = u3_full_orbit_subgroups();
        let orders: Vec<usize> = subs.iter().map(PermGroup::order).collect();
        assert_eq!(orders, vec![72, 36, 36, 18, 18]);
        for t in &subs[3..] {
            assert!(!t.is_normal_in(&u3()));
            let crit = restriction_criteria(&u3(), t).unwrap();
            assert_eq!(crit, BTreeSet::from([Criterion::SameOrbitStructure]));
        }
    }
}
