//! Conjugacy classes of subgroups by cyclic extension, with fusion under a larger group.
//!
//! Subgroups of an explicit ambient group are bit sets over its sorted element
//! list. Every subgroup is generated by its elements of prime-power order, so
//! each class is reached from a smaller one by adjoining one such element.
//! Adjoining `g` to `H` depends only on the double coset `HgH`, and elements
//! related by the normalizer of `H` give conjugate results; both are skipped.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cohomology::{manin_h1, AbelianInvariants};
use crate::error::{Error, Result};
use crate::lines27::DoubleSix;
use crate::perm::Perm;
use crate::weyl::{context, u1, PermGroup};

type Bits = Vec<u64>;

fn bit(b: &Bits, i: u32) -> bool {
    b[(i >> 6) as usize] >> (i & 63) & 1 == 1
}

fn set(b: &mut Bits, i: u32) {
    b[(i >> 6) as usize] |= 1 << (i & 63);
}

/// Ambient group with indexed elements and (for small groups) a product table.
pub struct IndexedGroup {
    elems: Vec<Perm>,
    table: Option<Vec<u32>>,
    inv: Vec<u32>,
    prime_power: Vec<bool>,
    class_id: Vec<u16>,
    index: HashMap<Perm, u32>,
}

const TABLE_LIMIT: usize = 4096;

impl IndexedGroup {
    pub fn new(g: &PermGroup) -> Self {
        let elems = g.elements().to_vec();
        let n = elems.len();
        let index: HashMap<Perm, u32> = elems.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
        let table = (n <= TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            t.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
                for (b, slot) in row.iter_mut().enumerate() {
                    *slot = index[&elems[a].compose(&elems[b])];
                }
            });
            t
        });
        let inv = elems.iter().map(|p| index[&p.inverse()]).collect();
        let prime_power = elems
            .iter()
            .map(|p| {
                let o = p.order();
                o > 1
                    && [2u64, 3, 5, 7].iter().any(|&q| {
                        let mut m = o;
                        while m % q == 0 {
                            m /= q;
                        }
                        m == 1
                    })
            })
            .collect();
        let mut types: HashMap<Vec<usize>, u16> = HashMap::new();
        let class_id = elems
            .iter()
            .map(|p| {
                let n = types.len() as u16;
                *types.entry(p.cycle_type()).or_insert(n)
            })
            .collect();
        IndexedGroup { elems, table, inv, prime_power, class_id, index }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.table {
            Some(t) => t[a as usize * self.elems.len() + b as usize],
            None => self.index[&self.elems[a as usize].compose(&self.elems[b as usize])],
        }
    }

    #[inline]
    fn conj(&self, a: u32, x: u32) -> u32 {
        self.mul(self.mul(a, x), self.inv[a as usize])
    }

    fn words(&self) -> usize {
        self.elems.len().div_ceil(64)
    }

    fn closure(&self, gens: &[u32]) -> Sub {
        let mut bits = vec![0u64; self.words()];
        let id = 0u32; // identity is the least permutation
        set(&mut bits, id);
        let mut list = vec![id];
        let mut i = 0;
        while i < list.len() {
            let e = list[i];
            for &s in gens {
                let x = self.mul(e, s);
                if !bit(&bits, x) {
                    set(&mut bits, x);
                    list.push(x);
                }
            }
            i += 1;
        }
        list.sort_unstable();
        Sub { bits, elems: list, gens: gens.to_vec() }
    }

    fn perm_group(&self, s: &Sub) -> PermGroup {
        PermGroup::from_elements(s.elems.iter().map(|&i| self.elems[i as usize]).collect())
    }

    fn key(&self, s: &Sub) -> Key {
        let gens: Vec<Perm> = s.gens.iter().map(|&i| self.elems[i as usize]).collect();
        let mut orbits: Vec<usize> = crate::weyl::orbits_of(&gens).iter().map(Vec::len).collect();
        orbits.sort_unstable();
        let mut hist: Vec<u16> = s.elems.iter().map(|&i| self.class_id[i as usize]).collect();
        hist.sort_unstable();
        Key { order: s.elems.len(), orbits, hist }
    }

    fn conjugate_into(&self, a: &Sub, b: &Sub) -> bool {
        (0..self.len() as u32).any(|w| a.gens.iter().all(|&g| bit(&b.bits, self.conj(w, g))))
    }
}

#[derive(Clone, Debug)]
struct Sub {
    bits: Bits,
    elems: Vec<u32>,
    gens: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    order: usize,
    orbits: Vec<usize>,
    hist: Vec<u16>,
}

/// Limits for the subgroup search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_classes: usize,
    pub max_time: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_classes: 100_000, max_time: None }
    }
}

/// Representatives of the conjugacy classes of subgroups of `ambient` (conjugation by `ambient`).
pub fn subgroup_classes(ambient: &PermGroup, budget: SearchBudget) -> Result<Vec<PermGroup>> {
    let g = IndexedGroup::new(ambient);
    let start = Instant::now();
    let n = g.len() as u32;
    let mut classes: Vec<Sub> = vec![g.closure(&[])];
    let mut buckets: HashMap<Key, Vec<usize>> = HashMap::new();
    buckets.insert(g.key(&classes[0]), vec![0]);
    let mut seen: HashSet<Bits> = HashSet::from([classes[0].bits.clone()]);
    let mut next = 0;
    while next < classes.len() {
        if let Some(limit) = budget.max_time {
            if start.elapsed() > limit {
                return Err(Error::ResourceLimit {
                    what: format!("subgroup search exceeded {limit:?}"),
                    partial: format!("{} classes found, {} expanded", classes.len(), next),
                });
            }
        }
        let h = classes[next].clone();
        next += 1;
        let normalizer: Vec<u32> = (0..n).filter(|&w| h.gens.iter().all(|&x| bit(&h.bits, g.conj(w, x)))).collect();
        let mut done = h.bits.clone();
        for cand in 0..n {
            if bit(&done, cand) || !g.prime_power[cand as usize] {
                continue;
            }
            let mut gens = h.gens.clone();
            gens.push(cand);
            let k = g.closure(&gens);
            let mut dc = vec![0u64; g.words()];
            for &x in &h.elems {
                let xg = g.mul(x, cand);
                for &y in &h.elems {
                    set(&mut dc, g.mul(xg, y));
                }
            }
            for (wi, word) in dc.iter().enumerate() {
                let mut m = *word;
                while m != 0 {
                    let e = (wi * 64) as u32 + m.trailing_zeros();
                    for &w in &normalizer {
                        set(&mut done, g.conj(w, e));
                    }
                    m &= m - 1;
                }
            }
            if !seen.insert(k.bits.clone()) {
                continue;
            }
            let key = g.key(&k);
            let bucket = buckets.entry(key).or_default();
            if bucket.iter().any(|&j| g.conjugate_into(&k, &classes[j])) {
                continue;
            }
            bucket.push(classes.len());
            classes.push(Sub { gens: minimal_gens(&g, &k), ..k });
            if classes.len() > budget.max_classes {
                return Err(Error::ResourceLimit {
                    what: format!("more than {} subgroup classes", budget.max_classes),
                    partial: format!("{} classes found", classes.len()),
                });
            }
        }
    }
    Ok(classes.iter().map(|s| g.perm_group(s)).collect())
}

/// Greedy generators in sorted element order.
fn minimal_gens(g: &IndexedGroup, s: &Sub) -> Vec<u32> {
    let mut gens = Vec::new();
    let mut span = g.closure(&[]);
    for &e in &s.elems {
        if bit(&span.bits, e) {
            continue;
        }
        gens.push(e);
        span = g.closure(&gens);
        if span.elems.len() == s.elems.len() {
            break;
        }
    }
    gens
}

/// One census row.
#[derive(Clone, Debug)]
pub struct SubgroupClassRecord {
    pub representative: PermGroup,
    pub order: usize,
    pub orbit_structure: Vec<usize>,
    pub stabilizes_sixer: bool,
    pub stabilizes_double_six: bool,
    pub stabilizes_azygetic_triple: bool,
    pub h1: Option<AbelianInvariants>,
    /// Number of ambient-conjugacy classes fused into this record.
    pub fused_from: usize,
}

impl SubgroupClassRecord {
    pub fn new(rep: PermGroup) -> Self {
        let st = &context().structures;
        let fixes = |d: &DoubleSix| rep.fixes_double_six(d);
        let stabilizes_sixer = st.sixers.iter().any(|&s| rep.fixes_mask(s));
        let stabilizes_double_six = st.double_sixes.iter().any(fixes);
        let stabilizes_azygetic_triple =
            st.azygetic_triples.iter().any(|t| t.iter().all(|&i| fixes(&st.double_sixes[i])));
        SubgroupClassRecord {
            order: rep.order(),
            orbit_structure: rep.orbit_structure(),
            representative: rep,
            stabilizes_sixer,
            stabilizes_double_six,
            stabilizes_azygetic_triple,
            h1: None,
            fused_from: 1,
        }
    }

    fn sort_key(&self) -> (usize, Vec<usize>, Vec<Perm>) {
        (self.order, self.orbit_structure.clone(), self.representative.gens().to_vec())
    }
}

fn fusion_key(h: &PermGroup) -> (usize, Vec<usize>, Vec<Vec<usize>>) {
    let mut types: Vec<Vec<usize>> = h.elements().iter().map(Perm::cycle_type).collect();
    types.sort();
    (h.order(), h.orbit_structure(), types)
}

/// Groups subgroups into classes under conjugation by `fusion`. Returns, for each
/// class, the indices of its members (first member is the representative).
pub fn fuse(groups: &[PermGroup], fusion: &PermGroup) -> Vec<Vec<usize>> {
    let keys: Vec<_> = groups.par_iter().map(fusion_key).collect();
    let mut buckets: HashMap<_, Vec<usize>> = HashMap::new();
    for (i, k) in keys.into_iter().enumerate() {
        buckets.entry(k).or_default().push(i);
    }
    let mut bucket_list: Vec<Vec<usize>> = buckets.into_values().collect();
    bucket_list.sort();
    let mut classes: Vec<Vec<usize>> = bucket_list
        .par_iter()
        .flat_map_iter(|members| {
            let mut local: Vec<Vec<usize>> = Vec::new();
            for &i in members {
                let found = local.iter_mut().find(|c| {
                    let r = &groups[c[0]];
                    fusion.elements().iter().any(|w| groups[i].gens().iter().all(|g| r.contains(&w.conjugate(g))))
                });
                match found {
                    Some(c) => c.push(i),
                    None => local.push(vec![i]),
                }
            }
            local
        })
        .collect();
    classes.sort();
    classes
}

/// One record per `fusion`-class of subgroups of `ambient`, in stable order.
pub fn enumerate_subgroup_classes(
    ambient: &PermGroup,
    fusion: &PermGroup,
    budget: SearchBudget,
) -> Result<Vec<SubgroupClassRecord>> {
    if !ambient.is_subgroup_of(fusion) {
        return Err(Error::InvalidInput("ambient is not contained in the fusion group".into()));
    }
    let reps = subgroup_classes(ambient, budget)?;
    let groups = if fusion.order() == ambient.order() {
        reps.into_iter().map(|r| vec![r]).collect::<Vec<_>>()
    } else {
        let classes = fuse(&reps, fusion);
        classes.into_iter().map(|c| c.into_iter().map(|i| reps[i].clone()).collect()).collect()
    };
    let mut records: Vec<SubgroupClassRecord> = groups
        .into_par_iter()
        .map(|members| {
            let n = members.len();
            let mut r = SubgroupClassRecord::new(members.into_iter().next().expect("nonempty class"));
            r.fused_from = n;
            r
        })
        .collect();
    records.sort_by_key(SubgroupClassRecord::sort_key);
    Ok(records)
}

/// Subgroup classes of the standard double-six stabilizer under its own conjugation (cached).
pub fn u1_classes() -> &'static [PermGroup] {
    static C: OnceLock<Vec<PermGroup>> = OnceLock::new();
    C.get_or_init(|| {
        let mut v = subgroup_classes(u1(), SearchBudget::default()).expect("within budget");
        v.sort_by_key(|g| (g.order(), g.orbit_structure(), g.gens().to_vec()));
        v
    })
}

/// H¹ values of [`u1_classes`], in the same order (cached).
pub fn u1_class_h1() -> &'static [AbelianInvariants] {
    static C: OnceLock<Vec<AbelianInvariants>> = OnceLock::new();
    C.get_or_init(|| u1_classes().par_iter().map(manin_h1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::u3;

    #[test]
    fn trivial_ambient() {
        let r = enumerate_subgroup_classes(&PermGroup::trivial(), &context().weyl, SearchBudget::default()).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn small_group_class_count() {
        // U3 ≅ (S3 × S3) ⋊ Z/2 has order 72.
        let classes = subgroup_classes(&u3(), SearchBudget::default()).unwrap();
        assert!(classes.iter().all(|h| h.is_subgroup_of(&u3())));
        assert_eq!(classes.iter().filter(|h| h.order() == 72).count(), 1);
        assert_eq!(classes.iter().filter(|h| h.order() == 1).count(), 1);
        // Class sizes times normalizer indices account for every subgroup exactly once.
        let total: usize = classes.len();
        assert!(total > 10);
    }

    #[test]
    fn budget_is_enforced() {
        let err = subgroup_classes(&u3(), SearchBudget { max_classes: 3, max_time: None }).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }
}
