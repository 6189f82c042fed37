//! Identification of the global Galois image from Frobenius statistics.
//!
//! The image of `Gal(Q̄/Q)` in the double-six stabilizer is determined up to
//! conjugacy only by its generators, which are not available from the sextic
//! alone. Frobenius elements are: by Chebotarev every element type occurs with
//! its natural density. A class of subgroups is a candidate when it contains
//! every observed Frobenius type and its quadratic characters match those of
//! `Δ`, `D` and `d4`; candidates are ranked by the distance between observed
//! and predicted type frequencies, so rare types missing from a finite sample
//! cost little.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use super::{frobenius_line_action, root_action, SexticSpec, SplittingData};
use crate::arith::{exact_sqrt, primes_up_to};
use crate::cohomology::AbelianInvariants;
use crate::perm::Perm;
use crate::subgroups::{u1_class_h1, u1_classes};

/// Conjugacy invariant of an element of `S6 × Z/2`: root cycle type and sixer exchange.
pub type FrobType = (Vec<usize>, bool);

fn frob_type(g: &Perm) -> FrobType {
    let (sigma, flip) = root_action(g);
    let mut seen = [false; 6];
    let mut cycles = Vec::new();
    for i in 0..6 {
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = sigma[j] as usize;
            len += 1;
        }
        if len > 0 {
            cycles.push(len);
        }
    }
    cycles.sort();
    (cycles, flip)
}

/// One class of subgroups consistent with the observed Frobenius types.
#[derive(Clone, Debug)]
pub struct ImageCandidate {
    /// Index into the subgroup classes of the double-six stabilizer.
    pub class: usize,
    pub order: usize,
    pub h1: AbelianInvariants,
    /// `Σ |observed − predicted|` over the type frequencies.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct GaloisImage {
    pub prime_bound: u64,
    pub sampled: usize,
    pub observed: BTreeMap<FrobType, usize>,
    /// Candidates sorted by distance (best first).
    pub candidates: Vec<ImageCandidate>,
}

impl GaloisImage {
    pub fn best(&self) -> Option<&ImageCandidate> {
        self.candidates.first()
    }

    /// `H¹` of the best candidate.
    pub fn h1(&self) -> Option<&AbelianInvariants> {
        self.best().map(|c| &c.h1)
    }

    /// Distance gap between the best candidate and the nearest one with a
    /// different `H¹` (infinite when all candidates agree).
    pub fn h1_margin(&self) -> f64 {
        let Some(best) = self.best() else { return 0.0 };
        self.candidates.iter().find(|c| c.h1 != best.h1).map_or(f64::INFINITY, |c| c.distance - best.distance)
    }
}

/// Samples Frobenius at every prime up to `prime_bound` where it is defined
/// and matches the statistics against the subgroup classes.
pub fn galois_image(f: &SexticSpec, split: &SplittingData, prime_bound: u64) -> GaloisImage {
    let mut observed: BTreeMap<FrobType, usize> = BTreeMap::new();
    let mut sampled = 0;
    for p in primes_up_to(prime_bound) {
        if let Ok(fr) = frobenius_line_action(f, p, &split.core) {
            *observed.entry(frob_type(&fr.perm)).or_default() += 1;
            sampled += 1;
        }
    }
    let delta_square = is_rational_square(&f.disc);
    let core_trivial = split.core == BigInt::one();
    let d4_square = is_rational_square(&split.d4);
    let mut candidates: Vec<ImageCandidate> = u1_classes()
        .par_iter()
        .zip(u1_class_h1().par_iter())
        .enumerate()
        .filter_map(|(class, (h, h1))| {
            let mut counts: BTreeMap<FrobType, usize> = BTreeMap::new();
            for g in h.elements() {
                *counts.entry(frob_type(g)).or_default() += 1;
            }
            if !observed.keys().all(|t| counts.contains_key(t)) {
                return None;
            }
            let has_odd = counts.keys().any(|(c, _)| c.iter().map(|l| l - 1).sum::<usize>() % 2 == 1);
            let has_flip = counts.keys().any(|(_, fl)| *fl);
            let has_mixed = counts.keys().any(|(c, fl)| (c.iter().map(|l| l - 1).sum::<usize>() % 2 == 1) != *fl);
            if has_odd == delta_square || has_flip == core_trivial || has_mixed == d4_square {
                return None;
            }
            let n = h.order() as f64;
            let distance = counts
                .iter()
                .map(|(t, &c)| (c as f64 / n - observed.get(t).copied().unwrap_or(0) as f64 / sampled as f64).abs())
                .sum();
            Some(ImageCandidate { class, order: h.order(), h1: h1.clone(), distance })
        })
        .collect();
    candidates.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.class.cmp(&b.class)));
    GaloisImage { prime_bound, sampled, observed, candidates }
}

fn is_rational_square(q: &BigRational) -> bool {
    !q.is_negative() && exact_sqrt(q.numer()).is_some() && exact_sqrt(q.denom()).is_some()
}
