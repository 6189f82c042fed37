//! Picard lattice internals and the cocycle-space oracle.

mod common;

use cubic_core::cohomology::{manin_h1, norm_quotient, pic_pair, PicardModel};
use cubic_core::lattice::{elementary_divisors, kernel, vec_from, Lattice};
use cubic_core::lines27::LineConfiguration;
use cubic_core::subgroups::u1_classes;

#[test]
fn pairing_rank_and_radical() {
    let m: Vec<_> = LineConfiguration::build().matrix().iter().map(|r| vec_from(r)).collect();
    assert_eq!(elementary_divisors(&m).len(), 7);
    assert_eq!(kernel(&m, 27).rank(), 20);
}

/// The [12,15] split of the standard double-six stabilizer: `E`, `G` the two
/// sixer sums and `F` the sum of the other fifteen lines.
#[test]
fn norm_quotient_of_the_twelve_fifteen_split() {
    let model = PicardModel::shared();
    let e = model.project_mask(0x3f);
    let g = model.project_mask(0x3f << 6);
    let f = model.project_mask(0x7fff << 12);
    let rel: Vec<i64> = (0..7).map(|i| 5 * e[i] + 5 * g[i] - 4 * f[i]).collect();
    assert!(rel.iter().all(|&x| x == 0));
    assert_eq!([[pic_pair(&e, &e), pic_pair(&e, &f)], [pic_pair(&f, &e), pic_pair(&f, &f)]], [[-6, 30], [30, 75]]);
    // Norm of aE + (5−a)G − 2F meets E in −36a + 90, never zero.
    for a in -20i64..=20 {
        let v: Vec<i64> = (0..7).map(|i| a * e[i] + (5 - a) * g[i] - 2 * f[i]).collect();
        let arr: [i64; 7] = v.try_into().unwrap();
        assert_eq!(pic_pair(&arr, &e), -36 * a + 90);
        assert!(!model.is_principal(&{
            let mut lifted = vec![0i64; 27];
            for l in 0..6 {
                lifted[l] += a;
                lifted[6 + l] += 5 - a;
            }
            for l in 12..27 {
                lifted[l] -= 2;
            }
            lifted
        }));
    }

    // S = Z·E ⊕ Z·G ⊕ Z·F with σ swapping E and G.
    let sigma = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]];
    let s0 = Lattice::from_generators(3, [vec_from(&[5, 5, -4])]);
    let (ns, top, inv) = norm_quotient(&sigma, &s0);
    assert_eq!(ns, Lattice::from_generators(3, [vec_from(&[1, 1, 0]), vec_from(&[0, 0, 2])]));
    assert_eq!(top, Lattice::from_generators(3, [vec_from(&[5, 5, -4])]));
    assert_eq!(inv.to_string(), "[2]");
}

#[test]
fn manin_agrees_with_cocycle_space_on_random_subgroups() {
    for h in common::random_small_subgroups(20, 12, 0x5eed) {
        assert_eq!(manin_h1(&h), common::direct_h1(&h), "order {}", h.order());
    }
}

#[test]
fn manin_agrees_with_cocycle_space_on_small_census_classes() {
    let small: Vec<_> = u1_classes().iter().filter(|h| h.order() <= 12 && !manin_h1(h).is_trivial()).collect();
    assert!(!small.is_empty());
    for h in small {
        assert_eq!(manin_h1(h), common::direct_h1(h));
    }
}
