//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use cubic_core::arith::valuation;
use cubic_core::cohomology::{AbelianInvariants, PicardModel};
use cubic_core::hexahedral::SexticSpec;
use cubic_core::lattice::{kernel, Lattice, Vector};
use cubic_core::local_arith::evaluation::TritangentData;
use cubic_core::local_arith::SurfaceModel;
use cubic_core::weyl::{context, PermGroup};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R: usize = 7;

/// H¹(H, Pic) as Z¹/B¹, solving the cocycle relations over all element pairs.
pub fn direct_h1(h: &PermGroup) -> AbelianInvariants {
    let model = PicardModel::shared();
    let els = h.elements();
    let n = els.len();
    let idx = |p: &cubic_core::perm::Perm| els.binary_search(p).expect("closed");
    let mats: Vec<_> = els.iter().map(|g| model.action(g)).collect();
    let cols = R * n;
    let mut rows: Vec<Vector> = Vec::new();
    for (a, g) in els.iter().enumerate() {
        for (b, k) in els.iter().enumerate() {
            let gk = idx(&g.compose(k));
            for i in 0..R {
                let mut row = vec![0i64; cols];
                row[R * gk + i] += 1;
                row[R * a + i] -= 1;
                for j in 0..R {
                    row[R * b + j] -= mats[a][i][j];
                }
                rows.push(row.into_iter().map(BigInt::from).collect());
            }
        }
    }
    let z1 = kernel(&rows, cols);
    let b1 = Lattice::from_generators(
        cols,
        (0..R).map(|x| {
            let mut v = vec![BigInt::from(0); cols];
            for (a, m) in mats.iter().enumerate() {
                for i in 0..R {
                    v[R * a + i] = BigInt::from(m[i][x] - (i == x) as i64);
                }
            }
            v
        }),
    );
    AbelianInvariants::from_bigints(&z1.quotient_invariants(&b1).expect("finite"))
}

/// Distinct random subgroups of W(E6) of order at most `max_order`.
pub fn random_small_subgroups(count: usize, max_order: usize, seed: u64) -> Vec<PermGroup> {
    let w = &context().weyl;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<PermGroup> = Vec::new();
    while out.len() < count {
        let g = w.elements()[rng.gen_range(0..w.order())];
        let k = w.elements()[rng.gen_range(0..w.order())];
        let pair = PermGroup::generate(&[g, k]);
        let h = if pair.order() <= max_order { pair } else { PermGroup::generate(&[g]) };
        if h.order() <= max_order && !out.iter().any(|o| o.elements() == h.elements()) {
            out.push(h);
        }
    }
    out
}

pub const EXAMPLES: [&str; 6] = ["sqrt10", "sqrt2_a6", "sqrtm15", "sqrtm3", "sqrtm5", "sqrt2_triple"];

/// Contents of `data/{kind}s/{name}.{kind}`.
pub fn data(kind: &str, name: &str) -> String {
    let path = format!("{}/../../data/{kind}s/{name}.{kind}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn sextic(name: &str) -> SexticSpec {
    data("sextic", name).parse().unwrap()
}

pub fn surface(name: &str) -> SurfaceModel {
    data("surface", name).parse().unwrap()
}

/// Points of the reduction in `P³(F_p)`, by enumerating normalized representatives.
pub fn brute_count(s: &SurfaceModel, p: u64) -> u64 {
    let mut count = 0;
    for lead in 0..4 {
        let free = 3 - lead;
        for n in 0..p.pow(free as u32) {
            let mut x = [0u64; 4];
            x[lead] = 1;
            for k in 0..free {
                x[lead + 1 + k] = n / p.pow(k as u32) % p;
            }
            if s.eval_mod(&x, p) == 0 {
                count += 1;
            }
        }
    }
    count
}

fn is_canonical(v: &[i64; 4]) -> bool {
    let g = v.iter().fold(0i64, |g, &c| num_integer::gcd(g, c));
    g == 1 && v.iter().find(|&&c| c != 0).unwrap() > &0
}

/// Every canonical zero in `[−b, b]⁴`, with its height.
pub fn grid_points(s: &SurfaceModel, b: i64) -> Vec<(i64, [i64; 4])> {
    let mut out = Vec::new();
    for x in -b..=b {
        for y in -b..=b {
            for z in -b..=b {
                for w in -b..=b {
                    let v = [x, y, z, w];
                    if is_canonical(&v) && s.eval_i128(&v.map(|c| c as i128)) == 0 {
                        out.push((v.iter().map(|c| c.abs()).max().unwrap(), v));
                    }
                }
            }
        }
    }
    out
}

fn val(mut n: i64, p: i64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn walk(a: i64, b: i64, p: i64, x: [i64; 3], j: u32, k: u32) -> bool {
    let q = p.pow(j) as i128;
    let sq = |t: i64| (t as i128) * (t as i128);
    if (a as i128 * sq(x[0]) + b as i128 * sq(x[1]) - sq(x[2])).rem_euclid(q) != 0 {
        return false;
    }
    let grad = [2 * a * x[0], 2 * b * x[1], 2 * x[2]];
    let v = grad.iter().map(|&d| val(d, p)).min().unwrap();
    if v != u32::MAX && j >= 2 * v + 1 {
        return true;
    }
    assert!(j < k, "undecided at depth {k} for ({a}, {b}) at {p}");
    let step = p.pow(j);
    (0..p.pow(3)).any(|t| {
        let y = [x[0] + (t % p) * step, x[1] + (t / p % p) * step, x[2] + (t / (p * p)) * step];
        walk(a, b, p, y, j + 1, k)
    })
}

/// Whether `a x² + b y² = z²` has a nontrivial `p`-adic zero, decided by walking
/// the tree of primitive solutions modulo `p^j`, `j ≤ k`, until Hensel's lemma
/// certifies a lift or the tree dies out.
pub fn norm_search(a: i64, b: i64, p: i64, k: u32) -> bool {
    (1..p.pow(3)).any(|t| walk(a, b, p, [t % p, t / p % p, t / (p * p)], 1, k))
}

pub fn strip_squares(mut n: i64, p: i64) -> i64 {
    while n % (p * p) == 0 {
        n /= p * p;
    }
    n
}

/// The Hilbert symbol `(a, b)_p` decided by [`norm_search`].
pub fn hilbert_oracle(a: i64, b: i64, p: i64) -> i32 {
    let (ra, rb) = (strip_squares(a, p), strip_squares(b, p));
    let k = valuation(&BigInt::from(16 * ra * ra * rb * rb), p as u64) + 3;
    if norm_search(ra, rb, p, k) {
        1
    } else {
        -1
    }
}

/// Synthetic tritangent data: the listed non-obvious forms plus fifteen
/// obvious forms in general position. Forms are `(x, y, z, w)` coefficient
/// rows over `Q(√2)`, entries `(rational part, θ part)`.
pub fn synthetic(nonobvious: &[[(i64, i64); 4]]) -> TritangentData {
    let mut text = String::from("tritangent v1\nminpoly 1 0 -2\nscale 1\n");
    let row = |f: &[(i64, i64); 4]| f.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(" | ");
    for i in 0..15i64 {
        text += &format!("obvious {}\n", row(&[(1, 0), (i + 2, 0), (i * i % 7 + 1, 0), (3 * i % 5 + 2, 0)]));
    }
    for f in nonobvious {
        text += &format!("nonobvious {}\n", row(f));
    }
    text.parse().unwrap()
}

pub fn general_forms(count: usize) -> Vec<[(i64, i64); 4]> {
    (0..count as i64).map(|i| [(2 * i + 1, 0), (1, 0), (i % 3 + 1, 0), (5 - i % 4, 0)]).collect()
}
