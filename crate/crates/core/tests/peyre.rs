mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubic_core::arith::kronecker;
use cubic_core::cohomology::{identity_mat, manin_h1, PicMat, PicardModel};
use cubic_core::hexahedral::{coble_disc, frobenius_line_action, galois_image, line_action, SexticSpec};
use cubic_core::local_arith::evaluation::Measure;
use cubic_core::local_arith::SurfaceModel;
use cubic_core::peyre::{
    alpha, artin_l_value, beta, peyre_constant, predicted_count, search_points, AdelicMass, PeyreComponents,
    Provenance, Sourced,
};
use cubic_core::subgroups::u1_classes;

use common::{data, grid_points, EXAMPLES};

/// Published `(τ, predicted count at B = 4000)` per example.
const PUBLISHED: [(f64, u64); 6] =
    [(1.7005, 6802), (5.0879, 20352), (3.7217, 14887), (2.2647, 9059), (2.4545, 9818), (1.8532, 7413)];

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qv(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| q(x, 1)).collect()
}

/// Area of the polygon `{x : xᵀG e ≥ 0 for each e, xᵀG k ≤ 1}` in the plane:
/// all pairwise intersections of the boundary lines, filtered for feasibility,
/// ordered by angle around their centroid, then the shoelace formula.
fn polygon_area(g: [[f64; 2]; 2], gens: &[[f64; 2]], k: [f64; 2]) -> f64 {
    let row = |v: [f64; 2]| [g[0][0] * v[0] + g[1][0] * v[1], g[0][1] * v[0] + g[1][1] * v[1]];
    let mut lines: Vec<([f64; 2], f64)> = gens.iter().map(|e| (row(*e), 0.0)).collect();
    lines.push((row(k), 1.0));
    let feasible = |x: [f64; 2]| {
        lines[..lines.len() - 1].iter().all(|(a, _)| a[0] * x[0] + a[1] * x[1] >= -1e-9)
            && lines.last().map(|(a, c)| a[0] * x[0] + a[1] * x[1] <= c + 1e-9).unwrap()
    };
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ((a, c), (b, d)) = (lines[i], lines[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(c * b[1] - a[1] * d) / det, (a[0] * d - c * b[0]) / det];
            if feasible(x) && !pts.iter().any(|p| (p[0] - x[0]).abs() + (p[1] - x[1]).abs() < 1e-9) {
                pts.push(x);
            }
        }
    }
    let n = pts.len() as f64;
    let c = [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n];
    pts.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    let mut area = 0.0;
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        area += a[0] * b[1] - a[1] * b[0];
    }
    area.abs() / 2.0
}

#[test]
fn alpha_in_rank_one() {
    // ⟨x, −K⟩ = 3x on the ray spanned by −K.
    assert_eq!(alpha(&[vec![3]], &[vec![1]], &qv(&[1])).unwrap(), q(1, 3));
    // A generator of self-intersection 1 with −K = 3 times it.
    assert_eq!(alpha(&[vec![1]], &[vec![1]], &qv(&[3])).unwrap(), q(1, 3));
}

#[test]
fn alpha_matches_polygon_areas() {
    let g = [[-6.0, 30.0], [30.0, 75.0]];
    let gram = vec![vec![-6, 30], vec![30, 75]];
    let cases: [(Vec<Vec<i64>>, [i64; 2], [i64; 2]); 3] = [
        (vec![vec![1, 0], vec![0, 1]], [1, 1], [9, 9]),
        (vec![vec![1, 0], vec![0, 1], vec![1, 1]], [1, 2], [5, 7]),
        (vec![vec![1, 0], vec![0, 1], vec![2, -1]], [1, 1], [4, 3]),
    ];
    for (gens, kn, kd) in cases {
        let k = [kn[0] as f64 / kd[0] as f64, kn[1] as f64 / kd[1] as f64];
        let fg: Vec<[f64; 2]> = gens.iter().map(|e| [e[0] as f64, e[1] as f64]).collect();
        let expected = 2.0 * polygon_area(g, &fg, k);
        let got = alpha(&gram, &gens, &[q(kn[0], kd[0]), q(kn[1], kd[1])]).unwrap();
        assert!((got.to_f64().unwrap() - expected).abs() < 1e-9 * expected.max(1.0), "{got} vs {expected}");
    }
    let base = alpha(&gram, &[vec![1, 0], vec![0, 1]], &[q(1, 9), q(1, 9)]).unwrap();
    assert_eq!(base, q(3, 50));
}

#[test]
fn alpha_of_a_simplex_and_errors() {
    let id = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
    // {y ≥ 0, Σy ≤ 1}: volume 1/6.
    assert_eq!(alpha(&id, &id, &qv(&[1, 1, 1])).unwrap(), q(1, 2));
    assert!(alpha(&id, &id[..2], &qv(&[1, 1, 1])).is_err(), "not pointed");
    assert!(alpha(&id, &id, &qv(&[1, 1, -1])).is_err(), "-K outside the cone");
    assert!(alpha(&id, &id, &qv(&[1, 1, 0])).is_err(), "-K on the boundary");
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    (0..a.len()).map(|i| (0..a.len()).map(|j| a[j][i]).collect()).collect()
}

#[test]
fn alpha_is_invariant_under_unimodular_change_of_basis() {
    let gram = vec![vec![3, 1, 0], vec![1, 2, 1], vec![0, 1, 4]];
    let gens = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0], vec![1, -1, 1]];
    let k = vec![q(1, 2), q(1, 3), q(1, 5)];
    let reference = alpha(&gram, &gens, &k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        // U = product of elementary matrices; U⁻¹ accumulated alongside.
        let mut u: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| (i == j) as i64).collect()).collect();
        let mut u_inv = u.clone();
        for _ in 0..4 {
            let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
            if i == j {
                continue;
            }
            let c = rng.gen_range(-2..=2);
            let mut e = (0..3).map(|a| (0..3).map(|b| (a == b) as i64).collect()).collect::<Vec<Vec<i64>>>();
            let mut e_inv = e.clone();
            e[i][j] = c;
            e_inv[i][j] = -c;
            u = mat_mul(&u, &e);
            u_inv = mat_mul(&e_inv, &u_inv);
        }
        // New coordinates y = U⁻¹x, Gram Uᵀ G U.
        let gram2 = mat_mul(&mat_mul(&transpose(&u), &gram), &u);
        let gens2: Vec<Vec<i64>> =
            gens.iter().map(|e| (0..3).map(|i| (0..3).map(|j| u_inv[i][j] * e[j]).sum()).collect()).collect();
        let k2: Vec<BigRational> = (0..3)
            .map(|i| (0..3).fold(q(0, 1), |s, j| s + BigRational::from_integer(BigInt::from(u_inv[i][j])) * &k[j]))
            .collect();
        assert_eq!(alpha(&gram2, &gens2, &k2).unwrap(), reference);
    }
}

#[test]
fn trivial_character_gives_one() {
    let l = artin_l_value(|_| Some(identity_mat()), 7, 2000);
    assert_eq!(l.value, 1.0);
    assert_eq!(l.tail_bound, 0.0);
}

#[test]
fn quadratic_character_l_value() {
    // P = the sign character of Q(√−3): Frobenius is the central flip at inert primes.
    let flip = PicardModel::shared().action(&line_action(&[0, 1, 2, 3, 4, 5], true));
    let sampler = |p: u64| -> Option<PicMat> {
        match kronecker(&BigInt::from(-3), p) {
            1 => Some(identity_mat()),
            -1 => Some(flip),
            _ => None,
        }
    };
    let l = artin_l_value(sampler, 6, 200_000);
    assert_eq!(l.skipped, vec![3]);
    // Independent evaluation: partial sums of Σ χ(n)/n.
    let chi = |n: i64| [0.0, 1.0, -1.0][(n % 3) as usize];
    let partial: f64 = (1..2_000_000i64).map(|n| chi(n) / n as f64).sum();
    let exact = std::f64::consts::PI / (3.0 * 3f64.sqrt());
    assert!((partial - exact).abs() < 1e-5);
    assert!((l.value - partial).abs() < l.tail_bound.max(1e-3), "{} vs {partial}", l.value);
}

fn frobenius_sampler(name: &str) -> impl Fn(u64) -> Option<PicMat> + Sync {
    let f: SexticSpec = data("sextic", name).parse().unwrap();
    let core = coble_disc(&f).unwrap().core;
    move |p| frobenius_line_action(&f, p, &core).ok().map(|fr| PicardModel::shared().action(&fr.perm))
}

#[test]
fn l_values_are_stable_under_doubling_the_cutoff() {
    for name in EXAMPLES {
        let sampler = frobenius_sampler(name);
        let a = artin_l_value(&sampler, 1, 5000);
        let b = artin_l_value(&sampler, 1, 10000);
        println!("{name}: {a}; doubled {b}");
        assert!((a.value - b.value).abs() < a.tail_bound, "{name}: {a} vs {b}");
    }
}

#[test]
fn beta_from_the_galois_image() {
    let mut betas = Vec::new();
    for name in EXAMPLES {
        let f: SexticSpec = data("sextic", name).parse().unwrap();
        let split = coble_disc(&f).unwrap();
        let image = galois_image(&f, &split, 5000);
        let best = image.best().unwrap();
        assert_eq!(best.h1, manin_h1(&u1_classes()[best.class]));
        assert!(image.h1_margin() > 0.5, "{name}: ambiguous image");
        betas.push(beta(&best.h1));
    }
    // Published: H¹ ≅ Z/2 for the first example, Z/2 × Z/2 for the last.
    assert_eq!(betas[0], 2);
    assert_eq!(betas[5], 4);
    assert_eq!(betas, [2, 2, 2, 2, 2, 4]);
}

#[test]
fn published_predictions() {
    for (tau, prediction) in PUBLISHED {
        assert_eq!(predicted_count(tau, 1, 4000.0).round() as u64, prediction);
        let report = peyre_constant(PeyreComponents { pic_rank: 1, tau_published: Some(tau), ..Default::default() });
        assert_eq!(report.tau(), Some((tau, Provenance::Published)));
        assert_eq!(report.predicted_count(4000.0).unwrap().round() as u64, prediction);
        // Exactly linear in B at rank one.
        assert!((report.predicted_count(8000.0).unwrap() - 2.0 * report.predicted_count(4000.0).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn report_assembly() {
    let partial = peyre_constant(PeyreComponents {
        pic_rank: 1,
        alpha: Some(Sourced::new(q(1, 3), Provenance::Computed)),
        ..Default::default()
    });
    assert_eq!(partial.missing, ["beta", "l_value", "adelic_mass"]);
    assert!(partial.tau_recomputed.is_none() && partial.tau().is_none());
    assert!(partial.to_string().contains("beta           absent"));

    let mass = AdelicMass {
        factors: vec![("inf".into(), Sourced::new(Measure::Exact(q(3, 2)), Provenance::UserSupplied))],
        brauer_fraction: Some(Sourced::new(Measure::Exact(q(4, 7)), Provenance::Published)),
    };
    let full = peyre_constant(PeyreComponents {
        pic_rank: 1,
        alpha: Some(Sourced::new(q(1, 3), Provenance::Computed)),
        beta: Some(Sourced::new(2, Provenance::Computed)),
        l_value: Some(Sourced::new(Measure::Exact(q(5, 4)), Provenance::UserSupplied)),
        adelic_mass: Some(mass),
        ..Default::default()
    });
    assert_eq!(full.tau_recomputed, Some(Measure::Exact(q(5, 7))));
    assert_eq!(full.tau().unwrap().1, Provenance::Computed);
    let text = full.to_string();
    for label in ["[computed]", "[user-supplied]", "[paper-published]", "heuristic truncation"] {
        assert!(text.contains(label), "{label} missing from\n{text}");
    }
}

#[test]
fn fermat_points_of_height_one() {
    let s = SurfaceModel::fermat();
    let found = search_points(&s, 1);
    let grid: Vec<[i64; 4]> = grid_points(&s, 1).into_iter().map(|(_, v)| v).collect();
    assert_eq!(found.points, grid);
    // Six of the shape (1, −1, 0, 0) and three of the shape (1, 1, −1, −1).
    assert_eq!(found.count(), 9);
}

#[test]
fn search_matches_the_grid_oracle() {
    let bound = 25;
    for name in EXAMPLES {
        let s: SurfaceModel = data("surface", name).parse().unwrap();
        let grid = grid_points(&s, bound);
        let mut last = 0;
        for b in [1, 2, 3, 5, 8, 13, 20, 25] {
            let mut expected: Vec<[i64; 4]> = grid.iter().filter(|(h, _)| *h <= b).map(|(_, v)| *v).collect();
            expected.sort();
            let found = search_points(&s, b);
            assert_eq!(found.points, expected, "{name} at B = {b}");
            assert!(found.count() >= last);
            last = found.count();
        }
        println!("{name}: {last} points of height <= {bound}");
    }
}

#[test]
fn search_is_thread_independent() {
    let s: SurfaceModel = data("surface", "sqrt10").parse().unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| search_points(&s, 60))
    };
    assert_eq!(run(1), run(4));
}
