use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use cubic_core::local_arith::singular::{partials_resultant, singular_points_fp, verify_annotated_bad_prime};
use cubic_core::local_arith::{bad_primes, count_points_mod, p_adic_mass, singular_reduction_report, SurfaceModel};

fn load(name: &str) -> SurfaceModel {
    let path = format!("{}/../../data/surfaces/{name}.surface", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

/// Primitive zeros in `(Z/p^m)⁴`, divided by the unit count, by exhaustion.
fn brute_count(s: &SurfaceModel, p: u64, m: u32) -> u64 {
    let q = p.pow(m);
    let mut n = 0u64;
    for t in 0..q.pow(4) {
        let x = [t % q, t / q % q, t / (q * q) % q, t / (q * q * q)];
        if x.iter().all(|c| c % p == 0) {
            continue;
        }
        if s.eval_mod(&x, q) == 0 {
            n += 1;
        }
    }
    n / (q - q / p)
}

#[test]
fn counts_match_exhaustion() {
    let fermat = SurfaceModel::fermat();
    for (p, m) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)] {
        assert_eq!(count_points_mod(&fermat, p, m).unwrap(), BigUint::from(brute_count(&fermat, p, m)), "p={p} m={m}");
    }
    let s = load("sqrtm5");
    for (p, m) in [(3, 1), (3, 2), (5, 1), (5, 2), (2, 3)] {
        assert_eq!(count_points_mod(&s, p, m).unwrap(), BigUint::from(brute_count(&s, p, m)), "p={p} m={m}");
    }
}

#[test]
fn mass_is_the_limit_of_normalized_counts() {
    let s = load("sqrtm5");
    for p in [2u64, 3, 5, 7] {
        let mass = p_adic_mass(&s, p).unwrap();
        let m = 8;
        let c = count_points_mod(&s, p, m).unwrap();
        let ratio = BigRational::new(BigInt::from(c), BigInt::from(p).pow(2 * m));
        assert_eq!(ratio, mass, "p={p}");
    }
    // Good reduction: the mass is #S(F_p)/p².
    let mass = p_adic_mass(&s, 7).unwrap();
    let n1 = count_points_mod(&s, 7, 1).unwrap();
    assert_eq!(mass, BigRational::new(BigInt::from(n1), BigInt::from(49)));
}

#[test]
fn bad_primes_of_the_examples() {
    let cases = [
        ("sqrtm5", vec![2, 5]),
        ("sqrtm15", vec![2, 3, 5]),
        ("sqrt10", vec![2, 3, 5, 11]),
        ("sqrtm3", vec![2, 3, 5]),
        ("sqrt2_a6", vec![2, 3, 5]),
        ("sqrt2_triple", vec![2, 3, 5, 31]),
    ];
    for (name, expect) in cases {
        let s = load(name);
        assert_eq!(bad_primes(&s, 60), expect, "{name}");
    }
    assert!(verify_annotated_bad_prime(&load("sqrt10"), 9_265_613_761));
}

#[test]
fn singular_points_and_lifting() {
    let s = load("sqrtm5");
    assert!(singular_points_fp(&s, 3).is_empty());
    assert!(!singular_reduction_report(&s, 5, 3).rational_points.is_empty());
    // Every reported point is singular modulo p.
    for (name, p) in [("sqrt10", 11u64), ("sqrtm3", 5), ("sqrt2_triple", 3)] {
        let s = load(name);
        for x in singular_points_fp(&s, p) {
            assert_eq!(s.eval_mod(&x, p), 0);
            assert!(s.gradient_mod(&x, p).iter().all(|&g| g == 0));
        }
    }
    let res = partials_resultant(&load("sqrt10"));
    assert!(res.to_f64().unwrap() > 0.0);
}

/// `det(pI − M)` by Faddeev–LeVerrier over the integers.
fn charpoly_at(m: &[[i64; 7]; 7], p: i64) -> BigInt {
    let n = 7;
    let mut coeffs = vec![BigInt::from(1)];
    let mut mk = [[0i64; 7]; 7];
    let mut c_prev = BigInt::from(1);
    let ident = |i: usize, j: usize| (i == j) as i64;
    for k in 1..=n {
        // M_k = M·(M_{k−1} + c_{k−1} I), c_k = −tr(M·M_k...)/k.
        let c = c_prev.to_i64().unwrap();
        let mut next = [[0i64; 7]; 7];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| m[i][l] * (mk[l][j] + c * ident(l, j))).sum();
            }
        }
        let tr: i64 = (0..n).map(|i| next[i][i]).sum();
        c_prev = BigInt::from(-tr / k as i64);
        coeffs.push(c_prev.clone());
        mk = next;
    }
    // coeffs[k] multiplies p^{n−k}.
    coeffs.iter().enumerate().map(|(k, c)| c * BigInt::from(p).pow((n - k) as u32)).sum()
}

#[test]
fn tamagawa_density_at_good_primes() {
    use cubic_core::cohomology::PicardModel;
    use cubic_core::error::Error;
    use cubic_core::hexahedral::{coble_disc, frobenius_line_action, line_action, SexticSpec};
    use cubic_core::local_arith::tamagawa_density;

    let path = format!("{}/../../data/sextics/sqrtm3.sextic", env!("CARGO_MANIFEST_DIR"));
    let f: SexticSpec = std::fs::read_to_string(path).unwrap().parse().unwrap();
    let core = coble_disc(&f).unwrap().core;
    let s = load("sqrtm3");
    for p in [7u64, 11, 19] {
        let frob = frobenius_line_action(&f, p, &core).unwrap();
        let m = PicardModel::shared().action(&frob.perm);
        let det = BigRational::new(charpoly_at(&m, p as i64), BigInt::from(p).pow(7));
        let mass = BigRational::new(BigInt::from(brute_count(&s, p, 1)), BigInt::from(p * p));
        assert_eq!(tamagawa_density(&s, &frob, p).unwrap(), det * mass, "p = {p}");
    }

    // Identity Frobenius: the factor is (1 − 1/p)⁷.
    let fermat = SurfaceModel::fermat();
    let mut id = frobenius_line_action(&f, 7, &core).unwrap();
    id.perm = line_action(&[0, 1, 2, 3, 4, 5], false);
    let mass = BigRational::new(BigInt::from(brute_count(&fermat, 7, 1)), BigInt::from(49));
    let expected = BigRational::new(BigInt::from(6), BigInt::from(7)).pow(7) * mass;
    assert_eq!(tamagawa_density(&fermat, &id, 7).unwrap(), expected);

    assert!(matches!(tamagawa_density(&fermat, &id, 11), Err(Error::InvalidInput(_))));
    id.p = 3;
    assert!(matches!(tamagawa_density(&fermat, &id, 3), Err(Error::UnsupportedPlace(_))));
}
