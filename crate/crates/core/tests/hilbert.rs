mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubic_core::arith::primes_up_to;
use cubic_core::local_arith::hilbert::{hilbert_symbol, hilbert_symbol_int, Place};

#[test]
fn agrees_with_exhaustive_norm_search() {
    for p in [2i64, 3, 5, 7] {
        for a in (-50i64..=50).filter(|&a| a != 0) {
            for b in (-50i64..=50).filter(|&b| b != 0) {
                let expect = common::hilbert_oracle(a, b, p);
                assert_eq!(hilbert_symbol_int(a, b, Place::Finite(p as u64)), expect, "({a}, {b})_{p}");
            }
        }
    }
}

#[test]
fn symmetry_bimultiplicativity_and_product_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rat = |rng: &mut ChaCha8Rng| {
        let mut n = 0i64;
        while n == 0 {
            n = rng.gen_range(-2000..2000);
        }
        BigRational::new(BigInt::from(n), BigInt::from(rng.gen_range(1..300i64)))
    };
    let places: Vec<Place> = primes_up_to(2000).into_iter().map(Place::Finite).chain([Place::Infinite]).collect();
    for _ in 0..200 {
        let (a, b, c) = (rat(&mut rng), rat(&mut rng), rat(&mut rng));
        let mut product = 1;
        for &v in &places {
            let ab = hilbert_symbol(&a, &b, v);
            assert_eq!(ab, hilbert_symbol(&b, &a, v));
            assert_eq!(hilbert_symbol(&a, &(&b * &c), v), ab * hilbert_symbol(&a, &c, v));
            product *= ab;
        }
        assert_eq!(product, 1, "({a}, {b})");
    }
}

#[test]
fn split_primes_give_trivial_symbols() {
    let ten = BigRational::from_integer(10.into());
    for z in (-40i64..=40).filter(|&z| z != 0) {
        assert_eq!(hilbert_symbol(&ten, &BigRational::from_integer(z.into()), Place::Finite(3)), 1);
    }
    for z in 1..30i64 {
        assert_eq!(hilbert_symbol_int(1, z, Place::Finite(2)), 1);
        assert_eq!(hilbert_symbol_int(1, -z, Place::Infinite), 1);
    }
}
