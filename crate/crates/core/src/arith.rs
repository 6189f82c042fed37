//! Elementary number theory: primality, factorization, squarefree cores, residue symbols.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const SMALL_BOUND: u64 = 1 << 16;

/// Primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            (i * i..=n).step_by(i).for_each(|j| sieve[j] = false);
        }
        i += 1;
    }
    (0..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the first twenty prime bases (deterministic below 3.3·10²⁴).
pub fn is_probable_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().expect("nonzero");
    let d = &nm1 >> s;
    'outer: for a in primes_up_to(71) {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho; returns a nontrivial factor of a composite `n`.
fn pollard_brent(n: &BigInt) -> BigInt {
    if n.is_even() {
        return BigInt::from(2);
    }
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let (mut y, mut r, mut q) = (BigInt::from(2), 1u64, BigInt::one());
        let mut g = BigInt::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..128.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += 128;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factorization of `|n|`, sorted by prime.
pub fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    assert!(!n.is_zero(), "cannot factor zero");
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in primes_up_to(SMALL_BOUND) {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        if n.is_one() {
            return out;
        }
    }
    let mut stack = vec![n];
    let mut large: Vec<BigInt> = Vec::new();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            large.push(m);
            continue;
        }
        let r = m.sqrt();
        if &r * &r == m {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let d = pollard_brent(&m);
        stack.push(&m / &d);
        stack.push(d);
    }
    large.sort();
    for p in large {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Signed squarefree kernel of a nonzero integer.
pub fn squarefree_core_int(n: &BigInt) -> BigInt {
    let mut core: BigInt = factor(n).into_iter().filter(|(_, e)| e % 2 == 1).map(|(p, _)| p).product();
    if n.sign() == Sign::Minus {
        core = -core;
    }
    core
}

/// Squarefree `c` with `q = c·r²` for a rational `r`.
pub fn squarefree_core(q: &BigRational) -> BigInt {
    squarefree_core_int(&(q.numer() * q.denom()))
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero());
    let bp = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &bp).is_zero() {
        n /= &bp;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a nonzero rational.
pub fn valuation_rat(q: &BigRational, p: u64) -> i64 {
    valuation(q.numer(), p) as i64 - valuation(q.denom(), p) as i64
}

/// Reduction of a rational with denominator prime to `p`.
pub fn reduce_mod(q: &BigRational, p: u64) -> Option<u64> {
    let bp = BigInt::from(p);
    let d = q.denom().mod_floor(&bp).to_u64()?;
    if d == 0 {
        return None;
    }
    let n = q.numer().mod_floor(&bp).to_u64()?;
    Some(mul_mod(n, pow_mod(d, p - 2, p), p))
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: &BigInt, n: u64) -> i32 {
    assert!(n % 2 == 1);
    let mut a = a.mod_floor(&BigInt::from(n)).to_u64().expect("reduced");
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(d/p)` for a prime `p`.
pub fn kronecker(d: &BigInt, p: u64) -> i32 {
    if p == 2 {
        if d.is_even() {
            return 0;
        }
        let r = d.mod_floor(&BigInt::from(8)).to_u64().expect("small");
        return if r == 1 || r == 7 { 1 } else { -1 };
    }
    jacobi(d, p)
}

/// Discriminant of `Q(√core)` for squarefree `core ≠ 1`.
pub fn field_discriminant(core: &BigInt) -> BigInt {
    let r = core.mod_floor(&BigInt::from(4));
    if r.is_one() {
        core.clone()
    } else {
        core * 4
    }
}

/// Whether `a` is a square in `F_p` (zero counts as a square).
pub fn is_square_mod(a: u64, p: u64) -> bool {
    let a = a % p;
    a == 0 || p == 2 || pow_mod(a, (p - 1) / 2, p) == 1
}

/// Exact integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_and_primality_agree() {
        let ps = primes_up_to(10_000);
        assert_eq!(ps.len(), 1229);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), ps.binary_search(&n).is_ok(), "{n}");
        }
        assert!(is_prime(9_265_613_761));
        assert!(is_probable_prime(&BigInt::from(44_010_848_671u64)));
    }

    #[test]
    fn factor_large() {
        let n: BigInt = BigInt::from(761u64).pow(2) * BigInt::from(44_010_848_671u64).pow(2) * BigInt::from(1u64 << 17);
        let f = factor(&n);
        assert_eq!(f, vec![(2.into(), 17), (761.into(), 2), (44_010_848_671u64.into(), 2)]);
        let semi = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        assert_eq!(factor(&semi), vec![(998_244_353.into(), 1), (1_000_000_007.into(), 1)]);
    }

    #[test]
    fn cores_and_symbols() {
        let q = BigRational::new(BigInt::from(-45), BigInt::from(8));
        assert_eq!(squarefree_core(&q), BigInt::from(-10));
        assert_eq!(kronecker(&BigInt::from(10), 3), 1);
        assert_eq!(kronecker(&BigInt::from(2), 73), 1);
        assert_eq!(kronecker(&BigInt::from(-15), 2), 1);
        assert_eq!(kronecker(&BigInt::from(10), 2), 0);
        assert_eq!(field_discriminant(&BigInt::from(10)), BigInt::from(40));
        assert_eq!(field_discriminant(&BigInt::from(-15)), BigInt::from(-15));
        for p in [3u64, 5, 7, 11, 13] {
            for a in 1..p {
                let sq = (1..p).any(|x| x * x % p == a);
                assert_eq!(jacobi(&BigInt::from(a), p) == 1, sq);
            }
        }
    }
}
