//! Small elementary number theory helpers shared by the arithmetic modules.
//!
//! Everything here works on `u64` by trial division; callers stay well below
//! the sizes where that matters.

pub use num_integer::gcd;

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 2;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Returns `(p, t)` when `q = p^t` with `t >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, t)] => Some((*p, *t)),
        _ => None,
    }
}

/// All prime powers `2 <= q <= limit`, ascending.
pub fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in primes_up_to(limit) {
        let mut q = p;
        while q <= limit {
            out.push(q);
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn mobius(n: u64) -> i64 {
    if n == 0 {
        return 0;
    }
    let mut sign = 1;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Sum of divisors σ₁(n).
pub fn sigma1(n: u64) -> u128 {
    factorize(n).into_iter().fold(1u128, |acc, (p, e)| {
        let p = p as u128;
        // (p^{e+1} - 1) / (p - 1)
        let mut s = 1u128;
        let mut pk = 1u128;
        for _ in 0..e {
            pk *= p;
            s += pk;
        }
        acc * s
    })
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `b` modulo the prime `p` (requires `p ∤ b`).
pub fn multiplicative_order_mod_prime(b: u64, p: u64) -> u64 {
    let mut order = p - 1;
    for (l, _) in factorize(p - 1) {
        while order % l == 0 && pow_mod(b, order / l, p) == 1 {
            order /= l;
        }
    }
    order
}

/// `|SL₂(ℤ/q)| = q³ ∏_{p | q} (1 − 1/p²)`.
pub fn sl2_order(q: u64) -> u64 {
    factorize(q)
        .into_iter()
        .fold(q * q * q, |acc, (p, _)| acc / (p * p) * (p * p - 1))
}
