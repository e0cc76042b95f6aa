//! Integer and modular arithmetic substrate: sieves, primality, factoring,
//! Kronecker symbols, modular square roots, and the logarithmic integral.
//!
//! Factoring is deliberately low-tech: trial division up to 10^6 followed by
//! Brent-cycle Pollard rho with Miller-Rabin certification. Every
//! discriminant this crate touches directly is far below 2^127; anything
//! larger arrives pre-factored through the fixture format in
//! [`crate::curves::gap`].

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use crate::error::Error;
use crate::Result;

/// Trial-division bound used before switching to Pollard rho.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Iteration budget per Pollard rho attempt.
pub const RHO_ITERATION_CAP: u64 = 1 << 24;

// ---------------------------------------------------------------------------
// Sieve and modular basics
// ---------------------------------------------------------------------------

/// All primes `<= x` in increasing order. Returns an empty list for `x < 2`.
pub fn primes_up_to(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = x as usize;
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

fn small_primes() -> &'static [u64] {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    CACHE.get_or_init(|| primes_up_to(TRIAL_DIVISION_BOUND))
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    gcd_u64(a.unsigned_abs(), b.unsigned_abs()) as i64
}

pub fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns `(g, u, v)` with `u*a + v*b = g`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m` (requires `gcd(a, m) = 1`).
pub fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (g, u, _) = ext_gcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(u.rem_euclid(m as i128) as u64)
}

fn mul_mod_u128(mut a: u128, mut b: u128, m: u128) -> u128 {
    // Double-and-add; inputs are < 2^127 so a + a never overflows after
    // reduction.
    a %= m;
    b %= m;
    if let (Some(x), Some(y)) = (a.to_u64(), b.to_u64()) {
        if m <= u64::MAX as u128 {
            return (x as u128 * y as u128) % m;
        }
    }
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

fn pow_mod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Primality
// ---------------------------------------------------------------------------

/// Witnesses that make Miller-Rabin deterministic for all 64-bit inputs.
const MR_WITNESSES_U64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in MR_WITNESSES_U64.iter() {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin for inputs up to 2^127: deterministic below 2^64, 64 fixed
/// prime bases above (reproducible, error probability below 4^-64).
pub fn is_prime_u128(n: u128) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    let bases = primes_up_to(311); // first 64 primes
    'witness: for &a in bases.iter() {
        let mut x = pow_mod_u128(a as u128, d, n);
        if x == 1 || x == d0 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u128(x, x, n);
            if x == d0 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin on arbitrary-size integers with the same fixed 64 bases.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u128() {
        return is_prime_u128(small);
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in primes_up_to(311).iter() {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// ---------------------------------------------------------------------------
// Factoring
// ---------------------------------------------------------------------------

/// Pollard rho with Brent cycle detection. Returns a nontrivial factor of
/// the odd composite `n`.
fn pollard_brent(n: u128) -> Result<u128> {
    debug_assert!(n > 3 && n % 2 == 1);
    for c in 1u128..64 {
        let mut budget = RHO_ITERATION_CAP;
        let f = |x: u128| (mul_mod_u128(x, x, n) + c) % n;
        let mut y = 2u128;
        let mut x = y;
        let mut ys = y;
        let mut g = 1u128;
        let mut r = 1u64;
        let mut q = 1u128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0u64;
            while k < r && g == 1 {
                ys = y;
                let block = 128.min(r - k);
                for _ in 0..block {
                    y = f(y);
                    let diff = if x > y { x - y } else { y - x };
                    q = mul_mod_u128(q, diff.max(1), n);
                }
                g = gcd_u128(q, n);
                k += block;
                if budget < block {
                    g = 0;
                    break;
                }
                budget -= block;
            }
            r *= 2;
            if budget == 0 || g == 0 {
                break;
            }
        }
        if g == n || g == 0 {
            // Backtrack one step at a time to recover the factor.
            g = 1;
            while g == 1 {
                ys = f(ys);
                let diff = if x > ys { x - ys } else { ys - x };
                g = gcd_u128(diff.max(1), n);
                if budget == 0 {
                    break;
                }
                budget -= 1;
            }
            let _ = x;
        }
        if g > 1 && g < n {
            return Ok(g);
        }
    }
    Err(Error::FactorBudget(n))
}

/// Complete factorization of `n >= 1` as sorted `(prime, exponent)` pairs.
pub fn factor_u128(mut n: u128) -> Result<Vec<(u128, u32)>> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if n <= 1 {
        return Ok(out);
    }
    for &p in small_primes() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut remaining: Vec<u128> = Vec::new();
        while let Some(m) = stack.pop() {
            if is_prime_u128(m) {
                remaining.push(m);
            } else {
                let d = pollard_brent(m)?;
                stack.push(d);
                stack.push(m / d);
            }
        }
        remaining.sort_unstable();
        for m in remaining {
            match out.iter_mut().find(|(p, _)| *p == m) {
                Some((_, e)) => *e += 1,
                None => out.push((m, 1)),
            }
        }
    }
    out.sort_unstable_by_key(|&(p, _)| p);
    Ok(out)
}

/// Convenience wrapper for 64-bit inputs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor_u128(n as u128)
        .expect("rho budget cannot fail on 64-bit inputs")
        .into_iter()
        .map(|(p, e)| (p as u64, e))
        .collect()
}

/// A signed factorization: `sign * prod(p_i^e_i)`, primes strictly
/// increasing, each certified prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i32,
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Rebuild the factored integer.
    pub fn value(&self) -> BigInt {
        let mut acc = BigUint::one();
        for (p, e) in &self.factors {
            acc *= p.pow(*e);
        }
        let acc = BigInt::from(acc);
        if self.sign < 0 {
            -acc
        } else {
            acc
        }
    }

    /// Validate structural invariants: sign in {-1, +1}, primes strictly
    /// increasing, positive exponents, every prime certified.
    pub fn validate(&self) -> Result<()> {
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::domain(format!("sign must be +-1, got {}", self.sign)));
        }
        let mut prev: Option<&BigUint> = None;
        for (p, e) in &self.factors {
            if *e == 0 {
                return Err(Error::domain(format!("exponent 0 on prime {p}")));
            }
            if let Some(q) = prev {
                if q >= p {
                    return Err(Error::domain("primes must be strictly increasing".to_string()));
                }
            }
            if !is_prime_big(p) {
                return Err(Error::domain(format!("{p} is not prime")));
            }
            prev = Some(p);
        }
        Ok(())
    }
}

/// Factor a nonzero integer with `|n| <= 2^127`.
pub fn factorize(n: i128) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let sign = if n < 0 { -1 } else { 1 };
    let factors = factor_u128(n.unsigned_abs())?
        .into_iter()
        .map(|(p, e)| (BigUint::from(p), e))
        .collect();
    Ok(Factorization { sign, factors })
}

/// Write `d = f^2 * d0` with `d0` a fundamental discriminant.
///
/// Requires `d < 0` and `d = 0 or 1 mod 4`.
pub fn fundamental_decomposition(d: i128) -> Result<(i128, u64)> {
    if d >= 0 || !(d % 4 == 0 || d.rem_euclid(4) == 1) {
        return Err(Error::InvalidDiscriminant(d as i64));
    }
    let mut square_part: u128 = 1;
    let mut squarefree: i128 = -1;
    for (p, e) in factor_u128(d.unsigned_abs())? {
        for _ in 0..e / 2 {
            square_part *= p;
        }
        if e % 2 == 1 {
            squarefree *= p as i128;
        }
    }
    if squarefree.rem_euclid(4) == 1 {
        Ok((squarefree, square_part as u64))
    } else {
        // d = 0 mod 4 here, so the square part is even.
        debug_assert_eq!(square_part % 2, 0);
        Ok((4 * squarefree, (square_part / 2) as u64))
    }
}

// ---------------------------------------------------------------------------
// Kronecker symbol
// ---------------------------------------------------------------------------

/// Kronecker symbol (a/n), defined for all integers.
pub fn kronecker(mut a: i128, mut n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut result = 1i32;
    let mut twos = 0u32;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos % 2 == 1 {
        // (a/2) for odd a: +1 when a = +-1 mod 8, -1 when a = +-3 mod 8.
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            result = -result;
        }
    }
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        let mut v = 0u32;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

// ---------------------------------------------------------------------------
// Modular square roots
// ---------------------------------------------------------------------------

/// Both square roots of `a` modulo an odd prime `p`, smaller first.
///
/// Returns [`Error::NonResidue`] when `(a/p) = -1`.
pub fn sqrt_mod(a: u64, p: u64) -> Result<(u64, u64)> {
    debug_assert!(p >= 3 && a < p);
    if a == 0 {
        return Ok((0, 0));
    }
    let euler = pow_mod_u64(a, (p - 1) / 2, p);
    if euler == p - 1 {
        return Err(Error::NonResidue(a, p));
    }
    let r = if p % 4 == 3 {
        pow_mod_u64(a, (p + 1) / 4, p)
    } else {
        tonelli_shanks(a, p)
    };
    debug_assert_eq!(mul_mod_u64(r, r, p), a);
    let other = p - r;
    Ok((r.min(other), r.max(other)))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    // p = 1 mod 4, a a known residue. Smallest nonresidue keeps the whole
    // routine deterministic.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod_u64(z, q, p);
    let mut t = pow_mod_u64(a, q, p);
    let mut r = pow_mod_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod_u64(t2, t2, p);
            i += 1;
        }
        let b = pow_mod_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod_u64(b, b, p);
        t = mul_mod_u64(t, c, p);
        r = mul_mod_u64(r, b, p);
    }
    r
}

// ---------------------------------------------------------------------------
// Logarithmic integral
// ---------------------------------------------------------------------------

/// The integral of dt/log t from 2 to `x`, by adaptive Simpson quadrature.
///
/// The interval is split at t = 10 to tame the integrand near the lower
/// endpoint; absolute error stays below 1e-9.
pub fn li(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::domain(format!("li requires x >= 2, got {x}")));
    }
    let f = |t: f64| 1.0 / t.ln();
    let tol = 1e-10;
    if x <= 10.0 {
        Ok(adaptive_simpson(&f, 2.0, x, tol))
    } else {
        Ok(adaptive_simpson(&f, 2.0, 10.0, tol / 2.0) + adaptive_simpson(&f, 10.0, x, tol / 2.0))
    }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, simpson(f, a, b), tol, 52)
}
