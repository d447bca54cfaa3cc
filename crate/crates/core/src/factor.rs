//! Integer factorization for multiplicative-group orders.
//!
//! Trial division up to 10^6 followed by Brent's variant of Pollard rho,
//! bounded by a wall-clock budget. Orders of the form 2^N - 1 are split
//! along cyclotomic values first and consult a built-in table of known
//! factors, which is what makes the large fixture fields tractable.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::factor_table::CYCLOTOMIC_FACTORS;

const TRIAL_LIMIT: u32 = 1_000_000;

/// Wall-clock budget for the Pollard rho stage.
#[derive(Debug, Clone, Copy)]
pub struct FactorBudget {
    pub time: Duration,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            time: Duration::from_secs(5),
        }
    }
}

/// Prime-power decomposition, possibly with cofactors that could not be split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub primes: Vec<(BigUint, u32)>,
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    pub fn product(&self) -> BigUint {
        let mut acc = BigUint::one();
        for (p, e) in &self.primes {
            acc *= p.pow(*e);
        }
        for c in &self.unfactored {
            acc *= c;
        }
        acc
    }

    /// Euler's totient; only meaningful when the factorization is complete.
    pub fn totient(&self) -> Option<BigUint> {
        if !self.is_complete() {
            return None;
        }
        let mut phi = BigUint::one();
        for (p, e) in &self.primes {
            phi *= p.pow(e - 1) * (p - 1u32);
        }
        Some(phi)
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = &BigUint> {
        self.primes.iter().map(|(p, _)| p)
    }

    fn push_prime(&mut self, p: BigUint, e: u32) {
        match self.primes.iter_mut().find(|(q, _)| *q == p) {
            Some((_, k)) => *k += e,
            None => self.primes.push((p, e)),
        }
    }

    fn merge(&mut self, other: Factorization) {
        for (p, e) in other.primes {
            self.push_prime(p, e);
        }
        self.unfactored.extend(other.unfactored);
    }

    fn normalize(&mut self) {
        self.primes.sort();
        self.unfactored.sort();
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if sieve[i] {
                let mut j = i * i;
                while j <= limit {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i as u32))
            .collect()
    })
}

/// Incremental prime iterator starting at 2.
pub fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| is_prime_u64(n))
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    // Deterministic Miller-Rabin for 64-bit inputs.
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with the first 20 prime bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &small_primes()[..200] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let r = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> r;
    'witness: for &a in &small_primes()[..20] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..r {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's cycle-finding variant of Pollard rho. Returns a nontrivial
/// factor, or `None` once the deadline passes.
fn pollard_brent(n: &BigUint, deadline: Instant) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    const BATCH: usize = 128;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1usize;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
                if Instant::now() > deadline {
                    return None;
                }
            }
            r *= 2;
        }
        if &g == n {
            // Batched product collapsed; step back one at a time.
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        if Instant::now() > deadline {
            return None;
        }
    }
    None
}

/// Factors as far as the budget allows; leftovers are reported, not dropped.
pub fn factor_partial(x: &BigUint, budget: FactorBudget) -> Factorization {
    let deadline = Instant::now() + budget.time;
    let mut out = Factorization::default();
    let mut rest = x.clone();
    if rest <= BigUint::one() {
        return out;
    }
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push_prime(pb, e);
        }
    }
    let mut stack = Vec::new();
    if rest > BigUint::one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if is_probable_prime(&m) {
            out.push_prime(m, 1);
            continue;
        }
        match pollard_brent(&m, deadline) {
            Some(f) => {
                let g = &m / &f;
                stack.push(f);
                stack.push(g);
            }
            None => out.unfactored.push(m),
        }
    }
    out.normalize();
    out
}

/// Complete factorization or `FACTORIZATION_TIMEOUT`.
pub fn factor_integer(x: &BigUint, budget: FactorBudget) -> Result<Vec<(BigUint, u32)>> {
    if *x < BigUint::from(2u32) {
        return Err(Error::InvalidInput(format!("cannot factor {x}")));
    }
    let f = factor_partial(x, budget);
    if f.is_complete() {
        Ok(f.primes)
    } else {
        Err(Error::FactorizationTimeout { what: x.to_string() })
    }
}

fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut upper: Vec<u64> = out.iter().rev().map(|d| n / d).filter(|&e| e * e != n).collect();
    out.append(&mut upper);
    out
}

/// The cyclotomic value Φ_d(2).
pub fn cyclotomic_at_two(d: u64) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in divisors(d) {
        let term = (BigUint::one() << e as usize) - 1u32;
        match mobius(d / e) {
            1 => num *= term,
            -1 => den *= term,
            _ => {}
        }
    }
    num / den
}

fn table_entry(d: u64) -> Option<Factorization> {
    CYCLOTOMIC_FACTORS
        .iter()
        .find(|(idx, _, _)| *idx == d)
        .map(|(_, primes, composites)| {
            let mut f = Factorization::default();
            for p in *primes {
                f.push_prime(p.parse().expect("table prime"), 1);
            }
            for c in *composites {
                f.unfactored.push(c.parse().expect("table cofactor"));
            }
            f
        })
}

/// Factorization of 2^m - 1, assembled from its cyclotomic pieces.
pub fn mersenne_factorization(m: usize, budget: FactorBudget) -> Factorization {
    let mut out = Factorization::default();
    for d in divisors(m as u64) {
        if d == 1 {
            continue;
        }
        match table_entry(d) {
            Some(f) => out.merge(f),
            None => out.merge(factor_partial(&cyclotomic_at_two(d), budget)),
        }
    }
    out.normalize();
    out
}

/// Euler's totient of 2^m - 1, erroring when the order cannot be factored.
pub fn phi_mersenne(m: usize, budget: FactorBudget) -> Result<BigUint> {
    mersenne_factorization(m, budget)
        .totient()
        .ok_or_else(|| Error::FactorizationTimeout {
            what: format!("2^{m} - 1"),
        })
}
