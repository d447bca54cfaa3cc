//! Polynomials over GF(2) stored as little-endian coefficient bit-vectors.

use std::fmt;
use std::str::FromStr;

use super::arith::{degree_of, xor_shifted, Reducer};
use crate::error::{Error, Result};
use crate::factor::divisors;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitPoly {
    words: Vec<u64>,
}

impl BitPoly {
    pub fn zero() -> Self {
        BitPoly { words: vec![] }
    }

    pub fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        BitPoly { words }
    }

    pub fn from_exponents(exps: &[usize]) -> Self {
        let top = exps.iter().copied().max().map_or(0, |d| d / 64 + 1);
        let mut words = vec![0u64; top];
        for &e in exps {
            words[e / 64] ^= 1 << (e % 64);
        }
        BitPoly::from_words(words)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn degree(&self) -> Option<usize> {
        degree_of(&self.words)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    /// Exponents with a nonzero coefficient, ascending.
    pub fn exponents(&self) -> Vec<usize> {
        let Some(d) = self.degree() else { return vec![] };
        (0..=d).filter(|&i| self.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn rem(&self, m: &BitPoly) -> BitPoly {
        let dm = m.degree().expect("division by zero polynomial");
        let mut r = self.words.clone();
        while let Some(dr) = degree_of(&r) {
            if dr < dm {
                break;
            }
            xor_shifted(&mut r, &m.words, dr - dm);
        }
        BitPoly::from_words(r)
    }

    pub fn gcd(&self, other: &BitPoly) -> BitPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn mul(&self, other: &BitPoly) -> BitPoly {
        let mut out = vec![0u64; self.words.len() + other.words.len()];
        super::arith::mul_words(&self.words, &other.words, &mut out);
        BitPoly::from_words(out)
    }

    /// Hex of the coefficient vector with the constant term in the lowest
    /// bit of the last digit, zero-padded to `width` digits.
    pub fn to_hex(&self, width: usize) -> String {
        words_to_hex(&self.words, width)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        Ok(BitPoly::from_words(words_from_hex(s)?))
    }

    /// Rabin's test: x^(2^n) = x mod f and gcd(x^(2^(n/r)) - x, f) = 1 for
    /// every prime r dividing n.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        if !self.coeff(0) {
            return false;
        }
        let red = Reducer::new(n, self.exponents().into_iter().filter(|&e| e < n).collect());
        let mut x = vec![0u64; red.words];
        x[0] = 2;
        let frob = |steps: usize| {
            let mut cur = x.clone();
            let mut scratch = Vec::new();
            for _ in 0..steps {
                red.square_in_place(&mut cur, &mut scratch);
            }
            cur[0] ^= 2;
            BitPoly::from_words(cur)
        };
        if !frob(n).is_zero() {
            return false;
        }
        let prime_divisors: Vec<u64> = divisors(n as u64)
            .into_iter()
            .filter(|&d| d > 1 && crate::factor::is_prime_u64(d))
            .collect();
        prime_divisors.into_iter().all(|r| {
            let g = frob(n / r as usize).gcd(self);
            g.degree() == Some(0)
        })
    }

    /// Smallest irreducible polynomial of degree `n`, ordering coefficient
    /// vectors lexicographically from the constant term upward.
    pub fn smallest_irreducible(n: usize) -> BitPoly {
        assert!(n >= 1);
        if n == 1 {
            return BitPoly::from_exponents(&[1]);
        }
        // Constant term must be 1 for n > 1. The middle coefficients
        // c_1..c_{n-1} are enumerated with c_1 as the most significant digit.
        let middle = n - 1;
        let mut k: u128 = 0;
        loop {
            let mut exps = vec![0, n];
            // bit b of k drives c_{n-1-b}
            for bit in 0..middle.min(128) {
                if (k >> bit) & 1 == 1 {
                    exps.push(n - 1 - bit);
                }
            }
            // Even weight means x + 1 divides.
            if exps.len() % 2 == 1 {
                let p = BitPoly::from_exponents(&exps);
                if p.is_irreducible() {
                    return p;
                }
            }
            k += 1;
        }
    }
}

impl fmt::Debug for BitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPoly({self})")
    }
}

impl fmt::Display for BitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = self.exponents();
        if exps.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = exps
            .iter()
            .rev()
            .map(|&e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for BitPoly {
    type Err = Error;

    /// Parses sums of monomials such as `x^4+x+1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut exps = Vec::new();
        for term in s.split('+').map(str::trim) {
            let e = match term {
                "1" => 0,
                "x" => 1,
                t if t.starts_with("x^") => t[2..]
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad monomial `{t}`")))?,
                t => return Err(Error::InvalidInput(format!("bad monomial `{t}`"))),
            };
            exps.push(e);
        }
        let mut p = BitPoly::zero();
        for e in exps {
            let m = BitPoly::from_exponents(&[e]);
            let len = p.words.len().max(m.words.len());
            let mut w = vec![0u64; len];
            for (i, x) in p.words.iter().enumerate() {
                w[i] ^= x;
            }
            for (i, x) in m.words.iter().enumerate() {
                w[i] ^= x;
            }
            p = BitPoly::from_words(w);
        }
        Ok(p)
    }
}

pub(crate) fn words_to_hex(words: &[u64], width: usize) -> String {
    let mut s = String::with_capacity(width);
    for digit in (0..width).rev() {
        let bit = digit * 4;
        let w = words.get(bit / 64).copied().unwrap_or(0);
        let nib = (w >> (bit % 64)) & 0xf;
        s.push(char::from_digit(nib as u32, 16).unwrap());
    }
    s
}

pub(crate) fn words_from_hex(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty hex string".into()));
    }
    let digits: Vec<u32> = s
        .chars()
        .map(|c| c.to_digit(16).ok_or_else(|| Error::InvalidInput(format!("bad hex digit `{c}`"))))
        .collect::<Result<_>>()?;
    let mut words = vec![0u64; (digits.len() * 4).div_ceil(64)];
    for (i, d) in digits.iter().rev().enumerate() {
        let bit = i * 4;
        words[bit / 64] |= (*d as u64) << (bit % 64);
    }
    Ok(words)
}
