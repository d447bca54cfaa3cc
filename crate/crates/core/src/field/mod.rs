//! Binary extension fields GF(2^N) in polynomial basis, with subfields
//! handled by Frobenius fixed-point tests inside the one big field.
//!
//! Every subfield GF(2^m) with m | N lives inside the same context; an
//! element belongs to it iff `e^(2^m) = e`. Traces, dual bases and the
//! subfield-restricted linear algebra all run on full-width elements.

mod arith;
pub mod linalg;
mod poly2;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::factor::{mersenne_factorization, FactorBudget, Factorization};
use arith::Reducer;
pub use linalg::{dual_basis, gf2_rank, BasisOverSubfield};
pub use poly2::BitPoly;

/// A field element: N coefficient bits, little-endian in 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem(Vec<u64>);

impl FieldElem {
    pub fn words(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.0.first() == Some(&1) && self.0[1..].iter().all(|&w| w == 0)
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        FieldElem(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn add_assign(&mut self, other: &FieldElem) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElem(")?;
        for w in self.0.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}

/// Whether the context generator has been proven primitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorStatus {
    Proven,
    /// Checked against every known prime factor of 2^N - 1, but some
    /// cofactors of the order are still unfactored.
    Partial { unfactored_bits: Vec<u64> },
}

#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct FieldOptions {
    pub factor_budget: FactorBudget,
    /// Accept a generator that passes every available order test when
    /// 2^N - 1 cannot be fully factored.
    pub allow_unproven_generator: bool,
}


struct CtxInner {
    reducer: Reducer,
    modulus: BitPoly,
    generator: FieldElem,
    order: Factorization,
    status: GeneratorStatus,
}

/// Arithmetic context for GF(2^N). Cheap to clone and safe to share.
#[derive(Clone)]
pub struct FieldCtx(Arc<CtxInner>);

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("degree_bits", &self.degree())
            .field("modulus", &self.0.modulus)
            .field("status", &self.0.status)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.modulus == other.0.modulus
    }
}

impl FieldCtx {
    /// Builds GF(2^degree_bits). Without a modulus, the lexicographically
    /// smallest irreducible polynomial is used.
    pub fn new(degree_bits: usize, modulus: Option<BitPoly>, opts: FieldOptions) -> Result<Self> {
        if degree_bits == 0 {
            return Err(Error::InvalidInput("degree_bits must be at least 1".into()));
        }
        let modulus = match modulus {
            Some(m) => {
                let got = m.degree().unwrap_or(0);
                if got != degree_bits {
                    return Err(Error::ModulusDegree {
                        expected: degree_bits,
                        got,
                    });
                }
                if !m.is_irreducible() {
                    return Err(Error::ReducibleModulus);
                }
                m
            }
            None => BitPoly::smallest_irreducible(degree_bits),
        };
        let terms = modulus.exponents().into_iter().filter(|&e| e < degree_bits).collect();
        let reducer = Reducer::new(degree_bits, terms);
        let order = mersenne_factorization(degree_bits, opts.factor_budget);
        let status = if order.is_complete() {
            GeneratorStatus::Proven
        } else if opts.allow_unproven_generator {
            GeneratorStatus::Partial {
                unfactored_bits: order.unfactored.iter().map(|c| c.bits()).collect(),
            }
        } else {
            return Err(Error::FactorizationTimeout {
                what: format!("2^{degree_bits} - 1"),
            });
        };
        let mut ctx = CtxInner {
            reducer,
            modulus,
            generator: FieldElem(vec![]),
            order,
            status,
        };
        let words = ctx.reducer.words;
        let one = {
            let mut w = vec![0u64; words];
            w[0] = 1;
            FieldElem(w)
        };
        ctx.generator = one.clone();
        let mut field = FieldCtx(Arc::new(ctx));
        if degree_bits > 1 {
            let mut candidate = 2u64;
            let generator = loop {
                let mut w = vec![0u64; words];
                w[0] = candidate;
                let e = FieldElem(w);
                if degree_bits < 64 && candidate >> degree_bits != 0 {
                    return Err(Error::InvalidInput("no primitive element found".into()));
                }
                if field.has_full_order(&e) {
                    break e;
                }
                candidate += 1;
            };
            Arc::get_mut(&mut field.0).expect("unshared").generator = generator;
        }
        Ok(field)
    }

    fn has_full_order(&self, e: &FieldElem) -> bool {
        let order = self.group_order();
        if e.is_zero() {
            return false;
        }
        self.0.order.distinct_primes().all(|p| {
            let cofactor = &order / p;
            !self.pow(e, &cofactor).is_one()
        })
    }

    pub fn degree(&self) -> usize {
        self.0.reducer.degree
    }

    pub fn words(&self) -> usize {
        self.0.reducer.words
    }

    pub fn modulus(&self) -> &BitPoly {
        &self.0.modulus
    }

    pub fn generator(&self) -> &FieldElem {
        &self.0.generator
    }

    pub fn generator_status(&self) -> &GeneratorStatus {
        &self.0.status
    }

    pub fn order_factorization(&self) -> &Factorization {
        &self.0.order
    }

    /// 2^N - 1.
    pub fn group_order(&self) -> BigUint {
        (BigUint::one() << self.degree()) - 1u32
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(vec![0; self.words()])
    }

    pub fn one(&self) -> FieldElem {
        self.from_u64(1)
    }

    /// Element whose low coefficient bits are `bits` (truncated to N bits).
    pub fn from_u64(&self, bits: u64) -> FieldElem {
        let mut w = vec![0u64; self.words()];
        w[0] = bits;
        if self.words() == 1 {
            w[0] &= self.0.reducer.top_mask();
        }
        FieldElem(w)
    }

    pub fn from_words(&self, words: &[u64]) -> Result<FieldElem> {
        let mut w = words.to_vec();
        if w.len() > self.words() {
            if w[self.words()..].iter().any(|&x| x != 0) {
                return Err(Error::InvalidInput("element wider than the field".into()));
            }
            w.truncate(self.words());
        }
        w.resize(self.words(), 0);
        let top = *w.last().unwrap();
        if top & !self.0.reducer.top_mask() != 0 {
            return Err(Error::InvalidInput("element wider than the field".into()));
        }
        Ok(FieldElem(w))
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElem {
        let mut w: Vec<u64> = (0..self.words()).map(|_| rng.next_u64()).collect();
        *w.last_mut().unwrap() &= self.0.reducer.top_mask();
        FieldElem(w)
    }

    /// Every element of the field, in integer order. Only for small N.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        assert!(self.degree() <= 24, "enumeration only for small fields");
        (0u64..(1 << self.degree())).map(|v| self.from_u64(v))
    }

    pub fn hex_width(&self) -> usize {
        self.degree().div_ceil(4)
    }

    pub fn to_hex(&self, e: &FieldElem) -> String {
        poly2::words_to_hex(e.words(), self.hex_width())
    }

    pub fn from_hex(&self, s: &str) -> Result<FieldElem> {
        if s.trim().len() != self.hex_width() {
            return Err(Error::InvalidInput(format!(
                "expected {} hex digits, got {}",
                self.hex_width(),
                s.trim().len()
            )));
        }
        self.from_words(&poly2::words_from_hex(s)?)
    }

    pub fn modulus_hex(&self) -> String {
        self.0.modulus.to_hex((self.degree() + 1).div_ceil(4))
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.add(b)
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(self.0.reducer.mul(&a.0, &b.0))
    }

    pub fn square(&self, a: &FieldElem) -> FieldElem {
        FieldElem(self.0.reducer.square(&a.0))
    }

    /// Inverse by the binary extended Euclidean algorithm over GF(2)[x].
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let len = self.words() + 1;
        let mut u = a.0.clone();
        u.resize(len, 0);
        let mut v = self.0.modulus.words().to_vec();
        v.resize(len, 0);
        let mut g1 = vec![0u64; len];
        g1[0] = 1;
        let mut g2 = vec![0u64; len];
        let mut du = arith::degree_of(&u).unwrap();
        let mut dv = self.degree();
        while du != 0 {
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                std::mem::swap(&mut du, &mut dv);
            }
            let j = du - dv;
            arith::xor_shifted(&mut u, &v, j);
            arith::xor_shifted(&mut g1, &g2, j);
            du = arith::degree_of(&u).ok_or(Error::ZeroInverse)?;
        }
        let mut t = g1;
        t.resize(2 * self.words().max(1) + 1, 0);
        self.0.reducer.reduce(&mut t);
        t.truncate(self.words());
        Ok(FieldElem(t))
    }

    pub fn pow(&self, base: &FieldElem, exp: &BigUint) -> FieldElem {
        if exp.is_zero() {
            return self.one();
        }
        let mut acc = self.one();
        for i in (0..exp.bits()).rev() {
            acc = self.square(&acc);
            if exp.bit(i) {
                acc = self.mul(&acc, base);
            }
        }
        acc
    }

    pub fn pow_u64(&self, base: &FieldElem, exp: u64) -> FieldElem {
        self.pow(base, &BigUint::from(exp))
    }

    fn check_sub_degree(&self, m: usize) -> Result<()> {
        if m == 0 || !self.degree().is_multiple_of(m) {
            return Err(Error::NotASubfieldDegree {
                sub: m,
                degree: self.degree(),
            });
        }
        Ok(())
    }

    /// e^(2^m) by m repeated squarings.
    pub fn frobenius(&self, e: &FieldElem, m: usize) -> Result<FieldElem> {
        self.check_sub_degree(m)?;
        Ok(self.frobenius_unchecked(e, m))
    }

    fn frobenius_unchecked(&self, e: &FieldElem, m: usize) -> FieldElem {
        let mut cur = e.0.clone();
        let mut scratch = Vec::new();
        for _ in 0..m {
            self.0.reducer.square_in_place(&mut cur, &mut scratch);
        }
        FieldElem(cur)
    }

    /// The subfield GF(2^m), with canonical generator g^((2^N-1)/(2^m-1)).
    pub fn subfield(&self, m: usize) -> Result<Subfield> {
        self.check_sub_degree(m)?;
        let generator = if m == self.degree() {
            self.generator().clone()
        } else {
            let cofactor = self.group_order() / ((BigUint::one() << m) - 1u32);
            self.pow(self.generator(), &cofactor)
        };
        Ok(Subfield(Arc::new(SubInner {
            degree_bits: m,
            generator,
            modulus: self.0.modulus.clone(),
            order: OnceLock::new(),
        })))
    }

    fn check_owner(&self, sub: &Subfield) {
        debug_assert_eq!(sub.0.modulus, self.0.modulus, "subfield from another context");
    }

    /// Tr_{GF(2^N)/GF(2^m)}(e) = e + e^(2^m) + ... + e^(2^(m(N/m - 1))).
    pub fn trace_to(&self, e: &FieldElem, sub: &Subfield) -> FieldElem {
        self.check_owner(sub);
        let m = sub.degree_bits();
        let mut acc = e.0.clone();
        let mut cur = e.0.clone();
        let mut scratch = Vec::new();
        for _ in 1..self.degree() / m {
            for _ in 0..m {
                self.0.reducer.square_in_place(&mut cur, &mut scratch);
            }
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a ^= c;
            }
        }
        FieldElem(acc)
    }

    pub fn is_in_subfield(&self, e: &FieldElem, sub: &Subfield) -> bool {
        self.check_owner(sub);
        self.frobenius_unchecked(e, sub.degree_bits()) == *e
    }

    /// True iff `e` lies in `sub` and generates its multiplicative group.
    pub fn is_primitive_in_subfield(&self, e: &FieldElem, sub: &Subfield, budget: FactorBudget) -> Result<bool> {
        if e.is_zero() || !self.is_in_subfield(e, sub) {
            return Ok(false);
        }
        let m = sub.degree_bits();
        let order = (BigUint::one() << m) - 1u32;
        let f = sub.order_factorization(budget);
        if !f.is_complete() {
            return Err(Error::FactorizationTimeout {
                what: format!("2^{m} - 1"),
            });
        }
        if m == 1 {
            return Ok(e.is_one());
        }
        Ok(f.distinct_primes().all(|p| !self.pow(e, &(&order / p)).is_one()))
    }

    /// Smallest d >= 1 with e^(2^(m d)) = e, i.e. the degree of e over GF(2^m).
    pub fn degree_over(&self, e: &FieldElem, sub: &Subfield) -> usize {
        self.check_owner(sub);
        let m = sub.degree_bits();
        let mut cur = e.clone();
        for d in 1..=self.degree() / m {
            cur = self.frobenius_unchecked(&cur, m);
            if cur == *e {
                return d;
            }
        }
        unreachable!("Frobenius has order N/m")
    }

    /// GF(2)-basis {γ^0, ..., γ^(m-1)} of a subfield from a defining element γ.
    pub fn subfield_gf2_basis(&self, sub: &Subfield) -> Result<Vec<FieldElem>> {
        let m = sub.degree_bits();
        if m == 1 {
            return Ok(vec![self.one()]);
        }
        let gamma = sub.generator();
        let gf2 = self.subfield(1)?;
        if self.degree_over(gamma, &gf2) != m {
            return Err(Error::SpanFailure(format!(
                "canonical generator of GF(2^{m}) is not a defining element"
            )));
        }
        let mut out = Vec::with_capacity(m);
        let mut cur = self.one();
        for _ in 0..m {
            out.push(cur.clone());
            cur = self.mul(&cur, gamma);
        }
        Ok(out)
    }

    /// Evaluates a GF(2)-coefficient polynomial at `x`.
    pub fn eval_bitpoly(&self, p: &BitPoly, x: &FieldElem) -> FieldElem {
        let mut acc = self.zero();
        let Some(d) = p.degree() else { return acc };
        for i in (0..=d).rev() {
            acc = self.mul(&acc, x);
            if p.coeff(i) {
                acc.0[0] ^= 1;
            }
        }
        acc
    }

    /// Minimal polynomial over GF(2) of `e`, as the product of its conjugates.
    pub fn minimal_polynomial(&self, e: &FieldElem) -> Result<BitPoly> {
        let gf2 = self.subfield(1)?;
        let d = self.degree_over(e, &gf2);
        // coefficients in E, lowest first
        let mut coeffs = vec![self.one()];
        let mut conj = e.clone();
        for _ in 0..d {
            let mut next = vec![self.zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1].add_assign(c);
                next[i].add_assign(&self.mul(c, &conj));
            }
            coeffs = next;
            conj = self.square(&conj);
        }
        let mut exps = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_one() {
                exps.push(i);
            } else if !c.is_zero() {
                return Err(Error::InvalidInput("minimal polynomial not over GF(2)".into()));
            }
        }
        Ok(BitPoly::from_exponents(&exps))
    }

    /// Smallest-exponent root γ^j of an irreducible GF(2) polynomial inside
    /// the subfield `sub`, where γ is the subfield's canonical generator.
    pub fn root_in_subfield(&self, poly: &BitPoly, sub: &Subfield) -> Result<FieldElem> {
        let m = sub.degree_bits();
        let deg = poly.degree().unwrap_or(0);
        if deg == 0 || !m.is_multiple_of(deg) {
            return Err(Error::InvalidInput(format!("{poly} has no roots in GF(2^{m})")));
        }
        if m > 24 {
            return Err(Error::InvalidInput(format!(
                "root search limited to subfields of at most 2^24 elements (got 2^{m})"
            )));
        }
        // Work in GF(2)[y]/(minpoly of γ), where y stands for γ.
        let gamma = sub.generator();
        let mp = self.minimal_polynomial(gamma)?;
        let dm = mp.degree().unwrap();
        let mp_low = mp.words()[0] & !(1u64 << dm);
        let small_mul = |a: u64, b: u64| -> u64 {
            let mut r = 0u64;
            let mut a = a;
            for i in 0..dm {
                if (b >> i) & 1 == 1 {
                    r ^= a;
                }
                a <<= 1;
                if (a >> dm) & 1 == 1 {
                    a ^= (1 << dm) | mp_low;
                }
            }
            r
        };
        let eval = |z: u64| -> u64 {
            let mut acc = 0u64;
            for i in (0..=deg).rev() {
                acc = small_mul(acc, z);
                if poly.coeff(i) {
                    acc ^= 1;
                }
            }
            acc
        };
        let order = (1u64 << dm) - 1;
        let y = if dm == 1 { 1 } else { 2 };
        let mut z = 1u64;
        for j in 0..order.max(1) {
            if eval(z) == 0 {
                return Ok(self.pow_u64(gamma, j));
            }
            z = small_mul(z, y);
        }
        Err(Error::InvalidInput(format!("{poly} has no roots in GF(2^{m})")))
    }
}

struct SubInner {
    degree_bits: usize,
    generator: FieldElem,
    modulus: BitPoly,
    order: OnceLock<Factorization>,
}

/// Handle for GF(2^m) inside a [`FieldCtx`].
#[derive(Clone)]
pub struct Subfield(Arc<SubInner>);

impl fmt::Debug for Subfield {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subfield(GF(2^{}))", self.0.degree_bits)
    }
}

impl PartialEq for Subfield {
    fn eq(&self, other: &Self) -> bool {
        self.0.degree_bits == other.0.degree_bits && self.0.modulus == other.0.modulus
    }
}

impl Subfield {
    pub fn degree_bits(&self) -> usize {
        self.0.degree_bits
    }

    pub fn generator(&self) -> &FieldElem {
        &self.0.generator
    }

    pub fn order_factorization(&self, budget: FactorBudget) -> &Factorization {
        self.0
            .order
            .get_or_init(|| mersenne_factorization(self.0.degree_bits, budget))
    }
}
