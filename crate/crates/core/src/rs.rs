//! Reed-Solomon encoding over explicit evaluation sets, GRS dual multipliers,
//! parity checks and Lagrange decoding.

use std::fmt::Write as _;
use std::path::Path;

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

/// Univariate polynomial over the symbol field, coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn one(ctx: &FieldCtx) -> Self {
        Poly { coeffs: vec![ctx.one()] }
    }

    /// Degree, ignoring zero leading coefficients; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FieldElem) -> FieldElem {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.mul(&acc, x);
            acc.add_assign(c);
        }
        acc
    }

    /// self · (x + root); characteristic 2 makes x - root = x + root.
    pub fn mul_linear(&self, ctx: &FieldCtx, root: &FieldElem) -> Poly {
        let mut out = vec![ctx.zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1].add_assign(c);
            out[i].add_assign(&ctx.mul(c, root));
        }
        Poly { coeffs: out }
    }

    /// self · x^w.
    pub fn shift(&self, ctx: &FieldCtx, w: usize) -> Poly {
        let mut coeffs = vec![ctx.zero(); w];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn monomial(ctx: &FieldCtx, w: usize) -> Poly {
        Poly::one(ctx).shift(ctx, w)
    }
}

/// Ordered, pairwise distinct evaluation points.
#[derive(Debug, Clone)]
pub struct EvaluationSet {
    ctx: FieldCtx,
    points: Vec<FieldElem>,
}

impl EvaluationSet {
    pub fn new(ctx: FieldCtx, points: Vec<FieldElem>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("evaluation set is empty".into()));
        }
        let mut seen = std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            if seen.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicateIndex(i));
            }
        }
        Ok(EvaluationSet { ctx, points })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn points(&self) -> &[FieldElem] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// SHA-256 over the modulus and the hex-serialized points.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.ctx.modulus_hex().as_bytes());
        for p in &self.points {
            h.update(b"\n");
            h.update(self.ctx.to_hex(p).as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// A message polynomial of degree below k, stored as exactly k coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessagePoly {
    pub coefficients: Vec<FieldElem>,
}

impl MessagePoly {
    pub fn new(coefficients: Vec<FieldElem>) -> Self {
        MessagePoly { coefficients }
    }

    pub fn k(&self) -> usize {
        self.coefficients.len()
    }

    pub fn random<R: RngCore + ?Sized>(ctx: &FieldCtx, k: usize, rng: &mut R) -> Self {
        MessagePoly {
            coefficients: (0..k).map(|_| ctx.random(rng)).collect(),
        }
    }

    pub fn as_poly(&self) -> Poly {
        Poly {
            coeffs: self.coefficients.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<FieldElem>,
    pub plan_digest: String,
}

pub fn encode(msg: &MessagePoly, a: &EvaluationSet) -> Result<Codeword> {
    if msg.k() > a.len() {
        return Err(Error::DimensionExceedsLength { k: msg.k(), n: a.len() });
    }
    let f = msg.as_poly();
    Ok(Codeword {
        symbols: a.points.iter().map(|x| f.eval(&a.ctx, x)).collect(),
        plan_digest: a.digest(),
    })
}

/// Column multipliers of the dual GRS code: v_i = ∏_{j≠i} (α_i - α_j)^{-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualMultipliers {
    pub v: Vec<FieldElem>,
}

pub fn dual_multipliers(a: &EvaluationSet) -> DualMultipliers {
    let ctx = &a.ctx;
    let v = a
        .points
        .iter()
        .enumerate()
        .map(|(i, ai)| {
            let mut prod = ctx.one();
            for (j, aj) in a.points.iter().enumerate() {
                if i != j {
                    prod = ctx.mul(&prod, &ai.add(aj));
                }
            }
            ctx.inv(&prod).expect("evaluation points are distinct")
        })
        .collect();
    DualMultipliers { v }
}

/// Monic polynomial vanishing on `points`.
pub fn annihilator(ctx: &FieldCtx, points: &[FieldElem]) -> Poly {
    points.iter().fold(Poly::one(ctx), |p, r| p.mul_linear(ctx, r))
}

/// Σ v_i·g(α_i)·c_i, which vanishes on every codeword when deg g ≤ n - k - 1.
pub fn parity_check(
    c: &Codeword,
    g: &Poly,
    v: &DualMultipliers,
    a: &EvaluationSet,
    k: usize,
) -> Result<FieldElem> {
    let n = a.len();
    if k > n {
        return Err(Error::DimensionExceedsLength { k, n });
    }
    if let Some(d) = g.degree() {
        if k == n || d > n - k - 1 {
            return Err(Error::DegreeTooHigh {
                degree: d,
                max: (n - k).saturating_sub(1),
            });
        }
    }
    let ctx = &a.ctx;
    let mut acc = ctx.zero();
    for ((x, vi), ci) in a.points.iter().zip(&v.v).zip(&c.symbols) {
        let t = ctx.mul(&ctx.mul(vi, &g.eval(ctx, x)), ci);
        acc.add_assign(&t);
    }
    Ok(acc)
}

/// Lagrange interpolation through k symbols at distinct coordinates.
pub fn naive_decode(symbols_at: &[(usize, FieldElem)], a: &EvaluationSet) -> Result<MessagePoly> {
    let ctx = &a.ctx;
    let k = symbols_at.len();
    let mut seen = std::collections::HashSet::new();
    for &(i, _) in symbols_at {
        if i >= a.len() {
            return Err(Error::NodeOutOfRange { index: i, n: a.len() });
        }
        if !seen.insert(i) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    let xs: Vec<&FieldElem> = symbols_at.iter().map(|(i, _)| &a.points[*i]).collect();
    let mut out = vec![ctx.zero(); k];
    for (i, (_, yi)) in symbols_at.iter().enumerate() {
        let mut basis = Poly::one(ctx);
        let mut denom = ctx.one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = basis.mul_linear(ctx, xj);
                denom = ctx.mul(&denom, &xs[i].add(xj));
            }
        }
        let scale = ctx.mul(yi, &ctx.inv(&denom)?);
        for (o, c) in out.iter_mut().zip(&basis.coeffs) {
            o.add_assign(&ctx.mul(c, &scale));
        }
    }
    Ok(MessagePoly::new(out))
}

/// Text form: `plan_digest=`, `n=`, `degree_bits=` header lines, then one hex symbol per line.
pub fn codeword_to_string(ctx: &FieldCtx, c: &Codeword) -> String {
    let mut s = String::new();
    writeln!(s, "plan_digest={}", c.plan_digest).unwrap();
    writeln!(s, "n={}", c.symbols.len()).unwrap();
    writeln!(s, "degree_bits={}", ctx.degree()).unwrap();
    for sym in &c.symbols {
        writeln!(s, "{}", ctx.to_hex(sym)).unwrap();
    }
    s
}

pub fn codeword_from_str(ctx: &FieldCtx, text: &str) -> Result<Codeword> {
    let corrupt = |m: &str| Error::CorruptFile(m.to_string());
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| corrupt("truncated header"))?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| corrupt(&format!("expected `{key}=`")))
    };
    let plan_digest = header("plan_digest")?;
    let n: usize = header("n")?.parse().map_err(|_| corrupt("bad n"))?;
    let bits: usize = header("degree_bits")?.parse().map_err(|_| corrupt("bad degree_bits"))?;
    if bits != ctx.degree() {
        return Err(Error::PlanMismatch);
    }
    let symbols = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| ctx.from_hex(l).map_err(|e| corrupt(&e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if symbols.len() != n {
        return Err(corrupt(&format!("expected {n} symbols, found {}", symbols.len())));
    }
    Ok(Codeword { symbols, plan_digest })
}

pub fn write_codeword(path: &Path, ctx: &FieldCtx, c: &Codeword) -> Result<()> {
    crate::io::write_atomic(path, codeword_to_string(ctx, c).as_bytes())
}

pub fn read_codeword(path: &Path, ctx: &FieldCtx) -> Result<Codeword> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::CorruptFile(format!("{}: {e}", path.display())))?;
    codeword_from_str(ctx, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldOptions;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn gf16() -> FieldCtx {
        FieldCtx::new(4, Some("x^4+x+1".parse().unwrap()), FieldOptions::default()).unwrap()
    }

    fn points(ctx: &FieldCtx, n: usize) -> EvaluationSet {
        let g = ctx.generator();
        EvaluationSet::new(ctx.clone(), (1..=n).map(|i| ctx.pow_u64(g, i as u64)).collect()).unwrap()
    }

    #[test]
    fn constant_message_encodes_to_constant_word() {
        let ctx = gf16();
        let a = points(&ctx, 5);
        let c = ctx.from_u64(9);
        let cw = encode(&MessagePoly::new(vec![c.clone()]), &a).unwrap();
        assert!(cw.symbols.iter().all(|s| *s == c));
    }

    #[test]
    fn encode_matches_naive_evaluation() {
        let ctx = gf16();
        let a = points(&ctx, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let msg = MessagePoly::random(&ctx, 2, &mut rng);
        let cw = encode(&msg, &a).unwrap();
        for (x, s) in a.points().iter().zip(&cw.symbols) {
            let mut expect = ctx.zero();
            for (i, c) in msg.coefficients.iter().enumerate() {
                expect.add_assign(&ctx.mul(c, &ctx.pow_u64(x, i as u64)));
            }
            assert_eq!(*s, expect);
        }
        let too_long = MessagePoly::random(&ctx, 6, &mut rng);
        assert_eq!(encode(&too_long, &a).unwrap_err().code(), "DIMENSION_EXCEEDS_LENGTH");
    }

    #[test]
    fn duplicate_points_rejected() {
        let ctx = gf16();
        let p = ctx.from_u64(3);
        assert_eq!(
            EvaluationSet::new(ctx.clone(), vec![p.clone(), p]).unwrap_err().code(),
            "DUPLICATE_INDEX"
        );
    }

    #[test]
    fn dual_multipliers_small_cases() {
        let ctx = gf16();
        let a1 = points(&ctx, 1);
        assert!(dual_multipliers(&a1).v[0].is_one());
        let a2 = points(&ctx, 2);
        let v = dual_multipliers(&a2).v;
        let diff = a2.points()[0].add(&a2.points()[1]);
        assert_eq!(v[0], ctx.inv(&diff).unwrap());
        assert_eq!(v[1], ctx.inv(&diff).unwrap());
    }

    #[test]
    fn grs_duality_on_monomials() {
        let ctx = gf16();
        let a = points(&ctx, 5);
        let v = dual_multipliers(&a);
        assert!(v.v.iter().all(|x| !x.is_zero()));
        for k in 1..5 {
            for fd in 0..k {
                for gd in 0..5 - k {
                    let mut s = ctx.zero();
                    for (x, vi) in a.points().iter().zip(&v.v) {
                        s.add_assign(&ctx.mul(vi, &ctx.pow_u64(x, (fd + gd) as u64)));
                    }
                    assert!(s.is_zero(), "k={k} f={fd} g={gd}");
                }
            }
        }
    }

    #[test]
    fn annihilator_vanishes_exactly_on_roots() {
        let ctx = FieldCtx::new(6, None, FieldOptions::default()).unwrap();
        assert_eq!(annihilator(&ctx, &[]), Poly::one(&ctx));
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut roots = Vec::new();
        while roots.len() < 4 {
            let r = ctx.random(&mut rng);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        let h = annihilator(&ctx, &roots);
        assert_eq!(h.degree(), Some(4));
        assert!(h.coeffs[4].is_one());
        for r in &roots {
            assert!(h.eval(&ctx, r).is_zero());
        }
        let mut checked = 0;
        for x in ctx.elements() {
            if !roots.contains(&x) && checked < 20 {
                assert!(!h.eval(&ctx, &x).is_zero());
                checked += 1;
            }
        }
        // two-root case: x^2 + (a+b)x + ab
        let (a, b) = (&roots[0], &roots[1]);
        let h2 = annihilator(&ctx, &[a.clone(), b.clone()]);
        assert_eq!(h2.coeffs, vec![ctx.mul(a, b), a.add(b), ctx.one()]);
    }

    #[test]
    fn parity_checks() {
        let ctx = gf16();
        let a = points(&ctx, 6);
        let v = dual_multipliers(&a);
        let k = 3;
        let zero = Codeword {
            symbols: vec![ctx.zero(); 6],
            plan_digest: a.digest(),
        };
        let g = Poly::monomial(&ctx, 2);
        assert!(parity_check(&zero, &g, &v, &a, k).unwrap().is_zero());
        assert_eq!(
            parity_check(&zero, &Poly::monomial(&ctx, 3), &v, &a, k).unwrap_err().code(),
            "DEGREE_TOO_HIGH"
        );
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut cw = encode(&MessagePoly::random(&ctx, k, &mut rng), &a).unwrap();
            for w in 0..3 {
                assert!(parity_check(&cw, &Poly::monomial(&ctx, w), &v, &a, k).unwrap().is_zero());
            }
            cw.symbols[2].add_assign(&ctx.one());
            let detected = (0..3).any(|w| !parity_check(&cw, &Poly::monomial(&ctx, w), &v, &a, k).unwrap().is_zero());
            assert!(detected);
        }
    }

    #[test]
    fn decode_from_every_subset() {
        let ctx = FieldCtx::new(30, None, FieldOptions::default()).unwrap();
        let a = points(&ctx, 6);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let msg = MessagePoly::random(&ctx, 2, &mut rng);
        let cw = encode(&msg, &a).unwrap();
        let mut subsets = 0;
        for i in 0..6 {
            for j in i + 1..6 {
                let got = naive_decode(&[(i, cw.symbols[i].clone()), (j, cw.symbols[j].clone())], &a).unwrap();
                assert_eq!(got, msg);
                subsets += 1;
            }
        }
        assert_eq!(subsets, 15);
        let one = naive_decode(&[(3, cw.symbols[3].clone())], &a).unwrap();
        assert_eq!(one.coefficients, vec![cw.symbols[3].clone()]);
        assert_eq!(
            naive_decode(&[(1, ctx.one()), (1, ctx.one())], &a).unwrap_err().code(),
            "DUPLICATE_INDEX"
        );
    }

    #[test]
    fn codeword_text_round_trip() {
        let ctx = gf16();
        let a = points(&ctx, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let cw = encode(&MessagePoly::random(&ctx, 3, &mut rng), &a).unwrap();
        let text = codeword_to_string(&ctx, &cw);
        assert!(text.starts_with("plan_digest="));
        assert_eq!(codeword_from_str(&ctx, &text).unwrap(), cw);
        let bad = text.replace("n=5", "n=4");
        assert_eq!(codeword_from_str(&ctx, &bad).unwrap_err().code(), "CORRUPT_FILE");
    }

    proptest! {
        #[test]
        fn prop_encode_is_linear(seed in any::<u64>()) {
            let ctx = FieldCtx::new(30, None, FieldOptions::default()).unwrap();
            let a = points(&ctx, 8);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let f = MessagePoly::random(&ctx, 4, &mut rng);
            let g = MessagePoly::random(&ctx, 4, &mut rng);
            let sum = MessagePoly::new(f.coefficients.iter().zip(&g.coefficients).map(|(x, y)| x.add(y)).collect());
            let (cf, cg, cs) = (encode(&f, &a).unwrap(), encode(&g, &a).unwrap(), encode(&sum, &a).unwrap());
            for i in 0..8 {
                prop_assert_eq!(cs.symbols[i].clone(), cf.symbols[i].add(&cg.symbols[i]));
            }
        }

        #[test]
        fn prop_grs_duality_random_parity(seed in any::<u64>()) {
            let ctx = FieldCtx::new(30, None, FieldOptions::default()).unwrap();
            let a = points(&ctx, 8);
            let v = dual_multipliers(&a);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let cw = encode(&MessagePoly::random(&ctx, 5, &mut rng), &a).unwrap();
            let g = Poly { coeffs: (0..3).map(|_| ctx.random(&mut rng)).collect() };
            prop_assert!(parity_check(&cw, &g, &v, &a, 5).unwrap().is_zero());
        }
    }
}
