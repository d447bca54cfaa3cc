//! Built-in plans: the two worked examples and the small toy instances.

use crate::constructions::{C1Params, C2Params, CodePlan};
use crate::error::Result;
use crate::repair::RepairSubspace;
use crate::field::{BitPoly, FieldCtx, FieldOptions};
use crate::rs::MessagePoly;

fn poly(s: &str) -> BitPoly {
    s.parse().expect("fixture polynomial")
}

/// Message polynomial with GF(2) coefficients given by exponents.
pub fn binary_message(ctx: &FieldCtx, k: usize, exps: &[usize]) -> MessagePoly {
    let mut c = vec![ctx.zero(); k];
    for &e in exps {
        c[e] = ctx.one();
    }
    MessagePoly::new(c)
}

/// (12,8) code over GF(2^2310), s = 2, primes 3, 5, 7, 11, three points per group.
///
/// The modulus x^2310+x^8+x^5+x^2+1 comes with a root asserted primitive;
/// 2^2310 - 1 is only partly factored, so the generator is accepted after
/// every available order test.
pub fn example1_params() -> C1Params {
    C1Params {
        base_bits: 1,
        s: Some(2),
        k: 8,
        d: Some(9),
        t: vec![3, 3, 3, 3],
        primes: Some(vec![3, 5, 7, 11]),
        point_exponents: Some(vec![vec![1, 2, 3]; 4]),
        group_polys: Some(vec![
            poly("x^3+x^2+1"),
            poly("x^5+x^4+x^3+x+1"),
            poly("x^7+x^6+x^5+x^2+1"),
            poly("x^11+x^9+x^7+x^4+x^3+x^2+1"),
        ]),
        modulus: Some(poly("x^2310+x^8+x^5+x^2+1")),
        field: FieldOptions {
            allow_unproven_generator: true,
            ..FieldOptions::default()
        },
    }
}

/// f(x) = x^3 + x^2 + 1.
pub fn example1_message(ctx: &FieldCtx) -> MessagePoly {
    binary_message(ctx, 8, &[0, 2, 3])
}

/// (17,9) code over GF(4^30) = GF(2^60), r = 8, primes 2, 3, 5.
pub fn example2_params() -> C2Params {
    C2Params {
        base_bits: 2,
        r: 8,
        primes: vec![2, 3, 5],
        point_exponents: Some(vec![
            vec![1, 2, 4, 7, 8, 11, 13],
            vec![1, 2, 4, 5, 8, 10],
            vec![1, 2, 4, 5],
        ]),
        group_polys: Some(vec![
            poly("x^4+x+1"),
            poly("x^6+x^4+x^3+x+1"),
            poly("x^10+x^6+x^5+x^3+x^2+x+1"),
        ]),
        modulus: None,
        field: FieldOptions::default(),
    }
}

/// f(x) = x^3 + x^2 + x + 1.
pub fn example2_message(ctx: &FieldCtx) -> MessagePoly {
    binary_message(ctx, 9, &[0, 1, 2, 3])
}

/// (6,2) Construction-1 code over GF(2^30): s = 2, primes 3 and 5, t = (3,3).
pub fn toy_c1_params() -> C1Params {
    let mut p = C1Params::new(1, 2, 2, vec![3, 3]);
    p.primes = Some(vec![3, 5]);
    p
}

/// (13,5) Construction-2 code over GF(4^6): r = 8, primes 2 and 3.
pub fn toy_c2_params() -> C2Params {
    C2Params::new(2, 8, vec![2, 3])
}

/// (17,9) Construction-1 parameters with s = 3 over q = 4, d = 11.
pub fn c1_17_9_params() -> C1Params {
    let mut p = C1Params::new(2, 3, 9, vec![6, 6, 5]);
    p.primes = Some(vec![7, 13, 19]);
    p
}

/// The published subspace for repairing g_1 in Example 1:
/// Span_K{g·g_1, g^2·g_1^2, (1+g)·g_1^2} over K = GF(2^385), with g = x.
pub fn example1_published_subspace(plan: &CodePlan) -> Result<RepairSubspace> {
    let ctx = &plan.ctx;
    let g = ctx.from_u64(2);
    let g1 = &plan.groups[0].points[0];
    let g1_sq = ctx.square(g1);
    let one_plus_g = ctx.add(&ctx.one(), &g);
    Ok(RepairSubspace {
        subfield: ctx.subfield(385)?,
        basis: vec![
            ctx.mul(&g, g1),
            ctx.mul(&ctx.square(&g), &g1_sq),
            ctx.mul(&one_plus_g, &g1_sq),
        ],
        beta: g,
        e: 1,
    })
}
