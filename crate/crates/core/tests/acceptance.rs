//! One PASS/FAIL line per acceptance criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pe_repair::bounds::{conventional_lower_bound, min_subpacketization, tradeoff_csv, tradeoff_table, BoundQuery};
use pe_repair::constructions::{build_plan_c1, build_plan_c2, subpacketization_of, validate_c1_params, CodePlan, Kind};
use pe_repair::field::linalg::reconstruct;
use pe_repair::field::{dual_basis, BasisOverSubfield, FieldCtx, FieldElem, FieldOptions};
use pe_repair::fixtures;
use pe_repair::repair::{
    cutset_bits, lemma1_subspace, repair, repair_c1_with_subspace, select_helpers_c1, verify_span, RepairSubspace,
};
use pe_repair::rs::{encode, naive_decode, MessagePoly};
use pe_repair::sim::{init_cluster_with_message, Strategy};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Check {
    let plan = build_plan_c2(&fixtures::example2_params()).map_err(err)?;
    ensure!(plan.ctx.degree() == 60 && plan.n == 17 && plan.k == 9, "unexpected plan {}", plan.summary());
    let cw = encode(&fixtures::example2_message(&plan.ctx), &plan.eval).map_err(err)?;
    let mut bits = Vec::new();
    for node in 0..plan.n {
        let mut t = repair(&plan, &cw, node, None).map_err(err)?;
        ensure!(t.verify(&cw.symbols[node]), "node {node} recovered a wrong symbol");
        let expect = [300, 220, 156][plan.group_of(node).map_err(err)?];
        ensure!(
            t.bits_transmitted == expect && t.cutset_bits == expect,
            "node {node}: bits {} cutset {} expected {expect}",
            t.bits_transmitted,
            t.cutset_bits
        );
        bits.push(t.bits_transmitted);
    }
    Ok(format!("17/17 repairs exact, bits by node {bits:?}"))
}

fn criterion_2() -> Check {
    let plan = build_plan_c1(&fixtures::example1_params()).map_err(err)?;
    let msg = fixtures::example1_message(&plan.ctx);
    let cw = encode(&msg, &plan.eval).map_err(err)?;
    let truth = msg.as_poly().eval(&plan.ctx, &plan.groups[0].points[0]);
    let mut t = repair(&plan, &cw, 0, Some(9)).map_err(err)?;
    ensure!(t.verify(&truth), "f(g_1) not recovered");
    ensure!(t.bits_transmitted == 10395, "PE repair sent {} bits", t.bits_transmitted);

    let published = fixtures::example1_published_subspace(&plan).map_err(err)?;
    let mut p = repair_c1_with_subspace(&plan, &cw, 0, 9, &published).map_err(err)?;
    ensure!(p.verify(&truth), "published subspace did not recover f(g_1)");
    ensure!(p.bits_transmitted == 10395, "published subspace sent {} bits", p.bits_transmitted);

    let mut st = init_cluster_with_message(plan, 0, msg).map_err(err)?;
    st.fail_node(0).map_err(err)?;
    let naive = st.run_repair(Strategy::Naive, None).map_err(err)?;
    ensure!(naive.verified, "naive repair failed");
    ensure!(naive.log.total_bits == 18480, "naive repair sent {} bits", naive.log.total_bits);
    Ok("f(g_1) recovered with 10395 bits (both subspaces), naive 18480 bits".into())
}

fn criterion_3() -> Check {
    let uniform = |k, t| BoundQuery::uniform(k, t).map(|q| min_subpacketization(&q)).map_err(err);
    for (k, want) in [(8, 510510u64), (9, 9699690), (10, 223092870)] {
        let got = uniform(k, 1)?;
        ensure!(got == BigUint::from(want), "k={k}: {got} != {want}");
    }
    for k in 1..=20 {
        let conv = conventional_lower_bound(k).map_err(err)?;
        ensure!(uniform(k, 1)? == conv, "k={k}: t=1 bound differs from the conventional one");
    }
    Ok("510510, 9699690, 223092870; t=1 matches the conventional bound for k <= 20".into())
}

fn criterion_4() -> Check {
    let rows = tradeoff_table(14, 10).map_err(err)?;
    ensure!(rows.len() == 4, "{} rows", rows.len());
    ensure!(
        rows[0].l_min == BigUint::from(223092870u32) && rows[0].beta_bar_min == Ratio::new(13, 4),
        "t=1 row {:?}",
        rows[0]
    );
    ensure!(
        rows[3].l_min == BigUint::from(2u32) && rows[3].beta_bar_min == Ratio::from_integer(10),
        "t=4 row {:?}",
        rows[3]
    );
    let csv = tradeoff_csv(&rows);
    ensure!(csv.lines().nth(1) == Some("1,223092870,13,13,4"), "csv row 1");
    ensure!(csv.lines().nth(4) == Some("4,2,10,10,1"), "csv row 4");
    Ok(format!("{} data rows, endpoints exact", csv.lines().count() - 1))
}

fn criterion_5() -> Check {
    let ex2 = build_plan_c2(&fixtures::example2_params()).map_err(err)?;
    let l2 = subpacketization_of(&ex2);
    ensure!(l2 == 30, "Example 2 L = {l2}");
    ensure!(BigUint::from(l2) < conventional_lower_bound(9).map_err(err)?, "30 is not below 9699690");
    let l1 = validate_c1_params(&fixtures::example1_params()).map_err(err)?.l_symbols;
    ensure!(l1 == 2310, "Example 1 L = {l1}");
    ensure!(BigUint::from(l1) < conventional_lower_bound(8).map_err(err)?, "2310 is not below 510510");
    let v = validate_c1_params(&fixtures::c1_17_9_params()).map_err(err)?;
    ensure!(v.l_symbols == 5187, "variant L = {}", v.l_symbols);
    ensure!(v.repair_bits == 38038, "variant bandwidth = {}", v.repair_bits);
    ensure!(
        cutset_bits(v.d, v.k, v.l_symbols, 2).map_err(err)? == 38038,
        "variant bandwidth differs from the cut-set bound"
    );
    Ok("2310 < 510510, 30 < 9699690, (17,9) variant L=5187 bits=38038".into())
}

fn oracle_rounds(plan: &CodePlan, seed: u64, rounds: usize) -> Result<usize, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut repairs = 0;
    for round in 0..rounds {
        let cw = encode(&MessagePoly::random(&plan.ctx, plan.k, &mut rng), &plan.eval).map_err(err)?;
        for failed in 0..plan.n {
            let t = repair(plan, &cw, failed, None).map_err(err)?;
            let picks: Vec<_> = (0..plan.n)
                .filter(|&i| i != failed)
                .take(plan.k)
                .map(|i| (i, cw.symbols[i].clone()))
                .collect();
            let msg = naive_decode(&picks, &plan.eval).map_err(err)?;
            let oracle = msg.as_poly().eval(&plan.ctx, &plan.eval.points()[failed]);
            ensure!(t.recovered == oracle, "round {round} node {failed}: differs from the oracle");
            ensure!(
                t.bits_transmitted == t.cutset_bits,
                "round {round} node {failed}: {} bits vs cut-set {}",
                t.bits_transmitted,
                t.cutset_bits
            );
            repairs += 1;
        }
    }
    Ok(repairs)
}

fn criterion_6() -> Check {
    let c1 = build_plan_c1(&fixtures::toy_c1_params()).map_err(err)?;
    let c2 = build_plan_c2(&fixtures::toy_c2_params()).map_err(err)?;
    let a = oracle_rounds(&c1, 1, 100)?;
    let b = oracle_rounds(&c2, 2, 100)?;
    Ok(format!("{a} Construction-1 and {b} Construction-2 repairs match the oracle at the cut-set bound"))
}

fn field_axioms(ctx: &FieldCtx, triples: impl Iterator<Item = (FieldElem, FieldElem, FieldElem)>) -> Result<usize, String> {
    let mut n = 0;
    for (a, b, c) in triples {
        ensure!(ctx.add(&a, &b) == ctx.add(&b, &a), "a+b != b+a");
        ensure!(ctx.mul(&a, &b) == ctx.mul(&b, &a), "ab != ba");
        ensure!(ctx.mul(&ctx.mul(&a, &b), &c) == ctx.mul(&a, &ctx.mul(&b, &c)), "(ab)c != a(bc)");
        ensure!(
            ctx.mul(&a, &ctx.add(&b, &c)) == ctx.add(&ctx.mul(&a, &b), &ctx.mul(&a, &c)),
            "a(b+c) != ab+ac"
        );
        ensure!(ctx.add(&a, &a).is_zero(), "a+a != 0");
        ensure!(ctx.mul(&a, &ctx.one()) == a, "a*1 != a");
        ensure!(ctx.square(&a) == ctx.mul(&a, &a), "square mismatch");
        if !a.is_zero() {
            let inv = ctx.inv(&a).map_err(err)?;
            ensure!(ctx.mul(&a, &inv).is_one(), "a*a^-1 != 1");
        }
        n += 1;
    }
    Ok(n)
}

/// Reconstructs `samples` random elements from their traces against `basis`.
fn dual_identity(ctx: &FieldCtx, b: &BasisOverSubfield, rng: &mut ChaCha20Rng, samples: usize) -> Result<(), String> {
    let dual = dual_basis(ctx, b).map_err(err)?;
    for _ in 0..samples {
        let x = ctx.random(rng);
        let traces: Vec<_> = b
            .vectors()
            .iter()
            .map(|bi| ctx.trace_to(&ctx.mul(bi, &x), b.subfield()))
            .collect();
        ensure!(reconstruct(ctx, &dual, &traces) == x, "dual-basis reconstruction failed");
    }
    Ok(())
}

/// The set {e·α^w} the replacement node reconstructs from.
fn repair_basis(ctx: &FieldCtx, sub: &RepairSubspace, alpha: &FieldElem, shifts: usize) -> Result<BasisOverSubfield, String> {
    let ae = ctx.pow_u64(alpha, sub.e);
    let mut shift = ctx.one();
    let mut v = Vec::new();
    for _ in 0..shifts {
        v.extend(sub.basis.iter().map(|b| ctx.mul(b, &shift)));
        shift = ctx.mul(&shift, &ae);
    }
    BasisOverSubfield::new(ctx, sub.subfield.clone(), v).map_err(err)
}

/// Per node: the subspace its repair uses and the number of shifts.
fn node_subspace(plan: &CodePlan, node: usize) -> Result<(RepairSubspace, usize), String> {
    let (gi, _) = plan.locate(node).map_err(err)?;
    match plan.kind {
        Kind::One { s, d } => {
            let (_, r) = select_helpers_c1(plan, node, d).map_err(err)?;
            Ok((lemma1_subspace(plan, node, &r, 1).map_err(err)?, s))
        }
        Kind::Two { .. } => {
            let g = &plan.groups[gi];
            let sub = RepairSubspace {
                subfield: g.complement_field.clone(),
                basis: vec![plan.ctx.one()],
                beta: plan.ctx.one(),
                e: 1,
            };
            Ok((sub, g.prime as usize))
        }
    }
}

fn criterion_7() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut axioms = 0;
    for n in [3usize, 4] {
        let ctx = FieldCtx::new(n, None, FieldOptions::default()).map_err(err)?;
        let all: Vec<_> = ctx.elements().collect();
        let mut triples = Vec::new();
        for a in &all {
            for b in &all {
                for c in &all {
                    triples.push((a.clone(), b.clone(), c.clone()));
                }
            }
        }
        axioms += field_axioms(&ctx, triples.into_iter())?;
    }
    for n in [60usize, 130] {
        let ctx = FieldCtx::new(n, None, FieldOptions::default()).map_err(err)?;
        let triples: Vec<_> = (0..10_000)
            .map(|_| (ctx.random(&mut rng), ctx.random(&mut rng), ctx.random(&mut rng)))
            .collect();
        axioms += field_axioms(&ctx, triples.into_iter())?;
    }

    let plans = [
        build_plan_c1(&fixtures::toy_c1_params()).map_err(err)?,
        build_plan_c2(&fixtures::toy_c2_params()).map_err(err)?,
        build_plan_c2(&fixtures::example2_params()).map_err(err)?,
    ];
    let mut spans = 0;
    let mut bases = 0;
    for plan in &plans {
        for (gi, g) in plan.groups.iter().enumerate() {
            for j in 0..g.t {
                let node = plan.node_index(gi, j);
                let alpha = &plan.eval.points()[node];
                let (sub, shifts) = node_subspace(plan, node)?;
                ensure!(
                    verify_span(&plan.ctx, &sub, alpha, shifts).map_err(err)?,
                    "span condition fails for node {node} of {}",
                    plan.summary()
                );
                spans += 1;
                if j == 0 {
                    let b = repair_basis(&plan.ctx, &sub, alpha, shifts)?;
                    dual_identity(&plan.ctx, &b, &mut rng, 1000)?;
                    bases += 1;
                }
            }
        }
    }

    // 2310-bit field: spot checks on the bases used to repair g_1
    let ex1 = build_plan_c1(&fixtures::example1_params()).map_err(err)?;
    let g1 = &ex1.groups[0].points[0];
    let (own, _) = node_subspace(&ex1, 0)?;
    let published = fixtures::example1_published_subspace(&ex1).map_err(err)?;
    for sub in [&own, &published] {
        ensure!(verify_span(&ex1.ctx, sub, g1, 2).map_err(err)?, "Example 1 span condition fails");
        spans += 1;
        dual_identity(&ex1.ctx, &repair_basis(&ex1.ctx, sub, g1, 2)?, &mut rng, 1000)?;
        bases += 1;
    }
    Ok(format!("{axioms} axiom checks, {bases} bases x 1000 reconstructions, {spans} span checks"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("Example 2 reproduction", criterion_1),
        ("Example 1 reproduction", criterion_2),
        ("bound values", criterion_3),
        ("trade-off CSV (14,10)", criterion_4),
        ("strict improvement and (17,9) variant", criterion_5),
        ("oracle equivalence on toy plans", criterion_6),
        ("algebra property suite", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
