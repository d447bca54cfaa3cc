//! Single-node repair by trace queries: β-twisted power subspaces for
//! Construction 1, the in-group annihilator scheme for Construction 2,
//! and dual-basis reconstruction shared by both.

use num_bigint::BigUint;
use serde::Serialize;

use crate::constructions::{CodePlan, Kind};
use crate::error::{Error, Result};
use crate::field::linalg::{dual_basis, gf2_rank, reconstruct, BasisOverSubfield};
use crate::field::{FieldCtx, FieldElem, Subfield};
use crate::rs::{annihilator, dual_multipliers, Codeword};

/// Fallback generators tried when the context generator fails the span check.
const BETA_SEARCH_LIMIT: u64 = 32;

/// ⌈d·L/(d-k+1)⌉·base_bits, the cut-set bound in bits.
pub fn cutset_bits(d: usize, k: usize, l_symbols: u64, base_bits: usize) -> Result<u64> {
    if d < k || k == 0 {
        return Err(Error::TooFewHelpers { d, k });
    }
    let num = d as u64 * l_symbols;
    let den = (d - k + 1) as u64;
    Ok(num.div_ceil(den) * base_bits as u64)
}

/// A subspace S of E over `subfield` with S + αS + … + α^{s-1}S = E.
#[derive(Debug, Clone)]
pub struct RepairSubspace {
    pub subfield: Subfield,
    pub basis: Vec<FieldElem>,
    pub beta: FieldElem,
    pub e: u64,
}

/// True iff the subfield spans of α^{e·w}·S for w < s together cover E,
/// checked as GF(2) rank N.
pub fn verify_span(ctx: &FieldCtx, sub: &RepairSubspace, alpha: &FieldElem, s: usize) -> Result<bool> {
    let sigma = ctx.subfield_gf2_basis(&sub.subfield)?;
    let ae = ctx.pow_u64(alpha, sub.e);
    let mut shift = ctx.one();
    let mut vectors = Vec::with_capacity(s * sub.basis.len() * sigma.len());
    for _ in 0..s {
        for b in &sub.basis {
            let sb = ctx.mul(&shift, b);
            for x in &sigma {
                vectors.push(ctx.mul(&sb, x));
            }
        }
        shift = ctx.mul(&shift, &ae);
    }
    Ok(gf2_rank(&vectors) == ctx.degree())
}

fn c1_params(plan: &CodePlan) -> Result<(usize, usize)> {
    match plan.kind {
        Kind::One { s, d } => Ok((s, d)),
        Kind::Two { .. } => Err(Error::PlanMismatch),
    }
}

/// {β^μ·α^{μ+ςs}} together with (1+β+…+β^{s-1})·α^{p-1}, where α is the given power of the point.
fn lemma1_basis(ctx: &FieldCtx, beta: &FieldElem, alpha_e: &FieldElem, p: u64, s: usize) -> Vec<FieldElem> {
    let p = p as usize;
    let mut out = Vec::with_capacity(p);
    let mut beta_mu = ctx.one();
    for mu in 0..s {
        for varsigma in 0..(p - 1) / s {
            let a = ctx.pow_u64(alpha_e, (mu + varsigma * s) as u64);
            out.push(ctx.mul(&beta_mu, &a));
        }
        beta_mu = ctx.mul(&beta_mu, beta);
    }
    let mut beta_sum = ctx.zero();
    let mut bt = ctx.one();
    for _ in 0..s {
        beta_sum.add_assign(&bt);
        bt = ctx.mul(&bt, beta);
    }
    out.push(ctx.mul(&beta_sum, &ctx.pow_u64(alpha_e, (p - 1) as u64)));
    out
}

/// Repair subspace for the node `node` over GF(q^ū), ū = ∏_{j ∈ helper_groups} p_j.
///
/// The twisted power basis (p_i vectors over GF(q^{u_i})) is built from the node's
/// own point α and lifted to GF(q^ū) by multiplying with {γ^j : j < u_i/ū},
/// γ the canonical generator of GF(q^{u_i}). The span condition is checked
/// for α before returning.
pub fn lemma1_subspace(plan: &CodePlan, node: usize, helper_groups: &[usize], e: u64) -> Result<RepairSubspace> {
    let (s, _) = c1_params(plan)?;
    let ctx = &plan.ctx;
    let (group, j) = plan.locate(node)?;
    let g = &plan.groups[group];
    let q_p = BigUint::from(1u32) << (plan.base_bits * g.prime as usize);
    let order = &q_p - 1u32;
    let norm_order = &order / ((BigUint::from(1u32) << plan.base_bits) - 1u32);
    let eb = BigUint::from(e);
    if e == 0 || eb >= order || (&eb % &norm_order) == BigUint::from(0u32) {
        return Err(Error::BadExponent { e, prime: g.prime });
    }
    if helper_groups.is_empty() || helper_groups.iter().any(|&r| r == group || r >= plan.groups.len()) {
        return Err(Error::InvalidInput("helper groups must be other groups of the plan".into()));
    }
    let u_bar: u64 = helper_groups.iter().map(|&r| plan.groups[r].prime).product();
    let u_i = plan.u_i(group);
    if !u_i.is_multiple_of(u_bar) {
        return Err(Error::InvalidInput("helper groups repeat".into()));
    }
    let subfield = ctx.subfield(plan.base_bits * u_bar as usize)?;
    let gamma = g.complement_field.generator();
    let lift: Vec<FieldElem> = (0..u_i / u_bar).map(|j| ctx.pow_u64(gamma, j)).collect();
    let alpha = &g.points[j];
    let alpha_e = ctx.pow_u64(alpha, e);

    let generator = ctx.generator();
    let mut beta = generator.clone();
    for attempt in 0..BETA_SEARCH_LIMIT {
        if attempt > 0 {
            beta = ctx.pow_u64(generator, attempt + 1);
        }
        let sub = lift_basis(ctx, &subfield, lemma1_basis(ctx, &beta, &alpha_e, g.prime, s), &lift, &beta, e);
        if verify_span(ctx, &sub, alpha, s)? {
            return Ok(sub);
        }
    }
    Err(Error::SpanFailure(format!(
        "node {node}: no β among the first {BETA_SEARCH_LIMIT} generator powers"
    )))
}

fn lift_basis(
    ctx: &FieldCtx,
    subfield: &Subfield,
    core: Vec<FieldElem>,
    lift: &[FieldElem],
    beta: &FieldElem,
    e: u64,
) -> RepairSubspace {
    RepairSubspace {
        subfield: subfield.clone(),
        basis: core.iter().flat_map(|b| lift.iter().map(|l| ctx.mul(b, l))).collect(),
        beta: beta.clone(),
        e,
    }
}

/// Helper nodes for a failure in `failed`'s group: the minimal prefix R of the
/// other groups (user order) holding at least d nodes, visited round-robin.
/// Returns (helpers, R).
pub fn select_helpers_c1(plan: &CodePlan, failed: usize, d: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let gi = plan.group_of(failed)?;
    let max = plan.n - plan.groups[gi].t;
    if d < plan.k || d > max {
        return Err(Error::LocalityOutOfRange { d, min: plan.k, max });
    }
    let mut r = Vec::new();
    let mut total = 0;
    for (i, g) in plan.groups.iter().enumerate() {
        if i == gi {
            continue;
        }
        if total >= d {
            break;
        }
        r.push(i);
        total += g.t;
    }
    let mut next = vec![0usize; r.len()];
    let mut helpers = Vec::with_capacity(d);
    let mut z = 0;
    while helpers.len() < d {
        let slot = z % r.len();
        let grp = r[slot];
        if next[slot] < plan.groups[grp].t {
            helpers.push(plan.node_index(grp, next[slot]));
            next[slot] += 1;
        }
        z += 1;
    }
    Ok((helpers, r))
}

/// One trace query sent to a helper.
#[derive(Debug, Clone)]
pub struct RepairQuery {
    pub helper: usize,
    pub multiplier: FieldElem,
    pub response_bits: usize,
}

/// Full record of one repair.
#[derive(Debug, Clone)]
pub struct RepairTranscript {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub queries: Vec<RepairQuery>,
    pub responses: Vec<FieldElem>,
    pub response_subfield: Subfield,
    pub bits_transmitted: u64,
    pub cutset_bits: u64,
    pub recovered: FieldElem,
    pub verified: Option<bool>,
}

#[derive(Debug, Serialize)]
struct TranscriptJson<'a> {
    failed: usize,
    helpers: &'a [usize],
    per_helper_bits: Vec<u64>,
    response_subfield_bits: usize,
    bits_transmitted: u64,
    cutset_bits: u64,
    recovered: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

impl RepairTranscript {
    /// Bits sent by each helper, in helper order.
    pub fn per_helper_bits(&self) -> Vec<u64> {
        self.helpers
            .iter()
            .map(|h| {
                self.queries
                    .iter()
                    .filter(|q| q.helper == *h)
                    .map(|q| q.response_bits as u64)
                    .sum()
            })
            .collect()
    }

    /// Records whether the recovered symbol equals `truth`.
    pub fn verify(&mut self, truth: &FieldElem) -> bool {
        let ok = self.recovered == *truth;
        self.verified = Some(ok);
        ok
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> String {
        let j = TranscriptJson {
            failed: self.failed,
            helpers: &self.helpers,
            per_helper_bits: self.per_helper_bits(),
            response_subfield_bits: self.response_subfield.degree_bits(),
            bits_transmitted: self.bits_transmitted,
            cutset_bits: self.cutset_bits,
            recovered: ctx.to_hex(&self.recovered),
            verified: self.verified,
        };
        serde_json::to_string_pretty(&j).expect("transcript serializes") + "\n"
    }
}

/// Symbols available to the repair: the failed node and every node the
/// scheme must not touch are hidden.
fn visible_symbols(plan: &CodePlan, cw: &Codeword, failed: usize) -> Result<Vec<Option<FieldElem>>> {
    if cw.plan_digest != plan.eval.digest() || cw.symbols.len() != plan.n {
        return Err(Error::PlanMismatch);
    }
    let gi = plan.group_of(failed)?;
    Ok(cw
        .symbols
        .iter()
        .enumerate()
        .map(|(i, s)| (plan.group_of(i).ok() != Some(gi)).then(|| s.clone()))
        .collect())
}

/// Shared query/answer/reconstruct pipeline. Uses the parity checks
/// g_w(x) = x^w·h(x) for w < shifts, with h vanishing on every node that is
/// neither a helper nor the failed node, and multipliers e_m·h(α)·v.
fn run_scheme(
    plan: &CodePlan,
    symbols: &[Option<FieldElem>],
    failed: usize,
    helpers: &[usize],
    e_basis: &[FieldElem],
    shifts: usize,
    sub: &Subfield,
    cutset: u64,
) -> Result<RepairTranscript> {
    let ctx = &plan.ctx;
    let pts = plan.eval.points();
    let silent: Vec<FieldElem> = (0..plan.n)
        .filter(|i| *i != failed && !helpers.contains(i))
        .map(|i| pts[i].clone())
        .collect();
    let h = annihilator(ctx, &silent);
    let v = dual_multipliers(&plan.eval);
    let m_bits = sub.degree_bits();

    // helper side
    let mut queries = Vec::with_capacity(helpers.len() * e_basis.len());
    let mut responses = Vec::with_capacity(queries.capacity());
    for &hn in helpers {
        let c = symbols[hn]
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("helper node {hn} is unavailable")))?;
        let hv = ctx.mul(&h.eval(ctx, &pts[hn]), &v.v[hn]);
        for em in e_basis {
            let multiplier = ctx.mul(em, &hv);
            let resp = ctx.trace_to(&ctx.mul(&multiplier, c), sub);
            debug_assert!(ctx.is_in_subfield(&resp, sub));
            queries.push(RepairQuery {
                helper: hn,
                multiplier,
                response_bits: m_bits,
            });
            responses.push(resp);
        }
    }

    // replacement-node side: Tr(e_m·α*^w·h(α*)·v*·c*) = Σ_helpers α_h^w·resp_{h,m}
    let a_star = &pts[failed];
    let hv_star = ctx.mul(&h.eval(ctx, a_star), &v.v[failed]);
    let mut b = Vec::with_capacity(shifts * e_basis.len());
    let mut traces = Vec::with_capacity(b.capacity());
    let mut a_star_w = ctx.one();
    let mut helper_pows: Vec<FieldElem> = helpers.iter().map(|_| ctx.one()).collect();
    for _ in 0..shifts {
        for (m, em) in e_basis.iter().enumerate() {
            b.push(ctx.mul(&ctx.mul(em, &a_star_w), &hv_star));
            let mut t = ctx.zero();
            for (hi, pw) in helper_pows.iter().enumerate() {
                t.add_assign(&ctx.mul(pw, &responses[hi * e_basis.len() + m]));
            }
            traces.push(t);
        }
        a_star_w = ctx.mul(&a_star_w, a_star);
        for (pw, &hn) in helper_pows.iter_mut().zip(helpers) {
            *pw = ctx.mul(pw, &pts[hn]);
        }
    }
    let basis = BasisOverSubfield::new(ctx, sub.clone(), b)?;
    let dual = dual_basis(ctx, &basis)?;
    let recovered = reconstruct(ctx, &dual, &traces);
    let bits_transmitted = queries.iter().map(|q| q.response_bits as u64).sum();
    Ok(RepairTranscript {
        failed,
        helpers: helpers.to_vec(),
        queries,
        responses,
        response_subfield: sub.clone(),
        bits_transmitted,
        cutset_bits: cutset,
        recovered,
        verified: None,
    })
}

/// Construction-1 repair of `failed` from d helpers outside its group.
pub fn repair_c1(plan: &CodePlan, cw: &Codeword, failed: usize, d: usize) -> Result<RepairTranscript> {
    let symbols = visible_symbols(plan, cw, failed)?;
    repair_c1_symbols(plan, &symbols, failed, d, None)
}

/// As [`repair_c1`], using a caller-supplied repair subspace instead of the
/// twisted power one. The subspace must be over GF(q^ū) for the selected helpers.
pub fn repair_c1_with_subspace(
    plan: &CodePlan,
    cw: &Codeword,
    failed: usize,
    d: usize,
    subspace: &RepairSubspace,
) -> Result<RepairTranscript> {
    let symbols = visible_symbols(plan, cw, failed)?;
    repair_c1_symbols(plan, &symbols, failed, d, Some(subspace))
}

/// Construction-1 repair over an explicit symbol view (`None` = unavailable).
pub fn repair_c1_symbols(
    plan: &CodePlan,
    symbols: &[Option<FieldElem>],
    failed: usize,
    d: usize,
    subspace: Option<&RepairSubspace>,
) -> Result<RepairTranscript> {
    let (s, plan_d) = c1_params(plan)?;
    let gi = plan.group_of(failed)?;
    let max = plan.n - plan.groups[gi].t;
    if d < plan_d || d > max {
        return Err(Error::LocalityOutOfRange { d, min: plan_d, max });
    }
    let (helpers, r) = select_helpers_c1(plan, failed, d)?;
    let owned;
    let sub = match subspace {
        Some(sub) => {
            let u_bar: u64 = r.iter().map(|&i| plan.groups[i].prime).product();
            if sub.subfield.degree_bits() != plan.base_bits * u_bar as usize {
                return Err(Error::SpanFailure(format!(
                    "subspace is over GF(2^{}), helpers need GF(2^{})",
                    sub.subfield.degree_bits(),
                    plan.base_bits * u_bar as usize
                )));
            }
            if !verify_span(&plan.ctx, sub, &plan.eval.points()[failed], s)? {
                return Err(Error::SpanFailure("supplied subspace fails the span condition".into()));
            }
            sub
        }
        None => {
            owned = lemma1_subspace(plan, failed, &r, 1)?;
            &owned
        }
    };
    let cutset = cutset_bits(d, plan.k, plan.subpacketization(), plan.base_bits)?;
    run_scheme(plan, symbols, failed, &helpers, &sub.basis, s, &sub.subfield, cutset)
}

/// Helpers for Construction 2: every node outside the failed node's group.
pub fn select_helpers_c2(plan: &CodePlan, failed: usize) -> Result<Vec<usize>> {
    let gi = plan.group_of(failed)?;
    Ok((0..plan.n).filter(|&i| plan.group_of(i).ok() != Some(gi)).collect())
}

/// Construction-2 repair of `failed` from all n - t_i nodes outside its group.
pub fn repair_c2(plan: &CodePlan, cw: &Codeword, failed: usize) -> Result<RepairTranscript> {
    let symbols = visible_symbols(plan, cw, failed)?;
    repair_c2_symbols(plan, &symbols, failed)
}

pub fn repair_c2_symbols(plan: &CodePlan, symbols: &[Option<FieldElem>], failed: usize) -> Result<RepairTranscript> {
    if !matches!(plan.kind, Kind::Two { .. }) {
        return Err(Error::PlanMismatch);
    }
    let gi = plan.group_of(failed)?;
    let helpers = select_helpers_c2(plan, failed)?;
    let g = &plan.groups[gi];
    let d = helpers.len();
    let cutset = cutset_bits(d, plan.k, plan.subpacketization(), plan.base_bits)?;
    let one = [plan.ctx.one()];
    run_scheme(
        plan,
        symbols,
        failed,
        &helpers,
        &one,
        g.prime as usize,
        &g.complement_field,
        cutset,
    )
}

/// Dispatches on the plan's construction; `d` defaults to the plan's own.
pub fn repair(plan: &CodePlan, cw: &Codeword, failed: usize, d: Option<usize>) -> Result<RepairTranscript> {
    let symbols = visible_symbols(plan, cw, failed)?;
    repair_symbols(plan, &symbols, failed, d)
}

pub fn repair_symbols(
    plan: &CodePlan,
    symbols: &[Option<FieldElem>],
    failed: usize,
    d: Option<usize>,
) -> Result<RepairTranscript> {
    match plan.kind {
        Kind::One { d: plan_d, .. } => repair_c1_symbols(plan, symbols, failed, d.unwrap_or(plan_d), None),
        Kind::Two { .. } => {
            let gi = plan.group_of(failed)?;
            let only = plan.n - plan.groups[gi].t;
            if let Some(d) = d.filter(|&d| d != only) {
                return Err(Error::LocalityOutOfRange { d, min: only, max: only });
            }
            repair_c2_symbols(plan, symbols, failed)
        }
    }
}
