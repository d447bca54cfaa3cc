//! Planning and validation of the two exclusion-group RS constructions.
//!
//! Construction 1 fixes a repair degree d up front (s = d - k + 1) and lives
//! in E = GF(q^{u·s}); Construction 2 derives each group's size from the
//! redundancy r and lives in E = GF(q^u). Here q = 2^a and u = ∏ p_i.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factor::{is_prime_u64, phi_mersenne, primes, FactorBudget};
use crate::field::{BitPoly, FieldCtx, FieldElem, FieldOptions, Subfield};
use crate::rs::EvaluationSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Construction 1 with s = d - k + 1.
    One { s: usize, d: usize },
    /// Construction 2 with redundancy r = n - k.
    Two { r: usize },
}

/// One exclusion set A_i.
#[derive(Debug, Clone)]
pub struct ExclusionGroup {
    pub prime: u64,
    pub t: usize,
    /// g_i: the element whose powers give the points.
    pub base: FieldElem,
    pub exponents: Vec<u64>,
    pub points: Vec<FieldElem>,
    /// GF(q^{p_i}), where the points are primitive.
    pub point_field: Subfield,
    /// GF(q^{u_i}), u_i = u / p_i.
    pub complement_field: Subfield,
    /// Global index of this group's first node.
    pub first_node: usize,
}

/// Serialized plan: the inputs needed to rebuild a [`CodePlan`] exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub construction: u8,
    pub base_bits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub primes: Vec<u64>,
    pub t: Vec<usize>,
    pub point_exponents: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_polys_hex: Option<Vec<String>>,
    pub modulus_hex: String,
    #[serde(default)]
    pub allow_unproven_generator: bool,
    #[serde(default)]
    pub digest: String,
}

impl PlanFile {
    /// SHA-256 of the canonical JSON with an empty digest field.
    pub fn compute_digest(&self) -> String {
        let mut blank = self.clone();
        blank.digest.clear();
        let canon = serde_json::to_string(&blank).expect("plan serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text).map_err(|e| Error::CorruptFile(format!("plan: {e}")))?;
        let want = file.compute_digest();
        if file.digest != want {
            return Err(Error::DigestMismatch(format!("plan digest {} != {want}", file.digest)));
        }
        Ok(file)
    }
}

/// A fully resolved, validated code plan.
#[derive(Debug, Clone)]
pub struct CodePlan {
    pub kind: Kind,
    pub base_bits: usize,
    pub n: usize,
    pub k: usize,
    /// Groups in user order; nodes are numbered group by group.
    pub groups: Vec<ExclusionGroup>,
    /// Group indices sorted by ascending t (stable), the normalized order.
    pub sorted_groups: Vec<usize>,
    pub ctx: FieldCtx,
    pub eval: EvaluationSet,
    pub warnings: Vec<String>,
    pub file: PlanFile,
}

impl CodePlan {
    pub fn digest(&self) -> &str {
        &self.file.digest
    }

    /// u = ∏ p_i.
    pub fn u(&self) -> u64 {
        self.groups.iter().map(|g| g.prime).product()
    }

    pub fn u_i(&self, group: usize) -> u64 {
        self.u() / self.groups[group].prime
    }

    pub fn t_max(&self) -> usize {
        self.groups.iter().map(|g| g.t).max().unwrap_or(0)
    }

    /// Sub-packetization in base-field symbols.
    pub fn subpacketization(&self) -> u64 {
        subpacketization_of(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// (group, position within group) of a global node index.
    pub fn locate(&self, node: usize) -> Result<(usize, usize)> {
        for (gi, g) in self.groups.iter().enumerate() {
            if node >= g.first_node && node < g.first_node + g.t {
                return Ok((gi, node - g.first_node));
            }
        }
        Err(Error::NodeOutOfRange { index: node, n: self.n })
    }

    pub fn group_of(&self, node: usize) -> Result<usize> {
        self.locate(node).map(|(g, _)| g)
    }

    pub fn node_index(&self, group: usize, j: usize) -> usize {
        self.groups[group].first_node + j
    }

    /// Repair degree and cut-set locality for a node in `group`:
    /// the plan's d for Construction 1, n - t_i for Construction 2.
    pub fn repair_degree(&self, group: usize) -> usize {
        match self.kind {
            Kind::One { d, .. } => d,
            Kind::Two { .. } => self.n - self.groups[group].t,
        }
    }

    pub fn summary(&self) -> String {
        let kind = match self.kind {
            Kind::One { s, d } => format!("construction=1 s={s} d={d}"),
            Kind::Two { r } => format!("construction=2 r={r}"),
        };
        format!(
            "{kind} n={} k={} t={:?} primes={:?} L={} field=GF(2^{})",
            self.n,
            self.k,
            self.groups.iter().map(|g| g.t).collect::<Vec<_>>(),
            self.groups.iter().map(|g| g.prime).collect::<Vec<_>>(),
            self.subpacketization(),
            self.ctx.degree()
        )
    }

    pub fn to_json(&self) -> String {
        self.file.to_json()
    }

    /// Rebuilds and re-validates a plan from its file form.
    pub fn from_file(file: &PlanFile, budget: FactorBudget) -> Result<Self> {
        let want = file.compute_digest();
        if file.digest != want {
            return Err(Error::DigestMismatch(format!("plan digest {} != {want}", file.digest)));
        }
        let modulus = BitPoly::from_hex(&file.modulus_hex)?;
        let group_polys = file
            .group_polys_hex
            .as_ref()
            .map(|v| v.iter().map(|h| BitPoly::from_hex(h)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let field = FieldOptions {
            factor_budget: budget,
            allow_unproven_generator: file.allow_unproven_generator,
        };
        let plan = match file.construction {
            1 => build_plan_c1(&C1Params {
                base_bits: file.base_bits,
                s: file.s,
                k: file.k,
                d: file.d,
                t: file.t.clone(),
                primes: Some(file.primes.clone()),
                point_exponents: Some(file.point_exponents.clone()),
                group_polys,
                modulus: Some(modulus),
                field,
            })?,
            2 => {
                let r = file.r.ok_or_else(|| Error::CorruptFile("construction 2 plan without r".into()))?;
                let plan = build_plan_c2(&C2Params {
                    base_bits: file.base_bits,
                    r,
                    primes: file.primes.clone(),
                    point_exponents: Some(file.point_exponents.clone()),
                    group_polys,
                    modulus: Some(modulus),
                    field,
                })?;
                if plan.k != file.k || plan.file.t != file.t {
                    return Err(Error::CorruptFile("plan k or t disagrees with r and primes".into()));
                }
                plan
            }
            c => return Err(Error::CorruptFile(format!("unknown construction {c}"))),
        };
        if plan.file != *file {
            return Err(Error::CorruptFile("plan does not round-trip".into()));
        }
        Ok(plan)
    }
}

/// Reads, digest-checks and rebuilds a plan file.
pub fn load_plan(path: &std::path::Path, budget: FactorBudget) -> Result<CodePlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::CorruptFile(format!("plan {}: {e}", path.display())))?;
    CodePlan::from_file(&PlanFile::from_json(&text)?, budget)
}

/// Sub-packetization in base-field symbols: s·u (Construction 1) or u (Construction 2).
pub fn subpacketization_of(plan: &CodePlan) -> u64 {
    match plan.kind {
        Kind::One { s, .. } => s as u64 * plan.u(),
        Kind::Two { .. } => plan.u(),
    }
}

/// φ(q^p - 1) for q = 2^a.
pub fn primitive_count(base_bits: usize, p: u64, budget: FactorBudget) -> Result<BigUint> {
    phi_mersenne(base_bits * p as usize, budget)
}

/// For each group, the smallest unused prime p ≡ 1 (mod s) with
/// φ(q^p - 1) ≥ min_t[i]. Groups are served in ascending min_t order,
/// so uniform demands yield the l smallest admissible primes.
pub fn find_primes_c1(s: usize, min_t: &[usize], base_bits: usize, budget: FactorBudget) -> Result<Vec<u64>> {
    let l = min_t.len();
    if s == 0 {
        return Err(Error::InvalidInput("s must be at least 1".into()));
    }
    if l < 2 {
        return Err(Error::ConstraintViolation(format!("need at least 2 groups, got {l}")));
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by_key(|&i| min_t[i]);
    let mut out = vec![0u64; l];
    let mut used = Vec::new();
    for i in order {
        let mut found = None;
        for p in primes().take(10_000) {
            if p % s as u64 != 1 % s as u64 || used.contains(&p) {
                continue;
            }
            if primitive_count(base_bits, p, budget)? >= BigUint::from(min_t[i]) {
                found = Some(p);
                break;
            }
        }
        let p = found.ok_or_else(|| Error::ConstraintViolation("no admissible prime found".into()))?;
        used.push(p);
        out[i] = p;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct C1Params {
    pub base_bits: usize,
    pub s: Option<usize>,
    pub k: usize,
    pub d: Option<usize>,
    pub t: Vec<usize>,
    pub primes: Option<Vec<u64>>,
    pub point_exponents: Option<Vec<Vec<u64>>>,
    /// Minimal polynomials over GF(2) of the group base elements.
    pub group_polys: Option<Vec<BitPoly>>,
    pub modulus: Option<BitPoly>,
    pub field: FieldOptions,
}

impl C1Params {
    pub fn new(base_bits: usize, s: usize, k: usize, t: Vec<usize>) -> Self {
        C1Params {
            base_bits,
            s: Some(s),
            k,
            d: None,
            t,
            primes: None,
            point_exponents: None,
            group_polys: None,
            modulus: None,
            field: FieldOptions::default(),
        }
    }

    /// Resolves (s, d) from whichever of them was supplied.
    pub fn resolve_s_d(&self) -> Result<(usize, usize)> {
        match (self.s, self.d) {
            (Some(s), Some(d)) if s >= 1 && d + 1 == self.k + s => Ok((s, d)),
            (Some(s), Some(d)) => Err(Error::InvalidInput(format!(
                "s = {s} and d = {d} conflict with k = {} (need s = d - k + 1)",
                self.k
            ))),
            (Some(s), None) if s >= 1 => Ok((s, self.k + s - 1)),
            (None, Some(d)) if d >= self.k => Ok((d - self.k + 1, d)),
            (None, Some(d)) => Err(Error::TooFewHelpers { d, k: self.k }),
            _ => Err(Error::InvalidInput("construction 1 needs s or d".into())),
        }
    }
}

/// Parameter-level summary of a Construction-1 instance, computable without
/// building its symbol field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C1Summary {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub s: usize,
    pub primes: Vec<u64>,
    pub u: u64,
    /// Sub-packetization in base-field symbols.
    pub l_symbols: u64,
    /// Repair bandwidth in bits, d·u·a.
    pub repair_bits: u64,
    pub warnings: Vec<String>,
}

/// Checks every Construction-1 constraint that does not need field arithmetic.
pub fn validate_c1_params(p: &C1Params) -> Result<C1Summary> {
    let (s, d) = p.resolve_s_d()?;
    let l = p.t.len();
    if l < 2 {
        return Err(Error::ConstraintViolation(format!("need at least 2 groups, got {l}")));
    }
    if p.base_bits == 0 {
        return Err(Error::InvalidInput("base_bits must be at least 1".into()));
    }
    if let Some(i) = p.t.iter().position(|&t| t == 0) {
        return Err(Error::ConstraintViolation(format!("group {i} has t = 0")));
    }
    let n: usize = p.t.iter().sum();
    let t_max = *p.t.iter().max().unwrap();
    if p.k == 0 || p.k + t_max > n {
        return Err(Error::RateViolation {
            k: p.k,
            max: n - t_max,
        });
    }
    if d + t_max > n {
        return Err(Error::LocalityOutOfRange {
            d,
            min: p.k,
            max: n - t_max,
        });
    }
    let budget = p.field.factor_budget;
    let primes = match &p.primes {
        Some(v) => v.clone(),
        None => find_primes_c1(s, &p.t, p.base_bits, budget)?,
    };
    check_primes(&primes, l)?;
    for &q in &primes {
        if q % s as u64 != 1 % s as u64 {
            return Err(Error::BadPrime { prime: q, s });
        }
    }
    for (i, (&q, &t)) in primes.iter().zip(&p.t).enumerate() {
        let phi = primitive_count(p.base_bits, q, budget)?;
        if BigUint::from(t) > phi {
            return Err(Error::InsufficientPrimitives {
                group: i,
                t,
                available: phi.to_string(),
            });
        }
    }
    let u: u64 = primes.iter().product();
    let mut warnings = Vec::new();
    if s == 1 {
        warnings.push("s = 1 (d = k): repair degenerates to downloading whole symbols".to_string());
    }
    Ok(C1Summary {
        n,
        k: p.k,
        d,
        s,
        primes,
        u,
        l_symbols: s as u64 * u,
        repair_bits: d as u64 * u * p.base_bits as u64,
        warnings,
    })
}

fn check_primes(primes: &[u64], l: usize) -> Result<()> {
    if primes.len() != l {
        return Err(Error::ConstraintViolation(format!("{} primes for {l} groups", primes.len())));
    }
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime_u64(p) {
            return Err(Error::ConstraintViolation(format!("{p} is not prime")));
        }
        if primes[..i].contains(&p) {
            return Err(Error::ConstraintViolation(format!("prime {p} repeated")));
        }
    }
    Ok(())
}

pub fn build_plan_c1(p: &C1Params) -> Result<CodePlan> {
    let summary = validate_c1_params(p)?;
    let degree = p.base_bits * summary.l_symbols as usize;
    let ctx = FieldCtx::new(degree, p.modulus.clone(), p.field)?;
    let kind = Kind::One {
        s: summary.s,
        d: summary.d,
    };
    assemble(
        kind,
        ctx,
        p.base_bits,
        summary.k,
        &summary.primes,
        &p.t,
        p.point_exponents.as_deref(),
        p.group_polys.as_deref(),
        p.field,
        summary.warnings,
    )
}

#[derive(Debug, Clone)]
pub struct C2Params {
    pub base_bits: usize,
    pub r: usize,
    pub primes: Vec<u64>,
    pub point_exponents: Option<Vec<Vec<u64>>>,
    pub group_polys: Option<Vec<BitPoly>>,
    pub modulus: Option<BitPoly>,
    pub field: FieldOptions,
}

impl C2Params {
    pub fn new(base_bits: usize, r: usize, primes: Vec<u64>) -> Self {
        C2Params {
            base_bits,
            r,
            primes,
            point_exponents: None,
            group_polys: None,
            modulus: None,
            field: FieldOptions::default(),
        }
    }
}

/// Group sizes t_i = r - p_i + 1 with every constraint checked.
pub fn c2_group_sizes(p: &C2Params) -> Result<Vec<usize>> {
    let l = p.primes.len();
    if l < 2 {
        return Err(Error::ConstraintViolation(format!("need at least 2 groups, got {l}")));
    }
    check_primes(&p.primes, l)?;
    let mut t = Vec::with_capacity(l);
    for &q in &p.primes {
        let ti = (p.r as i64) - q as i64 + 1;
        if ti < 2 {
            return Err(Error::ConstraintViolation(format!("r - p + 1 = {ti} < 2 for p = {q}")));
        }
        let phi = primitive_count(p.base_bits, q, p.field.factor_budget)?;
        if BigUint::from(ti as u64) > phi {
            return Err(Error::ConstraintViolation(format!(
                "t = {ti} exceeds the {phi} primitive elements of GF(2^{})",
                p.base_bits * q as usize
            )));
        }
        t.push(ti as usize);
    }
    let n: usize = t.iter().sum();
    let t_max = *t.iter().max().unwrap();
    if p.r >= n || n - p.r + t_max > n {
        return Err(Error::ConstraintViolation(format!(
            "k = n - r = {} must satisfy 1 <= k <= n - t = {}",
            n as i64 - p.r as i64,
            n - t_max
        )));
    }
    Ok(t)
}

pub fn build_plan_c2(p: &C2Params) -> Result<CodePlan> {
    if p.base_bits == 0 {
        return Err(Error::InvalidInput("base_bits must be at least 1".into()));
    }
    let t = c2_group_sizes(p)?;
    let n: usize = t.iter().sum();
    let u: u64 = p.primes.iter().product();
    let ctx = FieldCtx::new(p.base_bits * u as usize, p.modulus.clone(), p.field)?;
    assemble(
        Kind::Two { r: p.r },
        ctx,
        p.base_bits,
        n - p.r,
        &p.primes,
        &t,
        p.point_exponents.as_deref(),
        p.group_polys.as_deref(),
        p.field,
        Vec::new(),
    )
}

/// The first `t` exponents e ≥ 1 with gcd(e, order) = 1.
pub fn smallest_coprime_exponents(order: &BigUint, t: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(t);
    let mut e = 1u64;
    while out.len() < t {
        if BigUint::from(e).gcd(order) == BigUint::from(1u32) {
            out.push(e);
        }
        e += 1;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    kind: Kind,
    ctx: FieldCtx,
    base_bits: usize,
    k: usize,
    primes: &[u64],
    t: &[usize],
    exponents: Option<&[Vec<u64>]>,
    group_polys: Option<&[BitPoly]>,
    field: FieldOptions,
    warnings: Vec<String>,
) -> Result<CodePlan> {
    let l = primes.len();
    if exponents.is_some_and(|e| e.len() != l) {
        return Err(Error::ConstraintViolation("point_exponents must list one group per prime".into()));
    }
    if group_polys.is_some_and(|g| g.len() != l) {
        return Err(Error::ConstraintViolation("group_polys must list one polynomial per prime".into()));
    }
    let u: u64 = primes.iter().product();
    let budget = field.factor_budget;
    let mut groups = Vec::with_capacity(l);
    let mut all_points = Vec::new();
    let mut first_node = 0;
    for i in 0..l {
        let (p, ti) = (primes[i], t[i]);
        let point_field = ctx.subfield(base_bits * p as usize)?;
        let complement_field = ctx.subfield(base_bits * (u / p) as usize)?;
        let base = match group_polys {
            Some(polys) => {
                let m = point_field.degree_bits();
                if polys[i].degree() != Some(m) {
                    return Err(Error::ConstraintViolation(format!(
                        "group {i}: polynomial {} is not of degree {m}",
                        polys[i]
                    )));
                }
                if !polys[i].is_irreducible() {
                    return Err(Error::ConstraintViolation(format!("group {i}: {} is reducible", polys[i])));
                }
                ctx.root_in_subfield(&polys[i], &point_field)?
            }
            None => point_field.generator().clone(),
        };
        let order = (BigUint::from(1u32) << point_field.degree_bits()) - 1u32;
        let exps = match exponents {
            Some(e) => {
                if e[i].len() != ti {
                    return Err(Error::ConstraintViolation(format!(
                        "group {i}: {} exponents for t = {ti}",
                        e[i].len()
                    )));
                }
                e[i].clone()
            }
            None => {
                let phi = primitive_count(base_bits, p, budget)?;
                if BigUint::from(ti) > phi {
                    return Err(Error::InsufficientPrimitives {
                        group: i,
                        t: ti,
                        available: phi.to_string(),
                    });
                }
                smallest_coprime_exponents(&order, ti)
            }
        };
        let mut points = Vec::with_capacity(ti);
        for &e in &exps {
            let x = ctx.pow_u64(&base, e);
            if !ctx.is_primitive_in_subfield(&x, &point_field, budget)? {
                return Err(Error::ConstraintViolation(format!(
                    "group {i}: exponent {e} does not give a primitive element of GF(2^{})",
                    point_field.degree_bits()
                )));
            }
            if all_points.contains(&x) {
                return Err(Error::ConstraintViolation(format!("group {i}: exponent {e} repeats a point")));
            }
            let deg = ctx.degree_over(&x, &complement_field);
            if deg as u64 != p {
                return Err(Error::ConstraintViolation(format!(
                    "group {i}: point of degree {deg} over GF(2^{}), expected {p}",
                    complement_field.degree_bits()
                )));
            }
            all_points.push(x.clone());
            points.push(x);
        }
        groups.push(ExclusionGroup {
            prime: p,
            t: ti,
            base,
            exponents: exps,
            points,
            point_field,
            complement_field,
            first_node,
        });
        first_node += ti;
    }
    let n = first_node;
    let mut sorted_groups: Vec<usize> = (0..l).collect();
    sorted_groups.sort_by_key(|&i| groups[i].t);
    let eval = EvaluationSet::new(ctx.clone(), all_points)?;
    let (s, r, d) = match kind {
        Kind::One { s, d } => (Some(s), None, Some(d)),
        Kind::Two { r } => (None, Some(r), None),
    };
    let mut file = PlanFile {
        construction: if s.is_some() { 1 } else { 2 },
        base_bits,
        s,
        r,
        k,
        d,
        primes: primes.to_vec(),
        t: t.to_vec(),
        point_exponents: groups.iter().map(|g| g.exponents.clone()).collect(),
        group_polys_hex: group_polys.map(|v| {
            v.iter()
                .map(|p| p.to_hex((p.degree().unwrap_or(0) + 1).div_ceil(4)))
                .collect()
        }),
        modulus_hex: ctx.modulus_hex(),
        allow_unproven_generator: field.allow_unproven_generator,
        digest: String::new(),
    };
    file.digest = file.compute_digest();
    Ok(CodePlan {
        kind,
        base_bits,
        n,
        k,
        groups,
        sorted_groups,
        ctx,
        eval,
        warnings,
        file,
    })
}

/// The bound query matching a plan: its k and its group sizes.
pub fn plan_t_list(plan: &CodePlan) -> Vec<usize> {
    plan.sorted_groups.iter().map(|&i| plan.groups[i].t).collect()
}
