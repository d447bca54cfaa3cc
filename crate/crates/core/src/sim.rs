//! In-process storage cluster: one symbol per node, single-failure injection,
//! repair over a counted channel, and byte-exact verification.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::constructions::{load_plan, CodePlan};
use crate::error::{Error, Result};
use crate::factor::FactorBudget;
use crate::field::FieldElem;
use crate::io::write_atomic;
use crate::repair::{repair_symbols, RepairTranscript};
use crate::rs::{encode, naive_decode, MessagePoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub index: usize,
    pub group: usize,
    /// `None` marks a failed node.
    pub symbol: Option<FieldElem>,
}

#[derive(Debug, Clone)]
pub struct ClusterState {
    pub plan: CodePlan,
    pub nodes: Vec<NodeRecord>,
    pub seed: u64,
    /// Kept only to check repaired symbols.
    pub original_message: MessagePoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Pe,
    Naive,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pe" => Ok(Strategy::Pe),
            "naive" => Ok(Strategy::Naive),
            _ => Err(Error::InvalidInput(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub bits: u64,
    pub purpose: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferLog {
    pub entries: Vec<Transfer>,
    pub total_bits: u64,
}

impl TransferLog {
    fn push(&mut self, from: usize, to: usize, bits: u64, purpose: &'static str) {
        self.total_bits += bits;
        self.entries.push(Transfer { from, to, bits, purpose });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("from,to,bits,purpose\n");
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.from, e.to, e.bits, e.purpose).unwrap();
        }
        out
    }
}

/// Download of k full symbols followed by interpolation.
#[derive(Debug, Clone)]
pub struct NaiveReport {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub bits_transmitted: u64,
    pub recovered: FieldElem,
}

#[derive(Debug, Clone)]
pub enum RepairReport {
    Pe(RepairTranscript),
    Naive(NaiveReport),
}

impl RepairReport {
    pub fn failed(&self) -> usize {
        match self {
            RepairReport::Pe(t) => t.failed,
            RepairReport::Naive(r) => r.failed,
        }
    }

    pub fn bits_transmitted(&self) -> u64 {
        match self {
            RepairReport::Pe(t) => t.bits_transmitted,
            RepairReport::Naive(r) => r.bits_transmitted,
        }
    }

    pub fn recovered(&self) -> &FieldElem {
        match self {
            RepairReport::Pe(t) => &t.recovered,
            RepairReport::Naive(r) => &r.recovered,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub report: RepairReport,
    pub log: TransferLog,
    /// True iff the recovered symbol equals the original one; only then is
    /// the node restored.
    pub verified: bool,
}

/// k uniform coefficients drawn from ChaCha20 seeded with `seed`.
pub fn seeded_message(plan: &CodePlan, seed: u64) -> MessagePoly {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    MessagePoly::random(&plan.ctx, plan.k, &mut rng)
}

/// Encodes [`seeded_message`] and places one symbol on each node.
pub fn init_cluster(plan: CodePlan, seed: u64) -> Result<ClusterState> {
    let msg = seeded_message(&plan, seed);
    init_cluster_with_message(plan, seed, msg)
}

pub fn init_cluster_with_message(plan: CodePlan, seed: u64, msg: MessagePoly) -> Result<ClusterState> {
    if msg.k() != plan.k {
        return Err(Error::InvalidInput(format!("message has {} coefficients, plan k = {}", msg.k(), plan.k)));
    }
    let cw = encode(&msg, &plan.eval)?;
    let nodes = cw
        .symbols
        .into_iter()
        .enumerate()
        .map(|(index, s)| {
            Ok(NodeRecord {
                index,
                group: plan.group_of(index)?,
                symbol: Some(s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterState {
        plan,
        nodes,
        seed,
        original_message: msg,
    })
}

impl ClusterState {
    pub fn failed_node(&self) -> Option<usize> {
        self.nodes.iter().find(|n| n.symbol.is_none()).map(|n| n.index)
    }

    pub fn symbols(&self) -> Vec<Option<FieldElem>> {
        self.nodes.iter().map(|n| n.symbol.clone()).collect()
    }

    fn original_symbol(&self, node: usize) -> FieldElem {
        self.original_message.as_poly().eval(&self.plan.ctx, &self.plan.eval.points()[node])
    }

    pub fn fail_node(&mut self, index: usize) -> Result<()> {
        if index >= self.nodes.len() {
            return Err(Error::NodeOutOfRange { index, n: self.nodes.len() });
        }
        match self.failed_node() {
            Some(f) if f == index => Err(Error::AlreadyFailed(index)),
            Some(f) => Err(Error::SecondFailureUnsupported(index, f)),
            None => {
                self.nodes[index].symbol = None;
                Ok(())
            }
        }
    }

    pub fn run_repair(&mut self, strategy: Strategy, d: Option<usize>) -> Result<RepairOutcome> {
        let failed = self.failed_node().ok_or(Error::NothingToRepair)?;
        let mut log = TransferLog::default();
        let report = match strategy {
            Strategy::Pe => {
                let mut t = repair_symbols(&self.plan, &self.symbols(), failed, d)?;
                for (h, bits) in t.helpers.iter().zip(t.per_helper_bits()) {
                    log.push(*h, failed, bits, "trace");
                }
                t.verify(&self.original_symbol(failed));
                RepairReport::Pe(t)
            }
            Strategy::Naive => RepairReport::Naive(self.naive_repair(failed, &mut log)?),
        };
        let verified = *report.recovered() == self.original_symbol(failed);
        if verified {
            self.nodes[failed].symbol = Some(report.recovered().clone());
        }
        Ok(RepairOutcome { report, log, verified })
    }

    fn naive_repair(&self, failed: usize, log: &mut TransferLog) -> Result<NaiveReport> {
        let picks: Vec<(usize, FieldElem)> = self
            .nodes
            .iter()
            .filter_map(|n| n.symbol.clone().map(|s| (n.index, s)))
            .take(self.plan.k)
            .collect();
        let sym_bits = self.plan.ctx.degree() as u64;
        for (i, _) in &picks {
            log.push(*i, failed, sym_bits, "symbol");
        }
        let msg = naive_decode(&picks, &self.plan.eval)?;
        Ok(NaiveReport {
            failed,
            helpers: picks.iter().map(|(i, _)| *i).collect(),
            bits_transmitted: sym_bits * picks.len() as u64,
            recovered: msg.as_poly().eval(&self.plan.ctx, &self.plan.eval.points()[failed]),
        })
    }

    /// Checks every live symbol against the re-encoded message.
    pub fn verify_live(&self) -> Result<()> {
        let cw = encode(&self.original_message, &self.plan.eval)?;
        for n in &self.nodes {
            if let Some(s) = &n.symbol {
                if *s != cw.symbols[n.index] {
                    return Err(Error::DigestMismatch(format!("node {} symbol does not match the encoded message", n.index)));
                }
            }
        }
        Ok(())
    }
}

/// Cluster file text. `plan_ref` is the plan file path as it should be written
/// (relative paths resolve against the cluster file's directory).
pub fn cluster_to_string(state: &ClusterState, plan_ref: &str) -> String {
    let ctx = &state.plan.ctx;
    let mut s = String::new();
    writeln!(s, "plan={plan_ref}").unwrap();
    writeln!(s, "plan_digest={}", state.plan.digest()).unwrap();
    writeln!(s, "seed={}", state.seed).unwrap();
    let msg: Vec<String> = state.original_message.coefficients.iter().map(|c| ctx.to_hex(c)).collect();
    writeln!(s, "message={}", msg.join(",")).unwrap();
    for n in &state.nodes {
        let sym = n.symbol.as_ref().map_or_else(|| "FAILED".to_string(), |x| ctx.to_hex(x));
        writeln!(s, "node {} {} {}", n.index, n.group, sym).unwrap();
    }
    s
}

fn resolve(cluster_path: &Path, plan_ref: &str) -> PathBuf {
    let p = Path::new(plan_ref);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    cluster_path.parent().unwrap_or(Path::new(".")).join(p)
}

/// Writes the plan file (at `plan_ref`) and the cluster file atomically.
pub fn save_cluster(state: &ClusterState, path: &Path, plan_ref: &str) -> Result<()> {
    write_atomic(&resolve(path, plan_ref), state.plan.to_json().as_bytes())?;
    write_atomic(path, cluster_to_string(state, plan_ref).as_bytes())
}

pub fn load_cluster(path: &Path, budget: FactorBudget) -> Result<ClusterState> {
    let corrupt = |m: String| Error::CorruptFile(m);
    let text = std::fs::read_to_string(path).map_err(|e| corrupt(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String> {
        lines
            .next()
            .and_then(|l| l.strip_prefix(key))
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| corrupt(format!("expected `{key}=`")))
    };
    let plan_ref = header("plan")?;
    let digest = header("plan_digest")?;
    let seed: u64 = header("seed")?.parse().map_err(|_| corrupt("bad seed".into()))?;
    let message = header("message")?;

    let plan = load_plan(&resolve(path, &plan_ref), budget)?;
    if plan.digest() != digest {
        return Err(Error::DigestMismatch(format!("cluster expects plan {digest}, found {}", plan.digest())));
    }
    let ctx = plan.ctx.clone();
    let coeffs = message
        .split(',')
        .map(|h| ctx.from_hex(h).map_err(|e| corrupt(format!("message: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let original_message = MessagePoly::new(coeffs);
    if original_message.k() != plan.k {
        return Err(corrupt("message length differs from k".into()));
    }

    let mut nodes = Vec::with_capacity(plan.n);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [tag, idx, grp, sym] = parts[..] else {
            return Err(corrupt(format!("bad node line `{line}`")));
        };
        let index: usize = idx.parse().map_err(|_| corrupt(format!("bad node index `{idx}`")))?;
        let group: usize = grp.parse().map_err(|_| corrupt(format!("bad group `{grp}`")))?;
        if tag != "node" || index != nodes.len() || plan.group_of(index).ok() != Some(group) {
            return Err(corrupt(format!("node line `{line}` disagrees with the plan")));
        }
        let symbol = match sym {
            "FAILED" => None,
            h => Some(ctx.from_hex(h).map_err(|e| corrupt(format!("node {index}: {e}")))?),
        };
        nodes.push(NodeRecord { index, group, symbol });
    }
    if nodes.len() != plan.n {
        return Err(corrupt(format!("expected {} nodes, found {}", plan.n, nodes.len())));
    }
    if nodes.iter().filter(|n| n.symbol.is_none()).count() > 1 {
        return Err(corrupt("more than one failed node".into()));
    }
    let state = ClusterState {
        plan,
        nodes,
        seed,
        original_message,
    };
    state.verify_live()?;
    Ok(state)
}
