//! Exhaustive ground truth for mass-bounded CRDs.
//!
//! Everything here is brute force on purpose: reachable sets are computed by
//! breadth-first closure, stability verdicts by inspecting every reachable
//! configuration, and the minimal unstable set by classifying every
//! configuration up to a size bound. The fast path in [`crate::minu`] is
//! checked against these answers, so this module must be exact. Visited sets
//! are exact, searches are deterministic (canonical orderings everywhere),
//! and caps are hard errors rather than silent truncation.
//!
//! Only nonincreasing reaction classes are accepted: there the total molecule
//! count never grows along a run, so every search space is finite.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::index::{prune_to_antichain, Antichain, IndexError};
use crate::model::{Configuration, Crd, CrdClass, ModelError, Verdict};

/// Default bound on distinct configurations visited by one oracle call.
pub const DEFAULT_VISIT_CAP: u64 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} CRDs are not supported by the exhaustive oracle")]
    UnsupportedClass(CrdClass),
    #[error("visited-configuration cap of {cap} exceeded")]
    CapExceeded { cap: u64 },
    #[error("the zero configuration is neither stable nor unstable; refusing to classify it")]
    ZeroConfiguration,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Which stability notion a verdict talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    O,
    T,
}

/// Stability classification of one configuration, with a replayable
/// instability witness when the start verdict was defined.
///
/// The witness lists (reaction index, resulting configuration) steps from the
/// start configuration to the first verdict-violating configuration found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub kind: StabilityKind,
    pub witness: Option<Vec<(usize, Configuration)>>,
}

/// Size of one exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachReport {
    pub visited: u64,
    pub capped: bool,
}

fn require_mass_bounded(crd: &Crd) -> Result<(), OracleError> {
    let class = crd.classify();
    if class == CrdClass::General {
        return Err(OracleError::UnsupportedClass(class));
    }
    Ok(())
}

/// Breadth-first closure of `{start}` under one-step reaction application,
/// in canonical order.
pub fn reachable_set(
    crd: &Crd,
    start: &Configuration,
    cap: u64,
) -> Result<(Vec<Configuration>, ReachReport), OracleError> {
    require_mass_bounded(crd)?;
    let explored = explore(crd, start, cap)?;
    let mut nodes = explored.nodes;
    nodes.sort_unstable_by(|a, b| a.canonical_cmp(b));
    let report = ReachReport { visited: nodes.len() as u64, capped: false };
    Ok((nodes, report))
}

/// BFS state: discovery-ordered nodes plus forward edges by node position.
struct Explored {
    nodes: Vec<Configuration>,
    fwd: Vec<Vec<usize>>,
    /// (reaction index, parent position), for witness reconstruction.
    parents: Vec<Option<(usize, usize)>>,
}

fn explore(crd: &Crd, start: &Configuration, cap: u64) -> Result<Explored, OracleError> {
    let mut positions: HashMap<Configuration, usize> = HashMap::new();
    let mut nodes: Vec<Configuration> = Vec::new();
    let mut fwd: Vec<Vec<usize>> = Vec::new();
    let mut parents: Vec<Option<(usize, usize)>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    positions.insert(start.clone(), 0);
    nodes.push(start.clone());
    fwd.push(Vec::new());
    parents.push(None);
    queue.push_back(0);

    while let Some(pos) = queue.pop_front() {
        let current = nodes[pos].clone();
        for (rxn_idx, rxn) in crd.reactions().iter().enumerate() {
            if !rxn.applicable_to(&current) {
                continue;
            }
            let next = rxn.apply_to(&current)?;
            let next_pos = match positions.get(&next) {
                Some(&p) => p,
                None => {
                    if nodes.len() as u64 >= cap {
                        return Err(OracleError::CapExceeded { cap });
                    }
                    let p = nodes.len();
                    positions.insert(next.clone(), p);
                    nodes.push(next);
                    fwd.push(Vec::new());
                    parents.push(Some((rxn_idx, pos)));
                    queue.push_back(p);
                    p
                }
            };
            if !fwd[pos].contains(&next_pos) {
                fwd[pos].push(next_pos);
            }
        }
    }
    Ok(Explored { nodes, fwd, parents })
}

fn witness_path(explored: &Explored, mut pos: usize) -> Vec<(usize, Configuration)> {
    let mut steps = Vec::new();
    while let Some((rxn_idx, parent)) = explored.parents[pos] {
        steps.push((rxn_idx, explored.nodes[pos].clone()));
        pos = parent;
    }
    steps.reverse();
    steps
}

/// Exhaustive o-stability check: stable iff the verdict is defined and every
/// reachable configuration keeps it. Unstable results carry a shortest
/// witness path unless the start verdict was already undefined.
pub fn is_o_stable(
    crd: &Crd,
    start: &Configuration,
    cap: u64,
) -> Result<StabilityVerdict, OracleError> {
    require_mass_bounded(crd)?;
    if start.is_zero() {
        return Err(OracleError::ZeroConfiguration);
    }
    let verdict = crd.phi(start)?;
    if !verdict.is_defined() {
        return Ok(StabilityVerdict { stable: false, kind: StabilityKind::O, witness: None });
    }
    // BFS checks each configuration at first discovery, so the first
    // violation found lies at minimal depth.
    let mut positions: HashMap<Configuration, usize> = HashMap::new();
    let mut nodes: Vec<Configuration> = Vec::new();
    let mut parents: Vec<Option<(usize, usize)>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    positions.insert(start.clone(), 0);
    nodes.push(start.clone());
    parents.push(None);
    queue.push_back(0);

    while let Some(pos) = queue.pop_front() {
        let current = nodes[pos].clone();
        for (rxn_idx, rxn) in crd.reactions().iter().enumerate() {
            if !rxn.applicable_to(&current) {
                continue;
            }
            let next = rxn.apply_to(&current)?;
            if positions.contains_key(&next) {
                continue;
            }
            if nodes.len() as u64 >= cap {
                return Err(OracleError::CapExceeded { cap });
            }
            let p = nodes.len();
            positions.insert(next.clone(), p);
            nodes.push(next.clone());
            parents.push(Some((rxn_idx, pos)));
            if crd.phi(&next)? != verdict {
                let explored = Explored { nodes, fwd: Vec::new(), parents };
                return Ok(StabilityVerdict {
                    stable: false,
                    kind: StabilityKind::O,
                    witness: Some(witness_path(&explored, p)),
                });
            }
            queue.push_back(p);
        }
    }
    Ok(StabilityVerdict { stable: true, kind: StabilityKind::O, witness: None })
}

/// t-stability needs no search: a configuration with a defined verdict is
/// t-stable exactly when every applicable reaction is mute.
pub fn is_t_stable(crd: &Crd, c: &Configuration) -> Result<StabilityVerdict, OracleError> {
    if c.is_zero() {
        return Err(OracleError::ZeroConfiguration);
    }
    let verdict = crd.phi(c)?;
    if !verdict.is_defined() {
        return Ok(StabilityVerdict { stable: false, kind: StabilityKind::T, witness: None });
    }
    for (rxn_idx, rxn) in crd.reactions().iter().enumerate() {
        if !rxn.is_mute() && rxn.applicable_to(c) {
            let next = rxn.apply_to(c)?;
            return Ok(StabilityVerdict {
                stable: false,
                kind: StabilityKind::T,
                witness: Some(vec![(rxn_idx, next)]),
            });
        }
    }
    Ok(StabilityVerdict { stable: true, kind: StabilityKind::T, witness: None })
}

/// Number of configurations with exactly `size` molecules over `dim`
/// species: the multiset coefficient C(dim + size − 1, size). `None` on
/// overflow.
pub fn count_exact_size(dim: usize, size: u64) -> Option<u64> {
    if dim == 0 {
        return Some(u64::from(size == 0));
    }
    let mut acc: u128 = 1;
    for i in 1..dim as u64 {
        acc = acc.checked_mul((size + i) as u128)? / i as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// All configurations with exactly `size` molecules over `dim` species, in
/// canonical (lexicographic) order.
pub fn enumerate_exact_size(dim: usize, size: u64) -> Vec<Configuration> {
    let mut out = Vec::new();
    let mut prefix = vec![0u64; dim];
    compositions(&mut prefix, 0, size, &mut out);
    out
}

fn compositions(prefix: &mut Vec<u64>, pos: usize, remaining: u64, out: &mut Vec<Configuration>) {
    if prefix.is_empty() {
        // zero species: only the empty configuration, and only at size 0
        if remaining == 0 {
            out.push(Configuration::zero(0));
        }
        return;
    }
    if pos + 1 == prefix.len() {
        prefix[pos] = remaining;
        out.push(Configuration::new(prefix.clone()).expect("bounded enumeration"));
        prefix[pos] = 0;
        return;
    }
    for value in 0..=remaining {
        prefix[pos] = value;
        compositions(prefix, pos + 1, remaining - value, out);
    }
    prefix[pos] = 0;
}

/// Configurations supported on the given positions with exactly `size`
/// molecules, in canonical order.
fn enumerate_with_support(dim: usize, support: &[usize], size: u64) -> Vec<Configuration> {
    let mut out = Vec::new();
    let reduced = enumerate_exact_size(support.len(), size);
    for small in reduced {
        let mut counts = vec![0u64; dim];
        for (slot, &pos) in support.iter().enumerate() {
            counts[pos] = small.count(slot);
        }
        out.push(Configuration::new(counts).expect("bounded enumeration"));
    }
    out.sort_unstable_by(|a, b| a.canonical_cmp(b));
    out
}

/// T-stability verdicts for every nonzero configuration of size ≤ `max_size`,
/// in canonical order. No search is involved; the cap only bounds how many
/// configurations are materialized.
pub fn t_stability_table(
    crd: &Crd,
    max_size: u64,
    cap: u64,
) -> Result<Vec<(Configuration, bool)>, OracleError> {
    let dim = crd.dim();
    let mut out: Vec<(Configuration, bool)> = Vec::new();
    for size in 1..=max_size {
        let class = count_exact_size(dim, size).ok_or(OracleError::CapExceeded { cap })?;
        let projected = (out.len() as u64)
            .checked_add(class)
            .ok_or(OracleError::CapExceeded { cap })?;
        if projected > cap {
            return Err(OracleError::CapExceeded { cap });
        }
        for c in enumerate_exact_size(dim, size) {
            let verdict = is_t_stable(crd, &c)?;
            out.push((c, verdict.stable));
        }
    }
    Ok(out)
}

/// O-stability verdicts for every nonzero configuration of size ≤ `max_size`,
/// in canonical order.
///
/// One backward pass per verdict class over the full one-step graph replaces
/// a quadratic per-configuration search; the answers agree with
/// [`is_o_stable`] and the tests check that.
pub fn o_stability_table(
    crd: &Crd,
    max_size: u64,
    cap: u64,
) -> Result<Vec<(Configuration, bool)>, OracleError> {
    require_mass_bounded(crd)?;
    let dim = crd.dim();
    // The zero configuration participates as a graph node (it is reachable
    // when some reaction has empty products) but is never classified.
    let mut nodes: Vec<Configuration> = Vec::new();
    for size in 0..=max_size {
        // size the class before materializing it
        let class = count_exact_size(dim, size).ok_or(OracleError::CapExceeded { cap })?;
        let projected = (nodes.len() as u64)
            .checked_add(class)
            .ok_or(OracleError::CapExceeded { cap })?;
        if projected > cap {
            return Err(OracleError::CapExceeded { cap });
        }
        nodes.extend(enumerate_exact_size(dim, size));
    }
    let positions: HashMap<Configuration, usize> =
        nodes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (pos, c) in nodes.iter().enumerate() {
        for rxn in crd.reactions() {
            if !rxn.applicable_to(c) {
                continue;
            }
            let next = rxn.apply_to(c)?;
            let next_pos = positions[&next];
            if !rev[next_pos].contains(&pos) {
                rev[next_pos].push(pos);
            }
        }
    }
    let verdicts: Vec<Verdict> =
        nodes.iter().map(|c| crd.phi(c)).collect::<Result<_, _>>()?;
    // can_spoil[j][pos]: some configuration with verdict ≠ j is reachable.
    let spoils_yes = backward_closure(&rev, &verdicts, Verdict::Yes);
    let spoils_no = backward_closure(&rev, &verdicts, Verdict::No);

    let mut out = Vec::with_capacity(nodes.len());
    for (pos, c) in nodes.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let stable = match verdicts[pos] {
            Verdict::Und => false,
            Verdict::Yes => !spoils_yes[pos],
            Verdict::No => !spoils_no[pos],
        };
        out.push((c.clone(), stable));
    }
    Ok(out)
}

/// Marks every node from which a configuration with verdict ≠ `keep` is
/// reachable.
fn backward_closure(rev: &[Vec<usize>], verdicts: &[Verdict], keep: Verdict) -> Vec<bool> {
    let mut marked = vec![false; rev.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (pos, &v) in verdicts.iter().enumerate() {
        if v != keep {
            marked[pos] = true;
            queue.push_back(pos);
        }
    }
    while let Some(pos) = queue.pop_front() {
        for &prev in &rev[pos] {
            if !marked[prev] {
                marked[prev] = true;
                queue.push_back(prev);
            }
        }
    }
    marked
}

/// Brute-force minimal unstable set: classifies every configuration of size
/// 1..=`max_size` and prunes the unstable ones to an antichain. By upward
/// closure this equals the minimal unstable set restricted to that size range.
pub fn min_unstable(crd: &Crd, max_size: u64, cap: u64) -> Result<Antichain, OracleError> {
    let table = o_stability_table(crd, max_size, cap)?;
    let unstable = table.into_iter().filter(|(_, stable)| !stable).map(|(c, _)| c);
    Ok(prune_to_antichain(crd.dim(), unstable)?)
}

/// One row of a decider-validation table: an initial configuration (supported
/// on the input species) and the verdict it stabilizes to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecidesEntry {
    pub input: Configuration,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecidesFailureReason {
    /// Some reachable configuration can never reach a stable one.
    NoStableReachable { from: Configuration },
    /// Stable configurations with both verdicts are reachable.
    ConflictingVerdicts { yes_witness: Configuration, no_witness: Configuration },
}

/// Counterexample showing the CRD does not stably decide any predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecidesFailure {
    pub initial: Configuration,
    pub reason: DecidesFailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecidesOutcome {
    Table(Vec<DecidesEntry>),
    Failure(DecidesFailure),
}

/// Verifies, for every initial configuration of size ≤ `max_size`, that from
/// every reachable configuration some stable configuration remains reachable
/// and that all reachable stable configurations agree on one verdict. Returns
/// the verdict table, or the first counterexample in canonical order.
pub fn decides(
    crd: &Crd,
    max_size: u64,
    kind: StabilityKind,
    cap: u64,
) -> Result<DecidesOutcome, OracleError> {
    require_mass_bounded(crd)?;
    let support: Vec<usize> = crd.inputs().iter().copied().collect();
    let mut entries = Vec::new();
    for size in 1..=max_size {
        let class = count_exact_size(support.len(), size).ok_or(OracleError::CapExceeded { cap })?;
        if class > cap {
            return Err(OracleError::CapExceeded { cap });
        }
        for initial in enumerate_with_support(crd.dim(), &support, size) {
            match check_initial(crd, &initial, kind, cap)? {
                Ok(verdict) => entries.push(DecidesEntry { input: initial, verdict }),
                Err(reason) => {
                    return Ok(DecidesOutcome::Failure(DecidesFailure { initial, reason }))
                }
            }
        }
    }
    Ok(DecidesOutcome::Table(entries))
}

fn check_initial(
    crd: &Crd,
    initial: &Configuration,
    kind: StabilityKind,
    cap: u64,
) -> Result<Result<Verdict, DecidesFailureReason>, OracleError> {
    let explored = explore(crd, initial, cap)?;
    let n = explored.nodes.len();
    let verdicts: Vec<Verdict> =
        explored.nodes.iter().map(|c| crd.phi(c)).collect::<Result<_, _>>()?;
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pos, targets) in explored.fwd.iter().enumerate() {
        for &t in targets {
            rev[t].push(pos);
        }
    }

    let stable: Vec<bool> = match kind {
        StabilityKind::T => explored
            .nodes
            .iter()
            .zip(&verdicts)
            .map(|(c, v)| {
                v.is_defined()
                    && crd.reactions().iter().all(|rxn| rxn.is_mute() || !rxn.applicable_to(c))
            })
            .collect(),
        StabilityKind::O => {
            // o-stability within the closed reachable set
            let spoils_yes = backward_closure(&rev, &verdicts, Verdict::Yes);
            let spoils_no = backward_closure(&rev, &verdicts, Verdict::No);
            verdicts
                .iter()
                .enumerate()
                .map(|(pos, v)| match v {
                    Verdict::Und => false,
                    Verdict::Yes => !spoils_yes[pos],
                    Verdict::No => !spoils_no[pos],
                })
                .collect()
        }
    };

    // All stable configurations must agree on one verdict.
    let mut yes_witness: Option<&Configuration> = None;
    let mut no_witness: Option<&Configuration> = None;
    for (pos, &s) in stable.iter().enumerate() {
        if !s {
            continue;
        }
        let slot = match verdicts[pos] {
            Verdict::Yes => &mut yes_witness,
            Verdict::No => &mut no_witness,
            Verdict::Und => unreachable!("stable configurations have defined verdicts"),
        };
        match slot {
            Some(best) if best.canonical_cmp(&explored.nodes[pos]).is_le() => {}
            _ => *slot = Some(&explored.nodes[pos]),
        }
    }
    if let (Some(y), Some(nw)) = (yes_witness, no_witness) {
        return Ok(Err(DecidesFailureReason::ConflictingVerdicts {
            yes_witness: y.clone(),
            no_witness: nw.clone(),
        }));
    }

    // Every reachable configuration must still be able to reach a stable one.
    let mut reaches_stable = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (pos, &s) in stable.iter().enumerate() {
        if s {
            reaches_stable[pos] = true;
            queue.push_back(pos);
        }
    }
    while let Some(pos) = queue.pop_front() {
        for &prev in &rev[pos] {
            if !reaches_stable[prev] {
                reaches_stable[prev] = true;
                queue.push_back(prev);
            }
        }
    }
    if let Some(stuck) = explored
        .nodes
        .iter()
        .enumerate()
        .filter(|(pos, _)| !reaches_stable[*pos])
        .map(|(_, c)| c)
        .min_by(|a, b| a.canonical_cmp(b))
    {
        return Ok(Err(DecidesFailureReason::NoStableReachable { from: stuck.clone() }));
    }

    let verdict = match (yes_witness, no_witness) {
        (Some(_), None) => Verdict::Yes,
        (None, Some(_)) => Verdict::No,
        _ => unreachable!("a nonempty reachable set with no stuck node has stable nodes"),
    };
    Ok(Ok(verdict))
}
