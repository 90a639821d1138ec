//! Generator of the minimal output-unstable set for bimolecular CRDs (and the
//! two-reactant nonincreasing extension).
//!
//! The set of output-unstable configurations is upward closed, so its minimal
//! elements — a finite antichain — characterize it completely. This module
//! discovers that antichain by backward expansion: it seeds with the size-2
//! configurations that are unstable on sight (mixed-vote pairs, and reactant
//! vectors of verdict-flipping reactions) and then repeatedly generates
//! predecessor candidates of everything found, in nondecreasing size order.
//! A candidate is kept exactly when no smaller or equal element already found
//! dominates it.
//!
//! Size order is what makes the minimality test sound: when a size-k
//! candidate is examined, every minimal unstable configuration of smaller
//! size is already in the index, so a single dominance query decides
//! membership. For bimolecular inputs the worklist visits configurations in
//! the same order as the literal two-loop formulation; for reactions with
//! fewer than two products the direct predecessor jumps up in size and the
//! worklist simply parks it until its layer is reached.
//!
//! Output-stability of the input CRD is a documented precondition, not
//! checked here: soundness of every emitted element and termination hold
//! regardless, but completeness needs it. Deciding o-stability of a CRD is
//! not known to be possible in general.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::index::{Antichain, IndexBackend, IndexError};
use crate::model::{Configuration, Crd, CrdClass, ModelError};

/// Default bound on the number of antichain elements produced by one run.
pub const DEFAULT_ELEMENT_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinuError {
    #[error("{0} CRDs are not supported; the generator needs two-reactant nonincreasing reactions")]
    UnsupportedClass(CrdClass),
    #[error("a truncated result cannot certify stability of a configuration of size {size}")]
    Uncertifiable { size: u64 },
    #[error("the zero configuration is neither stable nor unstable; refusing to classify it")]
    ZeroConfiguration,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

fn require_supported(crd: &Crd) -> Result<(), MinuError> {
    match crd.classify() {
        CrdClass::Bimolecular | CrdClass::TwoReactantNonincreasing => Ok(()),
        other => Err(MinuError::UnsupportedClass(other)),
    }
}

/// Seed sets for the backward expansion; every element has size 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSets {
    /// Mixed-vote pairs: undefined verdict, unstable on sight.
    pub m1: Vec<Configuration>,
    /// Reactant vectors of reactions that can flip a defined verdict in one
    /// step (a product voting against a reactant, or an empty product side).
    pub t: Vec<Configuration>,
}

/// Mixed-vote pairs and verdict-flipping reactant vectors.
pub fn compute_seeds(crd: &Crd) -> Result<SeedSets, MinuError> {
    require_supported(crd)?;
    let dim = crd.dim();
    let mut m1 = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            if crd.vote(a) != crd.vote(b) {
                let mut counts = vec![0u64; dim];
                counts[a] = 1;
                counts[b] = 1;
                m1.push(Configuration::new(counts).expect("pair cannot overflow"));
            }
        }
    }
    m1.sort_unstable_by(|x, y| x.canonical_cmp(y));

    let mut t = Vec::new();
    for rxn in crd.reactions() {
        let flips = rxn.products().is_zero()
            || rxn.reactants().support().any(|a| {
                rxn.products().support().any(|b| crd.vote(a) != crd.vote(b))
            });
        if flips {
            t.push(rxn.reactants().clone());
        }
    }
    t.sort_unstable_by(|x, y| x.canonical_cmp(y));
    t.dedup();
    Ok(SeedSets { m1, t })
}

/// Knobs for one generator run.
#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Candidates above this size are dropped (result flagged truncated).
    pub size_cap: Option<u64>,
    /// Hard bound on emitted antichain elements.
    pub element_cap: u64,
    /// Index backend for the minimality tests.
    pub backend: IndexBackend,
    /// Worker threads for candidate generation: 0 = library default pool,
    /// 1 = fully serial. The result is identical either way.
    pub threads: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            size_cap: None,
            element_cap: DEFAULT_ELEMENT_CAP,
            backend: IndexBackend::Naive,
            threads: 1,
        }
    }
}

/// Cost accounting for one generator run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenStats {
    /// Full-configuration comparisons spent in the dominance index.
    pub comparisons: u64,
    /// Predecessor attempts, counting also the ones that yielded nothing.
    pub predecessor_computations: u64,
    /// (size, number of minimal unstable configurations of that size).
    pub layers: Vec<(u64, u64)>,
    pub wall_time: Duration,
}

/// Result of one generator run.
#[derive(Debug)]
pub struct GenResult {
    pub min_unstable: Antichain,
    pub stats: GenStats,
    /// True when a cap cut the run short. The antichain is then still valid
    /// and still a subset of the minimal unstable set, just possibly missing
    /// larger elements.
    pub truncated: bool,
    /// When truncated, the largest size for which the result is complete.
    pub complete_up_to: Option<u64>,
}

/// Candidate ordering: by size first, then canonically. The worklist pops
/// candidates in exactly this order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate(Configuration);

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.canonical_cmp(&other.0)
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes the minimal output-unstable set of an o-stable CRD of a supported
/// class by size-ordered backward expansion from the seed sets.
pub fn gen_min_unstable(crd: &Crd, options: &GenOptions) -> Result<GenResult, MinuError> {
    require_supported(crd)?;
    let start = Instant::now();
    let dim = crd.dim();
    let seeds = compute_seeds(crd)?;

    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    for c in seeds.m1.into_iter().chain(seeds.t) {
        heap.push(Reverse(Candidate(c)));
    }

    let mut index = Antichain::with_backend(dim, options.backend);
    let mut predecessor_computations: u64 = 0;
    let mut layers: Vec<(u64, u64)> = Vec::new();
    let mut truncated = false;
    let mut complete_up_to = None;

    'outer: while let Some(layer_size) = heap.peek().map(|Reverse(Candidate(c))| c.size()) {
        if let Some(cap) = options.size_cap {
            if layer_size > cap {
                // Pops come in nondecreasing size, so nothing below the cap
                // remains.
                truncated = true;
                complete_up_to = Some(cap);
                break;
            }
        }
        // Process the whole layer in waves: test and insert the current
        // same-size candidates, then expand the newly inserted ones. Direct
        // predecessors of same size feed the next wave of this layer.
        let mut layer_count: u64 = 0;
        loop {
            let mut wave: Vec<Configuration> = Vec::new();
            loop {
                match heap.peek() {
                    Some(Reverse(Candidate(top))) if top.size() == layer_size => {}
                    _ => break,
                }
                let Reverse(Candidate(c)) = heap.pop().expect("peeked nonempty");
                wave.push(c);
            }
            if wave.is_empty() {
                break;
            }
            let mut inserted: Vec<Configuration> = Vec::new();
            for c in wave {
                if index.dominates(&c)? {
                    continue;
                }
                if index.len() as u64 >= options.element_cap {
                    truncated = true;
                    complete_up_to = Some(layer_size.saturating_sub(1));
                    if layer_count > 0 {
                        layers.push((layer_size, layer_count));
                    }
                    break 'outer;
                }
                index.insert(c.clone())?;
                layer_count += 1;
                inserted.push(c);
            }
            let (candidates, attempts) = expand(crd, &inserted, options.threads)?;
            predecessor_computations += attempts;
            for c in candidates {
                heap.push(Reverse(Candidate(c)));
            }
        }
        if layer_count > 0 {
            layers.push((layer_size, layer_count));
        }
    }

    let stats = GenStats {
        comparisons: index.stats().comparisons,
        predecessor_computations,
        layers,
        wall_time: start.elapsed(),
    };
    Ok(GenResult { min_unstable: index, stats, truncated, complete_up_to })
}

/// Generates the predecessor candidates of freshly inserted elements: the
/// direct predecessors under every reaction, and the predecessors of every
/// one-molecule extension. Returns the candidates in deterministic order plus
/// the number of predecessor attempts made.
fn expand(
    crd: &Crd,
    inserted: &[Configuration],
    threads: usize,
) -> Result<(Vec<Configuration>, u64), MinuError> {
    let attempts = inserted.len() as u64
        * crd.reactions().len() as u64
        * (1 + crd.dim() as u64);
    let per_element = |c: &Configuration| -> Result<Vec<Configuration>, MinuError> {
        let mut out = Vec::new();
        for rxn in crd.reactions() {
            if let Some(pred) = rxn.predecessor_of(c)? {
                out.push(pred);
            }
            for pos in 0..crd.dim() {
                let target = c.plus_unit(pos)?;
                if let Some(pred) = rxn.predecessor_of(&target)? {
                    out.push(pred);
                }
            }
        }
        Ok(out)
    };

    let nested: Vec<Vec<Configuration>> = if threads == 1 || inserted.len() < 2 {
        inserted.iter().map(per_element).collect::<Result<_, _>>()?
    } else {
        use rayon::prelude::*;
        let run = || -> Result<Vec<Vec<Configuration>>, MinuError> {
            inserted.par_iter().map(per_element).collect()
        };
        if threads == 0 {
            run()?
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool")
                .install(run)?
        }
    };
    Ok((nested.into_iter().flatten().collect(), attempts))
}

/// Batch o-stability check against a computed minimal unstable set: a
/// configuration is o-stable exactly when no stored minimal element fits
/// under it.
///
/// A truncated result can still certify instability (any hit is a valid
/// certificate) and stability of configurations within its complete size
/// range; anything larger is refused.
pub fn check_o_stable(result: &GenResult, c: &Configuration) -> Result<bool, MinuError> {
    if c.is_zero() {
        return Err(MinuError::ZeroConfiguration);
    }
    if result.min_unstable.dominates(c)? {
        return Ok(false);
    }
    if result.truncated && result.complete_up_to.is_none_or(|s| c.size() > s) {
        return Err(MinuError::Uncertifiable { size: c.size() });
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Reaction, SpeciesTable, Vote};
    use crate::oracle;
    use std::collections::BTreeSet;

    fn cfg(counts: &[u64]) -> Configuration {
        Configuration::new(counts.to_vec()).unwrap()
    }

    fn existence_crd() -> Crd {
        let species = SpeciesTable::new(["A", "B", "Y"]).unwrap();
        let rxn = Reaction::new(cfg(&[1, 1, 0]), cfg(&[1, 0, 1])).unwrap();
        Crd::new(species, vec![rxn], BTreeSet::from([0, 1]), vec![Vote::Yes, Vote::No, Vote::Yes])
            .unwrap()
    }

    #[test]
    fn seeds_of_existence_crd() {
        let seeds = compute_seeds(&existence_crd()).unwrap();
        assert_eq!(seeds.m1, vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]);
        assert_eq!(seeds.t, vec![cfg(&[1, 1, 0])]);
    }

    #[test]
    fn seeds_empty_without_vote_conflicts() {
        let species = SpeciesTable::new(["A", "B"]).unwrap();
        let rxn = Reaction::new(cfg(&[1, 1]), cfg(&[0, 2])).unwrap();
        let crd =
            Crd::new(species, vec![rxn], BTreeSet::new(), vec![Vote::Yes, Vote::Yes]).unwrap();
        let seeds = compute_seeds(&crd).unwrap();
        assert!(seeds.m1.is_empty());
        assert!(seeds.t.is_empty());
    }

    #[test]
    fn empty_product_side_seeds_t() {
        let species = SpeciesTable::new(["A"]).unwrap();
        let annihilate = Reaction::new(cfg(&[2]), Configuration::zero(1)).unwrap();
        let crd =
            Crd::new(species, vec![annihilate], BTreeSet::from([0]), vec![Vote::Yes]).unwrap();
        let seeds = compute_seeds(&crd).unwrap();
        assert_eq!(seeds.t, vec![cfg(&[2])]);
    }

    #[test]
    fn seeds_reject_general_class() {
        let species = SpeciesTable::new(["A"]).unwrap();
        let grow = Reaction::new(cfg(&[1]), cfg(&[2])).unwrap();
        let crd = Crd::new(species, vec![grow], BTreeSet::new(), vec![Vote::Yes]).unwrap();
        assert!(matches!(
            compute_seeds(&crd),
            Err(MinuError::UnsupportedClass(CrdClass::General))
        ));
    }

    #[test]
    fn existence_min_unstable_set() {
        let result = gen_min_unstable(&existence_crd(), &GenOptions::default()).unwrap();
        assert!(!result.truncated);
        assert_eq!(
            result.min_unstable.canonical_list(),
            vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]
        );
        assert_eq!(result.stats.layers, vec![(2, 2)]);
    }

    #[test]
    fn reaction_free_crd_yields_its_mixed_pairs() {
        let species = SpeciesTable::new(["A", "B"]).unwrap();
        let crd =
            Crd::new(species, vec![], BTreeSet::from([0, 1]), vec![Vote::Yes, Vote::No]).unwrap();
        let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        assert_eq!(result.min_unstable.canonical_list(), vec![cfg(&[1, 1])]);
        assert_eq!(result.stats.predecessor_computations, 0);
    }

    #[test]
    fn matches_oracle_on_existence() {
        let crd = existence_crd();
        let fast = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        let slow = oracle::min_unstable(&crd, 6, oracle::DEFAULT_VISIT_CAP).unwrap();
        assert_eq!(fast.min_unstable.canonical_list(), slow.canonical_list());
    }

    #[test]
    fn element_cap_truncates_with_flag() {
        let crd = existence_crd();
        let options = GenOptions { element_cap: 1, ..GenOptions::default() };
        let result = gen_min_unstable(&crd, &options).unwrap();
        assert!(result.truncated);
        assert_eq!(result.min_unstable.len(), 1);
        assert_eq!(result.complete_up_to, Some(1));
    }

    #[test]
    fn size_cap_marks_completeness_boundary() {
        let crd = existence_crd();
        let options = GenOptions { size_cap: Some(2), ..GenOptions::default() };
        let result = gen_min_unstable(&crd, &options).unwrap();
        // candidates above the cap were dropped untested, so the result is
        // conservatively flagged even though nothing larger is minimal here
        assert!(result.truncated);
        assert_eq!(result.complete_up_to, Some(2));
        assert_eq!(
            result.min_unstable.canonical_list(),
            vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]
        );
        assert_eq!(result.stats.layers, vec![(2, 2)]);
    }

    #[test]
    fn check_o_stable_against_computed_set() {
        let crd = existence_crd();
        let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        // dominated by AB: unstable
        assert!(!check_o_stable(&result, &cfg(&[3, 1, 0])).unwrap());
        // all-yes and all-no configurations are stable
        assert!(check_o_stable(&result, &cfg(&[1, 0, 4])).unwrap());
        assert!(check_o_stable(&result, &cfg(&[0, 7, 0])).unwrap());
        assert!(matches!(
            check_o_stable(&result, &Configuration::zero(3)),
            Err(MinuError::ZeroConfiguration)
        ));
    }

    #[test]
    fn truncated_result_certifies_only_what_it_can() {
        let crd = existence_crd();
        let options = GenOptions { element_cap: 1, ..GenOptions::default() };
        let result = gen_min_unstable(&crd, &options).unwrap();
        // the one found element still certifies instability above it
        let found = result.min_unstable.canonical_list()[0].clone();
        let above = found.plus_unit(0).unwrap();
        assert!(!check_o_stable(&result, &above).unwrap());
        // a size-1 configuration is within the complete range
        assert!(check_o_stable(&result, &cfg(&[1, 0, 0])).unwrap());
        // anything larger and undominated is uncertifiable
        assert!(matches!(
            check_o_stable(&result, &cfg(&[0, 0, 9])),
            Err(MinuError::Uncertifiable { size: 9 })
        ));
    }

    #[test]
    fn budget_bound_holds() {
        let crd = existence_crd();
        let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        let bound = (crd.dim() as u64 + 1)
            * crd.reactions().len() as u64
            * result.min_unstable.len() as u64;
        assert!(result.stats.predecessor_computations <= bound);
    }

    #[test]
    fn parallel_generation_is_deterministic() {
        let crd = existence_crd();
        let serial = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        let parallel =
            gen_min_unstable(&crd, &GenOptions { threads: 0, ..GenOptions::default() }).unwrap();
        assert_eq!(
            serial.min_unstable.canonical_list(),
            parallel.min_unstable.canonical_list()
        );
        assert_eq!(serial.stats.comparisons, parallel.stats.comparisons);
        assert_eq!(
            serial.stats.predecessor_computations,
            parallel.stats.predecessor_computations
        );
    }
}
