//! Core value types and exact semantics of chemical reaction networks and
//! deciders: species tables, configurations, reactions, the output map, and
//! reaction-class detection.
//!
//! All types are immutable values after construction and all operations are
//! pure functions, so everything here is safe to share across threads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("molecule count overflow")]
    CountOverflow,
    #[error("reaction is not applicable to the configuration")]
    NotApplicable,
    #[error("species table must be nonempty")]
    EmptySpeciesTable,
    #[error("duplicate species `{0}`")]
    DuplicateSpecies(String),
    #[error("input species position {0} out of range")]
    InputOutOfRange(usize),
    #[error("vote map must cover every species (expected {expected} votes, got {got})")]
    VoteArity { expected: usize, got: usize },
}

/// Ordered table of species identifiers. Declaration order fixes the meaning
/// of every count vector, every canonical ordering, and all serialized output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SpeciesTable {
    pub fn new<I, S>(names: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ModelError::EmptySpeciesTable);
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateSpecies(name.clone()));
            }
        }
        Ok(Self { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, pos: usize) -> &str {
        &self.names[pos]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// A configuration: nonnegative molecule counts over a species table, with
/// the total count cached.
///
/// Counts use checked 64-bit arithmetic; overflow is a hard error rather than
/// a silent wraparound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    counts: Vec<u64>,
    size: u64,
}

impl Configuration {
    pub fn new(counts: Vec<u64>) -> Result<Self, ModelError> {
        let mut size: u64 = 0;
        for &c in &counts {
            size = size.checked_add(c).ok_or(ModelError::CountOverflow)?;
        }
        Ok(Self { counts, size })
    }

    pub fn zero(dim: usize) -> Self {
        Self { counts: vec![0; dim], size: 0 }
    }

    /// Configuration with a single molecule of the species at `pos`.
    pub fn unit(dim: usize, pos: usize) -> Self {
        let mut counts = vec![0; dim];
        counts[pos] = 1;
        Self { counts, size: 1 }
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Total molecule count.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn count(&self, pos: usize) -> u64 {
        self.counts[pos]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn is_zero(&self) -> bool {
        self.size == 0
    }

    /// Componentwise order: `self ≤ other` in every position.
    pub fn le(&self, other: &Self) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        // A smaller-or-equal vector can never have larger total count.
        if self.size > other.size {
            return false;
        }
        self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ModelError> {
        debug_assert_eq!(self.dim(), other.dim());
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_add(*b).ok_or(ModelError::CountOverflow))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(counts)
    }

    /// `self − other`, or `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.dim(), other.dim());
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()?;
        let size = self.size - other.size;
        Some(Self { counts, size })
    }

    /// `self + e_pos` (one more molecule of the species at `pos`).
    pub fn plus_unit(&self, pos: usize) -> Result<Self, ModelError> {
        let mut counts = self.counts.clone();
        counts[pos] = counts[pos].checked_add(1).ok_or(ModelError::CountOverflow)?;
        let size = self.size.checked_add(1).ok_or(ModelError::CountOverflow)?;
        Ok(Self { counts, size })
    }

    /// Canonical total order: by size, then lexicographically on the count
    /// vector in species order. Used for all deterministic listings.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| self.counts.cmp(&other.counts))
    }

    /// Species positions with nonzero count.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }
}

/// Renders in multiplicity-term form, e.g. `A + 2B`; the zero vector as `0`.
pub struct DisplayConfig<'a> {
    pub config: &'a Configuration,
    pub species: &'a SpeciesTable,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.config.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.config.counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == 1 {
                write!(f, "{}", self.species.name(i))?;
            } else {
                write!(f, "{}{}", c, self.species.name(i))?;
            }
        }
        Ok(())
    }
}

/// Vote a species casts when present: the decider's per-species output bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vote {
    No,
    Yes,
}

/// Output value of a configuration: defined (yes/no) or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    No,
    Yes,
    Und,
}

impl Verdict {
    pub fn is_defined(self) -> bool {
        !matches!(self, Verdict::Und)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::No => write!(f, "no"),
            Verdict::Yes => write!(f, "yes"),
            Verdict::Und => write!(f, "und"),
        }
    }
}

impl From<Vote> for Verdict {
    fn from(v: Vote) -> Self {
        match v {
            Vote::No => Verdict::No,
            Vote::Yes => Verdict::Yes,
        }
    }
}

/// A reaction (r, p) with its class flags precomputed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    reactants: Configuration,
    products: Configuration,
    mute: bool,
    bimolecular: bool,
    nonincreasing: bool,
    two_reactant: bool,
}

impl Reaction {
    pub fn new(reactants: Configuration, products: Configuration) -> Result<Self, ModelError> {
        if reactants.dim() != products.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: reactants.dim(),
                got: products.dim(),
            });
        }
        let mute = reactants == products;
        let bimolecular = reactants.size() == 2 && products.size() == 2;
        let nonincreasing = reactants.size() >= products.size();
        let two_reactant = reactants.size() == 2;
        Ok(Self { reactants, products, mute, bimolecular, nonincreasing, two_reactant })
    }

    pub fn reactants(&self) -> &Configuration {
        &self.reactants
    }

    pub fn products(&self) -> &Configuration {
        &self.products
    }

    pub fn is_mute(&self) -> bool {
        self.mute
    }

    pub fn is_bimolecular(&self) -> bool {
        self.bimolecular
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.nonincreasing
    }

    pub fn is_two_reactant(&self) -> bool {
        self.two_reactant
    }

    /// A reaction is applicable to `c` when its reactants fit: r ≤ c.
    pub fn applicable_to(&self, c: &Configuration) -> bool {
        self.reactants.le(c)
    }

    /// Result of applying the reaction: c − r + p.
    pub fn apply_to(&self, c: &Configuration) -> Result<Configuration, ModelError> {
        let without = c.checked_sub(&self.reactants).ok_or(ModelError::NotApplicable)?;
        without.checked_add(&self.products)
    }

    /// The unique c′ with c′ → target under this reaction, namely
    /// target + r − p, defined exactly when p ≤ target.
    pub fn predecessor_of(&self, target: &Configuration) -> Result<Option<Configuration>, ModelError> {
        let Some(without) = target.checked_sub(&self.products) else {
            return Ok(None);
        };
        without.checked_add(&self.reactants).map(Some)
    }
}

/// Strongest reaction class shared by every reaction of a CRD.
///
/// Bimolecular ⊂ TwoReactantNonincreasing ⊂ Nonincreasing ⊂ General.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CrdClass {
    Bimolecular,
    TwoReactantNonincreasing,
    Nonincreasing,
    General,
}

impl fmt::Display for CrdClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrdClass::Bimolecular => write!(f, "bimolecular"),
            CrdClass::TwoReactantNonincreasing => write!(f, "two-reactant nonincreasing"),
            CrdClass::Nonincreasing => write!(f, "nonincreasing"),
            CrdClass::General => write!(f, "general"),
        }
    }
}

/// A chemical reaction decider: CRN plus input species and a total vote map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crd {
    species: SpeciesTable,
    reactions: Vec<Reaction>,
    inputs: BTreeSet<usize>,
    votes: Vec<Vote>,
}

impl Crd {
    pub fn new(
        species: SpeciesTable,
        reactions: Vec<Reaction>,
        inputs: BTreeSet<usize>,
        votes: Vec<Vote>,
    ) -> Result<Self, ModelError> {
        let dim = species.len();
        if votes.len() != dim {
            return Err(ModelError::VoteArity { expected: dim, got: votes.len() });
        }
        for rxn in &reactions {
            if rxn.reactants().dim() != dim {
                return Err(ModelError::DimensionMismatch {
                    expected: dim,
                    got: rxn.reactants().dim(),
                });
            }
        }
        if let Some(&pos) = inputs.iter().find(|&&p| p >= dim) {
            return Err(ModelError::InputOutOfRange(pos));
        }
        Ok(Self { species, reactions, inputs, votes })
    }

    pub fn species(&self) -> &SpeciesTable {
        &self.species
    }

    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn inputs(&self) -> &BTreeSet<usize> {
        &self.inputs
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn vote(&self, pos: usize) -> Vote {
        self.votes[pos]
    }

    fn check_dim(&self, c: &Configuration) -> Result<(), ModelError> {
        if c.dim() != self.dim() {
            return Err(ModelError::DimensionMismatch { expected: self.dim(), got: c.dim() });
        }
        Ok(())
    }

    /// The output map Φ: yes iff only yes voters are present, no iff only no
    /// voters; undefined when the configuration is zero or mixes both classes.
    pub fn phi(&self, c: &Configuration) -> Result<Verdict, ModelError> {
        self.check_dim(c)?;
        let mut any_yes = false;
        let mut any_no = false;
        for pos in c.support() {
            match self.votes[pos] {
                Vote::Yes => any_yes = true,
                Vote::No => any_no = true,
            }
        }
        Ok(match (any_yes, any_no) {
            (true, false) => Verdict::Yes,
            (false, true) => Verdict::No,
            _ => Verdict::Und,
        })
    }

    /// Strongest class satisfied by every reaction. A reaction-free CRD is
    /// vacuously bimolecular.
    pub fn classify(&self) -> CrdClass {
        let mut class = CrdClass::Bimolecular;
        for rxn in &self.reactions {
            let this = if rxn.is_bimolecular() {
                CrdClass::Bimolecular
            } else if rxn.is_two_reactant() && rxn.is_nonincreasing() {
                CrdClass::TwoReactantNonincreasing
            } else if rxn.is_nonincreasing() {
                CrdClass::Nonincreasing
            } else {
                CrdClass::General
            };
            class = class.max(this);
        }
        class
    }

    /// Initial configurations are nonzero and supported on the input species.
    pub fn is_initial(&self, c: &Configuration) -> Result<bool, ModelError> {
        self.check_dim(c)?;
        if c.is_zero() {
            return Ok(false);
        }
        Ok(c.support().all(|pos| self.inputs.contains(&pos)))
    }

    /// Restriction of `c` to the input species: counts of non-input species
    /// are zeroed.
    pub fn project_to_inputs(&self, c: &Configuration) -> Result<Configuration, ModelError> {
        self.check_dim(c)?;
        let counts = c
            .counts()
            .iter()
            .enumerate()
            .map(|(i, &n)| if self.inputs.contains(&i) { n } else { 0 })
            .collect();
        Ok(Configuration::new(counts).expect("projection cannot overflow"))
    }

    pub fn display<'a>(&'a self, c: &'a Configuration) -> DisplayConfig<'a> {
        DisplayConfig { config: c, species: &self.species }
    }
}
