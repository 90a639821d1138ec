//! Text formats: the `.crd` decider DSL, the `.pp` population-protocol
//! transition table, configuration literals, and the versioned JSON report
//! schema.
//!
//! Both source formats are line oriented with `#` comments. A `.crd` file
//! declares species, input species, a total yes/no vote partition, and
//! reactions written additively (`A + 2B -> Y`, `0` for an empty product
//! side):
//!
//! ```text
//! species: A, B, Y
//! inputs: A, B
//! yes: A, Y
//! no: B
//! reactions:
//! A + B -> A + Y
//! ```
//!
//! A `.pp` file declares states and ordered-pair transitions
//! (`A, B -> C, D`); unlisted pairs are implicitly mute. Parsers collect
//! every diagnostic they can (line and column, 1-based) instead of stopping
//! at the first.
//!
//! All serialized output is deterministic byte for byte: species declaration
//! order fixes JSON key order, antichains are emitted in canonical order, and
//! reports carry the schema version and a content hash of the canonical CRD
//! serialization.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Configuration, Crd, DisplayConfig, Reaction, SpeciesTable, Vote};

/// Version tag carried by every JSON report.
pub const SCHEMA: &str = "stablecrd/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// One or more positioned parse diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn ident_ok(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits a comma list, keeping the 1-based column of each trimmed item.
/// An all-blank payload is an empty list; blank items between commas are
/// returned with an empty string for the caller to reject.
fn list_items(payload: &str, payload_col: usize) -> Vec<(usize, &str)> {
    if payload.trim().is_empty() {
        return Vec::new();
    }
    let mut items = Vec::new();
    let mut start = 0;
    for piece in payload.split(',') {
        let leading = piece.len() - piece.trim_start().len();
        items.push((payload_col + start + leading, piece.trim()));
        start += piece.len() + 1;
    }
    items
}

/// Recognized section header, if the line is one.
fn section_header<'a>(line: &'a str, keywords: &[&str]) -> Option<(&'a str, &'a str, usize)> {
    let trimmed = line.trim_start();
    let indent = line.len() - trimmed.len();
    let colon = trimmed.find(':')?;
    let keyword = trimmed[..colon].trim_end();
    if keywords.contains(&keyword) {
        let payload_col = indent + colon + 2;
        Some((keyword, &trimmed[colon + 1..], payload_col))
    } else {
        None
    }
}

struct TermSink<'a> {
    species: &'a SpeciesTable,
    counts: Vec<u64>,
    any: bool,
}

impl<'a> TermSink<'a> {
    fn new(species: &'a SpeciesTable) -> Self {
        Self { species, counts: vec![0; species.len()], any: false }
    }

    fn add(&mut self, name: &str, mult: u64, line: usize, col: usize, diags: &mut Vec<Diagnostic>) {
        match self.species.position(name) {
            Some(pos) => match self.counts[pos].checked_add(mult) {
                Some(n) => {
                    self.counts[pos] = n;
                    self.any = true;
                }
                None => diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("molecule count for `{name}` overflows"),
                }),
            },
            None => diags.push(Diagnostic {
                line,
                column: col,
                message: format!("species `{name}` is not declared"),
            }),
        }
    }

    fn finish(self) -> Option<Configuration> {
        Configuration::new(self.counts).ok()
    }
}

/// Parses one side of a reaction (or a configuration literal): terms joined
/// by `+`, each `[positive-int] identifier`. `0` denotes the empty vector
/// when permitted.
fn parse_terms(
    text: &str,
    line: usize,
    base_col: usize,
    species: &SpeciesTable,
    allow_zero: bool,
    diags: &mut Vec<Diagnostic>,
) -> Option<Configuration> {
    let before = diags.len();
    let trimmed = text.trim();
    let trim_col = base_col + (text.len() - text.trim_start().len());
    if trimmed.is_empty() {
        diags.push(Diagnostic { line, column: trim_col, message: "expected a term".into() });
        return None;
    }
    if trimmed == "0" {
        if allow_zero {
            return Some(Configuration::zero(species.len()));
        }
        diags.push(Diagnostic {
            line,
            column: trim_col,
            message: "the reactant side cannot be empty".into(),
        });
        return None;
    }
    let mut sink = TermSink::new(species);
    let mut offset = 0;
    for piece in text.split('+') {
        let leading = piece.len() - piece.trim_start().len();
        let col = base_col + offset + leading;
        parse_one_term(piece.trim(), line, col, &mut sink, diags);
        offset += piece.len() + 1;
    }
    if diags.len() > before {
        return None;
    }
    sink.finish().or_else(|| {
        diags.push(Diagnostic { line, column: trim_col, message: "count overflow".into() });
        None
    })
}

fn parse_one_term(
    term: &str,
    line: usize,
    col: usize,
    sink: &mut TermSink<'_>,
    diags: &mut Vec<Diagnostic>,
) {
    if term.is_empty() {
        diags.push(Diagnostic { line, column: col, message: "empty term".into() });
        return;
    }
    let digits_len = term.chars().take_while(|c| c.is_ascii_digit()).count();
    let (digits, rest) = term.split_at(digits_len);
    let name = rest.trim_start();
    let name_col = col + term.len() - name.len();
    let mult = if digits.is_empty() {
        1
    } else {
        match digits.parse::<u64>() {
            Ok(0) => {
                diags.push(Diagnostic {
                    line,
                    column: col,
                    message: "multiplicity must be positive".into(),
                });
                return;
            }
            Ok(n) => n,
            Err(_) => {
                diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("multiplicity `{digits}` is out of range"),
                });
                return;
            }
        }
    };
    if !ident_ok(name) {
        diags.push(Diagnostic {
            line,
            column: name_col,
            message: format!("malformed term `{term}`"),
        });
        return;
    }
    sink.add(name, mult, line, name_col, diags);
}

/// Shared state for the vote/input sections of both source formats.
struct DeciderSections {
    inputs: BTreeSet<usize>,
    votes: Vec<Option<Vote>>,
    decl_pos: Vec<(usize, usize)>,
}

impl DeciderSections {
    fn new(len: usize, decl_pos: Vec<(usize, usize)>) -> Self {
        Self { inputs: BTreeSet::new(), votes: vec![None; len], decl_pos }
    }

    fn record_inputs(
        &mut self,
        species: &SpeciesTable,
        payload: &str,
        line: usize,
        payload_col: usize,
        diags: &mut Vec<Diagnostic>,
    ) {
        for (col, item) in list_items(payload, payload_col) {
            match species.position(item) {
                Some(pos) => {
                    self.inputs.insert(pos);
                }
                None => diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("species `{item}` is not declared"),
                }),
            }
        }
    }

    fn record_votes(
        &mut self,
        species: &SpeciesTable,
        vote: Vote,
        payload: &str,
        line: usize,
        payload_col: usize,
        diags: &mut Vec<Diagnostic>,
    ) {
        for (col, item) in list_items(payload, payload_col) {
            let Some(pos) = species.position(item) else {
                diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("species `{item}` is not declared"),
                });
                continue;
            };
            if self.votes[pos].is_some() {
                diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("species `{item}` is voted twice"),
                });
            } else {
                self.votes[pos] = Some(vote);
            }
        }
    }

    fn finish_votes(
        self,
        species: &SpeciesTable,
        diags: &mut Vec<Diagnostic>,
    ) -> (BTreeSet<usize>, Vec<Vote>) {
        let mut votes = Vec::with_capacity(species.len());
        for (pos, vote) in self.votes.iter().enumerate() {
            match vote {
                Some(v) => votes.push(*v),
                None => {
                    let (line, column) = self.decl_pos[pos];
                    diags.push(Diagnostic {
                        line,
                        column,
                        message: format!("species `{}` has no vote", species.name(pos)),
                    });
                    votes.push(Vote::No);
                }
            }
        }
        (self.inputs, votes)
    }
}

/// First pass over the source: collect species (or state) declarations so
/// later sections can be resolved regardless of order.
fn collect_species(
    text: &str,
    keyword: &str,
    all_keywords: &[&str],
    diags: &mut Vec<Diagnostic>,
) -> (Option<SpeciesTable>, Vec<(usize, usize)>) {
    let mut names: Vec<String> = Vec::new();
    let mut decl_pos: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        let Some((kw, payload, payload_col)) = section_header(line, all_keywords) else {
            continue;
        };
        if kw != keyword {
            continue;
        }
        for (col, item) in list_items(payload, payload_col) {
            if !ident_ok(item) {
                diags.push(Diagnostic {
                    line: line_no,
                    column: col,
                    message: format!("invalid identifier `{item}`"),
                });
                continue;
            }
            if !seen.insert(item.to_string()) {
                diags.push(Diagnostic {
                    line: line_no,
                    column: col,
                    message: format!("duplicate species `{item}`"),
                });
                continue;
            }
            names.push(item.to_string());
            decl_pos.push((line_no, col));
        }
    }
    if names.is_empty() {
        diags.push(Diagnostic {
            line: 1,
            column: 1,
            message: format!("missing `{keyword}:` declaration"),
        });
        return (None, decl_pos);
    }
    (SpeciesTable::new(names).ok(), decl_pos)
}

const CRD_KEYWORDS: &[&str] = &["species", "inputs", "yes", "no", "reactions"];

/// Parses the `.crd` decider DSL.
pub fn parse_crd(text: &str) -> Result<Crd, ParseError> {
    let mut diags = Vec::new();
    let (species, decl_pos) = collect_species(text, "species", CRD_KEYWORDS, &mut diags);
    let Some(species) = species else {
        return Err(ParseError { diagnostics: diags });
    };
    let mut sections = DeciderSections::new(species.len(), decl_pos);
    let mut reactions: Vec<Reaction> = Vec::new();
    let mut in_reactions = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some((kw, payload, payload_col)) = section_header(line, CRD_KEYWORDS) {
            in_reactions = false;
            match kw {
                "species" => {}
                "inputs" => {
                    sections.record_inputs(&species, payload, line_no, payload_col, &mut diags)
                }
                "yes" => sections.record_votes(
                    &species,
                    Vote::Yes,
                    payload,
                    line_no,
                    payload_col,
                    &mut diags,
                ),
                "no" => sections.record_votes(
                    &species,
                    Vote::No,
                    payload,
                    line_no,
                    payload_col,
                    &mut diags,
                ),
                "reactions" => {
                    in_reactions = true;
                    if !payload.trim().is_empty() {
                        diags.push(Diagnostic {
                            line: line_no,
                            column: payload_col,
                            message: "unexpected content after `reactions:`".into(),
                        });
                    }
                }
                _ => unreachable!(),
            }
            continue;
        }
        if !in_reactions {
            diags.push(Diagnostic {
                line: line_no,
                column: line.len() - line.trim_start().len() + 1,
                message: "expected a `section:` header".into(),
            });
            continue;
        }
        parse_reaction_line(line, line_no, &species, &mut reactions, &mut diags);
    }

    let (inputs, votes) = sections.finish_votes(&species, &mut diags);
    if !diags.is_empty() {
        return Err(ParseError { diagnostics: diags });
    }
    Ok(Crd::new(species, reactions, inputs, votes).expect("validated during parsing"))
}

fn parse_reaction_line(
    line: &str,
    line_no: usize,
    species: &SpeciesTable,
    reactions: &mut Vec<Reaction>,
    diags: &mut Vec<Diagnostic>,
) {
    let Some(arrow) = line.find("->") else {
        diags.push(Diagnostic {
            line: line_no,
            column: line.len() - line.trim_start().len() + 1,
            message: "expected `->` in reaction".into(),
        });
        return;
    };
    let lhs = &line[..arrow];
    let rhs = &line[arrow + 2..];
    let reactants = parse_terms(lhs, line_no, 1, species, false, diags);
    let products = parse_terms(rhs, line_no, arrow + 3, species, true, diags);
    if let (Some(r), Some(p)) = (reactants, products) {
        let rxn = Reaction::new(r, p).expect("sides share the species table");
        // R is a set: an exact duplicate line is redundant, not a new reaction.
        if !reactions.contains(&rxn) {
            reactions.push(rxn);
        }
    }
}

/// Parses a configuration literal (`2A + 3B`, `0` for the zero vector) over
/// a known species table.
pub fn parse_config(text: &str, species: &SpeciesTable) -> Result<Configuration, ParseError> {
    let mut diags = Vec::new();
    let stripped = strip_comment(text);
    let parsed = parse_terms(stripped, 1, 1, species, true, &mut diags);
    match parsed {
        Some(c) if diags.is_empty() => Ok(c),
        _ => Err(ParseError { diagnostics: diags }),
    }
}

/// A population protocol: states, an ordered-pair transition map, input
/// states, and votes. Pairs absent from the map are mute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolTable {
    pub states: SpeciesTable,
    pub delta: BTreeMap<(usize, usize), (usize, usize)>,
    pub inputs: BTreeSet<usize>,
    pub votes: Vec<Vote>,
}

const PP_KEYWORDS: &[&str] = &["states", "inputs", "yes", "no", "transitions"];

/// Parses the `.pp` transition-table format.
pub fn parse_protocol(text: &str) -> Result<ProtocolTable, ParseError> {
    let mut diags = Vec::new();
    let (states, decl_pos) = collect_species(text, "states", PP_KEYWORDS, &mut diags);
    let Some(states) = states else {
        return Err(ParseError { diagnostics: diags });
    };
    let mut sections = DeciderSections::new(states.len(), decl_pos);
    let mut delta: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let mut in_transitions = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some((kw, payload, payload_col)) = section_header(line, PP_KEYWORDS) {
            in_transitions = false;
            match kw {
                "states" => {}
                "inputs" => {
                    sections.record_inputs(&states, payload, line_no, payload_col, &mut diags)
                }
                "yes" => sections.record_votes(
                    &states,
                    Vote::Yes,
                    payload,
                    line_no,
                    payload_col,
                    &mut diags,
                ),
                "no" => sections.record_votes(
                    &states,
                    Vote::No,
                    payload,
                    line_no,
                    payload_col,
                    &mut diags,
                ),
                "transitions" => {
                    in_transitions = true;
                    if !payload.trim().is_empty() {
                        diags.push(Diagnostic {
                            line: line_no,
                            column: payload_col,
                            message: "unexpected content after `transitions:`".into(),
                        });
                    }
                }
                _ => unreachable!(),
            }
            continue;
        }
        if !in_transitions {
            diags.push(Diagnostic {
                line: line_no,
                column: line.len() - line.trim_start().len() + 1,
                message: "expected a `section:` header".into(),
            });
            continue;
        }
        parse_transition_line(line, line_no, &states, &mut delta, &mut diags);
    }

    let (inputs, votes) = sections.finish_votes(&states, &mut diags);
    if !diags.is_empty() {
        return Err(ParseError { diagnostics: diags });
    }
    Ok(ProtocolTable { states, delta, inputs, votes })
}

fn parse_transition_line(
    line: &str,
    line_no: usize,
    states: &SpeciesTable,
    delta: &mut BTreeMap<(usize, usize), (usize, usize)>,
    diags: &mut Vec<Diagnostic>,
) {
    let start_col = line.len() - line.trim_start().len() + 1;
    let Some(arrow) = line.find("->") else {
        diags.push(Diagnostic {
            line: line_no,
            column: start_col,
            message: "expected `->` in transition".into(),
        });
        return;
    };
    let parse_pair = |side: &str, base_col: usize, diags: &mut Vec<Diagnostic>| {
        let items = list_items(side, base_col);
        if items.len() != 2 {
            diags.push(Diagnostic {
                line: line_no,
                column: base_col,
                message: "expected an ordered pair `X, Y`".into(),
            });
            return None;
        }
        let mut resolved = Vec::with_capacity(2);
        for (col, item) in items {
            match states.position(item) {
                Some(pos) => resolved.push(pos),
                None => {
                    diags.push(Diagnostic {
                        line: line_no,
                        column: col,
                        message: format!("state `{item}` is not declared"),
                    });
                    return None;
                }
            }
        }
        Some((resolved[0], resolved[1]))
    };
    let lhs = parse_pair(&line[..arrow], 1, diags);
    let rhs = parse_pair(&line[arrow + 2..], arrow + 3, diags);
    if let (Some(from), Some(to)) = (lhs, rhs) {
        match delta.get(&from) {
            Some(&existing) if existing != to => diags.push(Diagnostic {
                line: line_no,
                column: start_col,
                message: format!(
                    "transition for ({}, {}) is already defined with a different result",
                    states.name(from.0),
                    states.name(from.1)
                ),
            }),
            _ => {
                delta.insert(from, to);
            }
        }
    }
}

/// Converts a protocol into a bimolecular CRD: one reaction per transition,
/// with δ(A,B) = (C,D) becoming AB → CD. A transition whose result is the
/// same multiset as its argument is a mute reaction; transitions yielding
/// equal reactions are merged.
pub fn import_protocol(table: &ProtocolTable) -> Crd {
    let dim = table.states.len();
    let mut reactions: Vec<Reaction> = Vec::new();
    for (&(a, b), &(c, d)) in &table.delta {
        let mut r = vec![0u64; dim];
        r[a] += 1;
        r[b] += 1;
        let mut p = vec![0u64; dim];
        p[c] += 1;
        p[d] += 1;
        let rxn = Reaction::new(
            Configuration::new(r).expect("pair"),
            Configuration::new(p).expect("pair"),
        )
        .expect("same dimension");
        if !reactions.contains(&rxn) {
            reactions.push(rxn);
        }
    }
    Crd::new(table.states.clone(), reactions, table.inputs.clone(), table.votes.clone())
        .expect("protocol table is validated")
}

/// Canonical `.crd` serialization; `parse_crd` inverts it.
pub fn serialize_crd(crd: &Crd) -> String {
    let species = crd.species();
    let mut out = String::new();
    out.push_str("species: ");
    out.push_str(&species.names().join(", "));
    out.push('\n');
    if !crd.inputs().is_empty() {
        let names: Vec<&str> = crd.inputs().iter().map(|&p| species.name(p)).collect();
        out.push_str("inputs: ");
        out.push_str(&names.join(", "));
        out.push('\n');
    }
    for (vote, header) in [(Vote::Yes, "yes: "), (Vote::No, "no: ")] {
        let names: Vec<&str> = (0..species.len())
            .filter(|&p| crd.vote(p) == vote)
            .map(|p| species.name(p))
            .collect();
        if !names.is_empty() {
            out.push_str(header);
            out.push_str(&names.join(", "));
            out.push('\n');
        }
    }
    if !crd.reactions().is_empty() {
        out.push_str("reactions:\n");
        for rxn in crd.reactions() {
            out.push_str(&serialize_config(rxn.reactants(), species));
            out.push_str(" -> ");
            out.push_str(&serialize_config(rxn.products(), species));
            out.push('\n');
        }
    }
    out
}

/// Multiplicity-term form of a configuration (`A + 2B`; the zero vector is
/// `0`); `parse_config` inverts it.
pub fn serialize_config(c: &Configuration, species: &SpeciesTable) -> String {
    DisplayConfig { config: c, species }.to_string()
}

/// Hex SHA-256 of the canonical serialization; reports and caches carry it so
/// stale pairings of a cache with an edited source file are rejected.
pub fn crd_content_hash(crd: &Crd) -> String {
    let digest = Sha256::digest(serialize_crd(crd).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sparse JSON object for a configuration: species name → positive count,
/// keys in declaration order.
pub fn config_json(c: &Configuration, species: &SpeciesTable) -> Value {
    let mut map = Map::new();
    for (pos, &n) in c.counts().iter().enumerate() {
        if n > 0 {
            map.insert(species.name(pos).to_string(), json!(n));
        }
    }
    Value::Object(map)
}

/// JSON array of configurations, already in the order the caller wants.
pub fn configs_json(list: &[Configuration], species: &SpeciesTable) -> Value {
    Value::Array(list.iter().map(|c| config_json(c, species)).collect())
}

/// Renders a JSON report; newline-terminated, deterministic.
pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

/// Minimal-unstable report in the `stablecrd/1` schema. Both the generator
/// and the brute-force oracle emit this shape, so results from either can be
/// diffed or loaded as a cache for batch checking.
pub fn min_unstable_report(
    crd: &Crd,
    elements: &[Configuration],
    truncated: bool,
    complete_up_to: Option<u64>,
    comparisons: u64,
    predecessor_computations: u64,
    layers: &[(u64, u64)],
) -> Value {
    json!({
        "schema": SCHEMA,
        "kind": "min-unstable",
        "species": crd.species().names(),
        "crd_sha256": crd_content_hash(crd),
        "truncated": truncated,
        "complete_up_to": complete_up_to,
        "min_unstable": configs_json(elements, crd.species()),
        "stats": {
            "comparisons": comparisons,
            "predecessor_computations": predecessor_computations,
            "layers": layers.iter().map(|&(k, n)| json!([k, n])).collect::<Vec<_>>(),
        },
    })
}

/// A minimal-unstable report read back from JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinuCache {
    pub species: Vec<String>,
    pub crd_sha256: String,
    pub elements: Vec<Configuration>,
    pub truncated: bool,
    pub complete_up_to: Option<u64>,
}

fn cache_error(message: impl Into<String>) -> ParseError {
    ParseError { diagnostics: vec![Diagnostic { line: 1, column: 1, message: message.into() }] }
}

/// Reads a `min-unstable` report produced by [`min_unstable_report`].
pub fn read_minu_json(text: &str) -> Result<MinuCache, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError {
        diagnostics: vec![Diagnostic {
            line: e.line().max(1),
            column: e.column().max(1),
            message: e.to_string(),
        }],
    })?;
    let schema = value.get("schema").and_then(Value::as_str);
    if schema != Some(SCHEMA) {
        return Err(cache_error(format!("unsupported schema, expected \"{SCHEMA}\"")));
    }
    if value.get("kind").and_then(Value::as_str) != Some("min-unstable") {
        return Err(cache_error("not a min-unstable report"));
    }
    let species: Vec<String> = value
        .get("species")
        .and_then(Value::as_array)
        .ok_or_else(|| cache_error("missing species list"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| cache_error("species entries must be strings"))?;
    let table = SpeciesTable::new(species.clone())
        .map_err(|e| cache_error(format!("bad species list: {e}")))?;
    let crd_sha256 = value
        .get("crd_sha256")
        .and_then(Value::as_str)
        .ok_or_else(|| cache_error("missing crd_sha256"))?
        .to_string();
    let truncated = value
        .get("truncated")
        .and_then(Value::as_bool)
        .ok_or_else(|| cache_error("missing truncated flag"))?;
    let complete_up_to = match value.get("complete_up_to") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| cache_error("bad complete_up_to"))?),
    };
    let elements = value
        .get("min_unstable")
        .and_then(Value::as_array)
        .ok_or_else(|| cache_error("missing min_unstable array"))?
        .iter()
        .map(|v| json_to_config(v, &table))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MinuCache { species, crd_sha256, elements, truncated, complete_up_to })
}

/// Reads a sparse configuration object back into a count vector.
pub fn json_to_config(value: &Value, species: &SpeciesTable) -> Result<Configuration, ParseError> {
    let obj = value.as_object().ok_or_else(|| cache_error("configuration must be an object"))?;
    let mut counts = vec![0u64; species.len()];
    for (name, v) in obj {
        let pos = species
            .position(name)
            .ok_or_else(|| cache_error(format!("unknown species `{name}` in configuration")))?;
        let n = v
            .as_u64()
            .filter(|&n| n > 0)
            .ok_or_else(|| cache_error(format!("count for `{name}` must be a positive integer")))?;
        counts[pos] = n;
    }
    Configuration::new(counts).map_err(|e| cache_error(e.to_string()))
}
