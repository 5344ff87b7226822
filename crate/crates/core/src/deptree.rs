//! Dependency-annotated utterances and their CoNLL-U representation.
//!
//! A [`DepTree`] holds the syntactic words of one utterance. Multiword
//! token ranges (`3-4`) and empty nodes (`5.1`) are skipped while reading,
//! so token `i` always sits at index `i - 1` of a valid tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Key/value morphological features, kept sorted.
pub type Features = BTreeMap<String, String>;

/// Comment metadata (`# key = value`).
pub type Meta = BTreeMap<String, String>;

pub const META_DIALOGUE_ID: &str = "dialogue_id";
pub const META_SPEAKER: &str = "speaker";
pub const META_UTTERANCE_ID: &str = "utterance_id";

/// A syntactic word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: Features,
    /// Governing token id, `0` for the virtual root.
    pub head: usize,
    pub deprel: String,
    /// DEPS and MISC are carried through untouched.
    pub deps: Option<String>,
    pub misc: Option<String>,
}

impl Token {
    /// A bare token with placeholder annotation.
    pub fn new(id: usize, form: impl Into<String>, upos: impl Into<String>, head: usize) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: None,
            upos: upos.into(),
            xpos: None,
            feats: Features::new(),
            head,
            deprel: "dep".to_owned(),
            deps: None,
            misc: None,
        }
    }

    pub fn with_feat(mut self, key: &str, value: &str) -> Self {
        self.feats.insert(key.to_owned(), value.to_owned());
        self
    }

    pub fn with_deprel(mut self, deprel: &str) -> Self {
        self.deprel = deprel.to_owned();
        self
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }
}

/// One utterance's dependency structure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepTree {
    pub tokens: Vec<Token>,
    pub meta: Meta,
}

impl DepTree {
    pub fn new(tokens: Vec<Token>, meta: Meta) -> Self {
        DepTree { tokens, meta }
    }

    /// Builds a tree with forms `w1..wN`, UPOS `X` and relation `dep`
    /// from a head array (`heads[i]` is the head of token `i + 1`).
    pub fn from_heads(heads: &[usize]) -> Self {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, &h)| Token::new(i + 1, format!("w{}", i + 1), "X", h))
            .collect();
        DepTree::new(tokens, Meta::new())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn with_meta(mut self, key: &str, value: &str) -> Self {
        self.meta.insert(key.to_owned(), value.to_owned());
        self
    }

    /// Dependents of every node, indexed by node id (0 is the virtual root).
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.tokens.len() + 1];
        for token in &self.tokens {
            if token.head < children.len() {
                children[token.head].push(token.id);
            }
        }
        children
    }

    /// Checks every tree invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let violations = find_violations(&self.heads(), &self.tokens);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }
}

/// A single broken tree invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoRoot,
    MultipleRoots { ids: Vec<usize> },
    HeadOutOfRange { id: usize, head: usize },
    SelfHead { id: usize },
    Cycle { ids: Vec<usize> },
    NonSequentialIds { expected: usize, found: usize },
    EmptyField { id: usize, field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRoot => write!(f, "no root: no token has head 0"),
            Violation::MultipleRoots { ids } => {
                write!(f, "multiple roots: tokens {}", join_ids(ids))
            }
            Violation::HeadOutOfRange { id, head } => {
                write!(f, "head out of range: token {id} has head {head}")
            }
            Violation::SelfHead { id } => write!(f, "self-loop: token {id} heads itself"),
            Violation::Cycle { ids } => write!(f, "cycle: tokens {}", join_ids(ids)),
            Violation::NonSequentialIds { expected, found } => {
                write!(f, "non-sequential ids: expected {expected}, found {found}")
            }
            Violation::EmptyField { id, field } => {
                write!(f, "empty field: token {id} has empty {field}")
            }
        }
    }
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// All invariant violations found in one tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

fn find_violations(heads: &[usize], tokens: &[Token]) -> Vec<Violation> {
    let n = heads.len();
    let mut violations = Vec::new();

    for (i, token) in tokens.iter().enumerate() {
        if token.id != i + 1 {
            violations.push(Violation::NonSequentialIds {
                expected: i + 1,
                found: token.id,
            });
            // Index-based checks below would be meaningless.
            return violations;
        }
        if token.form.is_empty() {
            violations.push(Violation::EmptyField {
                id: token.id,
                field: "form",
            });
        }
        if token.upos.is_empty() {
            violations.push(Violation::EmptyField {
                id: token.id,
                field: "upos",
            });
        }
    }

    let roots: Vec<usize> = (1..=n).filter(|&id| heads[id - 1] == 0).collect();
    match roots.len() {
        0 => violations.push(Violation::NoRoot),
        1 => {}
        _ => violations.push(Violation::MultipleRoots { ids: roots }),
    }

    for id in 1..=n {
        let head = heads[id - 1];
        if head > n {
            violations.push(Violation::HeadOutOfRange { id, head });
        } else if head == id {
            violations.push(Violation::SelfHead { id });
        }
    }

    for cycle in find_cycles(heads) {
        if cycle.len() > 1 {
            violations.push(Violation::Cycle { ids: cycle });
        }
    }

    violations
}

/// Distinct cycles in a head array, each as a sorted id list. Self-loops
/// come out as one-element cycles.
pub(crate) fn find_cycles(heads: &[usize]) -> Vec<Vec<usize>> {
    const UNSEEN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;

    let n = heads.len();
    let mut state = vec![UNSEEN; n + 1];
    let mut cycles = Vec::new();

    for start in 1..=n {
        if state[start] != UNSEEN {
            continue;
        }
        let mut path = Vec::new();
        let mut node = start;
        loop {
            if node == 0 || node > n || state[node] == DONE {
                break;
            }
            if state[node] == ACTIVE {
                let pos = path.iter().position(|&v| v == node).unwrap();
                let mut cycle = path[pos..].to_vec();
                cycle.sort_unstable();
                cycles.push(cycle);
                break;
            }
            state[node] = ACTIVE;
            path.push(node);
            node = heads[node - 1];
        }
        for v in path {
            state[v] = DONE;
        }
    }

    cycles
}

/// Returns the tree unchanged if it is a well-formed dependency tree.
pub fn validate_tree(tree: DepTree) -> Result<DepTree, ValidationReport> {
    tree.validate().map(|()| tree)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid token id {value:?}")]
    InvalidId { line: usize, value: String },
    #[error("line {line}: invalid head {value:?}")]
    InvalidHead { line: usize, value: String },
    #[error("line {line}: token {id} is its own head")]
    SelfHead { line: usize, id: usize },
    #[error("line {line}: duplicate token id {id}")]
    DuplicateId { line: usize, id: usize },
    #[error("line {line}: malformed feature {value:?}")]
    InvalidFeature { line: usize, value: String },
}

enum LineId {
    Word(usize),
    /// Multiword range or empty node.
    Skipped,
}

fn parse_id(field: &str, line: usize) -> Result<LineId, ParseError> {
    let invalid = || ParseError::InvalidId {
        line,
        value: field.to_owned(),
    };
    if field.contains('-') || field.contains('.') {
        return Ok(LineId::Skipped);
    }
    match field.parse::<usize>() {
        Ok(0) | Err(_) => Err(invalid()),
        Ok(id) => Ok(LineId::Word(id)),
    }
}

fn optional(field: &str) -> Option<String> {
    if field == "_" {
        None
    } else {
        Some(field.to_owned())
    }
}

fn parse_feats(field: &str, line: usize) -> Result<Features, ParseError> {
    let mut feats = Features::new();
    if field == "_" || field.is_empty() {
        return Ok(feats);
    }
    for pair in field.split('|') {
        match pair.split_once('=') {
            Some((k, v)) if !k.is_empty() => {
                feats.insert(k.to_owned(), v.to_owned());
            }
            _ => {
                return Err(ParseError::InvalidFeature {
                    line,
                    value: pair.to_owned(),
                })
            }
        }
    }
    Ok(feats)
}

fn parse_comment(comment: &str, meta: &mut Meta) {
    let body = comment.trim_start_matches('#').trim();
    if body.is_empty() {
        return;
    }
    match body.split_once('=') {
        Some((k, v)) => {
            meta.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        None => {
            meta.insert(body.to_owned(), String::new());
        }
    }
}

/// Reads every sentence block of a CoNLL-U document, in order.
///
/// Trees are not validated here; see [`validate_tree`].
pub fn parse_conllu(text: &str) -> Result<Vec<DepTree>, ParseError> {
    let mut trees = Vec::new();
    let mut current = DepTree::default();
    let mut seen_ids = BTreeSet::new();
    let mut in_block = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');

        if line.trim().is_empty() {
            if in_block {
                trees.push(std::mem::take(&mut current));
                seen_ids.clear();
                in_block = false;
            }
            continue;
        }
        in_block = true;

        if line.starts_with('#') {
            parse_comment(line, &mut current.meta);
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ParseError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }

        let id = match parse_id(cols[0], line_no)? {
            LineId::Word(id) => id,
            LineId::Skipped => continue,
        };
        if !seen_ids.insert(id) {
            return Err(ParseError::DuplicateId { line: line_no, id });
        }
        let head = cols[6]
            .parse::<usize>()
            .map_err(|_| ParseError::InvalidHead {
                line: line_no,
                value: cols[6].to_owned(),
            })?;
        if head == id {
            return Err(ParseError::SelfHead { line: line_no, id });
        }

        current.tokens.push(Token {
            id,
            form: cols[1].to_owned(),
            lemma: optional(cols[2]),
            upos: cols[3].to_owned(),
            xpos: optional(cols[4]),
            feats: parse_feats(cols[5], line_no)?,
            head,
            deprel: cols[7].to_owned(),
            deps: optional(cols[8]),
            misc: optional(cols[9]),
        });
    }

    if in_block {
        trees.push(current);
    }
    Ok(trees)
}

fn or_underscore(value: &Option<String>) -> &str {
    value.as_deref().unwrap_or("_")
}

fn format_feats(feats: &Features) -> String {
    if feats.is_empty() {
        return "_".to_owned();
    }
    feats
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("|")
}

/// Writes trees as CoNLL-U, each block followed by a blank line.
pub fn serialize_conllu(trees: &[DepTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        for (key, value) in &tree.meta {
            if value.is_empty() {
                out.push_str(&format!("# {key}\n"));
            } else {
                out.push_str(&format!("# {key} = {value}\n"));
            }
        }
        for t in &tree.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                t.id,
                t.form,
                or_underscore(&t.lemma),
                t.upos,
                or_underscore(&t.xpos),
                format_feats(&t.feats),
                t.head,
                t.deprel,
                or_underscore(&t.deps),
                or_underscore(&t.misc),
            ));
        }
        out.push('\n');
    }
    out
}
