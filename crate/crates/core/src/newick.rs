//! Newick input and output.
//!
//! Input files hold one tree per line. Lines starting with `#` are comments.
//! Labels are alphanumeric plus `_` and `.`; branch lengths and internal node
//! labels are accepted and dropped.
//!
//! In rooted mode the root leaf is never written by the user. Reading a tree
//! attaches it above the Newick root. A serialized rooted forest writes the
//! component containing the root leaf first with the root leaf left implicit,
//! or as a bare `ρ;` when the root leaf is isolated.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use log::warn;
use thiserror::Error;

use crate::forest::{Forest, ForestBuilder, ForestError, VertexId};
use crate::instance::Instance;
use crate::label::{natural_cmp, LabelError, LabelTable, ROOT_NAME};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NewickError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {source}")]
    Label {
        line: usize,
        #[source]
        source: LabelError,
    },
    #[error("line {line}: duplicate leaf label `{name}`")]
    DuplicateLeaf { line: usize, name: String },
    #[error("line {line}: label set differs from the first tree")]
    LabelSetMismatch { line: usize },
    #[error("line {line}: label `{ROOT_NAME}` is reserved in rooted mode")]
    ReservedRoot { line: usize },
    #[error("no trees in input")]
    Empty,
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Parsed tree before label ids are assigned.
#[derive(Debug)]
struct Node {
    label: Option<String>,
    children: Vec<Node>,
}

impl Node {
    fn leaf_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.children.is_empty() {
            if let Some(l) = &self.label {
                out.push(l);
            }
        }
        for c in &self.children {
            c.leaf_names(out);
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

fn is_label_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, msg: impl Into<String>) -> NewickError {
        NewickError::Syntax {
            line: self.line,
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), NewickError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.err(format!("expected `{c}`, found `{x}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of line"))),
        }
    }

    fn label(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && is_label_char(self.chars[self.pos]) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn branch_length(&mut self) -> Result<(), NewickError> {
        if self.peek() != Some(':') {
            return Ok(());
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || "+-.eE".contains(self.chars[self.pos]))
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text.parse::<f64>().is_err() {
            return Err(self.err("malformed branch length"));
        }
        warn!("line {}: branch length {text} ignored", self.line);
        Ok(())
    }

    fn subtree(&mut self) -> Result<Node, NewickError> {
        if self.peek() == Some('(') {
            self.pos += 1;
            let mut children = vec![self.subtree()?];
            loop {
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        children.push(self.subtree()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(self.err(format!("expected `,` or `)`, found `{c}`"))),
                    None => return Err(self.err("unbalanced parenthesis")),
                }
            }
            if let Some(l) = self.label() {
                warn!("line {}: internal node label `{l}` ignored", self.line);
            }
            self.branch_length()?;
            Ok(Node { label: None, children })
        } else {
            let Some(l) = self.label() else {
                return Err(match self.peek() {
                    Some(c) => self.err(format!("expected a label, found `{c}`")),
                    None => self.err("expected a label, found end of line"),
                });
            };
            self.branch_length()?;
            Ok(Node {
                label: Some(l),
                children: Vec::new(),
            })
        }
    }

    fn tree(&mut self) -> Result<Node, NewickError> {
        let node = self.subtree()?;
        self.expect(';')?;
        if let Some(c) = self.peek() {
            return Err(self.err(format!("unexpected `{c}` after `;`")));
        }
        Ok(node)
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_lines(text: &str) -> Result<Vec<(usize, Node)>, NewickError> {
    let trees = content_lines(text)
        .map(|(line, l)| Parser::new(l, line).tree().map(|t| (line, t)))
        .collect::<Result<Vec<_>, _>>()?;
    if trees.is_empty() {
        return Err(NewickError::Empty);
    }
    Ok(trees)
}

fn check_leaves(line: usize, node: &Node, rooted: bool) -> Result<Vec<String>, NewickError> {
    let mut names = Vec::new();
    node.leaf_names(&mut names);
    if rooted && names.contains(&ROOT_NAME) {
        return Err(NewickError::ReservedRoot { line });
    }
    let mut sorted: Vec<&str> = names.clone();
    sorted.sort_by(|a, b| natural_cmp(a, b));
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(NewickError::DuplicateLeaf {
                line,
                name: w[0].to_string(),
            });
        }
    }
    Ok(names.into_iter().map(String::from).collect())
}

fn add_node(
    b: &mut ForestBuilder,
    table: &LabelTable,
    node: &Node,
    line: usize,
) -> Result<VertexId, NewickError> {
    if node.children.is_empty() {
        let name = node.label.as_deref().unwrap_or_default();
        let id = table
            .id_of(name)
            .ok_or(NewickError::LabelSetMismatch { line })?;
        return Ok(b.add_vertex(Some(id)));
    }
    let v = b.add_vertex(None);
    for c in &node.children {
        let w = add_node(b, table, c, line)?;
        b.add_edge(v, w);
    }
    Ok(v)
}

/// Builds one forest from parsed components. In rooted mode the root leaf
/// sits above the first component, unless that component is the bare root.
fn build_forest(
    table: &Arc<LabelTable>,
    components: &[(usize, Node)],
    rooted: bool,
) -> Result<Forest, NewickError> {
    let mut b = ForestBuilder::new(Arc::clone(table), rooted);
    for (i, (line, node)) in components.iter().enumerate() {
        let bare_root = rooted && i == 0 && node.children.is_empty() && node.label.as_deref() == Some(ROOT_NAME);
        if bare_root {
            b.add_vertex(table.root());
            continue;
        }
        let top = add_node(&mut b, table, node, *line)?;
        if rooted && i == 0 {
            let r = b.add_vertex(table.root());
            b.add_edge(r, top);
        }
    }
    Ok(b.build()?)
}

/// Parses a single tree into its own label table.
pub fn parse_tree(text: &str, rooted: bool) -> Result<Forest, NewickError> {
    let trees = parse_lines(text)?;
    let (line, node) = &trees[0];
    if trees.len() > 1 {
        return Err(NewickError::Syntax {
            line: trees[1].0,
            col: 1,
            msg: "expected a single tree".into(),
        });
    }
    let names = check_leaves(*line, node, rooted)?;
    let table = LabelTable::new(names, rooted).map_err(|source| NewickError::Label { line: *line, source })?;
    build_forest(&Arc::new(table), &trees, rooted)
}

/// Parses an instance file: one tree per line over a common label set.
pub fn parse_instance(text: &str, rooted: bool) -> Result<Instance, NewickError> {
    let trees = parse_lines(text)?;
    let mut table: Option<Arc<LabelTable>> = None;
    let mut forests = Vec::with_capacity(trees.len());
    for (line, node) in trees {
        let mut names = check_leaves(line, &node, rooted)?;
        let table = match &table {
            Some(t) => {
                let expected = t.base_len() - usize::from(rooted);
                if names.len() != expected {
                    return Err(NewickError::LabelSetMismatch { line });
                }
                Arc::clone(t)
            }
            None => {
                names.sort_by(|a, b| natural_cmp(a, b));
                let t = Arc::new(
                    LabelTable::new(names, rooted).map_err(|source| NewickError::Label { line, source })?,
                );
                table = Some(Arc::clone(&t));
                t
            }
        };
        forests.push(build_forest(&table, &[(line, node)], rooted)?);
    }
    Ok(Instance::new(forests).expect("forests share one table"))
}

/// Parses a multi-line forest (one component per line) into its own table.
pub fn parse_forest(text: &str, rooted: bool) -> Result<Forest, NewickError> {
    let comps = parse_lines(text)?;
    let mut names = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, (line, node)) in comps.iter().enumerate() {
        let bare_root = rooted && i == 0 && node.children.is_empty() && node.label.as_deref() == Some(ROOT_NAME);
        if bare_root {
            continue;
        }
        for n in check_leaves(*line, node, rooted)? {
            if seen.insert(n.clone(), *line).is_some() {
                return Err(NewickError::DuplicateLeaf { line: *line, name: n });
            }
            names.push(n);
        }
    }
    let table = LabelTable::new(names, rooted).map_err(|source| NewickError::Label {
        line: comps[0].0,
        source,
    })?;
    build_forest(&Arc::new(table), &comps, rooted)
}

/// Parses a multi-line forest against an existing label table, e.g. a
/// certificate printed for an instance.
pub fn parse_forest_in(text: &str, table: &Arc<LabelTable>) -> Result<Forest, NewickError> {
    let rooted = table.is_rooted();
    let comps = parse_lines(text)?;
    for (i, (line, node)) in comps.iter().enumerate() {
        let bare_root = rooted && i == 0 && node.children.is_empty() && node.label.as_deref() == Some(ROOT_NAME);
        if !bare_root {
            check_leaves(*line, node, rooted)?;
        }
    }
    build_forest(table, &comps, rooted).map_err(|e| match e {
        NewickError::Forest(ForestError::DuplicateLabel(_)) => NewickError::DuplicateLeaf {
            line: comps[0].0,
            name: "?".into(),
        },
        other => other,
    })
}

/// One Newick line per component, in canonical order.
pub fn serialize(f: &Forest) -> String {
    let mut out = String::new();
    let labels = f.labels();
    for (_, anchor) in f.anchored_components() {
        let start = if f.is_rooted() {
            match f.label_of(anchor) {
                Some(l) if Some(l) == labels.root() => match f.children(anchor).next() {
                    Some(child) => child,
                    None => {
                        out.push_str(ROOT_NAME);
                        out.push_str(";\n");
                        continue;
                    }
                },
                _ => anchor,
            }
        } else {
            // hang the component from the neighbour of its smallest leaf
            match f.neighbors(anchor).next() {
                Some(n) if f.label_of(n).is_some() => {
                    let _ = writeln!(out, "({},{});", labels.name(f.label_of(anchor).unwrap()), labels.name(f.label_of(n).unwrap()));
                    continue;
                }
                Some(n) => n,
                None => anchor,
            }
        };
        let mut kids = f.ordered_children(start);
        if f.is_rooted() && start != anchor {
            // the root leaf is implicit
            if let Some(ks) = kids.get_mut(&start) {
                ks.retain(|k| *k != anchor);
            }
        }
        write_node(f, start, &kids, &mut out);
        out.push_str(";\n");
    }
    out.pop();
    out
}

/// Instance text: one tree per line with a trailing newline.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    for f in inst.forests() {
        out.push_str(&serialize(f));
        out.push('\n');
    }
    out
}

fn write_node(f: &Forest, v: VertexId, kids: &HashMap<VertexId, Vec<VertexId>>, out: &mut String) {
    match kids.get(&v) {
        Some(ks) if !ks.is_empty() => {
            out.push('(');
            for (i, k) in ks.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_node(f, *k, kids, out);
            }
            out.push(')');
            if let Some(l) = f.label_of(v) {
                let _ = write!(out, "{}", f.labels().name(l));
            }
        }
        _ => {
            if let Some(l) = f.label_of(v) {
                out.push_str(f.labels().name(l));
            }
        }
    }
}
