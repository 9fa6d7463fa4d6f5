//! Plain-text hypergraph files.
//!
//! ```text
//! # comment
//! graph meta-system
//! node 0 state
//! node 1 state
//! link 2 transition 0 1 | 1 1 0 1
//! ```
//!
//! `-` stands for "no label"; weights follow a `|`. Atoms must be declared
//! before they are targeted. Type names escape `\`, space and tab as `\\`,
//! `\s`, `\t`.

use std::fmt::Write;

use cogsyn_core::hypergraph::{AtomId, AtomKind, Hypergraph, Label};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace(' ', "\\s")
        .replace('\t', "\\t")
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            's' => ' ',
            't' => '\t',
            _ => return None,
        });
    }
    Some(out)
}

fn label_text(label: Option<&Label>) -> (String, String) {
    match label {
        None => ("-".into(), String::new()),
        Some(l) => {
            let w: Vec<String> = l.weights().iter().map(|w| format!("{w}")).collect();
            let suffix = if w.is_empty() {
                String::new()
            } else {
                format!(" | {}", w.join(" "))
            };
            (escape(l.type_name()), suffix)
        }
    }
}

pub fn write_graph(g: &Hypergraph) -> String {
    let mut out = String::new();
    if let Some(name) = g.name() {
        writeln!(out, "graph {}", escape(name)).expect("string write");
    }
    for n in g.nodes() {
        let (ty, w) = label_text(n.label());
        writeln!(out, "node {} {ty}{w}", n.id()).expect("string write");
    }
    for l in g.links_topological() {
        let a = g.atom(l).expect("listed");
        let (ty, w) = label_text(a.label());
        let targets: Vec<String> = a.targets().iter().map(|t| t.to_string()).collect();
        writeln!(out, "link {l} {ty} {}{w}", targets.join(" ")).expect("string write");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Hypergraph, FormatError> {
    let mut g = Hypergraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |m: &str| FormatError {
            line,
            message: m.into(),
        };
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (main, weights) = match body.split_once('|') {
            Some((m, w)) => (m, Some(w)),
            None => (body, None),
        };
        let mut tokens = main.split_whitespace();
        let kind = tokens.next().expect("non-empty line");
        if kind == "graph" {
            let name = tokens
                .next()
                .and_then(unescape)
                .ok_or_else(|| err("graph needs a name"))?;
            g.set_name(Some(name));
            continue;
        }
        let kind = match kind {
            "node" => AtomKind::Node,
            "link" => AtomKind::Link,
            other => return Err(err(&format!("unknown record `{other}`"))),
        };
        let id: u64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("bad atom id"))?;
        let ty = tokens.next().ok_or_else(|| err("missing type"))?;
        let targets = tokens
            .map(|t| {
                t.parse()
                    .map(AtomId)
                    .map_err(|_| err(&format!("bad target `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let weights = match weights {
            None => Vec::new(),
            Some(w) => w
                .split_whitespace()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| err(&format!("bad weight `{x}`")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let label = match ty {
            "-" if weights.is_empty() => None,
            "-" => return Err(err("weights need a type")),
            t => Some(
                Label::new(unescape(t).ok_or_else(|| err("bad escape"))?, weights)
                    .map_err(|e| err(&e.to_string()))?,
            ),
        };
        g.insert_atom(AtomId(id), kind, targets, label)
            .map_err(|e| err(&e.to_string()))?;
    }
    Ok(g)
}
