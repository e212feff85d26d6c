//! Text formats for digraphs and list instances.
//!
//! A digraph is a header line `n m` followed by `m` lines `u v`, one per arc
//! u->v. An instance is a digraph followed by optional lines `v: t1 t2 ...`;
//! a vertex without such a line gets the full list. Lines starting with `#`
//! and blank lines are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::digraph::Digraph;
use crate::solver::ListInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers(line: usize, s: &str, want: usize) -> Result<Vec<usize>, ParseError> {
    let v = s
        .split_whitespace()
        .map(|w| w.parse::<usize>().map_err(|_| err(line, format!("expected a non-negative integer, found `{w}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != want {
        return Err(err(line, format!("expected {want} integers, found {}", v.len())));
    }
    Ok(v)
}

fn read_digraph<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    last: usize,
) -> Result<Digraph, ParseError> {
    let (hl, header) = lines.next().ok_or_else(|| err(last + 1, "missing header `n m`"))?;
    let nm = numbers(hl, header, 2)?;
    let (n, m) = (nm[0], nm[1]);
    let mut g = Digraph::empty(n);
    for k in 0..m {
        let (l, s) = lines.next().ok_or_else(|| err(last + 1, format!("expected {m} arcs, found {k}")))?;
        let uv = numbers(l, s, 2)?;
        g.add_arc(uv[0], uv[1]).map_err(|e| err(l, e.to_string()))?;
    }
    Ok(g)
}

pub fn parse_digraph(text: &str) -> Result<Digraph, ParseError> {
    let last = text.lines().count();
    let mut lines = content_lines(text);
    let g = read_digraph(&mut lines, last)?;
    if let Some((l, _)) = lines.next() {
        return Err(err(l, "unexpected content after the arcs"));
    }
    Ok(g)
}

pub fn write_digraph(g: &Digraph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.arcs().len());
    for &(u, v) in g.arcs() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

/// Parses an instance whose lists range over `0..t_n`.
pub fn parse_instance(text: &str, t_n: usize) -> Result<ListInstance, ParseError> {
    let last = text.lines().count();
    let mut lines = content_lines(text);
    let g = read_digraph(&mut lines, last)?;
    let mut lists: Vec<Option<Vec<usize>>> = vec![None; g.n()];
    for (l, s) in lines {
        let (head, tail) = s.split_once(':').ok_or_else(|| err(l, "expected `v: t1 t2 ...`"))?;
        let v = numbers(l, head, 1)?[0];
        if v >= g.n() {
            return Err(err(l, format!("vertex {v} out of range for {} vertices", g.n())));
        }
        if lists[v].is_some() {
            return Err(err(l, format!("second list for vertex {v}")));
        }
        let items = numbers(l, tail, tail.split_whitespace().count())?;
        if let Some(&x) = items.iter().find(|&&x| x >= t_n) {
            return Err(err(l, format!("template vertex {x} out of range for {t_n} vertices")));
        }
        lists[v] = Some(items);
    }
    let lists = lists.into_iter().map(|l| l.unwrap_or_else(|| (0..t_n).collect())).collect();
    Ok(ListInstance::new(g, lists))
}

/// Writes every list explicitly.
pub fn write_instance(inst: &ListInstance) -> String {
    let mut s = write_digraph(&inst.g);
    for (v, l) in inst.lists.iter().enumerate() {
        write!(s, "{v}:").unwrap();
        for x in l {
            write!(s, " {x}").unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digraph_round_trip() {
        let text = "# a Z3\n3 2\n0 1\n\n2 1\n";
        let g = parse_digraph(text).unwrap();
        assert_eq!(g.sorted_arcs(), vec![(0, 1), (2, 1)]);
        assert_eq!(parse_digraph(&write_digraph(&g)).unwrap(), g);
    }

    #[test]
    fn errors_name_lines() {
        assert_eq!(parse_digraph("2 1\n0 x\n").unwrap_err().line, 2);
        assert_eq!(parse_digraph("# c\n2 2\n0 1\n").unwrap_err().line, 4);
        assert_eq!(parse_digraph("2 1\n0 0\n").unwrap_err().line, 2);
        assert_eq!(parse_digraph("2 1\n0 1\n1 0\n").unwrap_err().line, 3);
        assert_eq!(parse_digraph("").unwrap_err().line, 1);
        assert!(parse_digraph("3\n").unwrap_err().to_string().starts_with("line 1:"));
    }

    #[test]
    fn instance_lists() {
        let inst = parse_instance("3 2\n0 1\n1 2\n1: 0 2\n2:\n", 4).unwrap();
        assert_eq!(inst.lists, vec![vec![0, 1, 2, 3], vec![0, 2], vec![]]);
        assert_eq!(parse_instance(&write_instance(&inst), 4).unwrap(), inst);
        assert_eq!(parse_instance("1 0\n0: 5\n", 4).unwrap_err().line, 2);
        assert_eq!(parse_instance("1 0\n3: 0\n", 4).unwrap_err().line, 2);
    }
}
