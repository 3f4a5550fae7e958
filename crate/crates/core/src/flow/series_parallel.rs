//! Series-parallel composition terms, their realizations and duals.

use std::fmt;

use rand::Rng;

use super::Multigraph;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Binary composition tree; leaves are numbered left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpTerm {
    Edge,
    Series(Box<SpTerm>, Box<SpTerm>),
    Parallel(Box<SpTerm>, Box<SpTerm>),
}

impl SpTerm {
    pub fn series(a: SpTerm, b: SpTerm) -> SpTerm {
        SpTerm::Series(Box::new(a), Box::new(b))
    }

    pub fn parallel(a: SpTerm, b: SpTerm) -> SpTerm {
        SpTerm::Parallel(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> usize {
        match self {
            SpTerm::Edge => 1,
            SpTerm::Series(a, b) | SpTerm::Parallel(a, b) => a.leaves() + b.leaves(),
        }
    }

    /// Parse `e`, `S(t,t,…)` or `P(t,t,…)`; n-ary nodes associate to the right.
    pub fn parse(text: &str) -> Result<SpTerm> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let term = parse_term(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::MalformedTerm(format!("trailing input at {pos}")));
        }
        Ok(term)
    }

    /// Uniformly random shape split and operator labels with `leaves` leaves.
    pub fn random(leaves: usize, rng: &mut impl Rng) -> Result<SpTerm> {
        if leaves == 0 {
            return Err(Error::InvalidParameter("a term needs at least one leaf".into()));
        }
        fn build(k: usize, rng: &mut impl Rng) -> SpTerm {
            if k == 1 {
                return SpTerm::Edge;
            }
            let left = rng.random_range(1..k);
            let (a, b) = (build(left, rng), build(k - left, rng));
            if rng.random_bool(0.5) {
                SpTerm::series(a, b)
            } else {
                SpTerm::parallel(a, b)
            }
        }
        Ok(build(leaves, rng))
    }
}

fn parse_term(c: &[char], pos: &mut usize) -> Result<SpTerm> {
    match c.get(*pos) {
        Some('e') => {
            *pos += 1;
            Ok(SpTerm::Edge)
        }
        Some(&op @ ('S' | 'P')) => {
            *pos += 1;
            if c.get(*pos) != Some(&'(') {
                return Err(Error::MalformedTerm(format!("expected '(' at {pos}")));
            }
            *pos += 1;
            let mut parts = vec![parse_term(c, pos)?];
            loop {
                match c.get(*pos) {
                    Some(',') => {
                        *pos += 1;
                        parts.push(parse_term(c, pos)?);
                    }
                    Some(')') => {
                        *pos += 1;
                        break;
                    }
                    _ => return Err(Error::MalformedTerm(format!("expected ',' or ')' at {pos}"))),
                }
            }
            if parts.len() < 2 {
                return Err(Error::MalformedTerm("composition needs two operands".into()));
            }
            let mut acc = parts.pop().unwrap();
            while let Some(p) = parts.pop() {
                acc = if op == 'S' { SpTerm::series(p, acc) } else { SpTerm::parallel(p, acc) };
            }
            Ok(acc)
        }
        other => Err(Error::MalformedTerm(format!("unexpected {other:?} at {pos}"))),
    }
}

impl fmt::Display for SpTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpTerm::Edge => write!(f, "e"),
            SpTerm::Series(a, b) => write!(f, "S({a},{b})"),
            SpTerm::Parallel(a, b) => write!(f, "P({a},{b})"),
        }
    }
}

/// Realized multigraph with terminals `s = 0`, `t = 1`; leaf `i` is edge `i`,
/// stored in its st-direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpRealization {
    pub n: usize,
    pub s: Vertex,
    pub t: Vertex,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl SpRealization {
    pub fn multigraph(&self) -> Multigraph {
        Multigraph::new(self.n, self.edges.clone())
    }

    pub fn is_simple(&self) -> bool {
        let mut keys: Vec<_> = self.edges.iter().map(|&(a, b)| crate::graph::undirected(a, b)).collect();
        keys.sort_unstable();
        keys.windows(2).all(|w| w[0] != w[1])
    }

    /// The realization as a simple graph; parallel leaves are rejected.
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.n, &self.edges, self.s, self.t)
    }
}

pub fn sp_compose(term: &SpTerm) -> SpRealization {
    fn go(term: &SpTerm, a: Vertex, b: Vertex, next: &mut usize, edges: &mut Vec<(Vertex, Vertex)>) {
        match term {
            SpTerm::Edge => edges.push((a, b)),
            SpTerm::Series(l, r) => {
                let mid = *next;
                *next += 1;
                go(l, a, mid, next, edges);
                go(r, mid, b, next, edges);
            }
            SpTerm::Parallel(l, r) => {
                go(l, a, b, next, edges);
                go(r, a, b, next, edges);
            }
        }
    }
    let mut next = 2;
    let mut edges = Vec::with_capacity(term.leaves());
    go(term, 0, 1, &mut next, &mut edges);
    SpRealization { n: next, s: 0, t: 1, edges }
}

/// Swap series and parallel; leaf `i` of the dual is the dual edge of leaf `i`.
pub fn sp_dual(term: &SpTerm) -> SpTerm {
    match term {
        SpTerm::Edge => SpTerm::Edge,
        SpTerm::Series(a, b) => SpTerm::parallel(sp_dual(a), sp_dual(b)),
        SpTerm::Parallel(a, b) => SpTerm::series(sp_dual(a), sp_dual(b)),
    }
}

/// The direction in which every self-avoiding st-path traverses leaf `leaf`.
pub fn sp_st_direction(term: &SpTerm, leaf: usize) -> Result<(Vertex, Vertex)> {
    sp_compose(term)
        .edges
        .get(leaf)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("leaf {leaf} out of range")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_from_term() {
        let t = SpTerm::parse("P(e,S(e,e))").unwrap();
        let r = sp_compose(&t);
        assert_eq!(r.n, 3);
        assert_eq!(r.edges, vec![(0, 1), (0, 2), (2, 1)]);
        assert!(r.to_graph().is_ok());
    }

    #[test]
    fn duality() {
        let t = SpTerm::parse("S(e,e)").unwrap();
        assert_eq!(sp_dual(&t), SpTerm::parse("P(e,e)").unwrap());
        assert_eq!(sp_dual(&sp_dual(&t)), t);
        assert!(!sp_compose(&sp_dual(&t)).is_simple());
    }

    #[test]
    fn path_directions() {
        let t = SpTerm::parse("S(e,e,e)").unwrap();
        assert_eq!(sp_st_direction(&t, 0).unwrap(), (0, 2));
        assert_eq!(sp_st_direction(&t, 1).unwrap(), (2, 3));
        assert_eq!(sp_st_direction(&t, 2).unwrap(), (3, 1));
        assert!(sp_st_direction(&t, 3).is_err());
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "S(e)", "P(e,", "x", "S(e,e))", "Se,e)"] {
            assert!(matches!(SpTerm::parse(bad), Err(Error::MalformedTerm(_))), "{bad}");
        }
        let t = SpTerm::parse("P(S(e,e),e)").unwrap();
        assert_eq!(SpTerm::parse(&t.to_string()).unwrap(), t);
    }
}
