//! Trivalent graph enumeration and the genus-expansion potentials as formal
//! graph sums.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::supergraph::{automorphism_count, canonicalize, Canonical, EdgeLabel, GraphKey, LabeledGraph, LeafLabel, Op};

/// Formal linear combination of canonical graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSum {
    terms: BTreeMap<GraphKey, Rational>,
}

impl GraphSum {
    pub fn new() -> Self {
        GraphSum::default()
    }

    pub fn single(g: &LabeledGraph, c: Rational) -> Result<Self> {
        let mut s = GraphSum::new();
        s.add_graph(g, c)?;
        Ok(s)
    }

    /// Adds `c · g`, canonicalizing and applying the reordering sign.
    pub fn add_graph(&mut self, g: &LabeledGraph, c: Rational) -> Result<()> {
        match canonicalize(g)? {
            Canonical::Zero => Ok(()),
            Canonical::Term { key, negative } => {
                self.add_key(key, if negative { -c } else { c });
                Ok(())
            }
        }
    }

    /// Adds `c · key`; the key must be canonical.
    pub fn add_key(&mut self, key: GraphKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_sum(&mut self, o: &GraphSum, scale: &Rational) {
        for (k, c) in &o.terms {
            self.add_key(k.clone(), c * scale);
        }
    }

    pub fn scaled(&self, k: &Rational) -> GraphSum {
        let mut out = GraphSum::new();
        out.add_sum(self, k);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GraphKey, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &GraphKey) -> Rational {
        self.terms.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// One term per line: `coefficient<TAB>compact key`.
    pub fn to_text(&self) -> String {
        self.terms.iter().map(|(k, c)| format!("{}\t{}\n", rational::fmt(c), k.compact())).collect()
    }

    pub fn parse(text: &str) -> Result<GraphSum> {
        let mut s = GraphSum::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (c, k) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected coefficient<TAB>graph".into() })?;
            let c = rational::parse(c.trim()).ok_or_else(|| Error::Parse { line: i + 1, msg: format!("bad coefficient {c}") })?;
            // re-canonicalize so that hand-written keys are accepted
            s.add_graph(&GraphKey::decode(k)?.to_graph(), c)?;
        }
        Ok(s)
    }
}

impl fmt::Display for GraphSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Unlabeled shape used during generation: edges and leaf attachment points.
#[derive(Clone, Debug)]
struct Shape {
    n: usize,
    edges: Vec<(usize, usize)>,
    e0: Vec<usize>,
    e1: Option<usize>,
}

impl Shape {
    fn from_key(k: &GraphKey) -> Shape {
        let mut s = Shape { n: k.n as usize, edges: Vec::new(), e0: Vec::new(), e1: None };
        for e in &k.edges {
            s.edges.push((e.a as usize, e.b as usize));
        }
        for l in &k.leaves {
            match l.label {
                LeafLabel::E1 => s.e1 = Some(l.v as usize),
                _ => s.e0.push(l.v as usize),
            }
        }
        s
    }

    fn graph(&self) -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        for _ in 0..self.n {
            g.add_vertex();
        }
        if let Some(v) = self.e1 {
            g.add_leaf(v, LeafLabel::E1);
        }
        for &v in &self.e0 {
            g.add_leaf(v, LeafLabel::E0);
        }
        for &(a, b) in &self.edges {
            g.add_edge(a, b, EdgeLabel::new(Op::GmGp));
        }
        g
    }

    fn key(&self) -> GraphKey {
        match canonicalize(&self.graph()).expect("generated graphs are well formed") {
            Canonical::Term { key, .. } => key,
            Canonical::Zero => unreachable!("even labels never cancel"),
        }
    }

    /// New vertex on edge `i` carrying a fresh leaf.
    fn subdivide(&self, i: usize) -> Shape {
        let mut s = self.clone();
        let (a, b) = s.edges.remove(i);
        let w = s.n;
        s.n += 1;
        s.edges.push((a, w));
        s.edges.push((w, b));
        s.e0.push(w);
        s
    }

    /// Replaces E0 leaf `i` by an edge to a new vertex with two leaves.
    fn split_leaf(&self, i: usize) -> Shape {
        let mut s = self.clone();
        let v = s.e0.remove(i);
        let w = s.n;
        s.n += 1;
        s.edges.push((v, w));
        s.e0.push(w);
        s.e0.push(w);
        s
    }

    /// Joins E0 leaves `i < j` into an edge.
    fn join(&self, i: usize, j: usize) -> Shape {
        let mut s = self.clone();
        let b = s.e0.remove(j);
        let a = s.e0.remove(i);
        s.edges.push((a, b));
        s
    }
}

fn seed(descendant: bool) -> Shape {
    Shape { n: 1, edges: Vec::new(), e0: vec![0, 0, 0], e1: descendant.then_some(0) }
}

/// Iso classes of connected graphs of the given genus whose vertices are
/// trivalent, except one 4-valent vertex carrying the E1 leaf when
/// `descendant` is set.
fn classes(genus: usize, leaves: usize, descendant: bool, memo: &mut BTreeMap<(usize, usize), BTreeSet<GraphKey>>) -> BTreeSet<GraphKey> {
    if let Some(s) = memo.get(&(genus, leaves)) {
        return s.clone();
    }
    let mut out = BTreeSet::new();
    if genus == 0 {
        if leaves == 3 {
            out.insert(seed(descendant).key());
        } else if leaves > 3 {
            for k in classes(0, leaves - 1, descendant, memo) {
                let s = Shape::from_key(&k);
                for i in 0..s.edges.len() {
                    out.insert(s.subdivide(i).key());
                }
                for i in 0..s.e0.len() {
                    out.insert(s.split_leaf(i).key());
                }
            }
        }
    } else {
        for k in classes(genus - 1, leaves + 2, descendant, memo) {
            let s = Shape::from_key(&k);
            for i in 0..s.e0.len() {
                for j in i + 1..s.e0.len() {
                    out.insert(s.join(i, j).key());
                }
            }
        }
    }
    memo.insert((genus, leaves), out.clone());
    out
}

/// One representative per isomorphism class of connected trivalent graphs
/// with `GmGp` edges and `leaves` E0 leaves.
pub fn enumerate_trivalent(genus: usize, leaves: usize) -> Vec<LabeledGraph> {
    classes(genus, leaves, false, &mut BTreeMap::new()).iter().map(GraphKey::to_graph).collect()
}

/// Graphs with one E1 leaf on a 4-valent vertex, all other vertices
/// trivalent, genus 2 and `leaves` E0 leaves.
pub fn enumerate_descendant(leaves: usize) -> Vec<LabeledGraph> {
    classes(2, leaves, true, &mut BTreeMap::new()).iter().map(GraphKey::to_graph).collect()
}

fn weighted(graphs: Vec<LabeledGraph>, out: &mut GraphSum) -> Result<()> {
    for g in graphs {
        let aut = automorphism_count(&g, &[])?;
        out.add_graph(&g, Rational::new(1.into(), aut.into()))?;
    }
    Ok(())
}

/// `Σ_{n ≤ max_leaves} Σ_G G / |Aut G|` over trivalent graphs of the genus.
pub fn potential(genus: usize, max_leaves: usize) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    let mut memo = BTreeMap::new();
    for n in 0..=max_leaves {
        let gs = classes(genus, n, false, &mut memo).iter().map(GraphKey::to_graph).collect();
        weighted(gs, &mut out)?;
    }
    Ok(out)
}

/// The genus-2 descendant potential, enumerated directly; `max_leaves`
/// bounds the number of E0 leaves.
pub fn potential_descendant(max_leaves: usize) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    let mut memo = BTreeMap::new();
    for n in 0..=max_leaves {
        let gs = classes(2, n, true, &mut memo).iter().map(GraphKey::to_graph).collect();
        weighted(gs, &mut out)?;
    }
    Ok(out)
}

/// The same sum built by attaching an E1 leaf at every vertex of every
/// genus-2 term.
pub fn potential_descendant_by_insertion(max_leaves: usize) -> Result<GraphSum> {
    let base = potential(2, max_leaves)?;
    let mut out = GraphSum::new();
    for (k, c) in base.terms() {
        let g = k.to_graph();
        for v in 0..g.vertices.len() {
            let mut h = g.clone();
            h.add_leaf(v, LeafLabel::E1);
            out.add_graph(&h, c.clone())?;
        }
    }
    Ok(out)
}

/// Reference weights: `Σ 1/|Aut|` from labeled configurations, counted
/// independently of any canonical form.
pub fn labeled_weight(genus: usize, leaves: usize) -> Rational {
    let Some(v) = (2 * genus + leaves).checked_sub(2).filter(|&v| v > 0) else {
        return Rational::zero();
    };
    let halves = 3 * v;
    let count = count_configurations(v, halves, leaves);
    let mut denom = Rational::one();
    for k in 1..=v {
        denom *= rational::int(6 * k as i64);
    }
    for k in 1..=leaves {
        denom *= rational::int(k as i64);
    }
    Rational::from_integer(count.into()) / denom
}

/// Number of (leaf assignment, perfect matching) pairs on `3v` labeled
/// half-edges that give a connected graph; leaves are labeled.
fn count_configurations(v: usize, halves: usize, leaves: usize) -> u64 {
    let mut used = vec![false; halves];
    let mut partner = vec![usize::MAX; halves];
    fn connected(v: usize, partner: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..v).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        for (h, &p) in partner.iter().enumerate() {
            if p != usize::MAX && p > h {
                let (a, b) = (find(&mut parent, h / 3), find(&mut parent, p / 3));
                parent[a] = b;
            }
        }
        let r = find(&mut parent, 0);
        (0..v).all(|x| find(&mut parent, x) == r)
    }
    fn rec(v: usize, used: &mut [bool], partner: &mut [usize], leaves_left: usize) -> u64 {
        let Some(h) = used.iter().position(|u| !u) else {
            return if leaves_left == 0 && connected(v, partner) { 1 } else { 0 };
        };
        let mut total = 0;
        used[h] = true;
        // h is a leaf: any of the remaining leaf labels
        if leaves_left > 0 {
            total += leaves_left as u64 * rec(v, used, partner, leaves_left - 1);
        }
        for p in h + 1..used.len() {
            if !used[p] {
                used[p] = true;
                partner[h] = p;
                partner[p] = h;
                total += rec(v, used, partner, leaves_left);
                partner[h] = usize::MAX;
                partner[p] = usize::MAX;
                used[p] = false;
            }
        }
        used[h] = false;
        total
    }
    rec(v, &mut used, &mut partner, leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::supergraph::fixtures;

    fn coefficients(s: &GraphSum) -> Vec<Rational> {
        let mut v: Vec<Rational> = s.terms().map(|(_, c)| c.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn class_counts() {
        assert_eq!(enumerate_trivalent(0, 3).len(), 1);
        assert_eq!(enumerate_trivalent(1, 1).len(), 1);
        assert_eq!(enumerate_trivalent(2, 0).len(), 2);
        assert!(enumerate_trivalent(1, 0).is_empty());
        assert!(enumerate_trivalent(0, 2).is_empty());
    }

    #[test]
    fn leading_coefficients() {
        assert_eq!(coefficients(&potential(0, 3).unwrap()), vec![frac(1, 6)]);
        let p1 = potential(1, 1).unwrap();
        assert_eq!(coefficients(&p1), vec![frac(1, 2)]);
        let p2 = potential(2, 0).unwrap();
        let theta = GraphSum::single(&fixtures::theta(Op::GmGp), frac(1, 12)).unwrap();
        let dumb = GraphSum::single(&fixtures::dumbbell(Op::GmGp), frac(1, 8)).unwrap();
        let mut expect = theta;
        expect.add_sum(&dumb, &Rational::one());
        assert_eq!(p2, expect);
        assert!(potential(1, 0).unwrap().is_empty());
    }

    #[test]
    fn weights_match_labeled_configurations() {
        for (g, n) in [(0, 3), (0, 4), (0, 5), (0, 6), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2)] {
            let mut s = GraphSum::new();
            weighted(enumerate_trivalent(g, n), &mut s).unwrap();
            let total: Rational = s.terms().map(|(_, c)| c.clone()).sum();
            assert_eq!(total, labeled_weight(g, n), "genus {g}, {n} leaves");
        }
    }

    #[test]
    fn tree_counts() {
        // unlabeled trivalent trees by leaf count
        let expect = [(3, 1), (4, 1), (5, 1), (6, 2), (7, 2), (8, 4), (9, 6), (10, 11)];
        for (n, c) in expect {
            assert_eq!(enumerate_trivalent(0, n).len(), c, "{n} leaves");
        }
    }

    #[test]
    fn descendant_constructions_agree() {
        for d in 0..=2 {
            assert_eq!(potential_descendant(d).unwrap(), potential_descendant_by_insertion(d).unwrap());
        }
        let p = potential_descendant(2).unwrap();
        for (k, _) in p.terms() {
            assert_eq!(k.leaves.iter().filter(|l| l.label == LeafLabel::E1).count(), 1);
        }
    }

    #[test]
    fn descendant_vacuum_sector() {
        // the theta graph with the E1 leaf keeps only the edge permutations
        let p = potential_descendant(0).unwrap();
        assert_eq!(coefficients(&p), vec![frac(1, 6), frac(1, 4)]);
    }

    #[test]
    fn text_roundtrip() {
        let p = potential(1, 3).unwrap();
        assert_eq!(GraphSum::parse(&p.to_text()).unwrap(), p);
    }
}
