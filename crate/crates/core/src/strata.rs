//! Dual-graph strata of genus-2 three-pointed curves, their translation into
//! derivatives of the potentials, the zero-point graph sums and the
//! verification of the genus-2 three-point relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::One;

use crate::error::{Error, Result};
use crate::genexp::{potential, potential_descendant, GraphSum};
use crate::rational::{self, frac, Rational};
use crate::supergraph::{EdgeLabel, LabeledGraph, LeafLabel, Op};

/// Marking labels print as `a`, `b`, `c`.
pub const MARKINGS: usize = 3;

/// A node of the curve. `psi` names the end (0 or 1) carrying a ψ-class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub ends: [usize; 2],
    pub psi: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking {
    pub label: u8,
    pub vertex: usize,
    pub psi: bool,
}

/// Stratum given by its dual graph: components with genus, nodes and
/// marked points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub name: String,
    pub genus: Vec<u8>,
    pub nodes: Vec<Node>,
    pub markings: Vec<Marking>,
}

/// A half-edge of a dual graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Node(usize, usize),
    Mark(u8),
}

fn label_char(m: u8) -> char {
    (b'a' + m) as char
}

impl DualGraph {
    fn error(&self, reason: impl Into<String>) -> Error {
        Error::Unsupported { name: self.name.clone(), reason: reason.into() }
    }

    /// Total genus `Σ g(v) + E − V + 1`.
    pub fn total_genus(&self) -> usize {
        self.genus.iter().map(|&g| g as usize).sum::<usize>() + self.nodes.len() + 1 - self.genus.len()
    }

    /// Flags at vertex `v`: node ends in node order, then markings by label.
    pub fn flags(&self, v: usize) -> Vec<Flag> {
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for side in 0..2 {
                if n.ends[side] == v {
                    out.push(Flag::Node(i, side));
                }
            }
        }
        let mut marks: Vec<u8> = self.markings.iter().filter(|m| m.vertex == v).map(|m| m.label).collect();
        marks.sort();
        out.extend(marks.into_iter().map(Flag::Mark));
        out
    }

    /// Flags carrying a ψ-class.
    pub fn psi_flags(&self) -> Vec<(usize, Flag)> {
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(side) = n.psi {
                out.push((n.ends[side], Flag::Node(i, side)));
            }
        }
        for m in self.markings.iter().filter(|m| m.psi) {
            out.push((m.vertex, Flag::Mark(m.label)));
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.genus.len();
        let mut reach = vec![false; n];
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            if n == 0 || std::mem::replace(&mut reach[v], true) {
                continue;
            }
            for e in &self.nodes {
                if e.ends[0] == v {
                    stack.push(e.ends[1]);
                }
                if e.ends[1] == v {
                    stack.push(e.ends[0]);
                }
            }
        }
        n > 0 && reach.iter().all(|&r| r)
    }

    /// Checks genus 2, the three markings, stability, connectedness and that
    /// ψ-classes sit only on genus-2 components.
    pub fn validate(&self) -> Result<()> {
        let nv = self.genus.len();
        if self.nodes.iter().any(|e| e.ends.iter().any(|&v| v >= nv)) || self.markings.iter().any(|m| m.vertex >= nv) {
            return Err(self.error("reference to an unknown component"));
        }
        if !self.is_connected() {
            return Err(self.error("disconnected dual graph"));
        }
        if self.total_genus() != 2 {
            return Err(self.error(format!("total genus {} instead of 2", self.total_genus())));
        }
        let labels: BTreeSet<u8> = self.markings.iter().map(|m| m.label).collect();
        if self.markings.len() != MARKINGS || labels.len() != MARKINGS || labels.iter().any(|&l| l as usize >= MARKINGS) {
            return Err(self.error("expected the markings a, b, c once each"));
        }
        for v in 0..nv {
            if 2 * self.genus[v] as usize + self.flags(v).len() < 3 {
                return Err(self.error(format!("unstable component {v}")));
            }
        }
        if self.genus.iter().any(|&g| g > 2) {
            return Err(self.error("component genus above 2"));
        }
        let psi = self.psi_flags();
        if psi.iter().any(|&(v, _)| self.genus[v] != 2) {
            return Err(self.error("ψ-class on a component of genus below 2"));
        }
        if psi.len() > 1 {
            return Err(self.error("more than one ψ-class"));
        }
        Ok(())
    }

    /// Codimension: nodes plus ψ-classes.
    pub fn codimension(&self) -> usize {
        self.nodes.len() + self.psi_flags().len()
    }

    /// The same stratum with marking labels permuted by `perm`.
    pub fn relabeled(&self, perm: &[u8]) -> DualGraph {
        let mut d = self.clone();
        for m in d.markings.iter_mut() {
            m.label = perm[m.label as usize];
        }
        d
    }

    /// Isomorphism-invariant form, minimized over vertex orders.
    pub fn canonical_form(&self) -> (Vec<u8>, Vec<(usize, usize, u8)>, Vec<(u8, usize, bool)>) {
        let nv = self.genus.len();
        let mut best = None;
        for perm in permutations(nv) {
            let genus: Vec<u8> = (0..nv).map(|p| self.genus[perm.iter().position(|&q| q == p).unwrap()]).collect();
            let mut nodes: Vec<(usize, usize, u8)> = self
                .nodes
                .iter()
                .map(|e| {
                    let (a, b) = (perm[e.ends[0]], perm[e.ends[1]]);
                    // ψ code: 0 none, 1 at the smaller end, 2 at the larger end
                    let at = e.psi.map(|s| perm[e.ends[s]]);
                    let (lo, hi) = (a.min(b), a.max(b));
                    let code = match at {
                        None => 0,
                        Some(x) if x == lo && lo != hi => 1,
                        Some(_) => 2,
                    };
                    (lo, hi, code)
                })
                .collect();
            nodes.sort();
            let mut marks: Vec<(u8, usize, bool)> = self.markings.iter().map(|m| (m.label, perm[m.vertex], m.psi)).collect();
            marks.sort();
            let cand = (genus, nodes, marks);
            if best.as_ref().is_none_or(|b| &cand < b) {
                best = Some(cand);
            }
        }
        best.expect("at least one vertex order")
    }

    pub fn isomorphic(&self, o: &DualGraph) -> bool {
        self.genus.len() == o.genus.len() && self.canonical_form() == o.canonical_form()
    }

    /// The distinct labelings of the markings, each once.
    pub fn distinct_labelings(&self) -> Vec<DualGraph> {
        let mut out: Vec<DualGraph> = Vec::new();
        let mut forms = BTreeSet::new();
        for perm in permutations(MARKINGS) {
            let p: Vec<u8> = perm.iter().map(|&x| x as u8).collect();
            let d = self.relabeled(&p);
            if forms.insert(d.canonical_form()) {
                out.push(d);
            }
        }
        out
    }

    /// Text block in the strata file grammar.
    pub fn to_text(&self) -> String {
        let mut s = format!("stratum {}\n", self.name);
        for (v, g) in self.genus.iter().enumerate() {
            s.push_str(&format!("v {v} genus {g}\n"));
        }
        for e in &self.nodes {
            s.push_str(&format!("e {} {}", e.ends[0], e.ends[1]));
            if let Some(side) = e.psi {
                s.push_str(&format!(" psi-at {}", e.ends[side]));
            }
            s.push('\n');
        }
        let mut marks = self.markings.clone();
        marks.sort();
        for m in marks {
            s.push_str(&format!("m {} at {}{}\n", label_char(m.label), m.vertex, if m.psi { " psi" } else { "" }));
        }
        s
    }
}

impl fmt::Display for DualGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Parses strata blocks:
///
/// ```text
/// stratum <name>
/// v <id> genus <g>
/// e <id> <id> [psi-at <id>]
/// m <a|b|c> at <id> [psi]
/// ```
///
/// Component ids are arbitrary tokens; `#` starts a comment. Every stratum is
/// validated.
pub fn parse_strata(text: &str) -> Result<Vec<DualGraph>> {
    struct Open {
        d: DualGraph,
        ids: BTreeMap<String, usize>,
    }
    let mut out = Vec::new();
    let mut cur: Option<Open> = None;
    let finish = |o: Option<Open>, out: &mut Vec<DualGraph>| -> Result<()> {
        if let Some(o) = o {
            o.d.validate()?;
            out.push(o.d);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse { line: i + 1, msg: format!("{msg}: {line}") };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "stratum" {
            if f.len() != 2 {
                return Err(bad("expected `stratum <name>`"));
            }
            finish(cur.take(), &mut out)?;
            let d = DualGraph { name: f[1].to_string(), genus: Vec::new(), nodes: Vec::new(), markings: Vec::new() };
            cur = Some(Open { d, ids: BTreeMap::new() });
            continue;
        }
        let o = cur.as_mut().ok_or_else(|| bad("line outside a stratum"))?;
        let vid = |o: &Open, t: &str| o.ids.get(t).copied().ok_or_else(|| bad("unknown component"));
        match (f[0], f.len()) {
            ("v", 4) if f[2] == "genus" => {
                let g: u8 = f[3].parse().map_err(|_| bad("bad genus"))?;
                if o.ids.insert(f[1].to_string(), o.d.genus.len()).is_some() {
                    return Err(bad("duplicate component"));
                }
                o.d.genus.push(g);
            }
            ("e", 3) | ("e", 5) => {
                let ends = [vid(o, f[1])?, vid(o, f[2])?];
                let psi = if f.len() == 5 {
                    if f[3] != "psi-at" {
                        return Err(bad("expected `psi-at <id>`"));
                    }
                    let at = vid(o, f[4])?;
                    Some(ends.iter().position(|&v| v == at).ok_or_else(|| bad("ψ away from the node"))?)
                } else {
                    None
                };
                o.d.nodes.push(Node { ends, psi });
            }
            ("m", 4) | ("m", 5) if f[2] == "at" => {
                let label = match f[1] {
                    "a" => 0,
                    "b" => 1,
                    "c" => 2,
                    _ => return Err(bad("marking must be a, b or c")),
                };
                let psi = match f.get(4) {
                    None => false,
                    Some(&"psi") => true,
                    Some(_) => return Err(bad("expected `psi`")),
                };
                o.d.markings.push(Marking { label, vertex: vid(o, f[3])?, psi });
            }
            _ => return Err(bad("unrecognized line")),
        }
    }
    finish(cur.take(), &mut out)?;
    Ok(out)
}

/// Which potential a derivative block differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Potential {
    Genus0,
    Genus1,
    Genus2,
    /// Genus 2 with one descendant leaf.
    Descendant,
}

impl Potential {
    fn of_genus(g: u8) -> Potential {
        match g {
            0 => Potential::Genus0,
            1 => Potential::Genus1,
            _ => Potential::Genus2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Potential::Genus0 => "Φ0",
            Potential::Genus1 => "Φ1",
            Potential::Genus2 => "Φ2",
            Potential::Descendant => "Φ2'",
        }
    }
}

/// A derivative slot: a marked point or a contracted index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Mark(u8),
    Index(u16),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Mark(m) => write!(f, "{}", label_char(*m)),
            Slot::Index(i) => write!(f, "i{i}"),
        }
    }
}

/// `∂Φ/∂T_{0,·}…∂T_{1,·}` with the given slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    pub potential: Potential,
    pub t0: Vec<Slot>,
    pub t1: Option<Slot>,
}

/// Product of blocks with `η^{kl}` contractions of index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffTerm {
    pub coeff: Rational,
    pub blocks: Vec<Block>,
    pub eta: Vec<(u16, u16)>,
}

/// Sum of products of derivatives, symmetrized over the markings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffExpression {
    pub terms: Vec<DiffTerm>,
}

impl fmt::Display for DiffExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "{}", rational::fmt(&t.coeff))?;
            for b in &t.blocks {
                let mut slots: Vec<String> = b.t0.iter().map(|s| format!("T0.{s}")).collect();
                if let Some(s) = b.t1 {
                    slots.push(format!("T1.{s}"));
                }
                write!(f, " {}[{}]", b.potential.symbol(), slots.join(","))?;
            }
            for (k, l) in &t.eta {
                write!(f, " η(i{k},i{l})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn flag_slot(flag: Flag) -> Slot {
    match flag {
        Flag::Node(e, side) => Slot::Index((2 * e + side) as u16),
        Flag::Mark(m) => Slot::Mark(m),
    }
}

/// The derivative blocks of one labeling, before symmetrization.
fn translate(d: &DualGraph) -> Result<Vec<DiffTerm>> {
    d.validate()?;
    let mut fresh = 2 * d.nodes.len() as u16;
    let base_eta: Vec<(u16, u16)> = (0..d.nodes.len() as u16).map(|e| (2 * e, 2 * e + 1)).collect();
    let mut terms = vec![DiffTerm { coeff: Rational::one(), blocks: Vec::new(), eta: base_eta }];
    let psi = d.psi_flags();
    for v in 0..d.genus.len() {
        let flags = d.flags(v);
        let options: Vec<(Rational, Vec<Block>, Vec<(u16, u16)>)> = match psi.iter().find(|(pv, _)| *pv == v) {
            None => vec![(
                Rational::one(),
                vec![Block { potential: Potential::of_genus(d.genus[v]), t0: flags.iter().map(|&f| flag_slot(f)).collect(), t1: None }],
                Vec::new(),
            )],
            Some(&(_, pf)) => {
                let rest: Vec<Slot> = flags.iter().filter(|&&f| f != pf).map(|&f| flag_slot(f)).collect();
                let (k, l) = (fresh, fresh + 1);
                fresh += 2;
                let mut lower = vec![Slot::Index(l)];
                lower.extend(rest.iter().copied());
                vec![
                    (Rational::one(), vec![Block { potential: Potential::Descendant, t0: rest.clone(), t1: Some(flag_slot(pf)) }], Vec::new()),
                    (
                        -Rational::one(),
                        vec![
                            Block { potential: Potential::Genus0, t0: vec![flag_slot(pf), Slot::Index(k)], t1: None },
                            Block { potential: Potential::Genus2, t0: lower, t1: None },
                        ],
                        vec![(k, l)],
                    ),
                ]
            }
        };
        let mut next = Vec::new();
        for t in &terms {
            for (c, blocks, eta) in &options {
                let mut u = t.clone();
                u.coeff = &u.coeff * c;
                u.blocks.extend(blocks.iter().cloned());
                u.eta.extend(eta.iter().copied());
                next.push(u);
            }
        }
        terms = next;
    }
    Ok(terms)
}

/// Translates a stratum into derivatives of the potentials, one product per
/// distinct labeling of the markings. Nodes contract the two derivatives at
/// their ends with `η^{kl}`; a ψ-class at a flag `f` of the genus-2
/// component replaces its block by
/// `∂_{T1,f} Φ2' − ∂_{T0,f}∂_{T0,k}Φ0 η^{kl} ∂_{T0,l}Φ2`.
pub fn to_differential(d: &DualGraph) -> Result<DiffExpression> {
    let mut terms = Vec::new();
    for l in d.distinct_labelings() {
        terms.extend(translate(&l)?);
    }
    Ok(DiffExpression { terms })
}

/// The four potentials, each built up to its own bound on E0 leaves.
#[derive(Clone, Debug)]
pub struct Potentials {
    sums: [GraphSum; 4],
    budgets: [usize; 4],
}

const KINDS: [Potential; 4] = [Potential::Genus0, Potential::Genus1, Potential::Genus2, Potential::Descendant];

impl Potentials {
    /// All four potentials with the same leaf bound.
    pub fn build(budget: usize) -> Result<Potentials> {
        Potentials::with_budgets([budget; 4])
    }

    /// Budgets indexed as genus 0, 1, 2 and descendant.
    pub fn with_budgets(budgets: [usize; 4]) -> Result<Potentials> {
        let sums = [
            potential(0, budgets[0])?,
            potential(1, budgets[1])?,
            potential(2, budgets[2])?,
            potential_descendant(budgets[3])?,
        ];
        Ok(Potentials { sums, budgets })
    }

    /// The smallest budgets serving every block of the given strata.
    pub fn for_strata(strata: &[DualGraph]) -> Result<Potentials> {
        let mut budgets = [0; 4];
        for d in strata {
            for t in to_differential(d)?.terms {
                for b in t.blocks {
                    let i = KINDS.iter().position(|&k| k == b.potential).expect("known kind");
                    budgets[i] = budgets[i].max(b.t0.len());
                }
            }
        }
        Potentials::with_budgets(budgets)
    }

    pub fn sum(&self, p: Potential) -> &GraphSum {
        &self.sums[KINDS.iter().position(|&k| k == p).expect("known kind")]
    }

    pub fn budget(&self, p: Potential) -> usize {
        self.budgets[KINDS.iter().position(|&k| k == p).expect("known kind")]
    }
}

/// Graph with some leaves bound to derivative slots.
struct Piece {
    graph: LabeledGraph,
    coeff: Rational,
    slots: Vec<Option<Slot>>,
}

/// Terms of `∂_{slots} Φ` at zero: each graph with exactly the right leaves,
/// once per assignment of slots to its E0 leaves.
fn block_pieces(b: &Block, pots: &Potentials) -> Result<Vec<Piece>> {
    if b.t0.len() > pots.budget(b.potential) {
        return Err(Error::Budget { budget: pots.budget(b.potential), needed: b.t0.len() });
    }
    let mut out = Vec::new();
    for (k, c) in pots.sum(b.potential).terms() {
        let e0: Vec<usize> = k.leaves.iter().enumerate().filter(|(_, l)| l.label == LeafLabel::E0).map(|(i, _)| i).collect();
        let e1: Vec<usize> = k.leaves.iter().enumerate().filter(|(_, l)| l.label == LeafLabel::E1).map(|(i, _)| i).collect();
        if e0.len() != b.t0.len() || e1.len() != usize::from(b.t1.is_some()) {
            continue;
        }
        let g = k.to_graph();
        for perm in permutations(e0.len()) {
            let mut slots = vec![None; g.leaves.len()];
            for (j, &p) in perm.iter().enumerate() {
                slots[e0[p]] = Some(b.t0[j]);
            }
            if let (Some(&i), Some(s)) = (e1.first(), b.t1) {
                slots[i] = Some(s);
            }
            out.push(Piece { graph: g.clone(), coeff: c.clone(), slots });
        }
    }
    Ok(out)
}

/// Disjoint union of pieces, then each `η` pair becomes a `Π₀` edge and each
/// marked slot an external leg.
fn glue(pieces: &[&Piece], eta: &[(u16, u16)]) -> LabeledGraph {
    let mut g = LabeledGraph::empty();
    let mut at: BTreeMap<Slot, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for p in pieces {
        let offset = g.vertices.len();
        for _ in 0..p.graph.vertices.len() {
            g.add_vertex();
        }
        let vof = p.graph.vertex_of();
        for (i, l) in p.graph.leaves.iter().enumerate() {
            let v = offset + vof[l.half];
            match p.slots[i] {
                Some(Slot::Mark(m)) => {
                    g.add_leaf(v, LeafLabel::External(m));
                }
                Some(s) => {
                    at.insert(s, v);
                }
                None => {
                    g.add_leaf(v, l.label);
                }
            }
        }
        for e in &p.graph.edges {
            edges.push((offset + vof[e.ends[0]], offset + vof[e.ends[1]], e.label));
        }
    }
    for (u, v, l) in edges {
        g.add_edge(u, v, l);
    }
    for &(k, l) in eta {
        g.add_edge(at[&Slot::Index(k)], at[&Slot::Index(l)], EdgeLabel::new(Op::Pi0));
    }
    g
}

/// The degree-zero term of the stratum's differential expression as a graph
/// sum with external legs `a`, `b`, `c`.
pub fn at_zero(d: &DualGraph, pots: &Potentials) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    for t in to_differential(d)?.terms {
        let per_block: Vec<Vec<Piece>> = t.blocks.iter().map(|b| block_pieces(b, pots)).collect::<Result<_>>()?;
        let mut idx = vec![0usize; per_block.len()];
        if per_block.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let chosen: Vec<&Piece> = idx.iter().zip(&per_block).map(|(&i, ps)| &ps[i]).collect();
            let c = chosen.iter().fold(t.coeff.clone(), |acc, p| acc * &p.coeff);
            out.add_graph(&glue(&chosen, &t.eta), c)?;
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < per_block[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Identifies the three external legs: every `External` leaf becomes leg
/// `a`, and the sum is divided by `3!`. A sum symmetric in the markings
/// vanishes exactly when its image does.
pub fn identify_legs(s: &GraphSum) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    let k = frac(1, 6);
    for (key, c) in s.terms() {
        let mut g = key.to_graph();
        for l in g.leaves.iter_mut() {
            if let LeafLabel::External(_) = l.label {
                l.label = LeafLabel::External(0);
            }
        }
        out.add_graph(&g, c * &k)?;
    }
    Ok(out)
}

/// Every stratum of codimension 2 within reach of the translation: two
/// nodes, or one node with a ψ-class on a genus-2 component. One
/// representative per isomorphism class with the markings unlabeled.
pub fn codimension_two_strata() -> Vec<DualGraph> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for nv in 1..=3usize {
        let pairs: Vec<[usize; 2]> = (0..nv).flat_map(|a| (a..nv).map(move |b| [a, b])).collect();
        for genus in product(nv, 3) {
            let genus: Vec<u8> = genus.into_iter().map(|g| g as u8).collect();
            for marks in product(MARKINGS, nv) {
                let markings: Vec<Marking> =
                    marks.iter().enumerate().map(|(l, &v)| Marking { label: l as u8, vertex: v, psi: false }).collect();
                let mut shapes: Vec<(Vec<Node>, Vec<Marking>)> = Vec::new();
                for (i, a) in pairs.iter().enumerate() {
                    for b in &pairs[i..] {
                        let nodes = vec![Node { ends: *a, psi: None }, Node { ends: *b, psi: None }];
                        shapes.push((nodes, markings.clone()));
                    }
                    for side in 0..2 {
                        shapes.push((vec![Node { ends: *a, psi: Some(side) }], markings.clone()));
                    }
                    for l in 0..MARKINGS {
                        let mut m = markings.clone();
                        m[l].psi = true;
                        shapes.push((vec![Node { ends: *a, psi: None }], m));
                    }
                }
                for (nodes, markings) in shapes {
                    let d = DualGraph { name: String::new(), genus: genus.clone(), nodes, markings };
                    if d.validate().is_err() {
                        continue;
                    }
                    let key = d.distinct_labelings().iter().map(DualGraph::canonical_form).min().expect("labelings");
                    if seen.insert(key) {
                        out.push(d);
                    }
                }
            }
        }
    }
    for (i, d) in out.iter_mut().enumerate() {
        d.name = format!("S{}", i + 1);
    }
    out
}

/// All tuples of length `n` over `0..k`.
fn product(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                (0..k).map(move |x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect()
    })
}

/// Coefficients of the genus-2 three-point relation.
pub fn bp_coefficients() -> Vec<Rational> {
    [
        (-4, 1),
        (12, 1),
        (6, 1),
        (-6, 1),
        (12, 5),
        (-12, 5),
        (24, 5),
        (-36, 5),
        (-36, 5),
        (18, 5),
        (-12, 5),
        (1, 10),
        (-3, 10),
        (3, 10),
        (-1, 10),
        (6, 5),
        (-6, 5),
        (2, 5),
        (-3, 5),
        (-1, 5),
    ]
    .iter()
    .map(|&(p, q)| frac(p, q))
    .collect()
}

/// The three strata written out in prose: the `(0, 0, 2)` chain and the
/// two ψ-strata on a genus-2 component.
pub fn builtin_strata() -> Vec<DualGraph> {
    let text = "stratum D1\nv x genus 0\nv y genus 0\nv z genus 2\ne x y\ne x z\nm a at x\nm b at y\nm c at y\n\
                stratum D2\nv x genus 0\nv z genus 2\ne x z psi-at z\nm a at x\nm b at x\nm c at x\n\
                stratum D3\nv x genus 0\nv z genus 2\ne x z\nm a at z psi\nm b at x\nm c at x\n";
    parse_strata(text).expect("built-in strata are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(i: usize) -> DualGraph {
        builtin_strata().remove(i - 1)
    }

    fn sorted_coefficients(s: &GraphSum) -> Vec<Rational> {
        let mut v: Vec<Rational> = s.terms().map(|(_, c)| c.clone()).collect();
        v.sort();
        v
    }

    fn fr(v: &[(i64, i64)]) -> Vec<Rational> {
        let mut out: Vec<Rational> = v.iter().map(|&(p, q)| frac(p, q)).collect();
        out.sort();
        out
    }

    #[test]
    fn zero_point_sums_of_the_first_strata() {
        let pots = Potentials::build(4).unwrap();
        let z1 = identify_legs(&at_zero(&delta(1), &pots).unwrap()).unwrap();
        assert_eq!(sorted_coefficients(&z1), fr(&[(1, 16), (1, 8), (1, 8)]));
        let z2 = identify_legs(&at_zero(&delta(2), &pots).unwrap()).unwrap();
        assert_eq!(sorted_coefficients(&z2), fr(&[(1, 12), (1, 8)]));
        let z3 = identify_legs(&at_zero(&delta(3), &pots).unwrap()).unwrap();
        assert_eq!(sorted_coefficients(&z3), fr(&[(1, 16), (1, 8), (1, 8), (1, 4), (1, 8), (1, 8), (1, 8)]));
    }
}
