//! Labeled multigraphs with leaves, canonical forms and automorphism counts.
//!
//! A graph is a list of vertices (each a list of half-edge slots), a list of
//! leaves and a list of edges. Leaves and edges are the *objects* of the
//! graph. The object order (all leaves in list order, then all edges in list
//! order, each edge contributing its two half-edges `ends[0]`, `ends[1]`) is
//! the sign reference for evaluation and canonicalization. Slot order at a
//! vertex and vertex order carry no sign.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Operator carried by an edge. The `Q*` variants only occur mid-rewrite and
/// are oriented: `ends[0]` is the side where `Q` acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Id,
    Pi0,
    Gm,
    Gp,
    GmGp,
    QId,
    QGm,
    QGp,
    QGmGp,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::Id,
        Op::Pi0,
        Op::Gm,
        Op::Gp,
        Op::GmGp,
        Op::QId,
        Op::QGm,
        Op::QGp,
        Op::QGmGp,
    ];

    pub fn is_odd(self) -> bool {
        matches!(self, Op::Gm | Op::Gp | Op::QId | Op::QGmGp)
    }

    pub fn has_q(self) -> bool {
        matches!(self, Op::QId | Op::QGm | Op::QGp | Op::QGmGp)
    }

    /// Operator with a leading `Q` removed.
    pub fn strip_q(self) -> Option<Op> {
        match self {
            Op::QId => Some(Op::Id),
            Op::QGm => Some(Op::Gm),
            Op::QGp => Some(Op::Gp),
            Op::QGmGp => Some(Op::GmGp),
            _ => None,
        }
    }

    /// `Q` composed on the left, when the result is in the alphabet.
    pub fn with_q(self) -> Option<Op> {
        match self {
            Op::Id => Some(Op::QId),
            Op::Gm => Some(Op::QGm),
            Op::Gp => Some(Op::QGp),
            Op::GmGp => Some(Op::QGmGp),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Op::Id => "Id",
            Op::Pi0 => "Pi0",
            Op::Gm => "Gm",
            Op::Gp => "Gp",
            Op::GmGp => "GmGp",
            Op::QId => "Q",
            Op::QGm => "QGm",
            Op::QGp => "QGp",
            Op::QGmGp => "QGmGp",
        }
    }

    pub fn from_tag(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.tag() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel {
    pub op: Op,
    /// Replace `[A]` by `[JA]`, with `J` acting on the `ends[0]` side.
    pub j: bool,
}

impl EdgeLabel {
    pub fn new(op: Op) -> Self {
        EdgeLabel { op, j: false }
    }

    pub fn is_odd(self) -> bool {
        self.op.is_odd()
    }

    /// Whether the bivector depends on the orientation of the edge.
    pub fn is_directed(self) -> bool {
        self.op.has_q() || (self.j && self.op.is_odd())
    }

    /// A loop carrying this label equals minus itself.
    pub fn loop_vanishes(self) -> bool {
        matches!(self.op, Op::QId | Op::QGm) || (self.j && self.op.is_odd())
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.j {
            write!(f, "J{}", self.op.tag())
        } else {
            f.write_str(self.op.tag())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LeafLabel {
    E0,
    E1,
    Basis(u16),
    /// Free marked-point leg; 0, 1, 2 print as `a`, `b`, `c`.
    External(u8),
}

impl fmt::Display for LeafLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafLabel::E0 => f.write_str("E0"),
            LeafLabel::E1 => f.write_str("E1"),
            LeafLabel::Basis(i) => write!(f, "b{i}"),
            LeafLabel::External(k) => write!(f, "{}", (b'a' + k) as char),
        }
    }
}

impl LeafLabel {
    pub fn parse(s: &str) -> Option<LeafLabel> {
        match s {
            "E0" => Some(LeafLabel::E0),
            "E1" => Some(LeafLabel::E1),
            _ => {
                if let Some(rest) = s.strip_prefix('b') {
                    return rest.parse().ok().map(LeafLabel::Basis);
                }
                let b = s.as_bytes();
                (b.len() == 1 && b[0].is_ascii_lowercase()).then(|| LeafLabel::External(b[0] - b'a'))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub ends: [usize; 2],
    pub label: EdgeLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub half: usize,
    pub label: LeafLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub vertices: Vec<Vec<usize>>,
    pub leaves: Vec<Leaf>,
    pub edges: Vec<Edge>,
}

/// Location of a half-edge: which object owns it and which vertex it sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Owner {
    Leaf(usize),
    Edge(usize, usize),
}

impl LabeledGraph {
    pub fn empty() -> Self {
        LabeledGraph { vertices: Vec::new(), leaves: Vec::new(), edges: Vec::new() }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertices.push(Vec::new());
        self.vertices.len() - 1
    }

    fn fresh_half(&self) -> usize {
        self.vertices.iter().map(|s| s.len()).sum()
    }

    pub fn add_leaf(&mut self, v: usize, label: LeafLabel) -> usize {
        let h = self.fresh_half();
        self.vertices[v].push(h);
        self.leaves.push(Leaf { half: h, label });
        self.leaves.len() - 1
    }

    /// Adds an edge with `ends[0]` at `u` and `ends[1]` at `v`.
    pub fn add_edge(&mut self, u: usize, v: usize, label: EdgeLabel) -> usize {
        let h0 = self.fresh_half();
        self.vertices[u].push(h0);
        let h1 = h0 + 1;
        self.vertices[v].push(h1);
        self.edges.push(Edge { ends: [h0, h1], label });
        self.edges.len() - 1
    }

    /// Whether edge `i` joins a vertex to itself.
    pub fn is_loop(&self, i: usize) -> bool {
        let vof = self.vertex_of();
        vof[self.edges[i].ends[0]] == vof[self.edges[i].ends[1]]
    }

    pub fn num_halves(&self) -> usize {
        self.vertices.iter().map(|s| s.len()).sum()
    }

    pub fn num_objects(&self) -> usize {
        self.leaves.len() + self.edges.len()
    }

    /// Vertex of every half-edge.
    pub fn vertex_of(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.num_halves()];
        for (v, slots) in self.vertices.iter().enumerate() {
            for &h in slots {
                if h < out.len() {
                    out[h] = v;
                }
            }
        }
        out
    }

    pub fn owner_of(&self) -> Vec<Owner> {
        let mut out = vec![Owner::Leaf(usize::MAX); self.num_halves()];
        for (i, l) in self.leaves.iter().enumerate() {
            out[l.half] = Owner::Leaf(i);
        }
        for (i, e) in self.edges.iter().enumerate() {
            out[e.ends[0]] = Owner::Edge(i, 0);
            out[e.ends[1]] = Owner::Edge(i, 1);
        }
        out
    }

    /// Checks that slots, leaves and edges partition the half-edges `0..n`.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_halves();
        let mut seen_slot = vec![false; n];
        for slots in &self.vertices {
            for &h in slots {
                if h >= n || std::mem::replace(&mut seen_slot[h], true) {
                    return Err(Error::Structure(format!("half-edge {h} misplaced in vertex slots")));
                }
            }
        }
        let mut seen_obj = vec![false; n];
        let halves = self.leaves.iter().map(|l| l.half).chain(self.edges.iter().flat_map(|e| e.ends));
        for h in halves {
            if h >= n || std::mem::replace(&mut seen_obj[h], true) {
                return Err(Error::Structure(format!("half-edge {h} paired inconsistently")));
            }
        }
        if seen_obj.iter().any(|s| !s) {
            return Err(Error::Structure("unpaired half-edge without leaf label".into()));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        let vof = self.vertex_of();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let a = find(&mut parent, vof[e.ends[0]]);
            let b = find(&mut parent, vof[e.ends[1]]);
            parent[a] = b;
        }
        let r = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == r)
    }

    /// First Betti number.
    pub fn genus(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::Structure("genus of a disconnected graph".into()));
        }
        Ok(self.edges.len() + 1 - self.vertices.len())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertices[v].len()
    }

    /// Parity of each object in object order.
    pub fn object_parities(&self) -> Vec<bool> {
        self.leaves.iter().map(|_| false).chain(self.edges.iter().map(|e| e.label.is_odd())).collect()
    }

    /// Returns the graph with vertices renumbered so that slots are
    /// consecutive half-edge ids in object order.
    pub fn renumbered(&self) -> LabeledGraph {
        let vof = self.vertex_of();
        let mut g = LabeledGraph::empty();
        for _ in 0..self.vertices.len() {
            g.add_vertex();
        }
        for l in &self.leaves {
            g.add_leaf(vof[l.half], l.label);
        }
        for e in &self.edges {
            g.add_edge(vof[e.ends[0]], vof[e.ends[1]], e.label);
        }
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub a: u8,
    pub b: u8,
    pub label: EdgeLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafKey {
    pub v: u8,
    pub label: LeafLabel,
}

/// Canonical encoding of an isomorphism class.
///
/// Text form, one record per line:
/// `deg d0 d1 ...`, then `e a b TAG` per edge and `l v LABEL` per leaf, with
/// vertex numbers in canonical order, edges and leaves sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphKey {
    pub n: u8,
    pub edges: Vec<EdgeKey>,
    pub leaves: Vec<LeafKey>,
}

impl GraphKey {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n as usize];
        for e in &self.edges {
            d[e.a as usize] += 1;
            d[e.b as usize] += 1;
        }
        for l in &self.leaves {
            d[l.v as usize] += 1;
        }
        d
    }

    /// The canonical representative; its object order is the key order.
    pub fn to_graph(&self) -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        for _ in 0..self.n {
            g.add_vertex();
        }
        for l in &self.leaves {
            g.add_leaf(l.v as usize, l.label);
        }
        for e in &self.edges {
            g.add_edge(e.a as usize, e.b as usize, e.label);
        }
        g
    }

    pub fn encode(&self) -> String {
        let mut s = String::from("deg");
        for d in self.degrees() {
            s.push_str(&format!(" {d}"));
        }
        s.push('\n');
        for e in &self.edges {
            s.push_str(&format!("e {} {} {}\n", e.a, e.b, e.label));
        }
        for l in &self.leaves {
            s.push_str(&format!("l {} {}\n", l.v, l.label));
        }
        s
    }

    /// Single-line form used in listings and tables.
    pub fn compact(&self) -> String {
        self.encode().trim_end().replace('\n', ";")
    }

    pub fn decode(text: &str) -> Result<GraphKey> {
        let bad = |m: &str| Error::Structure(format!("bad graph encoding: {m}"));
        let mut n = None;
        let mut edges = Vec::new();
        let mut leaves = Vec::new();
        for line in text.split(['\n', ';']).map(str::trim).filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "deg" => n = Some(f.len() - 1),
                "e" if f.len() == 4 => {
                    let (j, tag) = match f[3].strip_prefix('J') {
                        Some(t) => (true, t),
                        None => (false, f[3]),
                    };
                    let op = Op::from_tag(tag).ok_or_else(|| bad(tag))?;
                    edges.push(EdgeKey {
                        a: f[1].parse().map_err(|_| bad(line))?,
                        b: f[2].parse().map_err(|_| bad(line))?,
                        label: EdgeLabel { op, j },
                    });
                }
                "l" if f.len() == 3 => leaves.push(LeafKey {
                    v: f[1].parse().map_err(|_| bad(line))?,
                    label: LeafLabel::parse(f[2]).ok_or_else(|| bad(f[2]))?,
                }),
                _ => return Err(bad(line)),
            }
        }
        let n = n.ok_or_else(|| bad("missing deg line"))?;
        let key = GraphKey { n: n as u8, edges, leaves };
        Ok(key)
    }
}

impl fmt::Display for GraphKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

/// Result of canonicalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Canonical {
    /// The graph has an automorphism acting by an odd permutation on its odd
    /// objects (or an anti-self-adjoint loop), so it equals minus itself.
    Zero,
    /// `input = sign * key.to_graph()`.
    Term { key: GraphKey, negative: bool },
}

/// Per-vertex description independent of vertex numbering.
struct LocalView {
    /// (neighbour, edge label, direction code): 0 undirected, 1 outgoing, 2 incoming.
    nbrs: Vec<Vec<(usize, EdgeLabel, u8)>>,
    loops: Vec<Vec<EdgeLabel>>,
    leaves: Vec<Vec<(LeafLabel, u32)>>,
}

struct Search<'a> {
    g: &'a LabeledGraph,
    vof: Vec<usize>,
    view: LocalView,
    leaf_tags: &'a [u32],
    best: Option<(Vec<EdgeKey>, Vec<(LeafKey, u32)>)>,
    best_orders: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(g: &'a LabeledGraph, leaf_tags: &'a [u32]) -> Self {
        let vof = g.vertex_of();
        let n = g.vertices.len();
        let mut view = LocalView { nbrs: vec![Vec::new(); n], loops: vec![Vec::new(); n], leaves: vec![Vec::new(); n] };
        for e in &g.edges {
            let (u, v) = (vof[e.ends[0]], vof[e.ends[1]]);
            if u == v {
                view.loops[u].push(e.label);
            } else if e.label.is_directed() {
                view.nbrs[u].push((v, e.label, 1));
                view.nbrs[v].push((u, e.label, 2));
            } else {
                view.nbrs[u].push((v, e.label, 0));
                view.nbrs[v].push((u, e.label, 0));
            }
        }
        for (i, l) in g.leaves.iter().enumerate() {
            view.leaves[vof[l.half]].push((l.label, leaf_tags[i]));
        }
        for v in 0..n {
            view.loops[v].sort();
            view.leaves[v].sort();
        }
        Search { g, vof, view, leaf_tags, best: None, best_orders: Vec::new() }
    }

    fn initial_colors(&self) -> Vec<u32> {
        let sigs: Vec<_> = (0..self.g.vertices.len())
            .map(|v| (self.g.degree(v), self.view.loops[v].clone(), self.view.leaves[v].clone()))
            .collect();
        rank(&sigs)
    }

    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let n = colors.len();
        let mut classes = count_classes(&colors);
        loop {
            let sigs: Vec<_> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(u32, EdgeLabel, u8)> =
                        self.view.nbrs[v].iter().map(|&(w, l, d)| (colors[w], l, d)).collect();
                    nb.sort();
                    (colors[v], nb)
                })
                .collect();
            colors = rank(&sigs);
            let c = count_classes(&colors);
            if c == classes {
                return colors;
            }
            classes = c;
        }
    }

    fn run(&mut self, colors: Vec<u32>) {
        let n = colors.len();
        let mut counts: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            counts.entry(colors[v]).or_default().push(v);
        }
        match counts.values().find(|c| c.len() > 1) {
            None => {
                let mut order = vec![0; n];
                for v in 0..n {
                    order[colors[v] as usize] = v;
                }
                self.visit_leaf(order);
            }
            Some(cell) => {
                for &v in cell.clone().iter() {
                    let ind: Vec<u32> =
                        (0..n).map(|x| 2 * colors[x] + u32::from(x != v && colors[x] == colors[v])).collect();
                    let refined = self.refine(ind);
                    self.run(refined);
                }
            }
        }
    }

    fn encoding(&self, pos: &[usize]) -> (Vec<EdgeKey>, Vec<(LeafKey, u32)>) {
        let mut edges: Vec<EdgeKey> = self
            .g
            .edges
            .iter()
            .map(|e| self.edge_key(pos, e))
            .collect();
        edges.sort();
        let mut leaves: Vec<(LeafKey, u32)> = self
            .g
            .leaves
            .iter()
            .enumerate()
            .map(|(i, l)| (LeafKey { v: pos[self.vof[l.half]] as u8, label: l.label }, self.leaf_tags[i]))
            .collect();
        leaves.sort();
        (edges, leaves)
    }

    fn edge_key(&self, pos: &[usize], e: &Edge) -> EdgeKey {
        let a = pos[self.vof[e.ends[0]]] as u8;
        let b = pos[self.vof[e.ends[1]]] as u8;
        if e.label.is_directed() || a <= b {
            EdgeKey { a, b, label: e.label }
        } else {
            EdgeKey { a: b, b: a, label: e.label }
        }
    }

    fn visit_leaf(&mut self, order: Vec<usize>) {
        let mut pos = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let enc = self.encoding(&pos);
        match &self.best {
            Some(b) if enc > *b => {}
            Some(b) if enc == *b => self.best_orders.push(pos),
            _ => {
                self.best = Some(enc);
                self.best_orders = vec![pos];
            }
        }
    }

    /// Sign of the object permutation taking input order to canonical order,
    /// or `None` if two odd objects are indistinguishable.
    fn object_sign(&self, pos: &[usize]) -> Option<bool> {
        let g = self.g;
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        enum K {
            L(LeafKey, u32),
            E(EdgeKey),
        }
        let mut objs: Vec<(K, usize, bool)> = Vec::with_capacity(g.num_objects());
        for (i, l) in g.leaves.iter().enumerate() {
            objs.push((K::L(LeafKey { v: pos[self.vof[l.half]] as u8, label: l.label }, self.leaf_tags[i]), i, false));
        }
        let nl = g.leaves.len();
        for (i, e) in g.edges.iter().enumerate() {
            objs.push((K::E(self.edge_key(pos, e)), nl + i, e.label.is_odd()));
        }
        objs.sort();
        for w in objs.windows(2) {
            if w[0].2 && w[1].2 && w[0].0 == w[1].0 {
                return None;
            }
        }
        let odd_inputs: Vec<usize> = objs.iter().filter(|o| o.2).map(|o| o.1).collect();
        Some(inversions(&odd_inputs) % 2 == 1)
    }
}

fn inversions(xs: &[usize]) -> usize {
    let mut c = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
                c += 1;
            }
        }
    }
    c
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).unwrap() as u32).collect()
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

struct SearchOutcome {
    key: GraphKey,
    /// Sign per optimal vertex ordering.
    signs: Vec<Option<bool>>,
    automorphisms: u64,
}

fn search(g: &LabeledGraph, leaf_tags: &[u32]) -> SearchOutcome {
    let mut s = Search::new(g, leaf_tags);
    let init = s.refine(s.initial_colors());
    s.run(init);
    let (edges, leaves) = s.best.clone().expect("non-empty graph");
    let signs = s.best_orders.iter().map(|p| s.object_sign(p)).collect();
    let mut automorphisms = s.best_orders.len() as u64;
    for run in edges.chunk_by(|a, b| a == b) {
        automorphisms *= factorial(run.len());
    }
    automorphisms <<= edges.iter().filter(|e| e.a == e.b && !e.label.is_directed()).count();
    for run in leaves.chunk_by(|a, b| a == b) {
        automorphisms *= factorial(run.len());
    }
    let key = GraphKey { n: g.vertices.len() as u8, edges, leaves: leaves.into_iter().map(|(k, _)| k).collect() };
    SearchOutcome { key, signs, automorphisms }
}

/// Canonical key and Koszul sign of `g`.
pub fn canonicalize(g: &LabeledGraph) -> Result<Canonical> {
    g.validate()?;
    if g.vertices.is_empty() {
        return Err(Error::Structure("empty graph".into()));
    }
    let vof = g.vertex_of();
    if g.edges.iter().any(|e| vof[e.ends[0]] == vof[e.ends[1]] && e.label.loop_vanishes()) {
        return Ok(Canonical::Zero);
    }
    let tags = vec![0u32; g.leaves.len()];
    let out = search(g, &tags);
    let first = out.signs[0];
    match first {
        Some(neg) if out.signs.iter().all(|s| *s == first) => Ok(Canonical::Term { key: out.key, negative: neg }),
        _ => Ok(Canonical::Zero),
    }
}

/// Order of the label-preserving automorphism group fixing each leaf listed
/// in `fixed` (indices into `g.leaves`). Leaves with equal labels are
/// otherwise interchangeable.
pub fn automorphism_count(g: &LabeledGraph, fixed: &[usize]) -> Result<u64> {
    g.validate()?;
    if !g.is_connected() {
        return Err(Error::Structure("automorphisms of a disconnected graph".into()));
    }
    let mut tags = vec![0u32; g.leaves.len()];
    for (k, &i) in fixed.iter().enumerate() {
        tags[i] = k as u32 + 1;
    }
    Ok(search(g, &tags).automorphisms)
}

pub fn isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> Result<bool> {
    let ka = match canonicalize(a)? {
        Canonical::Term { key, .. } => Some(key),
        Canonical::Zero => None,
    };
    let kb = match canonicalize(b)? {
        Canonical::Term { key, .. } => Some(key),
        Canonical::Zero => None,
    };
    Ok(ka.is_some() && ka == kb)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn tripod() -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        let v = g.add_vertex();
        for _ in 0..3 {
            g.add_leaf(v, LeafLabel::E0);
        }
        g
    }

    pub fn theta(op: Op) -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        let (u, v) = (g.add_vertex(), g.add_vertex());
        for _ in 0..3 {
            g.add_edge(u, v, EdgeLabel::new(op));
        }
        g
    }

    pub fn dumbbell(op: Op) -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        let (u, v) = (g.add_vertex(), g.add_vertex());
        g.add_edge(u, u, EdgeLabel::new(op));
        g.add_edge(u, v, EdgeLabel::new(op));
        g.add_edge(v, v, EdgeLabel::new(op));
        g
    }

    pub fn tadpole() -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        let v = g.add_vertex();
        g.add_edge(v, v, EdgeLabel::new(Op::GmGp));
        g.add_leaf(v, LeafLabel::E0);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    /// Counts label-preserving half-edge bijections by backtracking.
    fn brute_aut(g: &LabeledGraph, fixed: &[usize]) -> u64 {
        let n = g.num_halves();
        let vof = g.vertex_of();
        let own = g.owner_of();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut vmap = vec![usize::MAX; g.vertices.len()];
        fn compatible(g: &LabeledGraph, own: &[Owner], fixed: &[usize], h: usize, k: usize) -> bool {
            match (own[h], own[k]) {
                (Owner::Leaf(a), Owner::Leaf(b)) => {
                    g.leaves[a].label == g.leaves[b].label && (!fixed.contains(&a) && !fixed.contains(&b) || a == b)
                }
                (Owner::Edge(a, sa), Owner::Edge(b, sb)) => {
                    let (la, lb) = (g.edges[a].label, g.edges[b].label);
                    la == lb && (!la.is_directed() || sa == sb)
                }
                _ => false,
            }
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(
            h: usize,
            g: &LabeledGraph,
            own: &[Owner],
            vof: &[usize],
            fixed: &[usize],
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
            vmap: &mut Vec<usize>,
        ) -> u64 {
            let n = map.len();
            if h == n {
                return 1;
            }
            let mut total = 0;
            for k in 0..n {
                if used[k] || !compatible(g, own, fixed, h, k) {
                    continue;
                }
                let (vh, vk) = (vof[h], vof[k]);
                if vmap[vh] != usize::MAX && vmap[vh] != vk {
                    continue;
                }
                if vmap[vh] == usize::MAX && vmap.contains(&vk) {
                    continue;
                }
                if g.degree(vh) != g.degree(vk) {
                    continue;
                }
                // partner consistency
                if let (Owner::Edge(a, s), Owner::Edge(b, t)) = (own[h], own[k]) {
                    let ph = g.edges[a].ends[1 - s];
                    let pk = g.edges[b].ends[1 - t];
                    if map[ph] != usize::MAX && map[ph] != pk {
                        continue;
                    }
                    if map[ph] == usize::MAX && used[pk] && ph != h {
                        continue;
                    }
                }
                let fresh = vmap[vh] == usize::MAX;
                vmap[vh] = vk;
                map[h] = k;
                used[k] = true;
                total += rec(h + 1, g, own, vof, fixed, map, used, vmap);
                used[k] = false;
                map[h] = usize::MAX;
                if fresh {
                    vmap[vh] = usize::MAX;
                }
            }
            total
        }
        rec(0, g, &own, &vof, fixed, &mut map, &mut used, &mut vmap)
    }

    fn key(g: &LabeledGraph) -> GraphKey {
        match canonicalize(g).unwrap() {
            Canonical::Term { key, .. } => key,
            Canonical::Zero => panic!("unexpected zero"),
        }
    }

    #[test]
    fn automorphism_counts_of_small_graphs() {
        assert_eq!(automorphism_count(&tripod(), &[]).unwrap(), 6);
        assert_eq!(automorphism_count(&theta(Op::GmGp), &[]).unwrap(), 12);
        assert_eq!(automorphism_count(&dumbbell(Op::GmGp), &[]).unwrap(), 8);
        assert_eq!(automorphism_count(&tadpole(), &[]).unwrap(), 2);
        assert_eq!(automorphism_count(&tripod(), &[0]).unwrap(), 2);
        for g in [tripod(), theta(Op::GmGp), dumbbell(Op::GmGp), tadpole()] {
            assert_eq!(automorphism_count(&g, &[]).unwrap(), brute_aut(&g, &[]));
        }
    }

    #[test]
    fn genus_values() {
        assert_eq!(tripod().genus().unwrap(), 0);
        assert_eq!(tadpole().genus().unwrap(), 1);
        assert_eq!(theta(Op::GmGp).genus().unwrap(), 2);
        let mut g = tripod();
        g.add_vertex();
        assert!(g.genus().is_err());
    }

    #[test]
    fn theta_and_dumbbell_are_distinct() {
        assert_ne!(key(&theta(Op::GmGp)), key(&dumbbell(Op::GmGp)));
        assert!(!isomorphic(&theta(Op::GmGp), &dumbbell(Op::GmGp)).unwrap());
    }

    #[test]
    fn odd_parallel_edges_vanish() {
        assert_eq!(canonicalize(&theta(Op::Gm)).unwrap(), Canonical::Zero);
    }

    #[test]
    fn relabeled_tripod_same_key() {
        let mut g = tripod();
        g.vertices[0].reverse();
        assert_eq!(key(&g), key(&tripod()));
    }

    #[test]
    fn key_text_roundtrip() {
        let k = key(&dumbbell(Op::GmGp));
        assert_eq!(GraphKey::decode(&k.encode()).unwrap(), k);
        assert_eq!(GraphKey::decode(&k.compact()).unwrap(), k);
        let again = key(&k.to_graph());
        assert_eq!(again, k);
    }

    #[test]
    fn malformed_pairing_rejected() {
        let mut g = tripod();
        g.leaves[1].half = 0;
        assert!(canonicalize(&g).is_err());
    }
}
