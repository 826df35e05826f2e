//! Local graph operations with exact Koszul bookkeeping.
//!
//! Every operation keeps the relative object order of untouched objects.
//! Moving an odd object past others is paid for explicitly.

use num::{One, Zero};

use super::ops::OpTables;
use crate::error::{Error, Result};
use crate::genexp::GraphSum;
use crate::rational::Rational;
use crate::supergraph::{Edge, EdgeLabel, LabeledGraph, Leaf, Op, Owner};

pub type Terms = Vec<(LabeledGraph, Rational)>;

fn one() -> Rational {
    Rational::one()
}

fn signed(neg: bool, c: Rational) -> Rational {
    if neg {
        -c
    } else {
        c
    }
}

/// Parity of the edges at positions in `range` (leaves are even).
pub fn parity_of(g: &LabeledGraph, range: std::ops::Range<usize>) -> bool {
    g.edges[range].iter().filter(|e| e.label.is_odd()).count() % 2 == 1
}

/// Drops empty vertices and renumbers half-edges `0..n` in slot order.
pub fn tidy(g: &LabeledGraph) -> LabeledGraph {
    let mut map = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    for slots in g.vertices.iter().filter(|s| !s.is_empty()) {
        let mut v = Vec::new();
        for &h in slots {
            let n = map.len();
            map.insert(h, n);
            v.push(n);
        }
        vertices.push(v);
    }
    LabeledGraph {
        vertices,
        leaves: g.leaves.iter().map(|l| Leaf { half: map[&l.half], label: l.label }).collect(),
        edges: g.edges.iter().map(|e| Edge { ends: [map[&e.ends[0]], map[&e.ends[1]]], label: e.label }).collect(),
    }
}

/// The same edge read from its other end, as a combination of labels.
pub fn reverse_edge(g: &LabeledGraph, i: usize) -> Terms {
    let e = g.edges[i];
    OpTables::get()
        .reversed(e.label.op)
        .iter()
        .map(|(op, c)| {
            let mut h = g.clone();
            h.edges[i] = Edge { ends: [e.ends[1], e.ends[0]], label: EdgeLabel::new(*op) };
            (h, c.clone())
        })
        .collect()
}

/// Rewrites edge `i` so that `ends[0] == half`.
pub fn orient(g: &LabeledGraph, i: usize, half: usize) -> Terms {
    if g.edges[i].ends[0] == half {
        vec![(g.clone(), one())]
    } else {
        reverse_edge(g, i)
    }
}

/// Composes `x` onto edge `i` at its `ends[0]`.
pub fn apply_front(g: &LabeledGraph, i: usize, x: Op) -> Terms {
    let e = g.edges[i];
    OpTables::get()
        .compose(x, e.label.op)
        .iter()
        .map(|(op, c)| {
            let mut h = g.clone();
            h.edges[i].label = EdgeLabel::new(*op);
            (h, c.clone())
        })
        .collect()
}

/// `Q` acting on the object at `half`, with the Koszul sign of moving `Q`
/// from the front of the object order. Harmonic leaves are killed.
pub fn insert_q(g: &LabeledGraph, half: usize) -> Terms {
    let owner = g.owner_of()[half];
    let Owner::Edge(i, _) = owner else { return Vec::new() };
    let neg = parity_of(g, 0..i);
    let mut out = Vec::new();
    for (h, c) in orient(g, i, half) {
        for (k, d) in apply_front(&h, i, Op::QId) {
            out.push((k, signed(neg, &c * d)));
        }
    }
    out
}

/// Removes edge `i` and returns the graph (half ids unchanged).
fn without_edge(g: &LabeledGraph, i: usize) -> LabeledGraph {
    let mut h = g.clone();
    let e = h.edges.remove(i);
    for s in h.vertices.iter_mut() {
        s.retain(|x| !e.ends.contains(x));
    }
    h
}

/// Contracts the non-loop edge `i` (meant for `Id`).
pub fn contract_edge(g: &LabeledGraph, i: usize) -> LabeledGraph {
    let vof = g.vertex_of();
    let e = g.edges[i];
    let (u, w) = (vof[e.ends[0]], vof[e.ends[1]]);
    let mut h = without_edge(g, i);
    let moved = std::mem::take(&mut h.vertices[w]);
    h.vertices[u].extend(moved);
    tidy(&h)
}

/// Eliminates the 2-valent vertex `m`. Leaves are taken to be harmonic.
pub fn compose_at(g: &LabeledGraph, m: usize) -> Result<Terms> {
    let slots = &g.vertices[m];
    let owners = g.owner_of();
    let (ha, hb) = (slots[0], slots[1]);
    match (owners[ha], owners[hb]) {
        (Owner::Edge(a, _), Owner::Edge(b, _)) if a != b => {
            let mut out = Vec::new();
            // edge a ends at m, edge b starts at m
            for (g1, c1) in orient(g, a, g.edges[a].ends[0]) {
                let g1 = if g1.edges[a].ends[1] == ha {
                    vec![(g1, c1)]
                } else {
                    reverse_edge(&g1, a).into_iter().map(|(x, c)| (x, &c * &c1)).collect()
                };
                for (g2, c2) in g1 {
                    for (g3, c3) in orient(&g2, b, hb) {
                        let (ea, eb) = (g3.edges[a], g3.edges[b]);
                        let (lo, hi) = (a.min(b), a.max(b));
                        let moving = if a < b { eb.label.is_odd() } else { ea.label.is_odd() };
                        let neg = moving && parity_of(&g3, lo + 1..hi);
                        for (op, c4) in OpTables::get().compose(ea.label.op, eb.label.op) {
                            let mut h = g3.clone();
                            h.edges[lo] = Edge { ends: [ea.ends[0], eb.ends[1]], label: EdgeLabel::new(*op) };
                            h.edges.remove(hi);
                            h.vertices[m].clear();
                            out.push((tidy(&h), signed(neg, &(&c2 * &c3) * c4)));
                        }
                    }
                }
            }
            Ok(out)
        }
        (Owner::Leaf(l), Owner::Edge(a, _)) | (Owner::Edge(a, _), Owner::Leaf(l)) => {
            let half = if owners[ha] == Owner::Leaf(l) { hb } else { ha };
            let far = if g.edges[a].ends[0] == half { g.edges[a].ends[1] } else { g.edges[a].ends[0] };
            let mut out = Vec::new();
            // the operator acts on the leaf vector and lands at the far end
            for (g1, c1) in orient(g, a, far) {
                let k = OpTables::on_harmonic(g1.edges[a].label.op);
                if k.is_zero() {
                    continue;
                }
                let mut h = g1.clone();
                h.leaves[l].half = far;
                h.edges.remove(a);
                h.vertices[m].clear();
                out.push((tidy(&h), c1 * k));
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported { name: "compose".into(), reason: "2-valent vertex without an edge".into() }),
    }
}

/// Brings a graph to canonical reduced form: no 2-valent vertices and no
/// non-loop `Id` edges.
pub fn reduce_into(g: &LabeledGraph, c: Rational, out: &mut GraphSum) -> Result<()> {
    if c.is_zero() {
        return Ok(());
    }
    if let Some(m) = g.vertices.iter().position(|s| s.len() <= 2) {
        if g.vertices[m].len() < 2 {
            return Err(Error::Unsupported { name: "reduce".into(), reason: "vertex of degree below 2".into() });
        }
        for (h, d) in compose_at(g, m)? {
            reduce_into(&h, &c * d, out)?;
        }
        return Ok(());
    }
    let vof = g.vertex_of();
    if let Some(i) = g.edges.iter().position(|e| e.label.op == Op::Id && vof[e.ends[0]] != vof[e.ends[1]]) {
        return reduce_into(&contract_edge(g, i), c, out);
    }
    out.add_graph(g, c)
}

pub fn reduce_terms(terms: &Terms) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    for (g, c) in terms {
        reduce_into(g, c.clone(), &mut out)?;
    }
    Ok(out)
}

/// Moves edge `i` to the front of the edge list, with its Koszul sign.
pub fn edge_to_front(g: &LabeledGraph, i: usize) -> (LabeledGraph, bool) {
    let neg = g.edges[i].label.is_odd() && parity_of(g, 0..i);
    let mut h = g.clone();
    let e = h.edges.remove(i);
    h.edges.insert(0, e);
    (h, neg)
}

/// Moves the halves in `subset` from their vertices to vertex `to`.
pub fn move_slots(g: &LabeledGraph, subset: &[usize], to: usize) -> LabeledGraph {
    let mut h = g.clone();
    for s in h.vertices.iter_mut() {
        s.retain(|x| !subset.contains(x));
    }
    h.vertices[to].extend_from_slice(subset);
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{evaluate, testing::full_instance, EvalContext};
    use crate::supergraph::LeafLabel;

    fn ctx() -> EvalContext<Rational> {
        let (a, d) = full_instance();
        let mut c = EvalContext::scalar(&a, &d).unwrap();
        c.bind_externals(&[0, 1, 1]);
        c
    }

    fn value(terms: &Terms, ctx: &EvalContext<Rational>) -> Rational {
        terms.iter().map(|(g, c)| evaluate(g, ctx).unwrap() * c).sum()
    }

    #[test]
    fn reversal_preserves_value() {
        let ctx = ctx();
        let mut g = LabeledGraph::empty();
        let (u, v) = (g.add_vertex(), g.add_vertex());
        g.add_leaf(u, LeafLabel::Basis(7));
        g.add_leaf(v, LeafLabel::Basis(9));
        g.add_edge(u, v, EdgeLabel::new(Op::QGp));
        g.add_edge(u, v, EdgeLabel::new(Op::Gp));
        let base = evaluate(&g, &ctx).unwrap();
        assert_eq!(value(&reverse_edge(&g, 0), &ctx), base);
    }

    #[test]
    fn reduction_preserves_value() {
        use crate::oracle::{full_context, random_graph_with, Leaves, GENUINE, RICH};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut live = 0;
        for _ in 0..300 {
            let ctx = full_context(&mut rng, GENUINE.iter().chain(RICH).copied().collect::<Vec<_>>().as_slice(), Leaves::Harmonic, 4);
            let g = random_graph_with(&mut rng, 4, &Op::ALL, 3, 2);
            let Ok(sum) = reduce_terms(&vec![(g.clone(), one())]) else { continue };
            let after: Rational = sum.terms().map(|(k, c)| evaluate(&k.to_graph(), &ctx).unwrap() * c).sum();
            let before = evaluate(&g, &ctx).unwrap();
            assert_eq!(before, after, "{g:?}");
            if !before.is_zero() {
                live += 1;
            }
        }
        assert!(live > 20, "only {live} live cases");
    }
}
