//! Linear relations among graphs, each a consequence of the algebra axioms.
//!
//! Every generator returns raw term lists whose values sum to zero. Terms may
//! contain 2-valent vertices and non-loop `Id` edges; callers reduce them.

use std::fmt;

use num::{One, Zero};

use super::surgery::{edge_to_front, insert_q, move_slots, reverse_edge, Terms};
use crate::rational::{int, Rational};
use crate::supergraph::{Edge, EdgeLabel, LabeledGraph, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `Π₀ = Id − QG₊ − G₊Q`.
    ExpandPi0,
    /// Reading a `Q`-labeled edge from its other end.
    Reversal,
    /// `∫Q(…) = 0` at a vertex, with `Q` a derivation.
    IntegrateByParts,
    /// The 7-term relation for `G₋` on the product at a vertex.
    SevenTerm,
    /// `str(G₋∘a·) = (1/12) str(G₋(a)·)` for a `G₋` loop.
    Twelfth,
    /// Contraction of `Id` edges and 2-valent vertices; appears in traces only.
    Contract,
}

impl Rule {
    pub const ALL: [Rule; 5] = [Rule::ExpandPi0, Rule::Reversal, Rule::IntegrateByParts, Rule::SevenTerm, Rule::Twelfth];

    pub fn name(self) -> &'static str {
        match self {
            Rule::ExpandPi0 => "expand-pi0",
            Rule::Reversal => "reversal",
            Rule::IntegrateByParts => "integrate-by-parts",
            Rule::SevenTerm => "seven-term",
            Rule::Twelfth => "twelfth",
            Rule::Contract => "contract",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A relation `Σ c·graph = 0` with its provenance.
#[derive(Clone, Debug)]
pub struct Relation {
    pub rule: Rule,
    /// Edge or vertex index in the anchoring graph.
    pub site: usize,
    pub terms: Terms,
}

/// Sign of the supertrace identity as realized by the loop convention.
const TWELFTH_SIGN: i64 = 1;

fn relabel(g: &LabeledGraph, i: usize, op: Op) -> LabeledGraph {
    let mut h = g.clone();
    h.edges[i].label = EdgeLabel::new(op);
    h
}

fn is_loop(g: &LabeledGraph, i: usize, vof: &[usize]) -> bool {
    vof[g.edges[i].ends[0]] == vof[g.edges[i].ends[1]]
}

fn fresh(g: &LabeledGraph) -> usize {
    g.num_halves()
}

/// `G − G[Id] + G[QG₊] + G[QG₊ reversed] = 0` for each `Π₀` edge.
pub fn expand_pi0(g: &LabeledGraph) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if e.label.op != Op::Pi0 {
            continue;
        }
        let q = relabel(g, i, Op::QGp);
        let mut back = q.clone();
        back.edges[i].ends.swap(0, 1);
        let terms = vec![(g.clone(), int(1)), (relabel(g, i, Op::Id), int(-1)), (q, int(1)), (back, int(1))];
        out.push(Relation { rule: Rule::ExpandPi0, site: i, terms });
    }
    out
}

/// `G − (G with edge i read from the other end) = 0` for each `Q` edge.
pub fn reversal(g: &LabeledGraph) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if !e.label.op.has_q() {
            continue;
        }
        let mut terms = vec![(g.clone(), int(1))];
        terms.extend(reverse_edge(g, i).into_iter().map(|(h, c)| (h, -c)));
        out.push(Relation { rule: Rule::Reversal, site: i, terms });
    }
    out
}

/// Integration by parts at the `Q` side of each `Q` edge.
pub fn integrate_by_parts(g: &LabeledGraph) -> Vec<Relation> {
    let vof = g.vertex_of();
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        let Some(stripped) = e.label.op.strip_q() else { continue };
        let b = relabel(g, i, stripped);
        out.push(ibp_at(&b, vof[e.ends[0]], i));
    }
    out
}

/// `Σ_{h at v} Q inserted at h = 0`.
pub fn ibp_at(g: &LabeledGraph, v: usize, site: usize) -> Relation {
    let terms = g.vertices[v].iter().flat_map(|&h| insert_q(g, h)).collect();
    Relation { rule: Rule::IntegrateByParts, site, terms }
}

/// 7-term relations at `G₋` edges and at the `G₋` factor of `G₋G₊` edges.
pub fn seven_term(g: &LabeledGraph) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        for side in 0..2 {
            match e.label.op {
                Op::Gm => {
                    let vof = g.vertex_of();
                    if is_loop(g, i, &vof) {
                        continue;
                    }
                    let mut h = g.clone();
                    if side == 1 {
                        h.edges[i].ends.swap(0, 1);
                    }
                    out.extend(seven_term_at(&h, i, None));
                }
                Op::GmGp => {
                    let mut h = g.clone();
                    if side == 1 {
                        h.edges[i].ends.swap(0, 1);
                    }
                    let (h, m) = split_gmgp(&h, i);
                    out.extend(seven_term_at(&h, i, Some(m)));
                }
                _ => {}
            }
        }
    }
    out
}

/// Replaces the `G₋G₊` edge `i` by a `G₋` edge into a new 2-valent vertex
/// followed by a `G₊` edge at position `i + 1`.
fn split_gmgp(g: &LabeledGraph, i: usize) -> (LabeledGraph, usize) {
    let mut h = g.clone();
    let e = h.edges[i];
    let (x, y) = (fresh(g), fresh(g) + 1);
    let m = h.vertices.len();
    h.vertices.push(vec![x, y]);
    h.edges[i] = Edge { ends: [e.ends[0], x], label: EdgeLabel::new(Op::Gm) };
    h.edges.insert(i + 1, Edge { ends: [y, e.ends[1]], label: EdgeLabel::new(Op::Gp) });
    (h, m)
}

/// Relations for the `G₋` edge `i` acting on the product at its `ends[0]`
/// vertex `v`. The universe is all slots at `v` plus any subset of the slots
/// at the far vertex `w` (only `w`'s own subsets when `w` is `only_far`).
fn seven_term_at(g: &LabeledGraph, i: usize, only_far: Option<usize>) -> Vec<Relation> {
    let (g, neg) = edge_to_front(g, i);
    let base = if neg { -Rational::one() } else { Rational::one() };
    let vof = g.vertex_of();
    let e = g.edges[0];
    let (v, w) = (vof[e.ends[0]], vof[e.ends[1]]);
    debug_assert!(only_far.is_none_or(|m| m == w));
    let sv: Vec<usize> = g.vertices[v].iter().copied().filter(|&h| h != e.ends[0]).collect();
    let sw: Vec<usize> = g.vertices[w].iter().copied().filter(|&h| h != e.ends[1]).collect();
    let all: Vec<usize> = sv.iter().chain(&sw).copied().collect();
    let split = |u: &[usize]| {
        let rest: Vec<usize> = all.iter().copied().filter(|h| !u.contains(h)).collect();
        if rest.is_empty() {
            return None;
        }
        Some(move_slots(&move_slots(&g, u, v), &rest, w))
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << sw.len()) {
        let universe: Vec<usize> =
            sv.iter().copied().chain(sw.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, h)| *h)).collect();
        let n = universe.len();
        if n < 3 {
            continue;
        }
        let mut terms = Vec::new();
        if let Some(t) = split(&universe) {
            terms.push((t, base.clone()));
        }
        for a in 0..n {
            for b in a + 1..n {
                if let Some(t) = split(&[universe[a], universe[b]]) {
                    terms.push((t, -base.clone()));
                }
            }
        }
        let k = int(n as i64 - 2) * &base;
        for &h in &universe {
            if let Some(t) = split(&[h]) {
                terms.push((t, k.clone()));
            }
        }
        out.push(Relation { rule: Rule::SevenTerm, site: i, terms });
    }
    out
}

/// Each `G₋` loop equals a twelfth of a `G₋` edge into a new vertex carrying
/// an `Id` loop.
pub fn twelfth(g: &LabeledGraph) -> Vec<Relation> {
    let vof = g.vertex_of();
    let mut out = Vec::new();
    for i in 0..g.edges.len() {
        if g.edges[i].label.op != Op::Gm || !is_loop(g, i, &vof) {
            continue;
        }
        let (mut x, neg) = edge_to_front(g, i);
        let moved = x.edges[0].ends[1];
        for s in x.vertices.iter_mut() {
            s.retain(|&h| h != moved);
        }
        let w = x.add_vertex();
        x.vertices[w].push(moved);
        x.add_edge(w, w, EdgeLabel::new(Op::Id));
        let mut c = Rational::new(TWELFTH_SIGN.into(), 12.into());
        if neg {
            c = -c;
        }
        out.push(Relation { rule: Rule::Twelfth, site: i, terms: vec![(g.clone(), int(1)), (x, -c)] });
    }
    out
}

/// All relations anchored at `g` for the given rules. `7-term` and the
/// twelfth rule only apply to graphs free of `Q` and `Π₀`.
pub fn relations(g: &LabeledGraph, rules: &[Rule]) -> Vec<Relation> {
    let plain = g.edges.iter().all(|e| !e.label.op.has_q() && e.label.op != Op::Pi0);
    let mut out = Vec::new();
    for r in rules {
        match r {
            Rule::ExpandPi0 => out.extend(expand_pi0(g)),
            Rule::Reversal => out.extend(reversal(g)),
            Rule::IntegrateByParts => out.extend(integrate_by_parts(g)),
            Rule::SevenTerm if plain => out.extend(seven_term(g)),
            Rule::Twelfth if plain => out.extend(twelfth(g)),
            _ => {}
        }
    }
    out.retain(|r| !r.terms.iter().all(|(_, c)| c.is_zero()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rule_soundness;

    fn sound(rule: Rule, seed: u64, runs: usize, min_live: usize) {
        let r = rule_soundness(rule, seed, runs);
        assert!(r.passed(), "{}: {}", r.name, r.failures.join("\n"));
        assert!(r.live >= min_live, "{}: only {} live relations", r.name, r.live);
    }

    #[test]
    fn integration_by_parts_is_sound() {
        sound(Rule::IntegrateByParts, 1, 200, 20);
    }

    #[test]
    fn seven_term_is_sound() {
        sound(Rule::SevenTerm, 2, 100, 20);
    }

    #[test]
    fn twelfth_is_sound() {
        sound(Rule::Twelfth, 3, 400, 10);
    }

    #[test]
    fn reversal_and_pi0_expansion_hold_on_full_instances() {
        sound(Rule::Reversal, 4, 200, 10);
        sound(Rule::ExpandPi0, 5, 400, 10);
    }

    #[test]
    fn id_contraction_is_sound() {
        sound(Rule::Contract, 6, 400, 5);
    }
}
