//! Normal forms of graph sums modulo the relations of [`super::relations`].
//!
//! A [`Normalizer`] closes a set of graphs under the chosen rules: every
//! graph met is the anchor of all relations the rules produce, and every graph
//! occurring in such a relation is visited in turn. The relations are kept in
//! semi-echelon form, each row solved for its largest graph under [`Rank`]. The
//! normal form of a sum is what remains after substituting pivots until none
//! occurs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num::Zero;
use rayon::prelude::*;

use super::relations::{expand_pi0 as pi0_relations, relations, twelfth, Rule};
use super::surgery::{reduce_terms, Terms};
use crate::error::{Error, Result};
use crate::genexp::GraphSum;
use crate::rational::{self, Rational};
use crate::supergraph::{GraphKey, Op};

/// Elimination order: larger graphs are expressed through smaller ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank {
    /// Edges carrying `Q` or `Π₀`.
    pub marked: u32,
    /// `G₋` loops.
    pub gm_loops: u32,
    pub vertices: u32,
    pub key: GraphKey,
}

impl Rank {
    pub fn of(key: &GraphKey) -> Rank {
        let marked = key.edges.iter().filter(|e| e.label.op.has_q() || e.label.op == Op::Pi0).count() as u32;
        let gm_loops = key.edges.iter().filter(|e| e.a == e.b && e.label.op == Op::Gm).count() as u32;
        Rank { marked, gm_loops, vertices: key.n as u32, key: key.clone() }
    }
}

/// Whether a canonical graph still carries `Q` or `Π₀`.
pub fn is_marked(key: &GraphKey) -> bool {
    Rank::of(key).marked > 0
}

/// One substitution: every occurrence of `before` is replaced by `after`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub site: usize,
    pub before: GraphKey,
    pub after: GraphSum,
}

/// Ordered substitutions turning an input sum into an output sum.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<Step>,
}

impl RewriteTrace {
    /// Applies the substitutions to `input` in order.
    pub fn replay(&self, input: &GraphSum) -> GraphSum {
        let mut s = input.clone();
        for step in &self.steps {
            let c = s.coefficient(&step.before);
            if c.is_zero() {
                continue;
            }
            s.add_key(step.before.clone(), -c.clone());
            s.add_sum(&step.after, &c);
        }
        s
    }

    /// Plain-text log: a header line per step followed by the replacement
    /// terms, indented.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("step {i} {} site {}\t{}\n", s.rule, s.site, s.before.compact()));
            for (k, c) in s.after.terms() {
                out.push_str(&format!("  {}\t{}\n", rational::fmt(c), k.compact()));
            }
        }
        out
    }
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

type Vector = BTreeMap<Rank, Rational>;

fn axpy(v: &mut Vector, k: &Rank, c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = v.entry(k.clone()).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        v.remove(k);
    }
}

fn to_vector(s: &GraphSum) -> Vector {
    s.terms().map(|(k, c)| (Rank::of(k), c.clone())).collect()
}

fn to_sum(v: &Vector) -> GraphSum {
    let mut s = GraphSum::new();
    for (k, c) in v {
        s.add_key(k.key.clone(), c.clone());
    }
    s
}

/// A relation solved for its pivot: `pivot = Σ c·graph`.
#[derive(Clone, Debug)]
struct Row {
    rule: Rule,
    site: usize,
    rhs: Vec<(Rank, Rational)>,
}

/// Default bound on the number of graphs a closure may visit.
pub const DEFAULT_BUDGET: usize = 400_000;

/// Relation closure with its echelon basis.
#[derive(Clone, Debug)]
pub struct Normalizer {
    rules: Vec<Rule>,
    rows: HashMap<GraphKey, Row>,
    seen: HashSet<GraphKey>,
    budget: usize,
}

impl Normalizer {
    pub fn new(rules: &[Rule]) -> Self {
        Normalizer { rules: rules.to_vec(), rows: HashMap::new(), seen: HashSet::new(), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Number of graphs visited.
    pub fn visited(&self) -> usize {
        self.seen.len()
    }

    /// Number of independent relations found.
    pub fn relations(&self) -> usize {
        self.rows.len()
    }

    /// Closes the relation set over every graph reachable from `s`.
    pub fn absorb(&mut self, s: &GraphSum) -> Result<()> {
        let mut frontier: Vec<GraphKey> = s.terms().map(|(k, _)| k.clone()).filter(|k| self.seen.insert(k.clone())).collect();
        while !frontier.is_empty() {
            if self.seen.len() > self.budget {
                return Err(Error::Stall(format!("closure exceeded {} graphs", self.budget)));
            }
            frontier.sort();
            let rules = &self.rules;
            let found: Vec<Vec<(Rule, usize, GraphSum)>> = frontier
                .par_iter()
                .map(|k| {
                    relations(&k.to_graph(), rules)
                        .into_iter()
                        .map(|r| Ok((r.rule, r.site, reduce_terms(&r.terms)?)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let mut next = Vec::new();
            for (rule, site, sum) in found.into_iter().flatten() {
                for (k, _) in sum.terms() {
                    if self.seen.insert(k.clone()) {
                        next.push(k.clone());
                    }
                }
                self.insert(rule, site, &sum);
            }
            frontier = next;
        }
        Ok(())
    }

    fn insert(&mut self, rule: Rule, site: usize, relation: &GraphSum) {
        let mut v = to_vector(relation);
        self.eliminate(&mut v, |_, _| {});
        let Some((pivot, lead)) = v.pop_last() else { return };
        let rhs = v.into_iter().map(|(k, c)| (k, -c / &lead)).collect();
        self.rows.insert(pivot.key, Row { rule, site, rhs });
    }

    /// Substitutes pivots from the top down; `step` sees each substitution.
    fn eliminate(&self, v: &mut Vector, mut step: impl FnMut(&Rank, &Row)) {
        let mut bound: Option<Rank> = None;
        loop {
            let next = match &bound {
                None => v.keys().next_back().cloned(),
                Some(b) => v.range(..b.clone()).next_back().map(|(k, _)| k.clone()),
            };
            let Some(k) = next else { break };
            match self.rows.get(&k.key) {
                Some(row) => {
                    let c = v.remove(&k).expect("present");
                    for (t, d) in &row.rhs {
                        axpy(v, t, &c * d);
                    }
                    step(&k, row);
                }
                None => bound = Some(k),
            }
        }
    }

    /// Normal form of `s`, appending the substitutions used to `trace`.
    pub fn reduce(&self, s: &GraphSum, trace: &mut RewriteTrace) -> GraphSum {
        let mut v = to_vector(s);
        self.eliminate(&mut v, |k, row| {
            let mut after = GraphSum::new();
            for (t, d) in &row.rhs {
                after.add_key(t.key.clone(), d.clone());
            }
            trace.steps.push(Step { rule: row.rule, site: row.site, before: k.key.clone(), after });
        });
        to_sum(&v)
    }

    /// Normal form of `s` without a trace.
    pub fn normal_form(&self, s: &GraphSum) -> GraphSum {
        self.reduce(s, &mut RewriteTrace::default())
    }
}

/// Rewrites each term of `s` with `f`, recording one step per changed term.
fn substitute(
    s: &GraphSum,
    rule: Rule,
    trace: &mut RewriteTrace,
    mut f: impl FnMut(&GraphKey) -> Result<Option<GraphSum>>,
) -> Result<GraphSum> {
    let mut out = GraphSum::new();
    for (k, c) in s.terms() {
        match f(k)? {
            Some(after) => {
                out.add_sum(&after, c);
                trace.steps.push(Step { rule, site: 0, before: k.clone(), after });
            }
            None => out.add_key(k.clone(), c.clone()),
        }
    }
    Ok(out)
}

/// `G = G[Id] − G[QG₊] − G[QG₊ reversed]` for the first `Π₀` edge of each
/// graph, repeated until no `Π₀` edge remains.
fn expand_terms(terms: Terms) -> Terms {
    let mut out = Vec::new();
    for (g, c) in terms {
        match pi0_relations(&g).into_iter().next() {
            Some(r) => {
                let subs = r.terms.into_iter().skip(1).map(|(h, d)| (h, -d * &c)).collect();
                out.extend(expand_terms(subs));
            }
            None => out.push((g, c)),
        }
    }
    out
}

/// Replaces every `Π₀` edge by `Id − QG₊ − G₊Q`.
pub fn expand_pi0(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    substitute(s, Rule::ExpandPi0, trace, |k| {
        if !k.edges.iter().any(|e| e.label.op == Op::Pi0) {
            return Ok(None);
        }
        let mut after = GraphSum::new();
        for (g, c) in expand_terms(vec![(k.to_graph(), Rational::from_integer(1.into()))]) {
            after.add_graph(&g, c)?;
        }
        Ok(Some(after))
    })
}

/// Contracts non-loop `Id` edges and absorbs 2-valent vertices.
pub fn contract_id(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let one = Rational::from_integer(1.into());
    substitute(s, Rule::Contract, trace, |k| {
        let after = reduce_terms(&vec![(k.to_graph(), one.clone())])?;
        Ok((after.len() != 1 || after.coefficient(k) != one).then_some(after))
    })
}

/// Fails when a `Q` or `Π₀` edge survives.
fn require_plain(s: &GraphSum, stage: &str, trace: &RewriteTrace) -> Result<()> {
    match s.terms().find(|(k, _)| is_marked(k)) {
        Some((k, _)) => Err(Error::Stall(format!(
            "{stage}: {} survives after {} steps\n{}",
            k.compact(),
            trace.steps.len(),
            trace.to_text()
        ))),
        None => Ok(()),
    }
}

/// Rules that move `Q` off edges.
pub const Q_RULES: [Rule; 3] = [Rule::ExpandPi0, Rule::Reversal, Rule::IntegrateByParts];

/// Eliminates `Q` (and the `Π₀` edges it produces) by integration by parts
/// and reversal.
pub fn push_q(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let mut n = Normalizer::new(&Q_RULES);
    n.absorb(s)?;
    let out = n.reduce(s, trace);
    require_plain(&out, "push_q", trace)?;
    Ok(out)
}

/// Replaces each `G₋` loop by a twelfth of a `G₋` edge into an `Id` loop
/// and reduces; compositions `G₋G₋G₊` and `G₋` on a harmonic leaf vanish
/// in the reduction.
pub fn apply_vanishing(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let mut cur = contract_id(s, trace)?;
    loop {
        let next = substitute(&cur, Rule::Twelfth, trace, |k| {
            let g = k.to_graph();
            match twelfth(&g).into_iter().next() {
                Some(r) => {
                    let subs: Terms = r.terms.into_iter().skip(1).map(|(h, c)| (h, -c)).collect();
                    Ok(Some(reduce_terms(&subs)?))
                }
                None => Ok(None),
            }
        })?;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
}

/// Normal form modulo the 7-term relations.
pub fn apply_seven_term(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let mut n = Normalizer::new(&[Rule::SevenTerm]);
    n.absorb(s)?;
    Ok(n.reduce(s, trace))
}

/// Runs the stages in order and finishes with the normal form modulo every
/// rule, closed over the original input so that relations found while
/// pushing `Q` also apply to the final graphs.
pub fn normalize_traced(s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let mut n = Normalizer::new(&Rule::ALL);
    n.absorb(s)?;
    normalize_with(&n, s, trace)
}

/// As [`normalize_traced`] with a prepared closure, which must contain `s`.
pub fn normalize_with(n: &Normalizer, s: &GraphSum, trace: &mut RewriteTrace) -> Result<GraphSum> {
    let out = n.reduce(s, trace);
    require_plain(&out, "normalize", trace)?;
    Ok(out)
}

pub fn normalize(s: &GraphSum) -> Result<GraphSum> {
    normalize_traced(s, &mut RewriteTrace::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::strata::{at_zero, builtin_strata, identify_legs, Potentials};
    use crate::supergraph::{EdgeLabel, LabeledGraph, LeafLabel};

    /// Two vertices joined by edges with the given labels, two distinct
    /// leaves at each end.
    fn bridge(ops: &[Op]) -> LabeledGraph {
        let mut g = LabeledGraph::empty();
        let (u, v) = (g.add_vertex(), g.add_vertex());
        for (i, v) in [(0, u), (1, u), (2, v), (3, v)] {
            g.add_leaf(v, LeafLabel::Basis(i));
        }
        for &op in ops {
            g.add_edge(u, v, EdgeLabel::new(op));
        }
        g
    }

    fn zero_point(i: usize) -> GraphSum {
        let s = builtin_strata();
        let pots = Potentials::for_strata(&s).unwrap();
        identify_legs(&at_zero(&s[i], &pots).unwrap()).unwrap()
    }

    fn sorted(s: &GraphSum) -> Vec<Rational> {
        let mut v: Vec<Rational> = s.terms().map(|(_, c)| c.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn pi0_expansion_coefficients() {
        let s = GraphSum::single(&bridge(&[Op::Pi0]), frac(1, 16)).unwrap();
        let out = expand_pi0(&s, &mut RewriteTrace::default()).unwrap();
        assert_eq!(sorted(&out), vec![frac(-1, 16), frac(-1, 16), frac(1, 16)]);
        assert!(out.terms().all(|(k, _)| !k.edges.iter().any(|e| e.label.op == Op::Pi0)));
    }

    #[test]
    fn two_pi0_edges_give_nine_terms() {
        let g = bridge(&[Op::Pi0, Op::Pi0, Op::GmGp]);
        assert_eq!(expand_terms(vec![(g, frac(1, 1))]).len(), 9);
    }

    #[test]
    fn pi0_free_sums_are_unchanged() {
        let s = GraphSum::single(&bridge(&[Op::GmGp, Op::Gm]), frac(1, 3)).unwrap();
        let mut trace = RewriteTrace::default();
        assert_eq!(expand_pi0(&s, &mut trace).unwrap(), s);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn empty_sum_normalizes_to_empty() {
        assert!(normalize(&GraphSum::new()).unwrap().is_empty());
    }

    #[test]
    fn trace_replays_and_normal_forms_are_fixed() {
        for i in [0, 1] {
            let s = zero_point(i);
            let mut trace = RewriteTrace::default();
            let out = normalize_traced(&s, &mut trace).unwrap();
            assert!(!trace.steps.is_empty());
            assert_eq!(trace.replay(&s), out);
            assert_eq!(normalize(&out).unwrap(), out);
            assert!(out.terms().all(|(k, _)| !is_marked(k)));
        }
    }

    #[test]
    fn trace_text_lists_every_step() {
        let s = zero_point(1);
        let mut trace = RewriteTrace::default();
        normalize_traced(&s, &mut trace).unwrap();
        let text = trace.to_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("step ")).count(), trace.steps.len());
    }

    #[test]
    fn staged_pipeline_removes_q() {
        let s = GraphSum::single(&bridge(&[Op::QGp]), frac(1, 8)).unwrap();
        let mut trace = RewriteTrace::default();
        let out = push_q(&s, &mut trace).unwrap();
        assert!(out.terms().all(|(k, _)| !is_marked(k)));
        assert_eq!(trace.replay(&s), out);
    }
}
