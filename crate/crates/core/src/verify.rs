//! Symbolic and numeric checks of the genus-2 three-point relation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num::{One, Zero};
use rayon::prelude::*;

use crate::chalg::{check_axioms, derive_operators, AlgebraInstance, DerivedOperators};
use crate::contract::{evaluate, parameter, EvalContext};
use crate::error::{Error, Result};
use crate::genexp::{potential, potential_descendant, GraphSum};
use crate::rational::{self, Rational};
use crate::rewrite::normal::is_marked;
use crate::rewrite::{Normalizer, Rule};
use crate::series::Series;
use crate::strata::{
    at_zero, bp_coefficients, builtin_strata, identify_legs, parse_strata, to_differential, Block, DualGraph,
    Potential, Potentials, Slot, MARKINGS,
};
use crate::supergraph::{GraphKey, LeafLabel};

/// Strata file shipped with the crate: the strata after the three built-in ones.
pub const DEFAULT_STRATA: &str = include_str!("../../../data/bp_strata.txt");

/// Number of strata in the relation.
pub const STRATA: usize = 20;

/// Weighted list of strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub terms: Vec<(Rational, DualGraph)>,
}

impl Relation {
    pub fn strata(&self) -> Vec<DualGraph> {
        self.terms.iter().map(|(_, d)| d.clone()).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&Rational> {
        self.terms.iter().find(|(_, d)| d.name == name).map(|(c, _)| c)
    }
}

/// The relation with the built-in strata D1 to D3 followed by the strata in
/// `text`, which must be D4 to D20 in order.
pub fn bp_relation(text: &str) -> Result<Relation> {
    let mut strata = builtin_strata();
    strata.extend(parse_strata(text)?);
    if strata.len() != STRATA {
        return Err(Error::Structure(format!("expected {} strata, found {}", STRATA, strata.len())));
    }
    for (i, d) in strata.iter().enumerate() {
        let want = format!("D{}", i + 1);
        if d.name != want {
            return Err(Error::Unsupported { name: d.name.clone(), reason: format!("expected stratum {want} here") });
        }
    }
    Ok(Relation { terms: bp_coefficients().into_iter().zip(strata).collect() })
}

/// Strata rows over normal-form graph columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientTable {
    pub rows: Vec<String>,
    pub columns: Vec<GraphKey>,
    pub entries: Vec<Vec<Rational>>,
}

impl CoefficientTable {
    /// Columns are the union of supports, ordered by key.
    pub fn from_rows(rows: &[(String, GraphSum)]) -> Self {
        let columns: Vec<GraphKey> =
            rows.iter().flat_map(|(_, s)| s.terms().map(|(k, _)| k.clone())).collect::<BTreeSet<_>>().into_iter().collect();
        let entries = rows.iter().map(|(_, s)| columns.iter().map(|k| s.coefficient(k)).collect()).collect();
        CoefficientTable { rows: rows.iter().map(|(n, _)| n.clone()).collect(), columns, entries }
    }

    pub fn row(&self, name: &str) -> Option<&[Rational]> {
        self.rows.iter().position(|r| r == name).map(|i| self.entries[i].as_slice())
    }

    /// Nonzero entries of a row.
    pub fn row_values(&self, name: &str) -> Vec<Rational> {
        self.row(name).map(|r| r.iter().filter(|c| !c.is_zero()).cloned().collect()).unwrap_or_default()
    }

    /// Columns holding graphs that still carry `Q` or `Π₀`.
    pub fn marked_columns(&self) -> usize {
        self.columns.iter().filter(|k| is_marked(k)).count()
    }

    /// `Σᵢ cᵢ · rowᵢ` for the given coefficients by row name.
    pub fn combine(&self, coeffs: &BTreeMap<String, Rational>) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.columns.len()];
        for (name, row) in self.rows.iter().zip(&self.entries) {
            if let Some(c) = coeffs.get(name) {
                for (o, x) in out.iter_mut().zip(row) {
                    *o += c * x;
                }
            }
        }
        out
    }

    /// Tab-separated export; header cells are mapped names where known,
    /// otherwise compact keys.
    pub fn to_tsv(&self, names: &BTreeMap<String, String>, print_zeros: bool) -> String {
        let mut s = String::from("stratum");
        for k in &self.columns {
            let c = k.compact();
            s.push('\t');
            s.push_str(names.get(&c).map(String::as_str).unwrap_or(&c));
        }
        s.push('\n');
        for (name, row) in self.rows.iter().zip(&self.entries) {
            s.push_str(name);
            for x in row {
                s.push('\t');
                if print_zeros || !x.is_zero() {
                    s.push_str(&rational::fmt(x));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Mapping file: `<compact key><TAB><name>` per line, `#` comments.
pub fn parse_mapping(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, name) =
            line.split_once('\t').ok_or_else(|| Error::Parse { line: i + 1, msg: "expected key<TAB>name".into() })?;
        let key = GraphKey::decode(k.trim())?;
        out.insert(key.compact(), name.trim().to_string());
    }
    Ok(out)
}

/// Outcome of the symbolic check.
#[derive(Clone, Debug)]
pub struct SymbolicReport {
    /// Normal form of the weighted sum of the zero-point strata.
    pub residual: GraphSum,
    pub table: CoefficientTable,
    pub zero_point: Vec<(String, GraphSum)>,
    pub normal_forms: Vec<(String, GraphSum)>,
    /// Graphs visited by the relation closure.
    pub visited: usize,
}

impl SymbolicReport {
    pub fn passed(&self) -> bool {
        self.residual.is_empty()
    }

    /// Strata whose normal form keeps a graph with `Q` or `Π₀`.
    pub fn stalled(&self) -> Vec<&str> {
        self.normal_forms.iter().filter(|(_, s)| s.terms().any(|(k, _)| is_marked(k))).map(|(n, _)| n.as_str()).collect()
    }

    /// Distinct plain graphs across all normal forms.
    pub fn final_support(&self) -> usize {
        self.table.columns.len() - self.table.marked_columns()
    }

    /// Residual terms with the per-stratum contributions.
    pub fn render(&self, coeffs: &[(Rational, String)]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "closure visited {} graphs", self.visited);
        let _ = writeln!(s, "final graphs: {} (plus {} with Q or Π₀)", self.final_support(), self.table.marked_columns());
        let stalled = self.stalled();
        if !stalled.is_empty() {
            let _ = writeln!(s, "normal forms with Q or Π₀ left: {}", stalled.join(" "));
        }
        if self.passed() {
            let _ = writeln!(s, "residual: 0");
            return s;
        }
        let _ = writeln!(s, "residual: {} graphs", self.residual.len());
        for (k, c) in self.residual.terms() {
            let _ = writeln!(s, "{}\t{}", rational::fmt(c), k.compact());
            for ((w, name), (_, nf)) in coeffs.iter().zip(&self.normal_forms) {
                let x = nf.coefficient(k);
                if !x.is_zero() {
                    let _ = writeln!(s, "\t{} × {} = {}", rational::fmt(w), name, rational::fmt(&(w * &x)));
                }
            }
        }
        s
    }
}

/// Zero-point sums of the strata with the legs identified.
pub fn zero_point_sums(strata: &[DualGraph]) -> Result<Vec<GraphSum>> {
    let pots = Potentials::for_strata(strata)?;
    strata.par_iter().map(|d| identify_legs(&at_zero(d, &pots)?)).collect()
}

/// Normalizes every stratum and the weighted sum modulo the relations
/// closed over all of them.
pub fn verify_bp_symbolic(rel: &Relation) -> Result<SymbolicReport> {
    let strata = rel.strata();
    let sums = zero_point_sums(&strata)?;
    let mut n = Normalizer::new(&Rule::ALL);
    for z in &sums {
        n.absorb(z)?;
    }
    Ok(symbolic_with(&n, rel, &sums))
}

fn symbolic_with(n: &Normalizer, rel: &Relation, sums: &[GraphSum]) -> SymbolicReport {
    let mut total = GraphSum::new();
    for ((c, _), z) in rel.terms.iter().zip(sums) {
        total.add_sum(z, c);
    }
    let names: Vec<String> = rel.terms.iter().map(|(_, d)| d.name.clone()).collect();
    let normal_forms: Vec<(String, GraphSum)> =
        names.iter().cloned().zip(sums.par_iter().map(|z| n.normal_form(z)).collect::<Vec<_>>()).collect();
    SymbolicReport {
        residual: n.normal_form(&total),
        table: CoefficientTable::from_rows(&normal_forms),
        zero_point: names.into_iter().zip(sums.iter().cloned()).collect(),
        normal_forms,
        visited: n.visited(),
    }
}

/// Strata reached from `d` by the fewest local changes (moving a node end,
/// moving a marking, moving the ψ-class to another flag, moving one unit of
/// genus between components) that give a
/// valid stratum, up to three changes. Results are distinct up to
/// relabeling the markings.
pub fn mutations(d: &DualGraph) -> Vec<DualGraph> {
    let equivalent = |a: &DualGraph, b: &DualGraph| a.distinct_labelings().iter().any(|l| l.isomorphic(b));
    let mut out: Vec<DualGraph> = Vec::new();
    let mut layer = vec![d.clone()];
    for _ in 0..3 {
        let next: Vec<DualGraph> = layer.iter().flat_map(edits).collect();
        for m in &next {
            if m.validate().is_ok() && !equivalent(m, d) && !out.iter().any(|o| equivalent(o, m)) {
                out.push(m.clone());
            }
        }
        if !out.is_empty() {
            break;
        }
        layer = next;
    }
    out
}

fn edits(d: &DualGraph) -> Vec<DualGraph> {
    let nv = d.genus.len();
    let mut out = Vec::new();
    for (e, node) in d.nodes.iter().enumerate() {
        for side in 0..2 {
            for v in (0..nv).filter(|&v| v != node.ends[side]) {
                let mut m = d.clone();
                m.nodes[e].ends[side] = v;
                out.push(m);
            }
        }
    }
    for (i, mk) in d.markings.iter().enumerate() {
        for v in (0..nv).filter(|&v| v != mk.vertex) {
            let mut m = d.clone();
            m.markings[i].vertex = v;
            out.push(m);
        }
    }
    if d.nodes.iter().any(|n| n.psi.is_some()) || d.markings.iter().any(|m| m.psi) {
        let mut bare = d.clone();
        bare.nodes.iter_mut().for_each(|n| n.psi = None);
        bare.markings.iter_mut().for_each(|m| m.psi = false);
        for e in 0..d.nodes.len() {
            for side in 0..2 {
                let mut m = bare.clone();
                m.nodes[e].psi = Some(side);
                out.push(m);
            }
        }
        for i in 0..d.markings.len() {
            let mut m = bare.clone();
            m.markings[i].psi = true;
            out.push(m);
        }
    }
    for a in (0..nv).filter(|&a| d.genus[a] > 0) {
        for b in (0..nv).filter(|&b| b != a) {
            let mut m = d.clone();
            m.genus[a] -= 1;
            m.genus[b] += 1;
            out.push(m);
        }
    }
    out
}

/// One canary run: the relation with one stratum replaced.
#[derive(Clone, Debug)]
pub struct CanaryResult {
    pub stratum: String,
    pub mutant: DualGraph,
    pub residual: GraphSum,
}

/// Replaces each stratum in turn by its first mutation and recomputes the
/// residual.
pub fn mutation_canary(rel: &Relation) -> Result<Vec<CanaryResult>> {
    let strata = rel.strata();
    let sums = zero_point_sums(&strata)?;
    let mutants: Vec<(usize, DualGraph)> = strata
        .iter()
        .enumerate()
        .filter_map(|(i, d)| mutations(d).into_iter().next().map(|m| (i, m)))
        .collect();
    let mutant_sums = zero_point_sums(&mutants.iter().map(|(_, m)| m.clone()).collect::<Vec<_>>())?;
    let mut n = Normalizer::new(&Rule::ALL);
    for z in sums.iter().chain(&mutant_sums) {
        n.absorb(z)?;
    }
    let mut out = Vec::new();
    for ((i, m), z) in mutants.into_iter().zip(mutant_sums) {
        let mut total = GraphSum::new();
        for (j, ((c, _), s)) in rel.terms.iter().zip(&sums).enumerate() {
            total.add_sum(if j == i { &z } else { s }, c);
        }
        out.push(CanaryResult { stratum: strata[i].name.clone(), mutant: m, residual: n.normal_form(&total) });
    }
    Ok(out)
}

/// The four potentials evaluated as series over an instance.
pub struct SeriesPotentials {
    phi: BTreeMap<Potential, Series>,
    pub harmonic: usize,
    /// `η^{αβ}` on the harmonic basis.
    pub eta_inv: Vec<Vec<Rational>>,
    pub cap: usize,
    cache: std::sync::Mutex<HashMap<(Potential, Vec<usize>, Option<usize>), Series>>,
}

fn sum_series(s: &GraphSum, ctx: &EvalContext<Series>) -> Result<Series> {
    let parts: Vec<Series> = s
        .terms()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(k, c)| Ok(evaluate(&k.to_graph(), ctx)?.scale(c)))
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold(Series::zero(ctx.unit.cap), |acc, p| acc.add(p)))
}

impl SeriesPotentials {
    /// Potentials through total degree `cap` in the parameters.
    pub fn build(alg: &AlgebraInstance, d: &DerivedOperators, cap: usize) -> Result<Self> {
        let ctx = EvalContext::series(alg, d, cap)?;
        let eta_inv = d.eta_inv.clone().ok_or_else(|| Error::Algebra("degenerate pairing on H₀".into()))?;
        let n0 = d.h0.len();
        let mut phi = BTreeMap::new();
        phi.insert(Potential::Genus0, sum_series(&potential(0, cap)?, &ctx)?);
        phi.insert(Potential::Genus1, sum_series(&potential(1, cap)?, &ctx)?);
        phi.insert(Potential::Genus2, sum_series(&potential(2, cap)?, &ctx)?);
        phi.insert(Potential::Descendant, sum_series(&potential_descendant(cap.saturating_sub(1))?, &ctx)?);
        let eta_inv = (0..n0).map(|a| (0..n0).map(|b| eta_inv[(a, b)].clone()).collect()).collect();
        Ok(SeriesPotentials { phi, harmonic: n0, eta_inv, cap, cache: Default::default() })
    }

    pub fn series(&self, p: Potential) -> &Series {
        &self.phi[&p]
    }

    /// `∂_{T1,t1} ∂_{T0,t0…} Φ` on harmonic indices.
    pub fn derivative(&self, p: Potential, t0: &[usize], t1: Option<usize>) -> Result<Series> {
        let mut sorted = t0.to_vec();
        sorted.sort();
        let key = (p, sorted, t1);
        if let Some(s) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let mut s = self.phi[&p].clone();
        if let Some(a) = t1 {
            s = s.partial(parameter(1, a, false))?;
        }
        for &a in &key.1 {
            s = s.partial(parameter(0, a, false))?;
        }
        self.cache.lock().expect("cache lock").insert(key, s.clone());
        Ok(s)
    }
}

fn block_value(b: &Block, pots: &SeriesPotentials, marks: &[usize; MARKINGS], idx: &BTreeMap<u16, usize>) -> Result<Series> {
    let at = |s: &Slot| match s {
        Slot::Mark(m) => marks[*m as usize],
        Slot::Index(i) => idx[i],
    };
    let t0: Vec<usize> = b.t0.iter().map(at).collect();
    pots.derivative(b.potential, &t0, b.t1.as_ref().map(at))
}

/// The stratum's differential expression as a series, external legs bound
/// to the harmonic basis vectors `marks`.
pub fn stratum_series(d: &DualGraph, pots: &SeriesPotentials, marks: &[usize; MARKINGS]) -> Result<Series> {
    let mut out = Series::zero(pots.cap);
    for t in to_differential(d)?.terms {
        let indices: Vec<u16> = t.eta.iter().flat_map(|&(k, l)| [k, l]).collect();
        let combos = pots.harmonic.pow(indices.len() as u32);
        for mut code in 0..combos {
            let mut idx = BTreeMap::new();
            for &i in &indices {
                idx.insert(i, code % pots.harmonic);
                code /= pots.harmonic;
            }
            let w = t.eta.iter().fold(t.coeff.clone(), |acc, (k, l)| acc * &pots.eta_inv[idx[k]][idx[l]]);
            if w.is_zero() {
                continue;
            }
            let mut prod = Series::constant(w, pots.cap);
            for b in &t.blocks {
                prod = prod.mul(&block_value(b, pots, marks, &idx)?);
                if prod.is_empty() {
                    break;
                }
            }
            out = out.add(&prod);
        }
    }
    Ok(out)
}

/// Residual of the relation for each triple of harmonic indices.
#[derive(Clone, Debug)]
pub struct NumericReport {
    pub residuals: Vec<([usize; MARKINGS], Series)>,
    /// Degree through which the residuals are exact.
    pub exact_degree: usize,
}

impl NumericReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|(_, s)| s.is_empty())
    }
}

fn triples(n: usize) -> Vec<[usize; MARKINGS]> {
    (0..n.pow(MARKINGS as u32)).map(|c| [c % n, c / n % n, c / (n * n)]).collect()
}

/// Most derivatives any block of the relation takes.
fn max_order(rel: &Relation) -> Result<usize> {
    let mut m = 0;
    for (_, d) in &rel.terms {
        for t in to_differential(d)?.terms {
            for b in t.blocks {
                m = m.max(b.t0.len() + usize::from(b.t1.is_some()));
            }
        }
    }
    Ok(m)
}

/// Evaluates the potentials through degree `degree` and the relation for
/// every triple of harmonic indices. Refuses instances failing an axiom or
/// with odd harmonic directions.
pub fn verify_bp_numeric(alg: &AlgebraInstance, rel: &Relation, degree: usize) -> Result<NumericReport> {
    let report = check_axioms(alg)?;
    if !report.all_pass() {
        return Err(Error::Algebra(format!("instance fails the axioms\n{}", report.render())));
    }
    let d = derive_operators(alg)?;
    let pots = SeriesPotentials::build(alg, &d, degree)?;
    let exact_degree = degree.saturating_sub(max_order(rel)?);
    let residuals = triples(pots.harmonic)
        .into_iter()
        .map(|marks| {
            let mut total = Series::zero(pots.cap);
            for (c, s) in &rel.terms {
                total = total.add(&stratum_series(s, &pots, &marks)?.scale(c));
            }
            Ok((marks, total.truncate(exact_degree)))
        })
        .collect::<Result<_>>()?;
    Ok(NumericReport { residuals, exact_degree })
}

/// Graph value against series value for one stratum and leg assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub stratum: String,
    pub marks: [usize; MARKINGS],
    pub graph_value: Rational,
    pub series_value: Rational,
}

/// Compares the evaluated zero-point graph sum of every stratum with the
/// constant term of its series, legs bound to harmonic basis vectors. Needs
/// no axioms.
pub fn zero_point_cross_check(alg: &AlgebraInstance, strata: &[DualGraph]) -> Result<Vec<CrossCheck>> {
    let d = derive_operators(alg)?;
    let rel = Relation { terms: strata.iter().map(|s| (Rational::one(), s.clone())).collect() };
    let cap = max_order(&rel)?;
    let pots = SeriesPotentials::build(alg, &d, cap)?;
    let graph_pots = Potentials::for_strata(strata)?;
    let mut ctx = EvalContext::scalar(alg, &d)?;
    let mut out = Vec::new();
    for s in strata {
        let z = at_zero(s, &graph_pots)?;
        for marks in triples(pots.harmonic) {
            for (m, &a) in marks.iter().enumerate() {
                let v = d.h0[a].iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i as u16, c.clone()));
                ctx.set_leaf(LeafLabel::External(m as u8), v.collect());
            }
            let mut graph_value = Rational::zero();
            for (k, c) in z.terms() {
                graph_value += evaluate(&k.to_graph(), &ctx)? * c;
            }
            let series_value = stratum_series(s, &pots, &marks)?.constant_term();
            out.push(CrossCheck { stratum: s.name.clone(), marks, graph_value, series_value });
        }
    }
    Ok(out)
}
