//! Seeded oracles: relaxed and full instances, random graphs, and the
//! soundness and invariance checks built on them.
//!
//! Each axiom is linear in the operator it constrains, so the operators
//! satisfying a chosen subset form a subspace of the odd operators; random
//! members of that subspace give instances tailored to a single rule.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chalg::{
    derive_operators, minimal_quadruple_instance, monomial_derivative, monomial_frobenius, trivial_instance, AlgebraInstance,
};
use crate::contract::{evaluate, insert_j, insert_j_ordered, EvalContext};
use crate::error::Result;
use crate::genexp::GraphSum;
use crate::rewrite::relations::{expand_pi0, ibp_at, integrate_by_parts, reversal, seven_term, twelfth, Relation, Rule};
use crate::rewrite::surgery::{contract_edge, Terms};
use crate::linalg::Mat;
use crate::rational::{frac, int, Rational};
use crate::supergraph::{EdgeLabel, LabeledGraph, LeafLabel, Op};

fn sgn(odd: bool) -> Rational {
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

/// A random operator of the given parity.
pub fn random_op(a: &AlgebraInstance, odd: bool, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(a.dim, a.dim);
    for k in 0..a.dim {
        for i in 0..a.dim {
            if (a.parity[k] != a.parity[i]) == odd && rng.gen_range(0..3) == 0 {
                m[(k, i)] = int(rng.gen_range(-2i64..=2));
            }
        }
    }
    m
}

/// Random self-adjoint operator of the given parity.
pub fn random_self_adjoint(a: &AlgebraInstance, odd: bool, rng: &mut ChaCha8Rng) -> Mat {
    let r = random_op(a, odd, rng);
    let adj = a.adjoint(&r, odd).expect("nondegenerate");
    &r + &adj
}

/// Relaxed context: random self-adjoint matrices for the unprefixed tags,
/// `Q`-tags composed with the instance's `Q`.
pub fn relaxed_ctx(a: &AlgebraInstance, rng: &mut ChaCha8Rng) -> EvalContext<Rational> {
    let mut ops = BTreeMap::new();
    ops.insert(Op::Id, Mat::identity(a.dim));
    for (op, odd) in [(Op::Pi0, false), (Op::Gm, true), (Op::Gp, true), (Op::GmGp, false)] {
        ops.insert(op, random_self_adjoint(a, odd, rng));
    }
    for op in [Op::Id, Op::Gm, Op::Gp, Op::GmGp] {
        let m = &a.q * &ops[&op];
        ops.insert(op.with_q().expect("unprefixed tag"), m);
    }
    let mut ctx = EvalContext::custom(a.clone(), ops, Rational::zero()).expect("nondegenerate");
    for i in 0..a.dim {
        ctx.set_leaf(LeafLabel::Basis(i as u16), vec![(i as u16, int(1))]);
    }
    ctx
}

/// `ℚ[y]/y² ⊗ Λ[ξ₁, ξ₂]` with the odd derivation `Q = y ∂/∂ξ₁`.
pub fn grassmann_with_q() -> AlgebraInstance {
    let mut a = monomial_frobenius(1, 2);
    let y = a.left_mul(&a.basis(1));
    a.q = &y * &monomial_derivative(1, 2, 1);
    a
}

pub fn base() -> AlgebraInstance {
    monomial_frobenius(1, 2)
}

fn odd_basis(a: &AlgebraInstance) -> Vec<Mat> {
    let mut out = Vec::new();
    for k in 0..a.dim {
        for i in 0..a.dim {
            if a.parity[k] != a.parity[i] {
                let mut m = Mat::zeros(a.dim, a.dim);
                m[(k, i)] = int(1);
                out.push(m);
            }
        }
    }
    out
}

/// Odd operators with vanishing defect, as a basis of the solution space.
fn solve(a: &AlgebraInstance, defect: impl Fn(&Mat) -> Vec<Rational>) -> Vec<Mat> {
    let basis = odd_basis(a);
    let cols: Vec<Vec<Rational>> = basis.iter().map(&defect).collect();
    let rows = cols[0].len();
    let m = Mat::from_columns(rows, &cols);
    m.nullspace()
        .into_iter()
        .map(|v| {
            let mut out = Mat::zeros(a.dim, a.dim);
            for (b, c) in basis.iter().zip(v) {
                out = &out + &b.scale(&c);
            }
            out
        })
        .collect()
}

fn self_adjoint_defect(a: &AlgebraInstance, g: &Mat, sign: i64) -> Vec<Rational> {
    let d = g - &a.adjoint(g, true).expect("fixed instance").scale(&int(sign));
    (0..a.dim * a.dim).map(|x| d[(x / a.dim, x % a.dim)].clone()).collect()
}

fn derivation_defect(a: &AlgebraInstance, q: &Mat) -> Vec<Rational> {
    let mut out = Vec::new();
    for i in 0..a.dim {
        for j in 0..a.dim {
            let (x, y) = (a.basis(i), a.basis(j));
            let lhs = q.apply(&a.multiply(&x, &y));
            let t1 = a.multiply(&q.apply(&x), &y);
            let t2 = a.multiply(&x, &q.apply(&y));
            let s = sgn(a.parity[i]);
            out.extend(lhs.iter().zip(t1).zip(t2).map(|((l, p), r)| l - p - &s * r));
        }
    }
    out.extend((0..a.dim).map(|i| a.integrate(&q.apply(&a.basis(i)))));
    out
}

fn seven_term_defect(a: &AlgebraInstance, g: &Mat) -> Vec<Rational> {
    let mul = |x: &[Rational], y: &[Rational]| a.multiply(x, y);
    let mut out = g.apply(&a.basis(a.unit));
    for i in 0..a.dim {
        for j in 0..a.dim {
            for k in 0..a.dim {
                let (x, y, z) = (a.basis(i), a.basis(j), a.basis(k));
                let (pa, pb) = (a.parity[i], a.parity[j]);
                let mut d = g.apply(&mul(&mul(&x, &y), &z));
                let mut sub = |v: Vec<Rational>, s: Rational| {
                    for (t, w) in d.iter_mut().zip(v) {
                        *t -= &s * w;
                    }
                };
                sub(mul(&g.apply(&mul(&x, &y)), &z), int(1));
                sub(mul(&x, &g.apply(&mul(&y, &z))), sgn(pa));
                sub(mul(&y, &g.apply(&mul(&x, &z))), sgn(!pa && pb));
                sub(mul(&mul(&g.apply(&x), &y), &z), int(-1));
                sub(mul(&mul(&x, &g.apply(&y)), &z), -sgn(pa));
                sub(mul(&mul(&x, &y), &g.apply(&z)), -sgn(pa ^ pb));
                out.extend(d);
            }
        }
    }
    out
}

fn twelfth_defect(a: &AlgebraInstance, g: &Mat) -> Vec<Rational> {
    (0..a.dim)
        .map(|i| {
            let x = a.basis(i);
            let lhs = a.supertrace(&(g * &a.left_mul(&x)));
            let rhs = a.supertrace(&a.left_mul(&g.apply(&x)));
            lhs - frac(1, 12) * rhs
        })
        .collect()
}

/// `1, ω, h, θ₁, θ₂` with `h² = θ₁θ₂ = ω`.
fn square_zero() -> AlgebraInstance {
    let mut a = AlgebraInstance::blank(vec![false, false, false, true, true], 0);
    for i in 0..5 {
        a.mul[0][i][i] = int(1);
        a.mul[i][0][i] = int(1);
    }
    a.mul[2][2][1] = int(1);
    a.mul[3][4][1] = int(1);
    a.mul[4][3][1] = int(-1);
    a.integral[1] = int(1);
    a
}

/// `ℚ[u]/(u² − u)` with `∫1 = 1`, `∫u = 2`.
fn idempotent() -> AlgebraInstance {
    let mut idem = AlgebraInstance::blank(vec![false, false], 0);
    idem.mul[0][0][0] = int(1);
    idem.mul[0][1][1] = int(1);
    idem.mul[1][0][1] = int(1);
    idem.mul[1][1][1] = int(1);
    idem.integral = vec![int(1), int(2)];
    idem
}

/// A Frobenius superalgebra of nonzero superdimension with an idempotent.
pub fn mixed_base() -> AlgebraInstance {
    square_zero().tensor(&idempotent())
}

/// A quadruple `θ₁⊗1 → ω⊗1`, `1⊗u → θ₂⊗1` embedded in [`mixed_base`].
/// The operators satisfy the operator relations and adjointness but not
/// Leibniz or the 7-term relation; the multiplication is rich.
pub fn structural_instance() -> AlgebraInstance {
    let mut a = mixed_base();
    // index of x⊗y is 2x + y, with x in (1, ω, h, θ₁, θ₂) and y in (1, u)
    let w: Vec<Vec<Rational>> = [6, 2, 1, 8]
        .iter()
        .map(|&i| (0..a.dim).map(|j| int(i64::from(i == j))).collect())
        .collect();
    let g = a.gram();
    let rows = Mat::from_fn(4, a.dim, |r, c| (0..a.dim).map(|k| &w[r][k] * &g[(k, c)]).sum());
    let cols: Vec<Vec<Rational>> = w.iter().cloned().chain(rows.nullspace()).collect();
    let p = Mat::from_columns(a.dim, &cols);
    let pinv = p.inverse().expect("fixed instance");
    for (c, d) in [(1, 1), (1, -1), (2, 1), (2, -1), (1, 2), (1, -2), (2, 2), (2, -2)] {
        let mut q = Mat::zeros(a.dim, a.dim);
        let mut gm = Mat::zeros(a.dim, a.dim);
        q[(1, 0)] = int(1);
        q[(3, 2)] = frac(c, 1);
        gm[(2, 0)] = int(1);
        gm[(3, 1)] = frac(d, 1);
        a.q = &(&p * &q) * &pinv;
        a.gm = &(&p * &gm) * &pinv;
        let anti = a.adjoint(&a.q, true).expect("fixed instance") == -&a.q;
        let sym = a.adjoint(&a.gm, true).expect("fixed instance") == a.gm;
        let anticommute = (&(&a.q * &a.gm) + &(&a.gm * &a.q)).is_zero();
        if anti && sym && anticommute {
            return a;
        }
    }
    panic!("no consistent scaling");
}

/// Graded tensor product of two full instances, with `Q` and `G₋` acting
/// on both factors.
pub fn tensor_full(a: &AlgebraInstance, b: &AlgebraInstance) -> AlgebraInstance {
    let mut out = a.tensor(b);
    let m = b.dim;
    for i in 0..a.dim {
        let s = sgn(a.parity[i]);
        for k in 0..m {
            for r in 0..m {
                out.q[(i * m + r, i * m + k)] += &s * &b.q[(r, k)];
                out.gm[(i * m + r, i * m + k)] += &s * &b.gm[(r, k)];
            }
        }
    }
    out
}

/// An instance with consistent operator tables, with even spanning sets of
/// its harmonic part and of the kernel of `Q`.
pub struct FullInstance {
    pub ctx: EvalContext<Rational>,
    pub harmonic: Vec<Vec<Rational>>,
    pub closed: Vec<Vec<Rational>>,
}

/// Where leaf vectors are drawn from.
#[derive(Clone, Copy, Debug)]
pub enum Leaves {
    Dense,
    Closed,
    Harmonic,
}

/// The minimal quadruple instance tensored with Frobenius algebras, its
/// square, then [`structural_instance`].
pub fn full_instances() -> &'static [FullInstance] {
    static F: OnceLock<Vec<FullInstance>> = OnceLock::new();
    F.get_or_init(|| {
        [trivial_instance(), idempotent(), square_zero()]
            .iter()
            .map(|f| minimal_quadruple_instance().tensor(f))
            .chain([tensor_full(&minimal_quadruple_instance(), &minimal_quadruple_instance()), structural_instance()])
            .map(|a| {
                let d = derive_operators(&a).expect("fixed instance");
                let even = |vs: Vec<Vec<Rational>>| vs.into_iter().filter(|v| a.parity_of(v) == Some(false)).collect();
                let closed = kernel_vectors(&a, &a.q);
                FullInstance { harmonic: even(d.h0.clone()), closed: even(closed), ctx: EvalContext::scalar(&a, &d).expect("fixed instance") }
            })
            .collect()
    })
}

/// Indices into [`full_instances`] of genuine instances.
pub const GENUINE: &[usize] = &[0, 1, 2, 3];
/// Indices into [`full_instances`] of the instances with rich products.
pub const RICH: &[usize] = &[3, 4];

/// A context from [`full_instances`] drawn from `pool`, with `Basis(k)`
/// leaves bound to random even vectors of the given kind.
pub fn full_context(rng: &mut ChaCha8Rng, pool: &[usize], kind: Leaves, leaves: usize) -> EvalContext<Rational> {
    let inst = &full_instances()[*pool.choose(rng).expect("fixed instance")];
    let mut ctx = inst.ctx.clone();
    let a = &inst.ctx.alg;
    let span: Vec<Vec<Rational>> = match kind {
        Leaves::Dense => (0..a.dim).filter(|&i| !a.parity[i]).map(|i| a.basis(i)).collect(),
        Leaves::Closed => inst.closed.clone(),
        Leaves::Harmonic => inst.harmonic.clone(),
    };
    for k in 0..leaves {
        let mut v = vec![Rational::zero(); a.dim];
        for s in &span {
            let c = int(rng.gen_range(-2..=2));
            v.iter_mut().zip(s).for_each(|(x, y)| *x += &c * y);
        }
        let sparse = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i as u16, c.clone())).collect();
        ctx.set_leaf(LeafLabel::Basis(k as u16), sparse);
    }
    ctx
}

/// Operator spaces over one base algebra.
pub struct Family {
    pub alg: AlgebraInstance,
    /// Odd derivations with `∫Q = 0`.
    pub q: Vec<Mat>,
    /// Self-adjoint odd operators satisfying the 7-term relation.
    pub seven: Vec<Mat>,
    /// Self-adjoint odd operators satisfying the supertrace identity.
    pub twelfth: Vec<Mat>,
}

impl Family {
    fn new(a: AlgebraInstance) -> Family {
        let adjoint_and = |f: &dyn Fn(&Mat) -> Vec<Rational>| {
            solve(&a, |m| {
                let mut v = self_adjoint_defect(&a, m, 1);
                v.extend(f(m));
                v
            })
        };
        let seven = adjoint_and(&|m| seven_term_defect(&a, m));
        let twelfth = adjoint_and(&|m| twelfth_defect(&a, m));
        let q = solve(&a, |m| derivation_defect(&a, m));
        Family { alg: a, q, seven, twelfth }
    }
}

pub fn families() -> &'static [Family] {
    static F: OnceLock<Vec<Family>> = OnceLock::new();
    F.get_or_init(|| vec![Family::new(base()), Family::new(mixed_base())])
}

pub fn random_member(space: &[Mat], rng: &mut ChaCha8Rng) -> Mat {
    let mut out = Mat::zeros(space[0].rows, space[0].cols);
    for m in space {
        out = &out + &m.scale(&int(rng.gen_range(-2..=2)));
    }
    out
}

/// Context on `alg` with the given `Q` and `G₋`, random self-adjoint
/// matrices for the other tags, and `Basis(k)` leaves bound to `leaves[k]`.
pub fn context(
    alg: &AlgebraInstance,
    q: &Mat,
    gm: &Mat,
    leaves: &[Vec<Rational>],
    rng: &mut ChaCha8Rng,
) -> EvalContext<Rational> {
    let mut a = alg.clone();
    a.q = q.clone();
    a.gm = gm.clone();
    let mut ops = BTreeMap::new();
    ops.insert(Op::Id, Mat::identity(a.dim));
    ops.insert(Op::Gm, gm.clone());
    for (op, odd) in [(Op::Pi0, false), (Op::Gp, true), (Op::GmGp, false)] {
        ops.insert(op, random_self_adjoint(&a, odd, rng));
    }
    for op in [Op::Id, Op::Gm, Op::Gp, Op::GmGp] {
        ops.insert(op.with_q().expect("fixed instance"), q * &ops[&op]);
    }
    let mut ctx = EvalContext::custom(a, ops, Rational::zero()).expect("fixed instance");
    for (k, v) in leaves.iter().enumerate() {
        let sparse = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i as u16, c.clone())).collect();
        ctx.set_leaf(LeafLabel::Basis(k as u16), sparse);
    }
    ctx
}

/// Homogeneous vectors spanning `ker q`.
pub fn kernel_vectors(a: &AlgebraInstance, q: &Mat) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for v in q.nullspace() {
        for odd in [false, true] {
            let part: Vec<Rational> =
                v.iter().enumerate().map(|(i, c)| if a.parity[i] == odd { c.clone() } else { Rational::zero() }).collect();
            if part.iter().any(|c| !c.is_zero()) {
                out.push(part);
            }
        }
    }
    out
}

/// Random connected graph with `Basis(0..leaves)` leaves and the given labels.
pub fn random_graph(rng: &mut ChaCha8Rng, leaves: usize, labels: &[Op], max_vertices: usize) -> LabeledGraph {
    random_graph_with(rng, leaves, labels, max_vertices, 3)
}

/// As [`random_graph`], with vertex degrees from `min_degree` to 4.
pub fn random_graph_with(
    rng: &mut ChaCha8Rng,
    leaves: usize,
    labels: &[Op],
    max_vertices: usize,
    min_degree: usize,
) -> LabeledGraph {
    let nv = rng.gen_range(1..=max_vertices);
    let mut g = LabeledGraph::empty();
    for _ in 0..nv {
        g.add_vertex();
    }
    let label = |rng: &mut ChaCha8Rng| EdgeLabel::new(*labels.choose(rng).expect("fixed instance"));
    for v in 1..nv {
        let u = rng.gen_range(0..v);
        let l = label(rng);
        g.add_edge(u, v, l);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let (u, v) = (rng.gen_range(0..nv), rng.gen_range(0..nv));
        let l = label(rng);
        g.add_edge(u, v, l);
    }
    for v in 0..nv {
        let want = rng.gen_range(min_degree..=4);
        while g.degree(v) < want {
            g.add_leaf(v, LeafLabel::Basis(rng.gen_range(0..leaves) as u16));
        }
    }
    g
}

/// Outcome of a seeded oracle run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub name: String,
    /// Random instances (contexts) drawn.
    pub cases: usize,
    /// Identities compared.
    pub checks: usize,
    /// Identities with a nonzero term.
    pub live: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, o: OracleReport) {
        self.cases += o.cases;
        self.checks += o.checks;
        self.live += o.live;
        self.failures.extend(o.failures);
    }
}

fn value(terms: &Terms, ctx: &EvalContext<Rational>) -> Result<(Rational, usize)> {
    let mut nonzero = 0;
    let mut s = Rational::zero();
    for (g, c) in terms {
        let v = evaluate(g, ctx)?;
        if !v.is_zero() {
            nonzero += 1;
        }
        s += v * c;
    }
    Ok((s, nonzero))
}

type MakeContext<'a> = dyn Fn(&mut ChaCha8Rng) -> (EvalContext<Rational>, usize) + 'a;

/// Evaluates every relation `rels` produces on random graphs over seeded
/// contexts.
fn run(
    name: &str,
    seed: u64,
    runs: usize,
    max_vertices: usize,
    labels: &[Op],
    make: &MakeContext<'_>,
    rels: &dyn Fn(&LabeledGraph) -> Vec<Relation>,
) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleReport { name: name.to_string(), ..Default::default() };
    for _ in 0..runs {
        let (ctx, leaves) = make(&mut rng);
        let g = random_graph(&mut rng, leaves, labels, max_vertices);
        out.cases += 1;
        for r in rels(&g) {
            out.checks += 1;
            match value(&r.terms, &ctx) {
                Ok((s, nz)) => {
                    if !s.is_zero() {
                        out.failures.push(format!("{} at {} on {:?}: {}", r.rule, r.site, g, s));
                    }
                    if nz > 0 {
                        out.live += 1;
                    }
                }
                Err(e) => out.failures.push(format!("{} at {}: {e}", r.rule, r.site)),
            }
        }
    }
    out
}

/// Contexts over both families with `Q = 0` and `G₋` from `pick`.
fn plain_context(pick: fn(&Family) -> &[Mat]) -> impl Fn(&mut ChaCha8Rng) -> (EvalContext<Rational>, usize) {
    move |rng| {
        let f = &families()[rng.gen_range(0..2)];
        let a = &f.alg;
        let gm = random_member(pick(f), rng);
        let q = Mat::zeros(a.dim, a.dim);
        let leaves: Vec<Vec<Rational>> = (0..a.dim).map(|_| a.basis(rng.gen_range(0..a.dim))).collect();
        (context(a, &q, &gm, &leaves, rng), a.dim)
    }
}

fn full(pool: &'static [usize], kind: Leaves) -> impl Fn(&mut ChaCha8Rng) -> (EvalContext<Rational>, usize) {
    move |rng| (full_context(rng, pool, kind, 4), 4)
}

/// Checks one rule on `runs` seeded instances satisfying the axioms that
/// justify it: derivations `Q` for integration by parts, operators in the
/// 7-term or supertrace solution spaces, and full instances for reversal,
/// `Π₀` expansion and the relations on `Q` or split edges.
pub fn rule_soundness(rule: Rule, seed: u64, runs: usize) -> OracleReport {
    let mut out = OracleReport { name: rule.name().to_string(), ..Default::default() };
    match rule {
        Rule::IntegrateByParts => {
            let f = &families()[0];
            let make = |rng: &mut ChaCha8Rng| {
                let q = random_member(&f.q, rng);
                let mut leaves = kernel_vectors(&f.alg, &q);
                leaves.shuffle(rng);
                let gm = random_self_adjoint(&f.alg, true, rng);
                let n = leaves.len();
                (context(&f.alg, &q, &gm, &leaves, rng), n)
            };
            let at_vertices = |g: &LabeledGraph| (0..g.vertices.len()).map(|v| ibp_at(g, v, 0)).collect();
            let labels = [Op::Id, Op::Gm, Op::Gp, Op::GmGp];
            out.absorb(run("", seed, runs, 3, &labels, &make, &at_vertices));
            out.absorb(run("", seed + 1, runs, 2, &Op::ALL, &full(GENUINE, Leaves::Closed), &integrate_by_parts));
        }
        Rule::SevenTerm => {
            let labels = [Op::Id, Op::Gm, Op::Gm, Op::Gp, Op::Pi0];
            out.absorb(run("", seed, runs, 3, &labels, &plain_context(|f| &f.seven), &seven_term));
            let split = [Op::Id, Op::Gm, Op::Gp, Op::GmGp, Op::Pi0];
            out.absorb(run("", seed + 1, runs, 3, &split, &full(&[3], Leaves::Dense), &seven_term));
        }
        Rule::Twelfth => {
            let rels = |g: &LabeledGraph| {
                let mut h = g.clone();
                h.add_edge(0, 0, EdgeLabel::new(Op::Gm));
                twelfth(&h)
            };
            let labels = [Op::Id, Op::Gm, Op::Gp, Op::Pi0, Op::GmGp];
            out.absorb(run("", seed, runs, 2, &labels, &plain_context(|f| &f.twelfth), &rels));
        }
        Rule::Reversal => out.absorb(run("", seed, runs, 2, &Op::ALL, &full(RICH, Leaves::Dense), &reversal)),
        Rule::ExpandPi0 => out.absorb(run("", seed, runs, 2, &Op::ALL, &full(RICH, Leaves::Dense), &expand_pi0)),
        Rule::Contract => {
            let rels = |g: &LabeledGraph| -> Vec<Relation> {
                (0..g.edges.len())
                    .filter(|&i| g.edges[i].label.op == Op::Id && !g.is_loop(i))
                    .map(|i| Relation {
                        rule: Rule::Contract,
                        site: i,
                        terms: vec![(g.clone(), int(1)), (contract_edge(g, i), int(-1))],
                    })
                    .collect()
            };
            let make = |rng: &mut ChaCha8Rng| {
                let a = if rng.gen_bool(0.5) { grassmann_with_q() } else { mixed_base() };
                let mut ctx = relaxed_ctx(&a, rng);
                for k in 0..4u16 {
                    let v = (0..a.dim)
                        .filter(|&i| !a.parity[i])
                        .filter_map(|i| Some((i as u16, int(rng.gen_range(0..=2)))).filter(|(_, c)| !c.is_zero()))
                        .collect();
                    ctx.set_leaf(LeafLabel::Basis(k), v);
                }
                (ctx, 4)
            };
            let labels = [Op::Id, Op::Id, Op::Id, Op::Gm, Op::Gp, Op::Pi0];
            out.absorb(run("", seed, runs, 3, &labels, &make, &rels));
        }
    }
    out
}

/// Random graph with its slots, vertex order and undirected edge
/// orientations shuffled.
pub fn shuffle_slots(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> LabeledGraph {
    let mut h = g.clone();
    for s in h.vertices.iter_mut() {
        s.shuffle(rng);
    }
    h.vertices.shuffle(rng);
    for e in h.edges.iter_mut() {
        if !e.label.is_directed() && rng.gen_bool(0.5) {
            e.ends.swap(0, 1);
        }
    }
    h
}

/// Checks on a random graph corpus that evaluation ignores slot order and
/// the contraction of non-loop `Id` edges over relaxed instances, and the
/// spanning tree chosen for `J`-insertion over full instances. The tree
/// choice does matter for generic operators.
pub fn evaluation_invariance(seed: u64, cases: usize) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleReport { name: "evaluation invariance".into(), ..Default::default() };
    let algebras = [grassmann_with_q(), mixed_base()];
    let labels = [Op::Id, Op::Gm, Op::Gp, Op::GmGp, Op::Pi0];
    let fail = |out: &mut OracleReport, what: &str, g: &LabeledGraph, a: &Rational, b: &Rational| {
        if a != b {
            out.failures.push(format!("{what} on {g:?}: {a} vs {b}"));
        }
        out.checks += 1;
        if !a.is_zero() {
            out.live += 1;
        }
    };
    for _ in 0..cases {
        let a = algebras.choose(&mut rng).expect("nonempty");
        let ctx = relaxed_ctx(a, &mut rng);
        let g = random_graph(&mut rng, a.dim, &labels, 3);
        out.cases += 1;
        let Ok(v) = evaluate(&g, &ctx) else {
            out.failures.push(format!("evaluation failed on {g:?}"));
            continue;
        };
        let h = shuffle_slots(&g, &mut rng);
        fail(&mut out, "slot order", &g, &v, &evaluate(&h, &ctx).unwrap_or_default());
        let pool = if rng.gen_bool(0.5) { GENUINE } else { RICH };
        let full = full_context(&mut rng, pool, Leaves::Dense, 4);
        let t = random_graph(&mut rng, 4, &labels, 3);
        let mut order: Vec<usize> = (0..t.edges.len()).collect();
        order.shuffle(&mut rng);
        let (j1, j2) = (insert_j(&t), insert_j_ordered(&t, &order));
        fail(&mut out, "J spanning tree", &t, &evaluate(&j1, &full).unwrap_or_default(), &evaluate(&j2, &full).unwrap_or_default());
        if let Some(i) = (0..g.edges.len()).find(|&i| g.edges[i].label.op == Op::Id && !g.is_loop(i)) {
            fail(&mut out, "Id contraction", &g, &v, &evaluate(&contract_edge(&g, i), &ctx).unwrap_or_default());
        }
    }
    out
}

fn sum_value(s: &GraphSum, ctx: &EvalContext<Rational>) -> Result<Rational> {
    let mut v = Rational::zero();
    for (k, c) in s.terms() {
        v += evaluate(&k.to_graph(), ctx)? * c;
    }
    Ok(v)
}

/// Compares each pair of sums on `cases` seeded genuine instances, with
/// `External` legs bound to random harmonic vectors.
pub fn sum_soundness(pairs: &[(String, GraphSum, GraphSum)], seed: u64, cases: usize) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleReport { name: "normal forms".into(), ..Default::default() };
    for _ in 0..cases {
        let inst = &full_instances()[*GENUINE.choose(&mut rng).expect("nonempty")];
        let mut ctx = inst.ctx.clone();
        let a = &inst.ctx.alg;
        for leg in 0..3u8 {
            let mut v = vec![Rational::zero(); a.dim];
            for h in &inst.harmonic {
                let c = int(rng.gen_range(-2..=2));
                v.iter_mut().zip(h).for_each(|(x, y)| *x += &c * y);
            }
            let sparse = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i as u16, c.clone())).collect();
            ctx.set_leaf(LeafLabel::External(leg), sparse);
        }
        out.cases += 1;
        for (name, before, after) in pairs {
            out.checks += 1;
            match (sum_value(before, &ctx), sum_value(after, &ctx)) {
                (Ok(x), Ok(y)) => {
                    if x != y {
                        out.failures.push(format!("{name}: {x} vs {y}"));
                    }
                    if !x.is_zero() {
                        out.live += 1;
                    }
                }
                (Err(e), _) | (_, Err(e)) => out.failures.push(format!("{name}: {e}")),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solution_spaces_are_nontrivial() {
        for f in families() {
            assert!(!f.seven.is_empty() && !f.twelfth.is_empty());
        }
        assert!(!families()[0].q.is_empty());
    }

    #[test]
    fn tensor_of_full_instances_is_full() {
        let m = minimal_quadruple_instance();
        let a = tensor_full(&m, &m);
        let r = crate::chalg::check_axioms(&a).unwrap();
        assert!(r.all_pass(), "{}", r.render());
    }
}


