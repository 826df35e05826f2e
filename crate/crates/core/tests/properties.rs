use num::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chgraph::chalg::derive_operators;
use chgraph::contract::evaluate;
use chgraph::genexp::{enumerate_trivalent, potential, GraphSum};
use chgraph::oracle::{full_instances, grassmann_with_q, mixed_base, random_graph, relaxed_ctx, shuffle_slots};
use chgraph::rational::{int, Rational};
use chgraph::rewrite::surgery::contract_edge;
use chgraph::series::{Monomial, Series, Var};
use chgraph::supergraph::{automorphism_count, canonicalize, Canonical, LabeledGraph, LeafLabel, Op};

const LABELS: [Op; 6] = [Op::Id, Op::Gm, Op::Gp, Op::GmGp, Op::Pi0, Op::QGp];

fn graph(seed: u64) -> LabeledGraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), 3, &LABELS, 3)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>()) {
        if let Canonical::Term { key, .. } = canonicalize(&graph(seed)).unwrap() {
            let again = canonicalize(&key.to_graph()).unwrap();
            prop_assert_eq!(again, Canonical::Term { key, negative: false });
        }
    }

    #[test]
    fn sums_ignore_slot_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let g = graph(seed);
        let h = shuffle_slots(&g, &mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(GraphSum::single(&g, int(1)).unwrap(), GraphSum::single(&h, int(1)).unwrap());
        prop_assert_eq!(automorphism_count(&g, &[]).unwrap(), automorphism_count(&h, &[]).unwrap());
    }

    #[test]
    fn genus_survives_id_contraction(seed in any::<u64>()) {
        let g = graph(seed);
        for i in (0..g.edges.len()).filter(|&i| g.edges[i].label.op == Op::Id && !g.is_loop(i)) {
            prop_assert_eq!(contract_edge(&g, i).genus().unwrap(), g.genus().unwrap());
        }
    }

    #[test]
    fn evaluation_is_linear_in_each_leaf(seed in any::<u64>(), x in -3i64..=3, y in -3i64..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = if seed % 2 == 0 { grassmann_with_q() } else { mixed_base() };
        let mut ctx = relaxed_ctx(&a, &mut rng);
        let g = random_graph(&mut rng, a.dim, &[Op::Id, Op::Gm, Op::Gp, Op::GmGp, Op::Pi0], 3);
        let once = |l: &LeafLabel| g.leaves.iter().filter(|m| m.label == *l).count() == 1;
        let Some(leaf) = g.leaves.iter().map(|l| l.label).find(once) else { return Ok(()) };
        let (i, j) = (0u16, (a.dim - 1) as u16);
        let at = |ctx: &mut chgraph::contract::EvalContext<Rational>, v: Vec<(u16, Rational)>| {
            ctx.set_leaf(leaf, v);
            evaluate(&g, ctx).unwrap()
        };
        let vi = at(&mut ctx, vec![(i, int(1))]);
        let vj = at(&mut ctx, vec![(j, int(1))]);
        let both = at(&mut ctx, vec![(i, int(x)), (j, int(y))]);
        prop_assert_eq!(both, vi * int(x) + vj * int(y));
    }

    #[test]
    fn even_derivative_obeys_leibniz(f in prop::collection::vec((0u32..3, 0u32..3, -4i64..=4), 1..5),
                                     g in prop::collection::vec((0u32..3, 0u32..3, -4i64..=4), 1..5)) {
        let (s, t) = (Var::even(0, 0), Var::even(0, 1));
        let series = |terms: &[(u32, u32, i64)]| {
            let mut out = Series::zero(8);
            for &(a, b, c) in terms {
                let mut m = Series::constant(int(c), 8);
                for _ in 0..a { m = m.mul(&Series::var(s, 8)); }
                for _ in 0..b { m = m.mul(&Series::var(t, 8)); }
                out = out.add(&m);
            }
            out
        };
        let (f, g) = (series(&f), series(&g));
        let lhs = f.mul(&g).partial(s).unwrap();
        let rhs = f.partial(s).unwrap().mul(&g).add(&f.mul(&g.partial(s).unwrap()));
        prop_assert_eq!(lhs.truncate(7), rhs.truncate(7));
    }
}

#[test]
fn odd_derivative_sign() {
    let (a, b) = (Var::odd(0, 0), Var::odd(0, 1));
    let ab = Series::var(a, 4).mul(&Series::var(b, 4));
    assert_eq!(ab.partial(a).unwrap(), Series::var(b, 4));
    assert_eq!(ab.partial(b).unwrap(), Series::var(a, 4).scale(&int(-1)));
    assert!(ab.mul(&Series::var(a, 4)).is_empty());
    assert_eq!(ab.coefficient(&Monomial::one()), Rational::zero());
}

#[test]
fn weights_are_unit_fractions_dividing_the_half_edge_group() {
    for (genus, leaves) in [(0, 6), (1, 3), (2, 2)] {
        let s = potential(genus, leaves).unwrap();
        for (k, c) in s.terms() {
            let halves = 2 * k.edges.len() + k.leaves.len();
            assert!(c.numer() == &1.into(), "{c}");
            let order = factorial(halves);
            assert_eq!(order % c.denom().to_string().parse::<u64>().unwrap(), 0);
        }
    }
    assert_eq!(enumerate_trivalent(0, 3).len(), potential(0, 3).unwrap().len());
}

#[test]
fn derived_operators_on_full_instances() {
    for inst in full_instances() {
        let a = &inst.ctx.alg;
        let d = derive_operators(a).unwrap();
        let n = a.dim;
        let id = chgraph::linalg::Mat::identity(n);
        assert_eq!(&d.pi0 + &d.pi4, id);
        assert!((&a.q * &d.pi0).is_zero());
        assert!((&a.gm * &d.pi0).is_zero());
        assert!((&d.pi0 * &d.pi4).is_zero());
        let gmgp = &a.gm * &d.gp;
        let gram = a.gram();
        assert_eq!(&gmgp.transpose() * &gram, &gram * &gmgp);
        assert_eq!(&d.pi0.transpose() * &gram, &gram * &d.pi0);
        if let Some(inv) = &d.eta_inv {
            assert_eq!(inv * &d.eta, chgraph::linalg::Mat::identity(d.eta.rows));
        }
    }
}
