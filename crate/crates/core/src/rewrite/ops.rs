//! Structure of the nine edge operators under composition and reversal.
//!
//! The tags span the algebra generated by `Q`, `G₋`, `G₊`, `Π₀`; on a single
//! quadruple plus harmonic part that algebra acts faithfully, so the tables
//! are read off from a concrete instance and hold universally.

use std::sync::OnceLock;

use num::Zero;

use crate::chalg::{derive_operators, minimal_quadruple_instance, AlgebraInstance};
use crate::contract::standard_ops;
use crate::linalg::Mat;
use crate::rational::Rational;
use crate::supergraph::Op;

pub const OPS: [Op; 9] = [Op::Id, Op::Pi0, Op::Gm, Op::Gp, Op::GmGp, Op::QId, Op::QGm, Op::QGp, Op::QGmGp];

/// Linear combination of edge operators.
pub type OpCombo = Vec<(Op, Rational)>;

pub struct OpTables {
    product: Vec<Vec<OpCombo>>,
    reversed: Vec<OpCombo>,
}

fn idx(op: Op) -> usize {
    OPS.iter().position(|o| *o == op).expect("all tags listed")
}

/// Coordinates of `target` in the span of `basis`, if it lies there.
fn solve(basis: &[Mat], target: &Mat) -> Option<Vec<Rational>> {
    let n = target.rows * target.cols;
    let flat = |m: &Mat| (0..n).map(|x| m[(x / m.cols, x % m.cols)].clone()).collect::<Vec<_>>();
    let mut cols: Vec<Vec<Rational>> = basis.iter().map(flat).collect();
    cols.push(flat(target));
    let aug = Mat::from_columns(n, &cols);
    let (red, piv) = aug.rref();
    if piv.contains(&basis.len()) {
        return None;
    }
    let mut out = vec![Rational::zero(); basis.len()];
    for (r, &p) in piv.iter().enumerate() {
        out[p] = red[(r, basis.len())].clone();
    }
    Some(out)
}

fn combo(coords: Vec<Rational>) -> OpCombo {
    OPS.iter().copied().zip(coords).filter(|(_, c)| !c.is_zero()).collect()
}

/// Operator `Ã` with `τ[A] = [Ã]`, where `τ` swaps the two tensor factors
/// with the Koszul sign.
pub fn reversed_matrix(a: &AlgebraInstance, m: &Mat) -> Mat {
    let g = a.gram();
    let ginv = g.inverse().expect("nondegenerate pairing");
    let b = m * &ginv;
    let tb = Mat::from_fn(a.dim, a.dim, |j, k| {
        let x = b[(k, j)].clone();
        if a.parity[j] && a.parity[k] {
            -x
        } else {
            x
        }
    });
    &tb * &g
}

impl OpTables {
    pub fn from_instance(a: &AlgebraInstance) -> Option<OpTables> {
        let d = derive_operators(a).ok()?;
        let ops = standard_ops(a, &d);
        let basis: Vec<Mat> = OPS.iter().map(|o| ops[o].clone()).collect();
        let mut product = Vec::new();
        for x in &basis {
            let mut row = Vec::new();
            for y in &basis {
                row.push(combo(solve(&basis, &(x * y))?));
            }
            product.push(row);
        }
        let reversed = basis.iter().map(|m| solve(&basis, &reversed_matrix(a, m)).map(combo)).collect::<Option<_>>()?;
        Some(OpTables { product, reversed })
    }

    pub fn get() -> &'static OpTables {
        static TABLES: OnceLock<OpTables> = OnceLock::new();
        TABLES.get_or_init(|| OpTables::from_instance(&minimal_quadruple_instance()).expect("faithful instance"))
    }

    /// `x ∘ y`.
    pub fn compose(&self, x: Op, y: Op) -> &OpCombo {
        &self.product[idx(x)][idx(y)]
    }

    /// The label of the same edge read from the other end.
    pub fn reversed(&self, x: Op) -> &OpCombo {
        &self.reversed[idx(x)]
    }

    /// Value of the operator on a harmonic vector, as a multiple of it.
    pub fn on_harmonic(x: Op) -> Rational {
        match x {
            Op::Id | Op::Pi0 => Rational::from_integer(1.into()),
            _ => Rational::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chalg::{monomial_frobenius, trivial_instance};
    use crate::rational::int;

    fn tables_agree(a: &AlgebraInstance) {
        let d = derive_operators(a).unwrap();
        let ops = standard_ops(a, &d);
        let t = OpTables::get();
        let eval = |c: &OpCombo| {
            let mut m = Mat::zeros(a.dim, a.dim);
            for (o, k) in c {
                m = &m + &ops[o].scale(k);
            }
            m
        };
        for x in OPS {
            for y in OPS {
                assert_eq!(eval(t.compose(x, y)), &ops[&x] * &ops[&y], "{x:?}∘{y:?}");
            }
            assert_eq!(eval(t.reversed(x)), reversed_matrix(a, &ops[&x]), "reversal of {x:?}");
        }
    }

    #[test]
    fn tables_hold_on_larger_instances() {
        let m = minimal_quadruple_instance();
        tables_agree(&m.tensor(&trivial_instance()));
        tables_agree(&m.tensor(&monomial_frobenius(0, 2)));
        tables_agree(&crate::oracle::structural_instance());
    }

    #[test]
    fn known_identities() {
        let t = OpTables::get();
        // Π₀ = Id − QG₊ − G₊Q, with G₊Q the reversal of QG₊
        let r = t.reversed(Op::QGp);
        let mut want = vec![(Op::Id, int(1)), (Op::Pi0, int(-1)), (Op::QGp, int(-1))];
        want.sort();
        let mut got = r.clone();
        got.sort();
        assert_eq!(got, want);
        assert!(t.compose(Op::Gm, Op::GmGp).is_empty());
        assert_eq!(t.compose(Op::Gm, Op::Gp), &vec![(Op::GmGp, int(1))]);
        for x in [Op::Id, Op::Pi0, Op::Gm, Op::Gp, Op::GmGp] {
            assert_eq!(t.reversed(x), &vec![(x, int(1))], "{x:?} is self-adjoint");
        }
    }
}
