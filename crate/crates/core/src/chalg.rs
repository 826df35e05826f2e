//! Finite-dimensional cH-algebra instances.
//!
//! Basis elements are homogeneous; `parity[i]` is true for odd `e_i`.
//! Operator matrices use the column convention of [`Mat`]: entry `(k, i)` is
//! the coefficient of `e_k` in `A(e_i)`.

use std::fmt::Write as _;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{self, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraInstance {
    pub dim: usize,
    pub parity: Vec<bool>,
    /// `mul[i][j]` is the product `e_i e_j` as a coefficient vector.
    pub mul: Vec<Vec<Vec<Rational>>>,
    pub unit: usize,
    pub q: Mat,
    pub gm: Mat,
    pub integral: Vec<Rational>,
}

fn zero_vec(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

fn sgn(odd: bool) -> Rational {
    rational::sign_factor(odd)
}

impl AlgebraInstance {
    /// An instance with zero multiplication table, operators and integral.
    pub fn blank(parity: Vec<bool>, unit: usize) -> Self {
        let dim = parity.len();
        AlgebraInstance {
            dim,
            parity,
            mul: vec![vec![zero_vec(dim); dim]; dim],
            unit,
            q: Mat::zeros(dim, dim),
            gm: Mat::zeros(dim, dim),
            integral: zero_vec(dim),
        }
    }

    /// Product of two coefficient vectors.
    pub fn multiply(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let mut out = zero_vec(self.dim);
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a * b;
                for (k, c) in self.mul[i][j].iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    out[k] += &ab * c;
                }
            }
        }
        out
    }

    pub fn basis(&self, i: usize) -> Vec<Rational> {
        let mut v = zero_vec(self.dim);
        v[i] = Rational::one();
        v
    }

    pub fn integrate(&self, x: &[Rational]) -> Rational {
        x.iter().zip(&self.integral).map(|(a, b)| a * b).sum()
    }

    /// Parity of a homogeneous nonzero vector.
    pub fn parity_of(&self, x: &[Rational]) -> Option<bool> {
        let mut p = None;
        for (i, a) in x.iter().enumerate() {
            if !a.is_zero() {
                match p {
                    None => p = Some(self.parity[i]),
                    Some(q) if q != self.parity[i] => return None,
                    _ => {}
                }
            }
        }
        p
    }

    /// Left multiplication by `x`.
    pub fn left_mul(&self, x: &[Rational]) -> Mat {
        let cols: Vec<Vec<Rational>> = (0..self.dim).map(|i| self.multiply(x, &self.basis(i))).collect();
        Mat::from_columns(self.dim, &cols)
    }

    /// Gram matrix `g_ij = ∫ e_i e_j`.
    pub fn gram(&self) -> Mat {
        Mat::from_fn(self.dim, self.dim, |i, j| self.integrate(&self.mul[i][j]))
    }

    pub fn parity_op(&self) -> Mat {
        Mat::from_fn(self.dim, self.dim, |i, j| if i == j { sgn(self.parity[i]) } else { Rational::zero() })
    }

    pub fn supertrace(&self, m: &Mat) -> Rational {
        (0..self.dim).map(|i| sgn(self.parity[i]) * &m[(i, i)]).sum()
    }

    /// Adjoint with respect to `∫ab`: `∫A(a)b = (−1)^{|A|·|a|} ∫a A*(b)`.
    pub fn adjoint(&self, a: &Mat, odd: bool) -> Option<Mat> {
        let g = self.gram();
        let ginv = g.inverse()?;
        let s = Mat::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                sgn(odd && self.parity[i])
            } else {
                Rational::zero()
            }
        });
        Some(&(&ginv * &s) * &(&a.transpose() * &g))
    }

    /// Checks parity consistency of every structure tensor.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        let bad = |m: String| Err(Error::Algebra(m));
        if self.parity.len() != n || self.mul.len() != n || self.integral.len() != n {
            return bad("dimension mismatch".into());
        }
        if self.unit >= n || self.parity[self.unit] {
            return bad("unit index out of range or odd".into());
        }
        if [&self.q, &self.gm].iter().any(|m| m.rows != n || m.cols != n) {
            return bad("operator dimension mismatch".into());
        }
        for i in 0..n {
            for j in 0..n {
                if self.mul[i][j].len() != n {
                    return bad("dimension mismatch".into());
                }
                for k in 0..n {
                    if !self.mul[i][j][k].is_zero() && self.parity[k] != (self.parity[i] ^ self.parity[j]) {
                        return bad(format!("product e{i}·e{j} has a component on e{k} of the wrong parity"));
                    }
                }
            }
        }
        for (name, m) in [("Q", &self.q), ("Gm", &self.gm)] {
            for k in 0..n {
                for i in 0..n {
                    if !m[(k, i)].is_zero() && self.parity[k] == self.parity[i] {
                        return bad(format!("{name} maps e{i} to e{k} of the same parity; it must be odd"));
                    }
                }
            }
        }
        for i in 0..n {
            if self.parity[i] && !self.integral[i].is_zero() {
                return bad(format!("integral is nonzero on odd e{i}"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut inst: Option<AlgebraInstance> = None;
        let mut unit = 0;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: no + 1, msg: msg.to_string() };
            let f: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| -> Result<usize> {
                let i: usize = s.parse().map_err(|_| err("bad index"))?;
                match dim {
                    Some(d) if i < d => Ok(i),
                    _ => Err(err("index out of range")),
                }
            };
            let val = |s: &str| rational::parse(s).ok_or_else(|| err("bad rational"));
            match (f[0], f.len()) {
                ("dim", 2) => dim = Some(f[1].parse().map_err(|_| err("bad dim"))?),
                ("parity", 2) => {
                    let d = dim.ok_or_else(|| err("parity before dim"))?;
                    let p: Vec<bool> = f[1]
                        .chars()
                        .map(|c| match c {
                            'e' | '0' => Ok(false),
                            'o' | '1' => Ok(true),
                            _ => Err(err("parity string uses e/o")),
                        })
                        .collect::<Result<_>>()?;
                    if p.len() != d {
                        return Err(err("parity length differs from dim"));
                    }
                    inst = Some(AlgebraInstance::blank(p, 0));
                }
                (kind, _) if inst.is_none() => {
                    return Err(err(&format!("record {kind} before header")));
                }
                ("unit", 2) => unit = idx(f[1])?,
                ("mul", 5) => {
                    let (i, j, k, c) = (idx(f[1])?, idx(f[2])?, idx(f[3])?, val(f[4])?);
                    inst.as_mut().unwrap().mul[i][j][k] = c;
                }
                ("Q", 4) => {
                    let (i, j, c) = (idx(f[1])?, idx(f[2])?, val(f[3])?);
                    inst.as_mut().unwrap().q[(j, i)] = c;
                }
                ("Gm", 4) => {
                    let (i, j, c) = (idx(f[1])?, idx(f[2])?, val(f[3])?);
                    inst.as_mut().unwrap().gm[(j, i)] = c;
                }
                ("int", 3) => {
                    let (i, c) = (idx(f[1])?, val(f[2])?);
                    inst.as_mut().unwrap().integral[i] = c;
                }
                (kind, _) => return Err(err(&format!("unknown or malformed record `{kind}`"))),
            }
        }
        let mut inst = inst.ok_or(Error::Parse { line: 0, msg: "missing dim/parity header".into() })?;
        inst.unit = unit;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("dim {}\nparity ", self.dim);
        for &p in &self.parity {
            s.push(if p { 'o' } else { 'e' });
        }
        let _ = writeln!(s, "\nunit {}", self.unit);
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    if !self.mul[i][j][k].is_zero() {
                        let _ = writeln!(s, "mul {i} {j} {k} {}", rational::fmt(&self.mul[i][j][k]));
                    }
                }
            }
        }
        for (name, m) in [("Q", &self.q), ("Gm", &self.gm)] {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    if !m[(j, i)].is_zero() {
                        let _ = writeln!(s, "{name} {i} {j} {}", rational::fmt(&m[(j, i)]));
                    }
                }
            }
        }
        for i in 0..self.dim {
            if !self.integral[i].is_zero() {
                let _ = writeln!(s, "int {i} {}", rational::fmt(&self.integral[i]));
            }
        }
        s
    }

    /// Super tensor product with a Frobenius superalgebra `b` carrying zero
    /// operators; `Q` and `G₋` act on the first factor.
    pub fn tensor(&self, b: &AlgebraInstance) -> AlgebraInstance {
        let (n, m) = (self.dim, b.dim);
        let id = |i: usize, k: usize| i * m + k;
        let parity: Vec<bool> = (0..n * m).map(|x| self.parity[x / m] ^ b.parity[x % m]).collect();
        let mut out = AlgebraInstance::blank(parity, id(self.unit, b.unit));
        for i in 0..n {
            for k in 0..m {
                for j in 0..n {
                    for l in 0..m {
                        let s = sgn(b.parity[k] && self.parity[j]);
                        for p in 0..n {
                            let c1 = &self.mul[i][j][p];
                            if c1.is_zero() {
                                continue;
                            }
                            for r in 0..m {
                                let c2 = &b.mul[k][l][r];
                                if !c2.is_zero() {
                                    out.mul[id(i, k)][id(j, l)][id(p, r)] += &s * c1 * c2;
                                }
                            }
                        }
                    }
                }
                out.integral[id(i, k)] = &self.integral[i] * &b.integral[k];
                for p in 0..n {
                    out.q[(id(p, k), id(i, k))] = self.q[(p, i)].clone();
                    out.gm[(id(p, k), id(i, k))] = self.gm[(p, i)].clone();
                }
            }
        }
        out
    }
}

/// Operators derived from the Hodge decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedOperators {
    pub gp: Mat,
    pub pi0: Mat,
    pub pi4: Mat,
    pub j: Mat,
    /// Columns spanning the harmonic part.
    pub h0: Vec<Vec<Rational>>,
    /// Generators `e` of the quadruples `{e, Qe, G₋e, QG₋e}`.
    pub quadruples: Vec<Vec<Rational>>,
    /// Indices of the standard basis vectors spanning H₀, when it is spanned by them.
    pub h0_indices: Option<Vec<usize>>,
    pub eta: Mat,
    pub eta_inv: Option<Mat>,
}

fn stack(mats: &[&Mat]) -> Mat {
    let cols = mats[0].cols;
    let rows: usize = mats.iter().map(|m| m.rows).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r0 = 0;
    for m in mats {
        for r in 0..m.rows {
            for c in 0..cols {
                out[(r0 + r, c)] = m[(r, c)].clone();
            }
        }
        r0 += m.rows;
    }
    out
}

fn rank_of(dim: usize, vecs: &[Vec<Rational>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    Mat::from_columns(dim, vecs).rank()
}

type Vectors = Vec<Vec<Rational>>;

/// Basis vectors `e` with independent images under `QG₋`, those images, and
/// the spans `{e, Qe, G₋e, QG₋e}` in order.
fn quadruples(a: &AlgebraInstance) -> (Vectors, Vectors, Vectors) {
    let n = a.dim;
    let qg = &a.q * &a.gm;
    let r = qg.rank();
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    let mut images: Vec<Vec<Rational>> = Vec::new();
    for i in 0..n {
        if gens.len() == r {
            break;
        }
        let img = qg.column(i);
        let mut trial = images.clone();
        trial.push(img.clone());
        if rank_of(n, &trial) > images.len() {
            images = trial;
            gens.push(a.basis(i));
        }
    }
    let mut quad_span = Vec::new();
    for e in &gens {
        let qe = a.q.apply(e);
        let ge = a.gm.apply(e);
        let qge = a.q.apply(&ge);
        quad_span.extend([e.clone(), qe, ge, qge]);
    }
    (gens, images, quad_span)
}

/// A basis index outside `ker Q ∩ ker G₋` plus the quadruples, else the
/// indices of the quadruple generators.
fn hodge_witness(a: &AlgebraInstance) -> Vec<usize> {
    let n = a.dim;
    let (gens, _, quad_span) = quadruples(a);
    let mut span = stack(&[&a.q, &a.gm]).nullspace();
    span.extend(quad_span);
    let r = rank_of(n, &span);
    let outside = (0..n).find(|&i| {
        let mut t = span.clone();
        t.push(a.basis(i));
        rank_of(n, &t) > r
    });
    match outside {
        Some(i) => vec![i],
        None => gens.iter().filter_map(|g| g.iter().position(|x| !x.is_zero())).collect(),
    }
}

/// Builds H₀ and the quadruple basis, then G₊.
pub fn derive_operators(a: &AlgebraInstance) -> Result<DerivedOperators> {
    let n = a.dim;
    let (gens, images, quad_span) = quadruples(a);
    let r = gens.len();
    if rank_of(n, &quad_span) != 4 * r {
        return Err(Error::Hodge(4 * r - rank_of(n, &quad_span)));
    }
    let kernel_rows = stack(&[&a.q, &a.gm]);
    let g = a.gram();
    let orth = if quad_span.is_empty() {
        kernel_rows.clone()
    } else {
        let p = &Mat::from_columns(n, &quad_span).transpose() * &g;
        stack(&[&kernel_rows, &p])
    };
    let mut h0 = orth.nullspace();
    let mut all: Vec<Vec<Rational>> = h0.iter().cloned().chain(quad_span.iter().cloned()).collect();
    if h0.len() + 4 * r != n || rank_of(n, &all) != n {
        // fall back to a complement of im(QG₋) inside ker Q ∩ ker G₋
        h0.clear();
        let mut acc = images.clone();
        for v in kernel_rows.nullspace() {
            let mut trial = acc.clone();
            trial.push(v.clone());
            if rank_of(n, &trial) > acc.len() {
                acc = trial;
                h0.push(v);
            }
        }
        all = h0.iter().cloned().chain(quad_span.iter().cloned()).collect();
        if rank_of(n, &all) != n {
            return Err(Error::Hodge(n - rank_of(n, &all)));
        }
    }
    // G₊ on the basis `all`: Qe ↦ e, QG₋e ↦ G₋e, everything else ↦ 0.
    let mut imgs = vec![zero_vec(n); h0.len()];
    for quad in quad_span.chunks(4) {
        imgs.extend([zero_vec(n), quad[0].clone(), zero_vec(n), quad[2].clone()]);
    }
    let basis = Mat::from_columns(n, &all);
    let gp = &Mat::from_columns(n, &imgs) * &basis.inverse().ok_or(Error::Hodge(0))?;
    let pi4 = &(&a.q * &gp) + &(&gp * &a.q);
    let pi0 = &Mat::identity(n) - &pi4;
    let h0_indices = h0
        .iter()
        .map(|v| {
            let nz: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
            (nz.len() == 1 && v[nz[0]].is_one()).then(|| nz[0])
        })
        .collect::<Option<Vec<usize>>>();
    let eta = Mat::from_fn(h0.len(), h0.len(), |i, j| a.integrate(&a.multiply(&h0[i], &h0[j])));
    let eta_inv = eta.inverse();
    Ok(DerivedOperators { gp, pi0, pi4, j: a.parity_op(), h0, quadruples: gens, h0_indices, eta, eta_inv })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Superalgebra,
    Differentials,
    Hodge,
    Leibniz,
    SevenTerm,
    OneTwelfth,
    Adjointness,
    Nondegeneracy,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Superalgebra,
        Axiom::Differentials,
        Axiom::Hodge,
        Axiom::Leibniz,
        Axiom::SevenTerm,
        Axiom::OneTwelfth,
        Axiom::Adjointness,
        Axiom::Nondegeneracy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Superalgebra => "superalgebra (supercommutative, associative, unital)",
            Axiom::Differentials => "axiom 1: Q² = G₋² = QG₋ + G₋Q = 0",
            Axiom::Hodge => "axiom 2: Hodge decomposition into quadruples",
            Axiom::Leibniz => "axiom 3: Leibniz rule for Q",
            Axiom::SevenTerm => "axiom 4: seven-term relation for G₋",
            Axiom::OneTwelfth => "axiom 5: str(G₋∘a·) = 1/12 str(G₋(a)·)",
            Axiom::Adjointness => "integral adjointness of Q, G₋, G₊",
            Axiom::Nondegeneracy => "nondegenerate pairing and invertible η",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub axiom: Axiom,
    pub pass: bool,
    pub witness: Option<Vec<usize>>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub verdicts: Vec<Verdict>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn passes(&self, axiom: Axiom) -> bool {
        self.verdicts.iter().any(|v| v.axiom == axiom && v.pass)
    }

    pub fn get(&self, axiom: Axiom) -> &Verdict {
        self.verdicts.iter().find(|v| v.axiom == axiom).expect("every axiom is checked")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let _ = write!(s, "{} {}", if v.pass { "PASS" } else { "FAIL" }, v.axiom.name());
            if let Some(w) = &v.witness {
                let _ = write!(s, "  witness {w:?}");
            }
            if !v.detail.is_empty() {
                let _ = write!(s, "  ({})", v.detail);
            }
            s.push('\n');
        }
        let core = [Axiom::Differentials, Axiom::Hodge, Axiom::Leibniz, Axiom::SevenTerm, Axiom::OneTwelfth];
        let passed = core.iter().filter(|a| self.passes(**a)).count();
        let _ = writeln!(
            s,
            "{passed}/5 axioms + integral properties: {}",
            if self.all_pass() { "PASS" } else { "FAIL" }
        );
        s
    }
}

fn first_failure<I: Iterator<Item = Vec<usize>>>(cands: I, mut bad: impl FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
    cands.into_iter().find(|w| bad(w))
}

fn pairs(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).flat_map(move |i| (0..n).map(move |j| vec![i, j]))
}

fn triples(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| vec![i, j, k])))
}

fn add(x: &[Rational], y: &[Rational], k: &Rational) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a + k * b).collect()
}

fn is_zero_vec(x: &[Rational]) -> bool {
    x.iter().all(Zero::is_zero)
}

/// Checks everything on the full basis.
pub fn check_axioms(a: &AlgebraInstance) -> Result<AxiomReport> {
    a.validate()?;
    let n = a.dim;
    let p = &a.parity;
    let e = |i: usize| a.basis(i);
    let mul = |x: &[Rational], y: &[Rational]| a.multiply(x, y);
    let one = Rational::one();
    let mut verdicts = Vec::new();
    let mut push = |axiom, witness: Option<Vec<usize>>, detail: String| {
        verdicts.push(Verdict { axiom, pass: witness.is_none() && detail.is_empty(), witness, detail });
    };

    let w = first_failure(pairs(n), |w| {
        let (i, j) = (w[0], w[1]);
        let s = sgn(p[i] && p[j]);
        (0..n).any(|k| a.mul[i][j][k] != &s * &a.mul[j][i][k])
    })
    .or_else(|| {
        first_failure(triples(n), |w| {
            mul(&mul(&e(w[0]), &e(w[1])), &e(w[2])) != mul(&e(w[0]), &mul(&e(w[1]), &e(w[2])))
        })
    })
    .or_else(|| first_failure((0..n).map(|i| vec![i]), |w| mul(&e(a.unit), &e(w[0])) != e(w[0])));
    push(Axiom::Superalgebra, w, String::new());

    let qq = &a.q * &a.q;
    let gg = &a.gm * &a.gm;
    let qg = &(&a.q * &a.gm) + &(&a.gm * &a.q);
    let w = first_failure((0..n).map(|i| vec![i]), |w| {
        [&qq, &gg, &qg].iter().any(|m| !is_zero_vec(&m.column(w[0])))
    });
    push(Axiom::Differentials, w, String::new());

    let derived = derive_operators(a);
    match &derived {
        Ok(d) => {
            let sq = &d.pi4 * &d.pi4;
            let qp = &a.q * &d.pi0;
            let gp = &a.gm * &d.pi0;
            let col = |m: &Mat, i: usize| !is_zero_vec(&m.column(i));
            let w = first_failure((0..n).map(|i| vec![i]), |w| sq.column(w[0]) != d.pi4.column(w[0]));
            let w2 = first_failure((0..n).map(|i| vec![i]), |w| col(&qp, w[0]) || col(&gp, w[0]));
            match (w, w2) {
                (Some(w), _) => push(Axiom::Hodge, Some(w), "Π₄ is not idempotent".into()),
                (None, Some(w)) => push(Axiom::Hodge, Some(w), "Q or G₋ does not vanish on H₀".into()),
                (None, None) => push(Axiom::Hodge, None, String::new()),
            }
        }
        Err(err) => push(Axiom::Hodge, Some(hodge_witness(a)), err.to_string()),
    }

    let w = first_failure(pairs(n), |w| {
        let (i, j) = (w[0], w[1]);
        let lhs = a.q.apply(&mul(&e(i), &e(j)));
        let rhs = add(&mul(&a.q.column(i), &e(j)), &mul(&e(i), &a.q.column(j)), &sgn(p[i]));
        lhs != rhs
    });
    push(Axiom::Leibniz, w, String::new());

    let gmv = |x: &[Rational]| a.gm.apply(x);
    let w = first_failure(triples(n), |w| {
        let (x, y, z) = (e(w[0]), e(w[1]), e(w[2]));
        let (px, py) = (p[w[0]], p[w[1]]);
        let lhs = gmv(&mul(&mul(&x, &y), &z));
        let mut rhs = mul(&gmv(&mul(&x, &y)), &z);
        rhs = add(&rhs, &mul(&x, &gmv(&mul(&y, &z))), &sgn(px));
        rhs = add(&rhs, &mul(&y, &gmv(&mul(&x, &z))), &sgn((px ^ true) && py));
        rhs = add(&rhs, &mul(&mul(&gmv(&x), &y), &z), &-one.clone());
        rhs = add(&rhs, &mul(&mul(&x, &gmv(&y)), &z), &-sgn(px));
        rhs = add(&rhs, &mul(&mul(&x, &y), &gmv(&z)), &-sgn(px ^ py));
        lhs != rhs
    });
    push(Axiom::SevenTerm, w, String::new());

    let twelfth = rational::frac(1, 12);
    let w = first_failure((0..n).map(|i| vec![i]), |w| {
        let x = e(w[0]);
        let lhs = a.supertrace(&(&a.gm * &a.left_mul(&x)));
        let rhs = &twelfth * a.supertrace(&a.left_mul(&gmv(&x)));
        lhs != rhs
    });
    push(Axiom::OneTwelfth, w, String::new());

    let int = |x: &[Rational], y: &[Rational]| a.integrate(&mul(x, y));
    let mut ops: Vec<(&Mat, Rational)> = vec![(&a.q, -one.clone()), (&a.gm, one.clone())];
    if let Ok(d) = &derived {
        ops.push((&d.gp, one.clone()));
    }
    let w = first_failure(pairs(n), |w| {
        let (i, j) = (w[0], w[1]);
        ops.iter().any(|(m, k)| int(&m.column(i), &e(j)) != k * sgn(p[i]) * int(&e(i), &m.column(j)))
    });
    push(Axiom::Adjointness, w, String::new());

    let mut detail = String::new();
    if a.gram().inverse().is_none() {
        detail = "∫ab is degenerate on H".into();
    } else if let Ok(d) = &derived {
        if d.eta_inv.is_none() {
            detail = "η is degenerate on H₀".into();
        }
    }
    push(Axiom::Nondegeneracy, None, detail);

    Ok(AxiomReport { verdicts })
}

/// A parity-respecting entry of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    Product(usize, usize, usize),
    Q(usize, usize),
    Gm(usize, usize),
    Integral(usize),
}

impl Entry {
    fn bump(self, a: &mut AlgebraInstance) {
        let one = Rational::one();
        match self {
            Entry::Product(i, j, k) => a.mul[i][j][k] += one,
            Entry::Q(k, i) => a.q[(k, i)] += one,
            Entry::Gm(k, i) => a.gm[(k, i)] += one,
            Entry::Integral(i) => a.integral[i] += one,
        }
    }
}

/// The first single entry of `base`, in an order fixed by `seed`, whose
/// increase by one makes `axiom` fail, with the perturbed instance.
pub fn seeded_perturbation(base: &AlgebraInstance, axiom: Axiom, seed: u64) -> Option<(Entry, AlgebraInstance, AxiomReport)> {
    use rand::seq::SliceRandom;
    let n = base.dim;
    let p = &base.parity;
    let mut entries: Vec<Entry> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            entries.extend((0..n).filter(|&k| p[k] == (p[i] ^ p[j])).map(|k| Entry::Product(i, j, k)));
            if p[i] != p[j] {
                entries.push(Entry::Q(i, j));
                entries.push(Entry::Gm(i, j));
            }
        }
        if !p[i] {
            entries.push(Entry::Integral(i));
        }
    }
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    entries.into_iter().find_map(|e| {
        let mut a = base.clone();
        e.bump(&mut a);
        let r = check_axioms(&a).ok()?;
        (!r.passes(axiom)).then_some((e, a, r))
    })
}

/// `ℚ[x]/x²` with `∫x = 1` and zero operators.
pub fn trivial_instance() -> AlgebraInstance {
    let mut a = AlgebraInstance::blank(vec![false, false], 0);
    a.mul[0][0][0] = int(1);
    a.mul[0][1][1] = int(1);
    a.mul[1][0][1] = int(1);
    a.integral[1] = int(1);
    a
}

/// Grassmann-type Frobenius algebra `ℚ[y₁..y_a]/(y_i²) ⊗ Λ[ξ₁..ξ_b]` on the
/// monomial basis, integral picking the top monomial. `b` must be even.
pub fn monomial_frobenius(even_gens: usize, odd_gens: usize) -> AlgebraInstance {
    let nvars = even_gens + odd_gens;
    let dim = 1 << nvars;
    let is_odd_var = |v: usize| v >= even_gens;
    let parity: Vec<bool> = (0..dim).map(|m: usize| (m >> even_gens).count_ones() % 2 == 1).collect();
    let mut a = AlgebraInstance::blank(parity, 0);
    for x in 0..dim {
        for y in 0..dim {
            if x & y != 0 {
                continue;
            }
            // sign of moving the odd variables of y past the larger odd variables of x
            let mut swaps = 0;
            for v in (0..nvars).filter(|&v| is_odd_var(v) && y >> v & 1 == 1) {
                swaps += (v + 1..nvars).filter(|&u| is_odd_var(u) && x >> u & 1 == 1).count();
            }
            a.mul[x][y][x | y] = sgn(swaps % 2 == 1);
        }
    }
    a.integral[dim - 1] = int(1);
    a
}

/// Left partial derivative by generator `var` on the basis of
/// [`monomial_frobenius`]; generators `0..even_gens` are even.
pub fn monomial_derivative(even_gens: usize, odd_gens: usize, var: usize) -> Mat {
    let nvars = even_gens + odd_gens;
    let dim = 1usize << nvars;
    let mut m = Mat::zeros(dim, dim);
    for x in (0..dim).filter(|x| x >> var & 1 == 1) {
        let odd_before = (0..var).filter(|&u| u >= even_gens && x >> u & 1 == 1).count();
        let s = var >= even_gens && odd_before % 2 == 1;
        m[(x & !(1 << var), x)] = sgn(s);
    }
    m
}

/// Search parameters for [`find_instance`].
#[derive(Clone, Debug)]
pub struct SearchParams {
    pub max_dim: usize,
    pub height: i64,
    pub tries: usize,
    pub seed: u64,
    /// Axioms the result must satisfy; the full list requests a genuine instance.
    pub require: Vec<Axiom>,
    /// Require H₄ ≠ 0.
    pub nontrivial: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { max_dim: 8, height: 1, tries: 200, seed: 0, require: Axiom::ALL.to_vec(), nontrivial: true }
    }
}

/// The single-quadruple family: basis `1, ω, e, Qe, G₋e, QG₋e` (plus up to
/// two further harmonic elements), `∫ω = 1`, with free structure constants
/// on the products that parity allows.
fn quadruple_candidate(rng: &mut ChaCha8Rng, extra_h0: usize, e_odd: bool, height: i64) -> AlgebraInstance {
    // indices: 0 = 1, 1 = ω, 2.. = extra harmonic (even), then e, Qe, Ge, QGe
    let base = 2 + extra_h0;
    let (e, qe, ge, qge) = (base, base + 1, base + 2, base + 3);
    let mut parity = vec![false; base + 4];
    parity[e] = e_odd;
    parity[qe] = !e_odd;
    parity[ge] = !e_odd;
    parity[qge] = e_odd;
    let mut a = AlgebraInstance::blank(parity, 0);
    let n = a.dim;
    for i in 0..n {
        a.mul[0][i][i] = int(1);
        a.mul[i][0][i] = int(1);
    }
    a.integral[1] = int(1);
    // pairing: ω dual to 1, quadruple self-dual, extra harmonic elements square to ω
    let set = |a: &mut AlgebraInstance, i: usize, j: usize, k: usize, c: Rational| {
        let s = sgn(a.parity[i] && a.parity[j]);
        a.mul[i][j][k] = c.clone();
        a.mul[j][i][k] = s * c;
    };
    for h in 2..base {
        set(&mut a, h, h, 1, int(1));
    }
    set(&mut a, e, qge, 1, int(1));
    let k = if e_odd { int(1) } else { int(-1) };
    set(&mut a, qe, ge, 1, k);
    // random extra products landing in harmonic or quadruple directions
    for i in 1..n {
        for j in i..n {
            for t in 1..n {
                if a.parity[t] != (a.parity[i] ^ a.parity[j]) || (t == 1) || rng.gen_range(0..6) != 0 {
                    continue;
                }
                if i == j && a.parity[i] {
                    continue;
                }
                let c = int(rng.gen_range(-height..=height));
                set(&mut a, i, j, t, c);
            }
        }
    }
    a.q[(qe, e)] = int(1);
    a.q[(qge, ge)] = int(1);
    a.gm[(ge, e)] = int(1);
    a.gm[(qge, qe)] = int(-1);
    a
}

/// Searches the single-quadruple family for an instance satisfying
/// `params.require`, first with no extra products, then randomly.
pub fn find_instance(params: &SearchParams) -> Option<AlgebraInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let ok = |a: &AlgebraInstance| {
        if a.dim > params.max_dim {
            return false;
        }
        let Ok(report) = check_axioms(a) else { return false };
        if !params.require.iter().all(|ax| report.passes(*ax)) {
            return false;
        }
        if params.nontrivial {
            return derive_operators(a).map(|d| !d.quadruples.is_empty()).unwrap_or(false);
        }
        true
    };
    if !params.nontrivial && ok(&trivial_instance()) {
        return Some(trivial_instance());
    }
    for attempt in 0..params.tries {
        for extra in 0..=2usize {
            for e_odd in [false, true] {
                let h = if attempt == 0 { 0 } else { params.height };
                let cand = quadruple_candidate(&mut rng, extra, e_odd, h);
                if ok(&cand) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// The smallest instance with H₄ ≠ 0 produced by the search: `1, ω` and
/// one quadruple on an odd generator, all other products zero.
pub fn minimal_quadruple_instance() -> AlgebraInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    quadruple_candidate(&mut rng, 0, true, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_instance_passes() {
        let a = trivial_instance();
        let r = check_axioms(&a).unwrap();
        assert!(r.all_pass(), "{}", r.render());
        let d = derive_operators(&a).unwrap();
        assert!(d.gp.is_zero());
        assert_eq!(d.pi0, Mat::identity(2));
        assert!(d.pi4.is_zero());
        assert_eq!(d.eta, Mat::from_fn(2, 2, |i, j| int(i64::from(i != j))));
    }

    #[test]
    fn even_q_is_rejected() {
        let mut a = trivial_instance();
        a.q[(1, 0)] = int(1);
        assert!(matches!(check_axioms(&a), Err(Error::Algebra(_))));
    }

    #[test]
    fn one_dimensional_degenerate() {
        let mut a = AlgebraInstance::blank(vec![false], 0);
        a.mul[0][0][0] = int(1);
        let r = check_axioms(&a).unwrap();
        assert!(!r.passes(Axiom::Nondegeneracy));
    }

    #[test]
    fn text_roundtrip() {
        let a = minimal_quadruple_instance();
        assert_eq!(AlgebraInstance::parse(&a.to_text()).unwrap(), a);
        assert!(AlgebraInstance::parse("").is_err());
        assert!(matches!(
            AlgebraInstance::parse("dim 1\nparity e\nfoo 1"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn minimal_quadruple_instance_is_full() {
        let a = minimal_quadruple_instance();
        let r = check_axioms(&a).unwrap();
        assert!(r.all_pass(), "{}", r.render());
        let d = derive_operators(&a).unwrap();
        assert_eq!(d.quadruples.len(), 1);
        assert!((&d.pi0 * &d.pi4).is_zero());
        assert_eq!(&d.pi0 + &d.pi4, Mat::identity(a.dim));
        let gmgp = &(&a.gm * &d.gp) + &(&d.gp * &a.gm);
        assert!(gmgp.is_zero());
    }

    #[test]
    fn even_generator_quadruple_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = quadruple_candidate(&mut rng, 0, false, 0);
        let r = check_axioms(&a).unwrap();
        assert!(!r.all_pass());
    }

    #[test]
    fn tensor_with_frobenius_stays_full() {
        let a = minimal_quadruple_instance().tensor(&trivial_instance());
        let r = check_axioms(&a).unwrap();
        assert!(r.all_pass(), "{}", r.render());
    }

    #[test]
    fn grassmann_frobenius_is_superalgebra() {
        let a = monomial_frobenius(1, 2);
        let r = check_axioms(&a).unwrap();
        assert!(r.passes(Axiom::Superalgebra), "{}", r.render());
        assert!(r.passes(Axiom::Nondegeneracy), "{}", r.render());
    }

    #[test]
    fn seven_term_matches_operator_order() {
        let base = monomial_frobenius(0, 4);
        let d = |v| monomial_derivative(0, 4, v);
        let xi = |v: usize| base.left_mul(&base.basis(1 << v));
        let with_gm = |m: Mat| {
            let mut a = base.clone();
            a.gm = m;
            check_axioms(&a).unwrap()
        };
        assert!(with_gm(&(&xi(0) * &d(1)) * &d(2)).passes(Axiom::SevenTerm));
        assert!(with_gm(d(3)).passes(Axiom::SevenTerm));
        let third = with_gm(&(&d(0) * &d(1)) * &d(2));
        assert!(third.get(Axiom::SevenTerm).witness.is_some());

        let mut leib = monomial_frobenius(1, 2);
        let y = leib.left_mul(&leib.basis(1));
        leib.q = &y * &monomial_derivative(1, 2, 1);
        let r = check_axioms(&leib).unwrap();
        assert!(r.passes(Axiom::Leibniz) && r.passes(Axiom::Differentials), "{}", r.render());
    }
}
