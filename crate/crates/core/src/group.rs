use std::sync::Arc;

use num::{One, Zero};

use crate::chart::{Chart, Parity, Point};
use crate::derivation::Derivation;
use crate::element::{Monomial, SuperElement};
use crate::error::{Error, Result};
use crate::form::Form;
use crate::gform::GForm;
use crate::lie::LieSuperalgebra;
use crate::morphism::AlgebraMorphism;
use crate::report::{Check, Report};
use crate::solve::solve_left_module;
use crate::tensor::{tensor_chart, PointDerivation, PointEval, PrimitiveFunctional, TensorSplit};
use crate::Q;

/// A tangent vector at the identity: a point derivation there, homogeneous
/// by construction. These are exactly the primitive functionals of the
/// group algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub deriv: PointDerivation,
    pub parity: Parity,
}

impl TangentVector {
    pub fn functional(&self) -> PrimitiveFunctional<'_> {
        PrimitiveFunctional {
            deriv: &self.deriv,
            parity: self.parity,
        }
    }
}

/// A graded Lie group presented as a finitely generated Hopf superalgebra:
/// a chart, coproduct images in the doubled chart (second copy primed),
/// counit values, an antipode morphism, and the identity point.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfGroup {
    pub name: String,
    pub chart: Arc<Chart>,
    /// chart (x) chart, the second copy primed
    pub t2: TensorSplit,
    /// chart (x) chart (x) chart
    pub t3: TensorSplit,
    pub coproduct: AlgebraMorphism,
    /// counit values per generator (evens then odds; odd entries must be 0)
    pub counit: Vec<Q>,
    pub antipode: AlgebraMorphism,
    pub identity: Point,
    /// standalone primed copy of the chart, used for symbolic points
    pub primed: Arc<Chart>,
}

impl HopfGroup {
    pub fn new(
        name: impl Into<String>,
        chart: Arc<Chart>,
        coproduct_images: Vec<(String, SuperElement)>,
        counit: Vec<Q>,
        antipode_images: Vec<(String, SuperElement)>,
        identity: Point,
    ) -> Result<HopfGroup> {
        let name = name.into();
        let t2 = tensor_chart(format!("{}^2", name), &chart, &chart, false)?;
        let t3 = tensor_chart(format!("{}^3", name), &t2.chart, &chart, false)?;
        let coproduct = AlgebraMorphism::from_images(&chart, &t2.chart, &coproduct_images)?;
        let antipode = AlgebraMorphism::from_images(&chart, &chart, &antipode_images)?;
        assert_eq!(counit.len(), chart.evens.len() + chart.odds.len());
        for (j, v) in counit[chart.evens.len()..].iter().enumerate() {
            if !v.is_zero() {
                return Err(Error::ParityMismatch(format!(
                    "counit of odd generator `{}` must vanish",
                    chart.odds[j]
                )));
            }
        }
        let primed = {
            let evens = chart
                .evens
                .iter()
                .map(|g| (format!("{}'", g.name), g.invertible))
                .collect();
            let odds = chart.odds.iter().map(|s| format!("{}'", s)).collect();
            Chart::new(format!("{}'", name), evens, odds)?
        };
        Ok(HopfGroup {
            name,
            chart,
            t2,
            t3,
            coproduct,
            counit,
            antipode,
            identity,
            primed,
        })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.chart.dim()
    }

    fn counit_point(&self) -> Point {
        Point {
            chart: self.chart.clone(),
            even_values: self.counit[..self.chart.evens.len()].to_vec(),
        }
    }

    fn counit_of_gen(&self, idx: usize) -> Q {
        self.counit[idx].clone()
    }

    /// Names for the derived Lie-superalgebra basis: one even vector per
    /// even coordinate (E, or E1..Ep), one odd per odd coordinate (F, or
    /// F1..Fq).
    pub fn lie_basis_names(&self) -> Vec<(String, Parity)> {
        let (p, q) = self.dim();
        let mut names = Vec::new();
        for i in 0..p {
            let n = if p == 1 {
                "E".to_string()
            } else {
                format!("E{}", i + 1)
            };
            names.push((n, Parity::Even));
        }
        for j in 0..q {
            let n = if q == 1 {
                "F".to_string()
            } else {
                format!("F{}", j + 1)
            };
            names.push((n, Parity::Odd));
        }
        names
    }

    /// The coordinate tangent vector at the identity for basis slot `k`
    /// (evens first, then odds).
    pub fn tangent_basis(&self, k: usize) -> TangentVector {
        let (p, q) = self.dim();
        assert!(k < p + q);
        let mut even = vec![Q::zero(); self.chart.evens.len()];
        let mut odd = vec![Q::zero(); self.chart.odds.len()];
        let parity = if k < p {
            even[k] = Q::one();
            Parity::Even
        } else {
            odd[k - p] = Q::one();
            Parity::Odd
        };
        TangentVector {
            deriv: PointDerivation::new(self.identity.clone(), even, odd),
            parity,
        }
    }

    pub fn tangent_from_coeffs(&self, coeffs: &[Q], parity: Parity) -> TangentVector {
        let (p, q) = self.dim();
        assert_eq!(coeffs.len(), p + q);
        let even = coeffs[..p].to_vec();
        let odd = coeffs[p..].to_vec();
        TangentVector {
            deriv: PointDerivation::new(self.identity.clone(), even, odd),
            parity,
        }
    }

    /// Verify the Hopf axioms generator by generator; all maps involved are
    /// algebra morphisms, so generator-level equality decides them on the
    /// whole algebra.
    pub fn validate(&self) -> Result<Report> {
        let mut report = Report::new("hopf");
        // coassociativity: (delta (x) id) o delta = (id (x) delta) o delta
        let d3_left = self.t2.lift_left(&self.coproduct, &self.t3)?;
        let t3r = tensor_chart(format!("{}^3", self.name), &self.chart, &self.t2.chart, false)?;
        let d3_right = {
            let ty = &self.t2;
            ty.lift_right(&self.coproduct, &t3r)?
        };
        let left = self.coproduct.then(&d3_left)?;
        let right = self.coproduct.then(&d3_right)?;
        Chart::same_chart(&self.t3.chart, &t3r.chart)?;
        for name in self.chart.gen_names() {
            let l = left.image_of(&name)?;
            let r = right.image_of(&name)?;
            report.push(Check::witnessed(
                format!("coassociativity[{}]", name),
                l == r,
                (l != r).then(|| format!("{} vs {}", l, r)),
            ));
        }
        // counit laws
        let eps_point = self.counit_point();
        let eps = PointEval(&eps_point);
        for (idx, name) in self.chart.gen_names().enumerate() {
            let gen = SuperElement::gen_by_name(&self.chart, &name)?;
            let dg = self.coproduct.image_of(&name)?;
            let lhs = self.t2.contract_right(dg, &eps)?;
            let rhs = self.t2.contract_left(dg, &eps)?;
            let ok = lhs == gen && rhs == gen;
            report.push(Check::witnessed(
                format!("counit[{}]", name),
                ok,
                (!ok).then(|| format!("(id(x)eps): {}, (eps(x)id): {}", lhs, rhs)),
            ));
            let _ = idx;
        }
        // antipode: m o (S (x) id) o delta = eps * 1 = m o (id (x) S) o delta
        let mult = self.t2.multiplication()?;
        let s_left = self.t2.lift_left(&self.antipode, &self.t2)?;
        let s_right = self.t2.lift_right(&self.antipode, &self.t2)?;
        for (idx, name) in self.chart.gen_names().enumerate() {
            let dg = self.coproduct.image_of(&name)?;
            let lhs = mult.apply(&s_left.apply(dg)?)?;
            let rhs = mult.apply(&s_right.apply(dg)?)?;
            let target = SuperElement::from_rational(&self.chart, self.counit_of_gen(idx));
            let ok = lhs == target && rhs == target;
            report.push(Check::witnessed(
                format!("antipode[{}]", name),
                ok,
                (!ok).then(|| format!("lhs: {}, rhs: {}, eps: {}", lhs, rhs, target)),
            ));
        }
        // the identity point realizes the counit
        for (idx, name) in self.chart.gen_names().enumerate() {
            let gen = SuperElement::gen_by_name(&self.chart, &name)?;
            let v = gen.eval(&self.identity)?;
            let ok = v == self.counit_of_gen(idx);
            report.push(Check::witnessed(
                format!("identity-counit[{}]", name),
                ok,
                (!ok).then(|| format!("delta_e = {}, eps = {}", v, self.counit_of_gen(idx))),
            ));
        }
        Ok(report)
    }

    /// The right-invariant coordinate derivations `(R*)_a = (id (x) a) o
    /// delta` for a primitive functional `a`.
    pub fn right_invariant(&self, a: &TangentVector) -> Result<Derivation> {
        let mut even = Vec::new();
        for i in 0..self.chart.coord_evens {
            let img = self.coproduct.image_of(&self.chart.evens[i].name)?;
            even.push(self.t2.contract_right(img, &a.functional())?);
        }
        let mut odd = Vec::new();
        for j in 0..self.chart.coord_odds {
            let img = self.coproduct.image_of(&self.chart.odds[j].clone())?;
            odd.push(self.t2.contract_right(img, &a.functional())?);
        }
        Derivation::new(&self.chart, even, odd)
    }

    /// The left-action induced derivations `(L*)_a = (a (x) id) o delta`.
    pub fn left_invariant(&self, a: &TangentVector) -> Result<Derivation> {
        let mut even = Vec::new();
        for i in 0..self.chart.coord_evens {
            let img = self.coproduct.image_of(&self.chart.evens[i].name)?;
            even.push(self.t2.contract_left(img, &a.functional())?);
        }
        let mut odd = Vec::new();
        for j in 0..self.chart.coord_odds {
            let img = self.coproduct.image_of(&self.chart.odds[j].clone())?;
            odd.push(self.t2.contract_left(img, &a.functional())?);
        }
        Derivation::new(&self.chart, even, odd)
    }

    /// Right translation by a concrete point: `(id (x) delta_g) o delta`.
    pub fn right_translation(&self, g: &Point) -> Result<AlgebraMorphism> {
        let eval = PointEval(g);
        let mut images = Vec::new();
        for name in self.chart.gen_names() {
            let img = self.coproduct.image_of(&name)?;
            images.push((name, self.t2.contract_right(img, &eval)?));
        }
        AlgebraMorphism::from_images(&self.chart, &self.chart, &images)
    }

    /// Symbolic right translation: the coproduct read as a morphism into
    /// chart (x) primed-parameters. One identity over the parameters covers
    /// all group elements at once.
    pub fn right_translation_symbolic(&self) -> &AlgebraMorphism {
        &self.coproduct
    }

    /// Symbolic left translation: the coproduct followed by the twist that
    /// swaps the two copies (an algebra morphism, so all Koszul signs are
    /// produced by the multiplication).
    pub fn left_translation_symbolic(&self) -> Result<AlgebraMorphism> {
        let mut images = Vec::new();
        let n_evens = self.chart.evens.len();
        let n_odds = self.chart.odds.len();
        for (i, g) in self.t2.chart.evens.iter().enumerate() {
            let target = if i < n_evens {
                SuperElement::even_gen(&self.t2.chart, n_evens + i)
            } else {
                SuperElement::even_gen(&self.t2.chart, i - n_evens)
            };
            images.push((g.name.clone(), target));
        }
        for (j, s) in self.t2.chart.odds.iter().enumerate() {
            let target = if j < n_odds {
                SuperElement::odd_gen(&self.t2.chart, n_odds + j)
            } else {
                SuperElement::odd_gen(&self.t2.chart, j - n_odds)
            };
            images.push((s.clone(), target));
        }
        let twist = AlgebraMorphism::from_images(&self.t2.chart, &self.t2.chart, &images)?;
        self.coproduct.then(&twist)
    }

    /// The prime-substitution morphism onto the standalone primed chart.
    pub fn prime_morphism(&self) -> Result<AlgebraMorphism> {
        let images: Vec<(String, SuperElement)> = self
            .chart
            .gen_names()
            .zip(self.primed.gen_names())
            .map(|(src, dst)| {
                SuperElement::gen_by_name(&self.primed, &dst).map(|e| (src, e))
            })
            .collect::<Result<_>>()?;
        AlgebraMorphism::from_images(&self.chart, &self.primed, &images)
    }

    /// Extract the Lie superalgebra: basis are the coordinate tangents at
    /// the identity, the bracket is the convolution commutator
    /// `[u,v] = (u (x) v) o delta - (-1)^{|u||v|} (v (x) u) o delta`
    /// with the functional pairing sign `(u (x) v)(a (x) b) =
    /// (-1)^{|v||a|} u(a) v(b)`.
    pub fn lie_algebra(&self) -> Result<Arc<LieSuperalgebra>> {
        let (p, q) = self.dim();
        let d = p + q;
        let names = self.lie_basis_names();
        let basis: Vec<TangentVector> = (0..d).map(|k| self.tangent_basis(k)).collect();
        let mut constants = vec![vec![vec![Q::zero(); d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                // values of [e_i, e_j] on the coordinate generators
                for (k, name) in self.chart.gen_names().enumerate() {
                    let dg = self.coproduct.image_of(&name)?;
                    constants[i][j][k] =
                        self.convolution_commutator_value(&basis[i], &basis[j], dg)?;
                }
            }
        }
        let lsa = LieSuperalgebra::new(names, constants);
        // closure: the commutator functional must agree with its
        // first-order reconstruction on products of coordinates
        let lsa = Arc::new(lsa);
        for i in 0..d {
            for j in 0..d {
                let mut even = vec![Q::zero(); self.chart.evens.len()];
                let mut odd = vec![Q::zero(); self.chart.odds.len()];
                for (k, c) in lsa.constants[i][j].iter().enumerate() {
                    if k < p {
                        even[k] = c.clone();
                    } else {
                        odd[k - p] = c.clone();
                    }
                }
                let rebuilt = PointDerivation::new(self.identity.clone(), even, odd);
                for ga in self.chart.gen_names() {
                    for gb in self.chart.gen_names() {
                        let prod = SuperElement::gen_by_name(&self.chart, &ga)?
                            .checked_mul(&SuperElement::gen_by_name(&self.chart, &gb)?)?;
                        let dprod = self.coproduct.apply(&prod)?;
                        let direct =
                            self.convolution_commutator_value(&basis[i], &basis[j], &dprod)?;
                        let mut recon = Q::zero();
                        for (m, qc) in &prod.terms {
                            recon += qc * rebuilt.value_on_monomial(m)?;
                        }
                        if direct != recon {
                            return Err(Error::BracketNotClosed(format!("{}*{}", ga, gb)));
                        }
                    }
                }
            }
        }
        Ok(lsa)
    }

    fn convolution_commutator_value(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        dg: &SuperElement,
    ) -> Result<Q> {
        let uv = self.pair_two(u, v, dg)?;
        let vu = self.pair_two(v, u, dg)?;
        let sign = if u.parity == Parity::Odd && v.parity == Parity::Odd {
            Q::one()
        } else {
            -Q::one()
        };
        Ok(uv + vu * sign)
    }

    /// `(u (x) v)` applied to an element of the doubled chart.
    fn pair_two(&self, u: &TangentVector, v: &TangentVector, elem: &SuperElement) -> Result<Q> {
        let mut acc = Q::zero();
        for (m, qc) in &elem.terms {
            let (m1, m2) = self.t2.split_monomial(m);
            let a = u.deriv.value_on_monomial(&m1)?;
            if a.is_zero() {
                continue;
            }
            let b = v.deriv.value_on_monomial(&m2)?;
            if b.is_zero() {
                continue;
            }
            let sign = if v.parity == Parity::Odd && m1.parity() == Parity::Odd {
                -Q::one()
            } else {
                Q::one()
            };
            acc += qc * a * b * sign;
        }
        Ok(acc)
    }

    /// Matrix of the adjoint action of a symbolic group element on the Lie
    /// superalgebra, with entries in the primed parameter algebra. Column j
    /// is `g e_j g^{-1}` paired against the coordinates; `inverse_first`
    /// swaps g and its inverse (giving the matrix for the inverse element).
    pub fn adjoint_symbolic(&self, inverse_first: bool) -> Result<Vec<Vec<SuperElement>>> {
        let prime = self.prime_morphism()?;
        let sprime = self.antipode.then(&prime)?;
        let (first, third) = if inverse_first {
            (&sprime, &prime)
        } else {
            (&prime, &sprime)
        };
        let (p, q) = self.dim();
        let d = p + q;
        // (delta (x) id) o delta
        let d3 = self
            .coproduct
            .then(&self.t2.lift_left(&self.coproduct, &self.t3)?)?;
        let mut matrix = vec![vec![SuperElement::zero(&self.primed); d]; d];
        for j in 0..d {
            let ej = self.tangent_basis(j);
            for (k, name) in self.chart.gen_names().enumerate() {
                let expanded = d3.image_of(&name)?;
                let mut acc = SuperElement::zero(&self.primed);
                for (m, qc) in &expanded.terms {
                    let (m12, m3) = self.t3.split_monomial(m);
                    let (m1, m2) = self.t2.split_monomial(&m12);
                    let mid = ej.deriv.value_on_monomial(&m2)?;
                    if mid.is_zero() {
                        continue;
                    }
                    let sign = if ej.parity == Parity::Odd && m1.parity() == Parity::Odd {
                        -Q::one()
                    } else {
                        Q::one()
                    };
                    let mut e1 = SuperElement::zero(&self.chart);
                    e1.add_term(m1, Q::one());
                    let mut e3 = SuperElement::zero(&self.chart);
                    e3.add_term(m3, Q::one());
                    let val = first.apply(&e1)?.checked_mul(&third.apply(&e3)?)?;
                    acc = acc.checked_add(&val.scale(&(qc * mid * sign)))?;
                }
                matrix[k][j] = acc;
            }
        }
        Ok(matrix)
    }

    /// The Maurer-Cartan form: the unique degree-(1,0) form with
    /// `((R*)_a | theta) = 1 (x) a` on every tangent vector, obtained by a
    /// linear solve against the right-invariant basis. The coefficient
    /// matrix has unit-body determinant because the group chart is
    /// parallelizable.
    pub fn maurer_cartan(&self) -> Result<GForm> {
        let lsa = self.lie_algebra()?;
        let (p, q) = self.dim();
        let d = p + q;
        let basis: Vec<Derivation> = (0..d)
            .map(|k| self.right_invariant(&self.tangent_basis(k)))
            .collect::<Result<_>>()?;
        // W[j][u] = coefficient of basis derivation j at coordinate slot u
        let coeff = |j: usize, u: usize| -> SuperElement {
            if u < p {
                basis[j].even_coeffs[u].clone()
            } else {
                basis[j].odd_coeffs[u - p].clone()
            }
        };
        let slot_parity = |u: usize| -> Parity {
            if u < p {
                Parity::Even
            } else {
                Parity::Odd
            }
        };
        let mut components = Vec::with_capacity(d);
        for k in 0..d {
            let pk = lsa.parity(k);
            // solve sum_u V_u * [(-1)^{(|e_j|+j_u)(|e_k|+j_u)} W[j][u]] = delta_jk
            let mut columns = Vec::with_capacity(d);
            for u in 0..d {
                let mut col = Vec::with_capacity(d);
                for (j, bj) in basis.iter().enumerate() {
                    let _ = bj;
                    let pj = lsa.parity(j);
                    let exp = (pj + slot_parity(u)) == Parity::Odd
                        && (pk + slot_parity(u)) == Parity::Odd;
                    let mut w = coeff(j, u);
                    if exp {
                        w = w.neg();
                    }
                    col.push(w);
                }
                columns.push(col);
            }
            let mut rhs = vec![SuperElement::zero(&self.chart); d];
            rhs[k] = SuperElement::one(&self.chart);
            let values = solve_left_module(&self.chart, &columns, &rhs)?;
            let even_vals = values[..p].to_vec();
            let odd_vals = values[p..].to_vec();
            components.push(Form::one_form_from_values(
                &self.chart,
                &even_vals,
                &odd_vals,
            )?);
        }
        GForm::new(&self.chart, &lsa, components)
    }

    /// Body group: the underlying ordinary group on the even coordinates,
    /// with all odd generators of the presentation sent to zero.
    pub fn body_group(&self) -> Result<HopfGroup> {
        let evens: Vec<(String, bool)> = self
            .chart
            .evens
            .iter()
            .map(|g| (g.name.clone(), g.invertible))
            .collect();
        let body_chart = Chart::new(format!("{}0", self.name), evens, vec![])?;
        let body_t2 = tensor_chart(
            format!("{}0^2", self.name),
            &body_chart,
            &body_chart,
            false,
        )?;
        // push coproduct/antipode images through the body projection
        let project = |e: &SuperElement, target: &Arc<Chart>| -> Result<SuperElement> {
            let mut out = SuperElement::zero(target);
            for (m, qc) in &e.body().terms {
                let evens: Vec<i64> = m.evens.clone();
                out.add_term(
                    Monomial {
                        evens,
                        odds: 0,
                    },
                    qc.clone(),
                );
            }
            Ok(out)
        };
        let mut cop_images = Vec::new();
        for g in &self.chart.evens {
            let img = self.coproduct.image_of(&g.name)?;
            // drop odd content, keep the even exponents of both copies
            let mut out = SuperElement::zero(&body_t2.chart);
            for (m, qc) in &img.body().terms {
                let (m1, m2) = self.t2.split_monomial(m);
                let mut evens = m1.evens.clone();
                evens.extend(m2.evens.iter().cloned());
                out.add_term(Monomial { evens, odds: 0 }, qc.clone());
            }
            cop_images.push((g.name.clone(), out));
        }
        let mut ant_images = Vec::new();
        for g in &self.chart.evens {
            let img = self.antipode.image_of(&g.name)?;
            ant_images.push((g.name.clone(), project(img, &body_chart)?));
        }
        let counit = self.counit[..self.chart.evens.len()].to_vec();
        let identity = Point::new(body_chart.clone(), self.identity.even_values.clone())?;
        HopfGroup::new(
            format!("{}0", self.name),
            body_chart,
            cop_images,
            counit,
            ant_images,
            identity,
        )
    }
}

/// Which side a group acts on; the engine's geometry is built on right
/// actions, left actions appear through the group acting on itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// An action of a graded Lie group on a graded manifold, presented by the
/// coaction images `phi*(gen)` in space (x) group.
#[derive(Debug, Clone)]
pub struct Action {
    pub space: Arc<Chart>,
    pub group: Arc<HopfGroup>,
    pub split: TensorSplit,
    pub coaction: AlgebraMorphism,
    pub side: Side,
}

impl Action {
    pub fn new(
        space: Arc<Chart>,
        group: Arc<HopfGroup>,
        images: Vec<(String, SuperElement)>,
        side: Side,
    ) -> Result<Action> {
        let split = tensor_chart(
            format!("{}x{}", space.name, group.name),
            &space,
            &group.chart,
            false,
        )?;
        let coaction = AlgebraMorphism::from_images(&space, &split.chart, &images)?;
        Ok(Action {
            space,
            group,
            split,
            coaction,
            side,
        })
    }

    /// The group acting on itself by right translations: the coaction is
    /// the coproduct.
    pub fn self_action(group: &Arc<HopfGroup>) -> Result<Action> {
        let images: Vec<(String, SuperElement)> = group
            .chart
            .gen_names()
            .map(|n| {
                group
                    .coproduct
                    .image_of(&n)
                    .map(|e| (n.clone(), e.clone()))
            })
            .collect::<Result<_>>()?;
        // rebuild over a fresh split so that chart names line up
        Action::new(group.chart.clone(), group.clone(), images, Side::Right)
    }

    /// Verify the comodule axioms on every space generator.
    pub fn check(&self) -> Result<Report> {
        let mut report = Report::new("action");
        if self.side == Side::Left {
            return Err(Error::Model(
                "left-action verification is expressed through the right action".into(),
            ));
        }
        // (id (x) delta) o phi = (phi (x) id) o phi
        let t_ya2 = tensor_chart(
            format!("{}xG2", self.space.name),
            &self.space,
            &self.group.t2.chart,
            false,
        )?;
        let lhs_lift = self.split.lift_right(&self.group.coproduct, &t_ya2)?;
        let t_y2 = tensor_chart(
            format!("{}xG2", self.space.name),
            &self.split.chart,
            &self.group.chart,
            false,
        )?;
        let rhs_lift = {
            // (phi (x) id): space (x) G -> (space (x) G) (x) G
            self.split.lift_left(&self.coaction, &t_y2)?
        };
        Chart::same_chart(&t_ya2.chart, &t_y2.chart)?;
        for name in self.space.gen_names() {
            let img = self.coaction.image_of(&name)?;
            let lhs = lhs_lift.apply(img)?;
            let rhs = rhs_lift.apply(img)?;
            report.push(Check::witnessed(
                format!("coassociativity[{}]", name),
                lhs == rhs,
                (lhs != rhs).then(|| format!("{} vs {}", lhs, rhs)),
            ));
        }
        // (id (x) eps) o phi = id
        let eps_point = self.group.counit_point();
        let eps = PointEval(&eps_point);
        for name in self.space.gen_names() {
            let img = self.coaction.image_of(&name)?;
            let reduced = self.split.contract_right(img, &eps)?;
            let gen = SuperElement::gen_by_name(&self.space, &name)?;
            report.push(Check::witnessed(
                format!("counit[{}]", name),
                reduced == gen,
                (reduced != gen).then(|| format!("got {}", reduced)),
            ));
        }
        Ok(report)
    }

    /// The induced derivation `(phi*)_a = (id (x) a) o phi*` of a primitive
    /// functional.
    pub fn induced_derivation(&self, a: &TangentVector) -> Result<Derivation> {
        let f = a.functional();
        let mut even = Vec::new();
        for i in 0..self.space.coord_evens {
            let img = self.coaction.image_of(&self.space.evens[i].name)?;
            even.push(self.split.contract_right(img, &f)?);
        }
        let mut odd = Vec::new();
        for j in 0..self.space.coord_odds {
            let img = self.coaction.image_of(&self.space.odds[j].clone())?;
            odd.push(self.split.contract_right(img, &f)?);
        }
        Derivation::new(&self.space, even, odd)
    }

    /// The induced algebra morphism of a symbolic group element: the
    /// coaction with the group factor renamed to primed parameters. The
    /// resulting chart adjoins the parameters as constants.
    pub fn induced_morphism_symbolic(&self) -> Result<(AlgebraMorphism, TensorSplit)> {
        let target = tensor_chart(
            format!("{}|param", self.space.name),
            &self.space,
            &self.group.primed,
            true,
        )?;
        // rename: space part identity, group part to the primed copy
        let mut images = Vec::new();
        for (i, g) in self.split.chart.evens.iter().enumerate() {
            let img = if i < self.space.evens.len() {
                SuperElement::even_gen(&target.chart, i)
            } else {
                SuperElement::even_gen(&target.chart, self.space.evens.len() + (i - self.space.evens.len()))
            };
            images.push((g.name.clone(), img));
        }
        for (j, s) in self.split.chart.odds.iter().enumerate() {
            let img = if j < self.space.odds.len() {
                SuperElement::odd_gen(&target.chart, j)
            } else {
                SuperElement::odd_gen(&target.chart, self.space.odds.len() + (j - self.space.odds.len()))
            };
            images.push((s.clone(), img));
        }
        let rename = AlgebraMorphism::from_images(&self.split.chart, &target.chart, &images)?;
        Ok((self.coaction.then(&rename)?, target))
    }

    /// The induced distribution: one derivation per Lie basis element, with
    /// bracket closure and sampled-point regularity.
    pub fn distribution(&self, seed: u64) -> Result<(Vec<Derivation>, Report)> {
        let mut report = Report::new("distribution");
        let lsa = self.group.lie_algebra()?;
        let d = lsa.dim();
        let basis: Vec<TangentVector> = (0..d).map(|k| self.group.tangent_basis(k)).collect();
        let derivs: Vec<Derivation> = basis
            .iter()
            .map(|a| self.induced_derivation(a))
            .collect::<Result<_>>()?;
        // bracket closure: [(phi*)_a, (phi*)_b] = (phi*)_{[a,b]}
        for i in 0..d {
            for j in 0..d {
                let lhs = derivs[i].bracket(&derivs[j])?;
                let coeffs = &lsa.constants[i][j];
                let mut rhs = Derivation::zero(&self.space);
                for (k, c) in coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        let scaled = derivs[k]
                            .left_mul(&SuperElement::from_rational(&self.space, c.clone()))?;
                        rhs = rhs.add(&scaled)?;
                    }
                }
                let ok = lhs == rhs;
                report.push(Check::witnessed(
                    format!("bracket-closure[{},{}]", lsa.basis[i].0, lsa.basis[j].0),
                    ok,
                    (!ok).then(|| format!("{} vs {}", lhs, rhs)),
                ));
            }
        }
        // sampled-point regularity of the even and odd blocks
        let (pe, po) = (
            basis.iter().filter(|b| b.parity == Parity::Even).count(),
            basis.iter().filter(|b| b.parity == Parity::Odd).count(),
        );
        let points = sample_points(&self.space, 10, seed)?;
        let mut ok_rank = true;
        let mut witness = None;
        for (pi, point) in points.iter().enumerate() {
            let mut even_rows = Vec::new();
            let mut odd_rows = Vec::new();
            for (b, deriv) in basis.iter().zip(&derivs) {
                let t = deriv.tangent_at(point)?;
                match b.parity {
                    Parity::Even => even_rows.push(t.even_coeffs.clone()),
                    Parity::Odd => odd_rows.push(t.odd_coeffs.clone()),
                }
            }
            let re = crate::solve::rational_rank(&even_rows);
            let ro = crate::solve::rational_rank(&odd_rows);
            if re != pe || ro != po {
                ok_rank = false;
                witness.get_or_insert_with(|| {
                    format!(
                        "point #{}: even rank {}/{}, odd rank {}/{}",
                        pi, re, pe, ro, po
                    )
                });
            }
        }
        report.push(Check::witnessed(
            format!("regularity({}|{})", pe, po),
            ok_rank,
            witness,
        ));
        Ok((derivs, report))
    }
}

/// Deterministic sampled rational points avoiding zeros of invertible
/// generators.
pub fn sample_points(chart: &Arc<Chart>, count: usize, seed: u64) -> Result<Vec<Point>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut values = Vec::with_capacity(chart.evens.len());
        for g in &chart.evens {
            loop {
                let num: i64 = rng.gen_range(-9..=9);
                let den: i64 = rng.gen_range(1..=3);
                if num == 0 && g.invertible {
                    continue;
                }
                values.push(Q::new(num.into(), den.into()));
                break;
            }
        }
        out.push(Point::new(chart.clone(), values)?);
    }
    Ok(out)
}

/// The translation supergroup on p even and q odd coordinates: every
/// generator is primitive, the antipode negates, the identity sits at the
/// origin.
pub fn translation_group(p: usize, q: usize) -> Result<HopfGroup> {
    let even_name = |i: usize| {
        if p == 1 {
            "x".to_string()
        } else {
            format!("x{}", i + 1)
        }
    };
    let odd_name = |j: usize| {
        if q == 1 {
            "s".to_string()
        } else {
            format!("s{}", j + 1)
        }
    };
    let evens: Vec<(String, bool)> = (0..p).map(|i| (even_name(i), false)).collect();
    let odds: Vec<String> = (0..q).map(odd_name).collect();
    let chart = Chart::new(format!("R{}|{}", p, q), evens, odds)?;
    let t2 = tensor_chart("tmp", &chart, &chart, false)?;
    let mut cop = Vec::new();
    let mut ant = Vec::new();
    for (i, name) in chart.gen_names().enumerate() {
        let here = SuperElement::gen_by_name(&chart, &name)?;
        let left = t2.embed_left(&here)?;
        let right = t2.embed_right(&here)?;
        cop.push((name.clone(), left.checked_add(&right)?));
        ant.push((name.clone(), here.neg()));
        let _ = i;
    }
    let counit = vec![Q::zero(); p + q];
    let identity = Point::new(chart.clone(), vec![Q::zero(); p])?;
    HopfGroup::new(format!("R{}|{}", p, q), chart, cop, counit, ant, identity)
}

/// The triangular (1|1) supergroup: an invertible even coordinate t with
/// group-like coproduct and an odd coordinate tau with twisted-primitive
/// coproduct `tau (x) t + 1 (x) tau`.
pub fn triangular_group() -> Result<HopfGroup> {
    let chart = Chart::new("T1|1", vec![("t".into(), true)], vec!["tau".into()])?;
    let t2 = tensor_chart("tmp", &chart, &chart, false)?;
    let t = SuperElement::even_gen(&chart, 0);
    let tau = SuperElement::odd_gen(&chart, 0);
    let t_l = t2.embed_left(&t)?;
    let t_r = t2.embed_right(&t)?;
    let tau_l = t2.embed_left(&tau)?;
    let tau_r = t2.embed_right(&tau)?;
    let cop = vec![
        ("t".to_string(), t_l.checked_mul(&t_r)?),
        ("tau".to_string(), tau_l.checked_mul(&t_r)?.checked_add(&tau_r)?),
    ];
    let tinv = t.invert()?;
    let ant = vec![
        ("t".to_string(), tinv.clone()),
        ("tau".to_string(), tau.checked_mul(&tinv)?.neg()),
    ];
    let counit = vec![Q::one(), Q::zero()];
    let identity = Point::new(chart.clone(), vec![Q::one()])?;
    HopfGroup::new("T1|1", chart, cop, counit, ant, identity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_groups_validate() {
        for (p, q) in [(0, 1), (1, 0), (1, 1), (2, 2)] {
            let g = translation_group(p, q).unwrap();
            assert!(g.validate().unwrap().passed(), "R{}|{}", p, q);
        }
    }

    #[test]
    fn triangular_validates() {
        let g = triangular_group().unwrap();
        assert!(g.validate().unwrap().passed());
    }

    #[test]
    fn tampered_antipode_fails_on_tau() {
        let chart = Chart::new("T", vec![("t".into(), true)], vec!["tau".into()]).unwrap();
        let t2 = tensor_chart("tmp", &chart, &chart, false).unwrap();
        let t = SuperElement::even_gen(&chart, 0);
        let tau = SuperElement::odd_gen(&chart, 0);
        let cop = vec![
            (
                "t".to_string(),
                t2.embed_left(&t)
                    .unwrap()
                    .checked_mul(&t2.embed_right(&t).unwrap())
                    .unwrap(),
            ),
            (
                "tau".to_string(),
                t2.embed_left(&tau)
                    .unwrap()
                    .checked_mul(&t2.embed_right(&t).unwrap())
                    .unwrap()
                    .checked_add(&t2.embed_right(&tau).unwrap())
                    .unwrap(),
            ),
        ];
        let tinv = t.invert().unwrap();
        // wrong sign on S(tau)
        let ant = vec![
            ("t".to_string(), tinv.clone()),
            ("tau".to_string(), tau.checked_mul(&tinv).unwrap()),
        ];
        let g = HopfGroup::new(
            "T",
            chart.clone(),
            cop,
            vec![Q::one(), Q::zero()],
            ant,
            Point::new(chart, vec![Q::one()]).unwrap(),
        )
        .unwrap();
        let report = g.validate().unwrap();
        assert!(!report.passed());
        let failure = report.first_failure().unwrap();
        assert_eq!(failure.label, "antipode[tau]");
    }

    #[test]
    fn right_invariant_derivations_of_triangular() {
        let g = triangular_group().unwrap();
        let e = g.tangent_basis(0);
        let f = g.tangent_basis(1);
        let re = g.right_invariant(&e).unwrap();
        let rf = g.right_invariant(&f).unwrap();
        // (R*)_E = t d/dt + tau d/dtau, (R*)_F = d/dtau
        let t = SuperElement::even_gen(&g.chart, 0);
        let tau = SuperElement::odd_gen(&g.chart, 0);
        let expected_e = Derivation::d_dx(&g.chart, 0)
            .left_mul(&t)
            .unwrap()
            .add(&Derivation::d_ds(&g.chart, 0).left_mul(&tau).unwrap())
            .unwrap();
        assert_eq!(re, expected_e);
        assert_eq!(rf, Derivation::d_ds(&g.chart, 0));
        // (L*)_E = t d/dt, (L*)_F = t d/dtau
        let le = g.left_invariant(&e).unwrap();
        let lf = g.left_invariant(&f).unwrap();
        assert_eq!(le, Derivation::d_dx(&g.chart, 0).left_mul(&t).unwrap());
        assert_eq!(lf, Derivation::d_ds(&g.chart, 0).left_mul(&t).unwrap());
    }

    #[test]
    fn lie_algebra_of_triangular_toy() {
        let g = triangular_group().unwrap();
        let lsa = g.lie_algebra().unwrap();
        assert!(lsa.validate().passed());
        assert_eq!(lsa.basis[0], ("E".to_string(), Parity::Even));
        assert_eq!(lsa.basis[1], ("F".to_string(), Parity::Odd));
        // [E,F] = -F
        assert_eq!(lsa.constants[0][1][1], -Q::one());
        assert_eq!(lsa.constants[0][1][0], Q::zero());
        assert_eq!(lsa.constants[1][1][0], Q::zero());
        assert_eq!(lsa.constants[1][1][1], Q::zero());
    }

    #[test]
    fn translation_lie_algebras_are_abelian() {
        let g = translation_group(2, 1).unwrap();
        let lsa = g.lie_algebra().unwrap();
        for row in &lsa.constants {
            for col in row {
                for c in col {
                    assert!(c.is_zero());
                }
            }
        }
        // parities match coordinate parities
        assert_eq!(lsa.basis[0].1, Parity::Even);
        assert_eq!(lsa.basis[2].1, Parity::Odd);
    }

    #[test]
    fn adjoint_symbolic_entries_for_triangular() {
        let g = triangular_group().unwrap();
        let m = g.adjoint_symbolic(false).unwrap();
        // Ad_g = [[1, 0], [tau' t'^-1, t'^-1]]
        let tp = SuperElement::even_gen(&g.primed, 0);
        let taup = SuperElement::odd_gen(&g.primed, 0);
        let tpinv = tp.invert().unwrap();
        assert_eq!(m[0][0], SuperElement::one(&g.primed));
        assert_eq!(m[0][1], SuperElement::zero(&g.primed));
        assert_eq!(m[1][0], taup.checked_mul(&tpinv).unwrap());
        assert_eq!(m[1][1], tpinv);
        // inverse element: [[1,0],[-tau', t']]
        let mi = g.adjoint_symbolic(true).unwrap();
        assert_eq!(mi[1][0], taup.neg());
        assert_eq!(mi[1][1], tp);
    }

    #[test]
    fn abelian_adjoint_is_identity() {
        let g = translation_group(1, 1).unwrap();
        let m = g.adjoint_symbolic(false).unwrap();
        assert_eq!(m[0][0], SuperElement::one(&g.primed));
        assert_eq!(m[1][1], SuperElement::one(&g.primed));
        assert!(m[0][1].is_zero());
        assert!(m[1][0].is_zero());
    }

    #[test]
    fn maurer_cartan_of_translation_groups() {
        let g = translation_group(0, 1).unwrap();
        let theta = g.maurer_cartan().unwrap();
        assert_eq!(theta.to_string(), "ds (x) F");
        let g = translation_group(1, 0).unwrap();
        let theta = g.maurer_cartan().unwrap();
        assert_eq!(theta.to_string(), "dx (x) E");
    }

    #[test]
    fn maurer_cartan_of_triangular() {
        let g = triangular_group().unwrap();
        let theta = g.maurer_cartan().unwrap();
        // theta = t^-1 dt (x) E + (dtau - tau t^-1 dt) (x) F
        let t = SuperElement::even_gen(&g.chart, 0);
        let tau = SuperElement::odd_gen(&g.chart, 0);
        let tinv = t.invert().unwrap();
        let expected_e = Form::dx(&g.chart, 0).mul_element_left(&tinv).unwrap();
        let expected_f = Form::ds(&g.chart, 0)
            .add(
                &Form::dx(&g.chart, 0)
                    .mul_element_left(&tau.checked_mul(&tinv).unwrap())
                    .unwrap()
                    .neg(),
            )
            .unwrap();
        assert_eq!(theta.components[0], expected_e);
        assert_eq!(theta.components[1], expected_f);
        // and the defining relation holds
        for j in 0..2 {
            let rj = g.right_invariant(&g.tangent_basis(j)).unwrap();
            let vals = theta.evaluate(&[&rj]).unwrap();
            for (k, v) in vals.iter().enumerate() {
                let expected = if j == k {
                    SuperElement::one(&g.chart)
                } else {
                    SuperElement::zero(&g.chart)
                };
                assert_eq!(*v, expected);
            }
        }
    }

    #[test]
    fn maurer_cartan_flatness_of_triangular() {
        let g = triangular_group().unwrap();
        let theta = g.maurer_cartan().unwrap();
        let f = theta
            .d()
            .unwrap()
            .add(&theta.bracket(&theta).unwrap().scale(&Q::new(1.into(), 2.into())))
            .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn self_action_is_valid_and_induces_right_invariants() {
        let g = Arc::new(triangular_group().unwrap());
        let action = Action::self_action(&g).unwrap();
        assert!(action.check().unwrap().passed());
        let e = g.tangent_basis(0);
        let induced = action.induced_derivation(&e).unwrap();
        assert_eq!(induced, g.right_invariant(&e).unwrap());
    }

    #[test]
    fn trivial_action_flagged_degenerate() {
        // phi*(f) = f (x) 1 satisfies the comodule axioms but has rank 0
        let g = Arc::new(translation_group(0, 1).unwrap());
        let space = Chart::new("X", vec![("x".into(), false)], vec![]).unwrap();
        let split = tensor_chart("XxG", &space, &g.chart, false).unwrap();
        let x = SuperElement::even_gen(&space, 0);
        let images = vec![("x".to_string(), split.embed_left(&x).unwrap())];
        let action = Action::new(space, g, images, Side::Right).unwrap();
        assert!(action.check().unwrap().passed());
        let (_derivs, report) = action.distribution(7).unwrap();
        assert!(!report.passed());
        assert!(report
            .first_failure()
            .unwrap()
            .label
            .starts_with("regularity"));
    }

    #[test]
    fn body_group_of_triangular() {
        let g = triangular_group().unwrap();
        let b = g.body_group().unwrap();
        assert!(b.validate().unwrap().passed());
        assert_eq!(b.dim(), (1, 0));
    }
}
