use std::sync::Arc;

use num::{One, Zero};

use crate::chart::{Chart, Parity, Point};
use crate::element::{Monomial, SuperElement};
use crate::error::{Error, Result};
use crate::morphism::AlgebraMorphism;
use crate::Q;

/// The graded tensor product of two chart algebras, realized as the chart on
/// the disjoint union of the generators. Name clashes on the right factor
/// are resolved by deterministic prime-suffixing. With this realization
/// `embed_left(f) * embed_right(h)` is the element `f (x) h` and the Koszul
/// convention `(f(x)h)(f'(x)h') = (-1)^{|h||f'|} ff' (x) hh'` is exactly the
/// product of the merged algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplit {
    pub chart: Arc<Chart>,
    pub left: Arc<Chart>,
    pub right: Arc<Chart>,
}

fn fresh_name(base: &str, taken: &mut std::collections::HashSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

/// Form the tensor chart. When `right_parameters` is set the adjoined copy
/// carries no coordinate slots: derivations and differentials over the
/// result treat the right-hand generators as constants.
pub fn tensor_chart(
    name: impl Into<String>,
    left: &Arc<Chart>,
    right: &Arc<Chart>,
    right_parameters: bool,
) -> Result<TensorSplit> {
    if right_parameters {
        assert_eq!(left.coord_evens, left.evens.len(), "parameters must be adjoined last");
        assert_eq!(left.coord_odds, left.odds.len(), "parameters must be adjoined last");
    }
    let mut taken: std::collections::HashSet<String> = left.gen_names().collect();
    let mut evens = left.evens.clone();
    let mut odds = left.odds.clone();
    for g in &right.evens {
        evens.push(crate::chart::EvenGen {
            name: fresh_name(&g.name, &mut taken),
            invertible: g.invertible,
        });
    }
    for s in &right.odds {
        odds.push(fresh_name(s, &mut taken));
    }
    let chart = Arc::new(Chart {
        name: name.into(),
        coord_evens: if right_parameters {
            left.coord_evens
        } else {
            evens.len()
        },
        coord_odds: if right_parameters {
            left.coord_odds
        } else {
            odds.len()
        },
        evens,
        odds,
    });
    Ok(TensorSplit {
        chart,
        left: left.clone(),
        right: right.clone(),
    })
}

impl TensorSplit {
    pub fn left_evens(&self) -> usize {
        self.left.evens.len()
    }
    pub fn left_odds(&self) -> usize {
        self.left.odds.len()
    }

    pub fn embed_left(&self, a: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.left, &a.chart)?;
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &a.terms {
            let mut evens = m.evens.clone();
            evens.resize(self.chart.evens.len(), 0);
            out.add_term(
                Monomial {
                    evens,
                    odds: m.odds,
                },
                q.clone(),
            );
        }
        Ok(out)
    }

    pub fn embed_right(&self, a: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.right, &a.chart)?;
        let le = self.left_evens();
        let lo = self.left_odds();
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &a.terms {
            let mut evens = vec![0i64; self.chart.evens.len()];
            for (i, &e) in m.evens.iter().enumerate() {
                evens[le + i] = e;
            }
            out.add_term(
                Monomial {
                    evens,
                    odds: m.odds << lo,
                },
                q.clone(),
            );
        }
        Ok(out)
    }

    /// The tensor element `f (x) h`.
    pub fn tensor(&self, f: &SuperElement, h: &SuperElement) -> Result<SuperElement> {
        self.embed_left(f)?.checked_mul(&self.embed_right(h)?)
    }

    /// Split a monomial of the combined chart into its left and right parts.
    /// Because every left odd index precedes every right odd index, the
    /// ascending product already groups the factors and no sign appears.
    pub fn split_monomial(&self, m: &Monomial) -> (Monomial, Monomial) {
        let le = self.left_evens();
        let lo = self.left_odds();
        let left = Monomial {
            evens: m.evens[..le].to_vec(),
            odds: m.odds & ((1u64 << lo) - 1),
        };
        let right = Monomial {
            evens: m.evens[le..].to_vec(),
            odds: m.odds >> lo,
        };
        (left, right)
    }

    /// Contract the right factor with a rational-valued functional:
    /// `(id (x) a)(f (x) h) = (-1)^{|a||f|} f a(h)`.
    pub fn contract_right(
        &self,
        elem: &SuperElement,
        a: &dyn Functional,
    ) -> Result<SuperElement> {
        Chart::same_chart(&self.chart, &elem.chart)?;
        let mut out = SuperElement::zero(&self.left);
        for (m, q) in &elem.terms {
            let (lm, rm) = self.split_monomial(m);
            let v = a.value_on(&self.right, &rm)?;
            if v.is_zero() {
                continue;
            }
            let sign = if a.parity() == Parity::Odd && lm.parity() == Parity::Odd {
                -Q::one()
            } else {
                Q::one()
            };
            out.add_term(lm, q * v * sign);
        }
        Ok(out)
    }

    /// Contract the left factor: `(a (x) id)(f (x) h) = a(f) h` (the
    /// functional crosses nothing, so no sign).
    pub fn contract_left(
        &self,
        elem: &SuperElement,
        a: &dyn Functional,
    ) -> Result<SuperElement> {
        Chart::same_chart(&self.chart, &elem.chart)?;
        let mut out = SuperElement::zero(&self.right);
        for (m, q) in &elem.terms {
            let (lm, rm) = self.split_monomial(m);
            let v = a.value_on(&self.left, &lm)?;
            if v.is_zero() {
                continue;
            }
            out.add_term(rm, q * v);
        }
        Ok(out)
    }

    /// The multiplication morphism of the algebra with itself: both copies
    /// map to the same generators. Only valid when left == right.
    pub fn multiplication(&self) -> Result<AlgebraMorphism> {
        Chart::same_chart(&self.left, &self.right)?;
        let le = self.left_evens();
        let lo = self.left_odds();
        let even_images = (0..self.chart.evens.len())
            .map(|i| SuperElement::even_gen(&self.left, if i < le { i } else { i - le }))
            .collect();
        let odd_images = (0..self.chart.odds.len())
            .map(|j| SuperElement::odd_gen(&self.left, if j < lo { j } else { j - lo }))
            .collect();
        AlgebraMorphism::new(self.chart.clone(), self.left.clone(), even_images, odd_images)
    }

    /// Lift a morphism on the left factor: `m (x) id`.
    pub fn lift_left(&self, m: &AlgebraMorphism, target: &TensorSplit) -> Result<AlgebraMorphism> {
        Chart::same_chart(&self.left, &m.source)?;
        Chart::same_chart(&target.left, &m.target)?;
        Chart::same_chart(&self.right, &target.right)?;
        let mut even_images = Vec::new();
        for im in &m.even_images {
            even_images.push(target.embed_left(im)?);
        }
        for j in 0..self.right.evens.len() {
            even_images.push(SuperElement::even_gen(
                &target.chart,
                target.left_evens() + j,
            ));
        }
        let mut odd_images = Vec::new();
        for im in &m.odd_images {
            odd_images.push(target.embed_left(im)?);
        }
        for j in 0..self.right.odds.len() {
            odd_images.push(SuperElement::odd_gen(&target.chart, target.left_odds() + j));
        }
        AlgebraMorphism::new(
            self.chart.clone(),
            target.chart.clone(),
            even_images,
            odd_images,
        )
    }

    /// Lift a morphism on the right factor: `id (x) m`.
    pub fn lift_right(&self, m: &AlgebraMorphism, target: &TensorSplit) -> Result<AlgebraMorphism> {
        Chart::same_chart(&self.right, &m.source)?;
        Chart::same_chart(&target.right, &m.target)?;
        Chart::same_chart(&self.left, &target.left)?;
        let mut even_images = Vec::new();
        for i in 0..self.left.evens.len() {
            even_images.push(SuperElement::even_gen(&target.chart, i));
        }
        for im in &m.even_images {
            even_images.push(target.embed_right(im)?);
        }
        let mut odd_images = Vec::new();
        for j in 0..self.left.odds.len() {
            odd_images.push(SuperElement::odd_gen(&target.chart, j));
        }
        for im in &m.odd_images {
            odd_images.push(target.embed_right(im)?);
        }
        AlgebraMorphism::new(
            self.chart.clone(),
            target.chart.clone(),
            even_images,
            odd_images,
        )
    }
}

/// A rational-valued linear functional on a chart algebra, defined on
/// monomials. Group-like functionals (point evaluations) and primitive ones
/// (point derivations) are the two kinds the engine needs.
pub trait Functional {
    fn parity(&self) -> Parity;
    fn value_on(&self, chart: &Arc<Chart>, m: &Monomial) -> Result<Q>;
}

/// Point evaluation `f -> body(f)(p)`; group-like.
pub struct PointEval<'a>(pub &'a Point);

impl Functional for PointEval<'_> {
    fn parity(&self) -> Parity {
        Parity::Even
    }
    fn value_on(&self, chart: &Arc<Chart>, m: &Monomial) -> Result<Q> {
        Chart::same_chart(&self.0.chart, chart)?;
        if m.odds != 0 {
            return Ok(Q::zero());
        }
        let mut v = Q::one();
        for (i, &e) in m.evens.iter().enumerate() {
            if e != 0 {
                v *= crate::element::q_pow(&self.0.even_values[i], e)?;
            }
        }
        Ok(v)
    }
}

/// A point derivation: tangent vector at a point, determined by its values
/// on the generators and the point-Leibniz rule. On a monomial it picks one
/// factor to differentiate and evaluates the rest at the point, which kills
/// every term containing a second odd factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDerivation {
    pub point: Point,
    pub even_coeffs: Vec<Q>,
    pub odd_coeffs: Vec<Q>,
}

impl PointDerivation {
    pub fn new(point: Point, even_coeffs: Vec<Q>, odd_coeffs: Vec<Q>) -> PointDerivation {
        assert_eq!(even_coeffs.len(), point.chart.evens.len());
        assert_eq!(odd_coeffs.len(), point.chart.odds.len());
        PointDerivation {
            point,
            even_coeffs,
            odd_coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even_coeffs.iter().all(|q| q.is_zero()) && self.odd_coeffs.iter().all(|q| q.is_zero())
    }

    /// Homogeneous parity, when only even slots or only odd slots are
    /// populated.
    pub fn homogeneous_parity(&self) -> Option<Parity> {
        let has_even = self.even_coeffs.iter().any(|q| !q.is_zero());
        let has_odd = self.odd_coeffs.iter().any(|q| !q.is_zero());
        match (has_even, has_odd) {
            (true, false) => Some(Parity::Even),
            (false, true) => Some(Parity::Odd),
            (false, false) => Some(Parity::Even),
            (true, true) => None,
        }
    }

    pub fn value_on_monomial(&self, m: &Monomial) -> Result<Q> {
        let p = &self.point;
        let odd_count = m.odds.count_ones();
        if odd_count >= 2 {
            return Ok(Q::zero());
        }
        if odd_count == 1 {
            // v(x^a s_j) = (x^a)(p) v(s_j); the even prefix is even, so no sign
            let j = m.odds.trailing_zeros() as usize;
            let mut v = self.odd_coeffs[j].clone();
            if v.is_zero() {
                return Ok(Q::zero());
            }
            for (i, &e) in m.evens.iter().enumerate() {
                if e != 0 {
                    v *= crate::element::q_pow(&p.even_values[i], e)?;
                }
            }
            return Ok(v);
        }
        // purely even monomial: classical Leibniz with Laurent exponents
        let mut acc = Q::zero();
        for (i, &e) in m.evens.iter().enumerate() {
            if e == 0 || self.even_coeffs[i].is_zero() {
                continue;
            }
            let mut v = self.even_coeffs[i].clone() * Q::from_integer(e.into());
            for (k, &ek) in m.evens.iter().enumerate() {
                let exp = if k == i { ek - 1 } else { ek };
                if exp != 0 {
                    v *= crate::element::q_pow(&p.even_values[k], exp)?;
                }
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// A parity-tagged point derivation usable as a functional; homogeneous by
/// construction.
pub struct PrimitiveFunctional<'a> {
    pub deriv: &'a PointDerivation,
    pub parity: Parity,
}

impl<'a> PrimitiveFunctional<'a> {
    pub fn new(deriv: &'a PointDerivation) -> Result<Self> {
        let parity = deriv
            .homogeneous_parity()
            .ok_or_else(|| Error::MixedParity("point derivation".into()))?;
        Ok(PrimitiveFunctional { deriv, parity })
    }
}

impl Functional for PrimitiveFunctional<'_> {
    fn parity(&self) -> Parity {
        self.parity
    }
    fn value_on(&self, chart: &Arc<Chart>, m: &Monomial) -> Result<Q> {
        Chart::same_chart(&self.deriv.point.chart, chart)?;
        self.deriv.value_on_monomial(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> (Arc<Chart>, Arc<Chart>) {
        let a = Chart::new("A", vec![("x".into(), false)], vec!["s".into()]).unwrap();
        let b = Chart::new("B", vec![("y".into(), false)], vec!["s".into()]).unwrap();
        (a, b)
    }

    #[test]
    fn cross_factor_anticommutation() {
        let (a, b) = pair();
        let t = tensor_chart("A*B", &a, &b, false).unwrap();
        assert_eq!(t.chart.odds, vec!["s".to_string(), "s'".to_string()]);
        let s = t.embed_left(&SuperElement::odd_gen(&a, 0)).unwrap();
        let sp = t.embed_right(&SuperElement::odd_gen(&b, 0)).unwrap();
        let ss = s.checked_mul(&sp).unwrap();
        let ps = sp.checked_mul(&s).unwrap();
        assert_eq!(ss, ps.neg());
    }

    #[test]
    fn even_embeddings_are_central() {
        let (a, b) = pair();
        let t = tensor_chart("A*B", &a, &b, false).unwrap();
        let x = t.embed_left(&SuperElement::even_gen(&a, 0)).unwrap();
        let y = t.embed_right(&SuperElement::even_gen(&b, 0)).unwrap();
        assert_eq!(x.checked_mul(&y).unwrap(), y.checked_mul(&x).unwrap());
    }

    #[test]
    fn tensor_koszul_convention() {
        // (1 (x) s')(s (x) 1) = -(s (x) s')
        let (a, b) = pair();
        let t = tensor_chart("A*B", &a, &b, false).unwrap();
        let one_a = SuperElement::one(&a);
        let one_b = SuperElement::one(&b);
        let s = SuperElement::odd_gen(&a, 0);
        let sp = SuperElement::odd_gen(&b, 0);
        let lhs = t
            .tensor(&one_a, &sp)
            .unwrap()
            .checked_mul(&t.tensor(&s, &one_b).unwrap())
            .unwrap();
        let rhs = t.tensor(&s, &sp).unwrap().neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn contract_right_with_point_derivation_sign() {
        // (id (x) a)(s (x) s') = -s a(s') for odd a
        let (a, b) = pair();
        let t = tensor_chart("A*B", &a, &b, false).unwrap();
        let elem = t
            .tensor(&SuperElement::odd_gen(&a, 0), &SuperElement::odd_gen(&b, 0))
            .unwrap();
        let p = Point::new(b.clone(), vec![Q::zero()]).unwrap();
        let d = PointDerivation::new(p, vec![Q::zero()], vec![Q::one()]);
        let f = PrimitiveFunctional::new(&d).unwrap();
        let out = t.contract_right(&elem, &f).unwrap();
        assert_eq!(out, SuperElement::odd_gen(&a, 0).neg());
    }
}
