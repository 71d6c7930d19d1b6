use std::fmt;
use std::sync::Arc;

use num::Zero;

use crate::chart::{Chart, Parity, ParityClass, Point};
use crate::element::SuperElement;
use crate::error::{Error, Result};
use crate::morphism::AlgebraMorphism;
use crate::tensor::PointDerivation;
use crate::Q;

/// A superderivation of the chart algebra, stored as its coefficients over
/// the coordinate basis: `xi = sum_i c_i d/dx_i + sum_j c_j d/ds_j` with the
/// coefficients acting from the left (free left module).
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub chart: Arc<Chart>,
    pub even_coeffs: Vec<SuperElement>,
    pub odd_coeffs: Vec<SuperElement>,
}

impl Derivation {
    pub fn zero(chart: &Arc<Chart>) -> Derivation {
        Derivation {
            chart: chart.clone(),
            even_coeffs: vec![SuperElement::zero(chart); chart.coord_evens],
            odd_coeffs: vec![SuperElement::zero(chart); chart.coord_odds],
        }
    }

    pub fn new(
        chart: &Arc<Chart>,
        even_coeffs: Vec<SuperElement>,
        odd_coeffs: Vec<SuperElement>,
    ) -> Result<Derivation> {
        assert_eq!(even_coeffs.len(), chart.coord_evens);
        assert_eq!(odd_coeffs.len(), chart.coord_odds);
        for c in even_coeffs.iter().chain(odd_coeffs.iter()) {
            Chart::same_chart(chart, &c.chart)?;
        }
        Ok(Derivation {
            chart: chart.clone(),
            even_coeffs,
            odd_coeffs,
        })
    }

    /// The coordinate basis derivation `d/dx_i`.
    pub fn d_dx(chart: &Arc<Chart>, i: usize) -> Derivation {
        let mut d = Derivation::zero(chart);
        d.even_coeffs[i] = SuperElement::one(chart);
        d
    }

    /// The coordinate basis derivation `d/ds_j`.
    pub fn d_ds(chart: &Arc<Chart>, j: usize) -> Derivation {
        let mut d = Derivation::zero(chart);
        d.odd_coeffs[j] = SuperElement::one(chart);
        d
    }

    pub fn is_zero(&self) -> bool {
        self.even_coeffs.iter().all(|c| c.is_zero()) && self.odd_coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        Chart::same_chart(&self.chart, &other.chart)?;
        let even_coeffs = self
            .even_coeffs
            .iter()
            .zip(&other.even_coeffs)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        let odd_coeffs = self
            .odd_coeffs
            .iter()
            .zip(&other.odd_coeffs)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        Ok(Derivation {
            chart: self.chart.clone(),
            even_coeffs,
            odd_coeffs,
        })
    }

    pub fn sub(&self, other: &Derivation) -> Result<Derivation> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Derivation {
        Derivation {
            chart: self.chart.clone(),
            even_coeffs: self.even_coeffs.iter().map(|c| c.neg()).collect(),
            odd_coeffs: self.odd_coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Left multiplication by an algebra element.
    pub fn left_mul(&self, f: &SuperElement) -> Result<Derivation> {
        Chart::same_chart(&self.chart, &f.chart)?;
        let even_coeffs = self
            .even_coeffs
            .iter()
            .map(|c| f.checked_mul(c))
            .collect::<Result<_>>()?;
        let odd_coeffs = self
            .odd_coeffs
            .iter()
            .map(|c| f.checked_mul(c))
            .collect::<Result<_>>()?;
        Ok(Derivation {
            chart: self.chart.clone(),
            even_coeffs,
            odd_coeffs,
        })
    }

    /// Parity classification. The basis slot `d/dx_i` is even and `d/ds_j`
    /// odd, so a homogeneous derivation of parity p has even-slot
    /// coefficients of parity p and odd-slot coefficients of parity p+1.
    pub fn parity_class(&self) -> ParityClass {
        let mut seen: Option<Parity> = None;
        let mut feed = |p: Parity| -> bool {
            match seen {
                None => {
                    seen = Some(p);
                    true
                }
                Some(q) => q == p,
            }
        };
        for c in &self.even_coeffs {
            match c.parity_class() {
                ParityClass::Mixed => return ParityClass::Mixed,
                ParityClass::Even if c.is_zero() => {}
                ParityClass::Even => {
                    if !feed(Parity::Even) {
                        return ParityClass::Mixed;
                    }
                }
                ParityClass::Odd => {
                    if !feed(Parity::Odd) {
                        return ParityClass::Mixed;
                    }
                }
            }
        }
        for c in &self.odd_coeffs {
            match c.parity_class() {
                ParityClass::Mixed => return ParityClass::Mixed,
                ParityClass::Even if c.is_zero() => {}
                ParityClass::Even => {
                    if !feed(Parity::Odd) {
                        return ParityClass::Mixed;
                    }
                }
                ParityClass::Odd => {
                    if !feed(Parity::Even) {
                        return ParityClass::Mixed;
                    }
                }
            }
        }
        match seen {
            None | Some(Parity::Even) => ParityClass::Even,
            Some(Parity::Odd) => ParityClass::Odd,
        }
    }

    pub fn homogeneous_parity(&self) -> Option<Parity> {
        match self.parity_class() {
            ParityClass::Even => Some(Parity::Even),
            ParityClass::Odd => Some(Parity::Odd),
            ParityClass::Mixed => None,
        }
    }

    /// Split into (even part, odd part).
    pub fn parity_parts(&self) -> (Derivation, Derivation) {
        let mut even = Derivation::zero(&self.chart);
        let mut odd = Derivation::zero(&self.chart);
        for (i, c) in self.even_coeffs.iter().enumerate() {
            even.even_coeffs[i] = c.parity_part(Parity::Even);
            odd.even_coeffs[i] = c.parity_part(Parity::Odd);
        }
        for (j, c) in self.odd_coeffs.iter().enumerate() {
            even.odd_coeffs[j] = c.parity_part(Parity::Odd);
            odd.odd_coeffs[j] = c.parity_part(Parity::Even);
        }
        (even, odd)
    }

    /// Apply to an algebra element via the sign-tracked Leibniz rule: even
    /// slots act as ordinary (Laurent) partials, odd slots as left odd
    /// partials, and coefficients multiply from the left.
    pub fn apply(&self, f: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.chart, &f.chart)?;
        let mut out = SuperElement::zero(&self.chart);
        for (i, c) in self.even_coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.checked_add(&c.checked_mul(&f.d_even(i))?)?;
            }
        }
        for (j, c) in self.odd_coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.checked_add(&c.checked_mul(&f.d_odd(j))?)?;
            }
        }
        Ok(out)
    }

    /// Values on the coordinate generators, reading off the coefficients.
    pub fn value_on_gen(&self, name: &str) -> Result<SuperElement> {
        if let Some(i) = self.chart.even_index(name) {
            if i < self.chart.coord_evens {
                return Ok(self.even_coeffs[i].clone());
            }
        }
        if let Some(j) = self.chart.odd_index(name) {
            if j < self.chart.coord_odds {
                return Ok(self.odd_coeffs[j].clone());
            }
        }
        Err(Error::UnknownGenerator(name.to_string()))
    }

    /// Super-commutator `[xi, eta] = xi o eta - (-1)^{|xi||eta|} eta o xi`,
    /// read back in coordinate-basis form by evaluating on the generators.
    /// Mixed-parity inputs are split by parity and recombined linearly.
    pub fn bracket(&self, other: &Derivation) -> Result<Derivation> {
        Chart::same_chart(&self.chart, &other.chart)?;
        match (self.homogeneous_parity(), other.homogeneous_parity()) {
            (Some(p), Some(q)) => self.bracket_homogeneous(other, p, q),
            _ => {
                let (ae, ao) = self.parity_parts();
                let (be, bo) = other.parity_parts();
                let mut acc = Derivation::zero(&self.chart);
                for (a, pa) in [(&ae, Parity::Even), (&ao, Parity::Odd)] {
                    for (b, pb) in [(&be, Parity::Even), (&bo, Parity::Odd)] {
                        if !a.is_zero() && !b.is_zero() {
                            acc = acc.add(&a.bracket_homogeneous(b, pa, pb)?)?;
                        }
                    }
                }
                Ok(acc)
            }
        }
    }

    fn bracket_homogeneous(&self, other: &Derivation, p: Parity, q: Parity) -> Result<Derivation> {
        let sign = p == Parity::Odd && q == Parity::Odd;
        let mut even_coeffs = Vec::with_capacity(self.chart.coord_evens);
        let mut odd_coeffs = Vec::with_capacity(self.chart.coord_odds);
        for i in 0..self.chart.coord_evens {
            let g = SuperElement::even_gen(&self.chart, i);
            let a = self.apply(&other.apply(&g)?)?;
            let b = other.apply(&self.apply(&g)?)?;
            even_coeffs.push(if sign {
                a.checked_add(&b)?
            } else {
                a.checked_sub(&b)?
            });
        }
        for j in 0..self.chart.coord_odds {
            let g = SuperElement::odd_gen(&self.chart, j);
            let a = self.apply(&other.apply(&g)?)?;
            let b = other.apply(&self.apply(&g)?)?;
            odd_coeffs.push(if sign {
                a.checked_add(&b)?
            } else {
                a.checked_sub(&b)?
            });
        }
        Derivation::new(&self.chart, even_coeffs, odd_coeffs)
    }

    /// The tangent vector at a point: evaluate every coefficient.
    pub fn tangent_at(&self, p: &Point) -> Result<PointDerivation> {
        Chart::same_chart(&self.chart, &p.chart)?;
        let mut even = Vec::with_capacity(p.chart.evens.len());
        for i in 0..p.chart.evens.len() {
            if i < self.chart.coord_evens {
                even.push(self.even_coeffs[i].eval(p)?);
            } else {
                even.push(Q::zero());
            }
        }
        let mut odd = Vec::with_capacity(p.chart.odds.len());
        for j in 0..p.chart.odds.len() {
            if j < self.chart.coord_odds {
                odd.push(self.odd_coeffs[j].eval(p)?);
            } else {
                odd.push(Q::zero());
            }
        }
        Ok(PointDerivation::new(p.clone(), even, odd))
    }

    /// Push-forward along an isomorphism: `(sigma*)^{-1} o xi o sigma*`,
    /// returned in basis form. The supplied inverse is verified on the
    /// generators of both charts first.
    pub fn pushforward(
        &self,
        sigma: &AlgebraMorphism,
        sigma_inv: &AlgebraMorphism,
    ) -> Result<Derivation> {
        // sigma*: B(N) -> A(M) with xi over A(M); the push-forward lives on N.
        Chart::same_chart(&sigma.target, &self.chart)?;
        sigma.check_inverse(sigma_inv)?;
        let target = sigma.source.clone();
        let mut even_coeffs = Vec::new();
        for i in 0..target.coord_evens {
            let g = SuperElement::even_gen(&target, i);
            even_coeffs.push(sigma_inv.apply(&self.apply(&sigma.apply(&g)?)?)?);
        }
        let mut odd_coeffs = Vec::new();
        for j in 0..target.coord_odds {
            let g = SuperElement::odd_gen(&target, j);
            odd_coeffs.push(sigma_inv.apply(&self.apply(&sigma.apply(&g)?)?)?);
        }
        Derivation::new(&target, even_coeffs, odd_coeffs)
    }

    /// Whether `self` (over sigma's target algebra) and `eta` (over its
    /// source) are sigma-related: `sigma*(eta f) = xi(sigma* f)`. Both sides
    /// are sigma*-twisted derivations, so checking on the generators
    /// suffices.
    pub fn is_related(&self, sigma: &AlgebraMorphism, eta: &Derivation) -> Result<bool> {
        Chart::same_chart(&sigma.target, &self.chart)?;
        Chart::same_chart(&sigma.source, &eta.chart)?;
        for name in sigma.source.gen_names() {
            let g = SuperElement::gen_by_name(&sigma.source, &name)?;
            let lhs = sigma.apply(&eta.apply(&g)?)?;
            let rhs = self.apply(&sigma.apply(&g)?)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Vertical with respect to a projection: related to the zero
    /// derivation, i.e. kills every pulled-back generator.
    pub fn is_vertical(&self, sigma: &AlgebraMorphism) -> Result<bool> {
        self.is_related(sigma, &Derivation::zero(&sigma.source))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        let write_slot = |f: &mut fmt::Formatter<'_>,
                              coeff: &SuperElement,
                              slot: &str,
                              wrote: &mut bool|
         -> fmt::Result {
            if coeff.is_zero() {
                return Ok(());
            }
            if *wrote {
                write!(f, " + ")?;
            }
            *wrote = true;
            if coeff.terms.len() == 1 {
                write!(f, "{}*d/d{}", coeff, slot)
            } else {
                write!(f, "({})*d/d{}", coeff, slot)
            }
        };
        for (i, c) in self.even_coeffs.iter().enumerate() {
            write_slot(f, c, &self.chart.evens[i].name.clone(), &mut wrote)?;
        }
        for (j, c) in self.odd_coeffs.iter().enumerate() {
            write_slot(f, c, &self.chart.odds[j].clone(), &mut wrote)?;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn chart() -> Arc<Chart> {
        Chart::new(
            "C",
            vec![("x".into(), false)],
            vec!["s1".into(), "s2".into()],
        )
        .unwrap()
    }

    #[test]
    fn even_partial_is_classical() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let x2 = x.checked_mul(&x).unwrap();
        let d = Derivation::d_dx(&c, 0);
        assert_eq!(d.apply(&x2).unwrap(), x.scale(&Q::from_integer(2.into())));
    }

    #[test]
    fn left_odd_partial_position_signs() {
        let c = chart();
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let s1s2 = s1.checked_mul(&s2).unwrap();
        assert_eq!(Derivation::d_ds(&c, 0).apply(&s1s2).unwrap(), s2);
        assert_eq!(Derivation::d_ds(&c, 1).apply(&s1s2).unwrap(), s1.neg());
    }

    #[test]
    fn bracket_classical_case() {
        // [d/dx, x d/dx] = d/dx
        let c = chart();
        let ddx = Derivation::d_dx(&c, 0);
        let x_ddx = ddx.left_mul(&SuperElement::even_gen(&c, 0)).unwrap();
        assert_eq!(ddx.bracket(&x_ddx).unwrap(), ddx);
    }

    #[test]
    fn bracket_odd_odd_anticommutator() {
        // [d/ds1, s1 d/dx] = d/dx
        let c = chart();
        let ds1 = Derivation::d_ds(&c, 0);
        let s1_ddx = Derivation::d_dx(&c, 0)
            .left_mul(&SuperElement::odd_gen(&c, 0))
            .unwrap();
        assert_eq!(ds1.bracket(&s1_ddx).unwrap(), Derivation::d_dx(&c, 0));
    }

    #[test]
    fn odd_partial_squares_to_zero() {
        let c = chart();
        let ds1 = Derivation::d_ds(&c, 0);
        assert!(ds1.bracket(&ds1).unwrap().is_zero());
    }

    #[test]
    fn tangent_at_evaluates_coefficients() {
        let c = chart();
        let p = Point::new(c.clone(), vec![Q::from_integer(3.into())]).unwrap();
        let x_ddx = Derivation::d_dx(&c, 0)
            .left_mul(&SuperElement::even_gen(&c, 0))
            .unwrap();
        let t = x_ddx.tangent_at(&p).unwrap();
        assert_eq!(t.even_coeffs, vec![Q::from_integer(3.into())]);
        // odd coefficient has zero body
        let s1_ddx = Derivation::d_dx(&c, 0)
            .left_mul(&SuperElement::odd_gen(&c, 0))
            .unwrap();
        assert!(s1_ddx.tangent_at(&p).unwrap().is_zero());
        // constant odd slot
        let t = Derivation::d_ds(&c, 0).tangent_at(&p).unwrap();
        assert_eq!(t.odd_coeffs[0], Q::one());
    }

    #[test]
    fn tangent_matches_evaluation_of_application() {
        let c = chart();
        let p = Point::new(c.clone(), vec![Q::from_integer(2.into())]).unwrap();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let xi = Derivation::d_dx(&c, 0)
            .left_mul(&x.checked_mul(&x).unwrap())
            .unwrap()
            .add(&Derivation::d_ds(&c, 0).left_mul(&x).unwrap())
            .unwrap();
        let f = x
            .checked_mul(&s1)
            .unwrap()
            .checked_add(&x.checked_mul(&x).unwrap())
            .unwrap();
        let lhs = {
            let t = xi.tangent_at(&p).unwrap();
            let mut acc = Q::zero();
            for (m, q) in &f.terms {
                acc += q * t.value_on_monomial(m).unwrap();
            }
            acc
        };
        let rhs = xi.apply(&f).unwrap().eval(&p).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_chain_rule() {
        // sigma*: x -> 2x. The push-forward of d/dx is 2 d/dx and the
        // pull-back (push-forward along the inverse) is (1/2) d/dx; the
        // relatedness check certifies the pairing.
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let sigma = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("x".into(), x.scale(&Q::from_integer(2.into())))],
        )
        .unwrap();
        let sigma_inv = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("x".into(), x.scale(&Q::new(1.into(), 2.into())))],
        )
        .unwrap();
        let ddx = Derivation::d_dx(&c, 0);
        let push = ddx.pushforward(&sigma, &sigma_inv).unwrap();
        let double = Derivation::d_dx(&c, 0)
            .left_mul(&SuperElement::from_int(&c, 2))
            .unwrap();
        assert_eq!(push, double);
        assert!(ddx.is_related(&sigma, &push).unwrap());
        let pull = ddx.pushforward(&sigma_inv, &sigma).unwrap();
        let half = Derivation::d_dx(&c, 0)
            .left_mul(&SuperElement::from_rational(&c, Q::new(1.into(), 2.into())))
            .unwrap();
        assert_eq!(pull, half);
        assert!(pull.is_related(&sigma, &ddx).unwrap());
    }

    #[test]
    fn identity_pushforward_is_identity() {
        let c = chart();
        let id = AlgebraMorphism::identity(&c);
        let xi = Derivation::d_ds(&c, 1)
            .left_mul(&SuperElement::even_gen(&c, 0))
            .unwrap();
        assert_eq!(xi.pushforward(&id, &id).unwrap(), xi);
    }

    #[test]
    fn graded_leibniz_rule() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        // odd derivation xi = x d/ds1 + s2 d/dx
        let xi = Derivation::d_ds(&c, 0)
            .left_mul(&x)
            .unwrap()
            .add(&Derivation::d_dx(&c, 0).left_mul(&s2).unwrap())
            .unwrap();
        assert_eq!(xi.homogeneous_parity(), Some(Parity::Odd));
        let f = s1.checked_mul(&x).unwrap(); // odd
        let g = s2.checked_add(&s1).unwrap(); // odd
        let lhs = xi.apply(&f.checked_mul(&g).unwrap()).unwrap();
        // sign (-1)^{|xi||f|} = -1
        let rhs = xi
            .apply(&f)
            .unwrap()
            .checked_mul(&g)
            .unwrap()
            .checked_sub(&f.checked_mul(&xi.apply(&g).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
