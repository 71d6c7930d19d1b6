use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{Signed, Zero};

use crate::chart::{Chart, Parity, Point};
use crate::derivation::Derivation;
use crate::element::SuperElement;
use crate::error::{Error, Result};
use crate::morphism::AlgebraMorphism;
use crate::Q;

/// Generator word of a graded differential form: an ascending set of `dx`
/// factors (bidegree (1,0), anticommuting) and a multiset of `ds` factors
/// (bidegree (1,1), commuting, so powers survive). Canonical order puts all
/// `dx` factors before the `ds` factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormMonomial {
    pub dx: u64,
    pub ds: Vec<u32>,
}

impl FormMonomial {
    pub fn unit(chart: &Chart) -> FormMonomial {
        FormMonomial {
            dx: 0,
            ds: vec![0; chart.coord_odds],
        }
    }

    /// Z-degree: number of generator factors.
    pub fn degree(&self) -> i64 {
        self.dx.count_ones() as i64 + self.ds.iter().map(|&e| e as i64).sum::<i64>()
    }

    /// Parity contributed by the word alone (each ds factor is odd).
    pub fn word_parity(&self) -> Parity {
        Parity::from_usize(self.ds.iter().map(|&e| e as usize).sum())
    }

    fn dx_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |i| self.dx & (1 << i) != 0)
    }
}

impl Ord for FormMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match crate::element::cmp_oddset_lex(self.dx, other.dx) {
            Ordering::Equal => self.ds.cmp(&other.ds),
            ord => ord,
        }
    }
}

impl PartialOrd for FormMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of the bigraded exterior algebra of a chart: a finite sum of
/// generator words with algebra-element coefficients written on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    pub chart: Arc<Chart>,
    pub terms: BTreeMap<FormMonomial, SuperElement>,
}

impl Form {
    pub fn zero(chart: &Arc<Chart>) -> Form {
        Form {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_element(coef: SuperElement) -> Form {
        let chart = coef.chart.clone();
        let mut f = Form::zero(&chart);
        f.add_term(FormMonomial::unit(&chart), coef);
        f
    }

    pub fn one(chart: &Arc<Chart>) -> Form {
        Form::from_element(SuperElement::one(chart))
    }

    /// The coordinate differential `dx_i`.
    pub fn dx(chart: &Arc<Chart>, i: usize) -> Form {
        assert!(i < chart.coord_evens);
        let mut m = FormMonomial::unit(chart);
        m.dx = 1 << i;
        let mut f = Form::zero(chart);
        f.add_term(m, SuperElement::one(chart));
        f
    }

    /// The coordinate differential `ds_j`.
    pub fn ds(chart: &Arc<Chart>, j: usize) -> Form {
        assert!(j < chart.coord_odds);
        let mut m = FormMonomial::unit(chart);
        m.ds[j] = 1;
        let mut f = Form::zero(chart);
        f.add_term(m, SuperElement::one(chart));
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: FormMonomial, coef: SuperElement) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().checked_add(&coef).expect("same chart");
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        Chart::same_chart(&self.chart, &other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        let mut out = Form::zero(&self.chart);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, q: &Q) -> Form {
        if q.is_zero() {
            return Form::zero(&self.chart);
        }
        let mut out = Form::zero(&self.chart);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.scale(q));
        }
        out
    }

    /// Right multiplication by a degree-0 element: `alpha * h`. Evaluation
    /// satisfies `(xi|alpha h) = (xi|alpha) h`.
    pub fn mul_element_right(&self, h: &SuperElement) -> Result<Form> {
        self.wedge(&Form::from_element(h.clone()))
    }

    /// Left multiplication by a degree-0 element.
    pub fn mul_element_left(&self, h: &SuperElement) -> Result<Form> {
        Form::from_element(h.clone()).wedge(self)
    }

    /// The bigraded product. Adjacent homogeneous factors commute up to
    /// `(-1)^{i i' + j j'}`; equal `dx` factors kill the term and `ds`
    /// powers accumulate.
    pub fn wedge(&self, other: &Form) -> Result<Form> {
        Chart::same_chart(&self.chart, &other.chart)?;
        let mut out = Form::zero(&self.chart);
        for (m1, c1) in &self.terms {
            let d1_count: u32 = m1.ds.iter().sum();
            let d1_parity = d1_count % 2 == 1;
            for (m2, c2) in &other.terms {
                if m1.dx & m2.dx != 0 {
                    continue;
                }
                // moving the dx factors of the right word left past the ds
                // factors of the left word: each crossing costs a sign
                let mut sign_word = (d1_count * m2.dx.count_ones()) % 2 == 1;
                // interleaving the dx sets costs the merge inversions
                if crate::element::merge_inversions(m1.dx, m2.dx) % 2 == 1 {
                    sign_word = !sign_word;
                }
                let m = FormMonomial {
                    dx: m1.dx | m2.dx,
                    ds: m1.ds.iter().zip(&m2.ds).map(|(a, b)| a + b).collect(),
                };
                // the left word crosses the right coefficient; only the ds
                // part of the word carries parity
                for parity in [Parity::Even, Parity::Odd] {
                    let c2_part = c2.parity_part(parity);
                    if c2_part.is_zero() {
                        continue;
                    }
                    let mut sign = sign_word;
                    if d1_parity && parity == Parity::Odd {
                        sign = !sign;
                    }
                    let mut coef = c1.checked_mul(&c2_part)?;
                    if sign {
                        coef = coef.neg();
                    }
                    out.add_term(m.clone(), coef);
                }
            }
        }
        Ok(out)
    }

    /// Z-degree when all terms agree.
    pub fn degree(&self) -> Option<i64> {
        let mut deg = None;
        for m in self.terms.keys() {
            match deg {
                None => deg = Some(m.degree()),
                Some(d) if d == m.degree() => {}
                _ => return None,
            }
        }
        deg
    }

    /// Degree of a possibly inhomogeneous form, as the common degree of all
    /// terms; zero form reports 0.
    pub fn degree_or_zero(&self) -> Result<i64> {
        match self.degree() {
            Some(d) => Ok(d),
            None if self.terms.is_empty() => Ok(0),
            None => Err(Error::DegreeMismatch {
                expected: -1,
                found: -1,
            }),
        }
    }

    /// Split into bidegree-homogeneous components keyed by (Z-degree,
    /// parity); coefficients are split by parity as well.
    pub fn bigraded_components(&self) -> BTreeMap<(i64, Parity), Form> {
        let mut out: BTreeMap<(i64, Parity), Form> = BTreeMap::new();
        for (m, c) in &self.terms {
            for parity in [Parity::Even, Parity::Odd] {
                let part = c.parity_part(parity);
                if part.is_zero() {
                    continue;
                }
                let key = (m.degree(), m.word_parity() + parity);
                out.entry(key)
                    .or_insert_with(|| Form::zero(&self.chart))
                    .add_term(m.clone(), part);
            }
        }
        out
    }

    /// The bidegree when homogeneous.
    pub fn bidegree(&self) -> Option<(i64, Parity)> {
        let comps = self.bigraded_components();
        match comps.len() {
            0 => Some((0, Parity::Even)),
            1 => comps.keys().next().copied(),
            _ => None,
        }
    }

    /// Exterior differential: on coefficients it is
    /// `dg = sum dx_i dg/dx_i + sum ds_j dg/ds_j` (left odd partials) and
    /// the generator differentials are closed. Parameter generators are
    /// constants.
    pub fn d(&self) -> Result<Form> {
        let mut out = Form::zero(&self.chart);
        for (m, c) in &self.terms {
            let dc = d_element(c)?;
            let mut word = Form::zero(&self.chart);
            word.add_term(m.clone(), SuperElement::one(&self.chart));
            out = out.add(&dc.wedge(&word)?)?;
        }
        Ok(out)
    }

    /// Interior product with a homogeneous derivation: the unique bigraded
    /// derivation of bidegree (-1, |xi|) with `i(xi) f = 0` on degree 0 and
    /// `i(xi) dg = xi(g)`.
    pub fn interior(&self, xi: &Derivation) -> Result<Form> {
        Chart::same_chart(&self.chart, &xi.chart)?;
        let parity = xi
            .homogeneous_parity()
            .ok_or_else(|| Error::MixedParity(xi.to_string()))?;
        let mut out = Form::zero(&self.chart);
        for (m, c) in &self.terms {
            let k = m.dx.count_ones();
            for c_parity in [Parity::Even, Parity::Odd] {
                let c_part = c.parity_part(c_parity);
                if c_part.is_zero() {
                    continue;
                }
                // the operator crosses the left coefficient
                let base_neg = parity == Parity::Odd && c_parity == Parity::Odd;
                // dx factors: position sign among the dx block
                for (t, i) in m.dx_indices().enumerate() {
                    let v = &xi.even_coeffs[i];
                    if v.is_zero() {
                        continue;
                    }
                    let mut coef = c_part.checked_mul(v)?;
                    if base_neg != (t % 2 == 1) {
                        coef = coef.neg();
                    }
                    let mut m2 = m.clone();
                    m2.dx &= !(1u64 << i);
                    out.add_term(m2, coef);
                }
                // ds factors: every copy contributes with the same sign
                // (-1)^k, k the number of dx factors in front
                for (j, &e) in m.ds.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let v = &xi.odd_coeffs[j];
                    if v.is_zero() {
                        continue;
                    }
                    let mut coef = c_part
                        .checked_mul(v)?
                        .scale(&Q::from_integer(e.into()));
                    if base_neg != (k % 2 == 1) {
                        coef = coef.neg();
                    }
                    let mut m2 = m.clone();
                    m2.ds[j] = e - 1;
                    out.add_term(m2, coef);
                }
            }
        }
        Ok(out)
    }

    /// Interior product extended to mixed-parity derivations by splitting.
    pub fn interior_any(&self, xi: &Derivation) -> Result<Form> {
        match xi.homogeneous_parity() {
            Some(_) => self.interior(xi),
            None => {
                let (even, odd) = xi.parity_parts();
                self.interior(&even)?.add(&self.interior(&odd)?)
            }
        }
    }

    /// Full evaluation of a degree-r form against r homogeneous
    /// derivations, defined by iterating the interior product:
    /// `(xi_1,...,xi_r | alpha) = (-1)^{|xi_1| sum_{i>1} |xi_i|}
    /// (xi_2,...,xi_r | i(xi_1) alpha)`.
    pub fn evaluate(&self, xis: &[&Derivation]) -> Result<SuperElement> {
        if self.is_zero() {
            return Ok(SuperElement::zero(&self.chart));
        }
        let r = self.degree_or_zero()?;
        if r != xis.len() as i64 {
            return Err(Error::DegreeMismatch {
                expected: xis.len() as i64,
                found: r,
            });
        }
        let parities = xis
            .iter()
            .map(|xi| {
                xi.homogeneous_parity()
                    .ok_or_else(|| Error::MixedParity(xi.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.evaluate_inner(xis, &parities)
    }

    fn evaluate_inner(&self, xis: &[&Derivation], parities: &[Parity]) -> Result<SuperElement> {
        if xis.is_empty() {
            let mut out = SuperElement::zero(&self.chart);
            for (m, c) in &self.terms {
                if m.degree() == 0 {
                    out = out.checked_add(c)?;
                }
            }
            return Ok(out);
        }
        let rest_odd = parities[1..]
            .iter()
            .filter(|p| **p == Parity::Odd)
            .count();
        let inner = self.interior(xis[0])?;
        let mut val = inner.evaluate_inner(&xis[1..], &parities[1..])?;
        if parities[0] == Parity::Odd && rest_odd % 2 == 1 {
            val = val.neg();
        }
        Ok(val)
    }

    /// Cartan's formula `L_xi = d i(xi) + i(xi) d`.
    pub fn lie_derivative(&self, xi: &Derivation) -> Result<Form> {
        let a = self.interior(xi)?.d()?;
        let b = self.d()?.interior(xi)?;
        a.add(&b)
    }

    /// Pullback along an algebra morphism: apply the morphism to
    /// coefficients and send each generator differential to the
    /// differential of the generator image; commutes with d.
    pub fn pullback(&self, sigma: &AlgebraMorphism) -> Result<Form> {
        Chart::same_chart(&sigma.source, &self.chart)?;
        let target = sigma.target.clone();
        let mut out = Form::zero(&target);
        for (m, c) in &self.terms {
            let mut acc = Form::from_element(sigma.apply(c)?);
            for i in m.dx_indices() {
                acc = acc.wedge(&d_element(&sigma.even_images[i])?)?;
            }
            for (j, &e) in m.ds.iter().enumerate() {
                if e > 0 {
                    let dimg = d_element(&sigma.odd_images[j])?;
                    for _ in 0..e {
                        acc = acc.wedge(&dimg)?;
                    }
                }
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// The unique 1-form with prescribed values on the coordinate basis:
    /// `(d/dg_w | alpha) = values[w]`.
    pub fn one_form_from_values(
        chart: &Arc<Chart>,
        even_values: &[SuperElement],
        odd_values: &[SuperElement],
    ) -> Result<Form> {
        assert_eq!(even_values.len(), chart.coord_evens);
        assert_eq!(odd_values.len(), chart.coord_odds);
        let mut out = Form::zero(chart);
        for (i, v) in even_values.iter().enumerate() {
            Chart::same_chart(chart, &v.chart)?;
            out = out.add(&Form::dx(chart, i).mul_element_left(v)?)?;
        }
        for (j, v) in odd_values.iter().enumerate() {
            Chart::same_chart(chart, &v.chart)?;
            // (d/ds_j | c ds_j) = (-1)^{|c|} c, so flip odd-parity parts
            let adjusted = v
                .parity_part(Parity::Even)
                .checked_sub(&v.parity_part(Parity::Odd))?;
            out = out.add(&Form::ds(chart, j).mul_element_left(&adjusted)?)?;
        }
        Ok(out)
    }

    /// Restriction to the body: drop `ds` factors and nilpotent coefficient
    /// parts, mapping onto the chart's underlying ordinary forms.
    pub fn body(&self) -> Form {
        let mut out = Form::zero(&self.chart);
        for (m, c) in &self.terms {
            if m.ds.iter().any(|&e| e > 0) {
                continue;
            }
            out.add_term(m.clone(), c.body());
        }
        out
    }

    /// Transport a form to another chart whose coordinate generators extend
    /// this one's (same names first); used to lift base forms to bundles.
    pub fn rename_chart(&self, target: &Arc<Chart>, map: &AlgebraMorphism) -> Result<Form> {
        self.pullback(map).map(|mut f| {
            f.chart = target.clone();
            f
        })
    }

    /// Evaluate a 2-form on a pair (convenience wrapper).
    pub fn evaluate2(&self, a: &Derivation, b: &Derivation) -> Result<SuperElement> {
        self.evaluate(&[a, b])
    }

    /// Value of a degree-r form at a point against tangent vectors is not
    /// needed; body-level checks go through `body()` and `eval`.
    pub fn eval_coeffs_at(&self, p: &Point) -> Result<BTreeMap<FormMonomial, Q>> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = c.eval(p)?;
            if !v.is_zero() {
                out.insert(m.clone(), v);
            }
        }
        Ok(out)
    }
}

/// Differential of a degree-0 element as a 1-form, with the coefficients
/// rewritten on the left: `dg = sum (dg/dx_i) dx_i + sum (-1)^{|dg/ds_j|}
/// (dg/ds_j) ds_j` per homogeneous part.
pub fn d_element(g: &SuperElement) -> Result<Form> {
    let chart = &g.chart;
    let mut even_values = Vec::with_capacity(chart.coord_evens);
    for i in 0..chart.coord_evens {
        even_values.push(g.d_even(i));
    }
    let mut odd_values = Vec::with_capacity(chart.coord_odds);
    for j in 0..chart.coord_odds {
        odd_values.push(g.d_odd(j));
    }
    // one_form_from_values applies exactly the (-1)^{|coef|} adjustment on
    // the odd slots required to satisfy (xi|dg) = xi(g)
    Form::one_form_from_values(chart, &even_values, &odd_values)
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            // fold the sign out of single-monomial coefficients
            let (coef, neg) = if c.terms.len() == 1 {
                let (mono, q) = c.terms.iter().next().unwrap();
                if q.is_negative() {
                    let mut e = SuperElement::zero(&self.chart);
                    e.add_term(mono.clone(), -q.clone());
                    (e, true)
                } else {
                    (c.clone(), false)
                }
            } else {
                (c.clone(), false)
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let has_factors = m.degree() > 0;
            let coef_str = coef.to_string();
            let coef_is_one = coef_str == "1";
            let mut wrote_block = false;
            if !coef_is_one || !has_factors {
                if coef.terms.len() > 1 {
                    write!(f, "({})", coef_str)?;
                } else {
                    write!(f, "{}", coef_str)?;
                }
                wrote_block = true;
            }
            if m.dx != 0 {
                if wrote_block {
                    write!(f, "*")?;
                }
                wrote_block = true;
                let mut first_dx = true;
                for i in m.dx_indices() {
                    if !first_dx {
                        write!(f, "^")?;
                    }
                    first_dx = false;
                    write!(f, "d{}", self.chart.evens[i].name)?;
                }
            }
            for (j, &e) in m.ds.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote_block {
                    write!(f, "*")?;
                }
                wrote_block = true;
                write!(f, "d{}", self.chart.odds[j])?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Arc<Chart> {
        Chart::new(
            "C",
            vec![("x1".into(), false), ("x2".into(), false)],
            vec!["s1".into(), "s2".into()],
        )
        .unwrap()
    }

    #[test]
    fn dx_factors_anticommute() {
        let c = chart();
        let a = Form::dx(&c, 0).wedge(&Form::dx(&c, 1)).unwrap();
        let b = Form::dx(&c, 1).wedge(&Form::dx(&c, 0)).unwrap();
        assert_eq!(a, b.neg());
        assert!(Form::dx(&c, 0).wedge(&Form::dx(&c, 0)).unwrap().is_zero());
    }

    #[test]
    fn ds_factors_commute_and_square() {
        let c = chart();
        let a = Form::ds(&c, 0).wedge(&Form::ds(&c, 1)).unwrap();
        let b = Form::ds(&c, 1).wedge(&Form::ds(&c, 0)).unwrap();
        assert_eq!(a, b);
        assert!(!Form::ds(&c, 0).wedge(&Form::ds(&c, 0)).unwrap().is_zero());
    }

    #[test]
    fn bigraded_commutation_with_odd_coefficient() {
        // (s1 dx1) ds1 = + ds1 (s1 dx1): both factors have bidegree (1,1)
        let c = chart();
        let s1 = SuperElement::odd_gen(&c, 0);
        let a = Form::dx(&c, 0).mul_element_left(&s1).unwrap();
        let b = Form::ds(&c, 0);
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        assert_eq!(a.bidegree(), Some((1, Parity::Odd)));
    }

    #[test]
    fn differential_of_product_term() {
        // d(x1 s1) = s1 dx1 + x1 ds1
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let g = x.checked_mul(&s1).unwrap();
        let expected = Form::dx(&c, 0)
            .mul_element_left(&s1)
            .unwrap()
            .add(&Form::ds(&c, 0).mul_element_left(&x).unwrap())
            .unwrap();
        assert_eq!(d_element(&g).unwrap(), expected);
    }

    #[test]
    fn d_squared_vanishes() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let g = x
            .checked_mul(&s1)
            .unwrap()
            .checked_mul(&s2)
            .unwrap();
        assert!(d_element(&g).unwrap().d().unwrap().is_zero());
        assert!(d_element(&SuperElement::from_int(&c, 5)).unwrap().is_zero());
    }

    #[test]
    fn pairing_with_differential_recovers_application() {
        let c = chart();
        let xi = Derivation::d_ds(&c, 0)
            .left_mul(&SuperElement::even_gen(&c, 1))
            .unwrap()
            .add(
                &Derivation::d_dx(&c, 0)
                    .left_mul(&SuperElement::odd_gen(&c, 1))
                    .unwrap(),
            )
            .unwrap();
        let g = SuperElement::even_gen(&c, 0)
            .checked_mul(&SuperElement::odd_gen(&c, 0))
            .unwrap()
            .checked_add(&SuperElement::odd_gen(&c, 1))
            .unwrap();
        let dg = d_element(&g).unwrap();
        assert_eq!(dg.evaluate(&[&xi]).unwrap(), xi.apply(&g).unwrap());
    }

    #[test]
    fn interior_basics() {
        let c = chart();
        assert_eq!(
            Form::ds(&c, 0).interior(&Derivation::d_ds(&c, 0)).unwrap(),
            Form::one(&c)
        );
        assert!(Form::dx(&c, 1)
            .interior(&Derivation::d_dx(&c, 0))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn interior_on_ds_square() {
        let c = chart();
        let ds1sq = Form::ds(&c, 0).wedge(&Form::ds(&c, 0)).unwrap();
        let i = ds1sq.interior(&Derivation::d_ds(&c, 0)).unwrap();
        assert_eq!(i, Form::ds(&c, 0).scale(&Q::from_integer(2.into())));
    }

    #[test]
    fn classical_pairing() {
        let c = chart();
        let a = Form::dx(&c, 0).wedge(&Form::dx(&c, 1)).unwrap();
        let v = a
            .evaluate(&[&Derivation::d_dx(&c, 0), &Derivation::d_dx(&c, 1)])
            .unwrap();
        assert_eq!(v, SuperElement::one(&c));
    }

    #[test]
    fn odd_slots_symmetrize() {
        // (d/ds1, d/ds1 | ds1 ds1) = -2, the expansion of the two-factor
        // product formula
        let c = chart();
        let ds1sq = Form::ds(&c, 0).wedge(&Form::ds(&c, 0)).unwrap();
        let d = Derivation::d_ds(&c, 0);
        assert_eq!(
            ds1sq.evaluate(&[&d, &d]).unwrap(),
            SuperElement::from_int(&c, -2)
        );
    }

    #[test]
    fn lie_derivative_classical_case() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let xdx = Form::dx(&c, 0).mul_element_left(&x).unwrap();
        let l = xdx.lie_derivative(&Derivation::d_dx(&c, 0)).unwrap();
        assert_eq!(l, Form::dx(&c, 0));
    }

    #[test]
    fn lie_derivative_on_functions_is_application() {
        let c = chart();
        let xi = Derivation::d_ds(&c, 1)
            .left_mul(&SuperElement::even_gen(&c, 0))
            .unwrap();
        let g = SuperElement::odd_gen(&c, 1)
            .checked_mul(&SuperElement::even_gen(&c, 0))
            .unwrap();
        let lg = Form::from_element(g.clone()).lie_derivative(&xi).unwrap();
        assert_eq!(lg, Form::from_element(xi.apply(&g).unwrap()));
    }

    #[test]
    fn pullback_commutes_with_d() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let sigma = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("x1".into(), x.checked_mul(&x).unwrap())],
        )
        .unwrap();
        // sigma*(dx1) = 2 x1 dx1
        let pulled = Form::dx(&c, 0).pullback(&sigma).unwrap();
        let expected = Form::dx(&c, 0)
            .mul_element_left(&x.scale(&Q::from_integer(2.into())))
            .unwrap();
        assert_eq!(pulled, expected);
        // d o sigma* = sigma* o d on a sample
        let g = x
            .checked_mul(&SuperElement::odd_gen(&c, 0))
            .unwrap()
            .checked_mul(&SuperElement::odd_gen(&c, 1))
            .unwrap();
        let lhs = d_element(&sigma.apply(&g).unwrap()).unwrap();
        let rhs = d_element(&g).unwrap().pullback(&sigma).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_of_odd_differential() {
        // s1 -> x1 s2 (odd image): pulls ds1 back to d(x1 s2)
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let image = x.checked_mul(&s2).unwrap();
        let sigma =
            AlgebraMorphism::from_images(&c, &c, &[("s1".into(), image.clone())]).unwrap();
        assert_eq!(
            Form::ds(&c, 0).pullback(&sigma).unwrap(),
            d_element(&image).unwrap()
        );
    }

    #[test]
    fn one_form_from_values_round_trip() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let vals_even = vec![
            x.checked_add(&s1.checked_mul(&SuperElement::odd_gen(&c, 1)).unwrap())
                .unwrap(),
            SuperElement::zero(&c),
        ];
        let vals_odd = vec![s1.clone(), x.checked_mul(&s1).unwrap()];
        let alpha = Form::one_form_from_values(&c, &vals_even, &vals_odd).unwrap();
        assert_eq!(
            alpha.evaluate(&[&Derivation::d_dx(&c, 0)]).unwrap(),
            vals_even[0]
        );
        assert_eq!(
            alpha.evaluate(&[&Derivation::d_ds(&c, 0)]).unwrap(),
            vals_odd[0]
        );
        assert_eq!(
            alpha.evaluate(&[&Derivation::d_ds(&c, 1)]).unwrap(),
            vals_odd[1]
        );
    }

    #[test]
    fn rendering() {
        let c = chart();
        let s1 = SuperElement::odd_gen(&c, 0);
        let a = Form::dx(&c, 0)
            .wedge(&Form::dx(&c, 1))
            .unwrap()
            .scale(&Q::new(3.into(), 2.into()))
            .add(
                &Form::ds(&c, 0)
                    .wedge(&Form::ds(&c, 0))
                    .unwrap()
                    .mul_element_left(&s1.neg())
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(a.to_string(), "-s1*ds1^2 + 3/2*dx1^dx2");
    }
}
