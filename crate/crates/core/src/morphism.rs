use std::fmt;
use std::sync::Arc;

use crate::chart::{Chart, ParityClass};
use crate::element::{Monomial, SuperElement};
use crate::error::{Error, Result};

/// A morphism of graded commutative algebras, given by the images of the
/// source generators inside the target algebra. Images must preserve parity
/// and invertible generators must map to units.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraMorphism {
    pub source: Arc<Chart>,
    pub target: Arc<Chart>,
    pub even_images: Vec<SuperElement>,
    pub odd_images: Vec<SuperElement>,
}

impl AlgebraMorphism {
    pub fn new(
        source: Arc<Chart>,
        target: Arc<Chart>,
        even_images: Vec<SuperElement>,
        odd_images: Vec<SuperElement>,
    ) -> Result<AlgebraMorphism> {
        assert_eq!(even_images.len(), source.evens.len());
        assert_eq!(odd_images.len(), source.odds.len());
        for (g, im) in source.evens.iter().zip(&even_images) {
            Chart::same_chart(&target, &im.chart)?;
            if im.parity_class() == ParityClass::Odd || im.parity_class() == ParityClass::Mixed {
                return Err(Error::ParityMismatch(format!(
                    "image of even generator `{}` is not even",
                    g.name
                )));
            }
            if g.invertible && !im.is_unit() {
                return Err(Error::NotAUnit(format!(
                    "image of invertible generator `{}`: {}",
                    g.name, im
                )));
            }
        }
        for (name, im) in source.odds.iter().zip(&odd_images) {
            Chart::same_chart(&target, &im.chart)?;
            match im.parity_class() {
                ParityClass::Odd => {}
                ParityClass::Even if im.is_zero() => {}
                _ => {
                    return Err(Error::ParityMismatch(format!(
                        "image of odd generator `{}` is not odd",
                        name
                    )))
                }
            }
        }
        Ok(AlgebraMorphism {
            source,
            target,
            even_images,
            odd_images,
        })
    }

    pub fn identity(chart: &Arc<Chart>) -> AlgebraMorphism {
        let even_images = (0..chart.evens.len())
            .map(|i| SuperElement::even_gen(chart, i))
            .collect();
        let odd_images = (0..chart.odds.len())
            .map(|j| SuperElement::odd_gen(chart, j))
            .collect();
        AlgebraMorphism {
            source: chart.clone(),
            target: chart.clone(),
            even_images,
            odd_images,
        }
    }

    /// Build a morphism from generator-name/image pairs; any generator not
    /// listed maps to its namesake in the target (which must then exist).
    pub fn from_images(
        source: &Arc<Chart>,
        target: &Arc<Chart>,
        images: &[(String, SuperElement)],
    ) -> Result<AlgebraMorphism> {
        let find = |name: &str| -> Option<SuperElement> {
            images
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, e)| e.clone())
        };
        let mut even_images = Vec::new();
        for g in &source.evens {
            match find(&g.name) {
                Some(e) => even_images.push(e),
                None => even_images.push(SuperElement::gen_by_name(target, &g.name)?),
            }
        }
        let mut odd_images = Vec::new();
        for name in &source.odds {
            match find(name) {
                Some(e) => odd_images.push(e),
                None => odd_images.push(SuperElement::gen_by_name(target, name)?),
            }
        }
        AlgebraMorphism::new(source.clone(), target.clone(), even_images, odd_images)
    }

    /// Extend the generator images multiplicatively over a whole element;
    /// all Koszul signs come out of the target multiplication.
    pub fn apply(&self, a: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.source, &a.chart)?;
        let mut out = SuperElement::zero(&self.target);
        for (m, q) in &a.terms {
            let img = self.apply_monomial(m)?;
            out = out.checked_add(&img.scale(q))?;
        }
        Ok(out)
    }

    fn apply_monomial(&self, m: &Monomial) -> Result<SuperElement> {
        let mut acc = SuperElement::one(&self.target);
        for (i, &e) in m.evens.iter().enumerate() {
            if e != 0 {
                acc = acc.checked_mul(&self.even_images[i].pow(e)?)?;
            }
        }
        for j in 0..self.source.odds.len() {
            if m.odds & (1 << j) != 0 {
                acc = acc.checked_mul(&self.odd_images[j])?;
            }
        }
        Ok(acc)
    }

    /// Composition: first `self`, then `after` (so the result maps
    /// `self.source` to `after.target`).
    pub fn then(&self, after: &AlgebraMorphism) -> Result<AlgebraMorphism> {
        Chart::same_chart(&self.target, &after.source)?;
        let even_images = self
            .even_images
            .iter()
            .map(|im| after.apply(im))
            .collect::<Result<Vec<_>>>()?;
        let odd_images = self
            .odd_images
            .iter()
            .map(|im| after.apply(im))
            .collect::<Result<Vec<_>>>()?;
        AlgebraMorphism::new(
            self.source.clone(),
            after.target.clone(),
            even_images,
            odd_images,
        )
    }

    /// Generator-wise equality; two algebra morphisms agreeing on all
    /// generators agree everywhere.
    pub fn agrees_with(&self, other: &AlgebraMorphism) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.even_images == other.even_images
            && self.odd_images == other.odd_images
    }

    /// Check that `inv` undoes this morphism on every generator of both
    /// charts.
    pub fn check_inverse(&self, inv: &AlgebraMorphism) -> Result<()> {
        let round = self.then(inv)?;
        let id_src = AlgebraMorphism::identity(&self.source);
        for (g, (a, b)) in self
            .source
            .gen_names()
            .zip(round.all_images().zip(id_src.all_images()))
        {
            if a != b {
                return Err(Error::BadInverse(g));
            }
        }
        let round = inv.then(self)?;
        let id_tgt = AlgebraMorphism::identity(&self.target);
        for (g, (a, b)) in self
            .target
            .gen_names()
            .zip(round.all_images().zip(id_tgt.all_images()))
        {
            if a != b {
                return Err(Error::BadInverse(g));
            }
        }
        Ok(())
    }

    pub fn all_images(&self) -> impl Iterator<Item = &SuperElement> {
        self.even_images.iter().chain(self.odd_images.iter())
    }

    pub fn image_of(&self, name: &str) -> Result<&SuperElement> {
        if let Some(i) = self.source.even_index(name) {
            Ok(&self.even_images[i])
        } else if let Some(j) = self.source.odd_index(name) {
            Ok(&self.odd_images[j])
        } else {
            Err(Error::UnknownGenerator(name.to_string()))
        }
    }
}

impl fmt::Display for AlgebraMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, im) in self
            .source
            .gen_names()
            .zip(self.all_images().map(|e| e.to_string()))
        {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{} -> {}", name, im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;
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
    fn identity_fixes_everything() {
        let c = chart();
        let id = AlgebraMorphism::identity(&c);
        let a = SuperElement::even_gen(&c, 0)
            .checked_add(&SuperElement::odd_gen(&c, 0))
            .unwrap();
        assert_eq!(id.apply(&a).unwrap(), a);
    }

    #[test]
    fn odd_image_expansion_kills_squares() {
        // s1 -> s1 + s2, s2 -> s2 applied to s1 s2 gives (s1+s2) s2 = s1 s2
        let c = chart();
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let m = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("s1".into(), s1.checked_add(&s2).unwrap())],
        )
        .unwrap();
        let a = s1.checked_mul(&s2).unwrap();
        assert_eq!(m.apply(&a).unwrap(), a);
    }

    #[test]
    fn polynomial_substitution() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let m = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("x".into(), x.checked_mul(&x).unwrap())],
        )
        .unwrap();
        let a = x.checked_add(&SuperElement::one(&c)).unwrap();
        let expected = x
            .checked_mul(&x)
            .unwrap()
            .checked_add(&SuperElement::one(&c))
            .unwrap();
        assert_eq!(m.apply(&a).unwrap(), expected);
    }

    #[test]
    fn parity_violations_rejected() {
        let c = chart();
        let bad = AlgebraMorphism::from_images(
            &c,
            &c,
            &[("x".into(), SuperElement::odd_gen(&c, 0))],
        );
        assert!(matches!(bad, Err(Error::ParityMismatch(_))));
    }

    #[test]
    fn morphism_is_multiplicative() {
        let c = chart();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let m = AlgebraMorphism::from_images(
            &c,
            &c,
            &[
                ("s1".into(), s1.checked_add(&s2).unwrap()),
                ("x".into(), x.checked_mul(&x).unwrap()),
            ],
        )
        .unwrap();
        let a = x
            .checked_add(&s1)
            .unwrap()
            .checked_add(&SuperElement::from_rational(&c, Q::one()))
            .unwrap();
        let b = s2.checked_mul(&x).unwrap().checked_add(&s1).unwrap();
        let lhs = m.apply(&a.checked_mul(&b).unwrap()).unwrap();
        let rhs = m
            .apply(&a)
            .unwrap()
            .checked_mul(&m.apply(&b).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
