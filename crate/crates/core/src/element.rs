use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::chart::{Chart, Parity, ParityClass, Point};
use crate::error::{Error, Result};
use crate::Q;

/// Ascending set of odd-generator indices packed into a bitmask.
pub type OddSet = u64;

/// Number of inversions needed to merge two ascending index sets; the parity
/// of this count is the Koszul sign of the product.
pub fn merge_inversions(a: OddSet, b: OddSet) -> u32 {
    // for each index j in b, count indices of a strictly greater than j
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        count += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    count
}

fn odd_indices(set: OddSet) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| set & (1 << i) != 0)
}

/// One monomial key: Laurent exponents on the even generators and an
/// ascending subset of odd generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub evens: Vec<i64>,
    pub odds: OddSet,
}

impl Monomial {
    pub fn one(chart: &Chart) -> Monomial {
        Monomial {
            evens: vec![0; chart.evens.len()],
            odds: 0,
        }
    }

    pub fn parity(&self) -> Parity {
        Parity::from_usize(self.odds.count_ones() as usize)
    }

    pub fn is_constant(&self) -> bool {
        self.odds == 0 && self.evens.iter().all(|&e| e == 0)
    }
}

// Canonical term order: even exponent vectors lexicographically, higher
// exponents first; ties broken by the odd subsets compared lexicographically
// as ascending index lists, fewer/lower factors first. Rendering follows
// this order, which is what makes printing and hashing deterministic.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.evens.cmp(&other.evens) {
            Ordering::Equal => cmp_oddset_lex(self.odds, other.odds),
            ord => ord.reverse(),
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic comparison of two index sets read as ascending lists.
pub fn cmp_oddset_lex(a: OddSet, b: OddSet) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {
                let (i, j) = (a.trailing_zeros(), b.trailing_zeros());
                match i.cmp(&j) {
                    Ordering::Equal => {
                        a &= a - 1;
                        b &= b - 1;
                    }
                    ord => return ord,
                }
            }
        }
    }
}

/// An element of the graded commutative algebra of a chart: a finite sum of
/// rational multiples of monomials, kept in canonical form (no zero
/// coefficients, ascending odd subsets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperElement {
    pub chart: Arc<Chart>,
    pub terms: BTreeMap<Monomial, Q>,
}

impl SuperElement {
    pub fn zero(chart: &Arc<Chart>) -> SuperElement {
        SuperElement {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_rational(chart: &Arc<Chart>, q: Q) -> SuperElement {
        let mut e = SuperElement::zero(chart);
        e.add_term(Monomial::one(chart), q);
        e
    }

    pub fn one(chart: &Arc<Chart>) -> SuperElement {
        SuperElement::from_rational(chart, Q::one())
    }

    pub fn from_int(chart: &Arc<Chart>, n: i64) -> SuperElement {
        SuperElement::from_rational(chart, Q::from_integer(n.into()))
    }

    /// The even generator `x_i` as an element.
    pub fn even_gen(chart: &Arc<Chart>, i: usize) -> SuperElement {
        let mut m = Monomial::one(chart);
        m.evens[i] = 1;
        let mut e = SuperElement::zero(chart);
        e.add_term(m, Q::one());
        e
    }

    /// The odd generator `s_j` as an element.
    pub fn odd_gen(chart: &Arc<Chart>, j: usize) -> SuperElement {
        let mut m = Monomial::one(chart);
        m.odds = 1 << j;
        let mut e = SuperElement::zero(chart);
        e.add_term(m, Q::one());
        e
    }

    pub fn gen_by_name(chart: &Arc<Chart>, name: &str) -> Result<SuperElement> {
        if let Some(i) = chart.even_index(name) {
            Ok(SuperElement::even_gen(chart, i))
        } else if let Some(j) = chart.odd_index(name) {
            Ok(SuperElement::odd_gen(chart, j))
        } else {
            Err(Error::UnknownGenerator(name.to_string()))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, q: Q) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(q);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &q;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn checked_add(&self, other: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.chart, &other.chart)?;
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(m.clone(), q.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SuperElement) -> Result<SuperElement> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> SuperElement {
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &self.terms {
            out.terms.insert(m.clone(), -q.clone());
        }
        out
    }

    pub fn scale(&self, q: &Q) -> SuperElement {
        if q.is_zero() {
            return SuperElement::zero(&self.chart);
        }
        let mut out = SuperElement::zero(&self.chart);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * q);
        }
        out
    }

    /// Graded-commutative product. Odd generators square to zero and the
    /// Koszul sign counts the inversions needed to merge the odd subsets.
    pub fn checked_mul(&self, other: &SuperElement) -> Result<SuperElement> {
        Chart::same_chart(&self.chart, &other.chart)?;
        let mut out = SuperElement::zero(&self.chart);
        for (ma, qa) in &self.terms {
            for (mb, qb) in &other.terms {
                if ma.odds & mb.odds != 0 {
                    continue; // repeated odd factor
                }
                let sign = if merge_inversions(ma.odds, mb.odds) % 2 == 0 {
                    Q::one()
                } else {
                    -Q::one()
                };
                let evens = ma
                    .evens
                    .iter()
                    .zip(&mb.evens)
                    .map(|(a, b)| a + b)
                    .collect();
                let m = Monomial {
                    evens,
                    odds: ma.odds | mb.odds,
                };
                out.add_term(m, qa * qb * sign);
            }
        }
        // Laurent exponents may only go negative on invertible generators.
        for m in out.terms.keys() {
            for (i, &e) in m.evens.iter().enumerate() {
                if e < 0 && !self.chart.evens[i].invertible {
                    return Err(Error::NegativeExponent(self.chart.evens[i].name.clone()));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: i64) -> Result<SuperElement> {
        if n < 0 {
            return self.invert()?.pow(-n);
        }
        let mut out = SuperElement::one(&self.chart);
        for _ in 0..n {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    pub fn parity_class(&self) -> ParityClass {
        let mut seen: Option<Parity> = None;
        for m in self.terms.keys() {
            match seen {
                None => seen = Some(m.parity()),
                Some(p) if p == m.parity() => {}
                Some(_) => return ParityClass::Mixed,
            }
        }
        // zero counts as even by convention
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

    /// The part of the given parity.
    pub fn parity_part(&self, p: Parity) -> SuperElement {
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &self.terms {
            if m.parity() == p {
                out.terms.insert(m.clone(), q.clone());
            }
        }
        out
    }

    /// The body: the image under the morphism killing every odd generator.
    pub fn body(&self) -> SuperElement {
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &self.terms {
            if m.odds == 0 {
                out.terms.insert(m.clone(), q.clone());
            }
        }
        out
    }

    /// Point evaluation: body followed by substitution of the point values.
    pub fn eval(&self, p: &Point) -> Result<Q> {
        Chart::same_chart(&self.chart, &p.chart)?;
        let mut acc = Q::zero();
        for (m, q) in &self.terms {
            if m.odds != 0 {
                continue;
            }
            let mut val = q.clone();
            for (i, &e) in m.evens.iter().enumerate() {
                if e != 0 {
                    val *= q_pow(&p.even_values[i], e)?;
                }
            }
            acc += val;
        }
        Ok(acc)
    }

    /// Whether the body is a single monomial `c*x^alpha` with `c != 0` and
    /// the exponent support on invertible generators; exactly the units of
    /// the algebra, every unit being `c*x^alpha*(1 + nilpotent)`.
    pub fn is_unit(&self) -> bool {
        let body = self.body();
        if body.terms.len() != 1 {
            return false;
        }
        let m = body.terms.keys().next().unwrap();
        m.evens
            .iter()
            .enumerate()
            .all(|(i, &e)| e == 0 || self.chart.evens[i].invertible)
    }

    /// Two-sided inverse, when the element is a unit. Writing `a = b(1+n)`
    /// with `b` the body monomial and `n` nilpotent, the inverse is
    /// `(sum_k (-n)^k) b^{-1}`; the series terminates within the number of
    /// odd generators plus one steps.
    pub fn invert(&self) -> Result<SuperElement> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(self.to_string()));
        }
        let body = self.body();
        let (m, c) = body.terms.iter().next().unwrap();
        let mut binv_m = Monomial::one(&self.chart);
        for (i, &e) in m.evens.iter().enumerate() {
            binv_m.evens[i] = -e;
        }
        let mut binv = SuperElement::zero(&self.chart);
        binv.add_term(binv_m, c.recip());
        // n = b^{-1} a - 1
        let n = binv
            .checked_mul(self)?
            .checked_sub(&SuperElement::one(&self.chart))?;
        let mut series = SuperElement::one(&self.chart);
        let mut power = SuperElement::one(&self.chart);
        let neg_n = n.neg();
        for _ in 0..=self.chart.odds.len() {
            power = power.checked_mul(&neg_n)?;
            if power.is_zero() {
                break;
            }
            series = series.checked_add(&power)?;
        }
        series.checked_mul(&binv)
    }

    /// Partial derivative along the i-th even generator (Laurent rule).
    pub fn d_even(&self, i: usize) -> SuperElement {
        assert!(i < self.chart.coord_evens, "parameter generators have no coordinate slot");
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &self.terms {
            let e = m.evens[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.evens[i] = e - 1;
            out.add_term(m2, q * Q::from_integer(e.into()));
        }
        out
    }

    /// Left partial derivative along the j-th odd generator: removing `s_j`
    /// from an ascending product costs the sign of its position from the
    /// left.
    pub fn d_odd(&self, j: usize) -> SuperElement {
        assert!(j < self.chart.coord_odds, "parameter generators have no coordinate slot");
        let bit = 1u64 << j;
        let mut out = SuperElement::zero(&self.chart);
        for (m, q) in &self.terms {
            if m.odds & bit == 0 {
                continue;
            }
            let pos = (m.odds & (bit - 1)).count_ones();
            let mut m2 = m.clone();
            m2.odds &= !bit;
            let sign = if pos % 2 == 0 { Q::one() } else { -Q::one() };
            out.add_term(m2, q * sign);
        }
        out
    }

    /// Split a monomial's odd set and even exponents at a generator
    /// boundary; used by tensor charts.
    pub fn max_odd_power(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.odds.count_ones())
            .max()
            .unwrap_or(0)
    }
}

pub fn q_pow(q: &Q, e: i64) -> Result<Q> {
    if e == 0 {
        return Ok(Q::one());
    }
    if q.is_zero() && e < 0 {
        return Err(Error::NotAUnit("0".into()));
    }
    let mut out = Q::one();
    for _ in 0..e.abs() {
        out *= q;
    }
    if e < 0 {
        out = out.recip();
    }
    Ok(out)
}

fn write_q_coeff(f: &mut fmt::Formatter<'_>, q: &Q, has_factors: bool) -> fmt::Result {
    if q.is_one() && has_factors {
        return Ok(());
    }
    if q.denom().is_one() {
        write!(f, "{}", q.numer())?;
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())?;
    }
    if has_factors {
        write!(f, "*")?;
    }
    Ok(())
}

impl fmt::Display for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = q.abs();
            let has_factors = !m.is_constant();
            write_q_coeff(f, &mag, has_factors)?;
            let mut first = true;
            for (i, &e) in m.evens.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.chart.evens[i].name)?;
                if e != 1 {
                    write!(f, "^{}", e)?;
                }
            }
            for j in odd_indices(m.odds) {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.chart.odds[j])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn chart2() -> Arc<Chart> {
        Chart::new(
            "C",
            vec![("x1".into(), false), ("x2".into(), true)],
            vec!["s1".into(), "s2".into()],
        )
        .unwrap()
    }

    #[test]
    fn odd_square_vanishes() {
        let c = chart2();
        let s1 = SuperElement::odd_gen(&c, 0);
        assert!(s1.checked_mul(&s1).unwrap().is_zero());
    }

    #[test]
    fn odd_generators_anticommute() {
        let c = chart2();
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let ab = s1.checked_mul(&s2).unwrap();
        let ba = s2.checked_mul(&s1).unwrap();
        assert!(ab.checked_add(&ba).unwrap().is_zero());
    }

    #[test]
    fn nilpotent_geometric_identity() {
        // (1 + s1 s2)(1 - s1 s2) = 1 because (s1 s2)^2 = 0
        let c = chart2();
        let one = SuperElement::one(&c);
        let s1s2 = SuperElement::odd_gen(&c, 0)
            .checked_mul(&SuperElement::odd_gen(&c, 1))
            .unwrap();
        let a = one.checked_add(&s1s2).unwrap();
        let b = one.checked_sub(&s1s2).unwrap();
        assert_eq!(a.checked_mul(&b).unwrap(), one);
    }

    #[test]
    fn parity_classification() {
        let c = chart2();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        assert_eq!(
            s1.checked_mul(&s2).unwrap().parity_class(),
            ParityClass::Even
        );
        assert_eq!(x.checked_mul(&s1).unwrap().parity_class(), ParityClass::Odd);
        assert_eq!(x.checked_add(&s1).unwrap().parity_class(), ParityClass::Mixed);
        assert_eq!(SuperElement::zero(&c).parity_class(), ParityClass::Even);
    }

    #[test]
    fn body_and_point_evaluation() {
        let c = chart2();
        let x = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        // 3 x^2 + x s1 s2
        let x2 = x.checked_mul(&x).unwrap();
        let a = x2
            .scale(&Q::from_integer(3.into()))
            .checked_add(&x.checked_mul(&s1).unwrap().checked_mul(&s2).unwrap())
            .unwrap();
        assert_eq!(a.body(), x2.scale(&Q::from_integer(3.into())));
        let p = Point::new(c.clone(), vec![Q::from_integer(2.into()), Q::one()]).unwrap();
        assert_eq!(a.eval(&p).unwrap(), Q::from_integer(12.into()));
        assert_eq!(s1.eval(&p).unwrap(), Q::zero());
    }

    #[test]
    fn invert_unit_with_nilpotent_part() {
        // 1/(2 + s1 s2) = 1/2 - (1/4) s1 s2
        let c = chart2();
        let s1s2 = SuperElement::odd_gen(&c, 0)
            .checked_mul(&SuperElement::odd_gen(&c, 1))
            .unwrap();
        let a = SuperElement::from_int(&c, 2).checked_add(&s1s2).unwrap();
        let inv = a.invert().unwrap();
        let expected = SuperElement::from_rational(&c, Q::new(1.into(), 2.into()))
            .checked_sub(&s1s2.scale(&Q::new(1.into(), 4.into())))
            .unwrap();
        assert_eq!(inv, expected);
        assert_eq!(a.checked_mul(&inv).unwrap(), SuperElement::one(&c));
        assert_eq!(inv.checked_mul(&a).unwrap(), SuperElement::one(&c));
    }

    #[test]
    fn invert_monomial_unit() {
        let c = chart2();
        let t = SuperElement::even_gen(&c, 1); // invertible
        let tinv = t.invert().unwrap();
        assert_eq!(t.checked_mul(&tinv).unwrap(), SuperElement::one(&c));
    }

    #[test]
    fn invert_rejects_non_unit_body() {
        let c = chart2();
        let a = SuperElement::even_gen(&c, 0)
            .checked_add(&SuperElement::odd_gen(&c, 0))
            .unwrap();
        assert!(matches!(a.invert(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn left_odd_partial_signs() {
        let c = chart2();
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let s1s2 = s1.checked_mul(&s2).unwrap();
        assert_eq!(s1s2.d_odd(0), s2);
        assert_eq!(s1s2.d_odd(1), s1.neg());
    }

    #[test]
    fn laurent_partial() {
        let c = chart2();
        let t = SuperElement::even_gen(&c, 1);
        let tinv = t.invert().unwrap();
        // d/dx2 (x2^-1) = -x2^-2
        let expected = tinv.checked_mul(&tinv).unwrap().neg();
        assert_eq!(tinv.d_even(1), expected);
    }

    #[test]
    fn rendering_matches_canonical_order() {
        let c = chart2();
        let x1 = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let x2inv = SuperElement::even_gen(&c, 1).invert().unwrap();
        // 3/2 x1^2 s1 s2 - x2^-1
        let a = x1
            .checked_mul(&x1)
            .unwrap()
            .checked_mul(&s1)
            .unwrap()
            .checked_mul(&s2)
            .unwrap()
            .scale(&Q::new(3.into(), 2.into()))
            .checked_sub(&x2inv)
            .unwrap();
        assert_eq!(a.to_string(), "3/2*x1^2*s1*s2 - x2^-1");
        let inv = SuperElement::from_int(&c, 2)
            .checked_add(&s1.checked_mul(&s2).unwrap())
            .unwrap()
            .invert()
            .unwrap();
        assert_eq!(inv.to_string(), "1/2 - 1/4*s1*s2");
    }
}
