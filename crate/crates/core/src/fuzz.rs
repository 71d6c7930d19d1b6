//! Deterministic random algebra objects for the property suites. All
//! generators take an explicit RNG so identical seeds reproduce identical
//! streams.

use std::sync::Arc;

use num::One;
use rand::Rng;

use crate::chart::{Chart, Parity};
use crate::derivation::Derivation;
use crate::element::{Monomial, SuperElement};
use crate::error::Result;
use crate::form::{Form, FormMonomial};
use crate::morphism::AlgebraMorphism;
use crate::Q;

fn random_coeff<R: Rng>(rng: &mut R) -> Q {
    loop {
        let numer: i64 = rng.gen_range(-5..=5);
        if numer == 0 {
            continue;
        }
        let denom: i64 = rng.gen_range(1..=3);
        return Q::new(numer.into(), denom.into());
    }
}

fn random_monomial<R: Rng>(chart: &Chart, rng: &mut R, max_deg: i64) -> Monomial {
    let mut evens = Vec::with_capacity(chart.evens.len());
    for g in &chart.evens {
        let lo = if g.invertible { -max_deg } else { 0 };
        evens.push(rng.gen_range(lo..=max_deg));
    }
    let mut odds = 0u64;
    for j in 0..chart.odds.len() {
        if rng.gen_bool(0.5) {
            odds |= 1 << j;
        }
    }
    Monomial { evens, odds }
}

/// A random element with up to `terms` monomials of even degree at most
/// `max_deg` per generator.
pub fn random_element<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    max_deg: i64,
    terms: usize,
) -> SuperElement {
    let mut out = SuperElement::zero(chart);
    let n = rng.gen_range(1..=terms);
    for _ in 0..n {
        out.add_term(random_monomial(chart, rng, max_deg), random_coeff(rng));
    }
    out
}

/// A random nonzero homogeneous element of the given parity (falls back to
/// the scalar 1 for even parity when the draw comes up empty).
pub fn random_homogeneous<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    parity: Parity,
    max_deg: i64,
    terms: usize,
) -> SuperElement {
    let raw = random_element(chart, rng, max_deg, terms);
    let part = raw.parity_part(parity);
    if !part.is_zero() {
        return part;
    }
    match parity {
        Parity::Even => SuperElement::one(chart),
        Parity::Odd => {
            if chart.odds.is_empty() {
                SuperElement::zero(chart)
            } else {
                let j = rng.gen_range(0..chart.odds.len());
                SuperElement::odd_gen(chart, j)
            }
        }
    }
}

/// A random form of exact Z-degree `degree` with up to `terms` terms.
pub fn random_form<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    degree: i64,
    max_coeff_deg: i64,
    terms: usize,
) -> Form {
    let mut out = Form::zero(chart);
    let n = rng.gen_range(1..=terms);
    for _ in 0..n {
        let mut m = FormMonomial::unit(chart);
        let mut remaining = degree;
        // spread the degree between dx factors and ds powers
        let mut dx_candidates: Vec<usize> = (0..chart.coord_evens).collect();
        while remaining > 0 {
            let use_dx = !dx_candidates.is_empty() && rng.gen_bool(0.5);
            if use_dx {
                let pick = rng.gen_range(0..dx_candidates.len());
                let i = dx_candidates.swap_remove(pick);
                m.dx |= 1 << i;
                remaining -= 1;
            } else if chart.coord_odds > 0 {
                let j = rng.gen_range(0..chart.coord_odds);
                m.ds[j] += 1;
                remaining -= 1;
            } else if !dx_candidates.is_empty() {
                let pick = rng.gen_range(0..dx_candidates.len());
                let i = dx_candidates.swap_remove(pick);
                m.dx |= 1 << i;
                remaining -= 1;
            } else {
                break;
            }
        }
        if m.degree() != degree {
            continue;
        }
        let coeff = random_element(chart, rng, max_coeff_deg, 2);
        out.add_term(m, coeff);
    }
    out
}

/// A random bidegree-homogeneous form.
pub fn random_homogeneous_form<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    degree: i64,
    parity: Parity,
    max_coeff_deg: i64,
) -> Form {
    let raw = random_form(chart, rng, degree, max_coeff_deg, 3);
    for ((d, p), comp) in raw.bigraded_components() {
        if d == degree && p == parity {
            return comp;
        }
    }
    Form::zero(chart)
}

/// A random derivation with small coefficients.
pub fn random_derivation<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    max_deg: i64,
) -> Derivation {
    let even_coeffs = (0..chart.coord_evens)
        .map(|_| random_element(chart, rng, max_deg, 2))
        .collect();
    let odd_coeffs = (0..chart.coord_odds)
        .map(|_| random_element(chart, rng, max_deg, 2))
        .collect();
    Derivation {
        chart: chart.clone(),
        even_coeffs,
        odd_coeffs,
    }
}

/// A random homogeneous derivation of the given parity; may be zero on
/// charts too small to support one.
pub fn random_homogeneous_derivation<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    parity: Parity,
    max_deg: i64,
) -> Derivation {
    let raw = random_derivation(chart, rng, max_deg);
    let (even, odd) = raw.parity_parts();
    let out = match parity {
        Parity::Even => even,
        Parity::Odd => odd,
    };
    if !out.is_zero() {
        return out;
    }
    // fall back to a coordinate derivation of the right parity
    match parity {
        Parity::Even if chart.coord_evens > 0 => Derivation::d_dx(chart, 0),
        Parity::Odd if chart.coord_odds > 0 => Derivation::d_ds(chart, 0),
        _ => Derivation::zero(chart),
    }
}

/// A random parity-preserving endomorphism of the chart algebra; invertible
/// generators receive unit images.
pub fn random_endomorphism<R: Rng>(
    chart: &Arc<Chart>,
    rng: &mut R,
    max_deg: i64,
) -> Result<AlgebraMorphism> {
    let mut even_images = Vec::with_capacity(chart.evens.len());
    for (i, g) in chart.evens.iter().enumerate() {
        if g.invertible {
            // unit: nonzero multiple of the generator, optionally with a
            // nilpotent even correction
            let mut img = SuperElement::even_gen(chart, i).scale(&random_coeff(rng));
            if chart.odds.len() >= 2 && rng.gen_bool(0.5) {
                let j = rng.gen_range(0..chart.odds.len() - 1);
                let nil = SuperElement::odd_gen(chart, j)
                    .checked_mul(&SuperElement::odd_gen(chart, j + 1))?;
                img = img.checked_add(&img.checked_mul(&nil)?)?;
            }
            even_images.push(img);
        } else {
            let img = random_homogeneous(chart, rng, Parity::Even, max_deg.max(1), 2);
            even_images.push(img);
        }
    }
    let mut odd_images = Vec::with_capacity(chart.odds.len());
    for _ in &chart.odds {
        odd_images.push(random_homogeneous(chart, rng, Parity::Odd, max_deg, 2));
    }
    AlgebraMorphism::new(chart.clone(), chart.clone(), even_images, odd_images)
}

/// A random chart with at most the given numbers of generators; at least
/// one generator overall.
pub fn random_chart<R: Rng>(rng: &mut R, max_even: usize, max_odd: usize) -> Arc<Chart> {
    loop {
        let p = rng.gen_range(0..=max_even);
        let q = rng.gen_range(0..=max_odd);
        if p + q == 0 {
            continue;
        }
        let evens = (0..p)
            .map(|i| (format!("x{}", i + 1), rng.gen_bool(0.3)))
            .collect();
        let odds = (0..q).map(|j| format!("s{}", j + 1)).collect();
        return Chart::new("fuzz", evens, odds).expect("generated names are unique");
    }
}

/// Convenience: 1 as a rational.
pub fn one() -> Q {
    Q::one()
}
