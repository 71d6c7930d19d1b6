use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use crate::chart::Parity;
use crate::error::{Error, Result};
use crate::report::{Check, Report};
use crate::Q;

/// A finite-dimensional Lie superalgebra presented by structure constants
/// over a homogeneous basis: `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieSuperalgebra {
    pub basis: Vec<(String, Parity)>,
    pub constants: Vec<Vec<Vec<Q>>>,
}

impl LieSuperalgebra {
    pub fn new(basis: Vec<(String, Parity)>, constants: Vec<Vec<Vec<Q>>>) -> LieSuperalgebra {
        let d = basis.len();
        assert_eq!(constants.len(), d);
        for row in &constants {
            assert_eq!(row.len(), d);
            for col in row {
                assert_eq!(col.len(), d);
            }
        }
        LieSuperalgebra { basis, constants }
    }

    pub fn abelian(basis: Vec<(String, Parity)>) -> LieSuperalgebra {
        let d = basis.len();
        LieSuperalgebra::new(basis, vec![vec![vec![Q::zero(); d]; d]; d])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.basis[i].1
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|(n, _)| n == name)
    }

    pub fn basis_vector(self: &Arc<Self>, i: usize) -> GVector {
        let mut coeffs = vec![Q::zero(); self.dim()];
        coeffs[i] = Q::one();
        GVector {
            algebra: self.clone(),
            coeffs,
        }
    }

    /// Check parity closure, super-antisymmetry and the super Jacobi
    /// identity exhaustively over basis tuples.
    pub fn validate(&self) -> Report {
        let mut report = Report::new("lie-superalgebra");
        let d = self.dim();
        let mut ok_parity = true;
        let mut ok_antisym = true;
        let mut witness_parity = None;
        let mut witness_antisym = None;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let c = &self.constants[i][j][k];
                    if !c.is_zero() && self.parity(k) != self.parity(i) + self.parity(j) {
                        ok_parity = false;
                        witness_parity
                            .get_or_insert_with(|| format!("c[{}][{}] -> {}", i, j, k));
                    }
                    let sign = if self.parity(i) == Parity::Odd && self.parity(j) == Parity::Odd
                    {
                        Q::one()
                    } else {
                        -Q::one()
                    };
                    if *c != &self.constants[j][i][k] * sign {
                        ok_antisym = false;
                        witness_antisym
                            .get_or_insert_with(|| format!("c[{}][{}] vs c[{}][{}]", i, j, j, i));
                    }
                }
            }
        }
        report.push(Check::witnessed("parity-closure", ok_parity, witness_parity));
        report.push(Check::witnessed(
            "super-antisymmetry",
            ok_antisym,
            witness_antisym,
        ));
        let mut ok_jacobi = true;
        let mut witness_jacobi = None;
        let algebra = Arc::new(self.clone());
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (a, b, c) = (
                        algebra.basis_vector(i),
                        algebra.basis_vector(j),
                        algebra.basis_vector(k),
                    );
                    // graded cyclic sum S (-1)^{|a||c|} [[a,b],c] = 0
                    let sgn = |p: Parity, q: Parity| {
                        if p == Parity::Odd && q == Parity::Odd {
                            -Q::one()
                        } else {
                            Q::one()
                        }
                    };
                    let mut total = a
                        .bracket(&b)
                        .unwrap()
                        .bracket(&c)
                        .unwrap()
                        .scale(&sgn(self.parity(i), self.parity(k)));
                    total = total
                        .add(
                            &b.bracket(&c)
                                .unwrap()
                                .bracket(&a)
                                .unwrap()
                                .scale(&sgn(self.parity(j), self.parity(i))),
                        )
                        .unwrap();
                    total = total
                        .add(
                            &c.bracket(&a)
                                .unwrap()
                                .bracket(&b)
                                .unwrap()
                                .scale(&sgn(self.parity(k), self.parity(j))),
                        )
                        .unwrap();
                    if !total.is_zero() {
                        ok_jacobi = false;
                        witness_jacobi.get_or_insert_with(|| {
                            format!(
                                "triple ({}, {}, {})",
                                self.basis[i].0, self.basis[j].0, self.basis[k].0
                            )
                        });
                    }
                }
            }
        }
        report.push(Check::witnessed("super-jacobi", ok_jacobi, witness_jacobi));
        report
    }

    /// Matrix of `ad(u)` in the basis: column j holds `[u, e_j]`.
    pub fn ad_matrix(&self, u: &GVector) -> Vec<Vec<Q>> {
        let d = self.dim();
        let mut m = vec![vec![Q::zero(); d]; d];
        #[allow(clippy::needless_range_loop)]
        for j in 0..d {
            for i in 0..d {
                if u.coeffs[i].is_zero() {
                    continue;
                }
                for k in 0..d {
                    let c = &self.constants[i][j][k];
                    if !c.is_zero() {
                        m[k][j] += &u.coeffs[i] * c;
                    }
                }
            }
        }
        m
    }

    /// Transform the structure constants under an invertible,
    /// parity-preserving change of basis `e'_j = sum_i P[i][j] e_i`.
    pub fn change_basis(
        &self,
        new_names: Vec<(String, Parity)>,
        p: &[Vec<Q>],
        p_inv: &[Vec<Q>],
    ) -> Result<LieSuperalgebra> {
        let d = self.dim();
        assert_eq!(new_names.len(), d);
        for (j, (_, parity)) in new_names.iter().enumerate() {
            for i in 0..d {
                if !p[i][j].is_zero() && self.parity(i) != *parity {
                    return Err(Error::ParityMismatch(
                        "change of basis must preserve parity".into(),
                    ));
                }
            }
        }
        // c'[a][b][k'] = sum_{i,j,k} P[i][a] P[j][b] c[i][j][k] Pinv[k'][k]
        let mut constants = vec![vec![vec![Q::zero(); d]; d]; d];
        #[allow(clippy::needless_range_loop)]
        for a in 0..d {
            for b in 0..d {
                for i in 0..d {
                    if p[i][a].is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        if p[j][b].is_zero() {
                            continue;
                        }
                        for k in 0..d {
                            let c = &self.constants[i][j][k];
                            if c.is_zero() {
                                continue;
                            }
                            for kp in 0..d {
                                if p_inv[kp][k].is_zero() {
                                    continue;
                                }
                                constants[a][b][kp] +=
                                    &p[i][a] * &p[j][b] * c * &p_inv[kp][k];
                            }
                        }
                    }
                }
            }
        }
        Ok(LieSuperalgebra::new(new_names, constants))
    }

    /// The even part as a Lie algebra on the even basis vectors.
    pub fn even_part(&self) -> (LieSuperalgebra, Vec<usize>) {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| self.parity(i) == Parity::Even)
            .collect();
        let basis = idx.iter().map(|&i| self.basis[i].clone()).collect();
        let d = idx.len();
        let mut constants = vec![vec![vec![Q::zero(); d]; d]; d];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                for (c, &k) in idx.iter().enumerate() {
                    constants[a][b][c] = self.constants[i][j][k].clone();
                }
            }
        }
        (LieSuperalgebra::new(basis, constants), idx)
    }
}

impl fmt::Display for LieSuperalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .basis
            .iter()
            .map(|(n, p)| format!("{} ({})", n, p))
            .collect();
        write!(f, "basis: {}", names.join(", "))
    }
}

/// A vector in a Lie superalgebra, as rational coefficients over the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GVector {
    pub algebra: Arc<LieSuperalgebra>,
    pub coeffs: Vec<Q>,
}

impl GVector {
    pub fn zero(algebra: &Arc<LieSuperalgebra>) -> GVector {
        GVector {
            algebra: algebra.clone(),
            coeffs: vec![Q::zero(); algebra.dim()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &GVector) -> Result<GVector> {
        self.same_algebra(other)?;
        Ok(GVector {
            algebra: self.algebra.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, q: &Q) -> GVector {
        GVector {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    fn same_algebra(&self, other: &GVector) -> Result<()> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            Err(Error::Model("vectors from different Lie superalgebras".into()))
        }
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, other: &GVector) -> Result<GVector> {
        self.same_algebra(other)?;
        let d = self.algebra.dim();
        let mut out = vec![Q::zero(); d];
        for i in 0..d {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                for (k, out_k) in out.iter_mut().enumerate() {
                    let c = &self.algebra.constants[i][j][k];
                    if !c.is_zero() {
                        *out_k += &self.coeffs[i] * &other.coeffs[j] * c;
                    }
                }
            }
        }
        Ok(GVector {
            algebra: self.algebra.clone(),
            coeffs: out,
        })
    }

    pub fn homogeneous_parity(&self) -> Option<Parity> {
        let mut seen = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match seen {
                None => seen = Some(self.algebra.parity(i)),
                Some(p) if p == self.algebra.parity(i) => {}
                _ => return None,
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }
}

impl fmt::Display for GVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            wrote = true;
            if c.is_one() {
                write!(f, "{}", self.algebra.basis[i].0)?;
            } else {
                write!(f, "{}*{}", c, self.algebra.basis[i].0)?;
            }
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The triangular (1|1) toy superalgebra: even E, odd F, [E,F] = -F.
pub fn triangular_toy() -> LieSuperalgebra {
    let basis = vec![("E".to_string(), Parity::Even), ("F".to_string(), Parity::Odd)];
    let mut c = vec![vec![vec![Q::zero(); 2]; 2]; 2];
    c[0][1][1] = -Q::one(); // [E,F] = -F
    c[1][0][1] = Q::one(); // [F,E] = +F
    LieSuperalgebra::new(basis, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_validates() {
        let g = LieSuperalgebra::abelian(vec![
            ("E".into(), Parity::Even),
            ("F".into(), Parity::Odd),
        ]);
        assert!(g.validate().passed());
    }

    #[test]
    fn triangular_toy_validates() {
        assert!(triangular_toy().validate().passed());
    }

    #[test]
    fn tampered_constant_reports_violation() {
        let mut g = triangular_toy();
        g.constants[1][0][1] = -Q::one(); // break antisymmetry
        let report = g.validate();
        assert!(!report.passed());
        let failing: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.label.clone())
            .collect();
        assert!(failing.contains(&"super-antisymmetry".to_string()));
    }

    #[test]
    fn ad_matrix_of_toy() {
        let g = Arc::new(triangular_toy());
        let e = g.basis_vector(0);
        let m = g.ad_matrix(&e);
        assert_eq!(m[0][0], Q::zero());
        assert_eq!(m[1][1], -Q::one());
        assert_eq!(m[0][1], Q::zero());
        assert_eq!(m[1][0], Q::zero());
        // [E,F] = -F through the bracket as well
        let f = g.basis_vector(1);
        assert_eq!(e.bracket(&f).unwrap(), f.scale(&-Q::one()));
    }

    #[test]
    fn even_u_self_bracket_abelian() {
        let g = Arc::new(LieSuperalgebra::abelian(vec![(
            "E".into(),
            Parity::Even,
        )]));
        let u = g.basis_vector(0);
        assert!(u.bracket(&u).unwrap().is_zero());
    }
}
