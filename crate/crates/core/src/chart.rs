use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Q;

/// Z2 parity. Even elements commute with everything, odd elements
/// anticommute among themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn from_usize(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_usize(self.as_usize() + rhs.as_usize())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Parity classification of an algebra element: homogeneous or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    Even,
    Odd,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvenGen {
    pub name: String,
    pub invertible: bool,
}

/// A global coordinate chart: an ordered list of even generators (optionally
/// invertible, i.e. Laurent) and odd (Grassmann) generators. The ordering is
/// fixed at construction and anchors every canonical form downstream.
///
/// Generators past `coord_evens`/`coord_odds` are parameters: they take part
/// in the algebra but carry no coordinate slot, so derivations never
/// differentiate along them and the exterior differential treats them as
/// constants.
///
/// The `name` is display metadata only; equality and hashing look at the
/// generator data, so structurally identical charts built along different
/// routes compare equal.
#[derive(Debug, Clone, Eq)]
pub struct Chart {
    pub name: String,
    pub evens: Vec<EvenGen>,
    pub odds: Vec<String>,
    pub coord_evens: usize,
    pub coord_odds: usize,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.evens == other.evens
            && self.odds == other.odds
            && self.coord_evens == other.coord_evens
            && self.coord_odds == other.coord_odds
    }
}

impl std::hash::Hash for Chart {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.evens.hash(state);
        self.odds.hash(state);
        self.coord_evens.hash(state);
        self.coord_odds.hash(state);
    }
}

impl Chart {
    pub fn new(
        name: impl Into<String>,
        evens: Vec<(String, bool)>,
        odds: Vec<String>,
    ) -> Result<Arc<Chart>> {
        let evens: Vec<EvenGen> = evens
            .into_iter()
            .map(|(name, invertible)| EvenGen { name, invertible })
            .collect();
        let chart = Chart {
            name: name.into(),
            coord_evens: evens.len(),
            coord_odds: odds.len(),
            evens,
            odds,
        };
        chart.check_names()?;
        Ok(Arc::new(chart))
    }

    fn check_names(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for n in self.gen_names() {
            if !seen.insert(n.clone()) {
                return Err(Error::DuplicateGenerator(n));
            }
        }
        Ok(())
    }

    pub fn gen_names(&self) -> impl Iterator<Item = String> + '_ {
        self.evens
            .iter()
            .map(|g| g.name.clone())
            .chain(self.odds.iter().cloned())
    }

    /// Dimension (m, n) counting coordinates only.
    pub fn dim(&self) -> (usize, usize) {
        (self.coord_evens, self.coord_odds)
    }

    pub fn even_index(&self, name: &str) -> Option<usize> {
        self.evens.iter().position(|g| g.name == name)
    }

    pub fn odd_index(&self, name: &str) -> Option<usize> {
        self.odds.iter().position(|g| g == name)
    }

    pub fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
        if Arc::ptr_eq(a, b) || a == b {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: a.name.clone(),
                found: b.name.clone(),
            })
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (", self.name)?;
        let mut first = true;
        for g in &self.evens {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}", g.name)?;
            if g.invertible {
                write!(f, "^-1-ok")?;
            }
        }
        for (j, s) in self.odds.iter().enumerate() {
            if !first || j > 0 {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{} odd", s)?;
        }
        write!(f, ")")
    }
}

/// A rational point of a chart: one value per even generator. Invertible
/// generators must take nonzero values (the odd generators evaluate to zero
/// under point evaluation).
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: Arc<Chart>,
    pub even_values: Vec<Q>,
}

impl Point {
    pub fn new(chart: Arc<Chart>, even_values: Vec<Q>) -> Result<Point> {
        use num::Zero;
        assert_eq!(even_values.len(), chart.evens.len(), "one value per even generator");
        for (g, v) in chart.evens.iter().zip(&even_values) {
            if g.invertible && v.is_zero() {
                return Err(Error::ZeroAtInvertible(g.name.clone()));
            }
        }
        Ok(Point { chart, even_values })
    }
}
