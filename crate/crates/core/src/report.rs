use std::fmt;

/// Outcome of one verified identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(label: impl Into<String>) -> Check {
        Check {
            label: label.into(),
            pass: true,
            witness: None,
        }
    }

    pub fn fail(label: impl Into<String>, witness: impl Into<String>) -> Check {
        Check {
            label: label.into(),
            pass: false,
            witness: Some(witness.into()),
        }
    }

    pub fn witnessed(label: impl Into<String>, pass: bool, witness: Option<String>) -> Check {
        Check {
            label: label.into(),
            pass,
            witness,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            write!(f, "PASS {}", self.label)
        } else {
            match &self.witness {
                Some(w) => write!(f, "FAIL {}: {}", self.label, w),
                None => write!(f, "FAIL {}", self.label),
            }
        }
    }
}

/// A deterministic, ordered list of check outcomes; one line per identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Report {
        Report {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{}", check)?;
        }
        Ok(())
    }
}
