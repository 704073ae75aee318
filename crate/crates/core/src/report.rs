use serde::{Deserialize, Serialize};

/// One checked condition with its measured residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Pass/fail record for a family of checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub subject: String,
    pub clauses: Vec<Clause>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report { subject: subject.into(), clauses: Vec::new() }
    }

    /// Passes when `residual < bound`.
    pub fn below(&mut self, name: impl Into<String>, residual: f64, bound: f64) -> &mut Clause {
        self.push(name, residual < bound, residual, bound)
    }

    /// Passes when `residual <= bound`.
    pub fn at_most(&mut self, name: impl Into<String>, residual: f64, bound: f64) -> &mut Clause {
        self.push(name, residual <= bound, residual, bound)
    }

    /// Passes when `residual >= bound`.
    pub fn at_least(&mut self, name: impl Into<String>, residual: f64, bound: f64) -> &mut Clause {
        self.push(name, residual >= bound, residual, bound)
    }

    pub fn flag(&mut self, name: impl Into<String>, pass: bool) -> &mut Clause {
        self.push(name, pass, if pass { 0.0 } else { 1.0 }, 0.0)
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, residual: f64, bound: f64) -> &mut Clause {
        self.clauses.push(Clause { name: name.into(), pass, residual, bound, note: None });
        self.clauses.last_mut().expect("just pushed")
    }

    pub fn extend(&mut self, prefix: &str, other: Report) {
        for mut c in other.clauses {
            c.name = format!("{prefix}{}", c.name);
            self.clauses.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| !c.pass).collect()
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

impl Clause {
    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.note = Some(text.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_and_loose_bounds() {
        let mut r = Report::new("t");
        r.below("a", 0.5, 0.5);
        r.at_most("b", 0.5, 0.5);
        r.at_least("c", 0.5, 0.5).note("edge");
        assert!(!r.all_pass());
        assert_eq!(r.failures().len(), 1);
        assert_eq!(r.clause("c").unwrap().note.as_deref(), Some("edge"));
    }
}
