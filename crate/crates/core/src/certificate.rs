//! Named numeric inequalities recorded while a construction runs.

use serde::{Deserialize, Serialize};

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    /// `|lhs - rhs| <= tol`
    Approx,
}

/// One checked inequality `lhs <relation> rhs`.
///
/// The comparison itself is carried out in the working precision of the
/// construction; `lhs`, `rhs` and `margin` are rounded to `f64` for reporting,
/// so a certificate can hold with a margin that prints as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateLog {
    pub entries: Vec<Certificate>,
}

impl CertificateLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check<R: Real>(&mut self, label: &str, lhs: &R, relation: Relation, rhs: &R) -> bool {
        let holds = match relation {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Approx => unreachable!("use check_approx"),
        };
        let margin = match relation {
            Relation::Lt | Relation::Le => rhs.clone() - lhs.clone(),
            _ => lhs.clone() - rhs.clone(),
        };
        self.entries.push(Certificate {
            label: label.to_string(),
            lhs: lhs.to_f64(),
            relation,
            rhs: rhs.to_f64(),
            tol: None,
            margin: margin.to_f64(),
            holds,
        });
        holds
    }

    pub fn check_approx<R: Real>(&mut self, label: &str, lhs: &R, rhs: &R, tol: f64) -> bool {
        let gap = (lhs.clone() - rhs.clone()).abs();
        let holds = gap <= R::from_f64(tol);
        self.entries.push(Certificate {
            label: label.to_string(),
            lhs: lhs.to_f64(),
            relation: Relation::Approx,
            rhs: rhs.to_f64(),
            tol: Some(tol),
            margin: tol - gap.to_f64(),
            holds,
        });
        holds
    }

    /// Records a set relation or other boolean fact.
    pub fn check_bool(&mut self, label: &str, holds: bool) -> bool {
        self.entries.push(Certificate {
            label: label.to_string(),
            lhs: if holds { 1.0 } else { 0.0 },
            relation: Relation::Approx,
            rhs: 1.0,
            tol: Some(0.0),
            margin: 0.0,
            holds,
        });
        holds
    }

    pub fn extend(&mut self, other: CertificateLog) {
        self.entries.extend(other.entries);
    }

    pub fn all_hold(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Certificate> {
        self.entries.iter().filter(|c| !c.holds)
    }

    pub fn get(&self, label: &str) -> impl Iterator<Item = &Certificate> {
        let label = label.to_string();
        self.entries.iter().filter(move |c| c.label == label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Hp;

    #[test]
    fn strict_inequality_below_double_resolution() {
        let mut log = CertificateLog::new();
        let one = Hp::new(1.0);
        let almost = one.clone() - Hp::new(1e-90);
        assert!(log.check("tiny-gap", &almost, Relation::Lt, &one));
        assert!(!log.check("tiny-gap-rev", &one, Relation::Lt, &almost));
        assert!(!log.all_hold());
        assert_eq!(log.failures().count(), 1);
    }

    #[test]
    fn empty_log_is_not_a_pass() {
        assert!(!CertificateLog::new().all_hold());
    }
}
