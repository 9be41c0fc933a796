//! Report rows shared by the command-line runner and the tests.

use serde::{Deserialize, Serialize};

use crate::sharpness::SharpnessVerdict;

/// How `measured` is compared with `predicted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `|measured - predicted| ≤ tolerance`.
    Absolute,
    /// `|measured - predicted| ≤ tolerance·|predicted|`.
    Relative,
    /// `measured ≤ predicted + tolerance`.
    AtMost,
    /// `measured ≥ predicted - tolerance`.
    AtLeast,
}

impl Criterion {
    pub fn holds(self, predicted: f64, measured: f64, tolerance: f64) -> bool {
        match self {
            Criterion::Absolute => (measured - predicted).abs() <= tolerance,
            Criterion::Relative => (measured - predicted).abs() <= tolerance * predicted.abs(),
            Criterion::AtMost => measured <= predicted + tolerance,
            Criterion::AtLeast => measured >= predicted - tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub case: String,
    pub inputs: String,
    pub predicted: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub pass: bool,
    /// Goodness of fit for slope rows.
    pub r_squared: Option<f64>,
    /// For necessity checks: whether the measured exponent is compatible with the estimate.
    pub estimate_holds: Option<bool>,
}

impl ReportRow {
    pub fn new(
        experiment: &str,
        case: &str,
        inputs: impl Into<String>,
        predicted: f64,
        measured: f64,
        tolerance: f64,
        criterion: Criterion,
    ) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            case: case.to_string(),
            inputs: inputs.into(),
            predicted,
            measured,
            tolerance,
            criterion,
            pass: measured.is_finite() && criterion.holds(predicted, measured, tolerance),
            r_squared: None,
            estimate_holds: None,
        }
    }

    /// A slope row: passes only if the fit is accepted as well.
    pub fn from_verdict(experiment: &str, v: &SharpnessVerdict, tolerance: f64) -> Self {
        let mut row = ReportRow::new(
            experiment,
            &v.claim,
            v.exponents.clone(),
            v.predicted,
            v.measured.slope,
            tolerance,
            Criterion::Absolute,
        );
        row.pass = v.pass;
        row.r_squared = Some(v.measured.r_squared);
        row.estimate_holds = Some(v.estimate_holds);
        row
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Rows of one run plus counts. Timing is kept out so that reports are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

impl EstimateReport {
    pub fn new(seed: u64, rows: Vec<ReportRow>) -> Self {
        let passed = rows.iter().filter(|r| r.pass).count();
        EstimateReport {
            seed,
            summary: Summary {
                total: rows.len(),
                passed,
                failed: rows.len() - passed,
            },
            rows,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    /// Row groups in first-appearance order of their experiment.
    pub fn by_experiment(&self) -> Vec<(&str, Vec<&ReportRow>)> {
        let mut groups: Vec<(&str, Vec<&ReportRow>)> = Vec::new();
        for row in &self.rows {
            match groups.iter_mut().find(|(e, _)| *e == row.experiment) {
                Some((_, rows)) => rows.push(row),
                None => groups.push((&row.experiment, vec![row])),
            }
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria() {
        assert!(Criterion::Absolute.holds(-0.25, -0.26, 0.05));
        assert!(!Criterion::Absolute.holds(-0.25, -0.31, 0.05));
        assert!(Criterion::Relative.holds(100.0, 101.0, 0.02));
        assert!(!Criterion::Relative.holds(100.0, 103.0, 0.02));
        assert!(Criterion::AtMost.holds(20.0, 3.0, 0.0));
        assert!(!Criterion::AtLeast.holds(20.0, 3.0, 0.0));
    }

    #[test]
    fn nan_never_passes() {
        let row = ReportRow::new("x", "y", "", 1.0, f64::NAN, 1.0, Criterion::AtMost);
        assert!(!row.pass);
    }

    #[test]
    fn summary_counts_and_groups() {
        let rows = vec![
            ReportRow::new("a", "1", "", 0.0, 0.0, 0.1, Criterion::Absolute),
            ReportRow::new("b", "1", "", 0.0, 1.0, 0.1, Criterion::Absolute),
            ReportRow::new("a", "2", "", 0.0, 0.05, 0.1, Criterion::Absolute),
        ];
        let rep = EstimateReport::new(7, rows);
        assert_eq!(
            rep.summary,
            Summary {
                total: 3,
                passed: 2,
                failed: 1
            }
        );
        assert!(!rep.all_pass());
        let groups = rep.by_experiment();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].1.len(), 2);
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<EstimateReport>(&json).unwrap(), rep);
    }
}
