use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment, ExperimentResult, ExperimentSpec, RunContext};
use super::fmt_ratio;

pub const COLUMNS: [&str; 6] = [
    "Model",
    "Data Trained",
    "Data Tested",
    "Average Accuracy",
    "F1 Score",
    "Per Class Accuracy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub tool_version: String,
    pub rows: Vec<ExperimentResult>,
}

impl MatrixReport {
    fn cells(r: &ExperimentResult) -> [String; 6] {
        let head = [
            r.spec.name.clone(),
            r.spec.train.to_string(),
            r.spec.test.to_string(),
        ];
        let tail = match (&r.mean, &r.error) {
            (Some(m), err) => {
                let mark = if err.is_some() { " (partial)" } else { "" };
                [
                    format!("{:.3}{mark}", m.accuracy),
                    format!("{:.3}", m.f1),
                    format!(
                        "Fake: {} | Real: {}",
                        fmt_ratio(m.per_class_accuracy.fake),
                        fmt_ratio(m.per_class_accuracy.real)
                    ),
                ]
            }
            (None, err) => [
                format!("ERROR: {}", err.as_deref().unwrap_or("no runs")),
                "-".into(),
                "-".into(),
            ],
        };
        let [a, b, c] = head;
        let [d, e, f] = tail;
        [a, b, c, d, e, f]
    }

    /// Aligned plain-text table; failed rows carry an `ERROR:` marker.
    pub fn to_text(&self) -> String {
        let rows: Vec<[String; 6]> = self.rows.iter().map(Self::cells).collect();
        let mut widths = COLUMNS.map(str::len);
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join(" | ").trim_end().to_string() + "\n"
        };
        let mut out = line(&COLUMNS.map(String::from));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }
}

/// Run every spec in order. A failing row is kept with its error.
pub fn run_matrix(specs: &[ExperimentSpec], ctx: &RunContext<'_>) -> MatrixReport {
    MatrixReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        rows: specs.iter().map(|s| run_experiment(s, ctx)).collect(),
    }
}
