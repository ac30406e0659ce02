//! JSON reports.
//!
//! Schema `nal-report/1`:
//!
//! ```text
//! {
//!   "schema": "nal-report/1",
//!   "theorem": "G1",
//!   "catalog_version": "<16 hex digits>",
//!   "seed": 0,
//!   "summary": { "verified": n, "refuted": n, "inconclusive": n },
//!   "items": [ { "id", "kind", "outcome", "method", "reason"?, "details", "elapsed_ms"? } ],
//!   "tables": { ... }
//! }
//! ```
//!
//! Items are in catalog order. `elapsed_ms` is present only when timings were requested,
//! so that reports without it are byte-identical across runs.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "nal-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Verified,
    Refuted,
    Inconclusive,
}

impl Outcome {
    /// Process exit code for a single outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::Refuted => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub id: String,
    pub kind: String,
    pub outcome: Outcome,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl ItemReport {
    pub fn new(id: impl Into<String>, kind: impl Into<String>, outcome: Outcome, method: impl Into<String>) -> Self {
        ItemReport { id: id.into(), kind: kind.into(), outcome, method: method.into(), reason: None, details: Value::Null, elapsed_ms: None }
    }

    pub fn reason(mut self, r: impl Into<String>) -> Self {
        self.reason = Some(r.into());
        self
    }

    pub fn details(mut self, d: Value) -> Self {
        self.details = d;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub verified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub theorem: String,
    pub catalog_version: String,
    pub seed: u64,
    pub summary: Summary,
    pub items: Vec<ItemReport>,
    pub tables: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(theorem: impl Into<String>, catalog_version: impl Into<String>, seed: u64, items: Vec<ItemReport>) -> Self {
        let mut summary = Summary::default();
        for i in &items {
            match i.outcome {
                Outcome::Verified => summary.verified += 1,
                Outcome::Refuted => summary.refuted += 1,
                Outcome::Inconclusive => summary.inconclusive += 1,
            }
        }
        Report { schema: SCHEMA, theorem: theorem.into(), catalog_version: catalog_version.into(), seed, summary, items, tables: BTreeMap::new() }
    }

    pub fn items_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a ItemReport> + 'a {
        self.items.iter().filter(move |i| i.kind == kind)
    }

    /// 1 if anything was refuted, else 2 if anything is inconclusive, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.summary.refuted > 0 {
            1
        } else if self.summary.inconclusive > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per item, derived from the JSON content.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for i in &self.items {
            let o = match i.outcome {
                Outcome::Verified => "verified",
                Outcome::Refuted => "REFUTED",
                Outcome::Inconclusive => "inconclusive",
            };
            out.push_str(&format!("{:<13} {:<18} {}", o, i.kind, i.id));
            if let Some(r) = &i.reason {
                out.push_str(&format!("  ({})", r));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} verified, {} refuted, {} inconclusive\n",
            self.theorem, self.summary.verified, self.summary.refuted, self.summary.inconclusive
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_exit_code() {
        let items = vec![
            ItemReport::new("a", "k", Outcome::Verified, "m"),
            ItemReport::new("b", "k", Outcome::Inconclusive, "m").reason("parse"),
        ];
        let r = Report::new("G1", "00", 7, items);
        assert_eq!(r.summary, Summary { verified: 1, refuted: 0, inconclusive: 1 });
        assert_eq!(r.exit_code(), 2);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["items"][1]["reason"], "parse");
        assert!(v["items"][0].get("elapsed_ms").is_none());
    }
}
