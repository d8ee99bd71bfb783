use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use quaddr::engine::{SpectralPage, SpectralPages};
use quaddr::error::Witness;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRow {
    pub m: i64,
    pub n: i64,
    pub dim: usize,
    pub d_rank: usize,
}

/// Pages keyed by label, kept in page order: `E1`, `E2`, …, `Einf`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pages(pub Vec<(String, Vec<PageRow>)>);

fn page_order(label: &str) -> (usize, String) {
    match label.strip_prefix('E').and_then(|r| r.parse::<usize>().ok()) {
        Some(r) => (r, String::new()),
        None => (usize::MAX, label.to_string()),
    }
}

impl Pages {
    pub fn from_spectral(p: &SpectralPages) -> Self {
        let row = |page: &SpectralPage| {
            let rows = page.entries.iter().map(|e| PageRow { m: e.m, n: e.n, dim: e.dim, d_rank: e.d_rank }).collect();
            (page.label(), rows)
        };
        Pages(p.pages.iter().chain([&p.limit]).map(row).collect())
    }

    pub fn get(&self, label: &str) -> Option<&[PageRow]> {
        self.0.iter().find(|(l, _)| l == label).map(|(_, rows)| rows.as_slice())
    }
}

impl Serialize for Pages {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (label, rows) in &self.0 {
            map.serialize_entry(label, rows)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Pages {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct PagesVisitor;
        impl<'de> Visitor<'de> for PagesVisitor {
            type Value = Pages;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from page labels to entries")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Pages, A::Error> {
                let mut pages = Vec::new();
                while let Some(entry) = access.next_entry::<String, Vec<PageRow>>()? {
                    pages.push(entry);
                }
                pages.sort_by_key(|(label, _)| page_order(label));
                Ok(Pages(pages))
            }
        }
        d.deserialize_map(PagesVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub identity: String,
    pub level: Option<usize>,
    pub detail: String,
    pub message: String,
}

impl WitnessRow {
    /// A failed identity, read as "… violated at n=…".
    pub fn violation(w: &Witness) -> Self {
        WitnessRow { identity: w.identity.clone(), level: w.level, detail: w.detail.clone(), message: w.to_string() }
    }

    /// A rejected configuration or a refused computation.
    pub fn rejection(w: &Witness) -> Self {
        WitnessRow { message: format!("{}: {}", w.identity, w.detail), ..WitnessRow::violation(w) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRow {
    pub identity: String,
    pub checked: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Induced {
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub isomorphism: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub model_hash: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, usize>,
    #[serde(default)]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub pages: Pages,
    #[serde(default)]
    pub witnesses: Vec<WitnessRow>,
    #[serde(default)]
    pub stabilized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induced: Option<Induced>,
}

impl Report {
    pub fn new(command: &str, model_hash: String) -> Self {
        Report { command: command.into(), model_hash, ..Default::default() }
    }

    pub fn set_dims(&mut self, dims: Vec<usize>) {
        self.degrees = (0..dims.len()).collect();
        self.dims = dims;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Tables of the report as CSV: dims, pages, checks and witnesses, each
    /// introduced by a `table` column.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["table", "degree", "dim"])?;
        for (t, dim) in self.degrees.iter().zip(&self.dims) {
            w.write_record(["dims".to_string(), t.to_string(), dim.to_string()])?;
        }
        if !self.pages.0.is_empty() {
            w.write_record(["table", "page", "m", "n", "dim", "d_rank"])?;
            for (label, rows) in &self.pages.0 {
                for r in rows {
                    w.write_record([
                        "pages".to_string(),
                        label.clone(),
                        r.m.to_string(),
                        r.n.to_string(),
                        r.dim.to_string(),
                        r.d_rank.to_string(),
                    ])?;
                }
            }
        }
        if let Some(checks) = &self.checks {
            w.write_record(["table", "identity", "checked", "passed"])?;
            for c in checks {
                w.write_record([
                    "checks".to_string(),
                    c.identity.clone(),
                    c.checked.to_string(),
                    c.passed.to_string(),
                ])?;
            }
        }
        if !self.witnesses.is_empty() {
            w.write_record(["table", "identity", "level", "detail"])?;
            for x in &self.witnesses {
                let level = x.level.map(|n| n.to_string()).unwrap_or_default();
                w.write_record(["witnesses".to_string(), x.identity.clone(), level, x.detail.clone()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pages_round_trip_in_page_order() {
        let row = PageRow { m: 0, n: 0, dim: 1, d_rank: 0 };
        let pages = Pages(["E1", "E2", "E10", "Einf"].iter().map(|l| (l.to_string(), vec![row.clone()])).collect());
        let json = serde_json::to_string(&pages).unwrap();
        assert!(json.find("\"E2\"").unwrap() < json.find("\"E10\"").unwrap());
        let back: Pages = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pages);
    }

    #[test]
    fn schema_keys_come_in_order() {
        let mut r = Report::new("cohomology", "00".into());
        r.set_dims(vec![1, 0, 1]);
        let json = r.to_json();
        let keys = [
            "\"command\"",
            "\"model_hash\"",
            "\"degrees\"",
            "\"dims\"",
            "\"pages\"",
            "\"witnesses\"",
            "\"stabilized\"",
        ];
        let at: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]));
        assert!(!json.contains("\"checks\""));
    }

    #[test]
    fn csv_lists_dims() {
        let mut r = Report::new("cohomology", "00".into());
        r.set_dims(vec![1, 0]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "table,degree,dim\ndims,0,1\ndims,1,0\n");
    }
}
