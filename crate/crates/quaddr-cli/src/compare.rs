use std::collections::BTreeSet;

use serde::Serialize;

use crate::report::{PageRow, Report, WitnessRow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimDiff {
    pub degree: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryDiff {
    pub page: String,
    pub m: i64,
    pub n: i64,
    pub dim: [usize; 2],
    pub d_rank: [usize; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diff {
    pub command: String,
    pub a: String,
    pub b: String,
    pub degrees: Vec<usize>,
    pub dims: Vec<DimDiff>,
    pub pages: Vec<EntryDiff>,
    /// Pages present in only one of the two reports.
    pub unmatched_pages: Vec<String>,
    /// Pages, common to both reports, on which the differential is zero.
    pub vanishing_differentials: Vec<String>,
    pub notes: Vec<String>,
    pub witnesses: Vec<WitnessRow>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.dims.is_empty() && self.pages.is_empty()
    }
}

pub const REALIZATION_NOTE: &str = "the reports come from different models; agreement here is observed on this \
     example only and does not show that the pages are independent of the realization in general";

pub fn incompatible(a: &Report, b: &Report) -> Option<String> {
    (a.degrees != b.degrees).then(|| format!("degree ranges differ: {:?} against {:?}", a.degrees, b.degrees))
}

fn entry(rows: &[PageRow], m: i64, n: i64) -> (usize, usize) {
    rows.iter().find(|r| r.m == m && r.n == n).map_or((0, 0), |r| (r.dim, r.d_rank))
}

pub fn compare(a: &Report, b: &Report) -> Diff {
    let mut diff = Diff {
        command: "compare".into(),
        a: a.model_hash.clone(),
        b: b.model_hash.clone(),
        degrees: a.degrees.clone(),
        ..Default::default()
    };
    for ((&t, &x), &y) in a.degrees.iter().zip(&a.dims).zip(&b.dims) {
        if x != y {
            diff.dims.push(DimDiff { degree: t, a: x, b: y });
        }
    }
    for (label, rows_a) in &a.pages.0 {
        let Some(rows_b) = b.pages.get(label) else {
            diff.unmatched_pages.push(label.clone());
            continue;
        };
        let positions: BTreeSet<(i64, i64)> = rows_a.iter().chain(rows_b).map(|r| (r.m, r.n)).collect();
        for (m, n) in positions {
            let (da, ra) = entry(rows_a, m, n);
            let (db, rb) = entry(rows_b, m, n);
            if (da, ra) != (db, rb) {
                diff.pages.push(EntryDiff { page: label.clone(), m, n, dim: [da, db], d_rank: [ra, rb] });
            }
        }
        if rows_a.iter().chain(rows_b).all(|r| r.d_rank == 0) {
            diff.vanishing_differentials.push(label.clone());
        }
    }
    for (label, _) in &b.pages.0 {
        if a.pages.get(label).is_none() {
            diff.unmatched_pages.push(label.clone());
        }
    }
    if a.model_hash != b.model_hash && diff.is_empty() && (!a.pages.0.is_empty() || !a.dims.is_empty()) {
        diff.notes.push(REALIZATION_NOTE.into());
    }
    let changes = diff.dims.len() + diff.pages.len();
    if changes > 0 {
        diff.witnesses.push(WitnessRow {
            identity: "report equality".into(),
            level: None,
            detail: format!("{changes} differing entries"),
            message: format!("report equality violated: {changes} differing entries"),
        });
    }
    diff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Pages;

    type Row = (i64, i64, usize, usize);

    fn report(hash: &str, dims: Vec<usize>, pages: Vec<(&str, Vec<Row>)>) -> Report {
        let mut r = Report::new("pages", hash.into());
        r.set_dims(dims);
        r.pages = Pages(
            pages
                .into_iter()
                .map(|(l, rows)| {
                    (l.to_string(), rows.into_iter().map(|(m, n, dim, d_rank)| PageRow { m, n, dim, d_rank }).collect())
                })
                .collect(),
        );
        r
    }

    #[test]
    fn identical_reports_have_empty_diff() {
        let a = report("h", vec![1, 0, 1], vec![("E1", vec![(0, 0, 1, 0), (2, 0, 1, 0)])]);
        let d = compare(&a, &a.clone());
        assert!(d.is_empty());
        assert!(d.notes.is_empty());
        assert_eq!(d.vanishing_differentials, vec!["E1".to_string()]);
    }

    #[test]
    fn entries_missing_on_one_side_count_as_zero() {
        let a = report("h", vec![1, 1], vec![("E1", vec![(0, 0, 1, 0), (1, 0, 1, 1)])]);
        let b = report("h", vec![1, 0], vec![("E1", vec![(0, 0, 1, 0)])]);
        let d = compare(&a, &b);
        assert_eq!(d.dims, vec![DimDiff { degree: 1, a: 1, b: 0 }]);
        assert_eq!(d.pages, vec![EntryDiff { page: "E1".into(), m: 1, n: 0, dim: [1, 0], d_rank: [1, 0] }]);
        assert_eq!(d.witnesses.len(), 1);
    }

    #[test]
    fn extra_pages_are_listed_not_diffed() {
        let a = report("h", vec![1], vec![("E1", vec![(0, 0, 1, 0)]), ("Einf", vec![(0, 0, 1, 0)])]);
        let b = report(
            "h",
            vec![1],
            vec![("E1", vec![(0, 0, 1, 0)]), ("E2", vec![(0, 0, 1, 0)]), ("Einf", vec![(0, 0, 1, 0)])],
        );
        let d = compare(&a, &b);
        assert!(d.is_empty());
        assert_eq!(d.unmatched_pages, vec!["E2".to_string()]);
    }

    #[test]
    fn different_models_get_a_caveat() {
        let a = report("h1", vec![1, 0], vec![]);
        let b = report("h2", vec![1, 0], vec![]);
        assert_eq!(compare(&a, &b).notes, vec![REALIZATION_NOTE.to_string()]);
        let c = report("h2", vec![1, 0, 0], vec![]);
        assert!(incompatible(&a, &c).is_some());
    }
}
