//! Plain-text tables for witnesses, cases and audit reports.

use crate::audit::BiasReport;
use crate::case::{CaseModel, StructureModel, Trace};

/// Left-aligned columns separated by ` | `, trailing whitespace trimmed.
pub fn grid(header: Vec<String>, rows: Vec<Vec<String>>) -> Vec<String> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    std::iter::once(line(&header))
        .chain(rows.iter().map(|r| line(r)))
        .collect()
}

/// One row per individual, one column per predicate and function.
pub fn structure_table(m: &StructureModel, only: Option<&[usize]>) -> Vec<String> {
    let mut header = vec!["individual".to_string()];
    header.extend(m.predicates().map(|(p, _)| p.to_string()));
    header.extend(m.functions().map(|(f, _)| f.to_string()));
    let rows = (0..m.len())
        .filter(|i| only.is_none_or(|o| o.contains(i)))
        .map(|i| {
            let mut row = vec![m.domain()[i].clone()];
            row.extend(m.predicates().map(|(_, ext)| if ext.contains(&i) { "yes" } else { "no" }.to_string()));
            row.extend(m.functions().map(|(_, t)| t[i].to_string()));
            row
        })
        .collect();
    grid(header, rows)
}

/// One line per position: `0: {drive}`.
pub fn trace_lines(t: &Trace) -> Vec<String> {
    t.states()
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i}: {{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", ")))
        .collect()
}

pub fn case_lines(c: &CaseModel) -> Vec<String> {
    match c {
        CaseModel::Structure(m) => structure_table(m, None),
        CaseModel::Trace(t) => trace_lines(t),
    }
}

pub fn violation_table(r: &BiasReport, score: &str) -> Vec<String> {
    let header = vec![
        "x".to_string(),
        "y".to_string(),
        format!("{score}(x)"),
        format!("{score}(y)"),
    ];
    let rows = r
        .violations
        .iter()
        .map(|v| vec![v.x.clone(), v.y.clone(), v.score_x.to_string(), v.score_y.to_string()])
        .collect();
    grid(header, rows)
}
