//! CSV point clouds and OBJ meshes of traced evolutes.

use std::collections::BTreeMap;
use std::fmt::Write;

use aek_core::evolute::{BranchSample, TraceResult};
use aek_core::invariants::Center;

use crate::report;

pub const CSV_HEADER: &str = "u,v,branch_id,theta,x,y,z,D_residual,regular_flag";

/// Same text as the JSON number, so CSV and OBJ agree byte for byte.
pub fn num(x: f64) -> String {
    match report::float(x) {
        serde_json::Value::Number(n) => n.to_string(),
        other => other.as_str().unwrap_or_default().to_string(),
    }
}

fn finite(s: &BranchSample) -> Option<[f64; 3]> {
    match &s.center_world {
        Center::Finite(p) => Some([p[0].to_f64(), p[1].to_f64(), p[2].to_f64()]),
        Center::AtInfinity(_) => None,
    }
}

/// One row per branch point with a finite center, ordered by grid sample
/// then root. `regular_flag` is 1, 0, or empty when not computed.
pub fn points_csv(trace: &TraceResult) -> String {
    let mut rows: Vec<(usize, usize, usize, &BranchSample)> = Vec::new();
    for b in &trace.branches {
        for s in &b.samples {
            rows.push((s.sample, s.point, b.id, s));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (_, _, id, s) in rows {
        let Some(p) = finite(s) else { continue };
        let flag = match s.regular {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(s.chart[0]),
            num(s.chart[1]),
            id,
            num(s.theta),
            num(p[0]),
            num(p[1]),
            num(p[2]),
            num(s.d_value),
            flag
        )
        .unwrap();
    }
    out
}

/// Per branch, a vertex for each finite point and two triangles for each
/// grid cell whose four corners all belong to the branch. Missing samples
/// leave holes.
pub fn mesh_obj(trace: &TraceResult) -> String {
    let mut out = String::new();
    let mut next = 1usize;
    for b in &trace.branches {
        let mut at: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for s in &b.samples {
            let Some(p) = finite(s) else { continue };
            if at.contains_key(&s.index) {
                continue;
            }
            writeln!(out, "v {} {} {}", num(p[0]), num(p[1]), num(p[2])).unwrap();
            at.insert(s.index, next);
            next += 1;
        }
        for (&(i, j), &v00) in &at {
            let (Some(&v10), Some(&v11), Some(&v01)) =
                (at.get(&(i + 1, j)), at.get(&(i + 1, j + 1)), at.get(&(i, j + 1)))
            else {
                continue;
            };
            writeln!(out, "f {v00} {v10} {v11}").unwrap();
            writeln!(out, "f {v00} {v11} {v01}").unwrap();
        }
    }
    out
}
