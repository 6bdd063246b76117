//! Artifact writers: profile CSVs, JSON documents and gnuplot-style plot data.
//!
//! Floats are printed in Rust's shortest round-trip form, so identical
//! values give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::foliation::Leaf;
use crate::profile::ProfileState;
use crate::report::CheckReport;

pub const CSV_HEADER: &str = "t,f,p";
pub const PLOTDATA_FILE: &str = "foliation.dat";
pub const PLOTDATA_README: &str = "foliation.README.md";
/// Samples on the horizon half circle.
const HORIZON_SAMPLES: usize = 181;

pub fn profile_csv(states: &[ProfileState]) -> String {
    let mut s = String::with_capacity(32 * (states.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for st in states {
        let _ = writeln!(s, "{},{},{}", st.t, st.f, st.p);
    }
    s
}

pub fn write_profile_csv(path: &Path, states: &[ProfileState]) -> Result<()> {
    fs::write(path, profile_csv(states))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Leaf indices in ascending z; ties keep input order.
pub fn z_order(leaves: &[Leaf]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..leaves.len()).collect();
    idx.sort_by(|&a, &b| leaves[a].z.total_cmp(&leaves[b].z));
    idx
}

/// Whitespace-separated (t, f) blocks, one per leaf in ascending z, then the
/// horizon half circle t = ρ_h sin θ, f = ρ_h cos θ when a horizon exists.
/// Blocks are separated by two blank lines.
pub fn plotdata(leaves: &[Leaf], horizon: Option<f64>) -> String {
    let mut s = String::new();
    let mut blocks = 0;
    for i in z_order(leaves) {
        let leaf = &leaves[i];
        if blocks > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# leaf z={}", leaf.z);
        for st in &leaf.view {
            let _ = writeln!(s, "{} {}", st.t, st.f);
        }
        blocks += 1;
    }
    if let Some(rh) = horizon {
        if blocks > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# horizon radius={rh}");
        for k in 0..HORIZON_SAMPLES {
            let th = std::f64::consts::PI * k as f64 / (HORIZON_SAMPLES - 1) as f64;
            let _ = writeln!(s, "{} {}", rh * th.sin(), rh * th.cos());
        }
    }
    s
}

pub fn plotdata_readme(leaves: usize, horizon: Option<f64>) -> String {
    let mut s = String::new();
    s.push_str("# foliation.dat\n\n");
    s.push_str("Meridian sections of the leaves Sigma_z in the (t, x_n) half plane, t = |x'|.\n\n");
    s.push_str("- Two whitespace-separated columns per line: column 1 is t, column 2 is the height f(t).\n");
    s.push_str("- Lines starting with `#` label the block that follows.\n");
    s.push_str("- Blocks are separated by two blank lines (gnuplot `index` addressing).\n");
    let _ = writeln!(s, "- Blocks 0..{}: one leaf each, ordered by ascending z, sampled on [0, T_view].", leaves.saturating_sub(1));
    if let Some(rh) = horizon {
        let _ = writeln!(
            s,
            "- Block {leaves}: the horizon |x| = {rh} as the parametric half circle (sin θ, cos θ)·{rh}, θ in [0, π]."
        );
    }
    s.push_str("\nExample: `plot 'foliation.dat' index 0 with lines, '' index 1 with lines`.\n");
    s
}

/// Writes the plot data and its README into `dir`.
pub fn emit_plotdata(dir: &Path, leaves: &[Leaf], horizon: Option<f64>) -> Result<Vec<PathBuf>> {
    let data = dir.join(PLOTDATA_FILE);
    let readme = dir.join(PLOTDATA_README);
    fs::write(&data, plotdata(leaves, horizon))?;
    fs::write(&readme, plotdata_readme(leaves.len(), horizon))?;
    Ok(vec![data, readme])
}

/// Every object in a JSON document that deserializes as a CheckReport.
pub fn collect_reports(value: &serde_json::Value, out: &mut Vec<CheckReport>) {
    match value {
        serde_json::Value::Object(map) => {
            if map.contains_key("id") && map.contains_key("anchor") && map.contains_key("passed") {
                if let Ok(r) = serde_json::from_value::<CheckReport>(value.clone()) {
                    out.push(r);
                    return;
                }
            }
            for v in map.values() {
                collect_reports(v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                collect_reports(v, out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_exact_header() {
        let s = profile_csv(&[ProfileState { t: 0.0, f: 1.0, p: 0.0 }, ProfileState { t: 0.5, f: 1.0, p: -0.25 }]);
        assert_eq!(s, "t,f,p\n0,1,0\n0.5,1,-0.25\n");
    }

    #[test]
    fn readme_mentions_every_block() {
        let r = plotdata_readme(3, Some(1.0));
        assert!(r.contains("Blocks 0..2") && r.contains("Block 3"));
    }

    #[test]
    fn reports_found_at_any_depth() {
        let rep = CheckReport::new("a.b", "x", 0.0, 1.0);
        let doc = serde_json::json!({"criteria": [{"reports": [rep]}], "other": {"id": 3}});
        let mut out = vec![];
        collect_reports(&doc, &mut out);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "a.b");
    }
}
