//! `evolve analyze`: recompute the derived columns of a results CSV and
//! fit the dimension-correction delta where the data allows it.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};

use gpscale::analysis::{fit_f2_delta, k_prime, k_value, ScalingRow};

use crate::csvio;

/// Group rows that differ only in their dimension count; within a group
/// the n = 2 row supplies `D2`.
fn difficulty_key(row: &ScalingRow) -> String {
    let p = &row.params;
    format!(
        "{} set={:?} v={:?} len={:?} bits={:?} p={:?} b={:?} t={:?} s={:?}",
        row.system,
        p.statement_set,
        p.v,
        p.program_length,
        p.n_bits,
        p.p,
        p.b,
        p.termination.map(csvio::fmt_sig6),
        p.scale_base.map(csvio::fmt_sig6),
    )
}

pub fn analyze(csv_path: &Path, delta: f64, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)
        .with_context(|| format!("reading {}", csv_path.display()))?;
    let (hash, mut rows) = csvio::parse_csv(&text)?;

    // D2 lookup per difficulty group.
    let mut d2_by_group: BTreeMap<String, f64> = BTreeMap::new();
    for row in &rows {
        if row.params.n == Some(2) {
            if let Some(d) = row.density {
                d2_by_group.insert(difficulty_key(row), d);
            }
        }
    }

    let mut k_mismatches = 0;
    for row in rows.iter_mut() {
        if let (Some(g), Some(d)) = (row.median_g, row.density) {
            let k = k_value(g, d).map_err(anyhow::Error::msg)?;
            if let Some(stored) = row.k {
                if (stored - k).abs() / k.max(f64::MIN_POSITIVE) > 1e-4 {
                    k_mismatches += 1;
                }
            }
            row.k = Some(k);
        }
        if let Some(n) = row.params.n {
            let d2 = d2_by_group.get(&difficulty_key(row)).copied().or(row.d2);
            if let (Some(g), Some(d2)) = (row.median_g, d2) {
                row.d2 = Some(d2);
                row.kprime = Some(k_prime(g, d2, n as f64, delta).map_err(anyhow::Error::msg)?);
                row.kprime_delta = Some(delta);
            }
        }
    }
    if k_mismatches > 0 {
        eprintln!("warning: {k_mismatches} K value(s) disagreed with G and D beyond 1e-4 and were recomputed");
    }

    // Fit delta over each group with enough distinct dimensions.
    let mut groups: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for row in &rows {
        if let (Some(n), Some(g), Some(d2)) = (row.params.n, row.median_g, row.d2) {
            groups.entry(difficulty_key_without_n(row)).or_default().push((n as f64, g, d2));
        }
    }
    for (key, data) in &groups {
        let distinct: std::collections::BTreeSet<u64> =
            data.iter().map(|(n, _, _)| n.to_bits()).collect();
        if distinct.len() >= 3 {
            match fit_f2_delta(data) {
                Ok(fit) => eprintln!(
                    "delta fit [{key}]: delta={} residual_cv={}",
                    csvio::fmt_sig6(fit.delta),
                    csvio::fmt_sig6(fit.residual_cv)
                ),
                Err(err) => eprintln!("delta fit [{key}]: {err}"),
            }
        }
    }

    let output = csvio::emit_csv(&rows, hash.as_deref());
    match out {
        Some(path) => {
            std::fs::write(path, &output).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{output}"),
    }
    Ok(())
}

fn difficulty_key_without_n(row: &ScalingRow) -> String {
    let p = &row.params;
    format!(
        "{} set={:?} p={:?} b={:?} t={:?} s={:?}",
        row.system,
        p.statement_set,
        p.p,
        p.b,
        p.termination.map(csvio::fmt_sig6),
        p.scale_base.map(csvio::fmt_sig6),
    )
}
