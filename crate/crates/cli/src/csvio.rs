//! CSV output for scaling rows.
//!
//! Layout: one comment line carrying a hash of the generating config,
//! then a header, then one row per parameter point. Floats are written
//! with six significant digits; empty cells mean "not applicable".

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use gpscale::analysis::{DensityMethod, RowParams, ScalingRow};

pub const HEADER: [&str; 18] = [
    "system",
    "statement_set",
    "v",
    "program_length",
    "n_bits",
    "n",
    "p",
    "b",
    "termination",
    "scale_base",
    "evolutions",
    "median_G",
    "D",
    "D_method",
    "D_stderr",
    "K",
    "Kprime_delta",
    "Kprime",
];

/// Format with 6 significant digits, using plain decimal notation for
/// moderate exponents and scientific notation otherwise.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=8).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        trimmed
    } else {
        let s = format!("{x:.5e}");
        // Trim trailing zeros in the mantissa: 2.49000e-38 -> 2.49e-38.
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn cell_f64(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

fn row_fields(row: &ScalingRow) -> Vec<String> {
    vec![
        row.system.clone(),
        row.params.statement_set.map(|v| v.to_string()).unwrap_or_default(),
        row.params.v.map(|v| v.to_string()).unwrap_or_default(),
        row.params.program_length.map(|v| v.to_string()).unwrap_or_default(),
        row.params.n_bits.map(|v| v.to_string()).unwrap_or_default(),
        row.params.n.map(|v| v.to_string()).unwrap_or_default(),
        row.params.p.map(|v| v.to_string()).unwrap_or_default(),
        row.params.b.map(|v| v.to_string()).unwrap_or_default(),
        cell_f64(row.params.termination),
        cell_f64(row.params.scale_base),
        row.evolutions.to_string(),
        cell_f64(row.median_g),
        cell_f64(row.density),
        row.density_method.map(|m| m.to_string()).unwrap_or_default(),
        cell_f64(row.density_stderr),
        cell_f64(row.k),
        cell_f64(row.kprime_delta),
        cell_f64(row.kprime),
    ]
}

/// Serialize rows (with the config-hash comment when given).
pub fn emit_csv(rows: &[ScalingRow], config_hash: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(hash) = config_hash {
        let _ = writeln!(out, "# config_hash={hash}");
    }
    let _ = writeln!(out, "{}", HEADER.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row_fields(row).join(","));
    }
    out
}

fn parse_opt<T: std::str::FromStr>(s: &str, what: &str) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<T>()
        .map(Some)
        .map_err(|_| anyhow!("bad {what} value {s:?}"))
}

/// Parse a CSV produced by [`emit_csv`]; returns the config hash (when
/// present) and the rows.
pub fn parse_csv(text: &str) -> Result<(Option<String>, Vec<ScalingRow>)> {
    let mut lines = text.lines().peekable();
    let mut config_hash = None;
    if let Some(first) = lines.peek() {
        if let Some(rest) = first.strip_prefix("# config_hash=") {
            config_hash = Some(rest.to_string());
            lines.next();
        }
    }
    let header = lines.next().ok_or_else(|| anyhow!("missing CSV header"))?;
    if header != HEADER.join(",") {
        bail!("unexpected CSV header {header:?}");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != HEADER.len() {
            bail!("row {}: expected {} fields, got {}", i + 1, HEADER.len(), fields.len());
        }
        let density_method = match fields[13] {
            "" => None,
            "monte_carlo" => Some(DensityMethod::MonteCarlo),
            "analytic" => Some(DensityMethod::Analytic),
            other => bail!("row {}: unknown density method {other:?}", i + 1),
        };
        rows.push(ScalingRow {
            system: fields[0].to_string(),
            params: RowParams {
                statement_set: parse_opt(fields[1], "statement_set")?,
                v: parse_opt(fields[2], "v")?,
                program_length: parse_opt(fields[3], "program_length")?,
                n_bits: parse_opt(fields[4], "n_bits")?,
                n: parse_opt(fields[5], "n")?,
                p: parse_opt(fields[6], "p")?,
                b: parse_opt(fields[7], "b")?,
                termination: parse_opt(fields[8], "termination")?,
                scale_base: parse_opt(fields[9], "scale_base")?,
            },
            evolutions: fields[10].parse()?,
            median_g: parse_opt(fields[11], "median_G")?,
            density: parse_opt(fields[12], "D")?,
            density_method,
            density_stderr: parse_opt(fields[14], "D_stderr")?,
            d2: None,
            k: parse_opt(fields[15], "K")?,
            kprime_delta: parse_opt(fields[16], "Kprime_delta")?,
            kprime: parse_opt(fields[17], "Kprime")?,
        });
    }
    Ok((config_hash, rows))
}

/// FNV-1a over the canonicalized config text; enough to notice a config
/// change between resumed runs.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ScalingRow {
        ScalingRow::compute(
            "highest",
            RowParams { n: Some(2), p: Some(50), termination: Some(2.0), ..Default::default() },
            100,
            Some(459.0),
            Some(4.0e-4),
            Some(DensityMethod::Analytic),
            None,
            Some(4.0e-4),
            Some(0.6),
        )
        .unwrap()
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(242.0), "242");
        assert_eq!(fmt_sig6(771.5), "771.5");
        assert_eq!(fmt_sig6(0.01301), "0.01301");
        assert_eq!(fmt_sig6(1.313e-3), "0.001313");
        assert_eq!(fmt_sig6(2.49e-38), "2.49e-38");
        assert_eq!(fmt_sig6(1.2345678), "1.23457");
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(-8.77), "-8.77");
        assert_eq!(fmt_sig6(123456789.0), "123457000");
    }

    #[test]
    fn header_only_for_empty_rows() {
        let text = emit_csv(&[], Some("abc"));
        assert_eq!(text, format!("# config_hash=abc\n{}\n", HEADER.join(",")));
        let (hash, rows) = parse_csv(&text).unwrap();
        assert_eq!(hash.as_deref(), Some("abc"));
        assert!(rows.is_empty());
    }

    #[test]
    fn round_trip_at_six_digits() {
        let rows = vec![sample_row()];
        let text = emit_csv(&rows, None);
        let (_, parsed) = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        let re_emitted = emit_csv(&parsed, None);
        assert_eq!(text, re_emitted);
    }

    #[test]
    fn k_column_recomputable_from_g_and_d() {
        let rows = vec![sample_row()];
        let text = emit_csv(&rows, None);
        let (_, parsed) = parse_csv(&text).unwrap();
        let row = &parsed[0];
        let recomputed = row.median_g.unwrap() * row.density.unwrap().sqrt();
        let stored = row.k.unwrap();
        assert!(
            (recomputed - stored).abs() / stored < 1e-4,
            "recomputed {recomputed} vs stored {stored}"
        );
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        assert_eq!(config_hash("abc"), config_hash("abc"));
        assert_ne!(config_hash("abc"), config_hash("abd"));
    }
}
