//! Summary tables: rows are samplers, columns are CFG scales (or schedule
//! labels), cells hold the group's mean stability score to four decimals.

use difflab_core::{aggregate_report, MetricsReport, RunKey};

use crate::error::{CliError, Result};
use crate::persist::RunArtifacts;

/// Aggregates stored runs into the grouped metrics report.
pub fn build_report(runs: &[RunArtifacts]) -> Result<MetricsReport> {
    if runs.is_empty() {
        return Err(CliError::EmptySelection("no runs to report".into()));
    }
    let keyed: Vec<(RunKey, difflab_core::EnergyScores)> = runs
        .iter()
        .map(|r| (r.config.run_key(), r.scores))
        .collect();
    Ok(aggregate_report(&keyed)?)
}

/// Formats a score to 4 decimals with round-half-even applied to the
/// shortest decimal representation, so `0.99985` prints as `0.9998`.
/// Plain `{:.4}` would round the binary expansion instead (the nearest
/// f64 to 0.99985 sits just above the tie) and print `0.9999`.
pub fn format_score(v: f64) -> String {
    let repr = format!("{v}");
    let (sign, digits) = match repr.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", repr.as_str()),
    };
    if digits.contains(['e', 'E', 'n', 'i']) {
        // Exponential or non-finite forms fall back to plain formatting;
        // scores live in (0, 1] so this branch is never hit for real cells.
        return format!("{v:.4}");
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (digits.to_string(), String::new()),
    };
    if frac_part.len() <= 4 {
        return format!("{sign}{int_part}.{frac_part:0<4}");
    }
    let kept: Vec<u8> = frac_part.as_bytes()[..4].iter().map(|b| b - b'0').collect();
    let next = frac_part.as_bytes()[4] - b'0';
    let tail_nonzero = frac_part.as_bytes()[5..].iter().any(|&b| b != b'0');
    let round_up = match next.cmp(&5) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => tail_nonzero || kept[3] % 2 == 1,
    };
    let mut kept = kept;
    let mut int_digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    if round_up {
        let mut carry = 1u8;
        for d in kept.iter_mut().rev() {
            let sum = *d + carry;
            *d = sum % 10;
            carry = sum / 10;
            if carry == 0 {
                break;
            }
        }
        if carry > 0 {
            for d in int_digits.iter_mut().rev() {
                let sum = *d + carry;
                *d = sum % 10;
                carry = sum / 10;
                if carry == 0 {
                    break;
                }
            }
            if carry > 0 {
                int_digits.insert(0, carry);
            }
        }
    }
    let int_str: String = int_digits.iter().map(|d| (d + b'0') as char).collect();
    let frac_str: String = kept.iter().map(|d| (d + b'0') as char).collect();
    format!("{sign}{int_str}.{frac_str}")
}

/// Column order: numeric scales ascending, then other labels alphabetically.
fn sorted_columns(report: &MetricsReport) -> Vec<String> {
    let mut numeric: Vec<(f64, String)> = Vec::new();
    let mut labelled: Vec<String> = Vec::new();
    for g in &report.groups {
        let scale = g.key.scale.clone();
        if numeric.iter().any(|(_, s)| *s == scale) || labelled.contains(&scale) {
            continue;
        }
        match scale.parse::<f64>() {
            Ok(v) => numeric.push((v, scale)),
            Err(_) => labelled.push(scale),
        }
    }
    numeric.sort_by(|a, b| a.0.total_cmp(&b.0));
    labelled.sort();
    numeric
        .into_iter()
        .map(|(_, s)| s)
        .chain(labelled)
        .collect()
}

fn sorted_rows(report: &MetricsReport) -> Vec<String> {
    let mut rows: Vec<String> = report
        .groups
        .iter()
        .map(|g| g.key.sampler.clone())
        .collect();
    rows.sort();
    rows.dedup();
    rows
}

/// Renders the aligned text table and the machine-readable CSV. Cells are
/// the mean stability score formatted to 4 decimals; missing combinations
/// show "-".
pub fn summary_table(report: &MetricsReport) -> (String, String) {
    let columns = sorted_columns(report);
    let rows = sorted_rows(report);

    let cell = |sampler: &str, scale: &str| -> String {
        report
            .find(sampler, scale)
            .map(|g| format_score(g.mean.s_stab))
            .unwrap_or_else(|| "-".to_string())
    };

    let mut widths: Vec<usize> = columns.iter().map(|c| c.len().max(6)).collect();
    let row_header_width = rows
        .iter()
        .map(|r| r.len())
        .max()
        .unwrap_or(7)
        .max("sampler".len());
    for (j, col) in columns.iter().enumerate() {
        for row in &rows {
            widths[j] = widths[j].max(cell(row, col).len());
        }
        widths[j] = widths[j].max(col.len());
    }

    let mut text = String::new();
    text.push_str(&format!("{:<row_header_width$}", "sampler"));
    for (j, col) in columns.iter().enumerate() {
        text.push_str(&format!("  {:>w$}", col, w = widths[j]));
    }
    text.push('\n');
    for row in &rows {
        text.push_str(&format!("{row:<row_header_width$}"));
        for (j, col) in columns.iter().enumerate() {
            text.push_str(&format!("  {:>w$}", cell(row, col), w = widths[j]));
        }
        text.push('\n');
    }

    let mut csv = String::new();
    csv.push_str("sampler");
    for col in &columns {
        csv.push(',');
        csv.push_str(col);
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(row);
        for col in &columns {
            csv.push(',');
            csv.push_str(&cell(row, col));
        }
        csv.push('\n');
    }

    (text, csv)
}
