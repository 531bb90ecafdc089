//! Number formatting shared by the CSV and rendered tables.

/// Scientific notation with 5 significant digits and a two-digit exponent,
/// e.g. `1.8993e-07`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Convergence rate with 4 decimals; empty when indeterminate.
pub fn rate(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(|v| format!("{v:.4}")).unwrap_or_default()
}

/// Left-aligned columns separated by two spaces.
pub fn render_rows(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
