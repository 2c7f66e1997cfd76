//! Fixed-format MPS export.

use std::fmt::Write as _;

use crate::reachlp::lp::{LinearProgram, Relation, Sense};

fn number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        plain
    } else {
        format!("{v:.5E}")
    }
}

fn row_name(r: usize) -> String {
    format!("R{r:07}")
}

fn col_name(j: usize) -> String {
    format!("C{j:07}")
}

/// Writes `lp` in fixed-format MPS. Maximization problems are written with a
/// negated objective, noted in a comment line.
pub fn to_fixed_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let name: String = name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    if lp.sense() == Sense::Maximize {
        out.push_str("* objective negated: original problem maximizes\n");
    }
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (r, row) in lp.constraints().iter().enumerate() {
        let tag = match row.relation {
            Relation::Eq => "E",
            Relation::Le => "L",
            Relation::Ge => "G",
        };
        let _ = writeln!(out, " {tag:<2} {}", row_name(r));
    }
    let mut by_col: Vec<Vec<(String, f64)>> = vec![Vec::new(); lp.num_vars()];
    let sign = if lp.sense() == Sense::Maximize { -1.0 } else { 1.0 };
    for (j, &c) in lp.objective().iter().enumerate() {
        if c != 0.0 {
            by_col[j].push(("COST".into(), sign * c));
        }
    }
    for (r, row) in lp.constraints().iter().enumerate() {
        for &(j, v) in &row.coeffs {
            by_col[j].push((row_name(r), v));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in by_col.iter().enumerate() {
        if entries.is_empty() {
            // keep the column declared so bounds stay meaningful
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col_name(j), "COST", "0");
            continue;
        }
        for pair in entries.chunks(2) {
            let mut line = format!("    {:<8}  {:<8}  {:>12}", col_name(j), pair[0].0, number(pair[0].1));
            if let Some((n, v)) = pair.get(1) {
                let _ = write!(line, "   {:<8}  {:>12}", n, number(*v));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("RHS\n");
    let rhs: Vec<(String, f64)> = lp
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, row)| row.rhs != 0.0)
        .map(|(r, row)| (row_name(r), row.rhs))
        .collect();
    for pair in rhs.chunks(2) {
        let mut line = format!("    {:<8}  {:<8}  {:>12}", "RHS", pair[0].0, number(pair[0].1));
        if let Some((n, v)) = pair.get(1) {
            let _ = write!(line, "   {:<8}  {:>12}", n, number(*v));
        }
        out.push_str(&line);
        out.push('\n');
    }
    let fixed: Vec<usize> = (0..lp.num_vars()).filter(|&j| lp.is_fixed_zero(j)).collect();
    if !fixed.is_empty() {
        out.push_str("BOUNDS\n");
        for j in fixed {
            let _ = writeln!(out, " FX {:<8}  {:<8}  {:>12}", "BND", col_name(j), "0");
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_field_widths() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 3.0);
        lp.fix_zero(1);
        let text = to_fixed_mps(&lp, "tiny lp");
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.contains(&"NAME          tinylp"));
        assert!(lines.contains(&" L  R0000000"));
        assert!(lines.iter().any(|l| l.starts_with("    C0000000  COST") && l.contains("-1")));
        assert!(lines.iter().any(|l| l.starts_with(" FX BND       C0000001")));
        assert_eq!(lines.last(), Some(&"ENDATA"));
    }
}
