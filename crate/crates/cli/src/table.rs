use nrep_core::polytope::format_significant;

/// Fixed six significant digits for table cells.
pub fn num(v: f64) -> String {
    format_significant(v, 6)
}

pub fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn list(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", ")
}

pub fn orbitals(set: &[usize]) -> String {
    let parts: Vec<String> = set.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Left-aligned first column, right-aligned rest.
pub fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, cell) in cells.iter().enumerate() {
            let pad = width[i] - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().take(cols).map(String::as_str).collect()));
    }
    out
}
