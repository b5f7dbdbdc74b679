//! CSV output: comma separated, header row, LF line endings.

use std::io::Write;

use crate::function::GridFunction;
use crate::seminorms::SeminormReport;

/// A header row plus rows of cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt(*v)));
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Shortest round-trip representation, so reruns compare byte for byte.
pub fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn seminorm_table<'a>(reports: impl IntoIterator<Item = &'a SeminormReport>) -> Table {
    let mut t = Table::new(["name", "s", "p", "l", "lambda", "delta", "value", "error_estimate"]);
    for r in reports {
        t.push([
            r.name.to_string(),
            fmt(r.s),
            fmt(r.p),
            r.l.to_string(),
            fmt(r.lambda),
            fmt(r.delta),
            fmt(r.value),
            fmt(r.quadrature_error),
        ]);
    }
    t
}

pub fn solution_table(u: &GridFunction) -> Table {
    let mut t = Table::new(["node_x", "value"]);
    for (x, v) in u.mesh().nodes().zip(u.values()) {
        t.push_numbers(&[x, *v]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Domain1D, UniformMesh};

    #[test]
    fn writes_header_and_rows() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers(&[1.0, 0.1]);
        t.push_numbers(&[f64::INFINITY, -2.5e-20]);
        assert_eq!(t.to_csv_string(), "a,b\n1.0,0.1\ninf,-2.5e-20\n");
    }

    #[test]
    fn solution_rows_match_nodes() {
        let mesh = UniformMesh::new(Domain1D::new(0.0, 1.0).unwrap(), 4).unwrap();
        let u = GridFunction::sample_zero_outside(mesh, |x| x * (1.0 - x)).unwrap();
        let t = solution_table(&u);
        assert_eq!(t.rows.len(), u.values().len());
        assert_eq!(t.rows[2][0], "0.5");
    }
}
