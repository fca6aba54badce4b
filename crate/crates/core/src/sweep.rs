//! Tables of per-M measurements with CSV persistence.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Column headers of the resolvent asymptotics table.
pub const RESOLVENT_COLUMNS: [&str; 12] = [
    "M",
    "lambda_prime_re",
    "lambda_prime_im",
    "beta_re",
    "beta_im",
    "gamma_re",
    "gamma_im",
    "cz_norm_residual",
    "margin",
    "comb1",
    "comb2",
    "comb3",
];

/// Column headers of the weak-type table.
pub const WEAK_COLUMNS: [&str; 6] = ["M", "family", "weak_l1", "l1", "l2", "support_radius"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// 17 significant digits, so every value round-trips through text.
pub fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: u64,
    /// One cell per column after `M`.
    pub cells: Vec<Cell>,
    pub status: RowStatus,
}

/// Rows keyed by strictly increasing `M`. The CSV form carries a trailing
/// `status` column (`ok` or the failure message).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    columns: Vec<String>,
    rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `columns` starts with `M`.
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        SweepTable {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn push(&mut self, m: u64, cells: Vec<Cell>, status: RowStatus) -> Result<()> {
        if cells.len() + 1 != self.columns.len() {
            return Err(Error::Internal(format!(
                "row has {} cells, table has {} columns",
                cells.len() + 1,
                self.columns.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if m <= last.m {
                return Err(Error::InvalidParams(format!(
                    "M must be strictly increasing: {m} after {}",
                    last.m
                )));
            }
        }
        self.rows.push(SweepRow { m, cells, status });
        Ok(())
    }

    /// A failed row: every numeric column is NaN, text columns keep `fill`.
    pub fn push_failure(&mut self, m: u64, fill: &[(usize, String)], err: &Error) -> Result<()> {
        let mut cells = vec![Cell::Num(f64::NAN); self.columns.len() - 1];
        for (i, s) in fill {
            cells[*i] = Cell::Text(s.clone());
        }
        self.push(m, cells, RowStatus::Failed(err.to_string()))
    }

    fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(M, value)` pairs of a numeric column over the rows that succeeded.
    pub fn series(&self, name: &str) -> Option<Vec<(u64, f64)>> {
        let i = self.column_index(name)?.checked_sub(1)?;
        Some(
            self.rows
                .iter()
                .filter(|r| r.status == RowStatus::Ok)
                .filter_map(|r| r.cells[i].as_f64().map(|v| (r.m, v)))
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let mut header = self.columns.clone();
        header.push("status".into());
        out.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.m.to_string()];
            rec.extend(r.cells.iter().map(Cell::render));
            rec.push(match &r.status {
                RowStatus::Ok => "ok".into(),
                RowStatus::Failed(msg) => format!("failed: {msg}"),
            });
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }

    /// Cells that parse as numbers become [`Cell::Num`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if header.len() < 2 || header[0] != "M" || header.last().map(String::as_str) != Some("status") {
            return Err(Error::Parse("sweep table needs M first and status last".into()));
        }
        let mut table = SweepTable::new(&header[..header.len() - 1]);
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let m: u64 = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad M value {:?}", &rec[0])))?;
            let n = rec.len();
            let cells = rec
                .iter()
                .take(n - 1)
                .skip(1)
                .map(|c| match c.parse::<f64>() {
                    Ok(x) => Cell::Num(x),
                    Err(_) => Cell::Text(c.to_string()),
                })
                .collect();
            let status = match &rec[n - 1] {
                "ok" => RowStatus::Ok,
                s => RowStatus::Failed(s.trim_start_matches("failed: ").to_string()),
            };
            table.push(m, cells, status)?;
        }
        Ok(table)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_increasing_m() {
        let mut t = SweepTable::new(&["M", "x"]);
        t.push(4, vec![Cell::Num(1.0)], RowStatus::Ok).unwrap();
        assert!(t.push(4, vec![Cell::Num(1.0)], RowStatus::Ok).is_err());
        assert!(t.push(2, vec![Cell::Num(1.0)], RowStatus::Ok).is_err());
        assert!(t.push(8, vec![], RowStatus::Ok).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = SweepTable::new(&WEAK_COLUMNS);
        let row = vec![
            Cell::Text("H".into()),
            Cell::Num(0.5),
            Cell::Num(1.0),
            Cell::Num(2.0),
            Cell::Num(3.0),
        ];
        t.push(1024, row, RowStatus::Ok).unwrap();
        t.push_failure(2048, &[(0, "H".into())], &Error::Internal("x".into())).unwrap();
        let s = t.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "M,family,weak_l1,l1,l2,support_radius,status");
        assert_eq!(
            lines.next().unwrap(),
            "1024,H,5.0000000000000000e-1,1.0000000000000000e0,2.0000000000000000e0,3.0000000000000000e0,ok"
        );
        assert!(lines.next().unwrap().starts_with("2048,H,NaN"));
        assert!(!s.contains('\r'));
        assert_eq!(t.series("weak_l1").unwrap(), vec![(1024, 0.5)]);
    }

    proptest! {
        #[test]
        fn numbers_round_trip(vals in prop::collection::vec(-1e300f64..1e300, 1..20)) {
            let mut t = SweepTable::new(&["M", "v"]);
            for (i, v) in vals.iter().enumerate() {
                t.push(1 << i, vec![Cell::Num(*v)], RowStatus::Ok).unwrap();
            }
            let back = SweepTable::read_csv(t.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
