//! CSV tables: a `#` comment block echoing the resolved configuration, a
//! header row, and numbers at nine significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// A cell: numbers are formatted uniformly, text is quoted when needed.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_sig9(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// `%.9g`: fixed notation for decimal exponents in `[-4, 9)`, scientific
/// otherwise, trailing zeros removed.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, comments: &[String], w: W) -> anyhow::Result<()> {
        let mut w = w;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::render))?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Main table plus named companions written next to it as
/// `<stem>_<suffix>.csv`, or to stdout as consecutive sections.
pub struct Output {
    pub main: Table,
    pub extra: Vec<(String, Table)>,
}

impl Output {
    pub fn single(main: Table) -> Self {
        Self { main, extra: Vec::new() }
    }

    pub fn emit(&self, comments: &[String], out: Option<&Path>) -> anyhow::Result<()> {
        match out {
            Some(path) => {
                write_file(path, &self.main, comments)?;
                for (suffix, t) in &self.extra {
                    write_file(&companion_path(path, suffix), t, comments)?;
                }
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                self.main.write(comments, &mut lock)?;
                for (suffix, t) in &self.extra {
                    writeln!(lock)?;
                    let mut c = vec![format!("section: {suffix}")];
                    c.extend_from_slice(comments);
                    t.write(&c, &mut lock)?;
                }
            }
        }
        Ok(())
    }
}

fn write_file(path: &Path, table: &Table, comments: &[String]) -> anyhow::Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut buf = std::io::BufWriter::new(f);
    table.write(comments, &mut buf)?;
    buf.flush()?;
    Ok(())
}

pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.593939393939), "0.593939394");
        assert_eq!(format_sig9(-1.0923076923), "-1.09230769");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.002985), "0.002985");
        assert_eq!(format_sig9(1.5e-11), "1.5e-11");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig9(9.999999999e-6), "1e-05");
        assert_eq!(format_sig9(f64::NAN), "NaN");
    }

    #[test]
    fn quoting_and_comments() {
        let mut t = Table::new(["a", "error"]);
        t.push(vec![1.0.into(), "bad [1, 2]".into()]);
        let mut buf = Vec::new();
        t.write(&["x = 1".into()], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# x = 1\na,error\n1,\"bad [1, 2]\"\n");
    }

    #[test]
    fn companion_names() {
        assert_eq!(companion_path(Path::new("/tmp/run.csv"), "locus"), PathBuf::from("/tmp/run_locus.csv"));
        assert_eq!(companion_path(Path::new("run"), "sweep"), PathBuf::from("run_sweep.csv"));
    }
}
