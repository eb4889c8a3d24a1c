use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use poispred_core::Tolerance;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Key of the only field allowed to differ between identical runs.
pub const TIMESTAMP_KEY: &str = "generated_at_unix";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Reproduction metadata embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerance: Tolerance,
    pub generated_at_unix: u64,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(command: String, tolerance: Tolerance) -> Self {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed: None,
            tolerance,
            generated_at_unix: now,
            notes: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// 17 significant digits, locale independent.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Table(Table),
    Json(Value),
}

#[derive(Debug, Clone)]
pub struct Document {
    pub provenance: Provenance,
    pub body: Body,
}

impl Document {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let p = &self.provenance;
        let t = &p.tolerance;
        let mut out = String::new();
        out.push_str(&format!("# tool: {} {}\n", p.tool, p.version));
        out.push_str(&format!("# command: {}\n", p.command));
        out.push_str(&format!("# {}: {}\n", TIMESTAMP_KEY, p.generated_at_unix));
        out.push_str(&format!(
            "# tolerance: abs_tol={} rel_tol={} tail_mass={}\n",
            num(t.abs_tol),
            num(t.rel_tol),
            num(t.tail_mass)
        ));
        if let Some(seed) = p.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for n in &p.notes {
            out.push_str(&format!("# {n}\n"));
        }
        match &self.body {
            Body::Table(table) => {
                out.push_str(&table.header.join(","));
                out.push('\n');
                for row in &table.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            Body::Json(v) => {
                out.push_str(&serde_json::to_string(v).expect("json values serialize"));
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("metadata".into(), serde_json::to_value(&self.provenance).expect("provenance serializes"));
        match &self.body {
            Body::Table(table) => {
                obj.insert("columns".into(), json!(table.header));
                obj.insert("rows".into(), json!(table.rows));
            }
            Body::Json(Value::Object(m)) => {
                for (k, v) in m {
                    obj.insert(k.clone(), v.clone());
                }
            }
            Body::Json(v) => {
                obj.insert("result".into(), v.clone());
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
        s.push('\n');
        s
    }
}

/// Writes to `path`, or standard output for `-`.
pub fn emit(text: &str, path: &str) -> std::io::Result<()> {
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(text.as_bytes())?;
        lock.flush()
    } else {
        std::fs::write(path, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(std::f64::consts::LN_2), "6.9314718055994529e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        let back: f64 = num(0.1 + 0.2).parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
    }

    #[test]
    fn csv_has_comment_header_then_table() {
        let mut p = Provenance::new("figure1".into(), Tolerance::default());
        p.note("exposures: a=1 b=1");
        let mut t = Table::new(&["mu", "d", "delta"]);
        t.rows.push(vec![num(0.0), "3".into(), num(0.25)]);
        let doc = Document { provenance: p, body: Body::Table(t) };
        let text = doc.render(Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.iter().take_while(|l| l.starts_with('#')).count() >= 4);
        assert!(lines.contains(&"mu,d,delta"));
        let json: Value = serde_json::from_str(&doc.render(Format::Json)).unwrap();
        assert_eq!(json["columns"][2], "delta");
        assert!(json["metadata"][TIMESTAMP_KEY].is_u64());
    }
}
