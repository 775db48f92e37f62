//! Output documents: `#`-prefixed metadata lines followed by either a CSV
//! table or JSON records, one per line. UTF-8, LF line endings.

use std::fmt::Write as _;

use serde_json::Value;

/// Shortest round-trip rendering of a binary64 value.
pub fn fmt_f64(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(x).to_string()
}

/// Provenance written into every output header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("tool".to_string(), format!("uniqmax {}", self.version)),
            ("subcommand".to_string(), self.subcommand.clone()),
        ];
        out.extend(self.params.iter().cloned());
        out.push(("timestamp".to_string(), self.timestamp.clone()));
        out
    }
}

/// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> String {
    if let Ok(fixed) = std::env::var("SOURCE_DATE_EPOCH") {
        return fixed;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Csv {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    Json(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub meta: Vec<(String, String)>,
    pub body: Body,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Document {
    pub fn csv(manifest: &RunManifest, header: &[&str]) -> Self {
        Document {
            meta: manifest.meta_lines(),
            body: Body::Csv {
                header: header.iter().map(|s| s.to_string()).collect(),
                rows: Vec::new(),
            },
        }
    }

    pub fn json(manifest: &RunManifest) -> Self {
        Document {
            meta: manifest.meta_lines(),
            body: Body::Json(Vec::new()),
        }
    }

    pub fn add_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        match &mut self.body {
            Body::Csv { rows, .. } => rows.push(row),
            Body::Json(_) => panic!("push_row on a JSON document"),
        }
    }

    pub fn push_record(&mut self, record: Value) {
        match &mut self.body {
            Body::Json(records) => records.push(record),
            Body::Csv { .. } => panic!("push_record on a CSV document"),
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.data());
        out
    }

    /// Everything after the metadata lines.
    pub fn data(&self) -> String {
        match &self.body {
            Body::Csv { header, rows } => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(header).expect("in-memory write");
                for row in rows {
                    w.write_record(row).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
            }
            Body::Json(records) => {
                let mut out = String::new();
                for r in records {
                    out.push_str(&serde_json::to_string(r).expect("finite JSON"));
                    out.push('\n');
                }
                out
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut meta = Vec::new();
        let mut rest = text;
        let mut line_no = 0;
        while let Some(line) = rest.strip_prefix("# ") {
            line_no += 1;
            let (line, tail) = line.split_once('\n').unwrap_or((line, ""));
            let (k, v) = line.split_once('=').ok_or_else(|| ParseError::Line {
                line: line_no,
                message: format!("metadata line without '=': {line:?}"),
            })?;
            meta.push((k.to_string(), v.to_string()));
            rest = tail;
        }
        let body = if rest.starts_with('{') || rest.is_empty() {
            let mut records = Vec::new();
            for line in rest.lines() {
                line_no += 1;
                let v: Value = serde_json::from_str(line).map_err(|e| ParseError::Line {
                    line: line_no,
                    message: e.to_string(),
                })?;
                records.push(v);
            }
            Body::Json(records)
        } else {
            let mut r = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(rest.as_bytes());
            let header = r.headers()?.iter().map(str::to_string).collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                rows.push(rec?.iter().map(str::to_string).collect());
            }
            Body::Csv { header, rows }
        };
        Ok(Document { meta, body })
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Drops `#` metadata lines, keeping only data rows.
pub fn strip_meta(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn manifest() -> RunManifest {
        let mut m = RunManifest::new("pmf");
        m.timestamp = "0".into();
        m.param("model", "classic").param("n_games", 2);
        m
    }

    #[test]
    fn csv_document_layout() {
        let mut doc = Document::csv(&manifest(), &["scores", "count"]);
        doc.push_row(vec!["0,1,2".into(), "6".into()]);
        let text = doc.serialize();
        assert_eq!(
            text,
            "# tool=uniqmax 0.1.0\n# subcommand=pmf\n# model=classic\n# n_games=2\n# timestamp=0\nscores,count\n\"0,1,2\",6\n"
        );
        assert_eq!(Document::parse(&text).unwrap(), doc);
        assert_eq!(strip_meta(&text), "scores,count\n\"0,1,2\",6\n");
    }

    #[test]
    fn json_document_keeps_key_order() {
        let mut doc = Document::json(&manifest());
        doc.push_record(json!({"op": "mc-unique", "n": 4, "estimate": 0.5, "ci": [0.4, 0.6]}));
        let text = doc.serialize();
        assert!(
            text.ends_with("{\"op\":\"mc-unique\",\"n\":4,\"estimate\":0.5,\"ci\":[0.4,0.6]}\n")
        );
        assert_eq!(Document::parse(&text).unwrap().serialize(), text);
    }

    #[test]
    fn floats_render_shortest() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(62.40562485363029), "62.40562485363029");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(0.0), "0.0");
    }

    proptest! {
        #[test]
        fn csv_round_trips(
            cells in proptest::collection::vec(proptest::collection::vec("[a-z0-9,/. \"-]{0,8}", 3), 0..6),
            xs in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3),
        ) {
            let mut doc = Document::csv(&manifest(), &["a", "b", "c"]);
            for row in cells {
                doc.push_row(row);
            }
            doc.push_row(xs.iter().map(|x| fmt_f64(*x)).collect());
            let text = doc.serialize();
            let again = Document::parse(&text).unwrap();
            prop_assert_eq!(again.serialize(), text);
            if let Body::Csv { rows, .. } = &again.body {
                let back: Vec<f64> = rows.last().unwrap().iter().map(|s| s.parse().unwrap()).collect();
                prop_assert_eq!(back, xs);
            }
        }
    }
}
