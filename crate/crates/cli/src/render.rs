//! CSV and JSON writers for the command results.
//!
//! Both formats carry the same content: a key-value metadata block plus
//! either a table (curves, scaling points) or a flat result map (half-point,
//! single-point breakdowns). Numbers are printed with nine significant
//! digits; non-finite values become the tokens `inf`, `-inf`, and `nan`
//! (quoted strings in JSON, which has no spelling for them).

use subray::SweepTable64;

/// Magic first line of every CSV document.
const CSV_MAGIC: &str = "# subray-qfi v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One typed value of a scalar-result command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Num(f64),
    Count(u64),
    Flag(bool),
}

/// A renderable command result.
pub enum Document {
    Table(SweepTable64),
    Scalars {
        metadata: Vec<(String, String)>,
        result: Vec<(String, Field)>,
    },
}

impl Document {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_MAGIC);
        out.push('\n');
        match self {
            Document::Table(table) => {
                push_metadata_line(&mut out, &table.metadata);
                out.push_str(&table.parameter_label);
                for series in &table.series {
                    out.push(',');
                    out.push_str(&series.label);
                }
                out.push('\n');
                let rows = table.series.first().map_or(0, |s| s.points.len());
                for i in 0..rows {
                    out.push_str(&fmt_num(table.series[0].points[i].0));
                    for series in &table.series {
                        out.push(',');
                        out.push_str(&fmt_num(series.points[i].1));
                    }
                    out.push('\n');
                }
            }
            Document::Scalars { metadata, result } => {
                push_metadata_line(&mut out, metadata);
                out.push_str("key,value\n");
                for (key, field) in result {
                    out.push_str(key);
                    out.push(',');
                    out.push_str(&field.to_csv());
                    out.push('\n');
                }
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        match self {
            Document::Table(table) => {
                out.push_str(&format!(
                    "  \"parameter_label\": {},\n",
                    json_string(&table.parameter_label)
                ));
                push_metadata_json(&mut out, &table.metadata);
                out.push_str("  \"series\": [\n");
                for (i, series) in table.series.iter().enumerate() {
                    out.push_str("    {\n");
                    out.push_str(&format!(
                        "      \"label\": {},\n",
                        json_string(&series.label)
                    ));
                    out.push_str("      \"points\": [\n");
                    for (j, &(x, y)) in series.points.iter().enumerate() {
                        let sep = if j + 1 < series.points.len() { "," } else { "" };
                        out.push_str(&format!(
                            "        [{}, {}]{sep}\n",
                            fmt_json_num(x),
                            fmt_json_num(y)
                        ));
                    }
                    out.push_str("      ]\n");
                    let sep = if i + 1 < table.series.len() { "," } else { "" };
                    out.push_str(&format!("    }}{sep}\n"));
                }
                out.push_str("  ]\n");
            }
            Document::Scalars { metadata, result } => {
                push_metadata_json(&mut out, metadata);
                out.push_str("  \"result\": {\n");
                for (i, (key, field)) in result.iter().enumerate() {
                    let sep = if i + 1 < result.len() { "," } else { "" };
                    out.push_str(&format!(
                        "    {}: {}{sep}\n",
                        json_string(key),
                        field.to_json()
                    ));
                }
                out.push_str("  }\n");
            }
        }
        out.push_str("}\n");
        out
    }
}

impl Field {
    fn to_csv(self) -> String {
        match self {
            Field::Num(v) => fmt_num(v),
            Field::Count(n) => n.to_string(),
            Field::Flag(b) => b.to_string(),
        }
    }

    fn to_json(self) -> String {
        match self {
            Field::Num(v) => fmt_json_num(v),
            Field::Count(n) => n.to_string(),
            Field::Flag(b) => b.to_string(),
        }
    }
}

fn push_metadata_line(out: &mut String, metadata: &[(String, String)]) {
    out.push('#');
    for (key, value) in metadata {
        out.push(' ');
        out.push_str(key);
        out.push('=');
        out.push_str(value);
    }
    out.push('\n');
}

fn push_metadata_json(out: &mut String, metadata: &[(String, String)]) {
    out.push_str("  \"metadata\": {\n");
    for (i, (key, value)) in metadata.iter().enumerate() {
        let sep = if i + 1 < metadata.len() { "," } else { "" };
        out.push_str(&format!(
            "    {}: {}{sep}\n",
            json_string(key),
            json_string(value)
        ));
    }
    out.push_str("  },\n");
}

/// Nine significant digits; `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.8e}")
    }
}

/// JSON has no non-finite numbers, so those become the same tokens quoted.
fn fmt_json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        format!("\"{}\"", fmt_num(v))
    }
}

fn json_string(s: &str) -> String {
    let mut quoted = String::with_capacity(s.len() + 2);
    quoted.push('"');
    for c in s.chars() {
        match c {
            '"' => quoted.push_str("\\\""),
            '\\' => quoted.push_str("\\\\"),
            '\n' => quoted.push_str("\\n"),
            '\r' => quoted.push_str("\\r"),
            '\t' => quoted.push_str("\\t"),
            c if (c as u32) < 0x20 => quoted.push_str(&format!("\\u{:04x}", c as u32)),
            c => quoted.push(c),
        }
    }
    quoted.push('"');
    quoted
}

#[cfg(test)]
mod tests {
    use super::*;
    use subray::analysis::SweepSeries;

    fn sample_table() -> SweepTable64 {
        SweepTable64 {
            parameter_label: "s_over_xr".to_string(),
            series: vec![SweepSeries {
                label: "eta_n=1".to_string(),
                points: vec![(0.0, 0.25), (1.0, f64::INFINITY), (2.0, f64::NAN)],
            }],
            metadata: vec![("command".to_string(), "curve".to_string())],
        }
    }

    #[test]
    fn csv_layout_is_magic_metadata_header_rows() {
        let text = Document::Table(sample_table()).render(OutputFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# subray-qfi v1");
        assert_eq!(lines[1], "# command=curve");
        assert_eq!(lines[2], "s_over_xr,eta_n=1");
        assert_eq!(lines[3], "0.00000000e0,2.50000000e-1");
        assert_eq!(lines[4], "1.00000000e0,inf");
        assert_eq!(lines[5], "2.00000000e0,nan");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn json_table_is_well_formed() {
        let text = Document::Table(sample_table()).render(OutputFormat::Json);
        assert!(text.contains("\"parameter_label\": \"s_over_xr\""));
        assert!(text.contains("\"command\": \"curve\""));
        assert!(text.contains("[1.00000000e0, \"inf\"]"));
        assert!(text.contains("[2.00000000e0, \"nan\"]"));
        // Balanced braces and brackets, as a cheap well-formedness check.
        assert_eq!(text.matches('{').count(), text.matches('}').count());
        assert_eq!(text.matches('[').count(), text.matches(']').count());
    }

    #[test]
    fn scalars_render_in_both_formats() {
        let doc = Document::Scalars {
            metadata: vec![("command".to_string(), "s-half".to_string())],
            result: vec![
                ("crossing_found".to_string(), Field::Flag(true)),
                ("s_half_over_xr".to_string(), Field::Num(0.2795)),
                ("iterations".to_string(), Field::Count(35)),
            ],
        };
        let csv = doc.render(OutputFormat::Csv);
        assert!(csv.contains("key,value\n"));
        assert!(csv.contains("crossing_found,true\n"));
        assert!(csv.contains("s_half_over_xr,2.79500000e-1\n"));
        assert!(csv.contains("iterations,35\n"));
        let json = doc.render(OutputFormat::Json);
        assert!(json.contains("\"crossing_found\": true"));
        assert!(json.contains("\"iterations\": 35"));
        assert!(json.contains("\"s_half_over_xr\": 2.79500000e-1"));
    }

    #[test]
    fn significant_digits_and_tokens() {
        assert_eq!(fmt_num(0.25), "2.50000000e-1");
        assert_eq!(fmt_num(-1.0 / 3.0), "-3.33333333e-1");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_json_num(f64::NAN), "\"nan\"");
    }

    #[test]
    fn json_strings_are_escaped() {
        assert_eq!(json_string("plain"), "\"plain\"");
        assert_eq!(json_string("a\"b\\c"), "\"a\\\"b\\\\c\"");
        assert_eq!(json_string("x\ny"), "\"x\\ny\"");
    }
}
