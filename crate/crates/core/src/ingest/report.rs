//! Comma-separated report tables.
//!
//! Every report has a fixed header row, LF line endings and rows sorted by
//! `(bot_id, publisher_id, k)`. Reals are written with 12 significant digits
//! (shortest form, `%.12g` style); counts are written as integers. Tables
//! whose ratios are backed by counts are rebuilt from the counts on read, and
//! the rendered ratios are checked against them.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{QuoteStyle, ReaderBuilder, Terminator, WriterBuilder};

use crate::bias::{BiasReport, BiasRow, ScatterRow, ScatterTable};
use crate::error::{Error, Result};
use crate::metrics::{CurveRow, CurveTable, ExposureRow, ExposureTable};
use crate::sim::{TruthRow, TruthTable};
use crate::types::{BotId, PublisherId};

/// Renders a real with 12 significant digits, trailing zeros removed.
///
/// Exponents below −5 or above 11 use scientific notation (`1.5e-7`).
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-5..12).contains(&exponent) {
        return format!("{}e{exponent}", trim_zeros(mantissa));
    }
    let decimals = (11 - exponent) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A table that can be written to and read back from a CSV report.
pub trait ReportTable: Sized {
    /// Column names, in file order.
    const HEADER: &'static [&'static str];

    /// Rendered rows, each with [`Self::HEADER`]`.len()` fields, in canonical order.
    fn to_records(&self) -> Vec<Vec<String>>;

    fn from_records(records: &[Record]) -> Result<Self, FieldError>;
}

/// One parsed CSV row with its 1-based line number.
#[derive(Debug, Clone)]
pub struct Record {
    pub line: usize,
    pub fields: Vec<String>,
}

/// Field-level failure raised while rebuilding a table.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

struct Fields<'a> {
    record: &'a Record,
    header: &'static [&'static str],
}

impl<'a> Fields<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> FieldError {
        FieldError {
            line: self.record.line,
            field: self.header[column].to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, column: usize) -> &'a str {
        &self.record.fields[column]
    }

    fn parse<T: FromStr>(&self, column: usize, what: &str) -> Result<T, FieldError> {
        let raw = self.raw(column);
        raw.parse()
            .map_err(|_| self.err(column, format!("expected {what}, got '{raw}'")))
    }

    fn real(&self, column: usize) -> Result<f64, FieldError> {
        self.parse(column, "a decimal number")
    }

    fn int<T: FromStr>(&self, column: usize) -> Result<T, FieldError> {
        self.parse(column, "a nonnegative integer")
    }

    fn id(&self, column: usize) -> Result<String, FieldError> {
        let raw = self.raw(column);
        if raw.is_empty() {
            return Err(self.err(column, "must not be empty"));
        }
        Ok(raw.to_string())
    }

    /// Checks a rendered ratio against the value recomputed from counts.
    fn derived(&self, column: usize, expected: f64) -> Result<(), FieldError> {
        let want = format_decimal(expected);
        if self.raw(column) == want {
            Ok(())
        } else {
            Err(self.err(
                column,
                format!("'{}' disagrees with the counts (expected {want})", self.raw(column)),
            ))
        }
    }
}

fn sort_key<'a>(bot: &'a BotId, publisher: &'a PublisherId, k: u32) -> (&'a str, &'a str, u32) {
    (bot.as_str(), publisher.as_str(), k)
}

impl ReportTable for ExposureTable {
    const HEADER: &'static [&'static str] = &[
        "bot_id",
        "publisher_id",
        "k",
        "occupancy",
        "visibility",
        "normalized_occupancy",
        "effective_rate",
        "impressions",
        "unique_posts",
        "visible_snapshots",
        "snapshots",
    ];

    fn to_records(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<&ExposureRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| sort_key(&a.bot_id, &a.publisher_id, a.k).cmp(&sort_key(&b.bot_id, &b.publisher_id, b.k)));
        rows.into_iter()
            .map(|r| {
                vec![
                    r.bot_id.to_string(),
                    r.publisher_id.to_string(),
                    r.k.to_string(),
                    format_decimal(r.occupancy()),
                    format_decimal(r.visibility()),
                    format_decimal(r.normalized_occupancy()),
                    format_decimal(r.effective_rate()),
                    r.impressions.to_string(),
                    r.unique_posts.to_string(),
                    r.visible_snapshots.to_string(),
                    r.snapshots.to_string(),
                ]
            })
            .collect()
    }

    fn from_records(records: &[Record]) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            let f = Fields {
                record,
                header: Self::HEADER,
            };
            let row = ExposureRow {
                bot_id: f.id(0)?.into(),
                publisher_id: f.id(1)?.into(),
                k: f.int(2)?,
                impressions: f.int(7)?,
                unique_posts: f.int(8)?,
                visible_snapshots: f.int(9)?,
                snapshots: f.int(10)?,
            };
            if row.k < 1 {
                return Err(f.err(2, "K must be ≥ 1"));
            }
            if row.snapshots < 1 {
                return Err(f.err(10, "must be ≥ 1"));
            }
            f.derived(3, row.occupancy())?;
            f.derived(4, row.visibility())?;
            f.derived(5, row.normalized_occupancy())?;
            f.derived(6, row.effective_rate())?;
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

impl ReportTable for CurveTable {
    const HEADER: &'static [&'static str] = &[
        "bot_id",
        "publisher_id",
        "k",
        "normalized_occupancy",
        "impressions",
        "snapshots",
    ];

    fn to_records(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<&CurveRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| sort_key(&a.bot_id, &a.publisher_id, a.k).cmp(&sort_key(&b.bot_id, &b.publisher_id, b.k)));
        rows.into_iter()
            .map(|r| {
                vec![
                    r.bot_id.to_string(),
                    r.publisher_id.to_string(),
                    r.k.to_string(),
                    format_decimal(r.normalized_occupancy()),
                    r.impressions.to_string(),
                    r.snapshots.to_string(),
                ]
            })
            .collect()
    }

    fn from_records(records: &[Record]) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            let f = Fields {
                record,
                header: Self::HEADER,
            };
            let row = CurveRow {
                bot_id: f.id(0)?.into(),
                publisher_id: f.id(1)?.into(),
                k: f.int(2)?,
                impressions: f.int(4)?,
                snapshots: f.int(5)?,
            };
            if row.k < 1 {
                return Err(f.err(2, "K must be ≥ 1"));
            }
            if row.snapshots < 1 {
                return Err(f.err(5, "must be ≥ 1"));
            }
            f.derived(3, row.normalized_occupancy())?;
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

impl ReportTable for BiasReport {
    const HEADER: &'static [&'static str] = &[
        "bot_id",
        "publisher_id",
        "k",
        "n_model",
        "n_unfiltered",
        "bias",
        "boot_mean",
        "ci_low",
        "ci_high",
        "replicates",
        "level",
        "in_catalog",
    ];

    fn to_records(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<&BiasRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| sort_key(&a.bot_id, &a.publisher_id, a.k).cmp(&sort_key(&b.bot_id, &b.publisher_id, b.k)));
        rows.into_iter()
            .map(|r| {
                vec![
                    r.bot_id.to_string(),
                    r.publisher_id.to_string(),
                    r.k.to_string(),
                    format_decimal(r.n_model),
                    format_decimal(r.n_unfiltered),
                    format_decimal(r.bias),
                    format_decimal(r.boot_mean),
                    format_decimal(r.ci_low),
                    format_decimal(r.ci_high),
                    r.replicates.to_string(),
                    format_decimal(r.level),
                    r.in_catalog.to_string(),
                ]
            })
            .collect()
    }

    fn from_records(records: &[Record]) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            let f = Fields {
                record,
                header: Self::HEADER,
            };
            let row = BiasRow {
                bot_id: f.id(0)?.into(),
                publisher_id: f.id(1)?.into(),
                k: f.int(2)?,
                n_model: f.real(3)?,
                n_unfiltered: f.real(4)?,
                bias: f.real(5)?,
                boot_mean: f.real(6)?,
                ci_low: f.real(7)?,
                ci_high: f.real(8)?,
                replicates: f.int(9)?,
                level: f.real(10)?,
                in_catalog: f.parse(11, "true or false")?,
            };
            if row.ci_low > row.ci_high {
                return Err(f.err(7, "ci_low exceeds ci_high"));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

impl ReportTable for ScatterTable {
    const HEADER: &'static [&'static str] = &["bot_id", "publisher_id", "k", "n_measured", "n_model"];

    fn to_records(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<&ScatterRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| sort_key(&a.bot_id, &a.publisher_id, a.k).cmp(&sort_key(&b.bot_id, &b.publisher_id, b.k)));
        rows.into_iter()
            .map(|r| {
                vec![
                    r.bot_id.to_string(),
                    r.publisher_id.to_string(),
                    r.k.to_string(),
                    format_decimal(r.n_measured),
                    format_decimal(r.n_model),
                ]
            })
            .collect()
    }

    fn from_records(records: &[Record]) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            let f = Fields {
                record,
                header: Self::HEADER,
            };
            rows.push(ScatterRow {
                bot_id: f.id(0)?.into(),
                publisher_id: f.id(1)?.into(),
                k: f.int(2)?,
                n_measured: f.real(3)?,
                n_model: f.real(4)?,
            });
        }
        Ok(Self { rows })
    }
}

impl ReportTable for TruthTable {
    const HEADER: &'static [&'static str] = &[
        "bot_id",
        "publisher_id",
        "acceptance",
        "creation_rate",
        "effective_rate",
    ];

    fn to_records(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<&TruthRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| sort_key(&a.bot_id, &a.publisher_id, 0).cmp(&sort_key(&b.bot_id, &b.publisher_id, 0)));
        rows.into_iter()
            .map(|r| {
                vec![
                    r.bot_id.to_string(),
                    r.publisher_id.to_string(),
                    format_decimal(r.acceptance),
                    format_decimal(r.creation_rate),
                    format_decimal(r.effective_rate),
                ]
            })
            .collect()
    }

    fn from_records(records: &[Record]) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            let f = Fields {
                record,
                header: Self::HEADER,
            };
            rows.push(TruthRow {
                bot_id: f.id(0)?.into(),
                publisher_id: f.id(1)?.into(),
                acceptance: f.real(2)?,
                creation_rate: f.real(3)?,
                effective_rate: f.real(4)?,
            });
        }
        Ok(Self { rows })
    }
}

/// Serializes a report to bytes in canonical form.
pub fn render_report<T: ReportTable>(table: &T) -> Vec<u8> {
    let mut writer = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .quote_style(QuoteStyle::Necessary)
        .from_writer(Vec::new());
    writer.write_record(T::HEADER).expect("in-memory write");
    for record in table.to_records() {
        writer.write_record(&record).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

pub fn write_report<T: ReportTable>(table: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&render_report(table)).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Parses a report from any reader; `name` labels diagnostics.
pub fn parse_report<T: ReportTable>(input: impl Read, name: &str) -> Result<T> {
    let invalid = |line: usize, field: &str, message: String| Error::Invalid {
        path: name.to_string(),
        line,
        field: field.to_string(),
        message,
    };
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = Vec::new();
    let mut header_seen = false;
    for (idx, result) in reader.records().enumerate() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(idx + 1, |p| p.line() as usize);
            invalid(line, "record", e.to_string())
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        if !header_seen {
            if fields != T::HEADER {
                return Err(invalid(line, "header", format!("expected '{}'", T::HEADER.join(","))));
            }
            header_seen = true;
            continue;
        }
        if fields.len() != T::HEADER.len() {
            return Err(invalid(
                line,
                "record",
                format!("expected {} fields, found {}", T::HEADER.len(), fields.len()),
            ));
        }
        records.push(Record { line, fields });
    }
    if !header_seen {
        return Err(Error::Validation {
            path: name.to_string(),
            message: "missing header row".into(),
        });
    }
    T::from_records(&records).map_err(|e| invalid(e.line, &e.field, e.message))
}

pub fn read_report<T: ReportTable>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_report(std::io::BufReader::new(file), &path.display().to_string())
}
