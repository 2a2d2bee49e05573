//! Line-delimited JSON files for snapshots and publisher catalogs.
//!
//! The first line of a canonical file is a header `{"format_version": "..."}`;
//! readers accept files without it. Every following line is one record with
//! keys in a fixed order. Unknown keys are ignored.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::types::{BotId, PostRecord, Snapshot, SnapshotEntry, SnapshotSet, Timestamp};

pub const SNAPSHOTS_FORMAT: &str = "feedaudit-snapshots/1";
pub const CATALOG_FORMAT: &str = "feedaudit-catalog/1";

#[derive(Serialize)]
struct Header<'a> {
    format_version: &'a str,
}

struct LineCtx<'a> {
    path: &'a str,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, field: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Invalid {
            path: self.path.to_string(),
            line: self.line,
            field: field.into(),
            message: message.into(),
        }
    }

    fn field<'v>(&self, obj: &'v Map<String, Value>, prefix: &str, name: &str) -> Result<&'v Value> {
        obj.get(name)
            .ok_or_else(|| self.err(format!("{prefix}{name}"), "missing required field"))
    }

    fn string(&self, obj: &Map<String, Value>, prefix: &str, name: &str) -> Result<String> {
        match self.field(obj, prefix, name)? {
            Value::String(s) if !s.is_empty() => Ok(s.clone()),
            Value::String(_) => Err(self.err(format!("{prefix}{name}"), "must not be empty")),
            _ => Err(self.err(format!("{prefix}{name}"), "must be a string")),
        }
    }

    fn time(&self, obj: &Map<String, Value>, prefix: &str, name: &str) -> Result<Timestamp> {
        let s = self.string(obj, prefix, name)?;
        Timestamp::parse_rfc3339(&s).map_err(|m| self.err(format!("{prefix}{name}"), m))
    }

    fn count(&self, obj: &Map<String, Value>, prefix: &str, name: &str) -> Result<Option<u64>> {
        match obj.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| self.err(format!("{prefix}{name}"), "must be a nonnegative integer")),
        }
    }
}

/// Splits a file into parsed JSON objects, validating the optional header.
fn parse_lines(input: impl BufRead, path: &str, format: &str) -> Result<Vec<(usize, Map<String, Value>)>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ctx = LineCtx { path, line: line_no };
        let value: Value = serde_json::from_str(&line).map_err(|e| ctx.err("record", format!("invalid JSON: {e}")))?;
        let Value::Object(obj) = value else {
            return Err(ctx.err("record", "must be a JSON object"));
        };
        if let Some(version) = obj.get("format_version") {
            if !out.is_empty() {
                return Err(ctx.err("format_version", "header must be the first record"));
            }
            let found = version.as_str().unwrap_or_default();
            if found != format {
                return Err(Error::Version {
                    path: path.to_string(),
                    found: version.as_str().map_or_else(|| version.to_string(), str::to_string),
                    expected: format.to_string(),
                });
            }
            continue;
        }
        out.push((line_no, obj));
    }
    Ok(out)
}

fn parse_entry(ctx: &LineCtx<'_>, idx: usize, value: &Value) -> Result<SnapshotEntry> {
    let prefix = format!("entries[{idx}].");
    let obj = value
        .as_object()
        .ok_or_else(|| ctx.err(format!("entries[{idx}]"), "must be a JSON object"))?;
    let position = match ctx.field(obj, &prefix, "position")? {
        Value::Number(n) => match n.as_i64() {
            Some(p) if p < 1 => return Err(ctx.err(format!("{prefix}position"), "position must be ≥ 1")),
            Some(p) => u32::try_from(p).map_err(|_| ctx.err(format!("{prefix}position"), "position too large"))?,
            None => return Err(ctx.err(format!("{prefix}position"), "must be an integer")),
        },
        _ => return Err(ctx.err(format!("{prefix}position"), "must be an integer")),
    };
    Ok(SnapshotEntry {
        position,
        post_id: ctx.string(obj, &prefix, "post_id")?.into(),
        publisher_id: ctx.string(obj, &prefix, "publisher_id")?.into(),
        publication_time: ctx.time(obj, &prefix, "publication_time")?,
        likes: ctx.count(obj, &prefix, "likes")?,
        shares: ctx.count(obj, &prefix, "shares")?,
    })
}

/// Parses snapshot lines from any reader; `path` labels diagnostics.
pub fn parse_snapshots(input: impl BufRead, path: &str) -> Result<SnapshotSet> {
    let mut snapshots = Vec::new();
    let mut last_time: HashMap<BotId, Timestamp> = HashMap::new();
    for (line, obj) in parse_lines(input, path, SNAPSHOTS_FORMAT)? {
        let ctx = LineCtx { path, line };
        let bot_id: BotId = ctx.string(&obj, "", "bot_id")?.into();
        let snapshot_time = ctx.time(&obj, "", "snapshot_time")?;
        let entries = match ctx.field(&obj, "", "entries")? {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, v)| parse_entry(&ctx, i, v))
                .collect::<Result<Vec<_>>>()?,
            _ => return Err(ctx.err("entries", "must be an array")),
        };
        let snapshot = Snapshot {
            bot_id,
            snapshot_time,
            entries,
        };
        snapshot.check().map_err(|(field, message)| ctx.err(field, message))?;
        if let Some(prev) = last_time.insert(snapshot.bot_id.clone(), snapshot_time) {
            if snapshot_time < prev {
                return Err(ctx.err(
                    "snapshot_time",
                    format!("snapshot times of bot '{}' must be nondecreasing", snapshot.bot_id),
                ));
            }
        }
        snapshots.push(snapshot);
    }
    if snapshots.is_empty() {
        return Err(Error::Validation {
            path: path.to_string(),
            message: "no snapshots".into(),
        });
    }
    SnapshotSet::new(snapshots)
}

pub fn read_snapshots(path: impl AsRef<Path>) -> Result<SnapshotSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_snapshots(BufReader::new(file), &path.display().to_string())
}

/// Parses catalog lines from any reader; `path` labels diagnostics.
pub fn parse_catalog(input: impl BufRead, path: &str) -> Result<Vec<PostRecord>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (line, obj) in parse_lines(input, path, CATALOG_FORMAT)? {
        let ctx = LineCtx { path, line };
        let record = PostRecord {
            post_id: ctx.string(&obj, "", "post_id")?.into(),
            publisher_id: ctx.string(&obj, "", "publisher_id")?.into(),
            publication_time: ctx.time(&obj, "", "publication_time")?,
        };
        if !ids.insert(record.post_id.clone()) {
            return Err(ctx.err("post_id", format!("duplicate post_id '{}'", record.post_id)));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_catalog(path: impl AsRef<Path>) -> Result<Vec<PostRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(BufReader::new(file), &path.display().to_string())
}

fn write_lines<'a, T: Serialize + 'a>(
    out: &mut impl Write,
    format: &str,
    records: impl IntoIterator<Item = &'a T>,
) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, &Header { format_version: format })?;
    out.write_all(b"\n")?;
    for record in records {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Canonical bytes of a snapshot file: bots in id order, each bot's snapshots in time order.
pub fn render_snapshots(set: &SnapshotSet) -> Vec<u8> {
    let mut out = Vec::new();
    write_lines(&mut out, SNAPSHOTS_FORMAT, set.iter()).expect("in-memory write");
    out
}

pub fn render_catalog(records: &[PostRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_lines(&mut out, CATALOG_FORMAT, records).expect("in-memory write");
    out
}

fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    fill(&mut out)
        .and_then(|()| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_snapshots(set: &SnapshotSet, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), |out| write_lines(out, SNAPSHOTS_FORMAT, set.iter()))
}

pub fn write_catalog(records: &[PostRecord], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), |out| write_lines(out, CATALOG_FORMAT, records))
}
