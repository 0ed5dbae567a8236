use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{geo, GeoPost};
use crate::error::{Error, RecordError, Result};

/// Reads one JSON value per non-blank line, collecting bad lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, Vec<RecordError>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    let mut rejects = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => items.push(v),
            Err(e) => rejects.push(RecordError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((items, rejects))
}

/// Geolocated posts; out-of-range coordinates count as malformed.
pub fn read_geo_jsonl(path: &Path) -> Result<(Vec<GeoPost>, Vec<RecordError>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut posts = Vec::new();
    let mut rejects = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<GeoPost>(&line)
            .map_err(|e| e.to_string())
            .and_then(|p| {
                if geo::valid_coordinates(p.lat, p.lon) {
                    Ok(p)
                } else {
                    Err(format!("coordinates out of range: ({}, {})", p.lat, p.lon))
                }
            });
        match parsed {
            Ok(p) => posts.push(p),
            Err(message) => rejects.push(RecordError { line: i + 1, message }),
        }
    }
    Ok((posts, rejects))
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
