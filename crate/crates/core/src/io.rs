//! Comma-separated dataset files.
//!
//! Tabular files start with the header
//! `device_id,signal_power,total_power,rsrq,snr,energy_last_packet`; sequence
//! files with `device_id,location_id,a0,...,a{L-1}`. Reals are written in their
//! shortest round-trip decimal form, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{CsiTrace, LabeledDataset, Records, TabularFingerprint, TABULAR_ATTRIBUTES};
use crate::error::{Error, Result};

pub fn tabular_header() -> String {
    std::iter::once("device_id")
        .chain(TABULAR_ATTRIBUTES)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn sequence_header(trace_length: usize) -> String {
    let mut cols = vec!["device_id".to_string(), "location_id".to_string()];
    cols.extend((0..trace_length).map(|k| format!("a{k}")));
    cols.join(",")
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &LabeledDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_to(&mut w, dataset).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_to<W: Write>(w: &mut W, dataset: &LabeledDataset) -> std::io::Result<()> {
    match dataset.records() {
        Records::Tabular(records) => {
            writeln!(w, "{}", tabular_header())?;
            for r in records {
                write!(w, "{}", r.device_id)?;
                for v in r.values() {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        Records::Sequence(records) => {
            writeln!(w, "{}", sequence_header(dataset.num_attributes()))?;
            for r in records {
                write!(w, "{},{}", r.device_id, r.location_id)?;
                for v in r.amplitudes() {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_from(file)
}

/// Parses a dataset; `num_devices` becomes one past the largest device id.
pub fn read_from<R: Read>(reader: R) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(1, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") == tabular_header() {
        read_tabular(rdr)
    } else if header.len() > 2 && header.join(",") == sequence_header(header.len() - 2) {
        read_sequence(rdr, header.len() - 2)
    } else {
        Err(Error::Parse {
            line: 1,
            message: format!("unrecognized header `{}`", header.join(",")),
        })
    }
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(line);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_row(record: &csv::StringRecord, arity: usize) -> Result<(usize, Vec<f64>)> {
    let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
    if record.len() != arity {
        return Err(Error::Parse {
            line,
            message: format!("expected {arity} values, found {}", record.len()),
        });
    }
    let device_id = record[0].parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("device_id `{}` is not a non-negative integer", &record[0]),
    })?;
    let values = record
        .iter()
        .skip(1)
        .map(|field| {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` is not a number"),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((device_id, values))
}

fn with_line<T>(record: &csv::StringRecord, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Parse {
        line: record.position().map(|p| p.line() as usize).unwrap_or(0),
        message: e.to_string(),
    })
}

fn read_tabular<R: Read>(mut rdr: csv::Reader<R>) -> Result<LabeledDataset> {
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(0, e))?;
        let (device_id, values) = parse_row(&row, 1 + TABULAR_ATTRIBUTES.len())?;
        let values: [f64; 5] = values.try_into().expect("arity checked");
        records.push(with_line(&row, TabularFingerprint::new(values, device_id))?);
    }
    let num_devices = records.iter().map(|r| r.device_id + 1).max().unwrap_or(0);
    LabeledDataset::tabular(records, num_devices)
}

fn read_sequence<R: Read>(mut rdr: csv::Reader<R>, trace_length: usize) -> Result<LabeledDataset> {
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(0, e))?;
        let (device_id, mut values) = parse_row(&row, 2 + trace_length)?;
        let location = values.remove(0);
        if location < 0.0 || location.fract() != 0.0 {
            return with_line(
                &row,
                Err(Error::InvalidInput(format!("location_id `{location}` is not a non-negative integer"))),
            );
        }
        records.push(with_line(&row, CsiTrace::new(values, device_id, location as usize))?);
    }
    let num_devices = records.iter().map(|r| r.device_id + 1).max().unwrap_or(0);
    LabeledDataset::sequence(records, num_devices, trace_length)
}
