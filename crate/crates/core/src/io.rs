//! Flat serialization of [`PenaltyRecord`]s as CSV and as JSON lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::domain::PenaltyRecord;
use crate::error::{invalid, Result};

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<PenaltyRecord>> {
    let records: Vec<PenaltyRecord> = read_csv(reader)?;
    for r in &records {
        r.validate()?;
        if let Some((x, z)) = r.coordinates() {
            let inside = crate::domain::in_goal_mouth(x, z);
            if inside == (r.outcome == crate::domain::Outcome::OffTarget) {
                log::warn!(
                    "kick {}: outcome flag {:?} disagrees with coordinates ({x:.2}, {z:.2}); keeping the flag",
                    r.kick_id,
                    r.outcome
                );
            }
        }
    }
    Ok(records)
}

pub fn write_records_csv<W: Write>(writer: W, records: &[PenaltyRecord]) -> Result<()> {
    write_csv(writer, records)
}

pub fn read_records_jsonl<R: Read>(reader: R) -> Result<Vec<PenaltyRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PenaltyRecord = serde_json::from_str(&line)
            .map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_records_jsonl<W: Write>(writer: W, records: &[PenaltyRecord]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Load records from a `.csv` or `.jsonl` file, chosen by extension.
pub fn load_records(path: &Path) -> Result<Vec<PenaltyRecord>> {
    let file = File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => read_records_jsonl(file),
        _ => read_records_csv(file),
    }
}

pub fn save_records(path: &Path, records: &[PenaltyRecord]) -> Result<()> {
    let file = File::create(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => write_records_jsonl(file, records),
        _ => write_records_csv(file, records),
    }
}

pub fn read_csv<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Serde derives the header from the first row, so an empty slice writes
/// nothing; see [`write_records_csv_with_header`].
pub fn write_csv<T: Serialize, W: Write>(writer: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Column names of the record CSV schema.
pub const RECORD_COLUMNS: [&str; 18] = [
    "kick_id",
    "match_id",
    "taker_id",
    "keeper_id",
    "minute",
    "is_shootout",
    "shootout_kick_index",
    "shootout_team_kick_index",
    "goal_diff",
    "foot",
    "taker_strategy",
    "end_x",
    "end_z",
    "outcome",
    "keeper_dive_zone",
    "keeper_timing",
    "pressure",
    "date",
];

/// Record CSV with the header always present.
pub fn write_records_csv_with_header<W: Write>(writer: W, records: &[PenaltyRecord]) -> Result<()> {
    if records.is_empty() {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(RECORD_COLUMNS)?;
        wtr.flush()?;
        Ok(())
    } else {
        write_csv(writer, records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::*;
    use proptest::prelude::*;

    fn sample(i: u32) -> PenaltyRecord {
        PenaltyRecord {
            kick_id: format!("k{i}"),
            match_id: "m1".into(),
            taker_id: "t1".into(),
            keeper_id: "g1".into(),
            minute: 120,
            is_shootout: true,
            shootout_kick_index: Some(i + 1),
            shootout_team_kick_index: Some(i / 2 + 1),
            goal_diff: 0,
            foot: Foot::Left,
            taker_strategy: TakerStrategy::Independent,
            end_x: Some(2.1),
            end_z: None,
            outcome: Outcome::Goal,
            keeper_dive_zone: DiveZone::Unknown,
            keeper_timing: DiveTiming::Late,
            pressure: Pressure::High,
            date: chrono::NaiveDate::from_ymd_opt(2021, 3, 4),
        }
    }

    #[test]
    fn csv_uses_empty_for_missing_and_spec_names() {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[sample(0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, RECORD_COLUMNS.join(","));
        assert!(text.lines().nth(1).unwrap().contains("2.1,,goal"));
    }

    #[test]
    fn empty_output_has_header() {
        let mut buf = Vec::new();
        write_records_csv_with_header(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), RECORD_COLUMNS.join(","));
        let back = read_records_csv(RECORD_COLUMNS.join(",").as_bytes()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn jsonl_uses_null() {
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &[sample(3)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"end_z\":null"));
        assert_eq!(read_records_jsonl(text.as_bytes()).unwrap(), vec![sample(3)]);
    }

    proptest! {
        #[test]
        fn csv_round_trip(x in -5.0f64..5.0, z in proptest::option::of(0.0f64..3.0), minute in 0u32..125) {
            let mut r = sample(1);
            r.end_x = Some(x);
            r.end_z = z;
            r.minute = minute;
            let mut buf = Vec::new();
            write_records_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
            let back = read_records_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
