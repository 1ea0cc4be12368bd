//! Wide-format surveillance table ingestion.
//!
//! One disease per file. The header is `index,district,province,W1,...,WW`
//! and each following row carries one district's weekly counts. Empty cells
//! are "not reported"; `0` is a reported zero.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

const FIXED_COLUMNS: [&str; 3] = ["index", "district", "province"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionRecord {
    /// 1-based ordinal, equal to the row position in the source file.
    pub index: usize,
    pub district_name: String,
    pub province: String,
}

impl RegionRecord {
    /// Label in the `54 BOGO,EXTREME NORD` style.
    pub fn label(&self) -> String {
        format!("{} {},{}", self.index, self.district_name, self.province)
    }
}

impl fmt::Display for RegionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Region registry plus a region × week grid of optional counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveillanceTable {
    regions: Vec<RegionRecord>,
    weeks: usize,
    counts: Vec<Vec<Option<u64>>>,
}

impl SurveillanceTable {
    /// Builds a table from `(district, province, counts)` rows, assigning
    /// indices in row order.
    pub fn from_rows<I, S1, S2>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S1, S2, Vec<Option<u64>>)>,
        S1: Into<String>,
        S2: Into<String>,
    {
        let mut regions = Vec::new();
        let mut counts = Vec::new();
        let mut weeks = None;
        for (row, (district, province, cells)) in rows.into_iter().enumerate() {
            let district: String = district.into();
            if district.trim().is_empty() {
                return Err(Error::Cell {
                    row: row + 1,
                    column: "district".into(),
                    message: "district name is empty".into(),
                });
            }
            match weeks {
                None => weeks = Some(cells.len()),
                Some(w) if w != cells.len() => {
                    return Err(Error::Cell {
                        row: row + 1,
                        column: "*".into(),
                        message: format!("expected {w} week cells, found {}", cells.len()),
                    })
                }
                Some(_) => {}
            }
            regions.push(RegionRecord {
                index: row + 1,
                district_name: district.trim().to_string(),
                province: province.into().trim().to_string(),
            });
            counts.push(cells);
        }
        let weeks = weeks.unwrap_or(0);
        if weeks == 0 {
            return Err(Error::Format {
                column: 4,
                message: "table has no week columns".into(),
            });
        }
        Ok(Self {
            regions,
            weeks,
            counts,
        })
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn n_weeks(&self) -> usize {
        self.weeks
    }

    pub fn regions(&self) -> &[RegionRecord] {
        &self.regions
    }

    /// Region by 1-based index.
    pub fn region(&self, index: usize) -> Result<&RegionRecord> {
        self.check_index(index)?;
        Ok(&self.regions[index - 1])
    }

    /// Raw optional counts for a region (1-based index).
    pub fn row(&self, index: usize) -> Result<&[Option<u64>]> {
        self.check_index(index)?;
        Ok(&self.counts[index - 1])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&RegionRecord, &[Option<u64>])> {
        self.regions
            .iter()
            .zip(self.counts.iter().map(Vec::as_slice))
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.regions.len() {
            return Err(Error::RegionOutOfRange {
                index,
                n: self.regions.len(),
            });
        }
        Ok(())
    }

    /// Serializes back to the wide CSV layout. Absent cells are written empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((1..=self.weeks).map(week_label));
        wtr.write_record(&header)?;
        for (region, cells) in self.rows() {
            let mut rec = vec![
                region.index.to_string(),
                region.district_name.clone(),
                region.province.clone(),
            ];
            rec.extend(
                cells
                    .iter()
                    .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
            );
            wtr.write_record(&rec)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

pub fn week_label(week: usize) -> String {
    format!("W{week}")
}

/// Parses a wide-format CSV document into a [`SurveillanceTable`].
pub fn parse_wide_csv(text: &str) -> Result<SurveillanceTable> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Format {
                column: 1,
                message: "missing header row".into(),
            })
        }
    };
    let weeks = check_header(&header)?;

    let mut seen = HashSet::new();
    let mut regions = Vec::new();
    let mut counts = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            // blank line
            continue;
        }
        if rec.len() != weeks + FIXED_COLUMNS.len() {
            return Err(Error::Cell {
                row,
                column: "*".into(),
                message: format!(
                    "expected {} cells, found {}",
                    weeks + FIXED_COLUMNS.len(),
                    rec.len()
                ),
            });
        }
        let index: usize = rec[0].trim().parse().map_err(|_| Error::Cell {
            row,
            column: "index".into(),
            message: format!("invalid region index {:?}", &rec[0]),
        })?;
        if !seen.insert(index) {
            return Err(Error::DuplicateIndex { index, row });
        }
        let expected = regions.len() + 1;
        if index != expected {
            return Err(Error::Cell {
                row,
                column: "index".into(),
                message: format!("index {index} out of sequence, expected {expected}"),
            });
        }
        let district = rec[1].trim();
        if district.is_empty() {
            return Err(Error::Cell {
                row,
                column: "district".into(),
                message: "district name is empty".into(),
            });
        }
        let cells = (0..weeks)
            .map(|w| parse_count(&rec[w + FIXED_COLUMNS.len()], row, w + 1))
            .collect::<Result<Vec<_>>>()?;
        regions.push(RegionRecord {
            index,
            district_name: district.to_string(),
            province: rec[2].trim().to_string(),
        });
        counts.push(cells);
    }

    Ok(SurveillanceTable {
        regions,
        weeks,
        counts,
    })
}

fn check_header(header: &csv::StringRecord) -> Result<usize> {
    for (col, expected) in FIXED_COLUMNS.iter().enumerate() {
        match header.get(col) {
            Some(name) if name.trim().eq_ignore_ascii_case(expected) => {}
            Some(name) => {
                return Err(Error::Format {
                    column: col + 1,
                    message: format!("expected {expected:?}, found {name:?}"),
                })
            }
            None => {
                return Err(Error::Format {
                    column: col + 1,
                    message: format!("missing column {expected:?}"),
                })
            }
        }
    }
    let weeks = header.len() - FIXED_COLUMNS.len();
    if weeks == 0 {
        return Err(Error::Format {
            column: FIXED_COLUMNS.len() + 1,
            message: "no week columns".into(),
        });
    }
    for w in 1..=weeks {
        let col = w + FIXED_COLUMNS.len() - 1;
        let name = header[col].trim();
        if !name.eq_ignore_ascii_case(&week_label(w)) {
            return Err(Error::Format {
                column: col + 1,
                message: format!("expected \"W{w}\", found {name:?}"),
            });
        }
    }
    Ok(weeks)
}

fn parse_count(cell: &str, row: usize, week: usize) -> Result<Option<u64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<u64>() {
        Ok(v) => Ok(Some(v)),
        Err(_) => {
            let message = if cell.parse::<i64>().is_ok() {
                format!("negative count {cell}")
            } else {
                format!("not a non-negative integer: {cell:?}")
            };
            Err(Error::Cell {
                row,
                column: week_label(week),
                message,
            })
        }
    }
}

/// Missing-data finding for one region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub region_index: usize,
    pub district: String,
    /// 1-based week ordinals of absent cells.
    pub missing_weeks: Vec<usize>,
    /// Set when every cell in the row is absent.
    pub fatal: bool,
}

impl Finding {
    pub fn missing_count(&self) -> usize {
        self.missing_weeks.len()
    }

    pub fn week_labels(&self) -> Vec<String> {
        self.missing_weeks.iter().map(|&w| week_label(w)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QualityReport {
    pub findings: Vec<Finding>,
}

impl QualityReport {
    pub fn has_fatal(&self) -> bool {
        self.findings.iter().any(|f| f.fatal)
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Reports missing cells per region. Rows with no present count are fatal.
pub fn validate(table: &SurveillanceTable) -> QualityReport {
    let findings = table
        .rows()
        .filter_map(|(region, cells)| {
            let missing: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_none())
                .map(|(w, _)| w + 1)
                .collect();
            if missing.is_empty() {
                return None;
            }
            Some(Finding {
                region_index: region.index,
                district: region.district_name.clone(),
                fatal: missing.len() == cells.len(),
                missing_weeks: missing,
            })
        })
        .collect();
    QualityReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_row_with_gap() {
        let t = parse_wide_csv("index,district,province,W1,W2,W3,W4\n1,BOGO,EXTREME NORD,3,5,,7\n")
            .unwrap();
        assert_eq!(t.n_regions(), 1);
        assert_eq!(t.n_weeks(), 4);
        assert_eq!(t.row(1).unwrap(), &[Some(3), Some(5), None, Some(7)]);
        assert_eq!(t.region(1).unwrap().label(), "1 BOGO,EXTREME NORD");
    }

    #[test]
    fn whitespace_cell_is_absent() {
        let t = parse_wide_csv("index,district,province,W1,W2\n1,A,P,  ,0\n").unwrap();
        assert_eq!(t.row(1).unwrap(), &[None, Some(0)]);
    }

    #[test]
    fn negative_cell_reports_coordinates() {
        let err = parse_wide_csv("index,district,province,W1,W2\n1,A,P,-2,4\n").unwrap_err();
        match err {
            Error::Cell { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "W1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_integer_cell_rejected() {
        let err = parse_wide_csv("index,district,province,W1,W2\n1,A,P,1,2.5\n").unwrap_err();
        assert!(matches!(err, Error::Cell { ref column, .. } if column == "W2"));
    }

    #[test]
    fn bad_header_names_column() {
        let err = parse_wide_csv("index,district,province,W1,W3\n1,A,P,1,2\n").unwrap_err();
        assert_eq!(
            err,
            Error::Format {
                column: 5,
                message: "expected \"W2\", found \"W3\"".into()
            }
        );
        let err = parse_wide_csv("idx,district,province,W1\n").unwrap_err();
        assert!(matches!(err, Error::Format { column: 1, .. }));
    }

    #[test]
    fn duplicate_index_rejected() {
        let err =
            parse_wide_csv("index,district,province,W1,W2\n1,A,P,1,2\n1,B,P,1,2\n").unwrap_err();
        assert_eq!(err, Error::DuplicateIndex { index: 1, row: 2 });
    }

    #[test]
    fn ragged_row_rejected() {
        let err = parse_wide_csv("index,district,province,W1,W2\n1,A,P,1\n").unwrap_err();
        assert!(matches!(err, Error::Cell { row: 1, .. }));
    }

    #[test]
    fn quoted_names_with_commas() {
        let t =
            parse_wide_csv("index,district,province,W1,W2\n1,\"GAROUA, II\",NORD,1,2\n").unwrap();
        assert_eq!(t.region(1).unwrap().district_name, "GAROUA, II");
        let back = t.to_csv().unwrap();
        assert_eq!(parse_wide_csv(&back).unwrap(), t);
    }

    #[test]
    fn validate_clean_table() {
        let t = parse_wide_csv("index,district,province,W1,W2\n1,A,P,1,2\n").unwrap();
        assert!(validate(&t).is_clean());
    }

    #[test]
    fn validate_flags_all_missing_row() {
        let t = parse_wide_csv("index,district,province,W1,W2\n1,A,P,1,2\n2,B,P,,\n").unwrap();
        let r = validate(&t);
        assert_eq!(r.findings.len(), 1);
        assert!(r.findings[0].fatal);
        assert_eq!(r.findings[0].region_index, 2);
        assert!(r.has_fatal());
    }

    #[test]
    fn validate_lists_missing_week_labels() {
        let mut cells: Vec<Option<u64>> = (0..207).map(Some).collect();
        cells[4] = None;
        cells[99] = None;
        cells[206] = None;
        let t = SurveillanceTable::from_rows([("A", "P", cells)]).unwrap();
        let r = validate(&t);
        assert_eq!(r.findings[0].missing_count(), 3);
        assert_eq!(r.findings[0].week_labels(), ["W5", "W100", "W207"]);
        assert!(!r.findings[0].fatal);
    }
}
