//! CSV dataset formats and the embedded breast cosmesis data.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::data::{
    CensoringInterval, CurrentStatusSample, Dataset, MixedCaseSubject, StatusRecord,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Columns `t,delta`.
    CurrentStatus,
    /// Columns `left,right`; an empty or `inf` right endpoint is `+inf`.
    Intervals,
    /// Columns `id,time,delta`, one row per examination.
    MixedLong,
}

impl DatasetFormat {
    pub fn header(&self) -> &'static str {
        match self {
            DatasetFormat::CurrentStatus => "t,delta",
            DatasetFormat::Intervals => "left,right",
            DatasetFormat::MixedLong => "id,time,delta",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatasetFormat::CurrentStatus => "current-status",
            DatasetFormat::Intervals => "intervals",
            DatasetFormat::MixedLong => "mixed-long",
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current-status" => Ok(DatasetFormat::CurrentStatus),
            "intervals" => Ok(DatasetFormat::Intervals),
            "mixed-long" => Ok(DatasetFormat::MixedLong),
            other => Err(Error::input(format!(
                "unknown format '{other}' (expected current-status, intervals or mixed-long)"
            ))),
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(line, format!("{what} '{field}' is not a number")))?;
    if v.is_nan() {
        return Err(parse_error(line, format!("{what} is NaN")));
    }
    Ok(v)
}

fn parse_delta(field: &str, line: usize) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_error(line, format!("delta '{other}' must be 0 or 1"))),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_fields(line: &str, expected: usize, lineno: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != expected {
        return Err(parse_error(
            lineno,
            format!("expected {expected} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

/// Parses a dataset; lines starting with `#` are comments.
pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<Dataset> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "missing header row"))?;
    let header: String = header
        .split(',')
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(",");
    if header != format.header() {
        return Err(parse_error(
            hline,
            format!("header '{header}' does not match '{}'", format.header()),
        ));
    }
    let wrap = |line: usize| {
        move |e: Error| match e {
            Error::InvalidInput(m) => parse_error(line, m),
            other => other,
        }
    };
    match format {
        DatasetFormat::CurrentStatus => {
            let mut records = Vec::new();
            for (no, line) in lines {
                let f = split_fields(line, 2, no)?;
                let t = parse_number(f[0], no, "time")?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(parse_error(
                        no,
                        format!("time {t} must be positive and finite"),
                    ));
                }
                records.push(StatusRecord {
                    t,
                    delta: parse_delta(f[1], no)?,
                });
            }
            Ok(Dataset::CurrentStatus(CurrentStatusSample::new(records)?))
        }
        DatasetFormat::Intervals => {
            let mut intervals = Vec::new();
            for (no, line) in lines {
                let f = split_fields(line, 2, no)?;
                let l = parse_number(f[0], no, "left endpoint")?;
                let r = match f[1] {
                    "" | "inf" | "Inf" => f64::INFINITY,
                    s => parse_number(s, no, "right endpoint")?,
                };
                intervals.push(CensoringInterval::new(l, r).map_err(wrap(no))?);
            }
            if intervals.is_empty() {
                return Err(Error::input("dataset has no rows"));
            }
            Ok(Dataset::Intervals(intervals))
        }
        DatasetFormat::MixedLong => {
            struct Pending {
                first_line: usize,
                times: Vec<f64>,
                category: Option<usize>,
            }
            let mut order: Vec<String> = Vec::new();
            let mut by_id: HashMap<String, Pending> = HashMap::new();
            for (no, line) in lines {
                let f = split_fields(line, 3, no)?;
                let id = f[0];
                if id.is_empty() {
                    return Err(parse_error(no, "empty id"));
                }
                let t = parse_number(f[1], no, "time")?;
                let delta = parse_delta(f[2], no)?;
                let entry = by_id.entry(id.to_string()).or_insert_with(|| {
                    order.push(id.to_string());
                    Pending {
                        first_line: no,
                        times: Vec::new(),
                        category: None,
                    }
                });
                if let Some(&last) = entry.times.last() {
                    if t <= last {
                        return Err(parse_error(
                            no,
                            format!("times for id '{id}' are not strictly increasing"),
                        ));
                    }
                }
                entry.times.push(t);
                if delta {
                    if entry.category.is_some() {
                        return Err(parse_error(
                            no,
                            format!("id '{id}' has more than one delta = 1"),
                        ));
                    }
                    entry.category = Some(entry.times.len());
                }
            }
            if order.is_empty() {
                return Err(Error::input("dataset has no rows"));
            }
            let subjects = order
                .iter()
                .map(|id| {
                    let p = by_id.remove(id).expect("id recorded");
                    let k = p.times.len();
                    MixedCaseSubject::new(p.times, p.category.unwrap_or(k + 1))
                        .map_err(wrap(p.first_line))
                })
                .collect::<Result<_>>()?;
            Ok(Dataset::Panel(subjects))
        }
    }
}

/// Canonical text of a dataset in the given format. Numbers use the shortest
/// representation that parses back to the same value.
pub fn serialize_dataset(data: &Dataset, format: DatasetFormat) -> Result<String> {
    let mut out = String::new();
    out.push_str(format.header());
    out.push('\n');
    match format {
        DatasetFormat::CurrentStatus => {
            let Dataset::CurrentStatus(sample) = data else {
                return Err(Error::input(
                    "only current status data can be written as current-status",
                ));
            };
            for r in sample.records() {
                writeln!(out, "{},{}", r.t, u8::from(r.delta)).expect("write to string");
            }
        }
        DatasetFormat::Intervals => {
            for i in data.intervals()? {
                if i.is_right_censored() {
                    writeln!(out, "{},", i.left()).expect("write to string");
                } else {
                    writeln!(out, "{},{}", i.left(), i.right()).expect("write to string");
                }
            }
        }
        DatasetFormat::MixedLong => {
            for (id, s) in data.subjects()?.iter().enumerate() {
                for (k, t) in s.times().iter().enumerate() {
                    let delta = u8::from(s.category() == k + 1);
                    writeln!(out, "{},{},{}", id + 1, t, delta).expect("write to string");
                }
            }
        }
    }
    Ok(out)
}

/// Version of the embedded breast cosmesis transcription.
pub const BREAST_DATA_VERSION: &str = "bcos-1";

/// SHA-256 of the radiotherapy file followed by the radiotherapy plus chemotherapy file.
pub const BREAST_DATA_SHA256: &str =
    "58b3699bb28c28e5d0ac2f0ad9c0c0cfb5e24ba338f705cb2a92ddeafc292953";

const RADIOTHERAPY: &str = include_str!("../data/bcos_radiotherapy.csv");
const RADIO_CHEMO: &str = include_str!("../data/bcos_radio_chemo.csv");

pub fn breast_data_checksum() -> String {
    let mut hasher = Sha256::new();
    hasher.update(RADIOTHERAPY.as_bytes());
    hasher.update(RADIO_CHEMO.as_bytes());
    hex::encode(hasher.finalize())
}

/// Retraction-time intervals in months: radiotherapy alone (46 patients) and
/// radiotherapy with chemotherapy (48 patients).
pub fn load_breast_cancer() -> (Dataset, Dataset) {
    let parse = |text| parse_dataset(text, DatasetFormat::Intervals).expect("embedded data parse");
    (parse(RADIOTHERAPY), parse(RADIO_CHEMO))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn current_status_example() {
        let d = parse_dataset("t,delta\n1.0,1\n2.0,0", DatasetFormat::CurrentStatus).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(
            serialize_dataset(&d, DatasetFormat::CurrentStatus).unwrap(),
            "t,delta\n1,1\n2,0\n"
        );
    }

    #[test]
    fn right_censored_row() {
        let d = parse_dataset("left,right\n0.5,\n", DatasetFormat::Intervals).unwrap();
        let i = d.intervals().unwrap();
        assert_eq!(i[0].left(), 0.5);
        assert!(i[0].is_right_censored());
        let d2 = parse_dataset("left,right\n0.5,inf\n", DatasetFormat::Intervals).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn mixed_long_example() {
        let d = parse_dataset("id,time,delta\n1,1.0,0\n1,2.0,1", DatasetFormat::MixedLong).unwrap();
        let s = d.subjects().unwrap();
        assert_eq!(s[0].times(), &[1.0, 2.0]);
        assert_eq!(s[0].category(), 2);
        let i = d.intervals().unwrap();
        assert_eq!((i[0].left(), i[0].right()), (1.0, 2.0));
    }

    #[test]
    fn mixed_long_all_zero_means_after_last() {
        let d = parse_dataset(
            "id,time,delta\na,1,0\nb,3,1\na,2,0",
            DatasetFormat::MixedLong,
        )
        .unwrap();
        let s = d.subjects().unwrap();
        assert_eq!(s[0].category(), 3);
        assert_eq!(s[1].category(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str, format| match parse_dataset(text, format) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(
            line_of("t,delta\n1,1\n2,x\n", DatasetFormat::CurrentStatus),
            3
        );
        assert_eq!(line_of("t,delta\n1,1,1\n", DatasetFormat::CurrentStatus), 2);
        assert_eq!(line_of("x,y\n1,1\n", DatasetFormat::CurrentStatus), 1);
        assert_eq!(line_of("", DatasetFormat::CurrentStatus), 1);
        assert_eq!(
            line_of("id,time,delta\n1,2,0\n1,1,0\n", DatasetFormat::MixedLong),
            3
        );
        assert_eq!(
            line_of("id,time,delta\n1,1,1\n1,2,1\n", DatasetFormat::MixedLong),
            3
        );
        assert_eq!(line_of("left,right\n2,1\n", DatasetFormat::Intervals), 2);
        assert_eq!(line_of("t,delta\n-1,1\n", DatasetFormat::CurrentStatus), 2);
    }

    #[test]
    fn round_trips() {
        let cases = [
            ("t,delta\n0.1,1\n2.5,0\n", DatasetFormat::CurrentStatus),
            ("left,right\n0,7\n4.25,11\n46,\n", DatasetFormat::Intervals),
            (
                "id,time,delta\n1,0.5,0\n1,1.5,1\n2,3,0\n",
                DatasetFormat::MixedLong,
            ),
        ];
        for (text, format) in cases {
            let d = parse_dataset(text, format).unwrap();
            assert_eq!(serialize_dataset(&d, format).unwrap(), text);
        }
    }

    #[test]
    fn format_names() {
        for f in [
            DatasetFormat::CurrentStatus,
            DatasetFormat::Intervals,
            DatasetFormat::MixedLong,
        ] {
            assert_eq!(f.name().parse::<DatasetFormat>().unwrap(), f);
        }
        assert!("csv".parse::<DatasetFormat>().is_err());
    }

    #[test]
    fn embedded_data() {
        let (radio, chemo) = load_breast_cancer();
        assert_eq!((radio.len(), chemo.len()), (46, 48));
        assert_eq!(breast_data_checksum(), BREAST_DATA_SHA256);
    }
}
