//! Text formats: line tokens, spread records, the delta encoding relative to
//! the regular spread centred at `(1,0,0)`, and summary tables.
//!
//! A record file starts with a header naming the field, followed by records
//! separated by blank lines:
//!
//! ```text
//! unital-spreads v1 p=2 e=2 poly=1,1,0,0,1
//!
//! q=4
//! lines=(0,*,0) (0,*,1) ...
//! delta=(0,1,0) ...
//! G=156
//! orbit=(13,1)
//! type=(0,130), (2,78)
//! kind=cyclic
//! ```

use std::fmt::Write as _;

use thiserror::Error;
use unital_core::classify::{ClassifiedSpread, Histogram, Kind, SpreadInvariants};
use unital_core::constructions::{reference_regular_spread, Spread, SpreadError};
use unital_core::{FieldSpec, SecantId, UnitalGeometry};

pub const RECORD_HEADER: &str = "unital-spreads v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> RecordError {
    RecordError::Syntax { line, msg: msg.into() }
}

/// `(a,b,c)` for the secant's line coordinates.
pub fn format_line(geom: &UnitalGeometry, s: SecantId) -> String {
    geom.format_triple(geom.secant_line(s))
}

pub fn format_lines(geom: &UnitalGeometry, lines: &[SecantId], sep: &str) -> String {
    lines.iter().map(|&s| format_line(geom, s)).collect::<Vec<_>>().join(sep)
}

/// Every parenthesised group in `text`, separators ignored.
pub fn split_tokens(text: &str) -> Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('(') {
        if !rest[..start].chars().all(|c| c == ',' || c.is_whitespace()) {
            return Err(format!("unexpected text {:?}", rest[..start].trim()));
        }
        let end = rest[start..].find(')').ok_or("unclosed parenthesis")? + start;
        out.push(&rest[start..=end]);
        rest = &rest[end + 1..];
    }
    if !rest.chars().all(|c| c == ',' || c.is_whitespace()) {
        return Err(format!("unexpected text {:?}", rest.trim()));
    }
    Ok(out)
}

/// `(i,j), (i,j)` as in the published tables.
pub fn format_histogram(h: &Histogram) -> String {
    h.iter().map(|(i, j)| format!("({i},{j})")).collect::<Vec<_>>().join(", ")
}

pub fn parse_histogram(text: &str) -> Result<Histogram, String> {
    split_tokens(text)?
        .into_iter()
        .map(|tok| {
            let inner = &tok[1..tok.len() - 1];
            let (i, j) = inner.split_once(',').ok_or_else(|| format!("bad pair {tok}"))?;
            let i = i.trim().parse().map_err(|_| format!("bad pair {tok}"))?;
            let j = j.trim().parse().map_err(|_| format!("bad pair {tok}"))?;
            Ok((i, j))
        })
        .collect()
}

/// Lines of `spread` outside the reference regular spread, in id order.
pub fn delta_encode(geom: &UnitalGeometry, spread: &Spread) -> Vec<SecantId> {
    let r0 = reference_regular_spread(geom);
    spread.lines().iter().copied().filter(|&s| !r0.contains(s)).collect()
}

/// Start from the reference regular spread, drop every line meeting a delta
/// line, then add the delta lines.
pub fn delta_decode(geom: &UnitalGeometry, delta: &[SecantId]) -> Result<Spread, SpreadError> {
    let r0 = reference_regular_spread(geom);
    let mut lines: Vec<SecantId> =
        r0.lines().iter().copied().filter(|&s| delta.iter().all(|&d| d == s || geom.disjoint(s, d))).collect();
    for &d in delta {
        if !lines.contains(&d) {
            lines.push(d);
        }
    }
    Spread::new(geom, lines)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadRecord {
    pub q: u32,
    pub lines: Vec<SecantId>,
    pub delta: Vec<SecantId>,
    pub invariants: SpreadInvariants,
    pub kind: Kind,
}

impl SpreadRecord {
    pub fn new(geom: &UnitalGeometry, spread: &Spread, invariants: SpreadInvariants, kind: Kind) -> Self {
        SpreadRecord { q: geom.q(), lines: spread.lines().to_vec(), delta: delta_encode(geom, spread), invariants, kind }
    }

    pub fn from_class(geom: &UnitalGeometry, class: &ClassifiedSpread) -> Self {
        Self::new(geom, &class.representative, class.invariants.clone(), class.kind)
    }

    pub fn write(&self, geom: &UnitalGeometry, out: &mut String) {
        let inv = &self.invariants;
        writeln!(out, "q={}", self.q).unwrap();
        writeln!(out, "lines={}", format_lines(geom, &self.lines, " ")).unwrap();
        writeln!(out, "delta={}", format_lines(geom, &self.delta, " ")).unwrap();
        writeln!(out, "G={}", inv.stabilizer_order).unwrap();
        writeln!(out, "orbit={}", format_histogram(&inv.orbit_structure)).unwrap();
        writeln!(out, "type={}", format_histogram(&inv.type_vector)).unwrap();
        writeln!(out, "kind={}", self.kind).unwrap();
    }
}

pub fn header(spec: &FieldSpec) -> String {
    let poly: Vec<String> = spec.primitive_poly.iter().map(u32::to_string).collect();
    format!("{RECORD_HEADER} p={} e={} poly={}", spec.p, spec.e, poly.join(","))
}

pub fn write_records(geom: &UnitalGeometry, records: &[SpreadRecord]) -> String {
    let mut out = header(geom.field().spec());
    out.push('\n');
    for r in records {
        out.push('\n');
        r.write(geom, &mut out);
    }
    out
}

pub fn parse_header(text: &str) -> Result<FieldSpec, RecordError> {
    let first = text.lines().next().ok_or_else(|| syntax(1, "empty file"))?;
    let rest = first.strip_prefix(RECORD_HEADER).ok_or_else(|| syntax(1, "missing or unsupported header"))?;
    let (mut p, mut e, mut poly) = (None, None, None);
    for item in rest.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| syntax(1, format!("bad header item {item:?}")))?;
        let bad = || syntax(1, format!("bad header value {item:?}"));
        match k {
            "p" => p = Some(v.parse::<u32>().map_err(|_| bad())?),
            "e" => e = Some(v.parse::<u32>().map_err(|_| bad())?),
            "poly" => poly = Some(v.split(',').map(|c| c.parse::<u32>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?),
            _ => return Err(syntax(1, format!("unknown header key {k:?}"))),
        }
    }
    match (p, e, poly) {
        (Some(p), Some(e), Some(poly)) => Ok(FieldSpec::new(p, e, poly)),
        _ => Err(syntax(1, "header needs p=, e= and poly=")),
    }
}

/// A record as written, with lines as plain line ids (not yet checked to be secants).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based line number where the record starts.
    pub line: usize,
    pub q: u32,
    pub lines: Vec<u32>,
    pub delta: Vec<u32>,
    pub invariants: SpreadInvariants,
    pub kind: Kind,
}

pub fn parse_records(text: &str, geom: &UnitalGeometry) -> Result<Vec<RawRecord>, RecordError> {
    parse_header(text)?;
    let mut records = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    for (i, l) in lines.iter().enumerate().skip(1) {
        if l.trim().is_empty() {
            if !block.is_empty() {
                records.push(parse_block(&block, geom)?);
                block.clear();
            }
        } else {
            block.push((i + 1, l));
        }
    }
    if !block.is_empty() {
        records.push(parse_block(&block, geom)?);
    }
    Ok(records)
}

fn parse_block(block: &[(usize, &str)], geom: &UnitalGeometry) -> Result<RawRecord, RecordError> {
    const KEYS: [&str; 7] = ["q", "lines", "delta", "G", "orbit", "type", "kind"];
    if block.len() != KEYS.len() {
        return Err(syntax(block[0].0, format!("record has {} fields, expected {}", block.len(), KEYS.len())));
    }
    let mut values = Vec::new();
    for (&(n, l), key) in block.iter().zip(KEYS) {
        let (k, v) = l.split_once('=').ok_or_else(|| syntax(n, "expected key=value"))?;
        if k != key {
            return Err(syntax(n, format!("expected field {key:?}, found {k:?}")));
        }
        values.push((n, v.trim()));
    }
    let ids = |(n, v): (usize, &str)| -> Result<Vec<u32>, RecordError> {
        split_tokens(v)
            .map_err(|m| syntax(n, m))?
            .into_iter()
            .map(|t| geom.parse_triple(t).map_err(|e| syntax(n, e.to_string())))
            .collect()
    };
    let hist = |(n, v): (usize, &str)| parse_histogram(v).map_err(|m| syntax(n, m));
    let (qn, qv) = values[0];
    let q = qv.parse().map_err(|_| syntax(qn, "bad q"))?;
    let (gn, gv) = values[3];
    let (kn, kv) = values[6];
    Ok(RawRecord {
        line: block[0].0,
        q,
        lines: ids(values[1])?,
        delta: ids(values[2])?,
        invariants: SpreadInvariants {
            stabilizer_order: gv.parse().map_err(|_| syntax(gn, "bad group order"))?,
            orbit_structure: hist(values[4])?,
            type_vector: hist(values[5])?,
        },
        kind: Kind::parse(kv).ok_or_else(|| syntax(kn, format!("unknown kind {kv:?}")))?,
    })
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub idx: usize,
    pub spread: String,
    pub order: String,
    pub orbit: String,
    pub type_vector: String,
    pub kind: String,
}

const SUMMARY_COLUMNS: [&str; 6] = ["Idx", "Spread", "|G|", "Orbit", "Type", "K"];

pub fn summary_rows(geom: &UnitalGeometry, records: &[SpreadRecord]) -> Vec<SummaryRow> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| SummaryRow {
            idx: i + 1,
            spread: format_lines(geom, &r.delta, ", "),
            order: r.invariants.stabilizer_order.to_string(),
            orbit: format_histogram(&r.invariants.orbit_structure),
            type_vector: format_histogram(&r.invariants.type_vector),
            kind: r.kind.letter().to_string(),
        })
        .collect()
}

impl SummaryRow {
    fn cells(&self) -> [String; 6] {
        [
            self.idx.to_string(),
            self.spread.clone(),
            self.order.clone(),
            self.orbit.clone(),
            self.type_vector.clone(),
            self.kind.clone(),
        ]
    }
}

/// Column-aligned text table.
pub fn summary_text(rows: &[SummaryRow]) -> String {
    let cells: Vec<[String; 6]> = rows.iter().map(SummaryRow::cells).collect();
    let mut widths = SUMMARY_COLUMNS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |row: &[String]| {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
    };
    push_row(&SUMMARY_COLUMNS.map(String::from));
    push_row(&widths.map(|w| "-".repeat(w)));
    for row in &cells {
        push_row(row);
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).expect("in-memory write");
    for row in rows {
        w.write_record(row.cells()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use unital_core::constructions::{andre_spread, RulingChoice};
    use unital_core::FieldTable;

    fn geom(q: u32) -> UnitalGeometry {
        UnitalGeometry::build(FieldTable::build(FieldSpec::preset(q).unwrap()).unwrap())
    }

    #[test]
    fn tokens_and_histograms() {
        assert_eq!(split_tokens("(0,1,*), (2,3,4) (5,*,*)").unwrap(), vec!["(0,1,*)", "(2,3,4)", "(5,*,*)"]);
        assert!(split_tokens("(0,1,*) x").is_err());
        assert!(split_tokens("(0,1").is_err());
        let h = vec![(0, 75), (1, 120), (2, 12), (12, 1)];
        assert_eq!(format_histogram(&h), "(0,75), (1,120), (2,12), (12,1)");
        assert_eq!(parse_histogram(&format_histogram(&h)).unwrap(), h);
    }

    #[test]
    fn regular_spread_has_empty_delta() {
        let g = geom(4);
        let r0 = reference_regular_spread(&g);
        assert!(delta_encode(&g, &r0).is_empty());
        assert_eq!(delta_decode(&g, &[]).unwrap(), r0);
    }

    #[test]
    fn delta_round_trip_for_andre_spreads() {
        for q in [4, 5] {
            let g = geom(q);
            for c in RulingChoice::all(g.field()) {
                let s = andre_spread(&g, &c).unwrap();
                assert_eq!(delta_decode(&g, &delta_encode(&g, &s)).unwrap(), s);
            }
        }
    }

    #[test]
    fn header_round_trip() {
        let spec = FieldSpec::q4();
        assert_eq!(parse_header(&header(&spec)).unwrap(), spec);
        assert!(parse_header("something else").is_err());
    }

    #[test]
    fn csv_quotes_commas() {
        let row = SummaryRow {
            idx: 1,
            spread: "(0,1,*), (2,3,4)".into(),
            order: "156".into(),
            orbit: "(13,1)".into(),
            type_vector: "(0,130), (2,78)".into(),
            kind: "c".into(),
        };
        let csv = summary_csv(&[row]);
        assert_eq!(csv.lines().nth(1).unwrap(), "1,\"(0,1,*), (2,3,4)\",156,\"(13,1)\",\"(0,130), (2,78)\",c");
    }
}
