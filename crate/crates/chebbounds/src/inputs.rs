//! Externally sourced constants and data tables.
//!
//! All tabular inputs are plain comma-separated text with a one-line header;
//! `#` lines carry generation metadata and are ignored by the parsers.

use crate::conservative::Iv;
use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;

/// Verification height, zero-free-region constant and friends.
///
/// Every emitted result records the constants it was computed with.
#[derive(Clone, Debug)]
pub struct GlobalConstants {
    /// Partial-RH verification height.
    pub h: f64,
    /// Zero-free region constant.
    pub r: f64,
    /// Global bound `psi(x) < c0 x` for all `x > 0`.
    pub c0: f64,
    /// Global multiplier: `theta(x) <= (1 + alpha) x` for all `x > 0`.
    pub alpha: f64,
    /// Bias threshold: `theta(x) < x` for all `x <= x1`.
    pub x1: f64,
    /// Log-scale bias limit (`log x1`).
    pub j: f64,
    /// Log-scale limit of direct sieve verification.
    pub j0: f64,
    /// Log-scale crossover from the middle-range to the large-range bounds.
    pub k_cut: f64,
}

impl Default for GlobalConstants {
    fn default() -> Self {
        GlobalConstants {
            h: 2_445_999_556_030.0,
            r: 5.573412,
            c0: 1.03883,
            alpha: 1.93378e-8,
            x1: 1e19,
            j: 19.0 * std::f64::consts::LN_10,
            j0: (7e11_f64).ln(),
            k_cut: 25_000.0,
        }
    }
}

impl GlobalConstants {
    /// Key/value pairs recorded in emitted output headers.
    pub fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("H".into(), format!("{}", self.h as u64)),
            ("R".into(), format!("{}", self.r)),
            ("c0".into(), format!("{}", self.c0)),
            ("alpha".into(), format!("{:e}", self.alpha)),
            ("x1".into(), format!("{:e}", self.x1)),
            ("J".into(), format!("{:.6}", self.j)),
            ("J0".into(), format!("{:.6}", self.j0)),
            ("K".into(), format!("{}", self.k_cut as u64)),
            (
                "precision_digits".into(),
                format!("{}", crate::conservative::working_digits()),
            ),
        ]
    }
}

/// How an epsilon row was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonMethod {
    Table,
    SmallRange,
    Pt,
    Buthe,
}

impl std::str::FromStr for EpsilonMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "TABLE" => Ok(EpsilonMethod::Table),
            "SMALL_RANGE" => Ok(EpsilonMethod::SmallRange),
            "PT" => Ok(EpsilonMethod::Pt),
            "BUTHE" => Ok(EpsilonMethod::Buthe),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

impl fmt::Display for EpsilonMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EpsilonMethod::Table => "TABLE",
            EpsilonMethod::SmallRange => "SMALL_RANGE",
            EpsilonMethod::Pt => "PT",
            EpsilonMethod::Buthe => "BUTHE",
        };
        f.write_str(s)
    }
}

/// One row `(b, b', eps)` asserting `|psi(x) - x| <= eps x` on `[e^b, e^b']`.
#[derive(Clone, Debug)]
pub struct EpsilonRow {
    pub b: f64,
    pub b_next: f64,
    pub epsilon: f64,
    /// Decimal literal as shipped, for exact conservative ingestion.
    pub epsilon_dec: String,
    pub method: EpsilonMethod,
}

impl EpsilonRow {
    /// Enclosure of the shipped decimal value.
    pub fn epsilon_iv(&self) -> Iv {
        Iv::parse(&self.epsilon_dec).expect("validated at load")
    }
}

/// The full `eps(b)` table, sorted, contiguous and validated.
#[derive(Clone, Debug)]
pub struct EpsilonTable {
    rows: Vec<EpsilonRow>,
}

pub const DEFAULT_EPSILON_CSV: &str = include_str!("../data/epsilon.csv");

fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

impl EpsilonTable {
    pub fn default_table() -> Self {
        Self::from_str_named(DEFAULT_EPSILON_CSV, "<builtin epsilon.csv>")
            .expect("builtin table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_str_named(&content, &path.display().to_string())
    }

    pub fn from_str_named(content: &str, name: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in data_lines(content) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0] == "b" {
                continue; // header
            }
            if fields.len() != 4 {
                return Err(parse_err(name, ln, format!("expected 4 fields, got {}", fields.len())));
            }
            let b: f64 = fields[0]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("b: {e}")))?;
            let b_next: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("b_next: {e}")))?;
            let epsilon: f64 = fields[2]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("epsilon: {e}")))?;
            let method: EpsilonMethod = fields[3]
                .parse()
                .map_err(|e: String| parse_err(name, ln, e))?;
            if !(epsilon > 0.0) {
                return Err(parse_err(name, ln, "epsilon must be positive"));
            }
            if !(b < b_next) {
                return Err(parse_err(name, ln, "b must be < b_next"));
            }
            rows.push(EpsilonRow {
                b,
                b_next,
                epsilon,
                epsilon_dec: fields[2].to_string(),
                method,
            });
        }
        if rows.is_empty() {
            return Err(parse_err(name, 0, "no rows"));
        }
        for w in rows.windows(2) {
            if w[0].b >= w[1].b {
                return Err(Error::Table(format!(
                    "rows not sorted: b={} then b={}",
                    w[0].b, w[1].b
                )));
            }
            if w[0].b_next < w[1].b {
                return Err(Error::Table(format!(
                    "gap between rows: b={} covers to {}, next row starts at {}",
                    w[0].b, w[0].b_next, w[1].b
                )));
            }
            if w[0].b_next > w[1].b {
                return Err(Error::Table(format!(
                    "overlapping rows: b={} covers to {}, next row starts at {}",
                    w[0].b, w[0].b_next, w[1].b
                )));
            }
        }
        Ok(EpsilonTable { rows })
    }

    pub fn rows(&self) -> &[EpsilonRow] {
        &self.rows
    }

    pub fn min_b(&self) -> f64 {
        self.rows[0].b
    }

    pub fn max_b(&self) -> f64 {
        self.rows.last().unwrap().b
    }

    /// End of the last row's validity interval.
    pub fn end_b(&self) -> f64 {
        self.rows.last().unwrap().b_next
    }

    /// Floor lookup: the row with the greatest `b <= b_query`. Valid because
    /// each `eps(b)` in the assembled pipeline holds for all `x >= e^b`.
    pub fn epsilon_at(&self, b_query: f64) -> Result<&EpsilonRow> {
        if b_query < self.min_b() {
            return Err(Error::BelowTable {
                query: b_query,
                min: self.min_b(),
            });
        }
        let idx = self
            .rows
            .partition_point(|r| r.b <= b_query)
            .saturating_sub(1);
        Ok(&self.rows[idx])
    }

    /// Index of the floor row for `b_query`.
    pub fn row_index_at(&self, b_query: f64) -> Result<usize> {
        if b_query < self.min_b() {
            return Err(Error::BelowTable {
                query: b_query,
                min: self.min_b(),
            });
        }
        Ok(self
            .rows
            .partition_point(|r| r.b <= b_query)
            .saturating_sub(1))
    }
}

/// One `(sigma, c1, c2)` row of the zero-density table.
#[derive(Clone, Debug)]
pub struct ZeroDensityRow {
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_dec: String,
    pub c2_dec: String,
}

#[derive(Clone, Debug)]
pub struct ZeroDensityTable {
    rows: Vec<ZeroDensityRow>,
}

pub const DEFAULT_ZERO_DENSITY_CSV: &str = include_str!("../data/zero_density.csv");

impl ZeroDensityTable {
    pub fn default_table() -> Self {
        Self::from_str_named(DEFAULT_ZERO_DENSITY_CSV, "<builtin zero_density.csv>")
            .expect("builtin table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_str_named(&content, &path.display().to_string())
    }

    pub fn from_str_named(content: &str, name: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in data_lines(content) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0] == "sigma" {
                continue;
            }
            if fields.len() != 3 {
                return Err(parse_err(name, ln, format!("expected 3 fields, got {}", fields.len())));
            }
            let sigma: f64 = fields[0]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("sigma: {e}")))?;
            let c1: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("c1: {e}")))?;
            let c2: f64 = fields[2]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("c2: {e}")))?;
            if !(0.5..1.0).contains(&sigma) {
                return Err(parse_err(name, ln, "sigma outside [0.5, 1)"));
            }
            if c1 <= 0.0 || c2 <= 0.0 {
                return Err(parse_err(name, ln, "c1 and c2 must be positive"));
            }
            rows.push(ZeroDensityRow {
                sigma,
                c1,
                c2,
                c1_dec: fields[1].to_string(),
                c2_dec: fields[2].to_string(),
            });
        }
        if rows.is_empty() {
            return Err(parse_err(name, 0, "no rows"));
        }
        for w in rows.windows(2) {
            if w[0].sigma >= w[1].sigma {
                return Err(Error::Table(format!(
                    "sigma not strictly increasing: {} then {}",
                    w[0].sigma, w[1].sigma
                )));
            }
        }
        Ok(ZeroDensityTable { rows })
    }

    pub fn rows(&self) -> &[ZeroDensityRow] {
        &self.rows
    }

    /// The row with the largest `sigma <= 1 - delta` (conservative selection),
    /// plus a flag when the gap `1 - delta - sigma` exceeds 0.01.
    pub fn row_for_delta(&self, delta: f64) -> Result<(&ZeroDensityRow, bool)> {
        let target = 1.0 - delta;
        let mut best: Option<&ZeroDensityRow> = None;
        for r in &self.rows {
            if r.sigma <= target + 1e-12 {
                best = Some(r);
            }
        }
        let row = best.ok_or_else(|| {
            Error::Hypothesis(format!(
                "no zero-density row with sigma <= 1 - delta = {target}"
            ))
        })?;
        Ok((row, target - row.sigma > 0.01))
    }
}

/// Ascending imaginary parts of zeta zeros on the critical line.
#[derive(Clone, Debug)]
pub struct ZetaZeroFile {
    pub ordinates: Vec<f64>,
}

pub const DEFAULT_ZEROS_FILE: &str = include_str!("../data/zeros_100.csv");

impl ZetaZeroFile {
    pub fn default_file() -> Self {
        Self::from_str_named(DEFAULT_ZEROS_FILE, "<builtin zeros_100.csv>")
            .expect("builtin file is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_str_named(&content, &path.display().to_string())
    }

    pub fn from_str_named(content: &str, name: &str) -> Result<Self> {
        let mut ordinates = Vec::new();
        for (ln, line) in data_lines(content) {
            // commas tolerated: one ordinate per line is the contract
            for tok in line.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let g: f64 = tok
                    .parse()
                    .map_err(|e| parse_err(name, ln, format!("ordinate: {e}")))?;
                ordinates.push(g);
            }
        }
        if ordinates.is_empty() {
            return Err(parse_err(name, 0, "no ordinates"));
        }
        if !(ordinates[0] > 14.0 && ordinates[0] < 14.2) {
            return Err(Error::Table(format!(
                "first ordinate {} fails the 14 < gamma_1 < 14.2 sanity check",
                ordinates[0]
            )));
        }
        for w in ordinates.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Table(format!(
                    "ordinates not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(ZetaZeroFile { ordinates })
    }

    pub fn max_ordinate(&self) -> f64 {
        *self.ordinates.last().unwrap()
    }
}

/// One pre-verified numeric row: per-k maxima of the prime-gap functional on `[a, b)`.
#[derive(Clone, Debug)]
pub struct DkRow {
    pub a: f64,
    pub b: f64,
    pub d: [f64; 6],
}

/// Shipped fixture of sieve-verified maxima (overlapping rows allowed; a row
/// starting below a query threshold gives a valid over-estimate).
#[derive(Clone, Debug)]
pub struct DkTable {
    rows: Vec<DkRow>,
}

pub const DEFAULT_DK_CSV: &str = include_str!("../data/dk_table.csv");

impl DkTable {
    pub fn default_table() -> Self {
        Self::from_str_named(DEFAULT_DK_CSV, "<builtin dk_table.csv>")
            .expect("builtin table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_str_named(&content, &path.display().to_string())
    }

    pub fn from_str_named(content: &str, name: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in data_lines(content) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0] == "a" {
                continue;
            }
            if fields.len() != 8 {
                return Err(parse_err(name, ln, format!("expected 8 fields, got {}", fields.len())));
            }
            let a: f64 = fields[0]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("a: {e}")))?;
            let b: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(name, ln, format!("b: {e}")))?;
            if !(a >= 1.0 && a < b) {
                return Err(parse_err(name, ln, "need 1 <= a < b"));
            }
            let mut d = [0.0; 6];
            for (k, f) in fields[2..].iter().enumerate() {
                d[k] = f
                    .parse()
                    .map_err(|e| parse_err(name, ln, format!("d{k}: {e}")))?;
                if d[k] < 0.0 {
                    return Err(parse_err(name, ln, "dk must be non-negative"));
                }
            }
            rows.push(DkRow { a, b, d });
        }
        if rows.is_empty() {
            return Err(parse_err(name, 0, "no rows"));
        }
        rows.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
        Ok(DkTable { rows })
    }

    pub fn rows(&self) -> &[DkRow] {
        &self.rows
    }

    /// Largest endpoint covered by the fixture.
    pub fn max_b(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.b))
    }

    /// Over-estimate of the per-k maximum over `[x0, upto]` assembled by
    /// chaining fixture rows. A row may start below `x0` (superset of the
    /// queried range, hence a valid over-estimate). Errors when the rows
    /// cannot cover the whole range.
    pub fn max_over(&self, x0: f64, upto: f64, k: usize) -> Result<f64> {
        if k > 5 {
            return Err(Error::Domain(format!("k={k} outside 0..=5")));
        }
        let mut pos = x0;
        let mut acc: f64 = 0.0;
        while pos < upto {
            // Prefer the covering row with the largest start (tightest
            // superset), tie-broken by the largest end.
            let mut chosen: Option<&DkRow> = None;
            for r in &self.rows {
                if r.a <= pos && r.b > pos {
                    match chosen {
                        None => chosen = Some(r),
                        Some(c) => {
                            if (r.a, r.b) > (c.a, c.b) {
                                chosen = Some(r);
                            }
                        }
                    }
                }
            }
            match chosen {
                Some(r) => {
                    acc = acc.max(r.d[k]);
                    pos = r.b;
                }
                None => {
                    return Err(Error::Coverage(format!(
                        "no fixture row covers x = {pos} (need [{x0}, {upto}])"
                    )));
                }
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_epsilon_table_loads_and_looks_up() {
        let t = EpsilonTable::default_table();
        assert_eq!(t.min_b(), 20.0);
        assert_eq!(t.end_b(), 26000.0);
        // row "20,21,4.26760e-5"
        let r = t.epsilon_at(20.0).unwrap();
        assert_eq!(r.epsilon, 4.26760e-5);
        // floor lookup at 21.5 -> row b=21
        assert_eq!(t.epsilon_at(21.5).unwrap().b, 21.0);
        // 19 log 10 ~ 43.749 -> row b=43 in the default table, eps = 1.93378e-8
        let r = t.epsilon_at(19.0 * std::f64::consts::LN_10).unwrap();
        assert_eq!(r.epsilon, 1.93378e-8);
        // "3000,3500,4.59972e-14"
        assert_eq!(t.epsilon_at(3000.0).unwrap().epsilon, 4.59972e-14);
        // below table
        assert!(matches!(
            t.epsilon_at(10.0),
            Err(Error::BelowTable { .. })
        ));
    }

    #[test]
    fn epsilon_gap_and_overlap_rejected() {
        let gap = "b,b_next,epsilon,method\n20,21,1e-5,TABLE\n22,23,1e-5,TABLE\n";
        let err = EpsilonTable::from_str_named(gap, "t").unwrap_err();
        assert!(matches!(err, Error::Table(_)), "{err}");
        assert!(err.to_string().contains("gap"));
        let overlap = "b,b_next,epsilon,method\n20,22,1e-5,TABLE\n21,23,1e-5,TABLE\n";
        let err = EpsilonTable::from_str_named(overlap, "t").unwrap_err();
        assert!(err.to_string().contains("overlap"));
    }

    #[test]
    fn epsilon_parse_error_reports_line() {
        let bad = "b,b_next,epsilon,method\n20,21,oops,TABLE\n";
        match EpsilonTable::from_str_named(bad, "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_density_table() {
        let t = ZeroDensityTable::default_table();
        assert_eq!(t.rows().len(), 17);
        let first = &t.rows()[0];
        assert_eq!((first.sigma, first.c1, first.c2), (0.75, 5.277, 4.403));
        let last = t.rows().last().unwrap();
        assert_eq!((last.sigma, last.c1, last.c2), (0.99, 17.253, 2.446));
        // c1 increasing, c2 decreasing as printed
        for w in t.rows().windows(2) {
            assert!(w[0].c1 < w[1].c1);
            assert!(w[0].c2 > w[1].c2);
        }
        // row selection for delta
        let (r, flagged) = t.row_for_delta(0.01).unwrap();
        assert_eq!(r.sigma, 0.99);
        assert!(!flagged);
        let (r, _) = t.row_for_delta(0.015).unwrap();
        assert_eq!(r.sigma, 0.98);
    }

    #[test]
    fn zeros_file_checks() {
        let z = ZetaZeroFile::default_file();
        assert_eq!(z.ordinates.len(), 100);
        assert!(z.ordinates[0] > 14.13 && z.ordinates[0] < 14.14);
        let bad = "14.134725\n13.0\n";
        assert!(ZetaZeroFile::from_str_named(bad, "z").is_err());
        let badfirst = "15.0\n16.0\n";
        assert!(ZetaZeroFile::from_str_named(badfirst, "z").is_err());
    }

    #[test]
    fn dk_fixture_coverage() {
        let t = DkTable::default_table();
        // the special threshold row exists
        assert!(t
            .rows()
            .iter()
            .any(|r| r.a == 19_035_709_163.0 && r.b == 2e10));
        // chain from the exact threshold to 7e11 prefers the refined row
        let m = t.max_over(19_035_709_163.0, 7e11, 3).unwrap();
        assert!((m - 1.49993e-1).abs() < 1e-6, "{m}");
        // chain from 1: the global k=4 max is the first-row value
        let m4 = t.max_over(1.0, 7e11, 4).unwrap();
        assert_eq!(m4, 1.51224e2);
        // uncovered range errors
        assert!(t.max_over(1.0, 8e11, 1).is_err());
    }
}
