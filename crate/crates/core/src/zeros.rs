//! Tables of zeta-zero ordinates: parsing, validation, counting and gaps.
//!
//! Ordinates are kept in nondecreasing order; repeated values model multiple
//! zeros and are never merged. All index arguments are 1-based, so `γ_1` is
//! the first entry of a table.

use std::f64::consts::PI;
use std::io::Read;

use serde::Serialize;

use crate::error::{require_finite, Error, Result};

/// Input text layouts accepted by [`parse_ordinates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TextFormat {
    /// One decimal ordinate per line.
    Plain,
    /// A base height on the first data line, then decimal offsets from it.
    Offset,
}

impl std::str::FromStr for TextFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(TextFormat::Plain),
            "offset" => Ok(TextFormat::Offset),
            other => Err(Error::argument(format!("unknown table format '{other}'"))),
        }
    }
}

/// An immutable, sorted table of ordinates together with the height range it
/// is known to cover completely.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinateTable {
    ordinates: Vec<f64>,
    height_min: f64,
    height_max: f64,
    source_id: String,
    precision_digits: u32,
}

impl OrdinateTable {
    /// Builds a table covering `(height_min, height_max]`.
    pub fn new(
        ordinates: Vec<f64>,
        height_min: f64,
        height_max: f64,
        source_id: impl Into<String>,
        precision_digits: u32,
    ) -> Result<Self> {
        if ordinates.is_empty() {
            return Err(Error::EmptyInput);
        }
        require_finite("height_min", height_min)?;
        require_finite("height_max", height_max)?;
        for (i, &g) in ordinates.iter().enumerate() {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::Validation(format!(
                    "ordinate {} is not a positive finite number: {g}",
                    i + 1
                )));
            }
        }
        if let Some(i) = ordinates.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Validation(format!(
                "ordinates decrease at index {}: {} > {}",
                i + 2,
                ordinates[i],
                ordinates[i + 1]
            )));
        }
        let first = ordinates[0];
        let last = *ordinates.last().unwrap();
        if !(first > height_min && last <= height_max) {
            return Err(Error::Validation(format!(
                "ordinates [{first}, {last}] not inside coverage ({height_min}, {height_max}]"
            )));
        }
        Ok(Self {
            ordinates,
            height_min,
            height_max,
            source_id: source_id.into(),
            precision_digits,
        })
    }

    /// A table whose coverage runs from 0 to its last ordinate.
    pub fn from_ordinates(
        ordinates: Vec<f64>,
        source_id: impl Into<String>,
        precision_digits: u32,
    ) -> Result<Self> {
        let top = ordinates.last().copied().ok_or(Error::EmptyInput)?;
        Self::new(ordinates, 0.0, top, source_id, precision_digits)
    }

    /// Same ordinates with a different coverage claim.
    pub fn with_coverage(self, height_min: f64, height_max: f64) -> Result<Self> {
        Self::new(
            self.ordinates,
            height_min,
            height_max,
            self.source_id,
            self.precision_digits,
        )
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn height_min(&self) -> f64 {
        self.height_min
    }

    pub fn height_max(&self) -> f64 {
        self.height_max
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn precision_digits(&self) -> u32 {
        self.precision_digits
    }

    /// `γ_n` for 1-based `n`.
    pub fn ordinate(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::argument("ordinate indices start at 1"));
        }
        self.ordinates.get(n - 1).copied().ok_or_else(|| {
            Error::coverage(format!(
                "index {n} beyond table of {} ordinates",
                self.len()
            ))
        })
    }

    /// Smallest absolute difference the source can resolve.
    pub fn resolution(&self) -> f64 {
        10f64.powi(-(self.precision_digits as i32))
    }

    pub(crate) fn require_covers(&self, lo: f64, hi: f64) -> Result<()> {
        if lo < self.height_min || hi > self.height_max {
            return Err(Error::coverage(format!(
                "requested range [{lo}, {hi}] exceeds table coverage ({}, {}]",
                self.height_min, self.height_max
            )));
        }
        Ok(())
    }

    /// Number of ordinates `≤ t`, without the coverage check.
    pub(crate) fn count_le(&self, t: f64) -> usize {
        self.ordinates.partition_point(|&g| g <= t)
    }

    /// `N(T)`: the number of ordinates in `(0, T]`.
    pub fn count_upto(&self, t: f64) -> Result<usize> {
        require_finite("T", t)?;
        if t > self.height_max {
            return Err(Error::coverage(format!(
                "T = {t} is above the table's coverage limit {}",
                self.height_max
            )));
        }
        if t < self.height_min {
            return Err(Error::coverage(format!(
                "T = {t} is below the table's coverage start {}",
                self.height_min
            )));
        }
        Ok(self.count_le(t))
    }

    /// `N(t)` minus the Riemann–von Mangoldt main term; equals `S(t) + O(1/t)`.
    pub fn s_of_t(&self, t: f64) -> Result<f64> {
        require_finite("t", t)?;
        if t <= 2.0 * PI {
            return Err(Error::domain(format!("S(t) needs t > 2π, got {t}")));
        }
        let n = self.count_upto(t)?;
        Ok(n as f64 - rvm_main_term(t)?)
    }

    /// The `r` consecutive gaps `g_n, …, g_{n+r−1}` with `g_k = γ_{k+1} − γ_k`.
    pub fn gap_sequence(&self, n: usize, r: usize) -> Result<GapSequence> {
        if n == 0 {
            return Err(Error::argument("ordinate indices start at 1"));
        }
        if n + r > self.len() {
            return Err(Error::coverage(format!(
                "gaps {n}..{} need γ_{} but the table ends at γ_{}",
                n + r - 1,
                n + r,
                self.len()
            )));
        }
        let gaps = self.ordinates[n - 1..n + r]
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        Ok(GapSequence {
            base_index: n,
            gaps,
        })
    }
}

/// Consecutive gaps starting at `g_{base_index}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSequence {
    pub base_index: usize,
    pub gaps: Vec<f64>,
}

/// `(T/2π) log(T/2π) − T/2π + 7/8`.
///
/// For `1 < T ≤ 2π` the value is still returned; see [`rvm_is_reliable`].
pub fn rvm_main_term(t: f64) -> Result<f64> {
    require_finite("T", t)?;
    if t <= 1.0 {
        return Err(Error::domain(format!("main term needs T > 1, got {t}")));
    }
    let x = t / (2.0 * PI);
    Ok(x * x.ln() - x + 0.875)
}

/// Whether `T` lies where the logarithm in the main term is positive.
pub fn rvm_is_reliable(t: f64) -> bool {
    t > 2.0 * PI
}

/// Parses an ordinate table from text in the given layout.
pub fn parse_ordinates<R: Read>(mut reader: R, format: TextFormat) -> Result<OrdinateTable> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Validation(format!("input is not UTF-8: {e}")))?;
    parse_str(text, format, "inline")
}

pub(crate) fn parse_str(text: &str, format: TextFormat, source: &str) -> Result<OrdinateTable> {
    let mut values = Vec::new();
    let mut digits = 0u32;
    let mut base: Option<f64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse {
            line: i + 1,
            message: format!("'{line}': {e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("'{line}' is not finite"),
            });
        }
        let frac = line
            .split_once('.')
            .map(|(_, f)| f.chars().take_while(char::is_ascii_digit).count() as u32)
            .unwrap_or(0);
        match (format, base) {
            (TextFormat::Offset, None) => {
                base = Some(v);
                continue;
            }
            (TextFormat::Offset, Some(b)) => values.push(b + v),
            (TextFormat::Plain, _) => values.push(v),
        }
        digits = digits.max(frac);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    OrdinateTable::from_ordinates(values, source, digits)
}

/// Reads a table from a file, accepting either text layout or the binary cache.
pub fn load_table(path: &std::path::Path, format: TextFormat) -> Result<OrdinateTable> {
    let bytes = std::fs::read(path)?;
    let source = path.display().to_string();
    if bytes.starts_with(crate::cache::MAGIC) {
        let ords = crate::cache::decode(&bytes)?;
        return OrdinateTable::from_ordinates(ords, source, 17);
    }
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Validation(format!("{source} is not UTF-8: {e}")))?;
    parse_str(text, format, &source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FIRST_30: &str = include_str!("../tests/data/first_30.txt");

    fn standard() -> OrdinateTable {
        parse_ordinates(FIRST_30.as_bytes(), TextFormat::Plain).unwrap()
    }

    #[test]
    fn parse_plain() {
        let t = parse_ordinates("14.134725\n21.022040\n".as_bytes(), TextFormat::Plain).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.precision_digits(), 6);
        assert_eq!(t.ordinates(), &[14.134725, 21.022040]);
    }

    #[test]
    fn parse_offset() {
        let t = parse_ordinates("# c\n10.0\n4.134725\n".as_bytes(), TextFormat::Offset).unwrap();
        assert_eq!(t.len(), 1);
        assert_abs_diff_eq!(t.ordinates()[0], 14.134725, epsilon = 1e-12);
    }

    #[test]
    fn parse_crlf_whitespace_comments() {
        let t = parse_ordinates(
            "# header\r\n  14.134725 \r\n\r\n#x\r\n\t21.022040\r\n".as_bytes(),
            TextFormat::Plain,
        )
        .unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn parse_rejects_decreasing() {
        let e = parse_ordinates("21.0\n14.1\n".as_bytes(), TextFormat::Plain).unwrap_err();
        assert!(matches!(e, Error::Validation(_)));
    }

    #[test]
    fn parse_reports_line_numbers() {
        let e = parse_ordinates("# a\n14.1\nxyz\n".as_bytes(), TextFormat::Plain).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn parse_empty() {
        for text in ["", "# only comments\n", "\n\n"] {
            assert!(matches!(
                parse_ordinates(text.as_bytes(), TextFormat::Plain),
                Err(Error::EmptyInput)
            ));
        }
        // a base height alone carries no ordinates
        assert!(matches!(
            parse_ordinates("10.0\n".as_bytes(), TextFormat::Offset),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn parse_rejects_non_utf8() {
        let e = parse_ordinates(&[0xff, 0xfe, b'\n'][..], TextFormat::Plain).unwrap_err();
        assert!(matches!(e, Error::Validation(_)));
    }

    #[test]
    fn counts_on_standard_table() {
        let t = standard().with_coverage(0.0, 101.5).unwrap();
        assert_eq!(t.count_upto(14.0).unwrap(), 0);
        assert_eq!(t.count_upto(15.0).unwrap(), 1);
        assert_eq!(t.count_upto(100.0).unwrap(), 29);
        assert!(matches!(t.count_upto(200.0), Err(Error::Coverage(_))));
    }

    #[test]
    fn count_is_right_continuous_with_multiplicity() {
        let t = OrdinateTable::from_ordinates(vec![1.0, 2.0, 2.0, 3.0], "ties", 1).unwrap();
        assert_eq!(t.count_upto(2.0 - 1e-12).unwrap(), 1);
        assert_eq!(t.count_upto(2.0).unwrap(), 3);
        assert_eq!(t.count_upto(3.0).unwrap(), 4);
    }

    #[test]
    fn main_term_examples() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(rvm_main_term(2.0 * PI * e).unwrap(), 0.875, epsilon = 1e-12);
        assert_abs_diff_eq!(rvm_main_term(100.0).unwrap(), 29.0, epsilon = 0.3);
        assert_abs_diff_eq!(rvm_main_term(2.0 * PI).unwrap(), -0.125, epsilon = 1e-12);
        assert!(!rvm_is_reliable(2.0 * PI));
        assert!(rvm_is_reliable(7.0));
        assert!(matches!(rvm_main_term(1.0), Err(Error::Domain(_))));
        assert!(matches!(rvm_main_term(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn s_of_t_examples() {
        let t = standard().with_coverage(0.0, 101.5).unwrap();
        assert_abs_diff_eq!(t.s_of_t(100.0).unwrap(), 0.0, epsilon = 0.5);
        let single = OrdinateTable::new(vec![14.134725], 0.0, 20.0, "one", 6).unwrap();
        assert_abs_diff_eq!(
            single.s_of_t(14.2).unwrap(),
            1.0 - rvm_main_term(14.2).unwrap(),
            epsilon = 1e-15
        );
        let g1 = 14.134725;
        let below = single.s_of_t(g1 - 1e-9).unwrap();
        let above = single.s_of_t(g1).unwrap();
        assert_abs_diff_eq!(above - below, 1.0, epsilon = 1e-8);
        assert!(matches!(single.s_of_t(5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gap_examples() {
        let t = standard();
        let g = t.gap_sequence(1, 1).unwrap();
        assert_eq!(g.base_index, 1);
        assert_abs_diff_eq!(g.gaps[0], 6.887315, epsilon = 1e-5);
        assert!(matches!(
            t.gap_sequence(t.len(), 1),
            Err(Error::Coverage(_))
        ));
        assert!(matches!(t.gap_sequence(0, 1), Err(Error::Argument(_))));
        let ties = OrdinateTable::from_ordinates(vec![1.0, 2.0, 2.0, 3.0], "ties", 1).unwrap();
        assert!(ties.gap_sequence(1, 3).unwrap().gaps.contains(&0.0));
    }

    #[test]
    fn table_invariants_enforced() {
        assert!(matches!(
            OrdinateTable::from_ordinates(vec![], "x", 0),
            Err(Error::EmptyInput)
        ));
        assert!(OrdinateTable::from_ordinates(vec![-1.0, 2.0], "x", 0).is_err());
        assert!(OrdinateTable::new(vec![5.0, 6.0], 5.0, 10.0, "x", 0).is_err());
        assert!(OrdinateTable::new(vec![5.0, 6.0], 0.0, 5.5, "x", 0).is_err());
    }

    proptest! {
        #[test]
        fn gap_sum_telescopes(
            mut xs in proptest::collection::vec(1.0f64..1e4, 2..200),
            n_frac in 0.0f64..1.0,
            r_frac in 0.0f64..1.0,
        ) {
            xs.sort_by(f64::total_cmp);
            let t = OrdinateTable::from_ordinates(xs.clone(), "p", 6).unwrap();
            let n = 1 + ((xs.len() - 1) as f64 * n_frac) as usize;
            let n = n.min(xs.len() - 1);
            let r = ((xs.len() - n) as f64 * r_frac) as usize;
            let g = t.gap_sequence(n, r).unwrap();
            prop_assert!(g.gaps.iter().all(|&x| x >= 0.0));
            let total: f64 = g.gaps.iter().sum();
            let direct = xs[n - 1 + r] - xs[n - 1];
            prop_assert!((total - direct).abs() <= 1e-9 * direct.max(1.0));
        }

        #[test]
        fn count_nondecreasing(mut xs in proptest::collection::vec(1.0f64..100.0, 1..100),
                               a in 0.0f64..100.0, b in 0.0f64..100.0) {
            xs.sort_by(f64::total_cmp);
            let t = OrdinateTable::new(xs, 0.0, 100.0, "p", 6).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(t.count_upto(lo).unwrap() <= t.count_upto(hi).unwrap());
        }
    }
}
