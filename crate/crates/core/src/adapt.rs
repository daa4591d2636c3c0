//! Code rates, reconciliation efficiency, distillation efficiency and the
//! table that maps an error rate to the best effective-matrix width.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Binary Shannon entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::invalid(format!("probability {e} outside [0, 1]")));
    }
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    Ok(-e * e.log2() - (1.0 - e) * (1.0 - e).log2())
}

/// Rate `1 - m/n` of the full mother matrix.
pub fn mother_rate(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::invalid(format!("need 0 < m < n, got m={m}, n={n}")));
    }
    Ok(1.0 - m as f64 / n as f64)
}

/// Rate of an effective matrix of a given width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub width: usize,
    pub eer: f64,
}

pub fn eer(m: usize, width: usize) -> Result<RatePoint> {
    if width <= m {
        return Err(Error::invalid(format!(
            "width {width} must exceed the {m} syndrome bits"
        )));
    }
    Ok(RatePoint {
        width,
        eer: mother_rate(m, width)?,
    })
}

/// Disclosed bits relative to the Shannon minimum, `(1 - r) / h(e)`.
pub fn recon_efficiency(rate: f64, e: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::invalid(format!("rate {rate} outside (0, 1)")));
    }
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::invalid(format!("error rate {e} outside (0, 0.5)")));
    }
    Ok((1.0 - rate) / binary_entropy(e)?)
}

/// Rates used over a run together with how many blocks each one encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencySession {
    pub entries: Vec<(f64, u64)>,
    pub error_rate: f64,
}

/// Block-count weighted mean of per-rate efficiencies.
pub fn averaged_efficiency(session: &EfficiencySession) -> Result<f64> {
    if session.entries.is_empty() {
        return Err(Error::invalid("empty efficiency session"));
    }
    let mut weighted = 0.0;
    let mut blocks = 0u64;
    for &(rate, count) in &session.entries {
        if count == 0 {
            return Err(Error::invalid("block counts must be positive"));
        }
        weighted += recon_efficiency(rate, session.error_rate)? * count as f64;
        blocks += count;
    }
    Ok(weighted / blocks as f64)
}

/// Expected fraction of sifted bits retained: `(1 - FER) * EER`.
pub fn alpha(fer: f64, eer: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fer) {
        return Err(Error::invalid(format!("FER {fer} outside [0, 1]")));
    }
    if !(eer > 0.0 && eer < 1.0) {
        return Err(Error::invalid(format!("EER {eer} outside (0, 1)")));
    }
    Ok((1.0 - fer) * eer)
}

/// One (error rate, width) entry. `alpha` is `None` when decoding almost
/// never succeeds there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCell {
    pub alpha: Option<f64>,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// The working cell chosen for an error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub error_rate: f64,
    pub width: usize,
    pub alpha: f64,
    pub fer: f64,
}

pub const ALPHA_CSV_HEADER: &str = "error_rate,width,alpha,fer,ci_low,ci_high,working";

/// Distillation efficiency over an error-rate grid (rows) and a set of
/// widths (columns, decreasing), with the argmax width of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    error_rates: Vec<f64>,
    widths: Vec<usize>,
    cells: Vec<TableCell>,
    working: Vec<Option<usize>>,
}

impl AlphaTable {
    /// `cells` is row-major: all widths of the first error rate, then the
    /// next error rate, and so on.
    pub fn new(error_rates: Vec<f64>, widths: Vec<usize>, cells: Vec<TableCell>) -> Result<Self> {
        Self::validate_axes(&error_rates, &widths, cells.len())?;
        let working = cells
            .chunks(widths.len())
            .map(|row| {
                let mut best: Option<(usize, f64)> = None;
                for (k, cell) in row.iter().enumerate() {
                    // widths decrease along the row, so strict `>` keeps the
                    // larger width on ties
                    if let Some(a) = cell.alpha {
                        if best.is_none_or(|(_, b)| a > b) {
                            best = Some((k, a));
                        }
                    }
                }
                best.map(|(k, _)| k)
            })
            .collect();
        Ok(AlphaTable {
            error_rates,
            widths,
            cells,
            working,
        })
    }

    fn validate_axes(error_rates: &[f64], widths: &[usize], num_cells: usize) -> Result<()> {
        if error_rates.is_empty() || widths.is_empty() {
            return Err(Error::invalid("alpha table needs at least one error rate and width"));
        }
        if error_rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("error rates must be strictly increasing"));
        }
        if widths.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("widths must be strictly decreasing"));
        }
        if num_cells != error_rates.len() * widths.len() {
            return Err(Error::invalid("cell count does not match the grid"));
        }
        Ok(())
    }

    pub fn error_rates(&self) -> &[f64] {
        &self.error_rates
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn cell(&self, row: usize, col: usize) -> &TableCell {
        &self.cells[row * self.widths.len() + col]
    }

    pub fn row(&self, row: usize) -> &[TableCell] {
        let w = self.widths.len();
        &self.cells[row * w..(row + 1) * w]
    }

    /// Working width of a row, if any cell in it is present.
    pub fn working_width(&self, row: usize) -> Option<usize> {
        self.working[row].map(|k| self.widths[k])
    }

    fn selection_at(&self, row: usize) -> Option<Selection> {
        let k = self.working[row]?;
        let cell = self.cell(row, k);
        Some(Selection {
            error_rate: self.error_rates[row],
            width: self.widths[k],
            alpha: cell.alpha.expect("working cells are present"),
            fer: cell.fer,
        })
    }

    /// Working cell for error rate `e`, looked up at the first grid point at
    /// or above `e`. `None` means no characterized width can reconcile `e`.
    pub fn select(&self, e: f64) -> Option<Selection> {
        const SLACK: f64 = 1e-12;
        let start = self.error_rates.iter().position(|&r| r >= e - SLACK)?;
        (start..self.error_rates.len()).find_map(|row| self.selection_at(row))
    }

    pub fn select_width(&self, e: f64) -> Option<usize> {
        self.select(e).map(|s| s.width)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(ALPHA_CSV_HEADER);
        out.push('\n');
        for (r, &e) in self.error_rates.iter().enumerate() {
            for (k, &w) in self.widths.iter().enumerate() {
                let cell = self.cell(r, k);
                let alpha = cell.alpha.map(|a| format!("{a:.4}")).unwrap_or_default();
                writeln!(
                    out,
                    "{},{w},{alpha},{:.6},{:.6},{:.6},{}",
                    format_rate(e),
                    cell.fer,
                    cell.ci_low,
                    cell.ci_high,
                    u8::from(self.working[r] == Some(k)),
                )
                .unwrap();
            }
        }
        out
    }

    /// Reads a table written by [`AlphaTable::to_csv`]. Working flags are
    /// taken from the file.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == ALPHA_CSV_HEADER => {}
            Some((i, _)) => return Err(Error::parse(i + 1, "unexpected alpha table header")),
            None => return Err(Error::parse(1, "empty alpha table")),
        }

        let mut rates: Vec<f64> = Vec::new();
        let mut widths: Vec<usize> = Vec::new();
        let mut cells = Vec::new();
        let mut flags = Vec::new();
        for (i, line) in lines {
            let ln = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 7 {
                return Err(Error::parse(ln, format!("expected 7 fields, got {}", fields.len())));
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(ln, format!("bad {what} {s:?}")))
            };
            let e = num(fields[0], "error rate")?;
            let w: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad width {:?}", fields[1])))?;
            let alpha = match fields[2] {
                "" => None,
                s => Some(num(s, "alpha")?),
            };
            let cell = TableCell {
                alpha,
                fer: num(fields[3], "fer")?,
                ci_low: num(fields[4], "ci_low")?,
                ci_high: num(fields[5], "ci_high")?,
            };
            let working = match fields[6] {
                "0" => false,
                "1" => true,
                s => return Err(Error::parse(ln, format!("bad working flag {s:?}"))),
            };
            if working && alpha.is_none() {
                return Err(Error::parse(ln, "working flag on an absent cell"));
            }

            if rates.last() != Some(&e) {
                rates.push(e);
            }
            if rates.len() == 1 {
                widths.push(w);
            } else {
                let k = cells.len() % widths.len().max(1);
                if widths.get(k) != Some(&w) {
                    return Err(Error::parse(ln, "rows do not repeat the same widths"));
                }
            }
            cells.push(cell);
            flags.push(working);
        }
        Self::validate_axes(&rates, &widths, cells.len())
            .map_err(|e| Error::parse(0, e.to_string()))?;

        let mut working = Vec::with_capacity(rates.len());
        for (r, row) in flags.chunks(widths.len()).enumerate() {
            let marked: Vec<usize> = (0..row.len()).filter(|&k| row[k]).collect();
            if marked.len() > 1 {
                return Err(Error::parse(0, format!("several working cells for row {}", r + 1)));
            }
            working.push(marked.first().copied());
        }
        Ok(AlphaTable {
            error_rates: rates,
            widths,
            cells,
            working,
        })
    }
}

/// Decimal form with at least three places and enough to round-trip.
pub(crate) fn format_rate(e: f64) -> String {
    for prec in 3..=10 {
        let s = format!("{e:.prec$}");
        if s.parse::<f64>().is_ok_and(|v| (v - e).abs() < 1e-12) {
            return s;
        }
    }
    format!("{e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(alpha: Option<f64>, fer: f64) -> TableCell {
        TableCell {
            alpha,
            fer,
            ci_low: fer,
            ci_high: fer,
        }
    }

    /// Widths 5120/4096/3072 over 1.0%..1.9% with made-up FERs shaped like a
    /// waterfall per width.
    fn toy_table() -> AlphaTable {
        let rates: Vec<f64> = (10..20).map(|k| k as f64 / 1000.0).collect();
        let widths = vec![5120, 4096, 3072];
        let mut cells = Vec::new();
        for &e in &rates {
            for &w in &widths {
                let knee = match w {
                    5120 => 0.014,
                    4096 => 0.018,
                    _ => 0.030,
                };
                let fer = if e <= knee { 0.0 } else { 1.0 };
                let eer = 1.0 - 1024.0 / w as f64;
                let a = alpha(fer, eer).unwrap();
                cells.push(cell(if fer >= 0.99 { None } else { Some(a) }, fer));
            }
        }
        AlphaTable::new(rates, widths, cells).unwrap()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.02).unwrap() - 0.141441).abs() < 5e-7);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn rates() {
        assert!((mother_rate(1024, 5120).unwrap() - 0.8).abs() < 1e-15);
        assert!((mother_rate(1024, 2048).unwrap() - 0.5).abs() < 1e-15);
        assert!((mother_rate(1024, 3072).unwrap() - 0.666667).abs() < 5e-7);
        assert!(mother_rate(1024, 1024).is_err());
        assert!((eer(1024, 4096).unwrap().eer - 0.75).abs() < 1e-15);
        assert!((eer(1024, 1025).unwrap().eer - 1.0 / 1025.0).abs() < 1e-15);
        assert!((eer(1024, 2560).unwrap().eer - 0.6).abs() < 1e-15);
        assert!(eer(1024, 1024).is_err());
    }

    #[test]
    fn efficiency_values() {
        // 0.2 / h(0.02) and 0.25 / h(0.02), h evaluated independently
        assert!((recon_efficiency(0.8, 0.02).unwrap() - 1.414022).abs() < 1e-5);
        assert!((recon_efficiency(0.75, 0.02).unwrap() - 1.767527).abs() < 1e-5);
        let h = binary_entropy(0.05).unwrap();
        assert!((recon_efficiency(1.0 - h, 0.05).unwrap() - 1.0).abs() < 1e-12);
        assert!(recon_efficiency(0.8, 0.0).is_err());
    }

    #[test]
    fn averaged_efficiency_values() {
        let s = EfficiencySession {
            entries: vec![(0.8, 10), (0.75, 10)],
            error_rate: 0.02,
        };
        assert!((averaged_efficiency(&s).unwrap() - 1.590774).abs() < 1e-5);
        let single = EfficiencySession {
            entries: vec![(0.8, 3)],
            error_rate: 0.02,
        };
        let single_eff = averaged_efficiency(&single).unwrap();
        assert!((single_eff - recon_efficiency(0.8, 0.02).unwrap()).abs() < 1e-14);
        let empty = EfficiencySession {
            entries: vec![],
            error_rate: 0.02,
        };
        assert!(averaged_efficiency(&empty).is_err());
    }

    #[test]
    fn alpha_values() {
        assert!((alpha(0.0, 0.8).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(alpha(1.0, 0.8).unwrap(), 0.0);
        assert!((alpha(0.194, 0.8).unwrap() - 0.6448).abs() < 1e-12);
        assert!(alpha(1.2, 0.8).is_err());
    }

    #[test]
    fn selection_follows_working_region() {
        let t = toy_table();
        assert_eq!(t.select_width(0.010), Some(5120));
        assert_eq!(t.select_width(0.017), Some(4096));
        assert_eq!(t.select_width(0.019), Some(3072));
        // between grid points: round up to the next row
        assert_eq!(t.select_width(0.0141), Some(4096));
        // below the grid: first row
        assert_eq!(t.select_width(0.001), Some(5120));
        // above the grid
        assert_eq!(t.select_width(0.025), None);
    }

    #[test]
    fn ties_prefer_larger_width() {
        let cells = vec![cell(Some(0.5), 0.0), cell(Some(0.5), 0.0)];
        let t = AlphaTable::new(vec![0.01], vec![4096, 2048], cells).unwrap();
        assert_eq!(t.working_width(0), Some(4096));
    }

    #[test]
    fn empty_rows_are_infeasible() {
        let cells = vec![cell(Some(0.7), 0.0), cell(None, 1.0)];
        let t = AlphaTable::new(vec![0.01, 0.02], vec![4096], cells).unwrap();
        assert_eq!(t.select_width(0.015), None);
    }

    #[test]
    fn csv_round_trip() {
        let t = toy_table();
        let text = t.to_csv();
        assert!(text.starts_with("error_rate,width,alpha,fer,ci_low,ci_high,working\n0.010,5120,0.8000,"));
        let back = AlphaTable::from_csv(&text).unwrap();
        assert_eq!(back.error_rates(), t.error_rates());
        assert_eq!(back.widths(), t.widths());
        for r in 0..t.error_rates().len() {
            assert_eq!(back.working_width(r), t.working_width(r));
        }
        assert!(AlphaTable::from_csv("").is_err());
        assert!(AlphaTable::from_csv("nope\n").is_err());
    }

    #[test]
    fn rate_formatting() {
        assert_eq!(format_rate(0.01), "0.010");
        assert_eq!(format_rate(0.0125), "0.0125");
    }
}
