//! MacKay alist format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! col_degree[0..n]
//! row_degree[0..m]
//! n lines: 1-based check indices of each column (zero padded)
//! m lines: 1-based variable indices of each row (zero padded)
//! ```
//!
//! Zero padding is optional. The column and row sections must describe the
//! same matrix.

use super::ParityMatrix;
use crate::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line, parsed as unsigned integers.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::AlistParse {
                        line: i + 1,
                        message: format!("non-numeric token {tok:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::AlistParse {
            line: self.last + 1,
            message: format!("unexpected end of input while reading {what}"),
        })
    }
}

fn expect_len(line: usize, nums: &[usize], len: usize, what: &str) -> Result<()> {
    if nums.len() != len {
        return Err(Error::AlistParse {
            line,
            message: format!("{what}: expected {len} values, found {}", nums.len()),
        });
    }
    Ok(())
}

/// Reads the lists of one section, dropping zero padding and checking degrees.
fn read_lists(
    lines: &mut Lines,
    count: usize,
    degrees: &[usize],
    bound: usize,
    what: &str,
) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut lists = Vec::with_capacity(count);
    for (idx, &degree) in degrees.iter().enumerate() {
        let (line, nums) = lines.next_numbers(what)?;
        let entries: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
        if entries.len() != degree {
            return Err(Error::AlistParse {
                line,
                message: format!(
                    "{what} {idx}: declared degree {degree}, found {}",
                    entries.len()
                ),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
            return Err(Error::AlistParse {
                line,
                message: format!("{what} {idx}: index {bad} exceeds {bound}"),
            });
        }
        lists.push((line, entries.into_iter().map(|x| x - 1).collect()));
    }
    Ok(lists)
}

pub fn load_alist(text: &str) -> Result<ParityMatrix> {
    let mut lines = Lines::new(text);
    let (line, dims) = lines.next_numbers("dimensions")?;
    expect_len(line, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    let (line, maxes) = lines.next_numbers("maximum degrees")?;
    expect_len(line, &maxes, 2, "maximum degrees")?;
    let (line, col_deg) = lines.next_numbers("column degrees")?;
    expect_len(line, &col_deg, n, "column degrees")?;
    if col_deg.iter().max().copied().unwrap_or(0) > maxes[0] {
        return Err(Error::AlistParse {
            line,
            message: "column degree exceeds declared maximum".into(),
        });
    }
    let (line, row_deg) = lines.next_numbers("row degrees")?;
    expect_len(line, &row_deg, m, "row degrees")?;
    if row_deg.iter().max().copied().unwrap_or(0) > maxes[1] {
        return Err(Error::AlistParse {
            line,
            message: "row degree exceeds declared maximum".into(),
        });
    }

    let cols = read_lists(&mut lines, n, &col_deg, m, "column")?;
    let rows = read_lists(&mut lines, m, &row_deg, n, "row")?;

    let pm =
        ParityMatrix::from_checks(n, rows.into_iter().map(|(_, r)| r).collect()).map_err(|e| {
            Error::AlistParse {
                line: lines.last,
                message: e.to_string(),
            }
        })?;
    for (v, (line, mut checks)) in cols.into_iter().enumerate() {
        checks.sort_unstable();
        if checks != pm.var_checks(v) {
            return Err(Error::AlistParse {
                line,
                message: format!("column {v} disagrees with the row section"),
            });
        }
    }
    Ok(pm)
}

/// Writes `pm` as a zero-padded alist.
pub fn to_alist(pm: &ParityMatrix) -> String {
    use std::fmt::Write;
    let col_deg: Vec<usize> = (0..pm.n()).map(|v| pm.var_checks(v).len()).collect();
    let row_deg: Vec<usize> = (0..pm.m()).map(|c| pm.check_vars(c).len()).collect();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let join = |xs: &mut dyn Iterator<Item = usize>| {
        xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", pm.n(), pm.m());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut col_deg.iter().copied()));
    let _ = writeln!(out, "{}", join(&mut row_deg.iter().copied()));
    for v in 0..pm.n() {
        let list = pm.var_checks(v);
        let padded = list
            .iter()
            .map(|&c| c + 1)
            .chain(std::iter::repeat_n(0, max_col - list.len()));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    for c in 0..pm.m() {
        let list = pm.check_vars(c);
        let padded = list
            .iter()
            .map(|&v| v + 1)
            .chain(std::iter::repeat_n(0, max_row - list.len()));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::toy::TOY_ALIST;
    use crate::ldpc::IEEE80211N_648_R12_ALIST;

    #[test]
    fn toy_degrees_echo_input() {
        let h = load_alist(TOY_ALIST).unwrap();
        assert_eq!(h.n(), 6);
        assert_eq!(h.m(), 3);
        let degs: Vec<usize> = (0..6).map(|v| h.var_checks(v).len()).collect();
        assert_eq!(degs, vec![2, 2, 2, 1, 1, 1]);
    }

    #[test]
    fn truncated_file_is_an_error() {
        let cut: String = TOY_ALIST.lines().take(8).collect::<Vec<_>>().join("\n");
        match load_alist(&cut) {
            Err(Error::AlistParse { message, .. }) => assert!(message.contains("end of input")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_line() {
        let broken = TOY_ALIST.replacen("1 2 4", "1 x 4", 1);
        assert_eq!(
            load_alist(&broken).unwrap_err(),
            Error::AlistParse {
                line: 11,
                message: "non-numeric token \"x\" in row".into()
            }
        );
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let broken = TOY_ALIST.replacen("2 2 2 1 1 1", "2 2 2 1 1 2", 1);
        assert!(matches!(
            load_alist(&broken),
            Err(Error::AlistParse { line: 10, .. })
        ));
    }

    #[test]
    fn inconsistent_sections_are_an_error() {
        // column 4 claims check 2 while the row section keeps it in check 1
        let broken = TOY_ALIST.replacen("1 0\n2 0\n3 0", "2 0\n2 0\n3 0", 1);
        assert!(load_alist(&broken).is_err());
    }

    #[test]
    fn bundled_code_roundtrips() {
        let h = load_alist(IEEE80211N_648_R12_ALIST).unwrap();
        assert_eq!((h.n(), h.m()), (648, 324));
        assert_eq!(to_alist(&h), IEEE80211N_648_R12_ALIST);
    }

    #[test]
    fn unpadded_lists_are_accepted() {
        let unpadded = TOY_ALIST.replace(" 0\n", "\n");
        assert_eq!(
            load_alist(&unpadded).unwrap(),
            load_alist(TOY_ALIST).unwrap()
        );
    }
}
