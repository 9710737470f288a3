use crate::{Error, Result};

/// A scalar quantizer given by sorted thresholds and one level per cell.
///
/// Cell `i` is `[t_{i-1}, t_i)`; a value equal to a threshold belongs to the
/// upper cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCodebook {
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

impl ScalarCodebook {
    pub fn new(thresholds: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || thresholds.len() + 1 != levels.len() {
            return Err(Error::Config(format!(
                "{} thresholds need {} levels, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                levels.len()
            )));
        }
        if thresholds.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::Config("codebook values must be finite".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self { thresholds, levels })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn cell(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= x)
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.levels[self.cell(x)]
    }

    /// `thresholds <values>` and `levels <values>` lines.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!(" {x:e}")).collect::<String>();
        format!(
            "thresholds{}\nlevels{}\n",
            join(&self.thresholds),
            join(&self.levels)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let mut row = |key: &str| -> Result<Vec<f64>> {
            let (i, l) = lines.next().ok_or_else(|| Error::Format {
                line: 0,
                message: format!("missing `{key}` line"),
            })?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("expected `{key}`"),
                });
            }
            it.map(|t| {
                t.parse::<f64>().map_err(|_| Error::Format {
                    line: i + 1,
                    message: format!("bad number `{t}`"),
                })
            })
            .collect()
        };
        let t = row("thresholds")?;
        let l = row("levels")?;
        Self::new(t, l)
    }
}

/// Sorted samples with prefix sums of weights, for fast cell statistics.
#[derive(Debug, Clone)]
pub(crate) struct SortedSamples {
    pub values: Vec<f64>,
    /// `prefix[j][i]` is the sum of weight `j` over the first `i` samples.
    pub prefix: Vec<Vec<f64>>,
}

impl SortedSamples {
    pub fn new(mut rows: Vec<(f64, Vec<f64>)>) -> Self {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let w = rows.first().map_or(0, |r| r.1.len());
        let mut prefix = vec![vec![0.0; rows.len() + 1]; w];
        for (i, (_, ws)) in rows.iter().enumerate() {
            for (j, &x) in ws.iter().enumerate() {
                prefix[j][i + 1] = prefix[j][i] + x;
            }
        }
        Self {
            values: rows.into_iter().map(|r| r.0).collect(),
            prefix,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Sample index ranges of the cells defined by `thresholds`.
    pub fn cuts(&self, thresholds: &[f64]) -> Vec<usize> {
        let mut cuts = Vec::with_capacity(thresholds.len() + 2);
        cuts.push(0);
        for &t in thresholds {
            cuts.push(self.values.partition_point(|&v| v < t));
        }
        cuts.push(self.values.len());
        cuts
    }

    pub fn sum(&self, weight: usize, lo: usize, hi: usize) -> f64 {
        self.prefix[weight][hi] - self.prefix[weight][lo]
    }
}
