//! Mutual-information maximizing scalar LLR quantizer.
//!
//! With exact LLRs the bit posterior of a sample is `p = 1 / (1 + e^-L)`.
//! The fit alternates two steps that each lower `sum_i KL(p_i || q_cell(i))`:
//! cells are assigned to the closest cell posterior `q_j` in KL divergence
//! (an interval in `L`, since KL is linear in `p` for fixed `q`), then every
//! `q_j` is reset to the mean posterior of its cell. Minimizing that sum is
//! the same as maximizing `I(b; Q(L))` measured with posteriors, so the MI
//! trace never decreases.

use super::codebook::{ScalarCodebook, SortedSamples};
use crate::modem::LLR_MAX;
use crate::{Error, Result};

pub const MAX_MI_ITERATIONS: usize = 500;
pub const MAX_MI_TOLERANCE: f64 = 1e-9;
/// Initial levels are spread evenly over `[-INIT_SPAN, INIT_SPAN]`.
pub const INIT_SPAN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxMiFit {
    pub codebook: ScalarCodebook,
    /// MI in bits after each iteration.
    pub trace: Vec<f64>,
    /// MI of the returned codebook, bits.
    pub mutual_information: f64,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binary entropy in bits from the two (unnormalized) class masses.
fn entropy2(s1: f64, s0: f64) -> f64 {
    let n = s1 + s0;
    let term = |s: f64| {
        if s > 0.0 {
            -(s / n) * (s / n).log2()
        } else {
            0.0
        }
    };
    term(s1) + term(s0)
}

/// Decision boundaries between adjacent levels under the KL assignment rule.
fn boundaries(levels: &[f64]) -> Option<Vec<f64>> {
    levels
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a >= b {
                return None;
            }
            let up = softplus(-a) - softplus(-b);
            let down = softplus(b) - softplus(a);
            let t = down.ln() - up.ln();
            t.is_finite().then_some(t)
        })
        .collect()
}

struct Posteriors(SortedSamples);

impl Posteriors {
    fn new(llrs: impl Iterator<Item = f64>) -> Self {
        let rows = llrs
            .map(|l| {
                let l = l.clamp(-LLR_MAX, LLR_MAX);
                (l, vec![sigmoid(l), sigmoid(-l)])
            })
            .collect();
        Self(SortedSamples::new(rows))
    }

    /// MI in bits for the partition given by `cuts`, plus each cell's LLR.
    fn evaluate(&self, cuts: &[usize]) -> (f64, Vec<Option<f64>>) {
        let s = &self.0;
        let n = s.len() as f64;
        let (t1, t0) = (s.sum(0, 0, s.len()), s.sum(1, 0, s.len()));
        let mut cond = 0.0;
        let mut llrs = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (s1, s0) = (s.sum(0, w[0], w[1]), s.sum(1, w[0], w[1]));
            if w[1] > w[0] {
                cond += (s1 + s0) / n * entropy2(s1, s0);
                llrs.push(Some((s1.ln() - s0.ln()).clamp(-LLR_MAX, LLR_MAX)));
            } else {
                llrs.push(None);
            }
        }
        (entropy2(t1, t0) - cond, llrs)
    }
}

/// Fits an `n_levels` codebook to `(L, b)` samples.
pub fn fit_max_mi(samples: &[(f64, u8)], n_levels: usize) -> Result<MaxMiFit> {
    if n_levels == 0 {
        return Err(Error::Fit("n_levels must be at least 1".into()));
    }
    if samples.iter().any(|s| !s.0.is_finite()) {
        return Err(Error::Fit("non-finite LLR sample".into()));
    }
    let ones = samples.iter().filter(|s| s.1 != 0).count();
    if ones == 0 || ones == samples.len() {
        return Err(Error::Fit("samples must contain both bit values".into()));
    }
    let post = Posteriors::new(samples.iter().map(|s| s.0));
    let mut levels: Vec<f64> = if n_levels == 1 {
        vec![0.0]
    } else {
        (0..n_levels)
            .map(|i| -INIT_SPAN + 2.0 * INIT_SPAN * i as f64 / (n_levels - 1) as f64)
            .collect()
    };
    let mut trace = Vec::new();
    let mut best: Option<(f64, ScalarCodebook)> = None;
    for _ in 0..MAX_MI_ITERATIONS {
        let Some(thresholds) = boundaries(&levels) else {
            break;
        };
        let (mi, cell_llrs) = post.evaluate(&post.0.cuts(&thresholds));
        let next: Vec<f64> = cell_llrs
            .iter()
            .zip(&levels)
            .map(|(c, &old)| c.unwrap_or(old))
            .collect();
        let cb = ScalarCodebook::new(thresholds, next.clone())?;
        let prev = trace.last().copied();
        trace.push(mi);
        if best.as_ref().is_none_or(|(b, _)| mi > *b) {
            best = Some((mi, cb));
        }
        if prev.is_some_and(|p| mi - p < MAX_MI_TOLERANCE) {
            break;
        }
        levels = next;
    }
    let (mutual_information, codebook) =
        best.ok_or_else(|| Error::Fit("initial codebook is degenerate".into()))?;
    Ok(MaxMiFit {
        codebook,
        trace,
        mutual_information,
    })
}

/// Posterior-based MI estimate `I(b; Q(L))` in bits for a given codebook.
pub fn quantized_mi(llrs: &[f64], cb: &ScalarCodebook) -> f64 {
    let post = Posteriors::new(llrs.iter().copied());
    post.evaluate(&post.0.cuts(cb.thresholds())).0
}

/// Posterior-based MI estimate `I(b; L)` in bits, without quantization.
pub fn unquantized_mi(llrs: &[f64]) -> f64 {
    let n = llrs.len() as f64;
    let (mut t1, mut t0, mut cond) = (0.0, 0.0, 0.0);
    for &l in llrs {
        let l = l.clamp(-LLR_MAX, LLR_MAX);
        let (p1, p0) = (sigmoid(l), sigmoid(-l));
        t1 += p1;
        t0 += p0;
        cond += entropy2(p1, p0);
    }
    entropy2(t1, t0) - cond / n
}

/// Plug-in MI in bits from joint counts of (cell, bit).
pub fn empirical_mi(samples: &[(f64, u8)], cb: &ScalarCodebook) -> f64 {
    let mut counts = vec![[0.0f64; 2]; cb.len()];
    for &(l, b) in samples {
        counts[cb.cell(l)][usize::from(b != 0)] += 1.0;
    }
    let n = samples.len() as f64;
    let pb = [0, 1].map(|b| counts.iter().map(|c| c[b]).sum::<f64>() / n);
    let mut mi = 0.0;
    for c in &counts {
        let pc = (c[0] + c[1]) / n;
        for b in 0..2 {
            let pj = c[b] / n;
            if pj > 0.0 {
                mi += pj * (pj / (pc * pb[b])).log2();
            }
        }
    }
    mi
}

/// One codebook per bit position of a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMiQuantizer {
    pub per_bit: Vec<ScalarCodebook>,
}

impl MaxMiQuantizer {
    pub fn apply(&self, llrs: &mut [f64]) {
        for (l, cb) in llrs.iter_mut().zip(self.per_bit.iter().cycle()) {
            *l = cb.apply(*l);
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("llrq-maxmi 1\nbits {}\n", self.per_bit.len());
        for (i, cb) in self.per_bit.iter().enumerate() {
            s.push_str(&format!("bit {i}\n{}", cb.to_text()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let bad = |line: usize, m: &str| Error::Format {
            line,
            message: m.into(),
        };
        if lines.first().map(|l| l.trim()) != Some("llrq-maxmi 1") {
            return Err(bad(1, "expected `llrq-maxmi 1`"));
        }
        let k: usize = lines
            .get(1)
            .and_then(|l| l.trim().strip_prefix("bits "))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(2, "expected `bits <k>`"))?;
        let mut per_bit = Vec::with_capacity(k);
        for i in 0..k {
            let at = 2 + 3 * i;
            if lines.get(at).map(|l| l.trim()) != Some(format!("bit {i}").as_str()) {
                return Err(bad(at + 1, "expected `bit <i>`"));
            }
            let body = lines
                .get(at + 1..at + 3)
                .ok_or_else(|| bad(at + 2, "truncated codebook"))?;
            per_bit.push(
                ScalarCodebook::from_text(&body.join("\n"))
                    .map_err(|e| bad(at + 2, &e.to_string()))?,
            );
        }
        Ok(Self { per_bit })
    }
}
