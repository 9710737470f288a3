use crate::autonet::{encoder_forward, Dataset, MlpParams};
use crate::{Error, Result};

/// Equal-width histogram; values on the upper edge fall in the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

fn bin_of(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    (((x - lo) / (hi - lo) * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    pub fn add(&mut self, x: f64) {
        let b = bin_of(x, self.lo, self.hi, self.counts.len());
        self.counts[b] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }

    /// `bin_lo,bin_hi,count,density` rows; density integrates to one.
    pub fn to_csv(&self) -> String {
        let e = self.edges();
        let total = self.total().max(1) as f64;
        let mut s = String::from("bin_lo,bin_hi,count,density\n");
        for (i, &c) in self.counts.iter().enumerate() {
            let w = e[i + 1] - e[i];
            let d = if w > 0.0 { c as f64 / total / w } else { 0.0 };
            s.push_str(&format!("{},{},{c},{d}\n", e[i], e[i + 1]));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub bins: (usize, usize),
    /// Row-major over `x` bins.
    pub counts: Vec<u64>,
}

impl Histogram2d {
    pub fn new(x: (f64, f64), y: (f64, f64), bins: (usize, usize)) -> Self {
        Self {
            x,
            y,
            bins,
            counts: vec![0; bins.0 * bins.1],
        }
    }

    pub fn add(&mut self, x: f64, y: f64) {
        let i = bin_of(x, self.x.0, self.x.1, self.bins.0);
        let j = bin_of(y, self.y.0, self.y.1, self.bins.1);
        self.counts[i * self.bins.1 + j] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `x_lo,x_hi,y_lo,y_hi,count,density` rows.
    pub fn to_csv(&self) -> String {
        let ex = Histogram::new(self.x.0, self.x.1, self.bins.0).edges();
        let ey = Histogram::new(self.y.0, self.y.1, self.bins.1).edges();
        let total = self.total().max(1) as f64;
        let mut s = String::from("x_lo,x_hi,y_lo,y_hi,count,density\n");
        for i in 0..self.bins.0 {
            for j in 0..self.bins.1 {
                let c = self.counts[i * self.bins.1 + j];
                let area = (ex[i + 1] - ex[i]) * (ey[j + 1] - ey[j]);
                let d = if area > 0.0 {
                    c as f64 / total / area
                } else {
                    0.0
                };
                s.push_str(&format!(
                    "{},{},{},{},{c},{d}\n",
                    ex[i],
                    ex[i + 1],
                    ey[j],
                    ey[j + 1]
                ));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentHistograms {
    /// One histogram over `[-1, 1]` per latent coordinate.
    pub marginals: Vec<Histogram>,
    /// Joint histogram of `(ln G, z_last)`.
    pub joint: Histogram2d,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Encodes every sample of `data` and histograms the latent coordinates.
pub fn emit_latent_histograms(
    p: &MlpParams,
    data: &Dataset,
    bins: usize,
) -> Result<LatentHistograms> {
    if bins == 0 {
        return Err(Error::Config("bins must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::Config("histogram dataset is empty".into()));
    }
    let z = encoder_forward(&data.samples, p)?;
    let d = z.cols();
    let n = z.rows() as f64;
    let mut marginals = vec![Histogram::new(-1.0, 1.0, bins); d];
    let mut mean = vec![0.0; d];
    for r in 0..z.rows() {
        for (j, &v) in z.row(r).iter().enumerate() {
            marginals[j].add(v);
            mean[j] += v / n;
        }
    }
    let mut variance = vec![0.0; d];
    for r in 0..z.rows() {
        for (j, &v) in z.row(r).iter().enumerate() {
            variance[j] += (v - mean[j]) * (v - mean[j]) / n;
        }
    }
    let log_g: Vec<f64> = data
        .g
        .iter()
        .map(|g| g.max(f64::MIN_POSITIVE).ln())
        .collect();
    let lo = log_g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = log_g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut joint = Histogram2d::new((lo, hi), (-1.0, 1.0), (bins, bins));
    for (r, &lg) in log_g.iter().enumerate() {
        joint.add(lg, z.row(r)[d - 1]);
    }
    Ok(LatentHistograms {
        marginals,
        joint,
        mean,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autonet::generate_dataset;
    use crate::channel::RngStream;
    use crate::ldpc::ParityMatrix;
    use crate::modem::Constellation;

    #[test]
    fn counts_sum_to_samples() {
        let pm = ParityMatrix::ieee80211n_648();
        let data =
            generate_dataset(&[6.0, 12.0], 4, &pm, &Constellation::new(4).unwrap(), 2).unwrap();
        let p = MlpParams::init(MlpParams::layout(4), 3, &mut RngStream::new(2)).unwrap();
        let h = emit_latent_histograms(&p, &data, 20).unwrap();
        assert_eq!(h.marginals.len(), 3);
        for m in &h.marginals {
            assert_eq!(m.total(), data.len() as u64);
            assert_eq!((m.lo, m.hi), (-1.0, 1.0));
        }
        assert_eq!(h.joint.total(), data.len() as u64);
        assert_eq!(h.marginals[0].to_csv().lines().count(), 21);
        assert_eq!(h.joint.to_csv().lines().count(), 401);
        assert!(h.variance.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn edges_and_clamping() {
        let mut h = Histogram::new(-1.0, 1.0, 4);
        for x in [-1.0, -0.5, 0.0, 0.99, 1.0] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![1, 1, 1, 2]);
        assert_eq!(h.edges(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
