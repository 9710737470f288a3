use super::ParityMatrix;
use crate::modem::LLR_MAX;

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckRule {
    /// Exact tanh-domain sum-product.
    #[default]
    SumProduct,
    MinSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    /// Hard decisions on the final posteriors.
    pub bits: Vec<u8>,
    /// Posterior LLRs, in the crate's `ln P(1)/P(0)` convention.
    pub posteriors: Vec<f64>,
    /// Every check satisfied and no posterior exactly zero.
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding belief-propagation decoder.
///
/// The decoder owns its message buffers, so one instance per worker lets
/// distinct frames decode concurrently.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    rule: CheckRule,
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edge: Vec<usize>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    channel: Vec<f64>,
    post: Vec<f64>,
    scratch: Vec<f64>,
}

impl BpDecoder {
    pub fn new(pm: &ParityMatrix, rule: CheckRule) -> Self {
        let mut check_start = Vec::with_capacity(pm.m() + 1);
        let mut edge_var = Vec::with_capacity(pm.num_edges());
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); pm.n()];
        check_start.push(0);
        for c in 0..pm.m() {
            for &v in pm.check_vars(c) {
                per_var[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        let mut var_start = Vec::with_capacity(pm.n() + 1);
        let mut var_edge = Vec::with_capacity(pm.num_edges());
        var_start.push(0);
        for edges in per_var {
            var_edge.extend(edges);
            var_start.push(var_edge.len());
        }
        let max_deg = check_start
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0);
        let e = edge_var.len();
        Self {
            rule,
            n: pm.n(),
            check_start,
            edge_var,
            var_start,
            var_edge,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            channel: vec![0.0; pm.n()],
            post: vec![0.0; pm.n()],
            scratch: vec![0.0; 2 * max_deg + 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Decodes one frame of channel LLRs (`ln P(1)/P(0)`).
    ///
    /// Panics if `llrs.len() != n` or `max_iter == 0`.
    pub fn decode(&mut self, llrs: &[f64], max_iter: usize) -> DecodeOutput {
        assert_eq!(llrs.len(), self.n, "LLR length must equal the code length");
        assert!(max_iter >= 1, "max_iter must be at least 1");
        // internally positive favours 0, the usual tanh-rule convention
        for (c, &l) in self.channel.iter_mut().zip(llrs) {
            *c = (-l).clamp(-LLR_MAX, LLR_MAX);
        }
        self.post.copy_from_slice(&self.channel);
        if self.syndrome_ok() {
            return self.output(true, 0);
        }
        for v in 0..self.n {
            for &e in &self.var_edge[self.var_start[v]..self.var_start[v + 1]] {
                self.v2c[e] = self.channel[v];
            }
        }
        for iter in 1..=max_iter {
            match self.rule {
                CheckRule::SumProduct => self.check_update_sum_product(),
                CheckRule::MinSum => self.check_update_min_sum(),
            }
            self.variable_update();
            if self.syndrome_ok() {
                return self.output(true, iter);
            }
        }
        self.output(false, max_iter)
    }

    fn check_update_sum_product(&mut self) {
        for c in 0..self.check_start.len() - 1 {
            let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
            let d = hi - lo;
            let (prefix, suffix) = self.scratch.split_at_mut(d + 1);
            prefix[0] = 1.0;
            for i in 0..d {
                prefix[i + 1] = prefix[i] * (0.5 * self.v2c[lo + i]).tanh();
            }
            suffix[d] = 1.0;
            for i in (0..d).rev() {
                suffix[i] = suffix[i + 1] * (0.5 * self.v2c[lo + i]).tanh();
            }
            for i in 0..d {
                let p = prefix[i] * suffix[i + 1];
                self.c2v[lo + i] = (((1.0 + p) / (1.0 - p)).ln()).clamp(-LLR_MAX, LLR_MAX);
            }
        }
    }

    fn check_update_min_sum(&mut self) {
        for c in 0..self.check_start.len() - 1 {
            let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
            let mut sign = 1.0f64;
            let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, lo);
            for e in lo..hi {
                let m = self.v2c[e];
                if m < 0.0 {
                    sign = -sign;
                }
                let a = m.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    argmin = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in lo..hi {
                let m = self.v2c[e];
                let own = if m < 0.0 { -1.0 } else { 1.0 };
                let mag = if e == argmin { min2 } else { min1 };
                self.c2v[e] = (sign * own * mag).clamp(-LLR_MAX, LLR_MAX);
            }
        }
    }

    fn variable_update(&mut self) {
        for v in 0..self.n {
            let edges = &self.var_edge[self.var_start[v]..self.var_start[v + 1]];
            let total = self.channel[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            self.post[v] = total;
            for &e in edges {
                self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_MAX, LLR_MAX);
            }
        }
    }

    fn syndrome_ok(&self) -> bool {
        if self.post.contains(&0.0) {
            return false;
        }
        (0..self.check_start.len() - 1).all(|c| {
            let parity = self.edge_var[self.check_start[c]..self.check_start[c + 1]]
                .iter()
                .filter(|&&v| self.post[v] < 0.0)
                .count();
            parity % 2 == 0
        })
    }

    fn output(&self, converged: bool, iterations: usize) -> DecodeOutput {
        DecodeOutput {
            bits: self.post.iter().map(|&p| u8::from(p < 0.0)).collect(),
            posteriors: self.post.iter().map(|&p| -p).collect(),
            converged,
            iterations,
        }
    }
}

/// One-shot sum-product decode.
pub fn decode_bp(llrs: &[f64], pm: &ParityMatrix, max_iter: usize) -> DecodeOutput {
    BpDecoder::new(pm, CheckRule::SumProduct).decode(llrs, max_iter)
}
