//! Weight files.
//!
//! Plain text, one item per line:
//!
//! ```text
//! llrq-mlp 1
//! k 4
//! encoder_layers 3
//! layers 6
//! 4 16 relu
//! ...
//! values 807
//! <one value per line, shortest exact decimal>
//! end
//! ```
//!
//! Values are written with Rust's round-trip float formatting, so loading
//! reproduces every parameter bit for bit.

use super::{Activation, LayerSpec, MlpParams};
use crate::{Error, Result};

const MAGIC: &str = "llrq-mlp";
const VERSION: u32 = 1;

pub fn save_params(p: &MlpParams) -> String {
    let mut s = format!(
        "{MAGIC} {VERSION}\nk {}\nencoder_layers {}\nlayers {}\n",
        p.k(),
        p.encoder_layers(),
        p.layers().len()
    );
    for l in p.layers() {
        s.push_str(&format!(
            "{} {} {}\n",
            l.in_dim,
            l.out_dim,
            l.activation.name()
        ));
    }
    s.push_str(&format!("values {}\n", p.num_params()));
    for v in p.values() {
        s.push_str(&format!("{v:e}\n"));
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(Error::Format {
                line: self.line + 1,
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            message: message.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<usize> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(format!("expected `{key} <n>`")));
        }
        let v = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err(format!("bad `{key}` value")))?;
        if it.next().is_some() {
            return Err(self.err("trailing tokens"));
        }
        Ok(v)
    }
}

pub fn load_params(text: &str) -> Result<MlpParams> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next()?;
    let mut it = header.split_whitespace();
    if it.next() != Some(MAGIC) {
        return Err(lines.err("not an llrq-mlp weight file"));
    }
    match it.next().and_then(|t| t.parse::<u32>().ok()) {
        Some(VERSION) => {}
        Some(v) => return Err(lines.err(format!("unsupported version {v}"))),
        None => return Err(lines.err("missing version")),
    }
    let k = lines.keyed("k")?;
    let encoder_layers = lines.keyed("encoder_layers")?;
    let n_layers = lines.keyed("layers")?;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let l = lines.next()?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let parsed = match t.as_slice() {
            [i, o, a] => i.parse().ok().zip(o.parse().ok()).zip(Activation::parse(a)),
            _ => None,
        };
        let ((i, o), a) = parsed.ok_or_else(|| lines.err("expected `<in> <out> <relu|tanh>`"))?;
        layers.push(LayerSpec::new(i, o, a));
    }
    let mut p = MlpParams::zeros(layers, encoder_layers).map_err(|e| lines.err(e.to_string()))?;
    if p.k() != k {
        return Err(lines.err(format!("header says k = {k} but layers give {}", p.k())));
    }
    let count = lines.keyed("values")?;
    if count != p.num_params() {
        return Err(lines.err(format!(
            "expected {} values, header says {count}",
            p.num_params()
        )));
    }
    for i in 0..count {
        let l = lines.next()?;
        let v: f64 = l
            .parse()
            .map_err(|_| lines.err(format!("bad value `{l}`")))?;
        if !v.is_finite() {
            return Err(lines.err("non-finite parameter"));
        }
        p.values_mut()[i] = v;
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    while let Ok(l) = lines.next() {
        if !l.is_empty() {
            return Err(lines.err("trailing content"));
        }
    }
    Ok(p)
}

/// Loads and checks that the net serves `k`-bit symbols.
pub fn load_params_expecting(text: &str, k: usize) -> Result<MlpParams> {
    let p = load_params(text)?;
    if p.k() != k {
        return Err(Error::ModelLoad(format!(
            "model is for K = {}, expected K = {k}",
            p.k()
        )));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;

    fn net(k: usize) -> MlpParams {
        let mut p =
            MlpParams::init(MlpParams::layout(k), 3, &mut RngStream::new(k as u64)).unwrap();
        let n = p.num_params();
        // exercise awkward values
        p.values_mut()[n - 1] = 1e-300;
        p.values_mut()[n - 2] = -0.1 - 0.2;
        p
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let p = net(4);
        let back = load_params(&save_params(&p)).unwrap();
        assert_eq!(back, p);
        let bits = |q: &MlpParams| q.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&p));
        assert!(save_params(&p).starts_with("llrq-mlp 1\nk 4\n"));
    }

    #[test]
    fn truncated_stream_is_rejected() {
        let text = save_params(&net(4));
        for cut in [0, 5, 20, text.len() / 2, text.len() - 3] {
            assert!(load_params(&text[..cut]).is_err(), "cut {cut}");
        }
    }

    #[test]
    fn wrong_k_is_rejected() {
        let text = save_params(&net(8));
        assert!(load_params_expecting(&text, 8).is_ok());
        assert!(matches!(
            load_params_expecting(&text, 4),
            Err(Error::ModelLoad(_))
        ));
    }

    #[test]
    fn bad_version_and_garbage() {
        let text = save_params(&net(2)).replacen("llrq-mlp 1", "llrq-mlp 2", 1);
        assert!(matches!(
            load_params(&text),
            Err(Error::Format { line: 1, .. })
        ));
        let text = save_params(&net(2)).replacen("relu", "gelu", 1);
        assert!(matches!(
            load_params(&text),
            Err(Error::Format { line: 5, .. })
        ));
        let text = format!("{}extra\n", save_params(&net(2)));
        assert!(load_params(&text).is_err());
    }
}
