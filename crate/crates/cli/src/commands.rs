use std::path::Path;
use std::sync::Arc;

use llrq::autonet::{
    generate_dataset, generate_dataset_on, load_params_expecting, save_params, train, MlpParams,
    TrainConfig,
};
use llrq::channel::{stream, RngStream};
use llrq::ldpc::{load_alist, ParityMatrix, IEEE80211N_648_R12_ALIST};
use llrq::modem::Constellation;
use llrq::pipeline::{
    compression_ratio, emit_latent_histograms, fit_samples, run_harq, run_single, BlerResult,
    ExperimentConfig, LatentCodec, Method, BLER_CSV_HEADER,
};
use llrq::quantizers::{
    fit_gain_quantizer, fit_max_mi, GainModel, MaxMiQuantizer, ReconstructionLut,
    UniformQuantizerSpec,
};

use crate::config::{Config, EvalSection, BUILTIN_CODE};
use crate::error::{write_file, CliError};
use crate::manifest::Manifest;

/// Encoder depth of the standard autoencoder layout.
const ENCODER_LAYERS: usize = 3;

fn read_asset(path: &Path, what: &str) -> Result<Vec<u8>, CliError> {
    std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_code(cfg: &Config, m: &mut Manifest) -> Result<ParityMatrix, CliError> {
    if cfg.code == BUILTIN_CODE {
        m.add_asset(BUILTIN_CODE, IEEE80211N_648_R12_ALIST.as_bytes());
        return Ok(ParityMatrix::ieee80211n_648());
    }
    if cfg.code.starts_with("builtin:") {
        return Err(CliError::Config(format!(
            "unknown builtin code {:?}; expected {BUILTIN_CODE}",
            cfg.code
        )));
    }
    let path = Path::new(&cfg.code);
    let bytes = read_asset(path, "code asset")?;
    m.add_asset(&cfg.code, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    load_alist(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, k: usize, m: &mut Manifest) -> Result<MlpParams, CliError> {
    let bytes = read_asset(path, "model")?;
    m.add_asset(&path.to_string_lossy(), &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    load_params_expecting(&text, k)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn cmd_train(cfg: &Config, out: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let t = cfg.train()?;
    let pm = load_code(cfg, m)?;
    let c = Constellation::new(cfg.k)?;
    let tc = TrainConfig {
        learning_rate: t.learning_rate,
        batch_size: t.batch_size,
        epochs: t.epochs,
        noise_std: t.noise_std,
        eps_loss: t.eps_loss,
        seed: cfg.seed,
    };
    tc.validate()?;
    let data = generate_dataset(&t.snr_db, t.codewords_per_snr, &pm, &c, cfg.seed)?;
    let outcome = train(&tc, &data, MlpParams::layout(cfg.k), ENCODER_LAYERS)?;
    let mut loss = String::from("epoch,loss\n");
    for (e, l) in outcome.epoch_loss.iter().enumerate() {
        loss.push_str(&format!("{},{l:e}\n", e + 1));
    }
    write_file(&out.join("model.txt"), &save_params(&outcome.params))?;
    write_file(&out.join("loss.csv"), &loss)
}

fn experiment(
    cfg: &Config,
    e: &EvalSection,
    method: Method,
    n_bits: u32,
) -> Result<ExperimentConfig, CliError> {
    let gain_model = GainModel::parse(&e.gain_model).ok_or_else(|| {
        CliError::Config(format!("eval.gain_model: unknown model {:?}", e.gain_model))
    })?;
    let x = ExperimentConfig {
        k: cfg.k,
        snr_db: e.snr_db.clone(),
        codewords: e.codewords,
        method,
        n_bits: if method == Method::FullPrecision {
            0
        } else {
            n_bits
        },
        seed: cfg.seed,
        max_iter: e.max_iter,
        latent_delta: e.latent_delta,
        fold_saturation: e.fold_saturation,
        gain_model,
        r_tilde_clip: e.r_tilde_clip,
        fit_codewords: e.fit_codewords,
    };
    x.validate()?;
    Ok(x)
}

pub fn cmd_eval(cfg: &Config, out: &Path, m: &mut Manifest, harq: bool) -> Result<(), CliError> {
    let e = cfg.eval()?;
    if e.methods.is_empty() {
        return Err(CliError::Config(
            "eval.methods must list at least one method".into(),
        ));
    }
    let pm = load_code(cfg, m)?;
    let mut runs = Vec::with_capacity(e.methods.len());
    for (i, entry) in e.methods.iter().enumerate() {
        let method = Method::parse(&entry.method).ok_or_else(|| {
            CliError::Config(format!(
                "eval.methods[{i}].method: unknown method {:?}; expected one of {}",
                entry.method,
                Method::ALL.map(Method::name).join(", ")
            ))
        })?;
        runs.push(experiment(cfg, e, method, entry.n_bits)?);
    }
    let needs_model = runs.iter().any(|r| r.method == Method::Deep);
    let model = match (&e.model, needs_model) {
        (Some(p), _) => Some(load_model(p, cfg.k, m)?),
        (None, true) => {
            return Err(CliError::Config(
                "eval.model is required by the deep method".into(),
            ))
        }
        (None, false) => None,
    };
    let codec: Option<Arc<dyn LatentCodec>> =
        model.clone().map(|p| Arc::new(p) as Arc<dyn LatentCodec>);
    let latent_dim = model.as_ref().map_or(3, MlpParams::latent_dim);

    let mut merged = format!("{BLER_CSV_HEADER}\n");
    let mut storage = String::from("method,n_bits,bits_per_symbol,ratio_to_scalar_llr\n");
    for x in &runs {
        let r: BlerResult = if harq {
            run_harq(x, &pm, codec.clone())?
        } else {
            run_single(x, &pm, codec.clone())?
        };
        write_file(
            &out.join(format!("bler_{}_{}.csv", x.method.name(), x.n_bits)),
            &r.to_csv(),
        )?;
        merged.push_str(&r.csv_rows());
        if let Some(bits) = x.method.storage_bits(cfg.k, x.n_bits, latent_dim) {
            let reference = Method::ScalarLlr
                .storage_bits(cfg.k, x.n_bits, latent_dim)
                .unwrap_or(bits);
            storage.push_str(&format!(
                "{},{},{bits},{}\n",
                x.method.name(),
                x.n_bits,
                compression_ratio(reference, bits)
            ));
        }
    }
    write_file(&out.join("bler_merged.csv"), &merged)?;
    write_file(&out.join("storage.csv"), &storage)
}

pub fn cmd_fit(cfg: &Config, out: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let f = cfg.fit()?;
    if f.n_levels < 2 {
        return Err(CliError::Config("fit.n_levels must be at least 2".into()));
    }
    let (text, trace) = match f.kind.as_str() {
        "max_mi" => {
            let pm = load_code(cfg, m)?;
            let x = ExperimentConfig {
                k: cfg.k,
                snr_db: vec![f.snr_db],
                seed: cfg.seed,
                fit_codewords: f.codewords,
                ..Default::default()
            };
            Constellation::new(cfg.k)?;
            if f.codewords == 0 {
                return Err(CliError::Config("fit.codewords must be at least 1".into()));
            }
            let mut per_bit = Vec::with_capacity(cfg.k);
            let mut trace = String::from("bit,iteration,mutual_information\n");
            for (j, samples) in fit_samples(&x, &pm, 0)?.iter().enumerate() {
                let fit = fit_max_mi(samples, f.n_levels)?;
                for (i, mi) in fit.trace.iter().enumerate() {
                    trace.push_str(&format!("{j},{i},{mi:e}\n"));
                }
                per_bit.push(fit.codebook);
            }
            (MaxMiQuantizer { per_bit }.to_text(), trace)
        }
        kind => {
            let model = GainModel::parse(kind).ok_or_else(|| {
                CliError::Config(format!(
                    "fit.kind: unknown kind {kind:?}; expected max_mi, rayleigh or exponential"
                ))
            })?;
            if f.draws == 0 {
                return Err(CliError::Config("fit.draws must be at least 1".into()));
            }
            let mut rng = RngStream::derive(cfg.seed, &[stream::FIT, u64::MAX]);
            let (q, tr) = fit_gain_quantizer(model, f.n_levels, f.draws, &mut rng)?;
            let mut trace = String::from("iteration,distortion\n");
            for (i, d) in tr.iter().enumerate() {
                trace.push_str(&format!("{i},{d:e}\n"));
            }
            (
                format!("gain_model {}\n{}", q.model.name(), q.codebook.to_text()),
                trace,
            )
        }
    };
    write_file(&out.join("codebook.txt"), &text)?;
    write_file(&out.join("trace.csv"), &trace)
}

pub fn cmd_export_lut(cfg: &Config, out: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let l = cfg.lut()?;
    let p = load_model(&l.model, cfg.k, m)?;
    let spec = UniformQuantizerSpec::new(l.delta, l.n_bits)?;
    let spec = if l.fold_saturation {
        spec.folded()
    } else {
        spec
    };
    let lut = ReconstructionLut::build(&p, &spec)?;
    write_file(&out.join("lut.csv"), &lut.to_csv())
}

pub fn cmd_hist(cfg: &Config, out: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let h = cfg.hist()?;
    let pm = load_code(cfg, m)?;
    let c = Constellation::new(cfg.k)?;
    let p = load_model(&h.model, cfg.k, m)?;
    let data = generate_dataset_on(
        stream::EVAL,
        &h.snr_db,
        h.codewords_per_snr,
        &pm,
        &c,
        cfg.seed,
    )?;
    let hist = emit_latent_histograms(&p, &data, h.bins)?;
    for (j, marginal) in hist.marginals.iter().enumerate() {
        write_file(&out.join(format!("latent_z{j}.csv")), &marginal.to_csv())?;
    }
    let last = hist.marginals.len() - 1;
    write_file(
        &out.join(format!("joint_logg_z{last}.csv")),
        &hist.joint.to_csv(),
    )?;
    let mut stats = String::from("dim,mean,variance,count\n");
    for (j, (mean, var)) in hist.mean.iter().zip(&hist.variance).enumerate() {
        stats.push_str(&format!("{j},{mean:e},{var:e},{}\n", data.len()));
    }
    write_file(&out.join("latent_stats.csv"), &stats)
}
