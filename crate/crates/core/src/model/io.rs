//! Model files: a JSON envelope `{format, version, model}`.
//!
//! The header is checked before the model body is decoded, so a version
//! mismatch is reported as such rather than as a schema error.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ModelParams;
use crate::error::{Error, Result};

pub const FORMAT: &str = "regender-model";
pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a ModelParams,
}

#[derive(Deserialize)]
struct Envelope {
    model: ModelParams,
}

pub fn save_params<W: Write>(params: &ModelParams, mut out: W) -> Result<()> {
    let env = EnvelopeRef {
        format: FORMAT,
        version: VERSION,
        model: params,
    };
    serde_json::to_writer_pretty(&mut out, &env)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn load_params(bytes: &[u8]) -> Result<ModelParams> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| Error::ModelFile(format!("corrupt file: {}", e)))?;
    match value.get("format").and_then(Value::as_str) {
        Some(FORMAT) => {}
        other => {
            return Err(Error::ModelFile(format!(
                "not a model file (format {:?})",
                other
            )))
        }
    }
    match value.get("version").and_then(Value::as_u64) {
        Some(v) if v == VERSION as u64 => {}
        other => {
            return Err(Error::ModelFile(format!(
                "unsupported model version {:?}, expected {}",
                other, VERSION
            )))
        }
    }
    let env: Envelope = serde_json::from_value(value)
        .map_err(|e| Error::ModelFile(format!("malformed model: {}", e)))?;
    match &env.model {
        ModelParams::Linear(p) => p.validate()?,
        ModelParams::Neural(p) => p.validate()?,
        ModelParams::Baseline(_) => {}
    }
    Ok(env.model)
}

pub fn save_params_file(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    save_params(params, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_params_file(path: impl AsRef<Path>) -> Result<ModelParams> {
    load_params(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{neural_w, BaselineRules, EdgeKey, LinearParams, NeuralParams};
    use crate::treebank::{Subtag, SubtagVocab};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vocab() -> SubtagVocab {
        vec![
            Subtag::new("Gender", "Fem").unwrap(),
            Subtag::new("Gender", "Masc").unwrap(),
            Subtag::new("Number", "Sing").unwrap(),
        ]
        .into()
    }

    fn linear(seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LinearParams::zeros(
            vocab(),
            [
                EdgeKey::new("ADJ", "NOUN", "amod"),
                EdgeKey::new("DET", "NOUN", "det"),
            ],
        );
        let values: Vec<f64> = (0..p.num_parameters())
            .map(|_| rng.gen_range(-1.0..1.0) * 1e-3 + rng.gen::<f64>() * 1e5)
            .collect();
        p.set_flat(&values).unwrap();
        ModelParams::Linear(p)
    }

    fn round_trip(p: &ModelParams) -> ModelParams {
        let mut buf = Vec::new();
        save_params(p, &mut buf).unwrap();
        load_params(&buf).unwrap()
    }

    #[test]
    fn linear_bit_identical() {
        let p = linear(1);
        let q = round_trip(&p);
        let a: Vec<u64> = p.flat().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = q.flat().iter().map(|x| x.to_bits()).collect();
        assert_eq!(a, b);
        assert_eq!(p, q);
    }

    #[test]
    fn neural_outputs_survive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pos: Vec<String> = ["ADJ", "DET", "NOUN", "VERB"].map(String::from).to_vec();
        let labels: Vec<String> = ["amod", "det", "nsubj"].map(String::from).to_vec();
        let p = NeuralParams::random(vocab(), pos.clone(), labels.clone(), 9, 3, 0.5, &mut rng);
        let q = match round_trip(&ModelParams::Neural(p.clone())) {
            ModelParams::Neural(q) => q,
            other => panic!("wrong kind {}", other.kind()),
        };
        let mut extended = pos.clone();
        extended.push("PROPN".into());
        for _ in 0..100 {
            let key = EdgeKey::new(
                &extended[rng.gen_range(0..extended.len())],
                &extended[rng.gen_range(0..extended.len())],
                &labels[rng.gen_range(0..labels.len())],
            );
            assert_eq!(neural_w(&key, &p).unwrap(), neural_w(&key, &q).unwrap());
        }
    }

    #[test]
    fn baseline_round_trip() {
        let p = ModelParams::Baseline(BaselineRules::spanish());
        assert_eq!(round_trip(&p), p);
    }

    #[test]
    fn truncated_file_fails() {
        let mut buf = Vec::new();
        save_params(&linear(3), &mut buf).unwrap();
        for cut in [0, 1, buf.len() / 2, buf.len() - 3] {
            assert!(matches!(load_params(&buf[..cut]), Err(Error::ModelFile(_))));
        }
    }

    #[test]
    fn version_mismatch_fails() {
        let mut buf = Vec::new();
        save_params(&linear(4), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"version\": 1", "\"version\": 99");
        match load_params(text.as_bytes()) {
            Err(Error::ModelFile(m)) => assert!(m.contains("version")),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn wrong_matrix_shape_fails() {
        let mut buf = Vec::new();
        save_params(&linear(5), &mut buf).unwrap();
        let mut v: Value = serde_json::from_slice(&buf).unwrap();
        v["model"]["weights"][0][1].as_array_mut().unwrap().pop();
        let bytes = serde_json::to_vec(&v).unwrap();
        assert!(load_params(&bytes).is_err());
    }
}
