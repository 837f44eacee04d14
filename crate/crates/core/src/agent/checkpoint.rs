//! Portable text checkpoints.
//!
//! ```text
//! diplr-policy v1
//! updates 120
//! adam_step 480
//! tensor layer0.weight 64 79
//! <values>
//! tensor layer0.bias 64
//! <values>
//! ...
//! tensor adam.m 9412
//! <values>
//! tensor adam.v 9412
//! <values>
//! ```
//!
//! Values are written in shortest round-trip exponent form, so saving and
//! loading is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::policy::{AdamState, PolicyParams};
use crate::error::{Error, Result};

const MAGIC: &str = "diplr-policy v1";

pub fn to_text(params: &PolicyParams) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "updates {}", params.updates).unwrap();
    writeln!(out, "adam_step {}", params.adam.step).unwrap();
    let mut offset = 0;
    for (k, pair) in params.layers.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        write_tensor(
            &mut out,
            &format!("layer{k}.weight"),
            &[fan_out, fan_in],
            &params.weights[offset..offset + fan_in * fan_out],
        );
        offset += fan_in * fan_out;
        write_tensor(&mut out, &format!("layer{k}.bias"), &[fan_out], &params.weights[offset..offset + fan_out]);
        offset += fan_out;
    }
    let n = params.weights.len();
    write_tensor(&mut out, "adam.m", &[n], &params.adam.m);
    write_tensor(&mut out, "adam.v", &[n], &params.adam.v);
    out
}

fn write_tensor(out: &mut String, name: &str, shape: &[usize], values: &[f64]) {
    out.push_str("tensor ");
    out.push_str(name);
    for s in shape {
        write!(out, " {s}").unwrap();
    }
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn from_text(text: &str) -> Result<PolicyParams> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(bad(format!("missing `{MAGIC}` header")));
    }
    let mut scalar = |key: &str| -> Result<u64> {
        let line = lines.next().ok_or_else(|| bad(format!("missing `{key}` line")))?;
        line.strip_prefix(key)
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| bad(format!("expected `{key} <int>`, found `{line}`")))
    };
    let updates = scalar("updates")?;
    let adam_step = scalar("adam_step")?;

    let mut tensors: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::new();
    while let Some(header) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let mut parts = header.split_whitespace();
        if parts.next() != Some("tensor") {
            return Err(bad(format!("expected tensor header, found `{header}`")));
        }
        let name = parts.next().ok_or_else(|| bad("tensor without a name"))?.to_string();
        let shape: Vec<usize> = parts
            .map(|s| s.parse().map_err(|_| bad(format!("bad shape in `{header}`"))))
            .collect::<Result<_>>()?;
        let body = lines.next().ok_or_else(|| bad(format!("tensor {name} has no values")))?;
        let values: Vec<f64> = body
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(format!("bad value `{s}` in {name}"))))
            .collect::<Result<_>>()?;
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(bad(format!("{name}: shape {shape:?} needs {expected} values, found {}", values.len())));
        }
        tensors.push((name, shape, values));
    }

    let mut layers = Vec::new();
    let mut weights = Vec::new();
    let mut k = 0;
    let mut iter = tensors.into_iter().peekable();
    while iter.peek().is_some_and(|(n, _, _)| n == &format!("layer{k}.weight")) {
        let (_, wshape, w) = iter.next().unwrap();
        let (name, bshape, b) = iter.next().ok_or_else(|| bad(format!("layer{k} has no bias")))?;
        if name != format!("layer{k}.bias") || wshape.len() != 2 || bshape != [wshape[0]] {
            return Err(bad(format!("layer{k}: inconsistent weight/bias shapes")));
        }
        if k == 0 {
            layers.push(wshape[1]);
        } else if *layers.last().unwrap() != wshape[1] {
            return Err(bad(format!("layer{k} input {} does not match previous output", wshape[1])));
        }
        layers.push(wshape[0]);
        weights.extend(w);
        weights.extend(b);
        k += 1;
    }
    let mut params = PolicyParams::from_parts(layers, weights)?;
    let n = params.weights.len();
    let mut take = |name: &str| -> Result<Vec<f64>> {
        match iter.next() {
            Some((found, shape, v)) if found == name && shape == [n] => Ok(v),
            _ => Err(bad(format!("expected tensor {name} of length {n}"))),
        }
    };
    let m = take("adam.m")?;
    let v = take("adam.v")?;
    if let Some((extra, _, _)) = iter.next() {
        return Err(bad(format!("unexpected tensor {extra}")));
    }
    params.adam = AdamState { m, v, step: adam_step };
    params.updates = updates;
    Ok(params)
}

pub fn save(params: &PolicyParams, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<PolicyParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
