// SPDX-License-Identifier: Apache-2.0

//! Layer geometry and exact operation/byte accounting.
//!
//! MAC counts follow the usual loop nest: every output position of a
//! convolution performs `kernel_h * kernel_w * in_c` MACs per output
//! channel, padded positions included. Pooling and element-wise layers do
//! no MACs but move features and execute vector ops.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv2d,
    FullyConnected,
    Pool,
    ElementWise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub in_h: u64,
    pub in_w: u64,
    pub in_c: u64,
    pub kernel_h: u64,
    pub kernel_w: u64,
    pub out_c: u64,
    pub stride: u64,
    pub padding: u64,
    #[serde(default = "one_byte", skip_serializing_if = "is_one")]
    pub bytes_per_weight: u64,
    #[serde(default = "one_byte", skip_serializing_if = "is_one")]
    pub bytes_per_activation: u64,
    /// Fraction of MACs that are effectively nonzero.
    #[serde(default = "unit_density", skip_serializing_if = "is_unit")]
    pub density: f64,
    /// Name of an earlier layer feeding this one (skip connections). The
    /// previous layer is the source when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_from: Option<String>,
}

fn one_byte() -> u64 {
    1
}
fn is_one(v: &u64) -> bool {
    *v == 1
}
fn unit_density() -> f64 {
    1.0
}
fn is_unit(v: &f64) -> bool {
    *v == 1.0
}

impl LayerSpec {
    /// A dense int8 convolution.
    pub fn conv(
        name: &str,
        in_hw: u64,
        in_c: u64,
        kernel: u64,
        out_c: u64,
        stride: u64,
        padding: u64,
    ) -> Self {
        LayerSpec {
            name: name.to_string(),
            kind: LayerKind::Conv2d,
            in_h: in_hw,
            in_w: in_hw,
            in_c,
            kernel_h: kernel,
            kernel_w: kernel,
            out_c,
            stride,
            padding,
            bytes_per_weight: 1,
            bytes_per_activation: 1,
            density: 1.0,
            input_from: None,
        }
    }

    pub fn fully_connected(name: &str, in_c: u64, out_c: u64) -> Self {
        LayerSpec {
            kind: LayerKind::FullyConnected,
            ..LayerSpec::conv(name, 1, in_c, 1, out_c, 1, 0)
        }
    }

    pub fn pool(
        name: &str,
        in_hw: u64,
        channels: u64,
        kernel: u64,
        stride: u64,
        padding: u64,
    ) -> Self {
        LayerSpec {
            kind: LayerKind::Pool,
            ..LayerSpec::conv(name, in_hw, channels, kernel, channels, stride, padding)
        }
    }

    pub fn element_wise(name: &str, in_hw: u64, channels: u64) -> Self {
        LayerSpec {
            kind: LayerKind::ElementWise,
            ..LayerSpec::conv(name, in_hw, channels, 1, channels, 1, 0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = || format!("layer '{}'", self.name);
        for (field, v) in [
            ("in_h", self.in_h),
            ("in_w", self.in_w),
            ("in_c", self.in_c),
            ("kernel_h", self.kernel_h),
            ("kernel_w", self.kernel_w),
            ("out_c", self.out_c),
            ("stride", self.stride),
            ("bytes_per_weight", self.bytes_per_weight),
            ("bytes_per_activation", self.bytes_per_activation),
        ] {
            if v == 0 {
                return Err(Error::validation(ctx(), format!("{field} must be >= 1")));
            }
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::validation(
                ctx(),
                format!("density must lie in (0, 1], got {}", self.density),
            ));
        }
        if self.in_h + 2 * self.padding < self.kernel_h
            || self.in_w + 2 * self.padding < self.kernel_w
        {
            return Err(Error::validation(
                ctx(),
                format!(
                    "kernel {}x{} does not fit padded input {}x{}",
                    self.kernel_h,
                    self.kernel_w,
                    self.in_h + 2 * self.padding,
                    self.in_w + 2 * self.padding
                ),
            ));
        }
        match self.kind {
            LayerKind::FullyConnected => {
                if self.in_h != 1 || self.in_w != 1 || self.kernel_h != 1 || self.kernel_w != 1 {
                    return Err(Error::validation(
                        ctx(),
                        "fully connected layers take a flattened 1x1xC input and a 1x1 kernel",
                    ));
                }
            }
            LayerKind::Pool | LayerKind::ElementWise => {
                if self.out_c != self.in_c {
                    return Err(Error::validation(
                        ctx(),
                        format!("out_c {} must equal in_c {}", self.out_c, self.in_c),
                    ));
                }
                if self.kind == LayerKind::ElementWise
                    && (self.kernel_h != 1
                        || self.kernel_w != 1
                        || self.stride != 1
                        || self.padding != 0)
                {
                    return Err(Error::validation(
                        ctx(),
                        "element-wise layers need a 1x1 kernel, stride 1 and no padding",
                    ));
                }
            }
            LayerKind::Conv2d => {}
        }
        Ok(())
    }

    pub fn out_h(&self) -> u64 {
        (self.in_h + 2 * self.padding - self.kernel_h) / self.stride + 1
    }

    pub fn out_w(&self) -> u64 {
        (self.in_w + 2 * self.padding - self.kernel_w) / self.stride + 1
    }

    /// Length of one output's dot product: `kernel_h * kernel_w * in_c`.
    pub fn reduction_len(&self) -> u64 {
        match self.kind {
            LayerKind::Conv2d => self.kernel_h * self.kernel_w * self.in_c,
            LayerKind::FullyConnected => self.in_c,
            LayerKind::Pool | LayerKind::ElementWise => 0,
        }
    }

    pub fn dense_macs(&self) -> u64 {
        match self.kind {
            LayerKind::Conv2d | LayerKind::FullyConnected => {
                self.out_h() * self.out_w() * self.reduction_len() * self.out_c
            }
            LayerKind::Pool | LayerKind::ElementWise => 0,
        }
    }

    /// Non-MAC vector operations (pool windows, element-wise ops).
    pub fn vector_ops(&self) -> u64 {
        let outputs = self.out_h() * self.out_w() * self.out_c;
        match self.kind {
            LayerKind::Pool => outputs * self.kernel_h * self.kernel_w,
            LayerKind::ElementWise => outputs,
            _ => 0,
        }
    }
}

/// MACs after applying the layer's density.
pub fn layer_macs(layer: &LayerSpec) -> u64 {
    let dense = layer.dense_macs();
    if layer.density == 1.0 {
        dense
    } else {
        (dense as f64 * layer.density).round() as u64
    }
}

pub fn layer_weight_bytes(layer: &LayerSpec) -> u64 {
    match layer.kind {
        LayerKind::Conv2d | LayerKind::FullyConnected => {
            layer.reduction_len() * layer.out_c * layer.bytes_per_weight
        }
        LayerKind::Pool | LayerKind::ElementWise => 0,
    }
}

/// `(input_bytes, output_bytes)` of one layer's feature maps.
pub fn layer_feature_bytes(layer: &LayerSpec) -> (u64, u64) {
    let input = layer.in_h * layer.in_w * layer.in_c * layer.bytes_per_activation;
    let output = layer.out_h() * layer.out_w() * layer.out_c * layer.bytes_per_activation;
    (input, output)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    /// Host payload per inference.
    pub input_bytes: u64,
    pub layers: Vec<LayerSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelTotals {
    pub total_macs: u64,
    pub total_weight_bytes: u64,
    /// Largest per-layer feature working set (input + output bytes).
    pub max_layer_feature_bytes: u64,
}

pub fn model_totals(model: &ModelSpec) -> ModelTotals {
    model.layers.iter().fold(ModelTotals::default(), |acc, l| {
        let (i, o) = layer_feature_bytes(l);
        ModelTotals {
            total_macs: acc.total_macs + layer_macs(l),
            total_weight_bytes: acc.total_weight_bytes + layer_weight_bytes(l),
            max_layer_feature_bytes: acc.max_layer_feature_bytes.max(i + o),
        }
    })
}

impl ModelSpec {
    /// Checks every layer and the dimension chain between layers.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, layer) in self.layers.iter().enumerate() {
            let label = format!("layer {} ('{}')", idx + 1, layer.name);
            layer
                .validate()
                .map_err(|e| Error::validation(label.clone(), e.to_string()))?;
            if seen.contains_key(layer.name.as_str()) {
                return Err(Error::validation(label, "duplicate layer name"));
            }
            let source = match &layer.input_from {
                Some(name) => Some(seen.get(name.as_str()).copied().ok_or_else(|| {
                    Error::validation(
                        label.clone(),
                        format!("input_from '{name}' does not name an earlier layer"),
                    )
                })?),
                None if idx > 0 => Some(idx - 1),
                None => None,
            };
            if let Some(src) = source {
                let s = &self.layers[src];
                let expect = (s.out_h(), s.out_w(), s.out_c);
                let got = (layer.in_h, layer.in_w, layer.in_c);
                if expect != got {
                    return Err(Error::validation(
                        label,
                        format!(
                            "input {}x{}x{} does not match '{}' output {}x{}x{}",
                            got.0, got.1, got.2, s.name, expect.0, expect.1, expect.2
                        ),
                    ));
                }
            }
            seen.insert(layer.name.as_str(), idx);
        }
        Ok(())
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            name: String,
            input_bytes: u64,
            layers: Vec<serde_json::Value>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        let mut layers = Vec::with_capacity(raw.layers.len());
        for (idx, value) in raw.layers.into_iter().enumerate() {
            let label = value
                .get("name")
                .and_then(|n| n.as_str())
                .map(|n| format!("{context}: layer {} ('{n}')", idx + 1))
                .unwrap_or_else(|| format!("{context}: layer {}", idx + 1));
            let layer: LayerSpec =
                serde_json::from_value(value).map_err(|e| Error::parse(label, e.to_string()))?;
            layers.push(layer);
        }
        let model = ModelSpec {
            name: raw.name,
            input_bytes: raw.input_bytes,
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Loads a model from a JSON file, or a bundled model by name (`resnet50`).
pub fn load_model(path_or_name: &str) -> Result<ModelSpec> {
    if let Some(model) = crate::presets::bundled_model(path_or_name) {
        return model;
    }
    let path = crate::presets::resolve(path_or_name);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    ModelSpec::from_json(&text, &path.display().to_string())
}

pub fn load_model_file(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelSpec::from_json(&text, &path.display().to_string())
}
