// SPDX-License-Identifier: Apache-2.0

//! Bundled ResNet50 against an independent loop-nest count built from the
//! stage description (3, 4, 6, 3 bottleneck blocks, v1.5 strides).

use sunrise_core::archsim::simulate_model;
use sunrise_core::presets;
use sunrise_core::workload::{layer_macs, layer_weight_bytes, load_model, model_totals, LayerKind};

/// MACs of a convolution by walking the output window positions.
fn conv_loop(hw: u64, in_c: u64, k: u64, out_c: u64, stride: u64, pad: u64) -> (u64, u64) {
    let mut macs = 0;
    let mut side = 0;
    let mut y = 0;
    while y + k <= hw + 2 * pad {
        side += 1;
        let mut x = 0;
        while x + k <= hw + 2 * pad {
            for _ky in 0..k {
                for _kx in 0..k {
                    macs += in_c * out_c;
                }
            }
            x += stride;
        }
        y += stride;
    }
    (macs, side)
}

fn reference() -> (u64, u64) {
    let mut macs = 0;
    let mut weights = 0;
    let mut add = |hw, i, k, o, s, p| {
        let (m, side) = conv_loop(hw, i, k, o, s, p);
        macs += m;
        weights += k * k * i * o;
        side
    };
    let mut hw = add(224, 3, 7, 64, 2, 3);
    hw = (hw + 2 - 3) / 2 + 1; // 3x3 max pool, stride 2, pad 1
    let mut in_c = 64;
    for (stage, blocks) in [3, 4, 6, 3].into_iter().enumerate() {
        let width = 64 << stage;
        for b in 0..blocks {
            let stride = if b == 0 && stage > 0 { 2 } else { 1 };
            add(hw, in_c, 1, width, 1, 0);
            let out = add(hw, width, 3, width, stride, 1);
            add(out, width, 1, width * 4, 1, 0);
            if b == 0 {
                add(hw, in_c, 1, width * 4, stride, 0);
            }
            hw = out;
            in_c = width * 4;
        }
    }
    macs += 2048 * 1000;
    weights += 2048 * 1000;
    (macs, weights)
}

#[test]
fn totals_match_loop_nest_and_golden() {
    let model = load_model("resnet50").unwrap();
    let totals = model_totals(&model);
    let (macs, weights) = reference();
    assert_eq!(totals.total_macs, macs);
    assert_eq!(totals.total_weight_bytes, weights);
    assert_eq!(totals.total_macs, 4_089_184_256);
    assert_eq!(totals.total_weight_bytes, 25_502_912);
    assert_eq!(model.input_bytes, 224 * 224 * 3);
    assert_eq!(model.layers.len(), 72);
}

#[test]
fn conv1_closed_form() {
    let model = load_model("resnet50").unwrap();
    let conv1 = &model.layers[0];
    assert_eq!(conv1.kind, LayerKind::Conv2d);
    assert_eq!((conv1.out_h(), conv1.out_w()), (112, 112));
    assert_eq!(layer_macs(conv1), 112 * 112 * 7 * 7 * 3 * 64);
    assert_eq!(layer_macs(conv1), 118_013_952);
    assert_eq!(layer_weight_bytes(conv1), 9_408);
}

#[test]
fn repeat_runs_are_bit_identical() {
    let model = load_model("resnet50").unwrap();
    let arch = presets::arch("sunrise-40nm").unwrap();
    let a = simulate_model(&model, &arch, 2).unwrap();
    let b = simulate_model(&model, &arch, 2).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn model_json_round_trip() {
    let model = load_model("resnet50").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r50.json");
    std::fs::write(&path, model.to_json()).unwrap();
    let back = load_model(path.to_str().unwrap()).unwrap();
    assert_eq!(back, model);
}
