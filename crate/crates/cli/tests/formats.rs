use ::image::{GrayImage as Gray8, ImageFormat, Luma};
use mlcs::formats::image::encode_image;
use mlcs::formats::mask::{decode_pbm, encode_pbm};
use mlcs::formats::*;
use mlcs_core::rng::{seeded, uniform_vec};
use mlcs_core::sampling::{all_round_map, AllRoundSpec};
use mlcs_core::{Shape, C64};
use proptest::prelude::*;
use std::path::Path;

fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    GrayImage { width: w, height: h, data: uniform_vec(&mut seeded(seed), w * h) }
}

#[test]
fn save_then_load_is_within_16_bit_quantisation() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.pgm", 1), ("b.png", 2), ("c.PNG", 3)] {
        let img = random_image(37, 21, seed);
        let p = dir.path().join(name);
        save_image(&p, &img).unwrap();
        let back = load_image(&p).unwrap();
        assert_eq!((back.width, back.height), (37, 21));
        let dev = img.data.iter().zip(&back.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev <= 1.0 / 65535.0, "{name}: {dev}");
    }
}

#[test]
fn pgm_is_binary_p5_with_16_bit_samples() {
    let img = GrayImage { width: 2, height: 1, data: vec![0.0, 1.0] };
    let bytes = encode_image(&img, ImageFormat::Pnm).unwrap();
    assert!(bytes.starts_with(b"P5"));
    assert!(bytes.ends_with(&[0, 0, 255, 255]));
    let text = String::from_utf8_lossy(&bytes[..bytes.len() - 4]);
    assert!(text.contains("65535"), "{text}");
}

#[test]
fn eight_bit_assets_map_255_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let img = Gray8::from_fn(3, 1, |x, _| Luma([[0u8, 128, 255][x as usize]]));
    for name in ["e.png", "e.pgm"] {
        let p = dir.path().join(name);
        img.save(&p).unwrap();
        let back = load_image(&p).unwrap();
        assert_eq!(back.data, vec![0.0, 128.0 / 255.0, 1.0], "{name}");
    }
}

#[test]
fn values_are_clamped_on_save() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("clamp.png");
    save_image(&p, &GrayImage { width: 2, height: 1, data: vec![-0.5, 2.0] }).unwrap();
    assert_eq!(load_image(&p).unwrap().data, vec![0.0, 1.0]);
}

#[test]
fn malformed_images_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.pgm");
    std::fs::write(&p, b"P5\n4 4\n255\n\x01\x02").unwrap();
    assert!(load_image(&p).is_err());
    let q = dir.path().join("x.jpg");
    std::fs::write(&q, b"").unwrap();
    assert!(load_image(&q).is_err());
    assert!(load_image(&dir.path().join("missing.png")).is_err());
}

/// 5 × 3 ramp with value `10 r + c`.
fn ramp() -> GrayImage {
    GrayImage { width: 5, height: 3, data: (0..3).flat_map(|r| (0..5).map(move |c| (10 * r + c) as f64)).collect() }
}

#[test]
fn crop_golden() {
    let (out, n) = fit_square(&ramp(), ResizeMode::Crop).unwrap();
    assert_eq!(n, 2);
    assert_eq!(out, vec![1.0, 2.0, 11.0, 12.0]);
}

#[test]
fn pad_golden() {
    // Input values are shifted by one so that zero padding stays visible.
    let img = GrayImage { data: ramp().data.iter().map(|v| v + 1.0).collect(), ..ramp() };
    let (out, n) = fit_square(&img, ResizeMode::Pad).unwrap();
    assert_eq!(n, 8);
    #[rustfmt::skip]
    let golden = [
        0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 1, 2, 3, 4, 5, 0,
        0, 0, 11, 12, 13, 14, 15, 0,
        0, 0, 21, 22, 23, 24, 25, 0,
        0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 0,
    ];
    assert_eq!(out, golden.iter().map(|&v| v as f64).collect::<Vec<_>>());
    assert_eq!(fit_square(&img, ResizeMode::Pad).unwrap().0, out);
}

#[test]
fn square_powers_of_two_are_unchanged() {
    let img = random_image(16, 16, 9);
    for mode in [ResizeMode::Crop, ResizeMode::Pad] {
        let (out, n) = fit_square(&img, mode).unwrap();
        assert_eq!((n, &out), (16, &img.data));
    }
}

#[test]
fn mask_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let spec = AllRoundSpec { n: 8, m_radius: 0.1, a: 2.0, b: 3.0 };
    let map = all_round_map(Shape::D2(32), spec, 5).unwrap();
    let (pbm, json) = (dir.path().join("m.pbm"), dir.path().join("m.json"));
    write_mask(&pbm, &json, &map).unwrap();
    assert_eq!(read_mask(&pbm, &json).unwrap(), map);
    assert!(std::fs::read(&pbm).unwrap().starts_with(b"P4\n32 32\n"));
    let side: MaskSidecar = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(side.samples, map.m());
}

#[test]
fn pbm_bit_order() {
    // 10 pixels wide: two bytes per row, MSB first, padded with zeros.
    let mut mask = vec![false; 10];
    mask[0] = true;
    mask[9] = true;
    let bytes = encode_pbm(&mask, 10, 1);
    assert_eq!(&bytes[bytes.len() - 2..], &[0b1000_0000, 0b0100_0000]);
}

proptest! {
    #[test]
    fn pbm_round_trips(w in 1usize..40, h in 1usize..8, bits in prop::collection::vec(any::<bool>(), 320)) {
        let mask: Vec<bool> = bits[..w * h].to_vec();
        let (back, bw, bh) = decode_pbm(&encode_pbm(&mask, w, h), Path::new("p")).unwrap();
        prop_assert_eq!((back, bw, bh), (mask, w, h));
    }

    #[test]
    fn arrays_round_trip(v in prop::collection::vec(-1e300f64..1e300, 0..50), seed in 0u64..100) {
        let dir = tempfile::tempdir().unwrap();
        let (bin, json) = (dir.path().join("a.bin"), dir.path().join("a.json"));
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, -x * 0.5)).collect();
        let u: Vec<u64> = v.iter().map(|&x| x.to_bits() ^ seed).collect();
        for data in [ArrayData::F64(v.clone()), ArrayData::C64(c), ArrayData::U64(u)] {
            let meta = ArrayMeta::new(&data, vec![data.len()], serde_json::json!({ "seed": seed }));
            write_array(&bin, &json, &data, &meta).unwrap();
            let (back, m) = read_array(&bin, &json).unwrap();
            prop_assert_eq!(back, data);
            prop_assert_eq!(m, meta);
        }
    }
}

#[test]
fn array_shape_and_length_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let (bin, json) = (dir.path().join("a.bin"), dir.path().join("a.json"));
    let data = ArrayData::F64(vec![1.0, 2.0, 3.0]);
    assert!(write_array(&bin, &json, &data, &ArrayMeta::new(&data, vec![2, 2], serde_json::Value::Null)).is_err());
    write_array(&bin, &json, &data, &ArrayMeta::new(&data, vec![3], serde_json::Value::Null)).unwrap();
    std::fs::write(&bin, [0u8; 7]).unwrap();
    assert!(read_array(&bin, &json).is_err());
}

#[test]
fn sha256_standard_vector() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let mut art = Artifacts::create(dir.path()).unwrap();
    art.bytes("a.txt", b"abc").unwrap();
    art.csv("t.csv", &["x", "y"], [vec!["1".to_string(), "2".to_string()]]).unwrap();
    let m = art.finish("recover", 3, serde_json::Value::Null, serde_json::Value::Null, vec![]).unwrap();
    assert_eq!(m.status, "ok");
    assert_eq!(m.files.len(), 2);
    assert_eq!(m.files[0].sha256, sha256_hex(b"abc"));
    assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x,y\n1,2\n");
    let stored: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(stored, m);
}
