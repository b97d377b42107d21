use std::ffi::{CStr, CString};
use std::ptr;

use headpose::synthetic::{generate_dataset, SynthConfig};
use headpose_ffi::*;

fn new_model(seed: u64) -> *mut HpModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hp_model_new(seed, &mut m) }, HpStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = hp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_and_input_len() {
    let v = unsafe { CStr::from_ptr(hp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert_eq!(hp_input_len(), 64 * 64);
}

#[test]
fn predict_from_network_input() {
    let m = new_model(3);
    let input: Vec<f64> = (0..hp_input_len()).map(|i| (i as f64 * 0.01).sin()).collect();
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    unsafe {
        assert_eq!(hp_model_predict(m, input.as_ptr(), a.as_mut_ptr()), HpStatus::Ok);
        assert_eq!(hp_model_predict(m, input.as_ptr(), b.as_mut_ptr()), HpStatus::Ok);
        hp_model_free(m);
    }
    assert_eq!(a, b);
    assert!(a[0].abs() <= 60.0 && a[1].abs() <= 50.0 && a[2].abs() <= 75.0);
}

#[test]
fn null_arguments_are_reported() {
    let m = new_model(0);
    let mut out = [0.0; 3];
    unsafe {
        assert_eq!(hp_model_predict(m, ptr::null(), out.as_mut_ptr()), HpStatus::NullArgument);
        assert!(last_error().contains("input"));
        assert_eq!(hp_model_predict(ptr::null(), ptr::null(), out.as_mut_ptr()), HpStatus::NullArgument);
        assert_eq!(hp_model_new(0, ptr::null_mut()), HpStatus::NullArgument);
        hp_model_free(m);
        hp_model_free(ptr::null_mut());
    }
}

#[test]
fn non_finite_input_is_rejected() {
    let m = new_model(0);
    let mut input = vec![0.0; hp_input_len()];
    input[7] = f64::NAN;
    let mut out = [0.0; 3];
    unsafe {
        assert_eq!(hp_model_predict(m, input.as_ptr(), out.as_mut_ptr()), HpStatus::InvalidArgument);
        hp_model_free(m);
    }
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.ck").to_str().unwrap()).unwrap();
    let m = new_model(11);
    let input: Vec<f64> = (0..hp_input_len()).map(|i| (i as f64 * 0.37).cos()).collect();
    let mut before = [0.0; 3];
    let mut after = [0.0; 3];
    unsafe {
        assert_eq!(hp_model_save(m, path.as_ptr()), HpStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(hp_model_load(path.as_ptr(), &mut loaded), HpStatus::Ok);
        hp_model_predict(m, input.as_ptr(), before.as_mut_ptr());
        hp_model_predict(loaded, input.as_ptr(), after.as_mut_ptr());
        hp_model_free(loaded);
        hp_model_free(m);
    }
    assert_eq!(before.map(f64::to_bits), after.map(f64::to_bits));
}

#[test]
fn load_errors_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = CString::new(dir.path().join("none.ck").to_str().unwrap()).unwrap();
    let junk_path = dir.path().join("junk.ck");
    std::fs::write(&junk_path, b"not a checkpoint").unwrap();
    let junk = CString::new(junk_path.to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(hp_model_load(missing.as_ptr(), &mut m), HpStatus::Io);
        assert_eq!(hp_model_load(junk.as_ptr(), &mut m), HpStatus::Checkpoint);
        assert!(last_error().contains("magic"));
    }
    assert!(m.is_null());
}

#[test]
fn depth_frame_matches_library_pipeline() {
    let cfg = SynthConfig::default();
    let sample = generate_dataset(1, &cfg, 5).unwrap().remove(0);
    let mm = sample.depth.to_millimeters();
    let k = HpIntrinsics {
        fx: cfg.intrinsics.fx,
        fy: cfg.intrinsics.fy,
        cx: cfg.intrinsics.cx,
        cy: cfg.intrinsics.cy,
    };
    let center = sample.label.head_center_mm;
    let mut input = vec![0.0; hp_input_len()];
    let m = new_model(2);
    let mut direct = [0.0; 3];
    let mut via_depth = [0.0; 3];
    unsafe {
        assert_eq!(
            hp_preprocess(mm.as_ptr(), sample.depth.width(), sample.depth.height(), &k, center.as_ptr(), input.as_mut_ptr()),
            HpStatus::Ok
        );
        hp_model_predict(m, input.as_ptr(), direct.as_mut_ptr());
        assert_eq!(
            hp_model_predict_depth(
                m,
                mm.as_ptr(),
                sample.depth.width(),
                sample.depth.height(),
                &k,
                center.as_ptr(),
                via_depth.as_mut_ptr()
            ),
            HpStatus::Ok
        );
        hp_model_free(m);
    }
    assert_eq!(direct, via_depth);
    let mean = input.iter().sum::<f64>() / input.len() as f64;
    assert!(mean.is_finite());

    let behind = [0.0, 0.0, -10.0];
    unsafe {
        assert_eq!(
            hp_preprocess(mm.as_ptr(), sample.depth.width(), sample.depth.height(), &k, behind.as_ptr(), input.as_mut_ptr()),
            HpStatus::Preprocess
        );
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/headpose.h")).unwrap();
    for name in [
        "hp_version",
        "hp_last_error",
        "hp_model_new",
        "hp_model_load",
        "hp_model_save",
        "hp_model_free",
        "hp_model_predict",
        "hp_model_predict_depth",
        "hp_preprocess",
        "typedef struct HpModel HpModel",
        "HP_STATUS_OK",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"headpose.h\"\n\
         int main(void) {\n\
           HpModel *m = 0;\n\
           double out[3];\n\
           HpIntrinsics k = {500.0, 500.0, 320.0, 240.0};\n\
           (void)k;\n\
           if (hp_model_new(1, &m) != HP_STATUS_OK) return 1;\n\
           hp_model_predict(m, 0, out);\n\
           hp_model_free(m);\n\
           return HP_INPUT_LEN == 4096 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    match std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-std=c99", "-I", include])
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax not checked"),
    }
}
