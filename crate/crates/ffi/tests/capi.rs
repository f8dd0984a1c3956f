use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use imbalkit_ffi::*;

fn last_error() -> String {
    let p = imbk_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn toy() -> (Vec<f64>, Vec<u32>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..30 {
        let c = u32::from(i >= 24);
        x.push(if c == 1 { 4.0 + 0.05 * i as f64 } else { 0.05 * i as f64 });
        x.push((i % 4) as f64);
        y.push(c);
    }
    (x, y)
}

unsafe fn dataset(x: &[f64], y: &[u32]) -> *mut ImbkDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(imbk_dataset_new(x.as_ptr(), y.len(), 2, y.as_ptr(), 2, &mut ds), ImbkStatus::Ok);
    ds
}

#[test]
fn fit_predict_save_load() {
    let (x, y) = toy();
    unsafe {
        let ds = dataset(&x, &y);
        let (mut n, mut d, mut k) = (0, 0, 0);
        assert_eq!(imbk_dataset_shape(ds, &mut n, &mut d, &mut k), ImbkStatus::Ok);
        assert_eq!((n, d, k), (30, 2, 2));

        let mut model = ptr::null_mut();
        let method = CString::new("uba").unwrap();
        let params = CString::new(r#"{"n_estimators": 5}"#).unwrap();
        assert_eq!(imbk_model_fit(method.as_ptr(), ds, params.as_ptr(), 3, &mut model), ImbkStatus::Ok);
        let mut classes = 0;
        assert_eq!(imbk_model_n_classes(model, &mut classes), ImbkStatus::Ok);
        assert_eq!(classes, 2);

        let mut proba = vec![0.0; 60];
        assert_eq!(imbk_model_predict_proba(model, x.as_ptr(), 30, 2, proba.as_mut_ptr(), 60), ImbkStatus::Ok);
        for row in proba.chunks(2) {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-12);
        }
        let mut pred = vec![9u32; 30];
        assert_eq!(imbk_model_predict(model, x.as_ptr(), 30, 2, pred.as_mut_ptr()), ImbkStatus::Ok);
        assert_eq!(pred, y);

        let mut m = ImbkMetrics::default();
        assert_eq!(imbk_evaluate(y.as_ptr(), proba.as_ptr(), 30, 2, &mut m), ImbkStatus::Ok);
        assert_eq!((m.auprc, m.balanced_accuracy), (1.0, 1.0));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("m.bin").to_str().unwrap()).unwrap();
        assert_eq!(imbk_model_save(model, path.as_ptr()), ImbkStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(imbk_model_load(path.as_ptr(), &mut loaded), ImbkStatus::Ok);
        let mut again = vec![0.0; 60];
        assert_eq!(imbk_model_predict_proba(loaded, x.as_ptr(), 30, 2, again.as_mut_ptr(), 60), ImbkStatus::Ok);
        assert_eq!(proba, again);

        imbk_model_free(loaded);
        imbk_model_free(model);
        imbk_dataset_free(ds);
        imbk_dataset_free(ptr::null_mut());
    }
}

#[test]
fn errors_set_status_and_message() {
    let (x, y) = toy();
    unsafe {
        let ds = dataset(&x, &y);
        let mut model = ptr::null_mut();
        assert_eq!(imbk_model_fit(ptr::null(), ds, ptr::null(), 0, &mut model), ImbkStatus::NullPointer);
        assert!(last_error().contains("method"));
        let bad = CString::new("nope").unwrap();
        assert_eq!(imbk_model_fit(bad.as_ptr(), ds, ptr::null(), 0, &mut model), ImbkStatus::UnknownMethod);
        assert!(last_error().contains("nope"));
        let base = CString::new("base").unwrap();
        let params = CString::new("{not json").unwrap();
        assert_eq!(imbk_model_fit(base.as_ptr(), ds, params.as_ptr(), 0, &mut model), ImbkStatus::InvalidArgument);
        assert!(model.is_null());

        assert_eq!(imbk_model_fit(base.as_ptr(), ds, ptr::null(), 0, &mut model), ImbkStatus::Ok);
        let mut small = vec![0.0; 10];
        assert_eq!(
            imbk_model_predict_proba(model, x.as_ptr(), 30, 2, small.as_mut_ptr(), 10),
            ImbkStatus::InvalidArgument
        );
        assert_eq!(imbk_model_predict(model, x.as_ptr(), 10, 3, small.as_mut_ptr() as *mut u32), ImbkStatus::InvalidArgument);
        imbk_model_free(model);

        let mut out = ptr::null_mut();
        assert_eq!(imbk_dataset_new(x.as_ptr(), 30, 2, y.as_ptr(), 1, &mut out), ImbkStatus::InvalidData);
        let missing = CString::new("/nonexistent/file.csv").unwrap();
        assert_eq!(imbk_dataset_from_file(missing.as_ptr(), &mut out), ImbkStatus::Io);
        imbk_dataset_free(ds);
    }
}

#[test]
fn dataset_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "a,color,label\n1,red,no\n2,blue,no\n3,red,yes\n4,blue,no\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(imbk_dataset_from_file(c.as_ptr(), &mut ds), ImbkStatus::Ok);
        let (mut n, mut d, mut k) = (0, 0, 0);
        imbk_dataset_shape(ds, &mut n, &mut d, &mut k);
        assert_eq!((n, d, k), (4, 2, 2));
        imbk_dataset_free(ds);
    }
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libimbalkit_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_is_generated_and_compiles() {
    let header = manifest().join("include").join("imbalkit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["imbk_dataset_new", "imbk_model_fit", "imbk_model_predict_proba", "imbk_last_error", "IMBK_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let src = manifest().join("tests").join("c").join("roundtrip.c");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .expect("a C compiler (`cc`) is required for this test");
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        panic!("static library not found next to the test binary");
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("roundtrip");
    let include = manifest().join("include");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(&include)
        .arg(manifest().join("tests/c/roundtrip.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "linking against {}", lib.display());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
