//! Exercises the C ABI surface through the Rust declarations.

use qrisk_ffi::*;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

fn kb_dir() -> CString {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../qrisk/kb");
    CString::new(dir.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qrisk_last_error()).to_string_lossy().into_owned() }
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let text = CStr::from_ptr(ptr).to_string_lossy().into_owned();
    qrisk_string_free(ptr);
    text
}

#[test]
fn load_assess_and_free() {
    unsafe {
        let mut kb: *mut QriskKb = ptr::null_mut();
        let status = qrisk_kb_load(kb_dir().as_ptr(), true, &mut kb);
        assert_eq!(status, QriskStatus::QriskOk, "load failed: {}", last_error());
        assert!(!kb.is_null());

        let version = take_string(qrisk_kb_version(kb));
        assert_eq!(version, "2026.08");

        let inventory = CString::new(
            r#"{
                "schema": "qrisk-inventory/1",
                "name": "ffi-smoke",
                "assets": [
                    {"id": "a", "kind": "protocol", "stage": "pre_migration", "subject": "tls_1_3"},
                    {"id": "b", "kind": "algorithm", "stage": "post_migration", "subject": "kyber"}
                ]
            }"#,
        )
        .unwrap();
        let mut report: *mut std::ffi::c_char = ptr::null_mut();
        let status = qrisk_assess(kb, inventory.as_ptr(), 15, &mut report);
        assert_eq!(status, QriskStatus::QriskOk, "assess failed: {}", last_error());
        let report: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(report["schema"], "qrisk-report/1");
        assert_eq!(report["summary"]["assessed"], 2);
        assert_eq!(report["findings"][0]["risk"], "high");

        let mut record: *mut std::ffi::c_char = ptr::null_mut();
        let id = CString::new("tls_1_3").unwrap();
        assert_eq!(qrisk_kb_show(kb, id.as_ptr(), &mut record), QriskStatus::QriskOk);
        let record: serde_json::Value = serde_json::from_str(&take_string(record)).unwrap();
        assert_eq!(record["id"], "tls_1_3");

        qrisk_kb_free(kb);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut kb: *mut QriskKb = ptr::null_mut();
        assert_eq!(
            qrisk_kb_load(kb_dir().as_ptr(), true, ptr::null_mut()),
            QriskStatus::QriskNullArgument
        );
        let missing = CString::new("/does/not/exist").unwrap();
        assert_eq!(
            qrisk_kb_load(missing.as_ptr(), true, &mut kb),
            QriskStatus::QriskKbInvalid
        );
        assert!(last_error().contains("missing-document"), "error: {}", last_error());

        let status = qrisk_kb_load(kb_dir().as_ptr(), true, &mut kb);
        assert_eq!(status, QriskStatus::QriskOk);

        let garbage = CString::new("not json").unwrap();
        let mut report: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            qrisk_assess(kb, garbage.as_ptr(), 15, &mut report),
            QriskStatus::QriskInventoryInvalid
        );
        assert!(report.is_null());

        // an unknown horizon is reported per asset, not as a hard failure
        let inventory = CString::new(
            r#"{"schema": "qrisk-inventory/1", "name": "x", "assets": [
                {"id": "a", "kind": "algorithm", "stage": "pre_migration", "subject": "rsa_2048"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(
            qrisk_assess(kb, inventory.as_ptr(), 12, &mut report),
            QriskStatus::QriskOk
        );
        let parsed: serde_json::Value =
            serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(parsed["findings"][0]["code"], "unknown-horizon");

        let unknown = CString::new("nothing_here").unwrap();
        let mut record: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            qrisk_kb_show(kb, unknown.as_ptr(), &mut record),
            QriskStatus::QriskAssessmentFailed
        );

        qrisk_kb_free(kb);
        qrisk_kb_free(ptr::null_mut());
        qrisk_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qrisk.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header exists");
    assert!(text.contains("QRISK_H"));
    assert!(text.contains("qrisk_kb_load"));
    assert!(text.contains("qrisk_assess"));
    assert!(text.contains("qrisk_string_free"));
}
