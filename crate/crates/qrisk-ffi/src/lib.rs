//! C ABI for the qrisk assessment engine.
//!
//! The API hands out an opaque knowledge base handle, reports failures
//! through status codes, and keeps a per-thread error message retrievable
//! with `qrisk_last_error`. All returned strings are NUL-terminated UTF-8
//! owned by the library; release them with `qrisk_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use qrisk::engine::{assess_inventory, AssessmentConfig};
use qrisk::inventory::parse_inventory;
use qrisk::kb::{load_kb_dir, KnowledgeBase, LoadOptions};
use qrisk::report::{canonical_json, render_report, ReportFormat};

/// Opaque handle to a loaded knowledge base.
pub struct QriskKb {
    kb: KnowledgeBase,
}

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QriskStatus {
    /// Success.
    QriskOk = 0,
    /// A required pointer argument was NULL.
    QriskNullArgument = 1,
    /// A string argument was not valid UTF-8.
    QriskInvalidUtf8 = 2,
    /// The knowledge base failed to load or validate.
    QriskKbInvalid = 3,
    /// The inventory document failed to parse or validate.
    QriskInventoryInvalid = 4,
    /// The assessment itself failed (unknown horizon, unknown subject
    /// with fail-on-unknown, ...).
    QriskAssessmentFailed = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Returns the error message of the most recent failure on this thread.
///
/// The pointer stays valid until the next failing call on the same
/// thread. Never free it.
#[no_mangle]
pub extern "C" fn qrisk_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, QriskStatus> {
    if ptr.is_null() {
        set_last_error("NULL argument");
        return Err(QriskStatus::QriskNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        QriskStatus::QriskInvalidUtf8
    })
}

fn string_out(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Loads and validates a knowledge base from a directory of KB documents.
///
/// On success writes a handle to `out_kb` and returns `QriskOk`. The
/// handle must be released with `qrisk_kb_free`.
///
/// # Safety
/// `kb_dir` must be a valid NUL-terminated string and `out_kb` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn qrisk_kb_load(
    kb_dir: *const c_char,
    strict: bool,
    out_kb: *mut *mut QriskKb,
) -> QriskStatus {
    if out_kb.is_null() {
        set_last_error("out_kb is NULL");
        return QriskStatus::QriskNullArgument;
    }
    let dir = match cstr_arg(kb_dir) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match load_kb_dir(Path::new(dir), LoadOptions { strict }) {
        Ok(kb) => {
            *out_kb = Box::into_raw(Box::new(QriskKb { kb }));
            QriskStatus::QriskOk
        }
        Err(e) => {
            set_last_error(&e.to_string());
            QriskStatus::QriskKbInvalid
        }
    }
}

/// Releases a knowledge base handle. NULL is ignored.
///
/// # Safety
/// `kb` must have been returned by `qrisk_kb_load` and not freed before.
#[no_mangle]
pub unsafe extern "C" fn qrisk_kb_free(kb: *mut QriskKb) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Returns the KB version string. Free with `qrisk_string_free`.
///
/// # Safety
/// `kb` must be a live handle from `qrisk_kb_load`.
#[no_mangle]
pub unsafe extern "C" fn qrisk_kb_version(kb: *const QriskKb) -> *mut c_char {
    if kb.is_null() {
        set_last_error("kb is NULL");
        return ptr::null_mut();
    }
    string_out((*kb).kb.version.clone())
}

/// Assesses an inventory JSON document and writes the canonical JSON
/// report to `out_report_json` (free with `qrisk_string_free`).
///
/// `horizon_years` must match one of the KB poll horizons.
///
/// # Safety
/// `kb` must be a live handle; `inventory_json` a valid NUL-terminated
/// string; `out_report_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrisk_assess(
    kb: *const QriskKb,
    inventory_json: *const c_char,
    horizon_years: u32,
    out_report_json: *mut *mut c_char,
) -> QriskStatus {
    if kb.is_null() || out_report_json.is_null() {
        set_last_error("kb or out_report_json is NULL");
        return QriskStatus::QriskNullArgument;
    }
    let text = match cstr_arg(inventory_json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let inventory = match parse_inventory(text, true) {
        Ok(inv) => inv,
        Err(violations) => {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            set_last_error(&lines.join("\n"));
            return QriskStatus::QriskInventoryInvalid;
        }
    };
    let cfg = AssessmentConfig::with_horizon(horizon_years);
    match assess_inventory(&inventory, &(*kb).kb, &cfg) {
        Ok(report) => {
            *out_report_json = string_out(render_report(&report, ReportFormat::Json));
            QriskStatus::QriskOk
        }
        Err(e) => {
            set_last_error(&e.message);
            QriskStatus::QriskAssessmentFailed
        }
    }
}

/// Looks up one KB record by id and writes it as JSON.
///
/// Returns `QriskAssessmentFailed` with a suggestion list in the error
/// message when the id is unknown.
///
/// # Safety
/// Same contract as `qrisk_assess`.
#[no_mangle]
pub unsafe extern "C" fn qrisk_kb_show(
    kb: *const QriskKb,
    id: *const c_char,
    out_record_json: *mut *mut c_char,
) -> QriskStatus {
    use qrisk::kb::{LookupResult, RecordRef};
    if kb.is_null() || out_record_json.is_null() {
        set_last_error("kb or out_record_json is NULL");
        return QriskStatus::QriskNullArgument;
    }
    let id = match cstr_arg(id) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match (*kb).kb.lookup(id) {
        LookupResult::Found(record) => {
            let json = match record {
                RecordRef::Mechanism(r) => canonical_json(&r),
                RecordRef::Attack(r) => canonical_json(&r),
                RecordRef::Certificate(r) => canonical_json(&r),
                RecordRef::Protocol(r) => canonical_json(&r),
                RecordRef::Combiner(r) => canonical_json(&r),
            };
            *out_record_json = string_out(json);
            QriskStatus::QriskOk
        }
        LookupResult::NotFound { suggestions } => {
            set_last_error(&format!(
                "no record with id {id:?}; closest: {}",
                suggestions.join(", ")
            ));
            QriskStatus::QriskAssessmentFailed
        }
    }
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a qrisk function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn qrisk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
