use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use autostruct_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    as_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(as_last_error()).to_str().unwrap().to_string()
}

#[test]
fn automaton_round_trip() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(as_automaton_from_regex(c(r#"["a","b"]"#).as_ptr(), c("a*b*").as_ptr(), &mut a), AsStatus::Ok);
        let mut yes = false;
        assert_eq!(as_automaton_accepts(a, c("aabb").as_ptr(), &mut yes), AsStatus::Ok);
        assert!(yes);
        assert_eq!(as_automaton_accepts(a, c("ba").as_ptr(), &mut yes), AsStatus::Ok);
        assert!(!yes);

        let mut s = ptr::null_mut();
        assert_eq!(as_automaton_count(a, 4, &mut s), AsStatus::Ok);
        assert_eq!(take(s), r#"["1","3","6","10","15"]"#);
        assert_eq!(as_automaton_growth(a, &mut s), AsStatus::Ok);
        let g: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!((g["polynomial"].as_bool(), g["degree"].as_u64()), (Some(true), Some(2)));

        assert_eq!(as_automaton_to_json(a, &mut s), AsStatus::Ok);
        let text = c(&take(s));
        let mut b = ptr::null_mut();
        assert_eq!(as_automaton_from_json(text.as_ptr(), &mut b), AsStatus::Ok);
        assert_eq!(as_automaton_accepts(b, c("abb").as_ptr(), &mut yes), AsStatus::Ok);
        assert!(yes);
        as_automaton_free(a);
        as_automaton_free(b);
        as_automaton_free(ptr::null_mut());
    }
}

#[test]
fn presentations() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(as_presentation_builtin(c("presburger").as_ptr(), 2, &mut p), AsStatus::Ok);
        let mut t = false;
        let comm = c("A x . A y . A z . plus(x,y,z) -> plus(y,x,z)");
        assert_eq!(as_presentation_decide(p, comm.as_ptr(), &mut t), AsStatus::Ok);
        assert!(t);
        assert_eq!(as_presentation_decide(p, c("A x . plus(x,x,x)").as_ptr(), &mut t), AsStatus::Ok);
        assert!(!t);
        as_presentation_free(p);

        assert_eq!(as_presentation_builtin(c("omega").as_ptr(), 0, &mut p), AsStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(as_presentation_eval(p, c("le(x,y)").as_ptr(), &mut s), AsStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["vars"], serde_json::json!(["x", "y"]));
        assert_eq!(as_presentation_to_json(p, &mut s), AsStatus::Ok);
        let text = c(&take(s));
        let mut q = ptr::null_mut();
        assert_eq!(as_presentation_from_json(text.as_ptr(), &mut q), AsStatus::Ok);
        assert_eq!(as_presentation_decide(q, c("E x . A y . le(x,y)").as_ptr(), &mut t), AsStatus::Ok);
        assert!(t);
        as_presentation_free(p);
        as_presentation_free(q);
    }
}

#[test]
fn classify_fibers() {
    unsafe {
        let mut s = ptr::null_mut();
        let spec = c(r#"{"m":1,"n":1,"graph":"x1 = x0"}"#);
        assert_eq!(as_eq_classify(spec.as_ptr(), &mut s), AsStatus::Ok);
        let d: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert!(d["polys"].is_array());
        let bad = c(r#"{"m":1,"n":1,"graph":"x1 <= x0"}"#);
        assert_eq!(as_eq_classify(bad.as_ptr(), &mut s), AsStatus::Failed);
        assert!(last_error().contains("functional"));
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(as_automaton_from_regex(ptr::null(), c("a").as_ptr(), &mut a), AsStatus::NullArgument);
        assert!(a.is_null());
        assert_eq!(as_automaton_from_regex(c("[").as_ptr(), c("a").as_ptr(), &mut a), AsStatus::Parse);
        assert_eq!(as_automaton_from_regex(c(r#"["a"]"#).as_ptr(), c("(a").as_ptr(), &mut a), AsStatus::Parse);
        assert!(!last_error().is_empty());
        let bad = [0xffu8, 0];
        assert_eq!(as_automaton_from_json(bad.as_ptr().cast(), &mut a), AsStatus::InvalidUtf8);
        let mut p = ptr::null_mut();
        assert_eq!(as_presentation_builtin(c("nope").as_ptr(), 0, &mut p), AsStatus::Failed);
        assert_eq!(as_presentation_builtin(c("presburger").as_ptr(), 1, &mut p), AsStatus::Failed);
        assert_eq!(as_presentation_builtin(c("grid").as_ptr(), 0, ptr::null_mut()), AsStatus::NullArgument);
        let mut t = false;
        assert_eq!(as_presentation_decide(ptr::null(), c("x = x").as_ptr(), &mut t), AsStatus::NullArgument);
        assert_eq!(CStr::from_ptr(as_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/autostruct.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["as_last_error", "as_string_free", "as_automaton_free", "as_presentation_decide", "as_eq_classify"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).status() else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(status.success());
}

#[test]
fn links_from_c() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap();
    if !lib_dir.join("libautostruct_ffi.a").exists() {
        eprintln!("static library not found, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "autostruct.h"
int main(void) {
    as_automaton *a = NULL;
    if (as_automaton_from_regex("[\"a\",\"b\"]", "(ab)*", &a) != AS_STATUS_OK) return 1;
    bool yes = false;
    if (as_automaton_accepts(a, "abab", &yes) != AS_STATUS_OK || !yes) return 2;
    char *counts = NULL;
    if (as_automaton_count(a, 4, &counts) != AS_STATUS_OK) return 3;
    int same = strcmp(counts, "[\"1\",\"1\",\"2\",\"2\",\"3\"]") == 0;
    as_string_free(counts);
    as_automaton_free(a);
    if (as_automaton_from_regex("[\"a\"]", "(", &a) != AS_STATUS_PARSE || as_last_error() == NULL) return 4;
    return same ? 0 : 5;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let Ok(status) = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(lib_dir.join("libautostruct_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(status.success());
    assert_eq!(Command::new(&bin).status().unwrap().code(), Some(0));
}
