//! C ABI over `autostruct`.
//!
//! Objects cross the boundary as opaque handles; everything else is UTF-8 text, mostly JSON.
//! Each call returns an [`AsStatus`]. On failure the message is available from
//! [`as_last_error`] until the next failing call on the same thread. Strings handed out by
//! the library must be released with [`as_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use autostruct::automata::{Alphabet, Automaton};
use autostruct::eqstruct::{self, FiberSpec};
use autostruct::formula::Formula;
use autostruct::growth::classify_growth;
use autostruct::presentation::{self, Presentation};
use serde_json::{json, Value};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, formula or regex text.
    Parse = 3,
    /// The library rejected the input or the operation failed.
    Failed = 4,
    Panic = 5,
}

/// A finite automaton.
pub struct AsAutomaton(Automaton);

/// An automatic presentation.
pub struct AsPresentation(Presentation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AsStatus, String);

type Res<T> = Result<T, Failure>;

impl From<autostruct::Error> for Failure {
    fn from(e: autostruct::Error) -> Self {
        let status = match e {
            autostruct::Error::Parse { .. } | autostruct::Error::Json(_) => AsStatus::Parse,
            _ => AsStatus::Failed,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(AsStatus::Parse, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Res<()>) -> AsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AsStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Failure(AsStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(AsStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| Failure(AsStatus::NullArgument, format!("`{what}` is null")))
}

unsafe fn put<T>(out: *mut T, v: T) -> Res<()> {
    if out.is_null() {
        return Err(Failure(AsStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Res<()> {
    let c = CString::new(s).map_err(|_| Failure(AsStatus::Failed, "output contains a NUL byte".into()))?;
    put(out, c.into_raw())
}

unsafe fn put_json(out: *mut *mut c_char, v: &Value) -> Res<()> {
    put_string(out, serde_json::to_string(v).expect("JSON values serialize"))
}

unsafe fn put_handle<T>(out: *mut *mut T, v: T) -> Res<()> {
    if out.is_null() {
        return Err(Failure(AsStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

fn parse_formula(s: &str) -> Res<Formula> {
    Ok(Formula::parse(s)?)
}

/// Message of the last failure on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn as_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn as_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn as_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a DFA from a regex over an alphabet given as a JSON array of tokens.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with [`as_automaton_free`].
#[no_mangle]
pub unsafe extern "C" fn as_automaton_from_regex(
    alphabet_json: *const c_char,
    regex: *const c_char,
    out: *mut *mut AsAutomaton,
) -> AsStatus {
    guard(|| {
        let alphabet = Alphabet::from_json(&serde_json::from_str(text(alphabet_json, "alphabet_json")?)?)?;
        let a = Automaton::from_regex(alphabet, text(regex, "regex")?)?;
        put_handle(out, AsAutomaton(a))
    })
}

/// # Safety
/// Pointers must be valid; `out` receives a handle to free with [`as_automaton_free`].
#[no_mangle]
pub unsafe extern "C" fn as_automaton_from_json(json: *const c_char, out: *mut *mut AsAutomaton) -> AsStatus {
    guard(|| put_handle(out, AsAutomaton(Automaton::from_json(text(json, "json")?)?)))
}

/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn as_automaton_free(a: *mut AsAutomaton) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_automaton_to_json(a: *const AsAutomaton, out: *mut *mut c_char) -> AsStatus {
    guard(|| put_string(out, obj(a, "a")?.0.to_json()))
}

/// Membership of a word written in the alphabet's text form.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_automaton_accepts(a: *const AsAutomaton, word: *const c_char, out: *mut bool) -> AsStatus {
    guard(|| {
        let r = obj(a, "a")?.0.accepts_str(text(word, "word")?)?;
        put(out, r)
    })
}

/// Cumulative word counts for lengths 0..=n as a JSON array of decimal strings.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_automaton_count(a: *const AsAutomaton, n: usize, out: *mut *mut c_char) -> AsStatus {
    guard(|| {
        let counts = obj(a, "a")?.0.count_words_upto(n).values;
        put_json(out, &json!(counts.iter().map(|c| c.to_string()).collect::<Vec<_>>()))
    })
}

/// Growth classification as JSON: polynomial, degree and a bounded decomposition.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_automaton_growth(a: *const AsAutomaton, out: *mut *mut c_char) -> AsStatus {
    guard(|| put_json(out, &classify_growth(&obj(a, "a")?.0)?.to_json_value()))
}

/// One of the built-in presentations: omega, presburger, divp, tree, grid, triangular.
/// `param` is the base where one is needed and ignored otherwise.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with [`as_presentation_free`].
#[no_mangle]
pub unsafe extern "C" fn as_presentation_builtin(
    name: *const c_char,
    param: usize,
    out: *mut *mut AsPresentation,
) -> AsStatus {
    guard(|| {
        let p = match text(name, "name")? {
            "omega" => presentation::omega_le(),
            "presburger" => presentation::presburger(param)?,
            "divp" => presentation::presburger_div(param)?,
            "tree" => presentation::pary_tree(param)?,
            "grid" => presentation::grid_example(),
            "triangular" => presentation::triangular_example(),
            other => return Err(Failure(AsStatus::Failed, format!("unknown presentation `{other}`"))),
        };
        put_handle(out, AsPresentation(p))
    })
}

/// # Safety
/// Pointers must be valid; `out` receives a handle to free with [`as_presentation_free`].
#[no_mangle]
pub unsafe extern "C" fn as_presentation_from_json(json: *const c_char, out: *mut *mut AsPresentation) -> AsStatus {
    guard(|| put_handle(out, AsPresentation(Presentation::from_json(text(json, "json")?)?)))
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn as_presentation_free(p: *mut AsPresentation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_presentation_to_json(p: *const AsPresentation, out: *mut *mut c_char) -> AsStatus {
    guard(|| put_string(out, obj(p, "p")?.0.to_json()))
}

/// Truth of a sentence.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_presentation_decide(
    p: *const AsPresentation,
    sentence: *const c_char,
    out: *mut bool,
) -> AsStatus {
    guard(|| {
        let r = presentation::decide(&obj(p, "p")?.0, &parse_formula(text(sentence, "sentence")?)?)?;
        put(out, r)
    })
}

/// The relation defined by a formula, as JSON `{"vars", "relation"}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_presentation_eval(
    p: *const AsPresentation,
    formula: *const c_char,
    out: *mut *mut c_char,
) -> AsStatus {
    guard(|| {
        let r = presentation::eval(&obj(p, "p")?.0, &parse_formula(text(formula, "formula")?)?)?;
        put_json(out, &json!({"vars": r.vars, "relation": r.relation.to_json_value()}))
    })
}

/// Classifies the kernel of an order-definable function given as fiber-spec JSON
/// `{"m", "n", "graph"}` and writes the descriptor JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn as_eq_classify(fiber_json: *const c_char, out: *mut *mut c_char) -> AsStatus {
    guard(|| {
        let v: Value = serde_json::from_str(text(fiber_json, "fiber_json")?)?;
        let f = FiberSpec::from_json_value(&v)?;
        put_json(out, &eqstruct::classify(&f)?.to_json_value())
    })
}
