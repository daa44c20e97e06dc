use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use netneg_ffi::*;

fn data(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = netneg_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { netneg_string_free(p) };
    s
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { netneg_string_free(p) };
    s
}

#[test]
fn pitch_names_round_trip() {
    for i in 0..13u8 {
        let name = netneg_pitch_name(i);
        let mut back = 99;
        assert_eq!(unsafe { netneg_pitch_parse(name, &mut back) }, NetNegStatus::Ok);
        assert_eq!(back, i);
    }
    assert!(netneg_pitch_name(13).is_null());
    let bad = CString::new("do").unwrap();
    let mut out = 0;
    assert_eq!(
        unsafe { netneg_pitch_parse(bad.as_ptr(), &mut out) },
        NetNegStatus::Parse
    );
    assert!(last_error().contains("do"));
    assert_eq!(
        unsafe { netneg_pitch_parse(ptr::null(), &mut out) },
        NetNegStatus::NullPointer
    );
}

#[test]
fn duet_rules_and_negotiation() {
    unsafe {
        let mut duet = ptr::null_mut();
        assert_eq!(netneg_duet_new(8, true, &mut duet), NetNegStatus::Ok);
        let mut mask = 0u16;
        assert_eq!(netneg_duet_check_pair(duet, 7, 9, &mut mask), NetNegStatus::Ok);
        assert_eq!(mask, 1 << 2);
        assert_eq!(netneg_duet_push(duet, 7, 7), NetNegStatus::Ok);
        assert_eq!(netneg_duet_position(duet), 1);

        let mut agreement = NetNegAgreement::default();
        assert_eq!(
            netneg_negotiate(duet, ptr::null(), ptr::null(), 1.0, &mut agreement),
            NetNegStatus::Ok
        );
        assert!(!agreement.dead_end);
        assert_eq!((agreement.voice1, agreement.voice2), (6, 8));
        assert_eq!(agreement.utility, 0.5);
        assert!(agreement.legal_count > 0);

        let negative = [-1.0; 13];
        assert_eq!(
            netneg_negotiate(duet, negative.as_ptr(), ptr::null(), 1.0, &mut agreement),
            NetNegStatus::InvalidArgument
        );
        assert_eq!(netneg_duet_push(duet, 13, 0), NetNegStatus::InvalidArgument);
        assert!(last_error().contains("13"));
        netneg_duet_free(duet);

        let mut full = ptr::null_mut();
        assert_eq!(netneg_duet_new(1, true, &mut full), NetNegStatus::Ok);
        assert_eq!(netneg_duet_push(full, 7, 7), NetNegStatus::Ok);
        assert_eq!(netneg_duet_push(full, 7, 7), NetNegStatus::Contract);
        netneg_duet_free(full);
        netneg_duet_free(ptr::null_mut());
    }
}

#[test]
fn validate_text_reports() {
    unsafe {
        let text =
            std::fs::read_to_string(PathBuf::from(data("duets/parallel_octaves.txt").to_str().unwrap())).unwrap();
        let text = CString::new(text).unwrap();
        let mut legal = true;
        let mut report = ptr::null_mut();
        assert_eq!(
            netneg_validate_text(text.as_ptr(), true, &mut legal, &mut report),
            NetNegStatus::Ok
        );
        assert!(!legal);
        assert!(take_string(report).contains("verdict=rules 4,5"));

        let junk = CString::new("V1: re8\n").unwrap();
        assert_eq!(
            netneg_validate_text(junk.as_ptr(), true, &mut legal, ptr::null_mut()),
            NetNegStatus::InvalidArgument
        );
    }
}

#[test]
fn agent_only_composition() {
    unsafe {
        let mut cfg = netneg_compose_default_config();
        cfg.agent_only = true;
        let mut comp = ptr::null_mut();
        assert_eq!(
            netneg_compose(ptr::null(), ptr::null(), &cfg, &mut comp),
            NetNegStatus::Ok
        );
        assert_eq!(netneg_composition_len(comp), 8);
        assert!(!netneg_composition_dead_end(comp, ptr::null_mut()));
        let (mut v1, mut v2) = (0, 0);
        assert_eq!(netneg_composition_pair(comp, 1, &mut v1, &mut v2), NetNegStatus::Ok);
        assert_eq!((v1, v2), (6, 8));
        assert_eq!(
            netneg_composition_pair(comp, 8, &mut v1, &mut v2),
            NetNegStatus::InvalidArgument
        );
        let text = take_string(netneg_composition_text(comp));
        assert!(text.starts_with("V1: re8 do8 la"));
        assert!(take_string(netneg_composition_trace_csv(comp)).starts_with("step,weight,"));

        let dir = tempfile::tempdir().unwrap();
        let midi = CString::new(dir.path().join("x.mid").to_str().unwrap()).unwrap();
        assert_eq!(netneg_composition_write_midi(comp, midi.as_ptr(), 60), NetNegStatus::Ok);
        assert!(std::fs::read(dir.path().join("x.mid")).unwrap().starts_with(b"MThd"));
        netneg_composition_free(comp);

        cfg.agent_only = false;
        assert_eq!(
            netneg_compose(ptr::null(), ptr::null(), &cfg, &mut comp),
            NetNegStatus::InvalidArgument
        );
    }
}

#[test]
fn train_save_load_compose() {
    unsafe {
        let corpus = data("cantus_firmi.txt");
        let mut a = ptr::null_mut();
        let mut mse = f64::NAN;
        assert_eq!(
            netneg_net_train(corpus.as_ptr(), 4, 8, 30, 0.2, 0.7, 1, &mut a, &mut mse),
            NetNegStatus::Ok
        );
        assert!(mse.is_finite());
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("a.net").to_str().unwrap()).unwrap();
        assert_eq!(netneg_net_save(a, path.as_ptr()), NetNegStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(netneg_net_load(path.as_ptr(), &mut b), NetNegStatus::Ok);

        let cfg = netneg_compose_default_config();
        let mut comp = ptr::null_mut();
        assert_eq!(netneg_compose(a, b, &cfg, &mut comp), NetNegStatus::Ok);
        let mut step = 0;
        let n = netneg_composition_len(comp);
        assert!(n == 8 || (netneg_composition_dead_end(comp, &mut step) && step == n));
        netneg_composition_free(comp);
        netneg_net_free(a);
        netneg_net_free(b);

        let missing = CString::new("/nonexistent/net").unwrap();
        assert_eq!(netneg_net_load(missing.as_ptr(), &mut b), NetNegStatus::Io);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/netneg.h")).unwrap();
    let source = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let names: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(names.len() >= 20);
    for name in names {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Builds and runs a small C program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let target = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = target.join("libnetneg_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "netneg.h"

int main(void) {
    NetNegComposeConfig cfg = netneg_compose_default_config();
    cfg.agent_only = true;
    NetNegComposition *c = NULL;
    if (netneg_compose(NULL, NULL, &cfg, &c) != NET_NEG_STATUS_OK) return 1;
    char *text = netneg_composition_text(c);
    fputs(text, stdout);
    netneg_string_free(text);
    netneg_composition_free(c);
    uint8_t idx;
    if (netneg_pitch_parse("bogus", &idx) != NET_NEG_STATUS_PARSE) return 2;
    char *err = netneg_last_error_message();
    printf("error: %s\n", err);
    netneg_string_free(err);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("V1: re8 do8 la sol"), "{stdout}");
    assert!(stdout.contains("error: ") && stdout.contains("bogus"));
}
