// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use colocate_ffi::*;

const DATA: &str = "id,feature,shape_type,coords,amount,radius\n\
a,A,point,0 0,,1\n\
b,B,point,0.5 0,,1\n\
c,C,point,10 10,,1\n";

fn dataset(dir: &Path) -> *mut ColocateDataset {
    let path = dir.join("d.csv");
    std::fs::write(&path, DATA).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { colocate_dataset_from_csv(c.as_ptr(), &mut ds) }, ColocateStatus::Ok);
    ds
}

fn last_error() -> String {
    let p = colocate_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn handles_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dataset(dir.path());
    let mut n = 0;
    unsafe {
        assert_eq!(colocate_dataset_len(ds, &mut n), ColocateStatus::Ok);
        assert_eq!(n, 3);
        let model = CString::new("certain").unwrap();
        let mut ts = ptr::null_mut();
        assert_eq!(colocate_transactions_new(ds, 0.1, model.as_ptr(), &mut ts), ColocateStatus::Ok);
        assert_eq!(colocate_transactions_len(ts, &mut n), ColocateStatus::Ok);
        assert!(n > 0);

        let mut v = 0.0;
        let ab = CString::new("A+B").unwrap();
        assert_eq!(colocate_expected_support(ts, ab.as_ptr(), &mut v), ColocateStatus::Ok);
        assert!(v > 0.0);
        let rule = CString::new("A->B").unwrap();
        assert_eq!(colocate_expected_confidence(ts, rule.as_ptr(), &mut v), ColocateStatus::Ok);
        assert!(v > 0.0 && v <= 1.0);
        let absent = CString::new("Z->A").unwrap();
        assert_eq!(colocate_expected_confidence(ts, absent.as_ptr(), &mut v), ColocateStatus::UndefinedConfidence);
        assert!(last_error().contains("Z"));

        colocate_transactions_free(ts);
        colocate_dataset_free(ds);
    }
    assert_eq!(colocate_p_value(4, 99), 0.05);
}

#[test]
fn errors_are_reported() {
    let mut ds = ptr::null_mut();
    let missing = CString::new("/nonexistent/x.csv").unwrap();
    unsafe {
        assert_eq!(colocate_dataset_from_csv(missing.as_ptr(), &mut ds), ColocateStatus::Io);
        assert!(ds.is_null());
        assert!(last_error().contains("/nonexistent/x.csv"));
        assert_eq!(colocate_dataset_from_csv(ptr::null(), &mut ds), ColocateStatus::NullPointer);
        let mut n = 0;
        assert_eq!(colocate_dataset_len(ptr::null(), &mut n), ColocateStatus::NullPointer);
        colocate_dataset_free(ptr::null_mut());
        colocate_string_free(ptr::null_mut());
    }
    let dir = tempfile::tempdir().unwrap();
    let ds = dataset(dir.path());
    let mut ts = ptr::null_mut();
    let bad = CString::new("wobbly").unwrap();
    unsafe {
        assert_eq!(colocate_transactions_new(ds, 0.1, bad.as_ptr(), &mut ts), ColocateStatus::InvalidArgument);
        colocate_dataset_free(ds);
    }
    // a successful call clears the message
    assert_eq!(colocate_p_value(0, 1), 0.5);
    let dir2 = tempfile::tempdir().unwrap();
    let ds = dataset(dir2.path());
    assert!(colocate_last_error_message().is_null());
    unsafe { colocate_dataset_free(ds) };
}

#[test]
fn mine_returns_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, DATA).unwrap();
    let cfg = format!(
        r#"{{"input": {:?}, "consequent": "B", "runs": 9, "spacing": 0.25, "strategy": "fully_random",
            "study_region": {{"min_x": -2, "min_y": -2, "max_x": 12, "max_y": 12}}}}"#,
        path.to_str().unwrap()
    );
    let cfg = CString::new(cfg).unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(colocate_mine_json(cfg.as_ptr(), &mut out), ColocateStatus::Ok, "{}", last_error());
        let json = CStr::from_ptr(out).to_str().unwrap().to_owned();
        colocate_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["survivors_per_run"].as_array().unwrap().len(), 9);

        let bad = CString::new("{\"runs\": \"many\"}").unwrap();
        assert_eq!(colocate_mine_json(bad.as_ptr(), &mut out), ColocateStatus::Parse);
        assert!(out.is_null());
    }
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = target_dir().join("libcolocate_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), DATA).unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "colocate.h"
int main(int argc, char **argv) {
    ColocateDataset *ds = NULL;
    ColocateTransactions *ts = NULL;
    double v = 0.0;
    if (colocate_dataset_from_csv(argv[1], &ds) != COLOCATE_STATUS_OK) return 2;
    if (colocate_transactions_new(ds, 0.1, "curve", &ts) != COLOCATE_STATUS_OK) return 3;
    if (colocate_expected_support(ts, "A+B", &v) != COLOCATE_STATUS_OK) return 4;
    if (colocate_expected_support(ts, NULL, &v) != COLOCATE_STATUS_NULL_POINTER) return 5;
    printf("%s\n", colocate_last_error_message());
    colocate_transactions_free(ts);
    colocate_dataset_free(ds);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let cc = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&exe).arg(dir.path().join("d.csv")).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "pattern is null");
}
