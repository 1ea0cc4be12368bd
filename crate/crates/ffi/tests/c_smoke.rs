use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    assert!(
        lib_dir.join("libsurveilcorr_ffi.a").exists(),
        "static library not in {}",
        lib_dir.display()
    );
    let out = tempfile_path("sc_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libsurveilcorr_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());

    let table = surveilcorr::parse_wide_csv(
        "index,district,province,W1,W2,W3,W4,W5,W6,W7,W8,W9,W10,W11,W12\n\
         1,A,P,3,9,4,7,12,5,6,11,2,8,10,4\n\
         2,B,P,5,4,10,6,8,13,4,7,12,3,9,11\n",
    )
    .unwrap();
    let m = surveilcorr::compute_all(&table, &surveilcorr::ScoreConfig::default()).unwrap();
    let want = format!("{:.6}\n", m.get(1, 2).unwrap().unwrap());
    assert_eq!(String::from_utf8(run.stdout).unwrap(), want);
    let _ = std::fs::remove_file(out);
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
