use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR"))
        .parent()
        .unwrap()
        .to_path_buf()
}

fn find_staticlib() -> Option<PathBuf> {
    let name = "libzetagaps_ffi.a";
    ["debug", "release"]
        .iter()
        .map(|p| target_dir().join(p).join(name))
        .filter(|p| p.exists())
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

#[test]
fn c_program_links_against_generated_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include").join("zetagaps.h");
    assert!(header.exists(), "header not generated");
    let lib = find_staticlib().expect("static library not built");
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("zetagaps_smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke program exited with {:?}",
        out.status
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.951371"));
}
