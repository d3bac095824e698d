use std::path::PathBuf;
use std::process::Command;

/// Build `tests/c/smoke.c` against the generated header and the static
/// library, then run it.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let archive = deps.join("libqgraph_ffi.a");
    assert!(archive.exists(), "missing {}", archive.display());

    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is required");
    assert!(status.success());

    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        out.status.success(),
        "{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "count 3");
    assert_eq!(lines[1], "k3 9.424777960769379 1");
    assert!(lines[2].starts_with("error index 3 out of range"));
    assert_eq!(lines[3], "modesum -0.130899693900");
    assert_eq!(lines[4], "green -0.130899693900");
    assert_eq!(lines[5], format!("version {}", env!("CARGO_PKG_VERSION")));
}
