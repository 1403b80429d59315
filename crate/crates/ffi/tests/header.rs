use std::path::Path;
use std::process::Command;

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bridge_inspect.h");
    assert!(header.is_file());
    let src = format!("#include \"{}\"\nint main(void) {{ return (int)BI_STATUS_OK; }}\n", header.display());
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("probe.c");
    std::fs::write(&file, src).unwrap();
    let Ok(status) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&file).status() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}
