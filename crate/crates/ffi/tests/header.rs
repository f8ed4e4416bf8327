use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/pedfuse.h");

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(HEADER).unwrap();
    for sym in [
        "pedfuse_model_new",
        "pedfuse_model_load",
        "pedfuse_model_save",
        "pedfuse_model_free",
        "pedfuse_model_param_count",
        "pedfuse_model_forecast",
        "pedfuse_rmse",
        "pedfuse_looking_flag",
        "pedfuse_last_error_message",
        "pedfuse_version",
        "typedef struct PedfuseModel PedfuseModel;",
        "PEDFUSE_STATUS_PANIC = 6",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"pedfuse.h\"\n\
         int main(void) {\n\
           PedfuseModel *m = 0;\n\
           enum PedfuseStatus s = pedfuse_model_new(8, 8, 1, 1, 0, &m);\n\
           pedfuse_model_free(m);\n\
           return s == PEDFUSE_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let Ok(out) = Command::new(compiler)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(include)
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
