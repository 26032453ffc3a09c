//! Compile a C program against the generated header and link it to the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "bse_doubling.h"

int main(void) {
    double a = 2.0, b = 1.0;
    BseProblem *p = NULL;
    BseSolution *s = NULL;
    if (bse_problem_new(1, &a, NULL, &b, NULL, &p) != BSE_STATUS_OK) return 10;
    BseSolverConfig cfg = bse_solver_config_default();
    cfg.remedy = BSE_REMEDY_DCT_FIRST;
    if (bse_solve(p, &cfg, &s) != BSE_STATUS_OK) return 11;
    double re[2], im[2];
    if (bse_solution_eigenvalues(s, re, im, 2) != BSE_STATUS_OK) return 12;
    if (fabs(re[0] + sqrt(3.0)) > 1e-12 || fabs(re[1] - sqrt(3.0)) > 1e-12) return 13;
    if (bse_solution_eigenvalues(s, re, im, 1) != BSE_STATUS_BUFFER_TOO_SMALL) return 14;
    if (bse_last_error_message() == NULL) return 15;
    printf("%s %u\n", bse_version(), bse_solution_iterations(s));
    bse_solution_free(s);
    bse_problem_free(p);
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

/// `target/<profile>`, the parent of the test binary's `deps` directory.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(syntax.status.success(), "{}", String::from_utf8_lossy(&syntax.stderr));

    let lib = profile_dir().join("libbse_doubling_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link step", lib.display());
        return;
    }
    let exe = dir.path().join("main");
    let link = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(link.status.success(), "{}", String::from_utf8_lossy(&link.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
}
