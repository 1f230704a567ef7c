//! Compile and run a small C client against the generated header and the
//! static library. Skipped when no C compiler is on the path.

use std::path::PathBuf;
use std::process::Command;

const C_SOURCE: &str = r#"
#include "einflow.h"
#include <stdio.h>
#include <math.h>

int main(void) {
    EfModel *model = NULL;
    if (ef_model_new(1, false, &model) != EF_STATUS_OK) return 1;

    double p0[6] = {1.0/3.0, 1.0/3.0, 0.0, M_SQRT2, M_SQRT2/3.0, 0.0};
    double v[6];
    if (ef_vector_field(model, p0, v) != EF_STATUS_OK) return 2;
    for (int i = 0; i < 6; i++) {
        if (fabs(v[i]) > 1e-14) return 3;
    }

    double s[3] = {1.0, 0.0, 0.0};
    EfTrajectory *traj = NULL;
    if (ef_shoot(model, 0, s, 1e-6, 150.0, 1e-10, &traj) != EF_STATUS_OK) return 4;
    EfTermination kind;
    double eta, y1;
    char name[32];
    ef_trajectory_termination(traj, &kind, &eta, &y1, name, sizeof name);
    if (kind != EF_TERMINATION_CONVERGED) return 5;
    printf("limit %s at eta %.3f\n", name, eta);

    ef_trajectory_free(traj);
    ef_model_free(model);
    return 0;
}
"#;

#[test]
fn c_client_links_and_runs() {
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok());
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping");
        return;
    };

    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    // the staticlib is built alongside the test profile
    let mut lib_dir = PathBuf::from(std::env::var("OUT_DIR").unwrap_or_default());
    // OUT_DIR = target/<profile>/build/<crate>-<hash>/out
    for _ in 0..3 {
        lib_dir.pop();
    }
    let lib = lib_dir.join("libeinflow_ffi.a");
    if !lib.exists() {
        eprintln!("staticlib not found at {}; skipping", lib.display());
        return;
    }

    let dir = std::env::temp_dir().join(format!("einflow-c-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_SOURCE).unwrap();

    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("compiler invocation");
    assert!(status.success(), "C client failed to compile/link");

    let out = Command::new(&bin).output().expect("run the C client");
    assert!(
        out.status.success(),
        "C client exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PAC2"), "unexpected output: {stdout}");
    let _ = std::fs::remove_dir_all(&dir);
}
