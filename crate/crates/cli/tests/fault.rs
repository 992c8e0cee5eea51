//! Build with `--features fault-injection`: the distillation formula is
//! perturbed and the fidelity suite must fail with a witness.
#![cfg(feature = "fault-injection")]

use std::process::Command;

#[test]
fn verify_catches_perturbed_distillation() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcn-assoc")).args(["verify", "--trials", "10"]).output().unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.contains("fidelity identities")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
    assert!(line.contains("D(0.25)"), "{line}");
}
