//! A corrupted extremal amplitude must be caught by the acceptance runner.

use ckn_core::verify::{run_criterion, Mode, Status, VerifyConfig};

#[test]
fn corrupted_amplitude_fails_the_identity_criteria() {
    let cfg = VerifyConfig {
        mode: Mode::Quick,
        c_ab_scale: 1.01,
    };
    assert_eq!(run_criterion(4, &cfg).status, Status::Fail);
    let clean = VerifyConfig::quick();
    assert_eq!(run_criterion(4, &clean).status, Status::Pass);
}
