#![no_main]
#[macro_use]
extern crate libfuzzer_sys;

use fj_cli::ExperimentPlan;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(plan) = ExperimentPlan::from_json(text) {
        let _ = plan.validate();
    }
});
