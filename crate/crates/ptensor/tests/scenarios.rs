//! Every scenario must build, run all of its internal checks green, and
//! produce byte-identical reports on repeat runs.

use ptensor::scenarios::{run_scenario, SCENARIO_IDS};
use std::collections::BTreeMap;

fn run_default(id: &str, seed: u64) -> ptensor::scenarios::ScenarioReport {
    let report = run_scenario(id, &BTreeMap::new(), seed).unwrap_or_else(|e| {
        panic!("scenario {id} failed to run: {e}");
    });
    report
}

#[test]
fn all_scenarios_pass_their_checks() {
    for id in SCENARIO_IDS {
        let report = run_default(id, 7);
        let failing = report.failing();
        assert!(
            failing.is_empty(),
            "scenario {id} has failing checks: {:#?}",
            failing
        );
    }
}

#[test]
fn reports_are_deterministic() {
    for id in SCENARIO_IDS {
        let a = serde_json::to_string(&run_default(id, 11)).unwrap();
        let b = serde_json::to_string(&run_default(id, 11)).unwrap();
        assert_eq!(a, b, "scenario {id} report not reproducible");
    }
}

#[test]
fn seeds_change_seeded_scenarios() {
    let a = serde_json::to_string(&run_default("collision_trash_prepare", 1)).unwrap();
    let b = serde_json::to_string(&run_default("collision_trash_prepare", 2)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn unknown_scenario_is_an_error() {
    assert!(run_scenario("nope", &BTreeMap::new(), 0).is_err());
}
