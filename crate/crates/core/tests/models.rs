use plectic_core::actions::perturb;
use plectic_core::config::load_model;
use plectic_core::harness::{chi_dependence, orbits, pi0_checks, verify, GroupChoice, Report, Status, Suite};

fn sizes(r: &Report, group: &str) -> Vec<u64> {
    r.data[group]["sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect()
}

#[test]
fn sextic_galois_and_plectic_orbits() {
    let m = load_model("sextic").unwrap();
    let r = orbits(&m, &[GroupChoice::Galois, GroupChoice::Plectic]);
    assert!(r.passed());
    assert_eq!(sizes(&r, "galois"), [6, 2]);
    assert_eq!(sizes(&r, "plectic"), [8]);
    let reps: Vec<&serde_json::Value> =
        r.data["galois"]["orbits"].as_array().unwrap().iter().map(|o| &o["representative"]).collect();
    assert_eq!(reps[0], &serde_json::json!(["g0", "g1", "g2"]));
    assert_eq!(reps[1], &serde_json::json!(["g0", "g2", "g4"]));
}

#[test]
fn zeta15_orbits() {
    let m = load_model("zeta15").unwrap();
    let r = orbits(&m, &[GroupChoice::Galois, GroupChoice::Plectic]);
    assert_eq!(sizes(&r, "plectic"), [4]);
    assert_eq!(sizes(&r, "galois"), [4]);
}

#[test]
fn skipped_checks_carry_flags() {
    let m = load_model("zeta15").unwrap();
    let r = verify(&m, &Suite::ALL);
    assert!(r.passed());
    let skipped: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Skipped).collect();
    assert!(!skipped.is_empty());
    for c in &skipped {
        assert!(c.reason.is_some(), "{} has no reason", c.name);
    }
    let tan = r.check("Taniyama element exists and is unique").unwrap();
    assert_eq!(tan.flag.as_deref(), Some("top_cartesian"));
    assert_eq!(tan.checked, 0);
}

#[test]
fn synthetic_models_verify_cleanly() {
    for id in ["zeta15-synthetic", "sextic-synthetic"] {
        let m = load_model(id).unwrap();
        let r = verify(&m, &Suite::ALL);
        let failed: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Fail).map(|c| &c.name).collect();
        assert!(failed.is_empty(), "{id}: {failed:?}");
        assert_eq!(r.check("Taniyama element exists and is unique").unwrap().status, Status::Pass);
    }
}

#[test]
fn reports_are_deterministic() {
    let m = load_model("zeta15-wide").unwrap();
    let strip = |mut r: Report| {
        r.timing_ms = 0;
        serde_json::to_string(&r).unwrap()
    };
    let a = strip(verify(&m, &[Suite::Taniyama, Suite::Pi0]));
    let b = strip(verify(&m, &[Suite::Taniyama, Suite::Pi0]));
    assert_eq!(a, b);
}

#[test]
fn corrupted_mu_is_reported() {
    let m = load_model("zeta15-synthetic").unwrap();
    let recip = m.recip.as_ref().unwrap();
    let split = recip.canonical_splitting().unwrap();
    let t = m.torus("full").unwrap();
    let bad = t.from_parts_unchecked(t.quot().clone(), perturb(t.mu()).unwrap(), t.iota_q().clone());
    let checks = pi0_checks(recip, &split, &bad);
    let contract = checks.iter().find(|c| c.name.contains("contract")).unwrap();
    assert_eq!(contract.status, Status::Fail);
    assert!(!contract.counterexamples.is_empty());
    let embed = checks.iter().find(|c| c.name.contains("embeds")).unwrap();
    assert_eq!(embed.status, Status::Fail);
}

#[test]
fn splitting_dependence_on_wide_model() {
    let m = load_model("zeta15-wide").unwrap();
    let r = chi_dependence(&m).unwrap();
    assert!(r.passed());
    assert_eq!(r.data["splittings"], 2);
    assert_eq!(r.data["taniyama_varies"], true);
    let per = r.data["per_splitting"].as_array().unwrap();
    assert_eq!(per.iter().filter(|s| s["canonical"] == true).count(), 1);
    assert_eq!(per.iter().filter(|s| s["sign_compatible"] == true).count(), 1);
}
