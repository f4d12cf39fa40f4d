use std::collections::BTreeMap;

use potentia::artificial::pattern_chain;
use potentia::control::{Companion, ControlCertificate, ControlKind, Rounds};
use potentia::formula::{parse_prop, FoFormula};
use potentia::kripke::eval_prop;
use potentia::potentialist::{eval_fo, Verdict};
use potentia::settheory::{build_rank_system, build_transitive_system, ordinal_count_at_least, rank_ratchet, transitive_buttons, DEFAULT_MAX_WORLDS};
use potentia::synthesis::{synthesize, SynthesisError, SynthesisOutcome, SynthesisReport};
use potentia::theories::{axiom, Theory};

fn refuted(outcome: SynthesisOutcome) -> SynthesisReport {
    match outcome {
        SynthesisOutcome::Refuted(r) => *r,
        SynthesisOutcome::NoCountermodel { bound } => panic!("no countermodel up to {bound}"),
    }
}

#[test]
fn ratchet_refutes_five_on_ranks() {
    let sys = build_rank_system(5).unwrap();
    let mut cert = rank_ratchet(&sys, 2, 2).unwrap().certificate(0);
    assert!(cert.verify(&sys, Rounds::default()).unwrap());
    let five = axiom("5").unwrap();
    let r = refuted(synthesize(&sys, &cert, &five, Theory::S43, 8).unwrap());
    assert!(r.bisimulation.holds, "{:?}", r.bisimulation.mismatch);
    assert_eq!(r.refutation, Verdict::Fails);
    assert!(!eval_fo(&sys, 0, &r.instance, &BTreeMap::new()).unwrap());
    assert_eq!(r.simulation.countermodel.tag, "linear(2,1)");
    // σ(p0) is "the volume is 1": at least two ordinals
    assert_eq!(r.simulation.sigma.get(0), Some(&ordinal_count_at_least(2)));
    let three = axiom(".3").unwrap();
    assert_eq!(synthesize(&sys, &cert, &three, Theory::S43, 8).unwrap(), SynthesisOutcome::NoCountermodel { bound: 8 });
}

#[test]
fn buttons_refute_three_on_transitive_sets() {
    let sys = build_transitive_system(3, DEFAULT_MAX_WORLDS).unwrap();
    let (buttons, companion) = transitive_buttons(2, 3).unwrap();
    let mut cert = ControlCertificate::new(ControlKind::Buttons { buttons, companion }, 0);
    assert!(cert.verify(&sys, Rounds::default()).unwrap());
    let three = axiom(".3").unwrap();
    let r = refuted(synthesize(&sys, &cert, &three, Theory::S42, 8).unwrap());
    assert_eq!(sys.world_id(r.base), "T{}");
    assert_eq!(r.refutation, Verdict::Fails);
    assert!(!eval_fo(&sys, r.base, &r.instance, &BTreeMap::new()).unwrap());
    assert!(r.bisimulation.holds, "{:?}", r.bisimulation.mismatch);
    let cm = &r.simulation.countermodel;
    assert!(!eval_prop(&cm.model, cm.world, &three).unwrap());
}

#[test]
fn switches_refute_diamond_to_box() {
    let (sys, family) = pattern_chain(8, 2).unwrap();
    let mut cert = ControlCertificate::new(ControlKind::Switches(family), 0);
    assert!(cert.verify(&sys, Rounds::default()).unwrap());
    let phi = parse_prop("<>p0 -> []p0").unwrap();
    let r = refuted(synthesize(&sys, &cert, &phi, Theory::S5, 8).unwrap());
    assert_eq!(r.refutation, Verdict::Fails);
    assert!(!eval_fo(&sys, 0, &r.instance, &BTreeMap::new()).unwrap());
    // one switch suffices for two worlds
    assert_eq!(r.simulation.labels.len(), 2);
    // the top world of a finite chain cannot reach both settings
    assert!(!r.bisimulation.holds);
    assert!(r.bisimulation.holds_where_needed);
}

#[test]
fn s5_with_a_dial() {
    let (sys, family) = pattern_chain(8, 2).unwrap();
    let mut sw = ControlCertificate::new(ControlKind::Switches(family), 0);
    assert!(sw.verify(&sys, Rounds::default()).unwrap());
    let mut dial = potentia::control::switches_to_dial(&sw).unwrap();
    assert!(dial.verify(&sys, Rounds::default()).unwrap());
    let phi = parse_prop("<>p0 & <>p1 -> <>(p0 & p1)").unwrap();
    let r = refuted(synthesize(&sys, &dial, &phi, Theory::S5, 8).unwrap());
    assert_eq!(r.refutation, Verdict::Fails);
    assert_eq!(r.simulation.labels.len(), 2);
}

#[test]
fn rejects_bad_certificates() {
    let (sys, family) = pattern_chain(8, 2).unwrap();
    let phi = parse_prop("<>p0 -> []p0").unwrap();
    let cert = ControlCertificate::new(ControlKind::Switches(family.clone()), 0);
    assert_eq!(synthesize(&sys, &cert, &phi, Theory::S5, 8), Err(SynthesisError::Unverified));
    let mut cert = cert;
    assert!(cert.verify(&sys, Rounds::default()).unwrap());
    assert!(matches!(synthesize(&sys, &cert, &phi, Theory::S43, 8), Err(SynthesisError::WrongCertificate { .. })));
    // a three-world cluster needs two switches
    let mut one = ControlCertificate::new(ControlKind::Switches(family[..1].to_vec()), 0);
    assert!(one.verify(&sys, Rounds::default()).unwrap());
    let wide = parse_prop("<>p0 & <>p1 & <>~(p0 | p1) -> <>(p0 & p1)").unwrap();
    assert!(matches!(
        synthesize(&sys, &one, &wide, Theory::S5, 8),
        Err(SynthesisError::TooFewControls { what: "switches", .. })
    ));
}

#[test]
fn impure_buttons_are_refused() {
    let sys = build_rank_system(3).unwrap();
    // true at V_0, false at V_1, true from V_2 on: a button, but not pure
    let b = FoFormula::or(ordinal_count_at_least(2), FoFormula::not(ordinal_count_at_least(1)));
    let mut cert = ControlCertificate::new(ControlKind::Buttons { buttons: vec![b], companion: Companion::Dial(vec![FoFormula::Top]) }, 0);
    assert!(cert.verify(&sys, Rounds::default()).unwrap());
    let three = axiom(".3").unwrap();
    let five = axiom("5").unwrap();
    assert!(matches!(synthesize(&sys, &cert, &five, Theory::S42, 8), Err(SynthesisError::NotPure(0))));
    assert!(matches!(synthesize(&sys, &cert, &three, Theory::S42, 8), Err(SynthesisError::TooFewControls { .. })));
}
