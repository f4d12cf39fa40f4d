use std::collections::BTreeMap;
use std::time::Instant;

use potentia::control::{Checker, Companion, ControlCertificate, ControlKind, Rounds};
use potentia::formula::{parse_fo, FoFormula, Signature};
use potentia::potentialist::{check_translation, eval_fo, Evaluator};
use potentia::settheory::{
    build_rank_system, build_transitive_system, build_v, describe_set, height_dial, ordinal_count_at_least, rank_ratchet,
    transitive_buttons, v_size, HFSet, DEFAULT_MAX_WORLDS,
};

fn f(s: &str) -> FoFormula {
    parse_fo(s, &Signature::membership()).unwrap()
}

fn holds(sys: &potentia::potentialist::PotentialistSystem, w: usize, s: &str) -> bool {
    eval_fo(sys, w, &f(s), &BTreeMap::new()).unwrap()
}

/// Codes of the von Neumann ordinals below |V_n|: code(a+1) = code(a) + 2^code(a).
fn ordinal_codes(n: usize) -> Vec<u64> {
    let mut out = vec![];
    let mut a = 0u64;
    while a < v_size(n) {
        out.push(a);
        if a >= 63 {
            break;
        }
        a += 1 << a;
    }
    out
}

#[test]
fn rank_examples() {
    let s = build_rank_system(3).unwrap();
    assert!(!holds(&s, 0, "exists x . forall y . ~ mem(y, x)"));
    assert!(holds(&s, 1, "exists x . forall y . ~ mem(y, x)"));
    assert!(holds(&s, 1, "<> exists x . mem(#0, x)"));
    assert!(!holds(&s, 1, "exists x . mem(#0, x)"));
    assert!(check_translation(&s, &f("exists x . forall y . ~ mem(y, x)")).unwrap());
    assert!(check_translation(&s, &f("forall x . exists y . mem(x, y)")).unwrap());
}

#[test]
fn ordinal_counts_match_construction() {
    let s = build_rank_system(4).unwrap();
    let mut ev = Evaluator::new(&s);
    for n in 0..=4 {
        let count = ordinal_codes(n).len();
        assert_eq!(count, n);
        for k in 0..=6 {
            assert_eq!(ev.holds(&ordinal_count_at_least(k), n).unwrap(), count >= k, "V_{n}, k={k}");
        }
    }
}

#[test]
fn rank_five_builds_and_counts() {
    let t = Instant::now();
    let s = build_rank_system(5).unwrap();
    assert_eq!(s.domain(5).len(), 65536);
    let mut ev = Evaluator::new(&s);
    assert!(ev.holds(&ordinal_count_at_least(5), 5).unwrap());
    assert!(!ev.holds(&ordinal_count_at_least(6), 5).unwrap());
    assert!(t.elapsed().as_secs() < 60);
}

#[test]
fn height_dials() {
    let s = build_rank_system(4).unwrap();
    let mut c = Checker::new(&s, Rounds::default());
    assert!(c.verify_dial(0, &height_dial(2, 4).unwrap()).unwrap());
    assert!(c.verify_dial(0, &height_dial(1, 4).unwrap()).unwrap());
    assert!(c.verify_dial(0, &height_dial(4, 4).unwrap()).unwrap());
    assert!(c.verify_dial(0, &height_dial(5, 4).unwrap()).unwrap());
    assert!(!c.verify_dial(0, &height_dial(6, 4).unwrap()).unwrap());
    // m = 3 on V_0..V_3: fine one round deep, not two
    let s3 = build_rank_system(3).unwrap();
    let d = height_dial(3, 3).unwrap();
    assert!(Checker::new(&s3, Rounds::Bounded(1)).verify_dial(0, &d).unwrap());
    assert!(!Checker::new(&s3, Rounds::Bounded(2)).verify_dial(0, &d).unwrap());
    assert!(Checker::new(&s, Rounds::Bounded(2)).verify_dial(0, &height_dial(2, 4).unwrap()).unwrap());
}

#[test]
fn described_sets_exist_exactly_where_present() {
    let s = build_transitive_system(3, DEFAULT_MAX_WORLDS).unwrap();
    let mut ev = Evaluator::new(&s);
    for h in build_v(3).unwrap() {
        let code = h.code().unwrap() as u32;
        for w in 0..s.world_count() {
            assert_eq!(ev.holds(&describe_set(&h), w).unwrap(), s.domain(w).contains(&code), "{h} at {}", s.world_id(w));
        }
    }
    let empty: HFSet = "{}".parse().unwrap();
    assert_eq!(describe_set(&empty).to_string(), "exists x0 . forall x1 . ~ mem(x1, x0)");
}

#[test]
fn transitive_buttons_are_independent() {
    let s = build_transitive_system(3, DEFAULT_MAX_WORLDS).unwrap();
    let (buttons, companion) = transitive_buttons(2, 3).unwrap();
    let mut c = Checker::new(&s, Rounds::default());
    for b in &buttons {
        assert!(c.verify_pure_button(0, b).unwrap());
        assert!(!c.pushed(0, b).unwrap());
    }
    assert!(c.verify_independent_buttons(0, &buttons, &companion).unwrap());
    let mut cert = ControlCertificate::new(ControlKind::Buttons { buttons: buttons.clone(), companion }, 0);
    assert!(cert.verify(&s, Rounds::Unbounded).unwrap());
    assert!(transitive_buttons(3, 3).is_err());
    // a button pushed at the base is no use
    let pushed = [describe_set(&HFSet::empty())];
    let at_bottom = s.world_index("T{0}").unwrap();
    assert!(!c.verify_independent_buttons(at_bottom, &[pushed[0].clone(), buttons[0].clone()], &Companion::Dial(vec![FoFormula::Top])).unwrap());
}

#[test]
fn ratchets_from_ordinal_counts() {
    let s = build_rank_system(5).unwrap();
    let ex = rank_ratchet(&s, 2, 2).unwrap();
    assert_eq!(ex.ratchet, vec![ordinal_count_at_least(2), ordinal_count_at_least(4)]);
    assert_eq!(ex.dial.len(), 2);
    let mut cert = ex.certificate(0);
    assert!(cert.verify(&s, Rounds::default()).unwrap());
    assert!(rank_ratchet(&s, 2, 3).is_err());

    let s4 = build_rank_system(4).unwrap();
    let ex = rank_ratchet(&s4, 1, 1).unwrap();
    assert_eq!(ex.dial, vec![FoFormula::Top]);
    assert!(ex.certificate(0).verify(&s4, Rounds::default()).unwrap());
    let ex = rank_ratchet(&s4, 1, 2).unwrap();
    assert!(ex.certificate(0).verify(&s4, Rounds::default()).unwrap());
}
