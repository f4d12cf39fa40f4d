//! End-to-end checks, one line per criterion. Runs without the libtest
//! harness so the lines show up in `cargo test` output.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use potentia::artificial::pattern_chain;
use potentia::control::{dial_to_switches, switches_to_dial, ControlCertificate, ControlKind, Rounds};
use potentia::formula::{parse_prop, FoFormula, PropFormula, Signature};
use potentia::kripke::{eval_prop, frame_properties, frame_valid, Frame};
use potentia::potentialist::{
    check_translation_all, default_pool, enumerate_formulas, eval_fo, scheme_check, EnumerationLimits, PotentialistSystem, Schema, Verdict,
};
use potentia::settheory::{
    build_rank_system, build_transitive_system, describe_set, height_dial, ordinal_count_at_least, rank_ratchet, transitive_buttons, HFSet,
    DEFAULT_MAX_WORLDS,
};
use potentia::synthesis::{synthesize, SynthesisOutcome, SynthesisReport};
use potentia::theories::{axiom, corpus, decide, reverify, three_button_formula, Decision, Theory};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || format!("took {:?}, limit {:?}", start.elapsed(), limit))
}

fn ax(name: &str) -> PropFormula {
    axiom(name).unwrap()
}

/// All reflexive transitive relations on `n` labelled worlds.
fn labelled_preorders(n: usize) -> Vec<Frame> {
    let off: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    (0u64..1 << off.len())
        .filter_map(|mask| {
            let pairs = off.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p);
            let f = Frame::from_pairs(n, pairs.chain((0..n).map(|w| (w, w)))).ok()?;
            let p = frame_properties(&f);
            (p.reflexive && p.transitive).then_some(f)
        })
        .collect()
}

fn frame_validity() -> Outcome {
    let mut frames = 0;
    for n in 1..=4 {
        for f in labelled_preorders(n) {
            frames += 1;
            let p = frame_properties(&f);
            for name in ["K", "T", "4"] {
                ensure(frame_valid(&f, &ax(name)).unwrap(), || format!("{name} fails on {:?}", f.pairs()))?;
            }
            if p.convergent {
                ensure(frame_valid(&f, &ax(".2")).unwrap(), || format!(".2 fails on convergent {:?}", f.pairs()))?;
            }
            if p.linear_preorder {
                ensure(frame_valid(&f, &ax(".3")).unwrap(), || format!(".3 fails on linear {:?}", f.pairs()))?;
            }
        }
    }
    Ok(format!("{frames} labelled preorders"))
}

fn pool(extra: &[FoFormula]) -> Vec<FoFormula> {
    default_pool(&Signature::membership(), extra)
}

fn schemes_pass(sys: &PotentialistSystem, schemas: &[(&str, Schema)], pool: &[FoFormula], trials: usize) -> Result<usize, String> {
    let mut instances = 0;
    for (i, (name, schema)) in schemas.iter().enumerate() {
        let r = scheme_check(sys, schema, pool, trials, 1000 + i as u64).map_err(|e| e.to_string())?;
        ensure(r.trials >= 500 && r.failures == 0, || format!("{name}: {} failures, e.g. {:?}", r.failures, r.witnesses.first()))?;
        instances += r.instances;
    }
    Ok(instances)
}

fn scheme_validity() -> Outcome {
    let start = Instant::now();
    let extra: Vec<FoFormula> = (1..=4)
        .map(ordinal_count_at_least)
        .chain(height_dial(2, 4).unwrap())
        .chain((0..4).map(|c| describe_set(&HFSet::from_code(c))))
        .collect();
    let pool = pool(&extra);
    let s4 = |third: &'static str| {
        vec![
            ("K", Schema::Prop(ax("K"))),
            ("T", Schema::Prop(ax("T"))),
            ("4", Schema::Prop(ax("4"))),
            ("CBF", Schema::ConverseBarcan),
            (third, Schema::Prop(ax(third))),
        ]
    };
    let rank = build_rank_system(4).map_err(|e| e.to_string())?;
    let a = schemes_pass(&rank, &s4(".3"), &pool, 500)?;
    let trans = build_transitive_system(3, DEFAULT_MAX_WORLDS).map_err(|e| e.to_string())?;
    let b = schemes_pass(&trans, &s4(".2"), &pool, 500)?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} instances, 0 failures, {:.1?}", a + b, start.elapsed()))
}

fn translation() -> Outcome {
    let start = Instant::now();
    let sys = build_rank_system(3).map_err(|e| e.to_string())?;
    let limits = EnumerationLimits { max_scope: 3, max_connectives: 1, equality: true };
    let sentences = enumerate_formulas(&Signature::membership(), 0, limits);
    let distinct: BTreeSet<&FoFormula> = sentences.iter().collect();
    ensure(distinct.len() == sentences.len(), || "enumeration has duplicates".into())?;
    ensure(sentences.iter().all(|s| s.is_sentence() && !s.is_modal() && s.quantifier_depth() <= 3), || "bad sentence".into())?;
    if let Some(bad) = check_translation_all(&sys, &sentences).map_err(|e| e.to_string())? {
        return Err(format!("translation fails for {bad}"));
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{} sentences, {:.1?}", sentences.len(), start.elapsed()))
}

/// Per reachable world, the indices of the labels true somewhere above it.
fn reachable_values(sys: &PotentialistSystem, base: usize, labels: &[FoFormula]) -> Vec<BTreeSet<usize>> {
    let truth: Vec<Vec<bool>> = (0..sys.world_count())
        .map(|w| labels.iter().map(|l| eval_fo(sys, w, l, &BTreeMap::new()).unwrap()).collect())
        .collect();
    (0..sys.world_count())
        .filter(|&u| sys.frame().accesses(base, u))
        .map(|u| (0..sys.world_count()).filter(|&v| sys.frame().accesses(u, v)).flat_map(|v| (0..labels.len()).filter(|&j| truth[v][j]).collect::<Vec<_>>()).collect())
        .collect()
}

fn dial_round_trip() -> Outcome {
    let mut systems: Vec<(String, PotentialistSystem, Vec<FoFormula>)> = vec![];
    for n in [4, 5] {
        systems.push((format!("ranks V_0..V_{n}"), build_rank_system(n).unwrap(), height_dial(4, n).unwrap()));
    }
    let (chain, family) = pattern_chain(8, 2).unwrap();
    let mut sw = ControlCertificate::new(ControlKind::Switches(family), 0);
    ensure(sw.verify(&chain, Rounds::default()).unwrap(), || "chain switches do not verify".into())?;
    let ControlKind::Dial(d) = switches_to_dial(&sw).unwrap().kind else { unreachable!() };
    systems.push(("pattern chain".into(), chain, d));
    for (name, sys, dial) in &systems {
        let mut cert = ControlCertificate::new(ControlKind::Dial(dial.clone()), 0);
        ensure(cert.verify(sys, Rounds::default()).unwrap(), || format!("{name}: dial does not verify"))?;
        let mut switches = dial_to_switches(&cert, 2).map_err(|e| e.to_string())?;
        ensure(switches.verify(sys, Rounds::default()).unwrap(), || format!("{name}: switches do not verify"))?;
        let back = switches_to_dial(&switches).map_err(|e| e.to_string())?;
        let ControlKind::Dial(back) = &back.kind else { unreachable!() };
        ensure(reachable_values(sys, 0, dial) == reachable_values(sys, 0, back), || format!("{name}: reachable patterns differ"))?;
    }
    Ok(format!("{} systems", systems.len()))
}

fn refuted(o: SynthesisOutcome) -> Result<SynthesisReport, String> {
    match o {
        SynthesisOutcome::Refuted(r) => Ok(*r),
        SynthesisOutcome::NoCountermodel { bound } => Err(format!("no countermodel up to {bound}")),
    }
}

fn ratchet_on_ranks() -> Outcome {
    let start = Instant::now();
    let sys = build_rank_system(5).map_err(|e| e.to_string())?;
    let mut cert = rank_ratchet(&sys, 2, 2).map_err(|e| e.to_string())?.certificate(0);
    ensure(cert.verify(&sys, Rounds::default()).unwrap(), || "ratchet does not verify".into())?;
    let r = refuted(synthesize(&sys, &cert, &ax("5"), Theory::S43, 8).map_err(|e| e.to_string())?)?;
    ensure(r.bisimulation.holds, || format!("bisimulation fails: {:?}", r.bisimulation.mismatch))?;
    ensure(r.refutation == Verdict::Fails, || "instance of 5 holds at V_0".into())?;
    let none = synthesize(&sys, &cert, &ax(".3"), Theory::S43, 8).map_err(|e| e.to_string())?;
    ensure(none == SynthesisOutcome::NoCountermodel { bound: 8 }, || ".3 has an S4.3 countermodel".into())?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("5 refuted at V0 via {}, {:.1?}", r.simulation.countermodel.tag, start.elapsed()))
}

fn buttons_on_transitive_sets() -> Outcome {
    let sys = build_transitive_system(3, DEFAULT_MAX_WORLDS).map_err(|e| e.to_string())?;
    let (buttons, companion) = transitive_buttons(2, 3).map_err(|e| e.to_string())?;
    let mut cert = ControlCertificate::new(ControlKind::Buttons { buttons, companion }, 0);
    ensure(cert.verify(&sys, Rounds::default()).unwrap(), || "buttons do not verify".into())?;
    let r = refuted(synthesize(&sys, &cert, &ax(".3"), Theory::S42, 8).map_err(|e| e.to_string())?)?;
    let bottom = sys.world_index("T{}").unwrap();
    ensure(r.base == bottom, || "base is not the bottom world".into())?;
    ensure(!eval_fo(&sys, bottom, &r.instance, &BTreeMap::new()).unwrap(), || "instance of .3 holds at the bottom".into())?;
    let report = scheme_check(&sys, &Schema::Prop(ax(".2")), &pool(&[]), 500, 7).map_err(|e| e.to_string())?;
    ensure(report.failures == 0, || format!(".2 fails: {:?}", report.witnesses.first()))?;
    Ok(format!(".3 refuted at T{{}} via {}, .2 held on {} instances", r.simulation.countermodel.tag, report.instances))
}

fn switches_on_patterns() -> Outcome {
    let (sys, family) = pattern_chain(8, 2).unwrap();
    let mut cert = ControlCertificate::new(ControlKind::Switches(family.clone()), 0);
    ensure(cert.verify(&sys, Rounds::default()).unwrap(), || "switches do not verify".into())?;
    let patterns: BTreeSet<Vec<bool>> =
        (0..sys.world_count()).map(|w| family.iter().map(|s| eval_fo(&sys, w, s, &BTreeMap::new()).unwrap()).collect()).collect();
    ensure(sys.world_count() == 8 && patterns.len() == 4, || "expected 8 worlds over 4 patterns".into())?;
    let phi = parse_prop("<>p0 -> []p0").unwrap();
    let r = refuted(synthesize(&sys, &cert, &phi, Theory::S5, 8).map_err(|e| e.to_string())?)?;
    ensure(!eval_fo(&sys, r.base, &r.instance, &BTreeMap::new()).unwrap(), || "instance holds at the base".into())?;
    let mut theorems = 0;
    for entry in corpus().into_iter().filter(|e| e.expected_in(Theory::S5)) {
        let d = decide(&entry.formula, Theory::S5, 8).map_err(|e| e.to_string())?;
        ensure(d == Decision::Theorem { bound: 8 }, || format!("{} decided {d}", entry.name))?;
        theorems += 1;
    }
    Ok(format!("instance fails at C0; {theorems} S5 theorems at bound 8"))
}

fn separation() -> Outcome {
    use Theory::*;
    let rows: Vec<(&str, PropFormula, Vec<(Theory, bool)>)> = vec![
        ("T", ax("T"), vec![(S4, true), (S42, true), (S43, true), (S5, true)]),
        ("4", ax("4"), vec![(S4, true), (S42, true), (S43, true), (S5, true)]),
        (".2", ax(".2"), vec![(S4, false), (S42, true), (S43, true), (S5, true)]),
        (".3", ax(".3"), vec![(S42, false), (S43, true), (S5, true)]),
        ("5", ax("5"), vec![(S43, false), (S5, true)]),
        ("three-button", three_button_formula(), vec![(S42, false)]),
    ];
    let mut cells = 0;
    for (name, phi, expect) in rows {
        for (t, theorem) in expect {
            let d = decide(&phi, t, 8).map_err(|e| e.to_string())?;
            ensure(d.is_theorem() == theorem, || format!("{name} in {t}: {d}"))?;
            if let Decision::Nontheorem(cm) = &d {
                let ok = reverify(&phi, t, cm).unwrap() && !eval_prop(&cm.model, cm.world, &phi).unwrap();
                ensure(ok, || format!("{name} in {t}: countermodel fails re-verification"))?;
            }
            cells += 1;
        }
    }
    Ok(format!("{cells} cells"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("frame validity up to 4 worlds", frame_validity),
        ("scheme checks on ranks and transitive sets", scheme_validity),
        ("translation on V_0..V_3", translation),
        ("dial/switch round trip", dial_round_trip),
        ("ratchet on V_0..V_5", ratchet_on_ranks),
        ("buttons on transitive sets", buttons_on_transitive_sets),
        ("switches on an 8-world pattern chain", switches_on_patterns),
        ("separation table at bound 8", separation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
