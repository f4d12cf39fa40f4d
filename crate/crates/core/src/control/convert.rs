use super::{Companion, ControlCertificate, ControlError, ControlKind};
use crate::formula::FoFormula;

/// Conjunction of the ◇-free literals `s_{m-1} .. s_0` spelling `j` in binary,
/// most significant switch first.
pub fn pattern_label(switches: &[FoFormula], j: usize) -> FoFormula {
    let lits = (0..switches.len()).rev().map(|i| {
        if j >> i & 1 == 1 {
            switches[i].clone()
        } else {
            FoFormula::not(switches[i].clone())
        }
    });
    FoFormula::conjunction(lits)
}

pub fn pattern_labels(switches: &[FoFormula]) -> Vec<FoFormula> {
    (0..1usize << switches.len()).map(|j| pattern_label(switches, j)).collect()
}

/// The dial of `2^m` pattern sentences of a verified switch family.
pub fn switches_to_dial(cert: &ControlCertificate) -> Result<ControlCertificate, ControlError> {
    if !cert.is_verified() {
        return Err(ControlError::Unverified);
    }
    let ControlKind::Switches(s) = &cert.kind else {
        return Err(ControlError::WrongKind { expected: "switches" });
    };
    Ok(ControlCertificate::new(ControlKind::Dial(pattern_labels(s)), cert.base))
}

/// `s_i` is the disjunction of the dial values whose index (mod `2^m`) has
/// bit `i` set.
pub fn switch_family_from_dial(dial: &[FoFormula], m: usize) -> Result<Vec<FoFormula>, ControlError> {
    if m >= usize::BITS as usize || 1usize << m > dial.len() {
        return Err(ControlError::Bound { m, n: dial.len() });
    }
    let width = 1usize << m;
    Ok((0..m)
        .map(|i| FoFormula::disjunction(dial.iter().enumerate().filter(|(j, _)| (j % width) >> i & 1 == 1).map(|(_, d)| d.clone())))
        .collect())
}

pub fn dial_to_switches(cert: &ControlCertificate, m: usize) -> Result<ControlCertificate, ControlError> {
    if !cert.is_verified() {
        return Err(ControlError::Unverified);
    }
    let ControlKind::Dial(d) = &cert.kind else {
        return Err(ControlError::WrongKind { expected: "dial" });
    };
    Ok(ControlCertificate::new(ControlKind::Switches(switch_family_from_dial(d, m)?), cert.base))
}

/// □b.
pub fn purify(b: &FoFormula) -> FoFormula {
    FoFormula::boxed(b.clone())
}

/// A dial of `k <= n` values: the first `k - 1` values, then the negation of
/// their disjunction.
pub fn shrink_dial(dial: &[FoFormula], k: usize) -> Result<Vec<FoFormula>, ControlError> {
    if k == 0 || k > dial.len() {
        return Err(ControlError::Bound { m: k, n: dial.len() });
    }
    if k == dial.len() {
        return Ok(dial.to_vec());
    }
    if k == 1 {
        return Ok(vec![FoFormula::Top]);
    }
    let mut out = dial[..k - 1].to_vec();
    out.push(FoFormula::not(FoFormula::disjunction(dial[..k - 1].iter().cloned())));
    Ok(out)
}

/// Exactly volume `i` for the ratchet `r_1 .. r_n`.
pub fn volume_exactly(ratchet: &[FoFormula], i: usize) -> FoFormula {
    let n = ratchet.len();
    match i {
        _ if n == 0 => FoFormula::Top,
        0 => FoFormula::not(ratchet[0].clone()),
        _ if i >= n => ratchet[n - 1].clone(),
        _ => FoFormula::and(ratchet[i - 1].clone(), FoFormula::not(ratchet[i].clone())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extracted {
    pub ratchet: Vec<FoFormula>,
    pub dial: Vec<FoFormula>,
}

impl Extracted {
    /// An unverified ratchet certificate with the dial as companion.
    pub fn certificate(&self, base: usize) -> ControlCertificate {
        ControlCertificate::new(
            ControlKind::Ratchet { ratchet: self.ratchet.clone(), companion: Companion::Dial(self.dial.clone()) },
            base,
        )
    }
}

/// From a verified long ratchet `r_0 .. r_L`: `R_k = r_{mk}` for `k = 1..n`,
/// and `D_j` the disjunction of the exact volumes `v ≡ j (mod m)`.
pub fn long_ratchet_extract(cert: &ControlCertificate, n: usize, m: usize) -> Result<Extracted, ControlError> {
    if !cert.is_verified() {
        return Err(ControlError::Unverified);
    }
    let ControlKind::LongRatchet(r) = &cert.kind else {
        return Err(ControlError::WrongKind { expected: "long_ratchet" });
    };
    let top = r.len() - 1;
    if m == 0 || m * n > top {
        return Err(ControlError::Bound { m, n: top });
    }
    let ratchet = (1..=n).map(|k| r[m * k].clone()).collect();
    let exact = |v: usize| {
        if v == top {
            r[v].clone()
        } else if v == 0 && r[0] == FoFormula::Top {
            FoFormula::not(r[1].clone())
        } else {
            FoFormula::and(r[v].clone(), FoFormula::not(r[v + 1].clone()))
        }
    };
    let dial = if m == 1 {
        vec![FoFormula::Top]
    } else {
        (0..m).map(|j| FoFormula::disjunction((j..=top).step_by(m).map(exact))).collect()
    };
    Ok(Extracted { ratchet, dial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_fo, Signature};

    fn sig() -> Signature {
        Signature::new([("a", 1), ("b", 1), ("c", 1)]).unwrap()
    }

    fn f(s: &str) -> FoFormula {
        parse_fo(s, &sig()).unwrap()
    }

    #[test]
    fn labels_are_msb_first() {
        let s = [f("exists x . a(x)"), f("exists x . b(x)")];
        let labels: Vec<String> = pattern_labels(&s).iter().map(|l| l.to_string()).collect();
        assert_eq!(labels[0], "(~ exists x . b(x)) & ~ exists x . a(x)");
        assert_eq!(labels[1], "(~ exists x . b(x)) & exists x . a(x)");
        assert_eq!(labels[3], "(exists x . b(x)) & exists x . a(x)");
    }

    #[test]
    fn shrink_keeps_prefix() {
        let d = [f("exists x . a(x)"), f("exists x . b(x)"), f("exists x . c(x)")];
        let s = shrink_dial(&d, 2).unwrap();
        assert_eq!(s[0], d[0]);
        assert_eq!(s[1], FoFormula::not(d[0].clone()));
        assert_eq!(shrink_dial(&d, 1).unwrap(), vec![FoFormula::Top]);
        assert!(shrink_dial(&d, 4).is_err());
    }

    #[test]
    fn dial_to_switch_bits() {
        let d = [f("exists x . a(x)"), f("exists x . b(x)"), f("exists x . c(x)"), f("forall x . a(x)")];
        let s = switch_family_from_dial(&d, 2).unwrap();
        assert_eq!(s[0], FoFormula::or(d[1].clone(), d[3].clone()));
        assert_eq!(s[1], FoFormula::or(d[2].clone(), d[3].clone()));
        assert!(switch_family_from_dial(&d, 3).is_err());
    }

    #[test]
    fn unverified_inputs_rejected() {
        let c = ControlCertificate::new(ControlKind::Switches(vec![f("exists x . a(x)")]), 0);
        assert_eq!(switches_to_dial(&c), Err(ControlError::Unverified));
    }
}
