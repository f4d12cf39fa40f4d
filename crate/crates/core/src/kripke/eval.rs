use std::collections::{BTreeSet, HashMap};

use super::{Frame, KripkeError, KripkeModel};
use crate::formula::PropFormula;

pub fn eval_prop(m: &KripkeModel, w: usize, phi: &PropFormula) -> Result<bool, KripkeError> {
    m.frame.check_world(w)?;
    Ok(eval(m, w, phi))
}

fn eval(m: &KripkeModel, w: usize, phi: &PropFormula) -> bool {
    use PropFormula as P;
    match phi {
        P::Var(i) => m.holds(w, *i),
        P::Top => true,
        P::Bot => false,
        P::Not(p) => !eval(m, w, p),
        P::And(p, q) => eval(m, w, p) && eval(m, w, q),
        P::Or(p, q) => eval(m, w, p) || eval(m, w, q),
        P::Implies(p, q) => !eval(m, w, p) || eval(m, w, q),
        P::Iff(p, q) => eval(m, w, p) == eval(m, w, q),
        P::Diamond(p) => m.frame.successors(w).any(|u| eval(m, u, p)),
        P::Box(p) => m.frame.successors(w).all(|u| eval(m, u, p)),
    }
}

/// A valuation and world at which a formula is false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub model: KripkeModel,
    pub world: usize,
}

enum Op {
    Var(usize),
    Top,
    Bot,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Diamond(usize),
    Box(usize),
}

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// The least failing (valuation, world) of `phi` on `f`, if any.
///
/// Valuations restricted to the variables of `phi` are numbered with bit
/// `slot * n + w` set iff the `slot`-th smallest variable holds at `w`, and
/// are scanned 64 at a time.
pub fn first_failure(f: &Frame, phi: &PropFormula) -> Result<Option<Failure>, KripkeError> {
    let n = f.len();
    let vars: Vec<u32> = phi.variables().into_iter().collect();
    let bits = vars.len() * n;
    if bits > 40 {
        return Err(KripkeError::TooLarge(bits));
    }
    let subs = phi.subformulas();
    let index: HashMap<&PropFormula, usize> = subs.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let ops: Vec<Op> = subs
        .iter()
        .map(|s| {
            use PropFormula as P;
            match s {
                P::Var(v) => Op::Var(vars.binary_search(v).unwrap()),
                P::Top => Op::Top,
                P::Bot => Op::Bot,
                P::Not(p) => Op::Not(index[&**p]),
                P::And(p, q) => Op::And(index[&**p], index[&**q]),
                P::Or(p, q) => Op::Or(index[&**p], index[&**q]),
                P::Implies(p, q) => Op::Implies(index[&**p], index[&**q]),
                P::Iff(p, q) => Op::Iff(index[&**p], index[&**q]),
                P::Diamond(p) => Op::Diamond(index[&**p]),
                P::Box(p) => Op::Box(index[&**p]),
            }
        })
        .collect();
    let succ: Vec<Vec<usize>> = (0..n).map(|w| f.successors(w).collect()).collect();
    let (blocks, lane_mask) = if bits >= 6 {
        (1u64 << (bits - 6), u64::MAX)
    } else {
        (1u64, (1u64 << (1u64 << bits)) - 1)
    };
    let mut vals = vec![0u64; ops.len() * n];
    let root = ops.len() - 1;
    for block in 0..blocks {
        let base = block << 6;
        for (i, op) in ops.iter().enumerate() {
            for w in 0..n {
                let v = match *op {
                    Op::Var(slot) => {
                        let b = slot * n + w;
                        if b < 6 {
                            LANE_PATTERNS[b]
                        } else if (base >> b) & 1 == 1 {
                            u64::MAX
                        } else {
                            0
                        }
                    }
                    Op::Top => u64::MAX,
                    Op::Bot => 0,
                    Op::Not(p) => !vals[p * n + w],
                    Op::And(p, q) => vals[p * n + w] & vals[q * n + w],
                    Op::Or(p, q) => vals[p * n + w] | vals[q * n + w],
                    Op::Implies(p, q) => !vals[p * n + w] | vals[q * n + w],
                    Op::Iff(p, q) => !(vals[p * n + w] ^ vals[q * n + w]),
                    Op::Diamond(p) => succ[w].iter().fold(0, |acc, &u| acc | vals[p * n + u]),
                    Op::Box(p) => succ[w].iter().fold(u64::MAX, |acc, &u| acc & vals[p * n + u]),
                };
                vals[i * n + w] = v;
            }
        }
        let fails: Vec<u64> = (0..n).map(|w| !vals[root * n + w] & lane_mask).collect();
        let Some(lane) = fails.iter().filter(|&&m| m != 0).map(|m| m.trailing_zeros()).min() else {
            continue;
        };
        let world = (0..n).find(|&w| (fails[w] >> lane) & 1 == 1).unwrap();
        let code = base | lane as u64;
        let valuation = (0..n)
            .map(|w| {
                vars.iter()
                    .enumerate()
                    .filter(|(slot, _)| (code >> (slot * n + w)) & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect::<BTreeSet<u32>>()
            })
            .collect();
        let var_count = vars.last().map_or(0, |v| v + 1);
        let model = KripkeModel::new(f.clone(), var_count, valuation)?;
        return Ok(Some(Failure { model, world }));
    }
    Ok(None)
}

/// True iff `phi` holds at every world under every valuation.
pub fn frame_valid(f: &Frame, phi: &PropFormula) -> Result<bool, KripkeError> {
    Ok(first_failure(f, phi)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_prop;

    fn p(s: &str) -> PropFormula {
        parse_prop(s).unwrap()
    }

    fn chain2() -> Frame {
        Frame::preorder_closure(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn two_world_chain() {
        let m = KripkeModel::new(chain2(), 1, vec![BTreeSet::new(), BTreeSet::from([0])]).unwrap();
        assert!(eval_prop(&m, 0, &p("<>p0")).unwrap());
        assert!(!eval_prop(&m, 0, &p("[]p0")).unwrap());
        assert!(eval_prop(&m, 1, &p("true")).unwrap());
        assert!(eval_prop(&m, 2, &p("true")).is_err());
    }

    #[test]
    fn reflexivity_validates_t() {
        let f = Frame::preorder_closure(3, [(0, 1), (0, 2)]).unwrap();
        assert!(frame_valid(&f, &p("[]p0 -> p0")).unwrap());
        assert!(frame_valid(&f, &p("[]p0 -> [][]p0")).unwrap());
    }

    #[test]
    fn fork_refutes_dot2() {
        let f = Frame::preorder_closure(3, [(0, 1), (0, 2)]).unwrap();
        let dot2 = p("<>[]p0 -> []<>p0");
        let fail = first_failure(&f, &dot2).unwrap().unwrap();
        assert!(!eval_prop(&fail.model, fail.world, &dot2).unwrap());
        // least valuation: p0 true only at w1, failing at the root
        assert_eq!(fail.world, 0);
        assert_eq!(fail.model.valuation, vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::new()]);
    }

    #[test]
    fn non_reflexive_refutes_t() {
        let f = Frame::from_pairs(2, [(0, 1)]).unwrap();
        assert!(!frame_valid(&f, &p("[]p0 -> p0")).unwrap());
    }

    #[test]
    fn batch_matches_naive_across_lane_boundary() {
        // 3 vars x 3 worlds = 9 bits: several blocks
        let f = Frame::preorder_closure(3, [(0, 1), (1, 2)]).unwrap();
        let phi = p("(<>p0 & <>p1) -> <>((p0 & <>p1) | (p1 & <>p0)) & ~ (p2 & [] ~ p2)");
        let fast = first_failure(&f, &phi).unwrap().map(|x| (x.model.valuation, x.world));
        let mut slow = None;
        'outer: for code in 0u32..(1 << 9) {
            let valuation: Vec<BTreeSet<u32>> = (0..3)
                .map(|w| (0..3).filter(|s| (code >> (s * 3 + w)) & 1 == 1).collect())
                .collect();
            let m = KripkeModel::new(f.clone(), 3, valuation.clone()).unwrap();
            for w in 0..3 {
                if !eval_prop(&m, w, &phi).unwrap() {
                    slow = Some((valuation, w));
                    break 'outer;
                }
            }
        }
        assert_eq!(fast, slow);
    }
}
