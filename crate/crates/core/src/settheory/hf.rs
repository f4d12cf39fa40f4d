use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// A hereditarily finite set; children are kept sorted ascending in
/// Ackermann order and duplicate-free, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HFSet(Arc<[HFSet]>);

impl HFSet {
    pub fn empty() -> Self {
        HFSet(Arc::from(Vec::new()))
    }

    pub fn new(mut children: Vec<HFSet>) -> Self {
        children.sort();
        children.dedup();
        HFSet(Arc::from(children))
    }

    pub fn children(&self) -> &[HFSet] {
        &self.0
    }

    pub fn contains(&self, x: &HFSet) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn rank(&self) -> usize {
        self.0.iter().map(|c| c.rank() + 1).max().unwrap_or(0)
    }

    /// Σ 2^code(child), when it fits in 64 bits.
    pub fn code(&self) -> Option<u64> {
        self.0.iter().try_fold(0u64, |acc, c| {
            let k = c.code()?;
            (k < 64).then(|| acc | 1 << k)
        })
    }

    pub fn from_code(code: u64) -> Self {
        HFSet::new((0..64).filter(|i| code >> i & 1 == 1).map(HFSet::from_code).collect())
    }

    /// `{x}`.
    pub fn singleton(x: HFSet) -> Self {
        HFSet(Arc::from(vec![x]))
    }
}

impl Ord for HFSet {
    /// Ackermann order: compare the largest children first.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(y) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for HFSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad set notation at byte {0}")]
pub struct ParseSetError(pub usize);

impl FromStr for HFSet {
    type Err = ParseSetError;

    /// Brace notation, whitespace allowed: `{}`, `{{}, {{}}}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes: Vec<(usize, u8)> = s.bytes().enumerate().filter(|(_, b)| !b.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let set = parse_set(&bytes, &mut pos)?;
        match bytes.get(pos) {
            None => Ok(set),
            Some(&(i, _)) => Err(ParseSetError(i)),
        }
    }
}

fn parse_set(bytes: &[(usize, u8)], pos: &mut usize) -> Result<HFSet, ParseSetError> {
    let at = |p: usize| bytes.get(p).map_or(bytes.last().map_or(0, |l| l.0 + 1), |b| b.0);
    if bytes.get(*pos).map(|b| b.1) != Some(b'{') {
        return Err(ParseSetError(at(*pos)));
    }
    *pos += 1;
    let mut children = Vec::new();
    if bytes.get(*pos).map(|b| b.1) == Some(b'}') {
        *pos += 1;
        return Ok(HFSet::empty());
    }
    loop {
        children.push(parse_set(bytes, pos)?);
        match bytes.get(*pos).map(|b| b.1) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(HFSet::new(children));
            }
            _ => return Err(ParseSetError(at(*pos))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for c in 0..300u64 {
            assert_eq!(HFSet::from_code(c).code(), Some(c));
        }
    }

    #[test]
    fn order_matches_codes() {
        // independent oracle: the order on codes is the order on integers
        let sets: Vec<HFSet> = (0..200u64).map(HFSet::from_code).collect();
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                assert_eq!(a.cmp(b), i.cmp(&j));
            }
        }
    }

    #[test]
    fn notation() {
        assert_eq!(HFSet::from_code(0).to_string(), "{}");
        assert_eq!(HFSet::from_code(1).to_string(), "{{}}");
        assert_eq!(HFSet::from_code(3).to_string(), "{{},{{}}}");
        let parsed: HFSet = " { {{}} , {} } ".parse().unwrap();
        assert_eq!(parsed.code(), Some(3));
        assert_eq!("{{},{}}".parse::<HFSet>().unwrap().code(), Some(1));
        assert!("{{}".parse::<HFSet>().is_err());
        assert!("{}}".parse::<HFSet>().is_err());
    }

    #[test]
    fn ranks() {
        let r: Vec<usize> = [0u64, 1, 2, 3, 4, 15, 16].iter().map(|&c| HFSet::from_code(c).rank()).collect();
        assert_eq!(r, vec![0, 1, 2, 2, 3, 3, 4]);
    }
}
