use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Frame, KripkeError};

/// The canonical frame shapes of the complete frame classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameClass {
    /// `n` worlds, all accessing all.
    Complete(usize),
    /// `clusters` clusters of `size` worlds in a chain; world `i * size + j` is `w^i_j`.
    Linear { clusters: usize, size: usize },
    /// Clusters indexed by subsets `a` of `atoms`; world `a * size + j` is `w^a_j`.
    PreBoolean { atoms: usize, size: usize },
}

impl FrameClass {
    pub fn world_count(&self) -> usize {
        match *self {
            FrameClass::Complete(n) => n,
            FrameClass::Linear { clusters, size } => clusters * size,
            FrameClass::PreBoolean { atoms, size } => (1usize << atoms) * size,
        }
    }

    pub fn tag(&self) -> String {
        match *self {
            FrameClass::Complete(n) => format!("complete({n})"),
            FrameClass::Linear { clusters, size } => format!("linear({clusters},{size})"),
            FrameClass::PreBoolean { atoms, size } => format!("preboolean({atoms},{size})"),
        }
    }
}

pub fn generate_frame(class: FrameClass) -> Result<Frame, KripkeError> {
    let mut f = match class {
        FrameClass::Complete(0)
        | FrameClass::Linear { clusters: 0, .. }
        | FrameClass::Linear { size: 0, .. }
        | FrameClass::PreBoolean { size: 0, .. } => return Err(KripkeError::ZeroSize),
        _ => Frame::new(class.world_count())?,
    };
    let n = f.len();
    let key = |w: usize| -> usize {
        match class {
            FrameClass::Complete(_) => 0,
            FrameClass::Linear { size, .. } | FrameClass::PreBoolean { size, .. } => w / size,
        }
    };
    for a in 0..n {
        for b in 0..n {
            let (ka, kb) = (key(a), key(b));
            let sees = match class {
                FrameClass::Complete(_) => true,
                FrameClass::Linear { .. } => ka <= kb,
                FrameClass::PreBoolean { .. } => ka & !kb == 0,
            };
            f.set(a, b, sees);
        }
    }
    Ok(f)
}

fn code(rel: &[Vec<bool>], perm: &[usize]) -> u64 {
    let n = rel.len();
    let mut c = 0u64;
    for a in 0..n {
        for b in 0..n {
            c = (c << 1) | rel[perm[a]][perm[b]] as u64;
        }
    }
    c
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn transitive(rel: &[Vec<bool>]) -> bool {
    let n = rel.len();
    (0..n).all(|a| (0..n).all(|b| !rel[a][b] || (0..n).all(|c| !rel[b][c] || rel[a][c])))
}

/// All preorders on `n` worlds up to isomorphism, each in its canonical
/// (lexicographically greatest adjacency code) labelling, in ascending code order.
pub fn preorders(n: usize) -> Vec<Frame> {
    assert!((1..=5).contains(&n), "exhaustive preorder enumeration supports 1..=5 worlds");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut rel = vec![vec![false; n]; n];
    for mask in 0u64..(1 << pairs.len()) {
        for (i, &(a, b)) in pairs.iter().enumerate() {
            rel[a][b] = (mask >> i) & 1 == 1;
        }
        for (w, row) in rel.iter_mut().enumerate() {
            row[w] = true;
        }
        if !transitive(&rel) {
            continue;
        }
        // only canonical representatives reach the set, so skip others early
        let own = code(&rel, &(0..n).collect::<Vec<_>>());
        if perms.iter().any(|p| code(&rel, p) > own) {
            continue;
        }
        seen.insert(own);
    }
    seen.into_iter()
        .map(|c| {
            let mut f = Frame::new(n).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let bit = (n * n - 1) - (a * n + b);
                    f.set(a, b, (c >> bit) & 1 == 1);
                }
            }
            f
        })
        .collect()
}

/// Random preorders on `n` worlds: closures of random relations, deduplicated,
/// deterministic for a given seed.
pub fn sampled_preorders(n: usize, count: usize, seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..count * 4 {
        if out.len() == count {
            break;
        }
        let density: f64 = rng.gen_range(0.05..0.5);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|(a, b)| a != b)
            .filter(|_| rng.gen_bool(density))
            .collect();
        let f = Frame::preorder_closure(n, edges).unwrap();
        if seen.insert(f.pairs()) {
            out.push(f);
        }
    }
    out
}
