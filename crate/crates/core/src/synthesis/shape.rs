use super::{Countermodel, SynthesisError};
use crate::kripke::{generate_frame, FrameClass, KripkeModel};

fn rebuild(cm: &Countermodel, class: FrameClass, old_of: impl Fn(usize) -> usize, world: usize) -> Result<Countermodel, SynthesisError> {
    let frame = generate_frame(class)?;
    let valuation = (0..frame.len()).map(|w| cm.model.valuation[old_of(w)].clone()).collect();
    Ok(Countermodel {
        model: KripkeModel::new(frame, cm.model.var_count, valuation)?,
        world,
        class: Some(class),
        tag: class.tag(),
    })
}

/// The submodel generated by the failing world, in canonical shape with the
/// failing world in the bottom cluster.
pub fn rooted(cm: &Countermodel) -> Result<Countermodel, SynthesisError> {
    match cm.class {
        Some(c @ FrameClass::Complete(_)) => rebuild(cm, c, |w| w, cm.world),
        Some(FrameClass::Linear { clusters, size }) => {
            let (i, j) = (cm.world / size, cm.world % size);
            rebuild(cm, FrameClass::Linear { clusters: clusters - i, size }, |w| w + i * size, j)
        }
        Some(FrameClass::PreBoolean { atoms, size }) => {
            let (set, j) = (cm.world / size, cm.world % size);
            let free: Vec<usize> = (0..atoms).filter(|a| set >> a & 1 == 0).collect();
            let expand = |b: usize| free.iter().enumerate().fold(set, |acc, (k, &a)| acc | ((b >> k & 1) << a));
            rebuild(cm, FrameClass::PreBoolean { atoms: free.len(), size }, |w| expand(w / size) * size + w % size, j)
        }
        None => Err(SynthesisError::UnsupportedShape(cm.tag.clone())),
    }
}

/// Pads every cluster to `size` worlds with copies of its first member.
pub fn uniformize(cm: &Countermodel, size: usize) -> Result<Countermodel, SynthesisError> {
    let (class, old) = match cm.class {
        Some(FrameClass::Complete(k)) => (FrameClass::Complete(size), k),
        Some(FrameClass::Linear { clusters, size: m }) => (FrameClass::Linear { clusters, size }, m),
        Some(FrameClass::PreBoolean { atoms, size: m }) => (FrameClass::PreBoolean { atoms, size }, m),
        None => return Err(SynthesisError::UnsupportedShape(cm.tag.clone())),
    };
    if size < old {
        return Err(SynthesisError::TooFewControls { what: "settings", needed: old, have: size });
    }
    let world = cm.world / old * size + cm.world % old;
    rebuild(cm, class, |w| {
        let j = w % size;
        w / size * old + if j < old { j } else { 0 }
    }, world)
}

/// Swaps valuations inside the bottom cluster so the failing world sits at
/// position `target`.
pub fn permute_bottom(cm: &Countermodel, target: usize) -> Countermodel {
    let mut out = cm.clone();
    out.model.valuation.swap(cm.world, target);
    out.world = target;
    out
}
