use serde::{Deserialize, Serialize};

use super::{Companion, ControlCertificate, ControlError, ControlKind, Rounds};
use crate::formula::{parse_fo, FoFormula};
use crate::potentialist::PotentialistSystem;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanionFile {
    pub kind: String,
    pub formulas: Vec<String>,
}

/// On-disk certificate. Formulas are in the text syntax over the system's
/// signature; the verified flag is never stored, loaders re-verify.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub kind: String,
    pub formulas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion: Option<CompanionFile>,
    /// Where the system lives, for humans and the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub base: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u32>,
}

fn texts(fs: &[FoFormula]) -> Vec<String> {
    fs.iter().map(|f| f.to_string()).collect()
}

impl CertificateFile {
    pub fn from_certificate(cert: &ControlCertificate, sys: &PotentialistSystem, system: Option<String>) -> Self {
        let companion = |c: &Companion| match c {
            Companion::Dial(d) => CompanionFile { kind: "dial".into(), formulas: texts(d) },
            Companion::Switches(s) => CompanionFile { kind: "switches".into(), formulas: texts(s) },
        };
        let (formulas, comp) = match &cert.kind {
            ControlKind::Switches(s) | ControlKind::Dial(s) | ControlKind::LongRatchet(s) => (texts(s), None),
            ControlKind::Buttons { buttons: f, companion: c } | ControlKind::Ratchet { ratchet: f, companion: c } => (texts(f), Some(companion(c))),
        };
        let rounds = match cert.verified_rounds() {
            Some(Rounds::Bounded(k)) => Some(k),
            _ => None,
        };
        CertificateFile {
            kind: cert.kind.name().into(),
            formulas,
            companion: comp,
            system,
            base: sys.world_id(cert.base).into(),
            rounds,
        }
    }

    /// The requested rounds, defaulting to one.
    pub fn rounds(&self) -> Rounds {
        self.rounds.map_or(Rounds::default(), Rounds::Bounded)
    }

    /// An unverified certificate over `sys`.
    pub fn certificate(&self, sys: &PotentialistSystem) -> Result<ControlCertificate, ControlError> {
        let parse = |fs: &[String]| fs.iter().map(|t| parse_fo(t, sys.signature())).collect::<Result<Vec<_>, _>>();
        let base = sys.world_index(&self.base).ok_or_else(|| ControlError::UnknownWorld(self.base.clone()))?;
        let formulas = parse(&self.formulas)?;
        let companion = || -> Result<Companion, ControlError> {
            let c = self.companion.as_ref().ok_or(ControlError::WrongKind { expected: "companion" })?;
            let fs = parse(&c.formulas)?;
            match c.kind.as_str() {
                "dial" => Ok(Companion::Dial(fs)),
                "switches" => Ok(Companion::Switches(fs)),
                _ => Err(ControlError::WrongKind { expected: "dial or switches companion" }),
            }
        };
        let kind = match self.kind.as_str() {
            "switches" => ControlKind::Switches(formulas),
            "dial" => ControlKind::Dial(formulas),
            "long_ratchet" => ControlKind::LongRatchet(formulas),
            "buttons" => ControlKind::Buttons { buttons: formulas, companion: companion()? },
            "ratchet" => ControlKind::Ratchet { ratchet: formulas, companion: companion()? },
            _ => return Err(ControlError::WrongKind { expected: "switches, dial, buttons, ratchet or long_ratchet" }),
        };
        Ok(ControlCertificate::new(kind, base))
    }
}
