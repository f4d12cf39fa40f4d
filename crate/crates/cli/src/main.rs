use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use potentia::control::{CertificateFile, ControlCertificate, ControlKind};
use potentia::formula::{parse_fo, parse_prop, Signature};
use potentia::kripke::frame_properties;
use potentia::potentialist::{eval_fo, PotentialistSystem, SystemFile, Verdict};
use potentia::settheory::{
    build_rank_system, build_transitive_system, height_dial, rank_long_ratchet, rank_ratchet, transitive_buttons, DEFAULT_MAX_WORLDS, HARD_CAP,
};
use potentia::synthesis::{synthesize, SynthesisOutcome};
use potentia::theories::{decide, Decision, Theory};

const DEFAULT_BOUND: usize = 8;

#[derive(Parser)]
#[command(name = "potentia", version, about = "Modal logic of potentialist systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it in normal form
    Parse(ParseArgs),
    /// Print the potentialist translation of a nonmodal sentence
    Translate {
        text: String,
        /// Relations as name/arity, comma separated
        #[arg(long, default_value = "mem/2")]
        signature: String,
    },
    /// Evaluate a sentence at a world of a system
    Eval {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long)]
        formula: String,
    },
    /// Print the frame properties of a system
    Frame {
        #[arg(long)]
        system: PathBuf,
    },
    /// Check a control certificate against a system
    VerifyControl {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Decide a modal formula by bounded countermodel search
    Decide {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        theory: Theory,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Refute a formula in a system by simulating a countermodel with controls
    Synthesize {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        theory: Theory,
    },
    /// Build a set-theoretic system and export it with certificates
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ParseArgs {
    #[arg(long)]
    prop: Option<String>,
    #[arg(long)]
    fo: Option<String>,
    #[arg(long, default_value = "mem/2", requires = "fo")]
    signature: String,
}

#[derive(Subcommand)]
enum Demo {
    /// The ranks V_0 .. V_N under substructure
    Rank {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Transitive subsets of V_N under substructure
    Transitive {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Verify(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Verify(m) => f.write_str(m),
        }
    }
}

fn input(e: impl fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn env_cap(default: usize) -> Result<usize, Failure> {
    match std::env::var("POTENTIA_MAX_WORLDS") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("POTENTIA_MAX_WORLDS: not a number: {v}"))),
        Err(_) => Ok(default),
    }
}

fn parse_signature(text: &str) -> Result<Signature, Failure> {
    let rels = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (name, arity) = s.trim().split_once('/').ok_or_else(|| Failure::Usage(format!("bad relation {s:?}, expected name/arity")))?;
            let arity = arity.parse().map_err(|_| Failure::Usage(format!("bad arity in {s:?}")))?;
            Ok((name.to_string(), arity))
        })
        .collect::<Result<Vec<(String, usize)>, Failure>>()?;
    Signature::new(rels).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_system(path: &Path) -> Result<PotentialistSystem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file: SystemFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    PotentialistSystem::from_file(file).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_certificate(path: &Path, sys: &PotentialistSystem) -> Result<ControlCertificate, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file: CertificateFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut cert = file.certificate(sys).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if !cert.verify(sys, file.rounds()).map_err(input)? {
        return Err(Failure::Verify(format!("certificate rejected: {} at {}", cert.kind.name(), file.base)));
    }
    Ok(cert)
}

fn world(sys: &PotentialistSystem, id: &str) -> Result<usize, Failure> {
    sys.world_index(id).ok_or_else(|| input(format!("no world {id:?}")))
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn write(path: PathBuf, contents: String, out: &mut Vec<String>) -> Result<(), Failure> {
    fs::write(&path, contents + "\n").map_err(|e| input(format!("{}: {e}", path.display())))?;
    out.push(format!("wrote {}", path.display()));
    Ok(())
}

fn export(dir: &Path, sys: &PotentialistSystem, certs: Vec<(&str, ControlCertificate)>) -> Result<Vec<String>, Failure> {
    fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let mut lines = vec![format!("worlds={}", sys.world_count())];
    write(dir.join("system.json"), json(&sys.to_file()), &mut lines)?;
    for (name, mut cert) in certs {
        let ok = cert.verify(sys, Default::default()).map_err(input)?;
        if !ok {
            lines.push(format!("skipped {name}: does not verify at {}", sys.world_id(cert.base)));
            continue;
        }
        let file = CertificateFile::from_certificate(&cert, sys, Some("system.json".into()));
        write(dir.join(format!("{name}.cert.json")), json(&file), &mut lines)?;
    }
    Ok(lines)
}

fn demo(d: Demo) -> Result<Vec<String>, Failure> {
    let build = |e: potentia::settheory::SetTheoryError| Failure::Usage(e.to_string());
    match d {
        Demo::Rank { n, out } => {
            if n > HARD_CAP {
                return Err(Failure::Usage(format!("--N {n} exceeds {HARD_CAP}")));
            }
            let sys = build_rank_system(n).map_err(build)?;
            let mut certs = vec![("long_ratchet", ControlCertificate::new(ControlKind::LongRatchet(rank_long_ratchet(n)), 0))];
            if n >= 2 {
                certs.push(("dial", ControlCertificate::new(ControlKind::Dial(height_dial(2, n).map_err(build)?), 0)));
            }
            if let Ok(extracted) = rank_ratchet(&sys, 2, 2) {
                certs.push(("ratchet", extracted.certificate(0)));
            }
            export(&out, &sys, certs)
        }
        Demo::Transitive { n, out } => {
            let sys = build_transitive_system(n, env_cap(DEFAULT_MAX_WORLDS)?).map_err(build)?;
            let mut certs = vec![];
            if let Ok((buttons, companion)) = transitive_buttons(2, n) {
                let base = sys.world_index("T{}").unwrap_or(0);
                certs.push(("buttons", ControlCertificate::new(ControlKind::Buttons { buttons, companion }, base)));
            }
            export(&out, &sys, certs)
        }
    }
}

fn run(cmd: Command) -> Result<Vec<String>, Failure> {
    match cmd {
        Command::Parse(ParseArgs { prop: Some(text), .. }) => Ok(vec![parse_prop(&text).map_err(input)?.to_string()]),
        Command::Parse(ParseArgs { fo, signature, .. }) => {
            let sig = parse_signature(&signature)?;
            Ok(vec![parse_fo(&fo.unwrap_or_default(), &sig).map_err(input)?.to_string()])
        }
        Command::Translate { text, signature } => {
            let sig = parse_signature(&signature)?;
            let phi = parse_fo(&text, &sig).map_err(input)?;
            Ok(vec![phi.potentialist_translation().map_err(input)?.to_string()])
        }
        Command::Eval { system, world: id, formula } => {
            let sys = load_system(&system)?;
            let w = world(&sys, &id)?;
            let phi = parse_fo(&formula, sys.signature()).map_err(input)?;
            if !phi.is_sentence() {
                return Err(input("formula has free variables"));
            }
            Ok(vec![eval_fo(&sys, w, &phi, &Default::default()).map_err(input)?.to_string()])
        }
        Command::Frame { system } => {
            let sys = load_system(&system)?;
            let p = frame_properties(sys.frame());
            Ok(vec![
                format!("worlds={}", sys.world_count()),
                format!("reflexive={}", p.reflexive),
                format!("transitive={}", p.transitive),
                format!("convergent={}", p.convergent),
                format!("linear={}", p.linear_preorder),
                format!("complete={}", p.complete),
            ])
        }
        Command::VerifyControl { system, cert } => {
            let sys = load_system(&system)?;
            let c = load_certificate(&cert, &sys)?;
            Ok(vec![format!("VERIFIED {} at {}", c.kind.name(), sys.world_id(c.base))])
        }
        Command::Decide { formula, theory, bound } => {
            let phi = parse_prop(&formula).map_err(input)?;
            let bound = bound.map_or_else(|| env_cap(DEFAULT_BOUND), Ok)?;
            let d = decide(&phi, theory, bound).map_err(input)?;
            let mut lines = vec![d.to_string()];
            if let Decision::Nontheorem(cm) = &d {
                lines.push(format!("world={}", cm.world));
                lines.push(format!("model={}", json(&cm.model.to_file())));
            }
            Ok(lines)
        }
        Command::Synthesize { system, cert, formula, theory } => {
            let sys = load_system(&system)?;
            let c = load_certificate(&cert, &sys)?;
            let phi = parse_prop(&formula).map_err(input)?;
            let bound = env_cap(DEFAULT_BOUND)?;
            let r = match synthesize(&sys, &c, &phi, theory, bound).map_err(input)? {
                SynthesisOutcome::NoCountermodel { bound } => return Ok(vec![format!("NO COUNTERMODEL(bound={bound})")]),
                SynthesisOutcome::Refuted(r) => r,
            };
            let cm = &r.simulation.countermodel;
            let mut lines = vec![
                format!("theory={}", r.theory),
                format!("base={}", sys.world_id(r.base)),
                format!("countermodel worlds={} class={} world={}", cm.model.frame.len(), cm.tag, cm.world),
                format!("model={}", json(&cm.model.to_file())),
            ];
            lines.extend(r.simulation.labels.iter().enumerate().map(|(w, l)| format!("label {w}: {l}")));
            lines.extend(r.simulation.sigma.iter().map(|(i, s)| format!("sigma p{i} := {s}")));
            lines.push(format!("instance: {}", r.instance));
            let b = &r.bisimulation;
            lines.push(format!("bisimulation holds={} where_needed={} checked={}", b.holds, b.holds_where_needed, b.checked));
            if let Some(m) = &b.mismatch {
                lines.push(format!("mismatch world={} subformula={} system={} model={}", m.world, m.subformula, m.system, m.model));
            }
            let refuted = r.refutation == Verdict::Fails;
            lines.push(format!("refutation={}", if refuted { "fails" } else { "holds" }));
            if !b.holds || !refuted {
                return Err(Failure::Verify(lines.join("\n")));
            }
            Ok(lines)
        }
        Command::Demo(d) => demo(d),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(report)) => {
            println!("{report}");
            eprintln!("verification failed");
            ExitCode::from(3)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
