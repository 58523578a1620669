use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use severi_core::error::Error;
use severi_core::evalmap::{self, PointConfiguration};
use severi_core::families::{self, FamilyDatum};
use severi_core::floorplan::{self, StretchedConfig};
use severi_core::markings::{self, MarkingSet};
use severi_core::moduli;
use severi_core::tropgraph::CombinatorialType;
use severi_core::wallwalk;
use severi_oracle::IrreducibleCounts;

const WORKERS_ENV: &str = "SEVERI_WORKERS";

#[derive(Parser)]
#[command(name = "severi", version, about = "Tropical curve counts, walks and marking classes for plane Severi varieties")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count irreducible curves of degree d and genus g through 3d+g-1 points.
    Count {
        #[command(flatten)]
        dg: DegreeGenus,
        /// Also evaluate the Caporaso-Harris recursion and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// List the curves through a vertically stretched configuration.
    Enumerate {
        #[command(flatten)]
        dg: DegreeGenus,
        /// Stretched configuration JSON (`{"points": [...], "lambda": "p/q"}`).
        #[arg(long)]
        points: Option<PathBuf>,
        /// Write the curves here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// List marked floor diagrams instead of curves.
        #[arg(long)]
        diagrams: bool,
    },
    /// Describe the fiber of the evaluation map over a point configuration.
    Fiber {
        #[arg(long = "type")]
        ty: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Walk from a stretched solution to a stratum with a free contracted edge.
    Walk {
        #[command(flatten)]
        dg: DegreeGenus,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        points: Option<PathBuf>,
        /// Write the full trace JSON here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Markings of nodes of d general lines.
    #[command(group(ArgGroup::new("mode").required(true).args(["classes", "witness", "codim"])))]
    Markings {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        delta: usize,
        /// Equivalence classes under similarity moves.
        #[arg(long)]
        classes: bool,
        /// An irreducible marking avoiding the first line.
        #[arg(long)]
        witness: bool,
        /// Codimension of the branch of the second marking at the first.
        #[arg(long, num_args = 2, value_names = ["M1", "M2"])]
        codim: Option<Vec<PathBuf>>,
    },
    /// Check the compatibilities of a family of parametrized curves.
    ValidateFamily { family: PathBuf },
    /// Classify the moduli stratum of a combinatorial type.
    ClassifyStratum { ty: PathBuf },
}

#[derive(Args)]
struct DegreeGenus {
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    g: u32,
}

impl DegreeGenus {
    fn check(&self) -> Result<(), CliError> {
        if self.d == 0 {
            return Err(CliError::Usage("--d must be positive".into()));
        }
        let max = floorplan::max_genus(self.d);
        if self.g > max {
            return Err(CliError::Usage(format!("--g must lie in 0..={max} for degree {}", self.d)));
        }
        Ok(())
    }
}

enum CliError {
    Usage(String),
    Core(Error),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// What a subcommand prints: a JSON value and its human rendering.
struct Report {
    json: Value,
    text: String,
    ok: bool,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, ok: true }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let s = read(path)?;
    serde_json::from_str(&s).map_err(|e| CliError::Core(Error::Parse(format!("{}: {e}", path.display()))))
}

fn stretched(points: &Option<PathBuf>, d: u32, g: u32) -> Result<StretchedConfig, CliError> {
    match points {
        Some(p) => parse_json(p),
        None => Ok(floorplan::make_stretched(floorplan::point_count(d, g), d)?),
    }
}

/// A marking as a bare sorted pair list or as `{"d": .., "nodes": ..}`.
fn read_marking(path: &Path, d: usize) -> Result<MarkingSet, CliError> {
    let s = read(path)?;
    if let Ok(nodes) = serde_json::from_str::<Vec<(usize, usize)>>(&s) {
        return Ok(MarkingSet::new(d, nodes)?);
    }
    let m = MarkingSet::from_json(&s)?;
    if m.d != d {
        return Err(CliError::Usage(format!("{} is a marking of {} lines, not {d}", path.display(), m.d)));
    }
    Ok(m)
}

fn pairs(m: &MarkingSet) -> String {
    let inner: Vec<String> = m.nodes.iter().map(|(i, j)| format!("[{i},{j}]")).collect();
    format!("[{}]", inner.join(","))
}

fn count(dg: &DegreeGenus, oracle: bool) -> Result<Report, CliError> {
    dg.check()?;
    let n = floorplan::count_severi(dg.d, dg.g)?;
    let mut json = json!({ "d": dg.d, "g": dg.g, "points": floorplan::point_count(dg.d, dg.g), "count": n });
    let mut text = format!("degree {} genus {}: {n}", dg.d, dg.g);
    let mut ok = true;
    if oracle {
        let want = IrreducibleCounts::new().genus(dg.d, dg.g);
        ok = want == n.into();
        json["oracle"] = json!(want.to_string());
        json["agrees"] = json!(ok);
        text.push_str(&format!(" (recursion: {want}{})", if ok { "" } else { ", MISMATCH" }));
    }
    Ok(Report { json, text, ok })
}

fn enumerate(dg: &DegreeGenus, points: &Option<PathBuf>, out: &Option<PathBuf>, diagrams: bool) -> Result<Report, CliError> {
    dg.check()?;
    if dg.d > floorplan::MAX_COUNT_DEGREE {
        return Err(Error::ScaleRefused(format!("degree {} exceeds {}", dg.d, floorplan::MAX_COUNT_DEGREE)).into());
    }
    let (json, text) = if diagrams {
        let list: Vec<String> = floorplan::enumerate_marked(dg.d, dg.g).iter().map(|m| m.to_string()).collect();
        let text = format!("{} marked floor diagrams\n\n{}", list.len(), list.join("\n"));
        (json!(list), text)
    } else {
        let cfg = stretched(points, dg.d, dg.g)?;
        let curves = floorplan::enumerate_curves(dg.d, dg.g, &cfg)?;
        let total: u64 = curves.iter().map(|c| c.multiplicity()).sum();
        let text = format!("{} curves, total multiplicity {total}", curves.len());
        (to_value(&curves), text)
    };
    if let Some(path) = out {
        write(path, &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")))?;
        return Ok(Report::ok(json!({ "written": path.display().to_string() }), format!("{text}\nwritten to {}", path.display())));
    }
    Ok(Report::ok(json, text))
}

fn fiber(ty: &Path, points: &Path) -> Result<Report, CliError> {
    let t = CombinatorialType::from_json(&read(ty)?)?;
    let cfg = PointConfiguration::from_json(&read(points)?)?;
    let f = evalmap::fiber(&t, &cfg)?;
    let text = match f.dimension() {
        None => "empty fiber".to_string(),
        Some(0) => "fiber is a single curve".to_string(),
        Some(1) => "fiber is an interval".to_string(),
        Some(k) => format!("fiber of dimension {k}"),
    };
    Ok(Report::ok(to_value(&f), text))
}

fn walk(dg: &DegreeGenus, seed: u64, points: &Option<PathBuf>, trace: &Option<PathBuf>) -> Result<Report, CliError> {
    dg.check()?;
    let cfg = stretched(points, dg.d, dg.g)?;
    let t = wallwalk::run_walk(dg.d, dg.g, &cfg, seed)?;
    let body = t.to_json();
    if let Some(path) = trace {
        write(path, &format!("{body}\n"))?;
    }
    let mut text = format!(
        "solution {} of {}, point {} released\n",
        t.solution_index + 1,
        t.solution_count,
        t.mobile_point
    );
    for s in &t.steps {
        text.push_str(&format!("  {:?} wall at vertex {}: {:?}\n", s.event.kind, s.event.vertex, s.choice));
    }
    text.push_str(&format!(
        "terminal after {} crossings (bound {}): free edge {} of slope {}, descent {:?}",
        t.crossings, t.bound, t.terminal.free_edge, t.terminal.free_edge_slope, t.descent
    ));
    let ok = t.terminal.is_valid() && t.descends();
    Ok(Report { json: serde_json::from_str(&body).expect("trace json"), text, ok })
}

fn markings_cmd(d: usize, delta: usize, classes: bool, witness: bool, codim: &Option<Vec<PathBuf>>) -> Result<Report, CliError> {
    if classes {
        let cls = markings::equivalence_classes(d, delta)?;
        let irr = cls.iter().filter(|c| c.irreducible).count();
        let json = json!({
            "d": d,
            "delta": delta,
            "irreducible_classes": irr,
            "empty": markings::empty_criterion(d, delta),
            "classes": cls.iter().map(|c| json!({
                "irreducible": c.irreducible,
                "size": c.markings.len(),
                "markings": c.markings.iter().map(|m| to_value(&m.nodes)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        let mut text = format!("d={d} delta={delta}: {} classes, {irr} irreducible", cls.len());
        for c in &cls {
            text.push_str(&format!(
                "\n  {} class of {} markings, e.g. {}",
                if c.irreducible { "irreducible" } else { "reducible" },
                c.markings.len(),
                pairs(&c.markings[0])
            ));
        }
        return Ok(Report::ok(json, text));
    }
    if witness {
        let w = markings::witness_disjoint_from_first(d, delta);
        let text = match &w {
            Some(m) => format!("irreducible marking avoiding L1: {}", pairs(m)),
            None => format!("no irreducible {delta}-marking of {d} lines avoids L1"),
        };
        let ok = w.is_some() || markings::empty_criterion(d, delta);
        return Ok(Report { json: json!({ "d": d, "delta": delta, "witness": w.map(|m| m.nodes) }), text, ok });
    }
    let paths = codim.as_ref().expect("one mode is required");
    let m1 = read_marking(&paths[0], d)?;
    let m2 = read_marking(&paths[1], d)?;
    if m1.delta() != delta || m2.delta() != delta {
        return Err(CliError::Usage(format!("both markings must have {delta} nodes")));
    }
    let c = markings::branch_codim(&m1, &m2)?;
    Ok(Report::ok(json!({ "d": d, "delta": delta, "codim": c }), format!("codimension {c}")))
}

fn validate_family(path: &Path) -> Result<Report, CliError> {
    let fam = FamilyDatum::from_json(&read(path)?)?;
    let v = families::validate(&fam);
    let text = match &v.violation {
        None => "family is valid".to_string(),
        Some(x) if x.condition == 0 => format!("invalid at {}: {}", x.location, x.detail),
        Some(x) => format!("condition ({}) fails at {}: {}", x.condition, x.location, x.detail),
    };
    Ok(Report { ok: v.valid, json: to_value(&v), text })
}

fn classify_stratum(path: &Path) -> Result<Report, CliError> {
    let t = CombinatorialType::from_json(&read(path)?)?;
    let cone = moduli::cone_of(&t)?;
    let text = format!(
        "{:?}; dimension {} (expected {}), {}realizable, {} automorphisms",
        cone.class,
        cone.dimension,
        cone.expected_dimension,
        if cone.realizable { "" } else { "not " },
        cone.aut_order
    );
    Ok(Report::ok(to_value(&cone), text))
}

fn dispatch(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Count { dg, oracle } => count(dg, *oracle),
        Command::Enumerate { dg, points, out, diagrams } => enumerate(dg, points, out, *diagrams),
        Command::Fiber { ty, points } => fiber(ty, points),
        Command::Walk { dg, seed, points, trace } => walk(dg, *seed, points, trace),
        Command::Markings { d, delta, classes, witness, codim } => markings_cmd(*d, *delta, *classes, *witness, codim),
        Command::ValidateFamily { family } => validate_family(family),
        Command::ClassifyStratum { ty } => classify_stratum(ty),
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failed(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| dispatch(&cli.command));
    match result {
        Ok(r) => {
            let body = if cli.json { serde_json::to_string_pretty(&r.json).expect("json") } else { r.text };
            // A closed pipe (`severi ... | head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Core(Error::ScaleRefused(msg))) => {
            eprintln!("refused: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
