//! The `epool` command line.
//!
//! Exit codes: 0 success (including `NOT-ENTAILED` answers), 1 when `verify`
//! or `falsify` finds violations or witnesses, 2 for usage and parse errors,
//! 3 when a vector lies outside the space's domain.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bitset::BitSet;
use crate::entailment::{psi, EntailmentError, ScorerFamily};
use crate::epistemic::{kb_to_state, remaining_worlds, EpistemicError, PropertySpace};
use crate::logic::{parse_formula, parse_kb_with_warnings, prime_implicates, AtomTable, LogicError};
use crate::numeric::{NumericError, Rational};
use crate::pooling::pool_many;
use crate::spaces::{
    decode, encode, gamma, satisfied, NamedVector, SpaceConfig, SpaceError, Vector, VectorFile,
};
use crate::verifier::{
    candidate, candidate_names, default_seed, falsify_outcome, parse_seed, table_report,
    verify_entailment, verify_space, verify_weighted, TrialPlan, VerifyError,
};
use crate::weighted::{decode_weighted, encode_weighted, WeightedError, WeightedState};

#[derive(Debug, Parser)]
#[command(name = "epool", version, about = "Vectors as epistemic states: encode, pool, decode, query and verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a knowledge base (or a weighted state) as a vector file.
    Encode(EncodeArgs),
    /// Pool every vector of the given files into one vector.
    Pool(PoolArgs),
    /// Print the epistemic state of each vector.
    Decode(DecodeArgs),
    /// Decide whether each vector's state entails a formula.
    Query(QueryArgs),
    /// Check the pooling principle for a space (or a scorer's entailment
    /// answers with --scorer).
    Verify(VerifyArgs),
    /// Search a doomed candidate construction for a witness.
    Falsify(FalsifyArgs),
    /// Run every check behind the result matrices.
    Report(ReportArgs),
    /// Render the regions where each property holds, for two-dimensional spaces.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    space: String,
    /// Knowledge base file.
    #[arg(long, conflicts_with = "levels", required_unless_present = "levels")]
    kb: Option<PathBuf>,
    /// Weighted state as comma-separated certainty levels, e.g. `2,0,1`.
    #[arg(long, requires = "k")]
    levels: Option<String>,
    /// Top certainty level for --levels.
    #[arg(long = "K", id = "k")]
    k: Option<u32>,
    /// Pad the vector to this many dimensions.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PoolArgs {
    #[arg(long)]
    space: String,
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Comma-separated atoms overriding those recorded in the files.
    #[arg(long)]
    atoms: Option<String>,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    space: String,
    file: PathBuf,
    /// Print the worlds left open and their prime implicates.
    #[arg(long)]
    logical: bool,
    /// Decode certainty levels up to K instead of a plain state.
    #[arg(long = "K")]
    k: Option<u32>,
    #[arg(long)]
    atoms: Option<String>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    space: String,
    /// Scorer family (minOfGammas, linearSum, reluSum, squaredSum,
    /// sigmoidSum, marginRelu, marginLinear).
    #[arg(long)]
    scorer: String,
    #[arg(long)]
    formula: String,
    file: PathBuf,
    #[arg(long)]
    atoms: Option<String>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Decimal, 0x-hex, or any text (hashed). Defaults to EPOOL_SEED or 0xEP00.
    #[arg(long)]
    seed: Option<String>,
    /// Random trials per sweep.
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated grid values.
    #[arg(long)]
    grid: Option<String>,
    /// Largest dimension swept over the grid.
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    space: String,
    /// Check this scorer's answers against the entailment oracle over two atoms.
    #[arg(long)]
    scorer: Option<String>,
    /// Number of properties (defaults to the plan's maximum dimension).
    #[arg(long)]
    properties: Option<usize>,
    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Debug, Args)]
struct FalsifyArgs {
    #[arg(long, required_unless_present = "list")]
    candidate: Option<String>,
    /// List the candidates.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Also write the JSON report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json_stdout: bool,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    space: String,
    #[arg(long = "out", short = 'o')]
    out: PathBuf,
    /// Half-width of the plotted square.
    #[arg(long, default_value = "2")]
    range: Rational,
    /// Samples per axis. Visual only; signs are exact per sample.
    #[arg(long, default_value_t = 400)]
    resolution: usize,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        let code = match e {
            SpaceError::OutsideDomain { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EntailmentError> for Failure {
    fn from(e: EntailmentError) -> Self {
        match e {
            EntailmentError::Space(s) => s.into(),
            EntailmentError::NotClearCut(_) => Failure {
                code: 3,
                message: e.to_string(),
            },
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<WeightedError> for Failure {
    fn from(e: WeightedError) -> Self {
        match e {
            WeightedError::Space(s) => s.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Space(s) => s.into(),
            VerifyError::Entailment(s) => s.into(),
            VerifyError::Weighted(s) => s.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::usage(e.to_string())
            }
        }
    )*};
}

usage_from!(LogicError, EpistemicError, NumericError, std::fmt::Error);

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(e.to_string())),
    }
}

fn atom_table(list: Option<&str>) -> Result<Option<AtomTable>, Failure> {
    list.map(|l| AtomTable::new(l.split(',').map(str::trim).filter(|s| !s.is_empty())))
        .transpose()
        .map_err(Failure::from)
}

fn load(path: &Path) -> Result<VectorFile, Failure> {
    let text = read(path)?;
    VectorFile::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// The file's vectors in the space named on the command line.
fn load_in(space: &str, path: &Path, atoms: Option<&AtomTable>) -> Result<(SpaceConfig, VectorFile), Failure> {
    let file = load(path)?;
    let props = file.properties(atoms)?;
    let config = SpaceConfig::named(space, props)?.with_dimension(file.n);
    if config.name != file.space && SpaceConfig::named(&file.space, file.properties(atoms)?)?.name != config.name {
        return Err(Failure::usage(format!(
            "{} holds vectors of space `{}`, not `{}`",
            path.display(),
            file.space,
            config.name
        )));
    }
    for v in &file.vectors {
        config.check(&v.vector())?;
    }
    Ok((config, file))
}

fn plan_from(args: &PlanArgs) -> Result<TrialPlan, Failure> {
    let mut plan = TrialPlan::default().with_seed(args.seed.as_deref().map_or_else(default_seed, parse_seed));
    if let Some(t) = args.trials {
        plan.trials = t;
    }
    if let Some(g) = &args.grid {
        plan.grid = g
            .split(',')
            .map(|s| s.trim().parse::<Rational>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(d) = args.max_dim {
        plan.max_dim = d;
    }
    plan.check()?;
    Ok(plan)
}

fn scorer(name: &str) -> Result<ScorerFamily, Failure> {
    name.parse().map_err(Failure::usage)
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut text = String::new();
    let code = match cmd {
        Command::Encode(a) => {
            let (config, vector, name) = match (&a.kb, &a.levels, a.k) {
                (Some(path), _, _) => {
                    let (kb, warnings) = parse_kb_with_warnings(&read(path)?)
                        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    for w in warnings {
                        let _ = writeln!(err, "warning: {}: {w}", path.display());
                    }
                    let props = PropertySpace::logical(kb.atoms().clone())?;
                    let mut config = SpaceConfig::named(&a.space, props)?;
                    if let Some(n) = a.dim {
                        config = config.with_dimension(n);
                    }
                    let v = encode(&config, &kb_to_state(&kb)?)?;
                    let stem = path.file_stem().map_or("kb".into(), |s| s.to_string_lossy().into_owned());
                    (config, v, stem)
                }
                (None, Some(levels), Some(k)) => {
                    let s = WeightedState::parse(levels, k)?;
                    let mut config = SpaceConfig::named(&a.space, PropertySpace::indexed(s.len()))?;
                    if let Some(n) = a.dim {
                        config = config.with_dimension(n);
                    }
                    (config.clone(), encode_weighted(&config, &s)?, "levels".to_string())
                }
                _ => return Err(Failure::usage("encode needs --kb or --levels with --K")),
            };
            let file = VectorFile::new(&config, vec![NamedVector::new(name, vector)]);
            write_or_print(a.out.as_deref(), &file.to_json(), out)?;
            0
        }
        Command::Pool(a) => {
            let atoms = atom_table(a.atoms.as_deref())?;
            let mut config = None;
            let mut vectors = Vec::new();
            for path in &a.files {
                let (c, file) = load_in(&a.space, path, atoms.as_ref())?;
                if let Some(prev) = &config {
                    if *prev != c {
                        return Err(Failure::usage(format!(
                            "{} does not match the dimension or atoms of the earlier files",
                            path.display()
                        )));
                    }
                }
                vectors.extend(file.vectors.iter().map(NamedVector::vector));
                config = Some(c);
            }
            let config = config.expect("at least one file");
            let pooled = pool_many(config.operator, &vectors)?;
            config.check(&pooled)?;
            let file = VectorFile::new(&config, vec![NamedVector::new("pooled", pooled)]);
            write_or_print(a.out.as_deref(), &file.to_json(), out)?;
            0
        }
        Command::Decode(a) => {
            let atoms = atom_table(a.atoms.as_deref())?;
            let (config, file) = load_in(&a.space, &a.file, atoms.as_ref())?;
            for nv in &file.vectors {
                let v = nv.vector();
                if let Some(k) = a.k {
                    let levels = decode_weighted(&config, k, &v, config.semantics)?;
                    writeln!(text, "{}: levels {levels}", nv.name)?;
                    continue;
                }
                let s = decode(&config, &v)?;
                writeln!(text, "{}: {}", nv.name, config.properties.render(&s))?;
                if a.logical {
                    let table = config.properties.atoms().ok_or(EpistemicError::NotLogical)?;
                    let open = remaining_worlds(&config.properties, &s)?;
                    if open.is_empty() {
                        writeln!(text, "  no world left open (inconsistent)")?;
                    }
                    for w in &open {
                        writeln!(text, "  {}", table.describe(*w))?;
                    }
                    let worlds = BitSet::from_indices(config.properties.size(), open.iter().map(|w| w.0));
                    let clauses: Vec<String> = prime_implicates(table.len(), &worlds)
                        .iter()
                        .map(|c| c.display(table).to_string())
                        .collect();
                    writeln!(text, "  implicates: {}", if clauses.is_empty() { "none".into() } else { clauses.join("; ") })?;
                }
            }
            0
        }
        Command::Query(a) => {
            let atoms = atom_table(a.atoms.as_deref())?;
            let (config, file) = load_in(&a.space, &a.file, atoms.as_ref())?;
            let fam = scorer(&a.scorer)?;
            let table = config.properties.atoms().ok_or(EpistemicError::NotLogical)?;
            let f = parse_formula(&a.formula, table)?;
            for nv in &file.vectors {
                let answer = if psi(&config, &fam, &f, &nv.vector())? {
                    "ENTAILED"
                } else {
                    "NOT-ENTAILED"
                };
                writeln!(text, "{}: {answer}", nv.name)?;
            }
            0
        }
        Command::Verify(a) => {
            let plan = plan_from(&a.plan)?;
            let outcome = match &a.scorer {
                Some(s) => {
                    let table = AtomTable::new(["a", "b"])?;
                    let c = SpaceConfig::named(&a.space, PropertySpace::logical(table)?)?;
                    verify_entailment(&c, &scorer(s)?, &plan)?
                }
                None => {
                    let probe = SpaceConfig::named(&a.space, PropertySpace::indexed(2))?;
                    if probe.levels.is_some() && a.properties.is_none() {
                        verify_weighted(&a.space, &plan)?
                    } else {
                        let size = a
                            .properties
                            .unwrap_or(if probe.name == "example1" { 2 } else { plan.max_dim });
                        verify_space(&SpaceConfig::named(&a.space, PropertySpace::indexed(size))?, &plan)?
                    }
                }
            };
            writeln!(text, "seed {}", plan.seed_text())?;
            writeln!(text, "{outcome}")?;
            writeln!(text, "{:.3}s", outcome.elapsed.as_secs_f64())?;
            if outcome.passed() {
                0
            } else {
                1
            }
        }
        Command::Falsify(a) => {
            if a.list {
                for name in candidate_names() {
                    writeln!(text, "{name}: {}", candidate(name)?.summary)?;
                }
                0
            } else {
                let name = a.candidate.as_deref().expect("clap requires a candidate");
                let plan = plan_from(&a.plan)?;
                let outcome = falsify_outcome(name, &plan)?;
                writeln!(text, "seed {}", plan.seed_text())?;
                writeln!(text, "{outcome}")?;
                match &outcome.witness {
                    Some(w) => {
                        let replays = candidate(name)?.replay(w)?;
                        writeln!(text, "replay: {}", if replays { "reproduced" } else { "NOT reproduced" })?;
                        1
                    }
                    None => 0,
                }
            }
        }
        Command::Report(a) => {
            let plan = plan_from(&a.plan)?;
            let report = table_report(&plan)?;
            let json = report.to_json();
            if let Some(path) = &a.json {
                write_or_print(Some(path), &json, out)?;
            }
            text = if a.json_stdout { json } else { report.to_text() };
            0
        }
        Command::Plot(a) => {
            let svg = plot(&a.space, &a.range, a.resolution)?;
            write_or_print(Some(&a.out), &svg, out)?;
            0
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(code)
}

const COLOURS: [&str; 2] = ["#1f77b4", "#d62728"];
const PIXELS: usize = 400;

/// SVG of `Pos_p` for each property of a two-dimensional space over the
/// square `[-range, range]²`, sampled at cell centres.
fn plot(space: &str, range: &Rational, resolution: usize) -> Result<String, Failure> {
    if !range.is_positive() {
        return Err(Failure::usage("--range must be positive"));
    }
    if resolution == 0 || resolution > 4000 {
        return Err(Failure::usage("--resolution must lie in 1..=4000"));
    }
    let config = SpaceConfig::named(space, PropertySpace::indexed(2))?;
    if config.n() != 2 {
        return Err(Failure::usage(format!("plots need a two-dimensional space, `{space}` has n = {}", config.n())));
    }
    let res = resolution as i64;
    // centre of sample i: -range + range * (2i + 1) / res
    let coord = |i: i64| &(range * &Rational::new(2 * i + 1, res)) - range;
    let mut svg = String::new();
    writeln!(
        svg,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{PIXELS}\" height=\"{PIXELS}\" viewBox=\"0 0 {res} {res}\" shape-rendering=\"crispEdges\">"
    )?;
    writeln!(svg, "<title>{}: regions where each property holds, range {range}</title>", config.name)?;
    writeln!(svg, "<rect width=\"{res}\" height=\"{res}\" fill=\"white\"/>")?;
    let mut outside = String::new();
    for (p, colour) in COLOURS.iter().enumerate() {
        writeln!(
            svg,
            "<g fill=\"{}\" fill-opacity=\"0.45\"><desc>{}</desc>",
            colour,
            config.properties.property_name(p)
        )?;
        for row in 0..res {
            let y = coord(res - 1 - row);
            let mut run: Option<i64> = None;
            for col in 0..=res {
                let inside = col < res && {
                    let v = Vector(vec![coord(col), y.clone()]);
                    if config.contains(&v)? {
                        satisfied(config.semantics, &gamma(&config, p, &v)?)?
                    } else {
                        if p == 0 {
                            writeln!(outside, "<rect x=\"{col}\" y=\"{row}\" width=\"1\" height=\"1\"/>")?;
                        }
                        false
                    }
                };
                match (inside, run) {
                    (true, None) => run = Some(col),
                    (false, Some(start)) => {
                        writeln!(svg, "<rect x=\"{start}\" y=\"{row}\" width=\"{}\" height=\"1\"/>", col - start)?;
                        run = None;
                    }
                    _ => {}
                }
            }
        }
        writeln!(svg, "</g>")?;
    }
    if !outside.is_empty() {
        writeln!(svg, "<g fill=\"#bbbbbb\"><desc>outside the domain</desc>\n{outside}</g>")?;
    }
    let mid = res as f64 / 2.0;
    writeln!(
        svg,
        "<g stroke=\"black\" stroke-width=\"{w}\"><line x1=\"0\" y1=\"{mid}\" x2=\"{res}\" y2=\"{mid}\"/>\
         <line x1=\"{mid}\" y1=\"0\" x2=\"{mid}\" y2=\"{res}\"/></g>",
        w = res as f64 / PIXELS as f64
    )?;
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("epool").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, 2);
        assert_eq!(run_args(&["encode", "--bogus"]).0, 2);
        assert_eq!(run_args(&["verify", "--space", "no-such-space"]).0, 2);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("encode"));
    }

    #[test]
    fn falsify_lists_and_finds() {
        let (code, out, _) = run_args(&["falsify", "--list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), candidate_names().len());
        let (code, out, _) = run_args(&["falsify", "--candidate", "avg-weak-reals-coordinate"]);
        assert_eq!(code, 1);
        assert!(out.contains("replay: reproduced"));
    }

    #[test]
    fn plot_two_disks() {
        let svg = plot("example1", &Rational::from_integer(2), 40).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<desc>a</desc>") && svg.contains("<desc>b</desc>"));
        assert!(plot("max-strict-reals", &Rational::zero(), 10).is_err());
    }
}
