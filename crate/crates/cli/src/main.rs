use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hecke::congruence::{
    enumerate_index, geometric_level_from_table, is_congruence, is_congruence_table,
    CongruenceError, CongruenceReport, DecisionConfig, Verdict, DEFAULT_COSET_CAP, TOOL_VERSION,
};
use hecke::farey::{parse_hfs, profile};
use hecke::golden::Modulus;
use hecke::group::DEFAULT_ELEMENT_CAP;
use hecke::matrix::{decompose, GMat, ProjMat, Word};
use hecke::quotient::{
    build_quotient_cached, kernel_subgroup, normal_closure, QuotientCache, QuotientError,
};
use hecke::verify::{run_all, run_lemma, InstanceResult, Outcome, Params, VerifyError};

const EXIT_INPUT: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "hecke", version, about = "Finite quotients and congruence testing for the Hecke group G5")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit newline-delimited JSON records after a version header.
    #[arg(long, global = true)]
    json: bool,
    /// Do not read or write the quotient cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Quotient cache directory (overrides $HECKE_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Maximum number of group elements to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_ELEMENT_CAP, value_parser = positive)]
    cap: usize,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ModulusArg {
    /// Rational modulus, e.g. 8.
    #[arg(long = "mod")]
    modulus: Option<u64>,
    /// Ideal generator, e.g. "2+L".
    #[arg(long)]
    ideal: Option<String>,
}

impl ModulusArg {
    fn resolve(&self) -> Result<Modulus, String> {
        match (&self.modulus, &self.ideal) {
            (Some(n), _) => Modulus::rational(*n).map_err(|e| e.to_string()),
            (_, Some(g)) => {
                let g = g.trim();
                let g = g.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(g);
                let g = g.parse().map_err(|e: hecke::golden::GoldenError| e.to_string())?;
                Modulus::ideal(g).map_err(|e| e.to_string())
            }
            _ => Err("a modulus is required".into()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Order and element-order histogram of a finite quotient.
    Quotient {
        #[command(flatten)]
        modulus: ModulusArg,
        /// Work in SL2 rather than PSL2.
        #[arg(long)]
        homogeneous: bool,
    },
    /// Normal closure of seed words in a quotient, compared with kernels.
    Closure {
        #[command(flatten)]
        modulus: ModulusArg,
        #[arg(long, required = true)]
        seed: Vec<String>,
        #[arg(long)]
        homogeneous: bool,
    },
    /// Run registered lemma checks.
    Verify {
        #[arg(long, required_unless_present = "all")]
        lemma: Option<String>,
        #[arg(long, conflicts_with = "lemma")]
        all: bool,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        s: Option<u64>,
        #[arg(long)]
        pi: Option<String>,
        #[arg(long)]
        tau: Option<String>,
    },
    /// Decide whether a finite-index subgroup is a congruence subgroup.
    Congruence {
        #[command(flatten)]
        input: CongruenceInput,
        #[arg(long, default_value_t = DEFAULT_COSET_CAP, value_parser = positive)]
        coset_cap: usize,
    },
    /// All subgroups of a given index, with level and verdict.
    Census {
        #[arg(long)]
        index: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CongruenceInput {
    /// Inline symbol, e.g. "[-inf; *; 0; *; inf]".
    #[arg(long)]
    hfs: Option<String>,
    /// File holding a symbol.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generator words; repeat the flag for each generator.
    #[arg(long)]
    gens: Vec<String>,
    /// Generator matrices "[[a,b],[c,d]]"; repeat for each generator.
    #[arg(long)]
    matrix: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct Header {
    tool: String,
    version: String,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Quotient {
        modulus: Modulus,
        projective: bool,
        order: u64,
        histogram: BTreeMap<u64, usize>,
    },
    Closure {
        modulus: Modulus,
        seeds: Vec<String>,
        order: u64,
        kernels: Vec<KernelRow>,
    },
    Verify(InstanceResult),
    Congruence(CongruenceReport),
    Census(CensusRow),
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct KernelRow {
    level: Modulus,
    order: u64,
    relation: String,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct CensusRow {
    index: u64,
    v2: usize,
    v5: usize,
    cusp_widths: Vec<u64>,
    level: u64,
    normal: bool,
    verdict: Option<Verdict>,
    asserted: bool,
}

enum Failure {
    Input(String),
    Undecided(String),
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Self {
        if e.is_cap() {
            Failure::Undecided(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<CongruenceError> for Failure {
    fn from(e: CongruenceError) -> Self {
        if e.is_undecided() {
            Failure::Undecided(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Output {
    json: bool,
}

impl Output {
    fn start(&self) {
        if self.json {
            let h = Header {
                tool: "hecke".into(),
                version: TOOL_VERSION.into(),
            };
            println!("{}", serde_json::to_string(&h).expect("header serializes"));
        }
    }

    fn emit(&self, r: &Record) {
        if self.json {
            println!("{}", serde_json::to_string(r).expect("record serializes"));
            return;
        }
        match r {
            Record::Quotient { modulus, projective, order, histogram } => {
                let kind = if *projective { "PSL2" } else { "SL2" };
                println!("modulus {modulus} ({kind}): order {order}");
                for (k, v) in histogram {
                    println!("  elements of order {k}: {v}");
                }
            }
            Record::Closure { modulus, seeds, order, kernels } => {
                println!("normal closure of {} mod {modulus}: order {order}", seeds.join(", "));
                for k in kernels {
                    println!("  kernel of level {}: order {} ({})", k.level, k.order, k.relation);
                }
            }
            Record::Verify(x) => println!("{:8} {:<44} {:10} {}", x.lemma, x.params, x.outcome.to_string(), x.detail),
            Record::Congruence(c) => {
                let verdict = match c.verdict {
                    Verdict::Congruence => "congruence",
                    Verdict::NotCongruence => "not congruence",
                };
                println!("verdict: {verdict}");
                println!("index: {}", c.index);
                println!("geometric level: {}", c.geometric_level);
                println!("test modulus: {}", c.test_modulus);
                println!("image: {} of {}", c.image_order, c.quotient_order);
                if let Some(a) = &c.algebraic_level {
                    println!("algebraic level: {a}");
                }
            }
            Record::Census(row) => {
                let verdict = match (row.verdict, row.asserted) {
                    (_, false) => "unasserted",
                    (Some(Verdict::Congruence), _) => "congruence",
                    (Some(Verdict::NotCongruence), _) => "not congruence",
                    (None, _) => "undecided",
                };
                let widths: Vec<String> = row.cusp_widths.iter().map(u64::to_string).collect();
                println!(
                    "index {} v2 {} v5 {} widths [{}] level {}{} {verdict}",
                    row.index,
                    row.v2,
                    row.v5,
                    widths.join(","),
                    row.level,
                    if row.normal { " normal" } else { "" }
                );
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Output { json: cli.json };
    let cache = if cli.no_cache {
        None
    } else {
        cli.cache_dir.clone().map(QuotientCache::new).or_else(QuotientCache::from_env)
    };
    let cfg = DecisionConfig {
        coset_cap: DEFAULT_COSET_CAP,
        element_cap: cli.cap,
        cache,
    };
    match run(&cli.command, &cfg, &out) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Undecided(msg)) => {
            eprintln!("undecided: {msg}");
            ExitCode::from(EXIT_UNDECIDED)
        }
    }
}

fn parse_word(s: &str) -> Result<Word, Failure> {
    s.parse().map_err(|e: hecke::matrix::MatrixError| Failure::Input(format!("{s:?}: {e}")))
}

fn run(cmd: &Command, cfg: &DecisionConfig, out: &Output) -> Result<u8, Failure> {
    match cmd {
        Command::Quotient { modulus, homogeneous } => {
            let m = modulus.resolve().map_err(Failure::Input)?;
            let q = build_quotient_cached(&m, !homogeneous, cfg.element_cap, cfg.cache.as_ref())?;
            let histogram = q.as_subgroup().order_histogram(q.ambient());
            out.start();
            out.emit(&Record::Quotient {
                modulus: m,
                projective: !homogeneous,
                order: q.order() as u64,
                histogram,
            });
            Ok(0)
        }
        Command::Closure { modulus, seed, homogeneous } => {
            let m = modulus.resolve().map_err(Failure::Input)?;
            let words = seed.iter().map(|s| parse_word(s)).collect::<Result<Vec<_>, _>>()?;
            let q = build_quotient_cached(&m, !homogeneous, cfg.element_cap, cfg.cache.as_ref())?;
            let seeds: Vec<_> = words.iter().map(|w| q.ambient().from_word(w)).collect();
            let c = normal_closure(&q, &seeds)?;
            let mut kernels = Vec::new();
            for d in m.divisors().map_err(|e| Failure::Input(e.to_string()))? {
                let k = kernel_subgroup(&q, &d)?;
                let relation = if k.same_as(&c) {
                    "equal"
                } else if k.is_subset_of(&c) {
                    "contains kernel"
                } else if c.is_subset_of(&k) {
                    "inside kernel"
                } else {
                    "incomparable"
                };
                kernels.push(KernelRow {
                    level: d,
                    order: k.order() as u64,
                    relation: relation.into(),
                });
            }
            out.start();
            out.emit(&Record::Closure {
                modulus: m,
                seeds: words.iter().map(Word::to_string).collect(),
                order: c.order() as u64,
                kernels,
            });
            Ok(0)
        }
        Command::Verify { lemma, all, m, n, p, r, s, pi, tau } => {
            let results = if *all {
                run_all(cfg)?
            } else {
                let params = Params {
                    m: *m,
                    n: *n,
                    p: *p,
                    r: *r,
                    s: *s,
                    pi: pi.clone(),
                    tau: tau.clone(),
                };
                run_lemma(lemma.as_deref().unwrap_or_default(), &params, cfg)?
            };
            out.start();
            for x in &results {
                out.emit(&Record::Verify(x.clone()));
            }
            let worst = if results.iter().any(|x| x.outcome == Outcome::Fail) {
                EXIT_FAILED
            } else if results.iter().any(|x| x.outcome == Outcome::Skipped) {
                EXIT_UNDECIDED
            } else {
                0
            };
            Ok(worst)
        }
        Command::Congruence { input, coset_cap } => {
            let cfg = DecisionConfig {
                coset_cap: *coset_cap,
                ..cfg.clone()
            };
            let words = congruence_words(input)?;
            let report = is_congruence(&words, &cfg)?;
            out.start();
            out.emit(&Record::Congruence(report));
            Ok(0)
        }
        Command::Census { index } => {
            let tables = enumerate_index(*index);
            out.start();
            let mut undecided = false;
            for t in &tables {
                let normal = t.is_normal();
                let verdict = match is_congruence_table(t, cfg) {
                    Ok(r) => Some(r.verdict),
                    Err(e) if e.is_undecided() => {
                        undecided = true;
                        None
                    }
                    Err(e) => return Err(e.into()),
                };
                let mut widths = t.t_cycles();
                widths.sort();
                out.emit(&Record::Census(CensusRow {
                    index: t.degree() as u64,
                    v2: t.v2(),
                    v5: t.v5(),
                    cusp_widths: widths,
                    level: geometric_level_from_table(t),
                    normal,
                    verdict,
                    // the normal subgroup of index 5 is left open
                    asserted: !(normal && *index == 5),
                }));
            }
            Ok(if undecided { EXIT_UNDECIDED } else { 0 })
        }
    }
}

fn congruence_words(input: &CongruenceInput) -> Result<Vec<Word>, Failure> {
    let symbol = |text: &str| -> Result<Vec<Word>, Failure> {
        let h = parse_hfs(text).map_err(|e| Failure::Input(e.to_string()))?;
        Ok(profile(&h).map_err(|e| Failure::Input(e.to_string()))?.words)
    };
    if let Some(text) = &input.hfs {
        return symbol(text);
    }
    if let Some(path) = &input.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        return symbol(&text);
    }
    if !input.gens.is_empty() {
        return input.gens.iter().map(|s| parse_word(s)).collect();
    }
    input
        .matrix
        .iter()
        .map(|s| {
            let g: GMat = s.parse().map_err(|e: hecke::matrix::MatrixError| Failure::Input(format!("{s:?}: {e}")))?;
            decompose(&ProjMat::new(g)).map_err(|e| Failure::Input(format!("{s:?}: {e}")))
        })
        .collect()
}
