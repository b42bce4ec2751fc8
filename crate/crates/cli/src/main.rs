use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fml_core::choquet::p_choquet_integral;
use fml_core::config::{load_cells, load_ifs, parse_cell_words, FunctionFile};
use fml_core::content::optimal_cover;
use fml_core::harness::{
    estimate_stein_constant, norm_constant, stein_by_depth, stein_is_stable, verify_lebesgue, verify_norm_equivalence,
    strong_pp_constant, strong_type_constant, verify_strong_pp, verify_strong_type, verify_weak_type, verify_wiener,
    write_csv, Campaign, GeneratorConfig, NormExponent, ValueDistribution, VerificationRecord, DEFAULT_REL_TOL,
};
use fml_core::maximal::ancestor_average_trace;
use fml_core::render::generation_svg;
use fml_core::selection::{certify_selection, order_cubes, select_subfamily_with, SelectionOrder};
use fml_core::{
    indicator_maximal_closed_form, maximal_operator, AxisBox, ContentExponent, CylinderFunction, IteratedFunctionSystem, Word,
};

/// Exact maximal-function computations on self-similar sets.
///
/// Exit status: 0 on success, 1 when a checked inequality fails, 2 on a
/// usage or input error. FML_THREADS caps the worker pool.
#[derive(Parser, Debug)]
#[command(name = "fml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the similarity dimension s solving Σ r_i^s = 1.
    Dim {
        /// IFS config (TOML, or JSON by extension).
        config: PathBuf,
    },
    /// Draw the generation-n cells as SVG.
    Generate {
        config: PathBuf,
        /// Generation to draw.
        #[arg(long)]
        depth: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Hausdorff content of a union of basic cubes, with an optimal cover.
    Content {
        config: PathBuf,
        /// One word per line; `-` is the whole set, `#` starts a comment.
        #[arg(long)]
        cells: PathBuf,
        /// Content exponent in (0, 1].
        #[arg(long)]
        rho: f64,
    },
    /// The p-Choquet integral ∫ f^p dH of a cylinder function.
    Choquet {
        config: PathBuf,
        /// Function file: {"depth": n, "values": {"word": v, ...}}.
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Leafwise maximal function as CSV (leaf,f,mf).
    Maximal {
        config: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
        /// Add a closed_form column with M of the indicator of this cube.
        #[arg(long)]
        closed_form_word: Option<String>,
        /// Print the ancestor averages at this leaf instead of the table.
        #[arg(long)]
        trace_leaf: Option<String>,
    },
    /// Greedy packing selection from a family of disjoint cubes.
    Select {
        config: PathBuf,
        /// Candidate cubes in input order, one per line.
        #[arg(long)]
        cells: PathBuf,
        #[arg(long)]
        rho: f64,
        /// Packing slack: selected weight under a cube stays ≤ (1 + sigma) μ^ρ.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = Order::Input)]
        order: Order,
        /// Function for the splitting check; the constant 1 when absent.
        #[arg(long = "fn")]
        function: Option<PathBuf>,
    },
    /// Randomized campaigns checking the maximal inequalities.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Random functions per suite.
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Function depth; defaults to the deepest level with at most 1024 leaves (8 for binary).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Content exponent for the content suites.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Integrability exponent; `inf` is accepted by the equiv suite.
        #[arg(long, default_value = "2")]
        p: String,
        /// Write every record as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Order {
    Input,
    Lex,
    Measure,
}

impl From<Order> for SelectionOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Input => SelectionOrder::Input,
            Order::Lex => SelectionOrder::Lex,
            Order::Measure => SelectionOrder::Measure,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Strong,
    Weak,
    Pp,
    Wiener,
    Stein,
    Equiv,
    Lebesgue,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Violated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FML_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("FML_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load(config: &Path) -> Result<IteratedFunctionSystem> {
    let ifs = load_ifs(config).with_context(|| format!("loading {}", config.display()))?;
    let d = ifs.ambient_dimension();
    if ifs.ssc_declared() && d > 0 && matches!(ifs.seed_images_disjoint(&AxisBox::unit(d)), Ok(false)) {
        eprintln!("warning: {}: images of the unit box overlap; strong separation is declared, not verified", ifs.name());
    }
    Ok(ifs)
}

fn load_function(path: &Path, arity: usize) -> Result<CylinderFunction> {
    FunctionFile::load(path)
        .and_then(|f| f.to_function(arity))
        .with_context(|| format!("loading {}", path.display()))
}

fn run(command: Command, out: &mut impl Write) -> Result<Status> {
    match command {
        Command::Dim { config } => {
            let ifs = load(&config)?;
            writeln!(out, "{}", ifs.dimension())?;
        }
        Command::Generate { config, depth, svg } => {
            let ifs = load(&config)?;
            let text = generation_svg(&ifs, depth)?;
            match svg {
                Some(path) => {
                    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                    writeln!(out, "{} cells written to {}", ifs.arity().pow(depth as u32), path.display())?;
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Content { config, cells, rho } => {
            let ifs = load(&config)?;
            let rho = ContentExponent::new(rho)?;
            let set = load_cells(&cells, ifs.arity()).with_context(|| format!("loading {}", cells.display()))?;
            let cover = optimal_cover(&ifs, &set, rho);
            writeln!(out, "content {}", cover.value)?;
            let words: Vec<String> = cover.cubes.iter().map(word_text).collect();
            writeln!(out, "cover {}", words.join(" "))?;
        }
        Command::Choquet { config, function, p, rho } => {
            let ifs = load(&config)?;
            let f = load_function(&function, ifs.arity())?;
            let value = p_choquet_integral(&ifs, &f, p, ContentExponent::new(rho)?)?;
            writeln!(out, "{value}")?;
        }
        Command::Maximal {
            config,
            function,
            closed_form_word,
            trace_leaf,
        } => {
            let ifs = load(&config)?;
            let f = load_function(&function, ifs.arity())?;
            if let Some(leaf) = trace_leaf {
                let leaf = Word::parse(&leaf, ifs.arity())?;
                let trace = ancestor_average_trace(&ifs, &f, &leaf)?;
                writeln!(out, "level,cube,average,running_max")?;
                for (k, avg) in trace.averages.iter().enumerate() {
                    writeln!(out, "{k},{},{avg},{}", word_text(&leaf.prefix(k)), trace.running_max(k))?;
                }
                return Ok(Status::Ok);
            }
            let mf = maximal_operator(&ifs, &f);
            let closed = closed_form_word
                .map(|w| -> Result<CylinderFunction> {
                    let w = Word::parse(&w, ifs.arity())?;
                    Ok(indicator_maximal_closed_form(&ifs, &w, f.depth())?)
                })
                .transpose()?;
            write!(out, "leaf,f,mf")?;
            if closed.is_some() {
                write!(out, ",closed_form")?;
            }
            writeln!(out)?;
            for leaf in Word::all_of_depth(f.depth(), ifs.arity()) {
                write!(out, "{},{},{}", word_text(&leaf), f.value(&leaf), mf.value(&leaf))?;
                if let Some(c) = &closed {
                    write!(out, ",{}", c.value(&leaf))?;
                }
                writeln!(out)?;
            }
        }
        Command::Select {
            config,
            cells,
            rho,
            sigma,
            order,
            function,
        } => {
            let ifs = load(&config)?;
            let rho = ContentExponent::new(rho)?;
            let text = std::fs::read_to_string(&cells).with_context(|| format!("reading {}", cells.display()))?;
            let cubes = order_cubes(&ifs, &parse_cell_words(&text, ifs.arity())?, order.into());
            let sel = select_subfamily_with(&ifs, &cubes, rho, sigma)?;
            let depth = cubes.iter().map(Word::len).max().unwrap_or(0);
            let f = match function {
                Some(path) => load_function(&path, ifs.arity())?,
                None => CylinderFunction::constant(ifs.arity(), depth, 1.0)?,
            };
            let cert = certify_selection(&ifs, &sel, rho, &f)?;
            let words: Vec<String> = sel.selected().iter().map(word_text).collect();
            writeln!(out, "selected {}", words.join(" "))?;
            writeln!(out, "packing_margin {}", cert.packing_margin)?;
            writeln!(
                out,
                "covering_margin {} (constant {})",
                cert.covering.margin(),
                cert.covering.constant
            )?;
            writeln!(
                out,
                "splitting_margin {} (constant {})",
                cert.splitting.margin(),
                cert.splitting.constant
            )?;
            let ok = cert.packing_margin >= 0.0
                && cert.covering.holds(DEFAULT_REL_TOL)
                && cert.splitting.holds(DEFAULT_REL_TOL);
            return Ok(if ok { Status::Ok } else { Status::Violated });
        }
        Command::Verify {
            config,
            suite,
            trials,
            depth,
            seed,
            rho,
            p,
            csv,
        } => {
            let ifs = load(&config)?;
            let depth = depth.unwrap_or_else(|| default_depth(ifs.arity()));
            let campaign = Campaign::new(trials, depth, seed);
            let rho = ContentExponent::new(rho)?;
            let p: NormExponent = p.parse()?;
            let records = run_suites(&ifs, suite, &campaign, rho, p, out)?;
            if let Some(path) = csv {
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                write_csv(&records, file)?;
            }
            let bad = records.iter().filter(|r| r.violates(DEFAULT_REL_TOL)).count();
            writeln!(out, "violations {bad}")?;
            return Ok(if bad == 0 { Status::Ok } else { Status::Violated });
        }
    }
    Ok(Status::Ok)
}

fn word_text(w: &Word) -> String {
    if w.is_root() {
        "-".to_string()
    } else {
        w.to_string()
    }
}

/// Deepest level with at most 1024 leaves.
fn default_depth(arity: usize) -> usize {
    let mut depth = 0;
    while arity.pow(depth as u32 + 1) <= 1024 && depth < 8 {
        depth += 1;
    }
    depth
}

fn finite(p: NormExponent, suite: &str) -> Result<f64> {
    match p {
        NormExponent::Finite(p) => Ok(p),
        NormExponent::Infinite => bail!("suite {suite} needs a finite p"),
    }
}

fn run_suites(
    ifs: &IteratedFunctionSystem,
    suite: Suite,
    campaign: &Campaign,
    rho: ContentExponent,
    p: NormExponent,
    out: &mut impl Write,
) -> Result<Vec<VerificationRecord>> {
    let all = suite == Suite::All;
    let mut records = Vec::new();
    let mut report = |name: &str, rows: Vec<VerificationRecord>, out: &mut dyn Write| -> Result<()> {
        let worst = rows.last().map(|r| r.worst_ratio).unwrap_or(0.0);
        writeln!(out, "suite {name}: {} rows, worst ratio {worst}", rows.len())?;
        records.extend(rows);
        Ok(())
    };

    // In `all`, suites whose parameter regime excludes (rho, p) are skipped.
    let q = match p {
        NormExponent::Finite(q) => Some(q),
        NormExponent::Infinite => None,
    };
    let strong_ok = q.is_some_and(|q| strong_type_constant(q, rho).is_ok());
    let pp_ok = q.is_some_and(|q| strong_pp_constant(q).is_ok());
    if suite == Suite::Strong || (all && strong_ok) {
        report("strong", verify_strong_type(ifs, rho, finite(p, "strong")?, campaign)?, out)?;
    }
    if suite == Suite::Weak || all {
        report("weak", verify_weak_type(ifs, rho, campaign)?, out)?;
    }
    if suite == Suite::Pp || (all && pp_ok) {
        report("pp", verify_strong_pp(ifs, finite(p, "pp")?, campaign)?, out)?;
    }
    if suite == Suite::Wiener || all {
        report("wiener", verify_wiener(ifs, campaign)?, out)?;
    }
    if suite == Suite::Stein || all {
        let family = GeneratorConfig::new(campaign.depth, ValueDistribution::HeavyTail, 0.5, campaign.seed)?;
        let estimate = estimate_stein_constant(ifs, &family, campaign.trials)?;
        writeln!(out, "stein empirical constant {}", estimate.sup_ratio)?;
        if campaign.depth >= 2 {
            let depths = campaign.depth.saturating_sub(3).max(1)..=campaign.depth;
            let by_depth = stein_by_depth(ifs, &family, depths, campaign.trials)?;
            let shown: Vec<String> = by_depth.iter().map(|(d, s)| format!("{d}:{s}")).collect();
            let verdict = if stein_is_stable(&by_depth) { "stable" } else { "unstable" };
            writeln!(out, "stein by depth {} ({verdict})", shown.join(" "))?;
        }
        report("stein", estimate.records, out)?;
    }
    if suite == Suite::Equiv || (all && norm_constant(p, rho).is_ok()) {
        report("equiv", verify_norm_equivalence(ifs, rho, p, campaign)?, out)?;
    }
    if suite == Suite::Lebesgue || all {
        report("lebesgue", verify_lebesgue(ifs, campaign)?, out)?;
    }
    Ok(records)
}
