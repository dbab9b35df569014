use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use script_hmm::extraction::{extract, parse_narratives};
use script_hmm::pipeline::{
    branching_script, chain_script, evaluate, generate, load_domains, make_eval_set,
    model_accuracy, random_script, train_method, Baselines, Method, RunConfig,
};
use script_hmm::{model_file, Corpus, Emission, Hmm};

#[derive(Parser)]
#[command(
    name = "scripthmm",
    version,
    about = "Learn event scripts as Left-to-Right HMMs"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Settings file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn raw narratives into a corpus of event labels.
    Extract {
        /// Sentences one per line, narratives separated by blank lines.
        #[arg(long)]
        input: PathBuf,
        /// Corpus file to write (stdout if absent).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Learn a script from a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Model file to write.
        #[arg(long)]
        model: PathBuf,
        /// Also write the mined ordering constraints here.
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Held-out gap prediction accuracy per method and batch size.
    Evaluate {
        /// A corpus file, or a directory with one corpus file per domain.
        #[arg(long)]
        corpus: PathBuf,
        /// Score this model instead of training the model-based methods.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Write the tab-separated rows here as well.
        #[arg(long)]
        rows: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Sample a corpus from a known script.
    Generate {
        /// branching | chain:a,b,c | random:STATES,ALPHABET
        #[arg(long, default_value = "branching")]
        script: String,
        /// Sample from this model file instead.
        #[arg(long, conflicts_with = "script")]
        model: Option<PathBuf>,
        /// Number of narratives.
        #[arg(short, long, default_value_t = 200)]
        n: usize,
        /// Probability that a state emits nothing.
        #[arg(long, default_value_t = 0.15)]
        null: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Summarize a model: states, likeliest emissions, transitions.
    Inspect {
        #[arg(long)]
        model: PathBuf,
        /// Emissions listed per state.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
}

#[derive(Args, Default)]
struct Tuning {
    /// Batch sizes (comma-separated or repeated).
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Held-out fraction.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Method to run (repeatable).
    #[arg(long = "method")]
    methods: Vec<String>,
    /// `word word similarity` lines replacing lexical word similarity.
    #[arg(long)]
    similarity_matrix: Option<PathBuf>,
    /// Clustering stops below this similarity.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    kappa_q: Option<f64>,
    #[arg(long)]
    kappa_t: Option<f64>,
    #[arg(long)]
    kappa_c: Option<f64>,
    /// Baseline violation rate for constraint mining.
    #[arg(long)]
    p0: Option<f64>,
    /// exact | approx
    #[arg(long)]
    mode: Option<String>,
}

impl Tuning {
    fn settings(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let join = |xs: Vec<String>| xs.join(",");
        if !self.r.is_empty() {
            out.push(("r", join(self.r.iter().map(ToString::to_string).collect())));
        }
        if !self.methods.is_empty() {
            out.push(("method", join(self.methods.clone())));
        }
        let opt = |k: &'static str, v: Option<String>, out: &mut Vec<_>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        opt("split", self.split.map(|x| x.to_string()), &mut out);
        opt("seed", self.seed.map(|x| x.to_string()), &mut out);
        opt(
            "similarity_matrix",
            self.similarity_matrix
                .as_ref()
                .map(|p| p.display().to_string()),
            &mut out,
        );
        opt("threshold", self.threshold.map(|x| x.to_string()), &mut out);
        opt("kappa_q", self.kappa_q.map(|x| x.to_string()), &mut out);
        opt("kappa_t", self.kappa_t.map(|x| x.to_string()), &mut out);
        opt("kappa_c", self.kappa_c.map(|x| x.to_string()), &mut out);
        opt("p0", self.p0.map(|x| x.to_string()), &mut out);
        opt("mode", self.mode.clone(), &mut out);
        out
    }
}

fn run_config(file: Option<&Path>, tuning: &Tuning) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(f) = file {
        cfg.apply_file(f)?;
    }
    for (k, v) in tuning.settings() {
        cfg.set(k, &v)
            .with_context(|| format!("--{}", k.replace('_', "-")))?;
    }
    cfg.check()?;
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_extract(input: &Path, output: Option<&Path>, cfg: &RunConfig) -> Result<()> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let narratives = parse_narratives(&text);
    let ex = extract(&narratives, &cfg.extract)?;
    log::info!(
        "{} narrative(s), {} event type(s), {} sentence(s) dropped",
        ex.corpus.len(),
        ex.clustering.labels().len(),
        ex.dropped.len()
    );
    emit(output, &ex.corpus.to_text())
}

/// The model-based method and batch size a single training run uses.
fn single_run(cfg: &RunConfig) -> Result<(Method, usize)> {
    let hmm_methods: Vec<Method> = cfg.methods.iter().copied().filter(|m| m.is_hmm()).collect();
    let method = match hmm_methods.as_slice() {
        _ if cfg.methods == Method::ALL => Method::SemHmm,
        [m] => *m,
        _ => {
            return Err(script_hmm::Error::Config(
                "train needs exactly one model-based method".into(),
            )
            .into())
        }
    };
    let r = cfg.batch_sizes.last().copied().unwrap_or(10);
    Ok((method, r))
}

fn cmd_train(
    corpus: &Path,
    model: &Path,
    constraints: Option<&Path>,
    cfg: &RunConfig,
    tuning: &Tuning,
) -> Result<()> {
    let corpus = Corpus::load(corpus)?;
    let (mut method, r) = single_run(cfg)?;
    // an explicit --mode picks the scoring of the default method
    if method == Method::SemHmm && cfg.search.score.mode == script_hmm::scoring::ScoreMode::Approx {
        method = Method::SemHmmApprox;
    }
    if tuning.r.len() > 1 {
        log::warn!("train uses a single batch size; using r={r}");
    }
    let learned = train_method(method, &corpus, &cfg.search, r)?;
    model_file::save(&learned.hmm, &learned.counts, model)?;
    if let Some(p) = constraints {
        learned.constraints.save(p)?;
    }
    log::info!(
        "{method}, r={r}: {} states, {} transitions, {} constraint(s)",
        learned.hmm.n_states(),
        learned.hmm.n_transitions(),
        learned.constraints.len()
    );
    Ok(())
}

fn cmd_evaluate(
    corpus: &Path,
    model: Option<&Path>,
    rows: Option<&Path>,
    cfg: &RunConfig,
) -> Result<()> {
    let domains = load_domains(corpus)?;
    if let Some(model) = model {
        let (hmm, _) = model_file::load(model)?;
        let mut out = String::new();
        for (name, corpus) in &domains {
            let set = make_eval_set(corpus, cfg.split, cfg.seed)?;
            let baselines = Baselines::new(&set.train);
            let a = model_accuracy(
                &hmm,
                baselines.frequencies(),
                &set.test,
                cfg.search.em.horizon,
            )?;
            let frac = a
                .fraction()
                .map_or("-".to_string(), |f| format!("{:.1}", 100.0 * f));
            let _ = writeln!(out, "{name}\tmodel\t{}\t{}\t{frac}", a.correct, a.total);
        }
        return emit(None, &out);
    }
    let report = evaluate(&domains, cfg)?;
    emit(None, &report.table())?;
    if let Some(p) = rows {
        emit(Some(p), &report.rows())?;
    }
    Ok(())
}

fn parse_script(spec: &str, null: f64, seed: u64) -> Result<Hmm> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind {
        "branching" => branching_script(null)?,
        "chain" => {
            let labels: Vec<&str> = arg.split(',').filter(|s| !s.is_empty()).collect();
            if labels.is_empty() {
                bail!("chain script needs labels, e.g. chain:a,b,c");
            }
            chain_script(&labels, null)?
        }
        "random" => {
            let (s, a) = arg
                .split_once(',')
                .context("random script needs STATES,ALPHABET, e.g. random:5,4")?;
            random_script(seed, s.trim().parse()?, a.trim().parse()?, null)?
        }
        _ => bail!("unknown script {spec:?} (expected branching, chain:..., or random:...)"),
    })
}

fn inspect(hmm: &Hmm, top: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} states ({} interior), {} transitions",
        hmm.n_states(),
        hmm.n_states() - 2,
        hmm.n_transitions()
    );
    for &q in hmm.states() {
        let name = match q {
            Hmm::INITIAL => format!("{q} (start)"),
            Hmm::FINAL => format!("{q} (end)"),
            _ => q.to_string(),
        };
        let _ = writeln!(out, "state {name}");
        if !Hmm::is_sentinel(q) {
            let mut e: Vec<(&Emission, f64)> = hmm.emissions(q).collect();
            e.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let shown: Vec<String> = e
                .iter()
                .take(top)
                .map(|(o, p)| format!("{o} {p:.3}"))
                .collect();
            let more = if e.len() > top {
                format!(" (+{} more)", e.len() - top)
            } else {
                String::new()
            };
            let _ = writeln!(out, "  emits  {}{more}", shown.join(", "));
        }
        for (s, p) in hmm.successors(q) {
            let _ = writeln!(out, "  -> {s}  {p:.3}");
        }
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Extract {
            input,
            output,
            tuning,
        } => cmd_extract(input, output.as_deref(), &run_config(config, tuning)?),
        Command::Train {
            corpus,
            model,
            constraints,
            tuning,
        } => cmd_train(
            corpus,
            model,
            constraints.as_deref(),
            &run_config(config, tuning)?,
            tuning,
        ),
        Command::Evaluate {
            corpus,
            model,
            rows,
            tuning,
        } => cmd_evaluate(
            corpus,
            model.as_deref(),
            rows.as_deref(),
            &run_config(config, tuning)?,
        ),
        Command::Generate {
            script,
            model,
            n,
            null,
            seed,
            output,
        } => {
            let hmm = match model {
                Some(p) => model_file::load(p)?.0,
                None => parse_script(script, *null, *seed)?,
            };
            emit(output.as_deref(), &generate(&hmm, *n, *seed)?.to_text())
        }
        Command::Inspect { model, top } => {
            let (hmm, _) = model_file::load(model)?;
            emit(None, &inspect(&hmm, *top))
        }
    }
}

/// 1 for bad settings, 2 for everything else (unreadable or invalid data).
fn exit_code(e: &anyhow::Error) -> u8 {
    let usage = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<script_hmm::Error>(),
            Some(script_hmm::Error::Config(_) | script_hmm::Error::UnknownMethod { .. })
        )
    });
    if usage {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
