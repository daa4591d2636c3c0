//! `raldpc`: file-based workflows for rate-adaptive LDPC reconciliation.
//!
//! Exit codes: 0 success, 1 a reconciliation block failed, 2 usage or
//! argument error, 3 I/O or parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use raldpc::adapt::AlphaTable;
use raldpc::bits::{format_blocks, parse_blocks};
use raldpc::charact::{build_alpha_table, characterization_manifest, CharacterizeConfig};
use raldpc::codec::{encode_syndrome, BpDecoder, DecoderConfig};
use raldpc::manifest::{matrix_hash, sha256_hex, RunManifest};
use raldpc::qkdsim::{simulate_link, LinkParams};
use raldpc::tanner::{girth_profile, load_alist, peg_construct, save_alist, DegreeProfile};
use raldpc::Error;

mod range;

#[derive(Parser, Debug)]
#[command(name = "raldpc", version, about = "Rate-adaptive LDPC reconciliation toolkit")]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a mother parity-check matrix by progressive edge growth.
    GenMatrix(GenMatrixArgs),
    /// Girth of the Tanner graph restricted to leading column prefixes.
    GirthProfile(GirthArgs),
    /// Monte-Carlo FER characterization into a distillation-efficiency table.
    Characterize(CharacterizeArgs),
    /// Correct Bob's key blocks against syndromes of Alice's blocks.
    Reconcile(ReconcileArgs),
    /// Secure-key ratio and throughput versus fiber distance.
    SimulateLink(SimulateArgs),
}

#[derive(Args, Debug)]
struct GenMatrixArgs {
    #[arg(long, default_value_t = 1024)]
    checks: usize,
    #[arg(long, default_value_t = 5120)]
    vars: usize,
    /// `interleaved45` or `uniform:<degree>`.
    #[arg(long, default_value = "interleaved45")]
    profile: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GirthArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    widths: Vec<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CharacterizeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "5120,4096,3072,2048")]
    widths: Vec<usize>,
    /// Error-rate grid `from:to:step` in absolute probabilities.
    #[arg(long, default_value = "0.010:0.030:0.001")]
    errors: String,
    #[arg(long, default_value_t = 1000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DecoderConfig::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    /// Run every cell for the full frame count.
    #[arg(long)]
    no_early_abort: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReconcileArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    width: usize,
    /// Alice's key blocks, one `0`/`1` line per block.
    #[arg(long)]
    alice: PathBuf,
    /// Bob's noisy key blocks, aligned with Alice's.
    #[arg(long)]
    bob: PathBuf,
    /// Channel crossover probability used as decoder prior.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = DecoderConfig::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// `key = value` parameter file; flags below override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    attenuation_db_per_km: Option<f64>,
    #[arg(long)]
    pulse_rate_hz: Option<f64>,
    #[arg(long)]
    detector_efficiency: Option<f64>,
    #[arg(long)]
    dark_count_prob: Option<f64>,
    #[arg(long)]
    visibility: Option<f64>,
    #[arg(long)]
    mean_photon_number: Option<f64>,
    #[arg(long)]
    sifting_factor: Option<f64>,
    #[arg(long)]
    table: PathBuf,
    /// Distance sweep `from:to:step` in km.
    #[arg(long, default_value = "0:110:5")]
    distances: String,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Io(String),
    Reconciliation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest");
    PathBuf::from(p)
}

fn file_hash(path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

fn parse_profile(spec: &str, n: usize) -> Result<DegreeProfile, Failure> {
    if spec == "interleaved45" {
        return Ok(DegreeProfile::interleaved_4_5(n));
    }
    if let Some(d) = spec.strip_prefix("uniform:") {
        let d: usize = d
            .parse()
            .map_err(|_| Failure::Usage(format!("bad degree in profile {spec:?}")))?;
        return Ok(DegreeProfile::uniform(n, d));
    }
    Err(Failure::Usage(format!(
        "unknown profile {spec:?}, expected interleaved45 or uniform:<d>"
    )))
}

fn gen_matrix(a: &GenMatrixArgs) -> CmdResult {
    let profile = parse_profile(&a.profile, a.vars)?;
    let h = peg_construct(a.checks, a.vars, &profile, a.seed)?;
    save_alist(&h, &a.out)?;
    let mut man = RunManifest::new("gen-matrix");
    man.push("checks", a.checks)
        .push("vars", a.vars)
        .push("profile", &a.profile)
        .push("seed", a.seed)
        .push("edges", h.num_edges())
        .push("matrix_sha256", matrix_hash(&h));
    write_text(&manifest_path(&a.out), &man.to_text())?;
    println!(
        "wrote {} ({}x{}, {} edges)",
        a.out.display(),
        h.num_checks(),
        h.num_vars(),
        h.num_edges()
    );
    Ok(())
}

fn girth(a: &GirthArgs) -> CmdResult {
    let h = load_alist(&a.matrix)?;
    let prof = girth_profile(&h, &a.widths)?;
    let mut csv = String::from("width,girth\n");
    for (w, g) in prof {
        csv.push_str(&format!("{w},{g}\n"));
    }
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn characterize(a: &CharacterizeArgs) -> CmdResult {
    let grid = range::parse_range(&a.errors).map_err(Failure::Usage)?;
    let h = load_alist(&a.matrix)?;
    let mut cfg = CharacterizeConfig::new(a.frames, a.seed);
    cfg.decoder.max_iterations = a.max_iterations;
    cfg.early_abort = !a.no_early_abort;
    let ch = build_alpha_table(&h, &a.widths, &grid, &cfg)?;
    write_text(&a.out, &ch.table.to_csv())?;

    let mut man = characterization_manifest(&h, ch.table.widths(), &grid, &cfg);
    man.push("matrix_file_sha256", file_hash(&a.matrix)?)
        .push("errors", &a.errors)
        .push("undetected_errors", ch.total_undetected());
    write_text(&manifest_path(&a.out), &man.to_text())?;

    for (w, lo, hi) in ch.fer_monotonicity_violations() {
        eprintln!("warning: FER of width {w} drops beyond its CI between {lo} and {hi}");
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn reconcile(a: &ReconcileArgs) -> CmdResult {
    let h = load_alist(&a.matrix)?;
    let prefix = h.prefix(a.width)?;
    let alice = parse_blocks(&read_text(&a.alice)?, a.width)?;
    let bob = parse_blocks(&read_text(&a.bob)?, a.width)?;
    if alice.len() != bob.len() {
        return Err(Failure::Usage(format!(
            "alice has {} blocks, bob has {}",
            alice.len(),
            bob.len()
        )));
    }
    let cfg = DecoderConfig {
        max_iterations: a.max_iterations,
        ..DecoderConfig::new(a.p)?
    }
    .validated()?;

    let mut decoder = BpDecoder::new(&prefix);
    let mut corrected = Vec::with_capacity(bob.len());
    let mut failures = 0;
    for (i, (ka, kb)) in alice.iter().zip(&bob).enumerate() {
        let syndrome = encode_syndrome(&prefix, ka)?;
        let out = decoder.decode(kb, &syndrome, &cfg)?;
        let flips = out.corrected_key.hamming_distance(kb);
        let status = if out.success { "success" } else { "failure" };
        println!(
            "block {i}: {status} iterations={} flips={flips} unsatisfied={}",
            out.iterations_used, out.unsatisfied_checks
        );
        if !out.success {
            failures += 1;
        }
        corrected.push(out.corrected_key);
    }
    write_text(&a.out, &format_blocks(&corrected))?;

    let mut man = RunManifest::new("reconcile");
    man.push("matrix_file_sha256", file_hash(&a.matrix)?)
        .push("width", a.width)
        .push("alice_sha256", file_hash(&a.alice)?)
        .push("bob_sha256", file_hash(&a.bob)?)
        .push("p", a.p)
        .push("max_iterations", a.max_iterations)
        .push("blocks", alice.len())
        .push("failures", failures);
    write_text(&manifest_path(&a.out), &man.to_text())?;

    if failures > 0 {
        Err(Failure::Reconciliation)
    } else {
        Ok(())
    }
}

fn simulate(a: &SimulateArgs) -> CmdResult {
    let mut params = match &a.params {
        Some(path) => LinkParams::from_text(&read_text(path)?)?,
        None => LinkParams::default(),
    };
    let overrides = [
        (a.attenuation_db_per_km, &mut params.attenuation_db_per_km),
        (a.pulse_rate_hz, &mut params.pulse_rate_hz),
        (a.detector_efficiency, &mut params.detector_efficiency),
        (a.dark_count_prob, &mut params.dark_count_prob),
        (a.visibility, &mut params.visibility),
        (a.mean_photon_number, &mut params.mean_photon_number),
        (a.sifting_factor, &mut params.sifting_factor),
    ];
    for (flag, slot) in overrides {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    params.validate()?;
    let distances = range::parse_range(&a.distances).map_err(Failure::Usage)?;
    let table = AlphaTable::from_csv(&read_text(&a.table)?)?;
    let report = simulate_link(&params, &table, &distances)?;
    write_text(&a.out, &report.to_csv())?;

    let mut man = RunManifest::new("simulate-link");
    man.push("table_sha256", file_hash(&a.table)?)
        .push("distances", &a.distances);
    for line in params.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            man.push(k, v);
        }
    }
    write_text(&manifest_path(&a.out), &man.to_text())?;
    println!("wrote {} ({} rows)", a.out.display(), report.rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match &cli.command {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::GirthProfile(a) => girth(a),
        Command::Characterize(a) => characterize(a),
        Command::Reconcile(a) => reconcile(a),
        Command::SimulateLink(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Reconciliation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
