use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use logtract::geometry::{point_to_polyline_distance, set_default_tolerance};
use logtract::hairs::{anchor_for, build_hair, HairAudit, HairConfig};
use logtract::lemmas::{run_campaign, CampaignConfig};
use logtract::model::ModelFile;
use logtract::normalize::{choose_rescaling, postsingular_orbit, transform_for, verify_w_preimage};
use logtract::render::{render_escape_time, render_hair_overlay, RenderJob, RenderMode, Window};
use logtract::symbolic::{forward_address, track_orbit, ExternalAddress, DEFAULT_ESCAPE_RE};
use logtract::{ComplexPoint, Error, LogTransform};

#[derive(Parser)]
#[command(name = "logtract", version, about = "Logarithmic transforms, external addresses and hairs")]
struct Cli {
    /// Default geometric tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integer seed for randomized runs, or a point `re,im` in log
    /// coordinates for `address` and `hair`.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<Seed>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a scale K and print the normalized transform.
    Normalize {
        model: PathBuf,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-9)]
        settle_tol: f64,
        /// Also write the model file with its certified scale_K.
        #[arg(long)]
        write_model: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// External address of the orbit of a point in log coordinates.
    Address {
        model: PathBuf,
        #[arg(long, default_value_t = 40)]
        horizon: usize,
        #[arg(long, default_value_t = DEFAULT_ESCAPE_RE)]
        escape_re: f64,
        /// Print JSON instead of tokens.
        #[arg(long)]
        json: bool,
    },
    /// Pullback approximation of the hair with a given address.
    Hair {
        model: PathBuf,
        /// Address tokens `base:branch`, comma or space separated. Without
        /// it the orbit of `--seed re,im` supplies the address.
        #[arg(long)]
        address: Option<ExternalAddress>,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0.1)]
        mesh: f64,
        #[arg(long, default_value_t = 1500.0)]
        truncation: f64,
        #[arg(long, default_value_t = 200)]
        audit_samples: usize,
        #[arg(long, default_value_t = 40)]
        audit_horizon: usize,
        /// Write one CSV file per curve into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Numerical checks of the tract lemmas.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Escape-time image as binary PPM.
    Render {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Plane)]
        mode: Mode,
        #[arg(long, value_parser = parse_point, default_value = "0,0")]
        center: ComplexPoint,
        #[arg(long, default_value_t = 8.0)]
        width: f64,
        #[arg(long, default_value_t = 8.0)]
        height: f64,
        /// Image size `WxH`.
        #[arg(long, value_parser = parse_size, default_value = "400x400")]
        size: (usize, usize),
        #[arg(long, default_value_t = 60)]
        horizon: usize,
        /// Image path.
        #[arg(long, short)]
        output: PathBuf,
        /// Hair address for `--mode overlay`.
        #[arg(long)]
        address: Option<ExternalAddress>,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Randomized serpentine campaign with non-tract controls.
    Lemmas {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Plane,
    Log,
    Overlay,
}

fn parse_point(s: &str) -> Result<ComplexPoint, String> {
    let (re, im) = s.split_once(',').ok_or("expected re,im")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(ComplexPoint::new(p(re)?, p(im)?))
}

#[derive(Clone, Copy)]
enum Seed {
    Rng(u64),
    Point(ComplexPoint),
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    if s.contains(',') {
        parse_point(s).map(Seed::Point)
    } else {
        s.parse().map(Seed::Rng).map_err(|e| format!("{s:?}: {e}"))
    }
}

fn seed_point(seed: Option<Seed>) -> Result<ComplexPoint, Failure> {
    match seed {
        Some(Seed::Point(p)) => Ok(p),
        _ => Err(Failure::Usage(Error::Configuration(
            "expected --seed re,im".into(),
        ))),
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let p = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(w)?, p(h)?))
}

enum Failure {
    /// Usage, parse or I/O problem: exit 1.
    Usage(Error),
    /// A certificate or verdict did not hold: exit 2.
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::InvalidModel(_)
            | Error::Configuration(_)
            | Error::Precondition(_)
            | Error::Resolution { .. } => Failure::Usage(e),
            other => Failure::Verdict(other.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn emit<T: Serialize>(value: &T, out: &Output) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    match &out.output {
        Some(path) => std::fs::write(path, text + "\n").map_err(Error::from)?,
        None => writeln!(std::io::stdout().lock(), "{text}").map_err(Error::from)?,
    }
    Ok(())
}

fn load(path: &Path) -> Result<ModelFile, Error> {
    let text = std::fs::read_to_string(path)?;
    ModelFile::parse(&text).map_err(|e| Error::InvalidModel(format!("{}: {e}", path.display())))
}

fn verdict(ok: bool, what: &str) -> CliResult {
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict(what.into()))
    }
}

fn normalize(model: &Path, horizon: usize, settle_tol: f64, write_model: Option<&Path>, out: &Output) -> CliResult {
    let file = load(model)?;
    let entire = file.model()?;
    let report = postsingular_orbit(&entire, horizon, settle_tol)?;
    if !report.all_converged() {
        emit(&serde_json::json!({ "certified": false, "report": report }), out)?;
        return Err(Failure::Verdict("postsingular orbits did not converge".into()));
    }
    let n = choose_rescaling(&entire, &report)?;
    let preimage = verify_w_preimage(&n.transform, 10_000);
    emit(
        &serde_json::json!({
            "certified": preimage.holds,
            "transform": n.transform.summary(),
            "rescaled_radius": n.rescaled_radius,
            "expansion": n.expansion,
            "w_preimage": preimage,
            "report": report,
        }),
        out,
    )?;
    if let Some(path) = write_model {
        let f = ModelFile::from_model(&entire, Some(n.transform.scale_k));
        std::fs::write(path, serde_json::to_string_pretty(&f).map_err(Error::from)?).map_err(Error::from)?;
    }
    verdict(preimage.holds, "tract sample maps outside W")
}

fn address(model: &Path, at: ComplexPoint, horizon: usize, escape_re: f64, json: bool) -> CliResult {
    let lt = transform_for(&load(model)?)?;
    let record = track_orbit(&lt, at, horizon, escape_re)?;
    let tokens: Vec<String> = record
        .steps
        .iter()
        .map(|s| s.tract.map_or_else(|| "-".to_string(), |l| l.to_string()))
        .collect();
    if json {
        let address = forward_address(&record).ok();
        let out = serde_json::json!({
            "seed": at,
            "address": address,
            "tokens": tokens,
            "verdict": record.verdict,
            "steps": record.steps,
        });
        emit(&out, &Output { output: None })?;
    } else {
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{}", tokens.join(" "))
            .and_then(|_| writeln!(stdout, "verdict: {}", record.verdict))
            .map_err(Error::from)?;
    }
    verdict(record.verdict.is_escaping(), "orbit is not escaping")
}

/// Labels of the orbit of `p` up to overflow, padded up to `len` with the
/// branch-0 tract of the last base. Later labels are not determined in
/// double precision.
fn address_from_point(lt: &LogTransform, p: ComplexPoint, len: usize) -> Result<ExternalAddress, Failure> {
    let record = track_orbit(lt, p, len, DEFAULT_ESCAPE_RE)?;
    let address = forward_address(&record).map_err(|e| Failure::Verdict(e.to_string()))?;
    let mut labels = address.labels().to_vec();
    let last = labels[labels.len() - 1];
    labels.resize(len.max(labels.len()), logtract::TractLabel::new(last.base, 0));
    Ok(ExternalAddress::new(labels)?)
}

#[allow(clippy::too_many_arguments)]
fn hair(
    model: &Path,
    address: Option<ExternalAddress>,
    seed: Option<Seed>,
    depth: usize,
    cfg: HairConfig,
    samples: usize,
    horizon: usize,
    csv_dir: Option<&Path>,
    out: &Output,
) -> CliResult {
    let lt = transform_for(&load(model)?)?;
    let start = match (&address, seed) {
        (None, _) | (_, Some(Seed::Point(_))) => Some(seed_point(seed)?),
        _ => None,
    };
    let address = match (address, start) {
        (Some(a), _) => a,
        (None, Some(p)) => address_from_point(&lt, p, depth + 6)?,
        (None, None) => unreachable!(),
    };
    let anchor = anchor_for(&lt, &address)?;
    let hair = build_hair(&lt, &address, &anchor, depth, &cfg)?;
    let audit = HairAudit::new(&lt, &hair, samples, horizon)?;
    let point_distance = start.map(|p| point_to_polyline_distance(p, &hair.curves[0]));
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        for (j, c) in hair.curves.iter().enumerate() {
            let f = std::fs::File::create(dir.join(format!("curve_{j:03}.csv"))).map_err(Error::from)?;
            c.write_csv(f)?;
        }
    }
    emit(
        &serde_json::json!({
            "hair": hair,
            "audit": audit,
            "passed": audit.passed(),
            "start_point_distance": point_distance,
        }),
        out,
    )?;
    verdict(audit.passed(), "hair audit failed")
}

#[allow(clippy::too_many_arguments)]
fn render(
    model: PathBuf,
    mode: Mode,
    window: Window,
    resolution: (usize, usize),
    horizon: usize,
    output_path: PathBuf,
    address: Option<ExternalAddress>,
    depth: usize,
) -> CliResult {
    let mut job = RenderJob {
        model_path: model,
        window,
        resolution,
        horizon,
        mode: match mode {
            Mode::Plane => RenderMode::PlaneEscapeTime,
            Mode::Log => RenderMode::LogPlaneEscapeTime,
            Mode::Overlay => RenderMode::HairOverlay,
        },
        output_path,
    };
    if job.mode != RenderMode::HairOverlay {
        let (image, stats) = render_escape_time(&job)?;
        image.write_ppm(&job.output_path)?;
        return emit(&stats, &Output { output: None });
    }
    let lt = transform_for(&load(&job.model_path)?)?;
    let address = match address {
        Some(a) => a,
        None => ExternalAddress::constant(logtract::TractLabel::new(0, 0), depth + 6)?,
    };
    let anchor = anchor_for(&lt, &address)?;
    let hair = build_hair(&lt, &address, &anchor, depth, &HairConfig::default())?;
    job.mode = RenderMode::HairOverlay;
    let (image, stats, audit) = render_hair_overlay(&job, &hair)?;
    image.write_ppm(&job.output_path)?;
    emit(
        &serde_json::json!({ "stats": stats, "audit": audit }),
        &Output { output: None },
    )?;
    verdict(audit.fraction >= 0.99, "overlay pixel audit below 99%")
}

fn run(cli: Cli) -> CliResult {
    if let Some(t) = cli.tolerance {
        set_default_tolerance(t)?;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Configuration(e.to_string()))?;
    }
    match cli.command {
        Command::Normalize {
            model,
            horizon,
            settle_tol,
            write_model,
            out,
        } => normalize(&model, horizon, settle_tol, write_model.as_deref(), &out),
        Command::Address {
            model,
            horizon,
            escape_re,
            json,
        } => address(&model, seed_point(cli.seed)?, horizon, escape_re, json),
        Command::Hair {
            model,
            address,
            depth,
            mesh,
            truncation,
            audit_samples,
            audit_horizon,
            csv_dir,
            out,
        } => {
            let cfg = HairConfig {
                mesh,
                truncation_re: truncation,
                ..HairConfig::default()
            };
            hair(&model, address, cli.seed, depth, cfg, audit_samples, audit_horizon, csv_dir.as_deref(), &out)
        }
        Command::Verify {
            what: VerifyCommand::Lemmas { trials, out },
        } => {
            let report = run_campaign(&CampaignConfig {
                trials,
                seed: match cli.seed {
                    None => 0,
                    Some(Seed::Rng(s)) => s,
                    Some(Seed::Point(_)) => {
                        return Err(Failure::Usage(Error::Configuration(
                            "verify lemmas takes an integer --seed".into(),
                        )))
                    }
                },
                ..CampaignConfig::default()
            })?;
            emit(&report, &out)?;
            verdict(report.passed(), "lemma campaign found a counterexample or a silent control")
        }
        Command::Render {
            model,
            mode,
            center,
            width,
            height,
            size,
            horizon,
            output,
            address,
            depth,
        } => render(
            model,
            mode,
            Window {
                center,
                width,
                height,
            },
            size,
            horizon,
            output,
            address,
            depth,
        ),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verdict(msg)) => {
            eprintln!("verdict: {msg}");
            ExitCode::from(2)
        }
    }
}
