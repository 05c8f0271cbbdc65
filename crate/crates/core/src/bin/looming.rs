use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand};

use looming::io::{
    write_csv_row, write_debug_maps, write_frames, write_overlay, write_target_lines, FrameDir,
    CSV_HEADER, DEFAULT_ARROW_SCALE, SIDECAR_NAME,
};
use looming::params::parse_weights;
use looming::{
    default_params, normalize, ChannelWeights, ModelParams, Pipeline, PipelineOptions, Scenario,
    ScenarioKind,
};

#[derive(Parser)]
#[command(
    name = "looming",
    version,
    about = "Looming detection on PGM frame sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scenario into a directory of PGM frames.
    Synth(SynthArgs),
    /// Run the detector over a frame directory.
    Run(RunArgs),
    /// Peak responses of the looming disk over contrast and expansion-rate grids.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario config file (`kind = looming_disk` plus overrides).
    #[arg(long, conflicts_with = "kind")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: looming_disk, translating_bar or looming_over_stripes.
    #[arg(long)]
    kind: Option<ScenarioKind>,
    /// Extra `key=value` scenario overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Swap foreground and background gray levels.
    #[arg(long)]
    invert: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Parameter file; keys it omits keep their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Six channel weights `v+,v-,w1+,w2-,w1-,w2+`.
    #[arg(long, value_parser = parse_weights_arg, allow_hyphen_values = true)]
    weights: Option<ChannelWeights>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Write a PPM overlay per frame with target boxes and direction arrows.
    #[arg(long)]
    overlay: bool,
    /// Arrow length in pixels per unit of cluster energy.
    #[arg(long, default_value_t = DEFAULT_ARROW_SCALE)]
    arrow_scale: f64,
    /// Dump the intermediate maps of every frame as PGM.
    #[arg(long)]
    debug_maps: bool,
    /// Report targets only on frames with a collision warning.
    #[arg(long)]
    gate_targets: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75, 1.0])]
    contrasts: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0])]
    rates: Vec<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_weights_arg(s: &str) -> Result<ChannelWeights, String> {
    parse_weights(s).map(ChannelWeights::from_array)
}

type CliResult<T> = Result<T, String>;

fn ctx<T, E: std::fmt::Display>(r: Result<T, E>, what: impl std::fmt::Display) -> CliResult<T> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("looming: error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let mut s = match (&a.scenario, a.kind) {
        (Some(path), _) => {
            let text = ctx(fs::read_to_string(path), path.display())?;
            ctx(Scenario::load(&text), path.display())?
        }
        (None, Some(kind)) => Scenario::new(kind),
        (None, None) => return Err("one of --scenario or --kind is required".into()),
    };
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        s.set(k.trim(), v.trim())
            .map_err(|e| format!("--set {kv}: {e}"))?;
    }
    if a.invert {
        s.inverted = !s.inverted;
    }
    let seq = ctx(s.generate(), "scenario")?;
    ctx(write_frames(&a.out, &seq.frames), a.out.display())?;
    let sidecar = a.out.join(SIDECAR_NAME);
    ctx(fs::write(&sidecar, s.to_config_string()), sidecar.display())?;
    if seq.clamped {
        eprintln!(
            "looming: warning: disk radius clamped at {} px",
            s.max_radius()
        );
    }
    Ok(())
}

impl ModelArgs {
    /// Parameters from the file and flags. Without a file the frame size
    /// follows `dims`; with one it must agree with it.
    fn resolve(&self, dims: Option<(usize, usize)>) -> CliResult<ModelParams> {
        let mut p = match &self.params {
            Some(path) => {
                let text = ctx(fs::read_to_string(path), path.display())?;
                let mut p = default_params();
                ctx(p.apply(&text), path.display())?;
                if let Some((w, h)) = dims {
                    if (p.frame_width, p.frame_height) != (w, h) {
                        return Err(format!(
                            "{}: frame size {}x{} does not match input {w}x{h}",
                            path.display(),
                            p.frame_width,
                            p.frame_height
                        ));
                    }
                }
                p
            }
            None => {
                let mut p = default_params();
                if let Some((w, h)) = dims {
                    p.frame_width = w;
                    p.frame_height = h;
                }
                p
            }
        };
        if let Some(k) = self.top_k {
            p.top_k = k;
        }
        if let Some(w) = self.weights {
            p.weights = w;
        }
        ctx(p.validated(), "parameters")
    }
}

fn run(a: RunArgs) -> CliResult<()> {
    let dir = ctx(FrameDir::open(&a.input), a.input.display())?;
    if dir.is_empty() {
        return Err(format!("{}: no .pgm frames", a.input.display()));
    }
    let mut frames = dir.raw();
    let first = ctx(frames.next().expect("non-empty"), a.input.display())?;
    let params = a.model.resolve(Some(first.dims()))?;
    let options = PipelineOptions {
        gate_targets: a.gate_targets,
        debug_maps: a.debug_maps,
        ..PipelineOptions::default()
    };

    ctx(fs::create_dir_all(&a.out), a.out.display())?;
    let overlay_dir = a.out.join("overlay");
    let debug_dir = a.out.join("debug");
    if a.overlay {
        ctx(fs::create_dir_all(&overlay_dir), overlay_dir.display())?;
    }
    let params_path = a.out.join("params.cfg");
    ctx(
        fs::write(&params_path, params.to_config_string()),
        params_path.display(),
    )?;

    let csv_path = a.out.join("timeseries.csv");
    let jsonl_path = a.out.join("targets.jsonl");
    let mut csv = BufWriter::new(ctx(File::create(&csv_path), csv_path.display())?);
    let mut jsonl = BufWriter::new(ctx(File::create(&jsonl_path), jsonl_path.display())?);
    ctx(writeln!(csv, "{CSV_HEADER}"), csv_path.display())?;

    let mut pipe = ctx(Pipeline::new(params, options), "parameters")?;
    ctx(pipe.prime(&normalize(&first)), dir.paths()[0].display())?;
    for (frame, path) in frames.zip(&dir.paths()[1..]) {
        let raw = ctx(frame, path.display())?;
        let report = ctx(pipe.step(&normalize(&raw)), path.display())?;
        ctx(write_csv_row(&mut csv, &report), csv_path.display())?;
        ctx(
            write_target_lines(&mut jsonl, &report),
            jsonl_path.display(),
        )?;
        if a.overlay {
            let p = overlay_dir.join(format!("frame_{:04}.ppm", report.t));
            ctx(
                write_overlay(&p, &raw, &report.targets, a.arrow_scale),
                p.display(),
            )?;
        }
        if let Some(maps) = &report.maps {
            ctx(
                write_debug_maps(&debug_dir, report.t, maps),
                debug_dir.display(),
            )?;
        }
    }
    ctx(csv.flush(), csv_path.display())?;
    ctx(jsonl.flush(), jsonl_path.display())?;
    Ok(())
}

/// Largest |u| and out over a whole run of `s`.
fn peak_response(s: &Scenario, params: &ModelParams) -> looming::Result<(f64, f64)> {
    let frames = s.generate()?.frames;
    let mut pipe = Pipeline::new(params.clone(), PipelineOptions::default())?;
    let normalized: Vec<_> = frames.iter().map(normalize).collect();
    let reports = pipe.run(normalized.iter())?;
    Ok(reports.iter().fold((0.0, 0.5), |(u, o), r| {
        (f64::max(u, r.u.abs()), f64::max(o, r.out))
    }))
}

fn sweep(a: SweepArgs) -> CliResult<()> {
    let base = Scenario::looming_disk();
    let params = a.model.resolve(Some((base.width, base.height)))?;
    let mut jobs: Vec<(&str, f64, Scenario)> = Vec::new();
    for &c in &a.contrasts {
        jobs.push(("contrast", c, base.clone().with_contrast(c)));
    }
    for &k in &a.rates {
        let mut s = base.clone();
        s.stimulus_k = k;
        jobs.push(("rate", k, s));
    }
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(_, _, s)| scope.spawn(|| peak_response(s, &params)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut table = String::from("axis,value,peak_abs_u,peak_out\n");
    for ((axis, value, _), res) in jobs.iter().zip(results) {
        let (u, out) = ctx(res, format!("{axis} {value}"))?;
        table.push_str(&format!(
            "{axis},{value},{},{}\n",
            looming::io::format_sig(u, 9),
            looming::io::format_sig(out, 9)
        ));
    }
    match &a.out {
        Some(path) => ctx(fs::write(path, table), path.display()),
        None => ctx(std::io::stdout().write_all(table.as_bytes()), "stdout"),
    }
}
