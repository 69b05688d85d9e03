//! Command-line front end. Every subcommand is a thin wrapper over library
//! calls; no arithmetic happens here.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{
    build_report, bundled_reference_dataset, emit_report, ingest_measurements_csv, repro_checks,
    write_measurements_csv, SimConfig, REFERENCE_FIT,
};
use crate::pipeline::{at_supply, simulate_parts, to_datasets, SimulatedPart};
use crate::protocols::{
    run_hold_sweep, run_read_sweep, run_wlvm_sweep, word_line_voltage_margin, Pattern, SerTest,
};
use crate::radiation::{generate_events, write_event_log, AlphaSource};
use crate::sram_model::{ArraySampler, CellType, CellTypeName, SeuRateLaw};
use crate::stats::{calibrate_parts, predict_ser, CalibrationOptions, FitArtifact, WeightMode};
use crate::units::Millivolts;

#[derive(Debug, Parser)]
#[command(
    name = "sram-ser",
    version,
    about = "Virtual SRAM test chip and word-line voltage margin SER calibration",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build virtual parts, run SER tests and margin sweeps, calibrate, report.
    Simulate(SimulateArgs),
    /// Run one voltage sweep on a freshly sampled block.
    Sweep(SweepArgs),
    /// Run one accelerated SER test on a freshly sampled block.
    SerTest(SerTestArgs),
    /// Fit SER against word-line voltage margin from a measurement CSV.
    Calibrate(CalibrateArgs),
    /// Predict SER from a saved fit and word-line voltage margins.
    Predict(PredictArgs),
    /// Fit the bundled measurements and compare with the reference fit.
    PaperRepro(PaperReproArgs),
    /// Calibrate and write fit, predictions and plot data.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Combined,
    StatOnly,
    Linear,
}

impl From<WeightArg> for WeightMode {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Combined => WeightMode::Combined,
            WeightArg::StatOnly => WeightMode::StatOnly,
            WeightArg::Linear => WeightMode::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PatternArg {
    Zeros,
    Ones,
    Checkerboard,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Zeros => Pattern::Zeros,
            PatternArg::Ones => Pattern::Ones,
            PatternArg::Checkerboard => Pattern::Checkerboard,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    WordLine,
    Hold,
    Read,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "combined")]
    weight_mode: WeightArg,
    /// Geometric flux uncertainty for parts without their own (fraction).
    #[arg(long, default_value_t = 0.03)]
    geom_unc: f64,
}

impl FitArgs {
    fn options(&self) -> CalibrationOptions {
        CalibrationOptions {
            weight_mode: self.weight_mode.into(),
            default_rel_geom_unc: self.geom_unc,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation config JSON (defaults to the bundled one).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    parts: Option<usize>,
    /// Sampling period, seconds.
    #[arg(long)]
    ts: Option<f64>,
    /// Irradiation time, seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Sweep step, mV.
    #[arg(long)]
    delta_v: Option<i32>,
    /// Nominal supply, mV.
    #[arg(long)]
    vdd: Option<i32>,
    #[arg(long, value_enum)]
    pattern: Option<PatternArg>,
    /// Also run hold and read supply sweeps.
    #[arg(long)]
    control_sweeps: bool,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BlockArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "SS")]
    cell_type: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Common part offset added to every threshold mean, mV.
    #[arg(long, default_value_t = 0.0)]
    part_offset: f64,
    #[arg(long, value_enum, default_value = "zeros")]
    pattern: PatternArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    block: BlockArgs,
    #[arg(long, value_enum, default_value = "word-line")]
    kind: SweepKind,
    #[arg(long, default_value_t = 10)]
    delta_v: i32,
    /// Write the step log CSV here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SerTestArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Uniform upset rate, µSEU/(bit·s); defaults to the config's ground truth.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    geom_factor: f64,
    #[arg(long, default_value_t = 1800.0)]
    ts: f64,
    #[arg(long, default_value_t = 432_000.0)]
    duration: f64,
    /// Write the per-window CSV log here.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Write the injected event list here.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    /// Write the fit JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    fit: PathBuf,
    /// Word-line voltage margin in volts; repeatable.
    #[arg(long)]
    v_wlvm: Vec<f64>,
    /// Measurement CSV; every (part, type) with a v_mewlvm_mV row is predicted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PaperReproArgs {
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Measurement CSV (defaults to the bundled measurements).
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit status.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::SerTest(a) => ser_test(a, out),
        Command::Calibrate(a) => calibrate(a, out),
        Command::Predict(a) => predict(a, out),
        Command::PaperRepro(a) => repro(a, out),
        Command::Report(a) => report(a, out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn load_config(path: &Option<PathBuf>) -> Result<SimConfig> {
    match path {
        Some(p) => SimConfig::load(p),
        None => Ok(SimConfig::bundled()),
    }
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn print_fit(out: &mut dyn Write, fit: &FitArtifact) -> Result<()> {
    writeln!(out, "weight mode: {}", fit.weight_mode).map_err(io_err)?;
    writeln!(out, "m        = {:.4} ± {:.4} µSEU/(bit·s·V)", fit.m, fit.sigma_m).map_err(io_err)?;
    writeln!(out, "b        = {:.4} ± {:.4} µSEU/(bit·s)", fit.b, fit.sigma_b).map_err(io_err)?;
    writeln!(out, "cov(m,b) = {:.6}", fit.cov_mb).map_err(io_err)?;
    let red = fit.chi2_red.map_or("n/a".to_string(), |r| format!("{r:.3}"));
    writeln!(out, "chi2     = {:.2}, nu = {}, chi2/nu = {red}", fit.chi2, fit.nu).map_err(io_err)?;
    writeln!(out, "R^2      = {:.4} ({} points)", fit.r2, fit.n_points).map_err(io_err)?;
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = load_config(&a.config)?;
    if let Some(n) = a.parts {
        cfg.n_parts = n;
        if cfg.geom_factors.as_ref().is_some_and(|g| g.len() != n) {
            cfg.geom_factors = None;
        }
    }
    if let Some(ts) = a.ts {
        cfg.ts = ts;
    }
    if let Some(d) = a.duration {
        cfg.duration = d;
    }
    if let Some(dv) = a.delta_v {
        cfg.delta_v = Millivolts(dv);
    }
    if let Some(p) = a.pattern {
        cfg.pattern = p.into();
    }
    if let Some(v) = a.vdd {
        cfg = at_supply(&cfg, Millivolts(v));
    }
    let parts = simulate_parts(&cfg, a.seed, a.control_sweeps)?;
    let datasets = to_datasets(&parts);

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let measurements = a.out.join("measurements.csv");
    write_measurements_csv(&datasets, create(&measurements)?)?;
    let truth = a.out.join("truth.csv");
    write_truth(&parts, create(&truth)?)?;

    let bundle = build_report(&datasets, &a.fit.options())?.with_simulation(&parts);
    let mut manifest = vec![measurements, truth];
    manifest.extend(emit_report(&bundle, &a.out)?);

    writeln!(out, "simulated {} parts x {} blocks (seed {})", parts.len(), parts.first().map_or(0, |p| p.blocks.len()), a.seed)
        .map_err(io_err)?;
    print_fit(out, &bundle.fit)?;
    for f in manifest {
        writeln!(out, "wrote {}", f.display()).map_err(io_err)?;
    }
    Ok(0)
}

fn write_truth<W: Write>(parts: &[SimulatedPart], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "part_id", "cell_type", "offset_mV", "geom_factor", "true_ser", "measured_ser", "n_tot", "injected_events",
    ])?;
    for p in parts {
        for b in &p.blocks {
            w.write_record([
                p.part_id.clone(),
                b.cell_type.to_string(),
                p.offset_mv.to_string(),
                p.geom_factor.to_string(),
                b.true_ser.to_string(),
                b.ser.ser.to_string(),
                b.ser.n_tot.to_string(),
                b.ser.injected_events.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("truth.csv", e))?;
    Ok(())
}

fn sample_block(b: &BlockArgs, cfg: &SimConfig, law: SeuRateLaw) -> Result<crate::sram_model::MemoryArray> {
    let cell_type: CellTypeName = b.cell_type.parse()?;
    ArraySampler::new(&cfg.variation)
        .geometry(cfg.geometry)
        .law(law)
        .part_id("P1")
        .sample(CellType::bundled(cell_type), b.part_offset, b.seed)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(&a.block.config)?;
    let mut array = sample_block(&a.block, &cfg, SeuRateLaw::default())?;
    let pattern = a.block.pattern.into();
    let dv = Millivolts(a.delta_v);
    let result = match a.kind {
        SweepKind::WordLine => run_wlvm_sweep(&mut array, dv, pattern)?,
        SweepKind::Hold => run_hold_sweep(&mut array, dv, pattern)?,
        SweepKind::Read => run_read_sweep(&mut array, dv, pattern)?,
    };
    writeln!(
        out,
        "{} {} sweep: mu = {:.2} mV, sigma = {:.2} mV, se = {:.3} mV over {} cells",
        result.cell_type,
        result.swept_quantity.as_str(),
        result.mu,
        result.sigma,
        result.se_mean,
        result.n_cells()
    )
    .map_err(io_err)?;
    if matches!(a.kind, SweepKind::WordLine) {
        let margin = word_line_voltage_margin(array.v_dd_nominal().as_f64(), result.mu)?;
        writeln!(out, "word-line voltage margin = {margin:.2} mV").map_err(io_err)?;
    }
    if let Some(path) = &a.log {
        result.write_log(create(path)?)?;
        writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
    }
    Ok(0)
}

fn ser_test(a: SerTestArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(&a.block.config)?;
    let law = match a.rate {
        Some(rate) => SeuRateLaw::Uniform { rate },
        None => cfg.ground_truth,
    };
    let mut array = sample_block(&a.block, &cfg, law)?;
    let rate = array.cells().first().map_or(0.0, |c| c.true_seu_rate);
    let source = AlphaSource::new(rate, a.geom_factor)?;
    let test = SerTest::new(a.ts, a.duration)?.with_pattern(a.block.pattern.into());
    let event_seed = crate::pipeline::derive_seed(a.block.seed, &[2]);
    if let Some(path) = &a.events {
        let events = generate_events(&array, &source, test.n_windows() as f64 * test.ts, event_seed)?;
        write_event_log(&events, create(path)?)?;
    }
    let m = test.run(&mut array, &source, event_seed)?;
    writeln!(
        out,
        "{} SER = {:.4} µSEU/(bit·s) from {} upsets in {} windows of {} s ({} injected)",
        m.cell_type, m.ser, m.n_tot, m.n_windows, m.ts, m.injected_events
    )
    .map_err(io_err)?;
    match m.rel_stat_unc {
        Some(r) => writeln!(out, "statistical uncertainty = {:.2}%", 100.0 * r),
        None => writeln!(out, "statistical uncertainty undefined (no upsets)"),
    }
    .map_err(io_err)?;
    if let Some(path) = &a.log {
        m.write_log(create(path)?)?;
        writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
    }
    Ok(0)
}

fn calibrate(a: CalibrateArgs, out: &mut dyn Write) -> Result<i32> {
    let datasets = ingest_measurements_csv(&a.input)?;
    let opts = a.fit.options();
    let fit = FitArtifact::new(calibrate_parts(&datasets, &opts)?, opts.weight_mode);
    print_fit(out, &fit)?;
    if let Some(path) = &a.out {
        fs::write(path, fit.to_json()?).map_err(|e| Error::io(path, e))?;
        writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
    }
    Ok(0)
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.fit).map_err(|e| Error::io(&a.fit, e))?;
    let fit = FitArtifact::from_json(&text)?.fit();
    let mut rows: Vec<(String, String, f64)> = a.v_wlvm.iter().map(|&v| (String::new(), String::new(), v)).collect();
    if let Some(input) = &a.input {
        for ds in ingest_measurements_csv(input)? {
            for (t, rec) in &ds.types {
                if let Some(m) = &rec.margin {
                    let v = word_line_voltage_margin(ds.v_dd.as_f64(), m.v_mewlvm_mv)? / 1000.0;
                    rows.push((ds.part_id.clone(), t.to_string(), v));
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("nothing to predict: pass --v-wlvm or --input".into()));
    }

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["part_id", "cell_type", "v_wlvm_V", "ser_pred", "sigma", "below_floor"])?;
        for (part, t, v) in &rows {
            let p = predict_ser(&fit, *v);
            w.write_record([
                part.clone(),
                t.clone(),
                v.to_string(),
                p.ser.to_string(),
                p.sigma.to_string(),
                p.below_floor.to_string(),
            ])?;
        }
        w.flush().map_err(io_err)?;
    }
    match &a.out {
        Some(path) => {
            fs::write(path, &buf).map_err(|e| Error::io(path, e))?;
            writeln!(out, "wrote {} predictions to {}", rows.len(), path.display()).map_err(io_err)?;
        }
        None => out.write_all(&buf).map_err(io_err)?,
    }
    Ok(0)
}

fn repro(a: PaperReproArgs, out: &mut dyn Write) -> Result<i32> {
    let opts = a.fit.options();
    let fit = calibrate_parts(&bundled_reference_dataset(), &opts)?;
    let artifact = FitArtifact::new(fit, opts.weight_mode);
    print_fit(out, &artifact)?;
    let r = REFERENCE_FIT;
    writeln!(out, "reference: m = {} ± {}, b = {} ± {}, chi2 = {} for nu = {}, R^2 = {}", r.m, r.sigma_m, r.b, r.sigma_b, r.chi2, r.nu, r.r2)
        .map_err(io_err)?;
    writeln!(
        out,
        "delta:     m {:+.4}, b {:+.4}, chi2 {:+.2}, R^2 {:+.4}",
        fit.m - r.m,
        fit.b - r.b,
        fit.chi2 - r.chi2,
        fit.r2 - r.r2
    )
    .map_err(io_err)?;
    let checks = repro_checks(&fit);
    for c in &checks {
        let tag = if c.pass() { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] {} = {:.4} in [{}, {}]", c.name, c.value, c.lo, c.hi).map_err(io_err)?;
    }
    let ok = checks.iter().all(|c| c.pass());
    writeln!(out, "{}", if ok { "PASS" } else { "FAIL" }).map_err(io_err)?;
    Ok(if ok { 0 } else { 1 })
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let datasets = match &a.input {
        Some(p) => ingest_measurements_csv(p)?,
        None => bundled_reference_dataset(),
    };
    let bundle = build_report(&datasets, &a.fit.options())?;
    print_fit(out, &bundle.fit)?;
    for f in emit_report(&bundle, &a.out)? {
        writeln!(out, "wrote {}", f.display()).map_err(io_err)?;
    }
    Ok(0)
}
