use std::io::Write;
use std::path::Path;

use rydsim_core::antiblockade::blockade_radius;
use rydsim_core::config::{ConfigError, RunConfig};
use rydsim_core::par;
use rydsim_core::spectra::{
    compare, density_scaling_fit, find_peaks, from_csv, main_peak, nominal_peak_positions, scan_spectrum, ModelKind,
    PeakReport, SpectrumScan,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command, Figure, GlobalArgs};
use crate::error::CliError;
use crate::output::{read_input, timestamp, ManifestInputs, OutputDir, RunManifest, Versions};

const REPRO_OMEGA_P_MHZ: f64 = 400.0;
const REPRO_DELTA_P_MHZ: f64 = 1250.0;
const FIG2_OMEGA_C_MHZ: f64 = 5.0;
const FIG3_OMEGA_C_MHZ: f64 = 4.0;
const FIG3D_DENSITIES_PER_CM3: [f64; 4] = [0.5e13, 1e13, 2e13, 4e13];

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = effective_config(&cli.global, &cli.command)?;
    let mixing = config.laser.mixing().abs();
    if mixing >= 0.5 {
        log::warn!("Ω_P/2Δ_P = {mixing:.3}: the dressed expansion is outside its small-mixing regime");
    }
    if cli.global.dry_run {
        return dry_run(&cli.command, &config);
    }
    let threads = match cli.global.threads {
        Some(0) => return Err(ConfigError { path: "--threads".into(), message: "must be >= 1".into() }.into()),
        other => other,
    };
    in_pool(threads, || execute(&cli.global, &cli.command, config))?
}

/// File (or built-in defaults), then `RYDSIM_*` variables, then flags.
pub fn effective_config(global: &GlobalArgs, command: &Command) -> Result<RunConfig, CliError> {
    let text = match &global.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError { path: String::new(), message: format!("{}: {e}", path.display()) })?,
        None => RunConfig::rubidium_default().to_json_pretty(),
    };
    let mut config = RunConfig::from_json_str(&text, std::env::vars())?;

    if let Some(seed) = global.seed {
        config.numerics.seed = seed;
    }
    if let Some(x) = global.scan_start_mhz {
        config.scan.start_mhz = x;
    }
    if let Some(x) = global.scan_stop_mhz {
        config.scan.stop_mhz = x;
    }
    if let Some(x) = global.scan_step_mhz {
        config.scan.step_mhz = x;
    }
    match command {
        Command::TwoAtomScan { c6_mhz_um6, .. } => {
            if let Some(c6) = c6_mhz_um6 {
                config.interaction.c6 = *c6;
            }
        }
        Command::AntiblockadeScan { c6_mhz_um6, density_per_cm3 } => {
            if let Some(c6) = c6_mhz_um6 {
                config.interaction.c6 = *c6;
            }
            if let Some(eta) = density_per_cm3 {
                config.vapor.density_per_cm3 = *eta;
            }
        }
        Command::Repro { figure } => {
            config.laser.omega_p = REPRO_OMEGA_P_MHZ;
            config.laser.delta_p = REPRO_DELTA_P_MHZ;
            config.laser.delta_c = 0.0;
            config.laser.omega_c = match figure {
                Figure::Fig2 => FIG2_OMEGA_C_MHZ,
                Figure::Fig3c | Figure::Fig3d => FIG3_OMEGA_C_MHZ,
            };
        }
        _ => {}
    }
    config.validate()?;
    if let Command::DensityScan { densities_per_cm3 } = command {
        for &eta in densities_per_cm3 {
            let mut probe = config.clone();
            probe.vapor.density_per_cm3 = eta;
            probe.validate()?;
        }
    }
    Ok(config)
}

fn dry_run(command: &Command, config: &RunConfig) -> Result<(), CliError> {
    let inputs = config.inputs()?;
    let frame = inputs.frame()?;
    let report = json!({
        "subcommand": command.name(),
        "dressed_frame": frame,
        "blockade_radius_um": blockade_radius(&inputs.interaction, &frame).ok(),
        "doppler_width_m_per_s": inputs.vapor.v_p(),
        "grid_points": config.grid()?.len(),
        "config": config,
    });
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; running on one thread");
    }
    Ok(f())
}

fn execute(global: &GlobalArgs, command: &Command, config: RunConfig) -> Result<(), CliError> {
    let started_utc = timestamp();
    let input_files = match command {
        Command::Compare { a, b, .. } => vec![read_input(a)?, read_input(b)?],
        Command::Peaks { scan } => vec![read_input(scan)?],
        _ => Vec::new(),
    };
    let inputs = ManifestInputs {
        subcommand: command.name(),
        arguments: serde_json::to_value(command).expect("arguments serialize"),
        seed: config.numerics.seed,
        config,
        input_files: input_files.iter().map(|(_, r)| r.clone()).collect(),
        versions: Versions::current(),
    };
    let digest = inputs.digest();
    let mut out = OutputDir::create(&global.out_dir)?;
    let texts: Vec<String> = input_files.into_iter().map(|(t, _)| t).collect();
    let ctx = Context { config: &inputs.config, digest: &digest };

    match command {
        Command::SingleAtomScan => {
            ctx.scan_to(&mut out, ModelKind::SingleExact, "single-atom-scan.csv")?;
        }
        Command::TwoAtomScan { no_interaction, .. } => {
            let model = if *no_interaction { ModelKind::TwoNonInteracting } else { ModelKind::TwoInteracting };
            ctx.scan_to(&mut out, model, "two-atom-scan.csv")?;
        }
        Command::AntiblockadeScan { .. } => {
            ctx.scan_to(&mut out, ModelKind::Eq1, "antiblockade-scan.csv")?;
        }
        Command::DensityScan { densities_per_cm3 } => {
            let report = ctx.density_series(&mut out, densities_per_cm3, "density-scan")?;
            out.write_json("density-scan.json", &report)?;
        }
        Command::CompareModels { a, b, threshold } => {
            let (ma, mb) = (ModelKind::from(*a), ModelKind::from(*b));
            let sa = ctx.scan_to(&mut out, ma, &format!("compare-models-a-{}.csv", ma.name()))?;
            let sb = ctx.scan_to(&mut out, mb, &format!("compare-models-b-{}.csv", mb.name()))?;
            let report = json!({ "a": ma, "b": mb, "comparison": compare(&sa, &sb, *threshold)? });
            out.write_json("compare-models.json", &report)?;
        }
        Command::Compare { threshold, .. } => {
            let (sa, sb) = (from_csv(&texts[0])?, from_csv(&texts[1])?);
            let comparison = compare(&sa, &sb, *threshold)?;
            emit(&format!("max_relative_deviation {:.6e} at {} MHz", comparison.max_relative_deviation, comparison.at_delta_c));
            out.write_json("comparison.json", &comparison)?;
        }
        Command::Peaks { scan } => {
            let peaks = find_peaks(&from_csv(&texts[0])?)?;
            emit(&serde_json::to_string_pretty(&peaks).expect("peaks serialize"));
            out.write_json(&format!("{}.peaks.json", file_stem(scan)), &peaks)?;
        }
        Command::Repro { figure } => ctx.repro(&mut out, *figure)?,
    }

    let manifest = RunManifest {
        inputs,
        inputs_digest: digest,
        threads: par::current_threads(),
        started_utc,
        finished_utc: timestamp(),
        outputs: out.records().to_vec(),
    };
    let path = out.write_json(&format!("manifest-{}.json", manifest.inputs.subcommand), &manifest)?;
    for record in &manifest.outputs {
        emit(&format!("{}  {}", record.sha256, record.file));
    }
    emit(&format!("manifest {}", path.display()));
    Ok(())
}

/// Print to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "scan".into(), |s| s.to_string_lossy().into_owned())
}

struct Context<'a> {
    config: &'a RunConfig,
    digest: &'a str,
}

impl Context<'_> {
    fn scan(&self, model: ModelKind, config: &RunConfig) -> Result<SpectrumScan, CliError> {
        log::info!("scanning {} over {} points", model.name(), config.grid()?.len());
        Ok(scan_spectrum(model, &config.grid()?, &config.inputs()?, &config.settings())?)
    }

    fn scan_to(&self, out: &mut OutputDir, model: ModelKind, name: &str) -> Result<SpectrumScan, CliError> {
        let scan = self.scan(model, self.config)?;
        out.write_scan(name, &scan, self.digest)?;
        Ok(scan)
    }

    fn density_series(&self, out: &mut OutputDir, densities: &[f64], prefix: &str) -> Result<Value, CliError> {
        let mut rows = Vec::new();
        let mut heights = Vec::new();
        for &eta in densities {
            let mut config = self.config.clone();
            config.vapor.density_per_cm3 = eta;
            let scan = self.scan(ModelKind::Eq1, &config)?;
            out.write_scan(&format!("{prefix}-eta-{eta:e}.csv"), &scan, self.digest)?;
            let peak = main_peak(&scan)?;
            heights.push((eta, peak.height));
            rows.push(json!({ "density_per_cm3": eta, "peak": peak }));
        }
        Ok(json!({ "peaks": rows, "fit": density_scaling_fit(&heights)? }))
    }

    fn repro(&self, out: &mut OutputDir, figure: Figure) -> Result<(), CliError> {
        let name = figure.name();
        match figure {
            Figure::Fig2 => {
                let exact = self.scan_to(out, ModelKind::SingleExact, &format!("{name}-single-exact.csv"))?;
                let pair = self.scan_to(out, ModelKind::TwoNonInteracting, &format!("{name}-two-noninteracting.csv"))?;
                let comparison = compare(&exact, &pair, 0.05)?;
                let report = json!({
                    "comparison": comparison,
                    "peaks_single_exact": peaks_or_error(&exact),
                    "peaks_two_noninteracting": peaks_or_error(&pair),
                });
                out.write_json(&format!("{name}-comparison.json"), &report)?;
            }
            Figure::Fig3c => {
                let free = self.scan_to(out, ModelKind::TwoNonInteracting, &format!("{name}-two-noninteracting.csv"))?;
                let int = self.scan_to(out, ModelKind::TwoInteracting, &format!("{name}-two-interacting.csv"))?;
                let (anti, _) = nominal_peak_positions(&self.config.laser);
                let i = nearest_index(&free, anti);
                let report = json!({
                    "anti_blockade_nominal_mhz": anti,
                    "compared_at_mhz": free.points[i].delta_c,
                    "enhancement": int.points[i].value / free.points[i].value,
                    "peaks_two_noninteracting": peaks_or_error(&free),
                    "peaks_two_interacting": peaks_or_error(&int),
                });
                out.write_json(&format!("{name}-report.json"), &report)?;
            }
            Figure::Fig3d => {
                let report = self.density_series(out, &FIG3D_DENSITIES_PER_CM3, name)?;
                out.write_json(&format!("{name}-fit.json"), &report)?;
            }
        }
        Ok(())
    }
}

fn nearest_index(scan: &SpectrumScan, x: f64) -> usize {
    let distance = |i: usize| (scan.points[i].delta_c - x).abs();
    (0..scan.len()).min_by(|&a, &b| distance(a).total_cmp(&distance(b))).unwrap_or(0)
}

fn peaks_or_error(scan: &SpectrumScan) -> Value {
    match find_peaks(scan) {
        Ok(peaks) => serde_json::to_value::<&Vec<PeakReport>>(&peaks).expect("peaks serialize"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}
