use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use fdao_core::fdao::gamma_rows;
use fdao_core::ingest::{to_dataset, AbsorbanceSets, EffectSample};
use fdao_core::montecarlo::{run_experiment, ExperimentRow};
use fdao_core::prng::derive_seed;
use fdao_core::{analyze, AnalysisConfig, FdaoReport};

use crate::cli::{FitArgs, IngestArgs, SimulateArgs};
use crate::error::{CliError, Result};
use crate::format::{full, human, human_opt};
use crate::input::{hex_digest, load, parse_treated, read_absorbance, read_dataset, read_manifest};
use crate::settings::{FitSettings, PlanSettings};

pub const REPORT_COLUMNS: &str = "param\tmedian\tci_lo\tci_hi\trange_lo\trange_hi\tSk\tKr\tupsilon\tm_kept\tdropped";
pub const DGAMMA_COLUMNS: &str = "i,x_i,delta_i,omega_ji,dgamma_ji,kept_flag";
pub const SIMULATE_COLUMNS: &str =
    "plan\tr\tparam\tsimulated\tpredicted\tci_lo\tci_hi\trange_lo\trange_hi\tloops\tSk\tKr\tupsilon\tstop_reason";

fn os_seed() -> Result<u64> {
    let mut buf = [0u8; 8];
    getrandom::getrandom(&mut buf).map_err(CliError::Entropy)?;
    Ok(u64::from_le_bytes(buf))
}

fn resolve_seed(explicit: Option<u64>) -> Result<u64> {
    match explicit {
        Some(seed) => Ok(seed),
        None => os_seed(),
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if (0.0..=0.5).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(CliError::input(format!("alpha must lie in [0, 0.5], got {alpha}")))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

// ---------------------------------------------------------------- fit

pub fn fit(args: &FitArgs) -> Result<()> {
    let config = load(&args.config)?;
    let data_file = load(&args.data)?;
    let settings =
        FitSettings::parse(&config.text).map_err(|e| CliError::input(format!("{}: {e}", config.path.display())))?;
    let data = read_dataset(&data_file)?;
    let seed = resolve_seed(args.seed.or(settings.seed))?;
    let mut analysis = AnalysisConfig::new(settings.simplex.clone());
    if let Some(alpha) = args.alpha.or(settings.alpha) {
        analysis.alpha = check_alpha(alpha)?;
    }
    let report = analyze(settings.spec, &data, &analysis, seed)?;
    eprintln!("seed = {seed}, stop_reason = {}, loops = {}", report.stop_reason, report.loops);

    let header = FitHeader { config_sha256: &config.sha256, data_sha256: &data_file.sha256, report: &report };
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            let mut w = create(&dir.join("report.tsv"))?;
            write_fit_report(&mut w, &header)?;
            w.flush()?;
            for (j, name) in settings.spec.param_names().iter().enumerate() {
                let mut w = create(&dir.join(format!("dgamma_{name}.csv")))?;
                write_dgamma_dump(&mut w, &header, &data, j)?;
                w.flush()?;
            }
        }
        None => {
            let mut w = output(None)?;
            write_fit_report(&mut w, &header)?;
            w.flush()?;
        }
    }
    Ok(())
}

struct FitHeader<'a> {
    config_sha256: &'a str,
    data_sha256: &'a str,
    report: &'a FdaoReport,
}

impl FitHeader<'_> {
    fn write(&self, w: &mut dyn Write) -> io::Result<()> {
        let r = self.report;
        writeln!(w, "# fdao fit")?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# data_sha256: {}", self.data_sha256)?;
        writeln!(w, "# seed: {}", r.seed)?;
        writeln!(w, "# model: {}", r.spec.family())?;
        writeln!(w, "# stop_reason: {}", r.stop_reason)?;
        writeln!(w, "# loops: {}", r.loops)?;
        writeln!(w, "# sr: {}", full(r.sr))?;
        writeln!(w, "# alpha: {}", full(r.alpha))?;
        let flagged: Vec<&str> = r.flagged().map(|p| p.name.as_str()).collect();
        writeln!(w, "# flagged: {}", if flagged.is_empty() { "none".into() } else { flagged.join(",") })
    }
}

fn write_fit_report(w: &mut dyn Write, header: &FitHeader<'_>) -> Result<()> {
    header.write(w)?;
    writeln!(w, "{REPORT_COLUMNS}")?;
    for p in &header.report.params {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.name,
            human(p.median),
            human(p.ci95.0),
            human(p.ci95.1),
            human(p.range.0),
            human(p.range.1),
            human_opt(p.sk),
            human_opt(p.kr),
            human(p.upsilon),
            p.m_kept,
            p.dropped
        )?;
    }
    Ok(())
}

fn write_dgamma_dump(w: &mut dyn Write, header: &FitHeader<'_>, data: &fdao_core::Dataset, j: usize) -> Result<()> {
    let report = header.report;
    header.write(w)?;
    let param = &report.params[j];
    writeln!(w, "# param: {}", param.name)?;
    writeln!(w, "# theta_opt: {}", full(param.theta_opt))?;
    writeln!(w, "# dgamma_median: {}", full(param.dgamma_median))?;
    writeln!(w, "# dgamma_ci95: {} {}", full(param.dgamma_ci95.0), full(param.dgamma_ci95.1))?;
    writeln!(w, "{DGAMMA_COLUMNS}")?;
    for row in gamma_rows(report.spec, data, &report.fit, j)? {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.index,
            full(row.x),
            full(row.delta),
            full(row.omega),
            row.dgamma.map_or_else(|| "NA".into(), full),
            u8::from(row.dgamma.is_some())
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------- simulate

struct PlanRun {
    name: String,
    path: PathBuf,
    sha256: String,
    seed: u64,
    settings: PlanSettings,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let alpha = args.alpha.map(check_alpha).transpose()?;
    let mut parsed = Vec::with_capacity(args.plan.len());
    for path in &args.plan {
        let loaded = load(path)?;
        let settings = PlanSettings::parse(&loaded.text).map_err(|e| prefix_error(e, &loaded.path))?;
        parsed.push((path.clone(), loaded.sha256, settings));
    }
    // entropy is only drawn when some plan has no seed of its own
    let needs_base = args.seed.is_some() || parsed.iter().any(|(_, _, s)| s.seed.is_none());
    let base_seed = if needs_base { Some(resolve_seed(args.seed)?) } else { None };

    let mut runs = Vec::with_capacity(parsed.len());
    for (k, (path, sha256, mut settings)) in parsed.into_iter().enumerate() {
        // --seed overrides plan seeds; otherwise a plan's own seed wins
        let seed = match (args.seed, settings.seed, base_seed) {
            (None, Some(own), _) => own,
            (_, _, Some(base)) => derive_seed(base, k as u64),
            (_, None, None) | (Some(_), _, None) => unreachable!("base seed is resolved when needed"),
        };
        settings.plan.seed = seed;
        if let Some(a) = alpha {
            settings.plan.alpha = a;
        }
        let name = path.file_stem().map_or_else(|| format!("plan{}", k + 1), |s| s.to_string_lossy().into_owned());
        runs.push(PlanRun { name, path, sha256, seed, settings });
    }

    // plans run in parallel; results are gathered back in plan order
    let results: Vec<Result<ExperimentRow>> = thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|run| scope.spawn(move || run_experiment(&run.settings.plan).map_err(CliError::from)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::input("experiment thread panicked"))))
            .collect()
    });

    let mut w = output(args.out.as_deref())?;
    writeln!(w, "# fdao simulate")?;
    match base_seed {
        Some(seed) => writeln!(w, "# seed: {seed}")?,
        None => writeln!(w, "# seed: per plan")?,
    }
    for (k, run) in runs.iter().enumerate() {
        writeln!(w, "# plan {}: {} sha256 {} seed {}", k + 1, run.path.display(), run.sha256, run.seed)?;
    }
    writeln!(w, "{SIMULATE_COLUMNS}")?;
    for (run, result) in runs.iter().zip(results) {
        let row = result.map_err(|e| prefix_error(e, &run.path))?;
        eprintln!("{}: seed = {}, stop_reason = {}, loops = {}", run.name, run.seed, row.stop_reason, row.loops);
        for p in &row.params {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                run.name,
                run.settings.plan.replicates,
                p.name,
                human(p.simulated),
                human(p.predicted),
                human(p.ci95.0),
                human(p.ci95.1),
                human(p.range.0),
                human(p.range.1),
                row.loops,
                human_opt(p.sk),
                human_opt(p.kr),
                human(p.upsilon),
                row.stop_reason
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn prefix_error(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Core(core) => CliError::Core(core),
        other => CliError::input(format!("{}: {other}", path.display())),
    }
}

// ---------------------------------------------------------------- ingest

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let mut treated: Vec<(f64, PathBuf)> = args.treated.iter().map(|a| parse_treated(a)).collect::<Result<_>>()?;
    let mut digests = Vec::new();
    if let Some(manifest) = &args.manifest {
        let loaded = load(manifest)?;
        digests.push(loaded.sha256.clone());
        treated.extend(read_manifest(&loaded)?);
    }
    if treated.is_empty() {
        return Err(CliError::input("no treated wells: pass --treated <conc>=<file> or --manifest"));
    }

    let blanks = load(&args.blanks)?;
    let live = load(&args.live)?;
    digests.push(blanks.sha256.clone());
    digests.push(live.sha256.clone());
    let blank_values = read_absorbance(&blanks)?;
    let live_values = read_absorbance(&live)?;
    let mut groups = Vec::with_capacity(treated.len());
    for (conc, path) in &treated {
        let loaded = load(path)?;
        digests.push(loaded.sha256.clone());
        groups.push((*conc, read_absorbance(&loaded)?));
    }
    let inputs_sha256 = hex_digest(digests.join("\n").as_bytes());
    let sets = AbsorbanceSets::new(blank_values, live_values, groups)?;

    // concentrations are independent
    let samples: Vec<EffectSample> = thread::scope(|scope| {
        let handles: Vec<_> = (0..sets.treated().len())
            .map(|k| {
                let sets = &sets;
                scope.spawn(move || sets.effect_sample(k).expect("index in range"))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("ingest worker")).collect()
    });
    let dataset = to_dataset(&samples)?;

    let mut w = output(args.out.as_deref())?;
    writeln!(w, "# fdao ingest")?;
    writeln!(w, "# inputs_sha256: {inputs_sha256}")?;
    writeln!(w, "# seed: none")?;
    for s in &samples {
        writeln!(
            w,
            "# concentration {}: raw {} kept {} dropped {}",
            full(s.concentration),
            s.raw_count(),
            s.kept(),
            s.dropped_nonfinite
        )?;
    }
    writeln!(w, "x,y")?;
    for (x, y) in dataset.points() {
        writeln!(w, "{},{}", full(x), full(y))?;
    }
    w.flush()?;

    eprintln!("concentration\traw\tkept\tdropped");
    for s in &samples {
        eprintln!("{}\t{}\t{}\t{}", human(s.concentration), s.raw_count(), s.kept(), s.dropped_nonfinite);
    }
    Ok(())
}
