use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context as _;
use linksim_core::antenna::{format_pattern_table, lobe_peaks, sample_pattern, Cut};
use linksim_core::network::{
    assign_segments, format_interference_report, interference_profile, load_layout,
    point_on_boresight, InterfererEntry, SiteLayout, SiteTable, INTER_SITE_DISTANCES_CSV,
};
use linksim_core::simulator::{format_ber_csv, run_sweep};

use crate::config::{parse_array, Config, ConfigError, InterferenceSource};
use crate::manifest::RunManifest;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SATURATED: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub workers: usize,
    pub started: Instant,
}

impl Context {
    fn write(&self, outputs: &mut Vec<String>, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(name.to_string());
        Ok(())
    }

    fn finish(&self, command: &str, outputs: Vec<String>) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.into(),
            seed: self.config.seed,
            workers: self.workers,
            duration_s: self.started.elapsed().as_secs_f64(),
            outputs,
            config: self.config.clone(),
        };
        let path = manifest
            .write(&self.out)
            .with_context(|| format!("writing manifest into {}", self.out.display()))?;
        println!("manifest: {}", path.display());
        Ok(())
    }
}

fn cut_name(cut: Cut) -> &'static str {
    match cut {
        Cut::Horizontal => "horizontal",
        Cut::Vertical => "vertical",
    }
}

pub fn pattern(ctx: &Context) -> Result<u8, CliError> {
    let p = ctx.config.antenna.pattern();
    p.validate().map_err(config_err)?;
    if ctx.config.pattern.cuts.is_empty() {
        return Err(config_err("pattern.cuts is empty"));
    }
    let mut outputs = Vec::new();
    for &cut in &ctx.config.pattern.cuts {
        let rows = sample_pattern(&p, cut, ctx.config.pattern.step_deg)
            .map_err(|e| config_err(format!("pattern.step_deg: {e}")))?;
        let name = format!("pattern_{}.csv", cut_name(cut));
        ctx.write(&mut outputs, &name, &format_pattern_table(&rows))?;
        let (angle, gain) = rows
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, r| if r.1 > best.1 { r } else { best });
        println!(
            "{} cut: {} rows, peak {gain:.2} dBi at {angle:+.1} deg -> {name}",
            cut_name(cut),
            rows.len()
        );
        if cut == Cut::Vertical {
            if let Some((a, g)) = lobe_peaks(&rows).get(1) {
                println!("  strongest secondary lobe in cut: {g:.2} dBi at {a:+.1} deg");
            }
        }
    }
    match p.upper_sidelobe_peak() {
        Some((el, g)) => println!("upper sidelobe: {g:.2} dBi at {el:+.1} deg elevation"),
        None => println!("upper sidelobe: not modeled"),
    }
    ctx.finish("pattern", outputs)?;
    Ok(0)
}

pub(crate) fn load_site_layout(config: &Config) -> Result<SiteLayout, CliError> {
    let text = match &config.network.site_table {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("network.site_table {}: {e}", path.display())))?,
        None => INTER_SITE_DISTANCES_CSV.to_string(),
    };
    let table = SiteTable::parse(&text).map_err(|e| config_err(format!("site table: {e}")))?;
    load_layout(&table).map_err(|e| config_err(format!("site table: {e}")))
}

/// Mobile position and the interferers seen there.
type Profile = ((f64, f64), Vec<InterfererEntry<f64>>);

pub(crate) fn profile(config: &Config, layout: &SiteLayout) -> Result<Profile, CliError> {
    let net = &config.network;
    let pattern = config.antenna.pattern();
    pattern.validate().map_err(config_err)?;
    let model = net.path_loss_model();
    model.validate().map_err(config_err)?;
    let ms = match net.ms_position_km {
        Some([x, y]) => (x, y),
        None => point_on_boresight(layout, &net.serving_sector, net.ms_distance_km)
            .map_err(|e| config_err(format!("network.serving_sector: {e}")))?,
    };
    let assignment = assign_segments(layout);
    let entries = interference_profile(
        layout,
        &assignment,
        &pattern,
        &model,
        &net.serving_sector,
        ms,
        &net.budget(),
    )
    .map_err(config_err)?;
    Ok((ms, entries))
}

pub fn network(ctx: &Context) -> Result<u8, CliError> {
    let layout = load_site_layout(&ctx.config)?;
    let (ms, entries) = profile(&ctx.config, &layout)?;
    let mut outputs = Vec::new();
    ctx.write(&mut outputs, "interference_report.csv", &format_interference_report(&entries))?;
    let mut sites = String::from("site,x_km,y_km\n");
    for s in layout.sites() {
        let _ = writeln!(sites, "{},{:.4},{:.4}", s.id, s.x_km, s.y_km);
    }
    ctx.write(&mut outputs, "site_positions.csv", &sites)?;

    let worst = layout
        .listed_pairs()
        .map(|(_, _, listed, placed)| ((placed - listed) / listed).abs())
        .fold(0.0, f64::max);
    println!(
        "{} sites placed; worst listed-distance deviation {:.3}%",
        layout.sites().len(),
        100.0 * worst
    );
    println!(
        "serving {} with mobile at ({:.3}, {:.3}) km: {} co-channel interferers",
        ctx.config.network.serving_sector,
        ms.0,
        ms.1,
        entries.len()
    );
    for e in &entries {
        println!(
            "  {:<14} {:>8.3} km  gain {:>7.2} dBi  rx {:>8.2} dBm  INR {:>7.2} dB",
            e.sector, e.distance_km, e.gain_dbi, e.rx_dbm, e.inr_db
        );
    }
    ctx.finish("network", outputs)?;
    Ok(0)
}

/// Interferer INRs for the simulation, per the `[interference]` source.
pub(crate) fn resolve_inrs(config: &Config) -> Result<Vec<f64>, CliError> {
    let itf = &config.interference;
    Ok(match itf.source {
        InterferenceSource::None => Vec::new(),
        InterferenceSource::Common => vec![itf.inr_db; itf.count],
        InterferenceSource::List => itf.inr_list_db.clone(),
        InterferenceSource::Network => {
            let layout = load_site_layout(config)?;
            profile(config, &layout)?.1.iter().map(|e| e.inr_db).collect()
        }
    })
}

pub fn simulate(ctx: &Context) -> Result<u8, CliError> {
    let cfg = &ctx.config;
    if cfg.sim.arrays.is_empty() {
        return Err(config_err("sim.arrays is empty"));
    }
    let mut seen = HashSet::new();
    let mut arrays = Vec::new();
    for a in &cfg.sim.arrays {
        let dims = parse_array(a)?;
        if !seen.insert(dims) {
            return Err(config_err(format!("sim.arrays lists {}x{} twice", dims.0, dims.1)));
        }
        arrays.push(dims);
    }
    let inrs = resolve_inrs(cfg)?;
    let sims: Vec<_> = arrays
        .iter()
        .map(|&(n_t, n_r)| {
            let s = cfg.sim_config(n_t, n_r, inrs.clone());
            s.validate().map_err(config_err).map(|_| s)
        })
        .collect::<Result<_, _>>()?;
    println!(
        "{} interferer(s), {:?} receiver, {:?} scheme, {} worker(s)",
        inrs.len(),
        cfg.sim.receiver,
        cfg.sim.scheme,
        ctx.workers
    );

    let mut outputs = Vec::new();
    let mut saturated = 0usize;
    for sim in &sims {
        let label = format!("{}x{}", sim.n_t, sim.n_r);
        let curve = run_sweep::<f64>(sim, ctx.workers).map_err(config_err)?;
        let name = format!("ber_{label}.csv");
        ctx.write(&mut outputs, &name, &format_ber_csv(&curve))?;
        for p in &curve.points {
            println!(
                "{label} snr {:>6.2} dB: ber {:.4e} [{:.4e}, {:.4e}] trials {} errors {}{}",
                p.snr_db,
                p.ber,
                p.ci_low,
                p.ci_high,
                p.trials,
                p.bit_errors,
                if p.saturated { " (saturated)" } else { "" }
            );
            saturated += usize::from(p.saturated);
        }
    }
    ctx.finish("simulate", outputs)?;
    if saturated > 0 {
        eprintln!(
            "warning: {saturated} point(s) reached sim.stopping.max_trials before the confidence target"
        );
        return Ok(EXIT_SATURATED);
    }
    Ok(0)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

/// Writes one output file and the command's manifest.
pub fn write_output(ctx: &Context, command: &str, name: &str, contents: &str) -> Result<(), CliError> {
    let mut outputs = Vec::new();
    ctx.write(&mut outputs, name, contents)?;
    ctx.finish(command, outputs)
}
