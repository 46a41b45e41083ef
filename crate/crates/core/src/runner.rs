//! Scenario orchestration and table output.
//!
//! Every run writes comma-separated tables plus a `<command>.meta.toml`
//! sidecar holding the resolved scenario and derived quantities. Zero
//! intensities are written as `null`. Outputs contain no timestamps, so a
//! seeded run is byte-for-byte reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use csv::Writer;

use crate::acoustics::{absorption_coeff, max_range, range_resolution, sound_speed};
use crate::detect::{detect_ping, DetectionResult, HypothesisModel};
use crate::error::{Error, Result};
use crate::geometry::{bin_center, BinLayout};
use crate::level::Level;
use crate::nullmodel::{NullModel, NullModelReturn};
use crate::raysim::{mean_over_pings, BeamReturn, Component, PingReturn, Simulator};
use crate::scenario::Scenario;

/// Command-line style adjustments applied on top of a scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rays: Option<usize>,
    pub pings: Option<usize>,
    pub gamma: Option<f64>,
    pub no_noise: bool,
}

impl Overrides {
    /// Applies the overrides and re-validates.
    pub fn apply(&self, scenario: &Scenario) -> Result<Scenario> {
        let mut s = scenario.clone();
        if let Some(seed) = self.seed {
            s.run.seed = seed;
        }
        if let Some(rays) = self.rays {
            s.sonar.num_rays = rays;
        }
        if let Some(pings) = self.pings {
            s.run.num_pings = pings;
        }
        if let Some(gamma) = self.gamma {
            s.detection.gamma = gamma;
        }
        if self.no_noise {
            s.run.noise_enabled = false;
        }
        s.validate()?;
        Ok(s)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(io_err(out))
}

fn writer(path: &Path) -> Result<Writer<fs::File>> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(Writer::from_writer(file))
}

fn finish(mut w: Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(io_err(path))
}

fn fmt_level(l: Level) -> String {
    l.to_string()
}

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

/// Expected returns for every receive beam of the scenario.
pub fn null_returns(s: &Scenario) -> Result<Vec<NullModelReturn>> {
    let model = NullModel::new(
        &s.env,
        &s.sonar_config(),
        s.pose(),
        s.transmitter(),
        s.null_model.clone(),
    )?;
    let layout = model.layout()?;
    s.beams().into_iter().map(|b| model.expected(b, &layout)).collect()
}

pub fn simulator(s: &Scenario) -> Result<Simulator> {
    Simulator::new(
        &s.env,
        &s.sonar_config(),
        s.pose(),
        s.transmitter(),
        s.scene()?,
        s.sim_options(),
    )
}

/// Runs `num_pings` seeded pings. Ping `p` is fully determined by the seed and `p`.
pub fn simulate(s: &Scenario) -> Result<Vec<PingReturn>> {
    let sim = simulator(s)?;
    let pings: Vec<_> = (0..s.run.num_pings as u64).map(|p| sim.ping(s.run.seed, p)).collect();
    for p in &pings {
        for b in &p.beams {
            if b.total.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite power in ping {} beam {}",
                    p.ping_index, b.beam_id
                )));
            }
        }
    }
    Ok(pings)
}

/// Derived quantities recorded in every metadata sidecar.
fn derived(s: &Scenario) -> Result<toml::Table> {
    let sonar = s.sonar_config();
    let c = sound_speed(&s.env)?;
    let layout = BinLayout::new(sonar.bin_length_m, max_range(c, sonar.ping_rate_hz))?;
    let mut t = toml::Table::new();
    t.insert("sound_speed_m_s".into(), c.into());
    t.insert(
        "absorption_db_per_km".into(),
        absorption_coeff(sonar.frequency_khz, &s.env)?.into(),
    );
    t.insert(
        "range_resolution_m".into(),
        range_resolution(c, sonar.bandwidth_hz).into(),
    );
    t.insert("max_range_m".into(), layout.max_distance().into());
    t.insert("num_bins".into(), (layout.num_bins as i64).into());
    if s.run.noise_enabled {
        t.insert("noise_level_db".into(), simulator(s)?.noise_level_db().into());
    }
    Ok(t)
}

fn write_metadata(s: &Scenario, out: &Path, command: &str, extra: toml::Table) -> Result<PathBuf> {
    let mut doc = toml::Table::new();
    doc.insert("command".into(), command.into());
    doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.insert("derived".into(), toml::Value::Table(derived(s)?));
    if !extra.is_empty() {
        doc.insert("result".into(), toml::Value::Table(extra));
    }
    let scenario = toml::Value::try_from(s).map_err(|e| Error::Parse {
        path: out.to_path_buf(),
        message: e.to_string(),
    })?;
    doc.insert("scenario".into(), scenario);
    let path = out.join(format!("{command}.meta.toml"));
    fs::write(&path, doc.to_string()).map_err(io_err(&path))?;
    Ok(path)
}

/// Files written by a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Written {
    pub tables: Vec<PathBuf>,
    pub metadata: PathBuf,
}

fn write_null_table(path: &Path, ret: &NullModelReturn) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin", "d_n^c", "total_db", "bottom_db", "surface_db", "volume_db"])?;
    for r in &ret.records {
        w.write_record([
            r.bin.to_string(),
            fmt_f64(r.center_m),
            fmt_level(r.total),
            fmt_level(r.bottom),
            fmt_level(r.surface),
            fmt_level(r.volume),
        ])?;
    }
    finish(w, path)
}

/// Writes `null_beam<i>.csv` for each receive beam.
pub fn run_null(s: &Scenario, out: &Path) -> Result<Written> {
    prepare(out)?;
    let returns = null_returns(s)?;
    let mut tables = Vec::new();
    for (i, r) in returns.iter().enumerate() {
        let path = out.join(format!("null_beam{i}.csv"));
        write_null_table(&path, r)?;
        tables.push(path);
    }
    let metadata = write_metadata(s, out, "null", toml::Table::new())?;
    Ok(Written { tables, metadata })
}

fn write_beam_rows(w: &mut Writer<fs::File>, layout: &BinLayout, beams: &[BeamReturn]) -> Result<()> {
    for b in beams {
        for n in layout.bins() {
            let k = n - 1;
            let lvl = |c: Component| fmt_level(Level::from_linear(b.component(c)[k]));
            w.write_record([
                b.beam_id.to_string(),
                n.to_string(),
                fmt_f64(bin_center(n, layout)),
                fmt_level(Level::from_linear(b.total[k])),
                lvl(Component::Bottom),
                lvl(Component::Surface),
                lvl(Component::Object),
                lvl(Component::Volume),
                lvl(Component::Multipath),
                lvl(Component::Noise),
            ])?;
        }
    }
    Ok(())
}

const SIM_HEADER: [&str; 10] = [
    "beam_id",
    "bin",
    "d_n^c",
    "intensity_db",
    "bottom_db",
    "surface_db",
    "object_db",
    "volume_db",
    "multipath_db",
    "noise_db",
];

fn write_sim_table(path: &Path, layout: &BinLayout, beams: &[BeamReturn]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SIM_HEADER)?;
    write_beam_rows(&mut w, layout, beams)?;
    finish(w, path)
}

/// Writes `sim_ping<p>.csv` per ping and `sim_mean.csv`, the linear mean over pings.
pub fn run_sim(s: &Scenario, out: &Path) -> Result<Written> {
    prepare(out)?;
    let pings = simulate(s)?;
    let mut tables = Vec::new();
    for p in &pings {
        let path = out.join(format!("sim_ping{:04}.csv", p.ping_index));
        write_sim_table(&path, &p.layout, &p.beams)?;
        tables.push(path);
    }
    let path = out.join("sim_mean.csv");
    write_sim_table(&path, &pings[0].layout, &mean_over_pings(&pings)?)?;
    tables.push(path);
    let metadata = write_metadata(s, out, "sim", toml::Table::new())?;
    Ok(Written { tables, metadata })
}

/// One compared bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareRow {
    pub bin: usize,
    pub center_m: f64,
    pub expected: Level,
    pub simulated: Level,
    /// `simulated - expected`; `None` when either side has no response.
    pub gap_db: Option<f64>,
    /// Whether the bin falls under the acceptance rule.
    pub checked: bool,
}

impl CompareRow {
    pub fn passes(&self, tolerance_db: f64) -> bool {
        !self.checked || self.gap_db.is_some_and(|g| g.abs() <= tolerance_db)
    }
}

/// Bin-by-bin gaps. A bin is checked when its centre lies in the window and
/// its expectation is at or above the floor.
pub fn compare_levels(
    expected: &[Level],
    simulated: &[Level],
    layout: &BinLayout,
    window: (f64, f64),
    floor_db: f64,
) -> Result<Vec<CompareRow>> {
    if expected.len() != simulated.len() || expected.len() != layout.num_bins {
        return Err(Error::validation(
            "compare",
            format!("{} expected bins, {} simulated bins", expected.len(), simulated.len()),
        ));
    }
    Ok(layout
        .bins()
        .map(|n| {
            let (e, m) = (expected[n - 1], simulated[n - 1]);
            let center_m = bin_center(n, layout);
            let gap_db = match (e.db(), m.db()) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            };
            let checked = center_m >= window.0 && center_m <= window.1 && e.db().is_some_and(|x| x >= floor_db);
            CompareRow {
                bin: n,
                center_m,
                expected: e,
                simulated: m,
                gap_db,
                checked,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamComparison {
    pub beam_id: usize,
    pub rows: Vec<CompareRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub beams: Vec<BeamComparison>,
    pub tolerance_db: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.beams
            .iter()
            .flat_map(|b| &b.rows)
            .all(|r| r.passes(self.tolerance_db))
    }

    pub fn checked_bins(&self) -> usize {
        self.beams.iter().flat_map(|b| &b.rows).filter(|r| r.checked).count()
    }

    /// Largest checked gap magnitude; infinite if a checked bin has no simulated return.
    pub fn worst_gap_db(&self) -> f64 {
        self.beams
            .iter()
            .flat_map(|b| &b.rows)
            .filter(|r| r.checked)
            .map(|r| r.gap_db.map_or(f64::INFINITY, f64::abs))
            .fold(0.0, f64::max)
    }
}

/// Null expectations including the mean noise power when noise is enabled.
fn expected_levels(s: &Scenario, null: &NullModelReturn) -> Result<Vec<Level>> {
    let noise = if s.run.noise_enabled {
        Some(simulator(s)?.noise_level_db())
    } else {
        None
    };
    Ok(null
        .records
        .iter()
        .map(|r| match noise {
            Some(nl) => Level::power_sum([r.total, Level::from_db(nl)]),
            None => r.total,
        })
        .collect())
}

/// Mean simulated return over the scenario's pings against the null model.
pub fn compare(s: &Scenario) -> Result<Comparison> {
    let nulls = null_returns(s)?;
    let pings = simulate(s)?;
    let mean = mean_over_pings(&pings)?;
    let c = &s.compare;
    let beams = nulls
        .iter()
        .zip(&mean)
        .map(|(null, sim)| {
            let rows = compare_levels(
                &expected_levels(s, null)?,
                &sim.db(),
                &null.layout,
                (c.min_range_m, c.max_range_m),
                c.floor_db,
            )?;
            Ok(BeamComparison {
                beam_id: sim.beam_id,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        beams,
        tolerance_db: c.tolerance_db,
    })
}

/// Writes `compare.csv` and `compare.meta.toml`; the caller decides the exit status from
/// [`Comparison::passed`].
pub fn run_compare(s: &Scenario, out: &Path) -> Result<(Comparison, Written)> {
    prepare(out)?;
    let cmp = compare(s)?;
    let path = out.join("compare.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "beam_id",
        "bin",
        "d_n^c",
        "expected_db",
        "sim_mean_db",
        "gap_db",
        "checked",
    ])?;
    for b in &cmp.beams {
        for r in &b.rows {
            w.write_record([
                b.beam_id.to_string(),
                r.bin.to_string(),
                fmt_f64(r.center_m),
                fmt_level(r.expected),
                fmt_level(r.simulated),
                r.gap_db.map_or_else(|| "null".to_string(), fmt_f64),
                u8::from(r.checked).to_string(),
            ])?;
        }
    }
    finish(w, &path)?;
    let mut result = toml::Table::new();
    result.insert("passed".into(), cmp.passed().into());
    result.insert("checked_bins".into(), (cmp.checked_bins() as i64).into());
    let worst = cmp.worst_gap_db();
    if worst.is_finite() {
        result.insert("worst_gap_db".into(), worst.into());
    }
    let metadata = write_metadata(s, out, "compare", result)?;
    Ok((
        cmp,
        Written {
            tables: vec![path],
            metadata,
        },
    ))
}

/// Detector results for every ping of the scenario.
pub fn detect(s: &Scenario) -> Result<Vec<Vec<DetectionResult>>> {
    let nulls = null_returns(s)?;
    let models = nulls
        .iter()
        .map(|n| HypothesisModel::new(expected_levels(s, n)?, s.detection_model()))
        .collect::<Result<Vec<_>>>()?;
    simulate(s)?
        .iter()
        .map(|p| detect_ping(p, &models, s.detection.gamma))
        .collect()
}

/// Writes `detect_ping<p>.csv` per ping and `detect_summary.csv`.
pub fn run_detect(s: &Scenario, out: &Path) -> Result<(Vec<Vec<DetectionResult>>, Written)> {
    prepare(out)?;
    let results = detect(s)?;
    let layout = NullModel::new(
        &s.env,
        &s.sonar_config(),
        s.pose(),
        s.transmitter(),
        s.null_model.clone(),
    )?
    .layout()?;
    let mut tables = Vec::new();
    for (p, ping) in results.iter().enumerate() {
        let path = out.join(format!("detect_ping{p:04}.csv"));
        let mut w = writer(&path)?;
        w.write_record(["beam", "bin", "d_n^c", "z_db", "null_db", "lambda", "decision"])?;
        for r in ping {
            for b in &r.bins {
                w.write_record([
                    r.beam_id.to_string(),
                    b.bin.to_string(),
                    fmt_f64(bin_center(b.bin, &layout)),
                    fmt_level(b.z_db),
                    fmt_level(b.null_db),
                    b.lambda.map_or_else(|| "null".to_string(), fmt_f64),
                    b.decision.map_or_else(|| "excluded".to_string(), |d| d.to_string()),
                ])?;
            }
        }
        finish(w, &path)?;
        tables.push(path);
    }
    let path = out.join("detect_summary.csv");
    let mut w = writer(&path)?;
    w.write_record(["ping", "beam", "gamma", "pd", "pfa", "detections", "excluded"])?;
    for (p, ping) in results.iter().enumerate() {
        for r in ping {
            w.write_record([
                p.to_string(),
                r.beam_id.to_string(),
                fmt_f64(r.gamma),
                fmt_f64(r.pd),
                fmt_f64(r.pfa),
                r.detections().count().to_string(),
                r.excluded().to_string(),
            ])?;
        }
    }
    finish(w, &path)?;
    tables.push(path);
    let metadata = write_metadata(s, out, "detect", toml::Table::new())?;
    Ok((results, Written { tables, metadata }))
}

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) => 3,
        _ => 1,
    }
}
