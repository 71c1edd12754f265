//! Simulation config: one TOML document describing the bundle, the drive and
//! the analysis options.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use strandloss::losses::Tolerances;
use strandloss::network::{
    slot_inductance_matrix, strand_label, validate_network, BundleNetwork, InductanceMatrix,
    Placement, Polarity, SlotLayout, Strand, TranspositionSchedule, TranspositionSegment,
};
use strandloss::solver::DEFAULT_ZERO_THRESHOLD;
use strandloss::waveform::{Harmonic, Waveform};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub network: Option<NetworkSpec>,
    pub layout: Option<LayoutSpec>,
    pub drive: DriveSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub transposition: Vec<ScheduleSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Results section of a written report; ignored on input.
    pub report: Option<toml::Value>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub resistances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Dense row-major `n²` entries, henries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inductance: Option<Vec<f64>>,
    /// CSV with `n` rows of `n` values, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inductance_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub slot_width: f64,
    pub slot_depth: f64,
    pub stack_length: f64,
    #[serde(default)]
    pub end_leakage: f64,
    /// Resistance shared by every strand.
    pub resistance: Option<f64>,
    pub resistances: Option<Vec<f64>>,
    pub strand: Vec<LayoutStrandSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutStrandSpec {
    pub label: Option<String>,
    pub placements: Vec<PlacementSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default = "go")]
    pub polarity: i64,
}

fn go() -> i64 {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub period: f64,
    #[serde(default)]
    pub dc: f64,
    #[serde(default)]
    pub harmonics: Vec<HarmonicSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub order: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub grid_size: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub equality_tol: f64,
    pub zero_threshold: f64,
    pub oracle: bool,
    pub oracle_steps: usize,
    pub oracle_settle: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        let tol = Tolerances::default();
        Self {
            grid_size: 1024,
            abs_tol: tol.abs_tol,
            rel_tol: tol.rel_tol,
            equality_tol: tol.equality_tol,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            oracle: false,
            oracle_steps: 2048,
            oracle_settle: 10,
        }
    }
}

impl AnalysisSpec {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            equality_tol: self.equality_tol,
            margin_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub name: String,
    /// `identity`, `cyclic` or `custom`.
    pub kind: String,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub fraction: f64,
    /// One-based strand indices.
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Validated config ready for simulation.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub path: PathBuf,
    pub network: BundleNetwork,
    pub layout: Option<SlotLayout>,
    pub drive: Waveform,
    pub analysis: AnalysisSpec,
    pub frequencies: Option<Vec<f64>>,
    pub schedules: Vec<(String, TranspositionSchedule)>,
    pub output_dir: PathBuf,
}

/// Line (1-based) of a `[section]` header, for error messages.
fn section_line(src: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}]");
    src.lines()
        .position(|l| l.trim_start().starts_with(&header))
        .map(|i| i + 1)
}

fn locate(path: &Path, src: &str, section: &str) -> String {
    match section_line(src, section) {
        Some(line) => format!("{}:{line}: [{section}]", path.display()),
        None => format!("{}: [{section}]", path.display()),
    }
}

pub fn load(path: &Path) -> Result<SimulationConfig> {
    let src = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(path, &src)
}

pub fn parse(path: &Path, src: &str) -> Result<SimulationConfig> {
    let raw: RawConfig =
        toml::from_str(src).map_err(|e| anyhow!("{}: config parse error: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let (network, layout) = match (&raw.network, &raw.layout) {
        (Some(_), Some(_)) => bail!(
            "{}: give exactly one of [network] and [layout], not both",
            path.display()
        ),
        (None, None) => bail!("{}: missing [network] or [layout]", path.display()),
        (Some(spec), None) => {
            let net = build_network(spec, base)
                .and_then(|n| Ok(validate_network(&n).map(|_| n)?))
                .with_context(|| locate(path, src, "network"))?;
            (net, None)
        }
        (None, Some(spec)) => {
            let (net, layout) = build_layout(spec)
                .and_then(|(n, l)| Ok(validate_network(&n).map(|_| (n, l))?))
                .with_context(|| locate(path, src, "layout"))?;
            (net, Some(layout))
        }
    };

    let drive = build_drive(&raw.drive).with_context(|| locate(path, src, "drive"))?;
    if raw.analysis.grid_size < strandloss::solver::MIN_SHARING_GRID {
        bail!(
            "{}: grid_size must be at least {}",
            locate(path, src, "analysis"),
            strandloss::solver::MIN_SHARING_GRID
        );
    }

    let schedules = raw
        .transposition
        .iter()
        .map(|s| build_schedule(s, network.strand_count()).map(|sch| (s.name.clone(), sch)))
        .collect::<Result<Vec<_>>>()
        .with_context(|| locate(path, src, "[transposition]"))?;

    Ok(SimulationConfig {
        path: path.to_path_buf(),
        network,
        layout,
        drive,
        analysis: raw.analysis,
        frequencies: raw.sweep.map(|s| s.frequencies),
        schedules,
        output_dir: raw.output.dir,
    })
}

fn build_network(spec: &NetworkSpec, base: &Path) -> Result<BundleNetwork> {
    let n = spec.resistances.len();
    let data = match (&spec.inductance, &spec.inductance_csv) {
        (Some(v), None) => v.clone(),
        (None, Some(file)) => read_matrix_csv(&base.join(file), n)?,
        _ => bail!("give exactly one of `inductance` and `inductance_csv`"),
    };
    let l = InductanceMatrix::from_row_major(n, data)?;
    let strands = match &spec.labels {
        Some(labels) if labels.len() != n => {
            bail!("{} labels for {n} strands", labels.len())
        }
        Some(labels) => labels
            .iter()
            .zip(&spec.resistances)
            .map(|(l, &r)| Strand::new(l.clone(), r))
            .collect(),
        None => (0..n)
            .map(|i| Strand::new(strand_label(i), spec.resistances[i]))
            .collect(),
    };
    Ok(BundleNetwork::new(strands, l)?)
}

fn read_matrix_csv(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read inductance file {}", path.display()))?;
    let mut data = Vec::with_capacity(n * n);
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().with_context(|| {
                format!(
                    "{}:{}: bad number `{}`",
                    path.display(),
                    line_no + 1,
                    field.trim()
                )
            })?;
            data.push(v);
        }
    }
    if data.len() != n * n {
        bail!(
            "{}: expected {} values for {n} strands, found {}",
            path.display(),
            n * n,
            data.len()
        );
    }
    Ok(data)
}

fn build_layout(spec: &LayoutSpec) -> Result<(BundleNetwork, SlotLayout)> {
    let n = spec.strand.len();
    let resistances = match (spec.resistance, &spec.resistances) {
        (Some(r), None) => vec![r; n],
        (None, Some(rs)) if rs.len() == n => rs.clone(),
        (None, Some(rs)) => bail!("{} resistances for {n} strands", rs.len()),
        _ => bail!("give exactly one of `resistance` and `resistances`"),
    };
    let placements_per_strand = spec
        .strand
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.placements
                .iter()
                .map(|p| {
                    let polarity = Polarity::from_sign(p.polarity).ok_or_else(|| {
                        anyhow!(
                            "strand {}: polarity must be 1 or -1, got {}",
                            i + 1,
                            p.polarity
                        )
                    })?;
                    Ok(Placement::new(p.x, p.y, polarity))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let layout = SlotLayout {
        slot_width: spec.slot_width,
        slot_depth: spec.slot_depth,
        stack_length: spec.stack_length,
        end_leakage: spec.end_leakage,
        placements_per_strand,
    };
    let inductance = slot_inductance_matrix(&layout)?;
    let strands = spec
        .strand
        .iter()
        .zip(&resistances)
        .zip(&layout.placements_per_strand)
        .enumerate()
        .map(|(i, ((s, &r), path))| Strand {
            label: s.label.clone().unwrap_or_else(|| strand_label(i)),
            r_dc: r,
            path: Some(path.clone()),
        })
        .collect();
    Ok((BundleNetwork::new(strands, inductance)?, layout))
}

fn build_drive(spec: &DriveSpec) -> Result<Waveform> {
    Ok(Waveform::from_harmonics(
        spec.period,
        spec.dc,
        spec.harmonics
            .iter()
            .map(|h| Harmonic::new(h.order, h.amplitude, h.phase)),
    )?)
}

fn build_schedule(spec: &ScheduleSpec, n: usize) -> Result<TranspositionSchedule> {
    let schedule = match spec.kind.as_str() {
        "identity" => TranspositionSchedule::identity(n),
        "cyclic" => TranspositionSchedule::full_cyclic(n),
        "custom" => {
            let segments = spec
                .segments
                .iter()
                .map(|s| TranspositionSegment {
                    fraction: s.fraction,
                    // out-of-range indices map to `n`, which validation rejects
                    permutation: s
                        .permutation
                        .iter()
                        .map(|&p| p.checked_sub(1).unwrap_or(n))
                        .collect(),
                })
                .collect();
            TranspositionSchedule::new(segments)
                .with_context(|| format!("schedule `{}`", spec.name))?
        }
        other => bail!(
            "schedule `{}`: unknown kind `{other}` (expected identity, cyclic or custom)",
            spec.name
        ),
    };
    if schedule.strand_count() != n {
        bail!(
            "schedule `{}` permutes {} strands, bundle has {n}",
            spec.name,
            schedule.strand_count()
        );
    }
    Ok(schedule)
}

/// `[network]` and `[drive]` sections describing `net` and `drive`; written
/// into reports so they can be re-run as configs.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkEcho {
    pub network: NetworkSpec,
    pub drive: DriveSpec,
    pub analysis: AnalysisSpec,
}

impl NetworkEcho {
    pub fn new(net: &BundleNetwork, drive: &Waveform, analysis: &AnalysisSpec) -> Self {
        Self {
            network: NetworkSpec {
                resistances: net.resistances(),
                labels: Some(net.strands().iter().map(|s| s.label.clone()).collect()),
                inductance: Some(net.inductance().as_row_major().to_vec()),
                inductance_csv: None,
            },
            drive: DriveSpec {
                period: drive.period(),
                dc: drive.dc(),
                harmonics: drive
                    .harmonics()
                    .iter()
                    .map(|h| HarmonicSpec {
                        order: h.order,
                        amplitude: h.amplitude,
                        phase: h.phase,
                    })
                    .collect(),
            },
            analysis: analysis.clone(),
        }
    }
}
