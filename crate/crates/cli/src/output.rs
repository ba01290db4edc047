use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use helios_core::control::RampReport;
use helios_core::sim_engine::{PlantSummary, RunResult};
use helios_core::{Scenario, TopologyKind};
use serde::Serialize;

pub const SERIES_HEADER: [&str; 5] = ["t", "pv_total", "load_total", "net", "net_controlled"];
pub const FORECASTS_HEADER: [&str; 5] = ["target_id", "t_issue", "t_arrival", "depth", "confidence"];
pub const ACTIONS_HEADER: [&str; 4] = ["load_id", "t_start", "duration", "power_delta"];
pub const TRAFFIC_HEADER: [&str; 3] = ["node_id", "kind", "relayed_volume"];
pub const COMPARISON_HEADER: [&str; 10] = [
    "topology",
    "central_node_traffic",
    "total_relayed",
    "hub",
    "hub_relayed",
    "mean_delay_hops",
    "max_delay_hops",
    "mean_lead_time",
    "ramp_controlled",
    "reduction_fraction",
];

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn csv_bytes<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub struct Files {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Files {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv<const N: usize>(
        &mut self,
        name: &str,
        header: [&str; N],
        rows: impl IntoIterator<Item = [String; N]>,
    ) -> io::Result<()> {
        let bytes = csv_bytes(header, rows)?;
        self.put(name, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

/// series, forecasts, actions and traffic tables of one run.
pub fn write_run(files: &mut Files, r: &RunResult) -> io::Result<()> {
    let rows = (0..r.net.len()).map(|i| {
        [
            num(r.net.time(i)),
            num(r.pv.values()[i]),
            num(r.load.values()[i]),
            num(r.net.values()[i]),
            num(r.net_controlled.values()[i]),
        ]
    });
    files.csv("series.csv", SERIES_HEADER, rows)?;

    let rows = r.forecasts.iter().map(|f| {
        [
            f.forecast.target_id.to_string(),
            num(f.t_issue),
            num(f.forecast.t_arrival),
            num(f.forecast.depth),
            num(f.forecast.confidence),
        ]
    });
    files.csv("forecasts.csv", FORECASTS_HEADER, rows)?;

    let rows = r.actions.iter().map(|a| {
        [
            a.load_id.to_string(),
            num(a.t_start),
            num(a.duration),
            num(a.power_delta),
        ]
    });
    files.csv("actions.csv", ACTIONS_HEADER, rows)?;

    let rows = r
        .traffic
        .relayed
        .iter()
        .map(|(hop, v)| [hop.index().to_string(), hop.kind().to_string(), num(*v)]);
    files.csv("traffic.csv", TRAFFIC_HEADER, rows)
}

fn mean_lead(r: &RunResult) -> f64 {
    if r.forecasts.is_empty() {
        return 0.0;
    }
    r.forecasts
        .iter()
        .map(|f| f.forecast.t_arrival - f.t_issue)
        .sum::<f64>()
        / r.forecasts.len() as f64
}

pub fn comparison_row(r: &RunResult) -> [String; 10] {
    let (hub, hub_relayed) = r
        .traffic
        .busiest_relay()
        .map(|(h, v)| (h.to_string(), v))
        .unwrap_or_default();
    [
        r.topology.as_str().to_string(),
        num(r.traffic.central_node_traffic),
        num(r.traffic.total_relayed),
        hub,
        num(hub_relayed),
        num(r.traffic.mean_delay_hops),
        r.traffic.max_delay_hops.to_string(),
        num(mean_lead(r)),
        num(r.ramp.ramp_controlled),
        num(r.ramp.reduction_fraction),
    ]
}

#[derive(Serialize)]
pub struct Motion {
    pub vx: f64,
    pub vy: f64,
    pub speed: f64,
    pub heading_deg: f64,
    pub residual: f64,
    pub n_events: usize,
}

#[derive(Serialize)]
pub struct Traffic {
    pub controller: Option<u32>,
    pub central_node_traffic: f64,
    pub total_relayed: f64,
    pub deliveries: usize,
    pub mean_delay_hops: f64,
    pub max_delay_hops: usize,
}

#[derive(Serialize)]
pub struct Energy {
    pub net: f64,
    pub net_controlled: f64,
    pub shifted_gross: f64,
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub scenario: &'a str,
    pub seed: u64,
    pub topology: TopologyKind,
    pub control_enabled: bool,
    pub ab_control: bool,
    pub samples: usize,
    pub plants: &'a [PlantSummary],
    pub ramp: RampReport,
    pub reduction_fraction: f64,
    pub motion: Option<Motion>,
    pub forecasts: usize,
    pub actions: usize,
    pub energy: Energy,
    pub traffic: Traffic,
    pub warnings: &'a [String],
}

impl<'a> Summary<'a> {
    pub fn new(scenario: &'a Scenario, r: &'a RunResult, ramp: RampReport, ab_control: bool) -> Self {
        Summary {
            scenario: &scenario.name,
            seed: scenario.seed,
            topology: r.topology,
            control_enabled: r.control_enabled,
            ab_control,
            samples: r.net.len(),
            plants: &r.plants,
            ramp,
            reduction_fraction: ramp.reduction_fraction,
            motion: r.motion.map(|m| Motion {
                vx: m.velocity.vx,
                vy: m.velocity.vy,
                speed: m.velocity.speed(),
                heading_deg: m.velocity.heading().to_degrees(),
                residual: m.residual,
                n_events: m.n_events,
            }),
            forecasts: r.forecasts.len(),
            actions: r.actions.len(),
            energy: Energy {
                net: r.net.energy(),
                net_controlled: r.net_controlled.energy(),
                shifted_gross: r.actions.iter().fold(0.0, |acc, a| acc + a.energy().abs()),
            },
            traffic: Traffic {
                controller: r.traffic.controller,
                central_node_traffic: r.traffic.central_node_traffic,
                total_relayed: r.traffic.total_relayed,
                deliveries: r.traffic.deliveries,
                mean_delay_hops: r.traffic.mean_delay_hops,
                max_delay_hops: r.traffic.max_delay_hops,
            },
            warnings: &r.warnings,
        }
    }
}
