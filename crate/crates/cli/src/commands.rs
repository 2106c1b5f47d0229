//! Subcommand implementations. Each one reads the resolved configuration,
//! runs the analysis and writes CSVs (canonical) plus SVG views.

use std::fmt::Write as _;
use std::path::PathBuf;

use chiplet_dse::dsl::{self, EyeDiagram, EyeMetrics};
use chiplet_dse::esd::{self, Polarity, SizingCell};
use chiplet_dse::explorer::{self, Exploration};
use chiplet_dse::extraction::{self, extract_channel, ChannelParasitics, PUBLISHED_MICRO_BUMP};
use chiplet_dse::mna::{self, parse_netlist};
use chiplet_dse::techlib::{builtin_generation, list_generations, InterfaceKind, TechGeneration};
use clap::{Args, Subcommand};
use rayon::prelude::*;

use crate::config::Config;
use crate::svg::{self, Chart, Series};
use crate::{CliError, Output};

/// Deterministic CSV number: ten significant digits, shortest form.
pub fn num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{}", if v == 0.0 { 0.0 } else { v });
    }
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    format!("{rounded}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn generations(kind: InterfaceKind, pick: &[usize]) -> Result<Vec<TechGeneration>, CliError> {
    if pick.is_empty() {
        return Ok(list_generations(kind));
    }
    pick.iter()
        .map(|&g| builtin_generation(kind, g).map_err(CliError::from))
        .collect()
}

// ---------------------------------------------------------------- extract

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Interface family: ubump or hybrid.
    #[arg(long, default_value = "ubump")]
    pub tech: InterfaceKind,
    /// Generation index (default: all).
    #[arg(long, conflicts_with = "all")]
    pub gen: Option<usize>,
    /// Every generation of the family.
    #[arg(long)]
    pub all: bool,
    /// Override the wire length, μm.
    #[arg(long)]
    pub length_um: Option<f64>,
}

pub fn extract(a: &ExtractArgs, cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let params = cfg.extraction_params();
    let techs = generations(a.tech, a.gen.as_slice())?;
    let mut csv = String::from(
        "tech,generation,length_um,c_pkg_ff,r_pkg_ohm,l_pkg_nh,c_pad_ff,r_pad_mohm,c_couple_ff,\
         dev_c_pkg_pct,dev_r_pkg_pct,dev_l_pkg_pct,dev_c_pad_pct,dev_r_pad_pct\n",
    );
    out.say(format!(
        "{:>4} {:>9} {:>10} {:>9} {:>9} {:>8} {:>9}",
        "gen", "len_um", "C_pkg_fF", "R_pkg_Ω", "L_pkg_nH", "C_pad_fF", "R_pad_mΩ"
    ));
    for t in &techs {
        let len = a.length_um.map(|l| l * 1e-6);
        let p = extract_channel(t, &params, len)?;
        let row = [p.c_pkg * 1e15, p.r_pkg, p.l_pkg * 1e9, p.c_pad * 1e15, p.r_pad * 1e3];
        // deviations only make sense against the published row at native length
        let published = (a.tech == InterfaceKind::MicroBump && len.is_none())
            .then(|| PUBLISHED_MICRO_BUMP.get(t.index))
            .flatten();
        let length = len.unwrap_or(t.wire.length) * 1e6;
        let _ = write!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            a.tech.short_name(),
            t.index,
            num(length),
            num(row[0]),
            num(row[1]),
            num(row[2]),
            num(row[3]),
            num(row[4]),
            num(p.c_couple * 1e15)
        );
        for k in 0..5 {
            let dev = published.map(|r| extraction::deviation_pct(row[k], r[k]));
            let _ = write!(csv, ",{}", opt(dev));
        }
        csv.push('\n');
        out.say(format!(
            "{:>4} {:>9.1} {:>10.3} {:>9.3} {:>9.3} {:>8.3} {:>9.3}",
            t.index, length, row[0], row[1], row[2], row[3], row[4]
        ));
    }
    out.write("extract.csv", &csv)
}

// -------------------------------------------------------------------- esd

#[derive(Debug, Subcommand)]
pub enum EsdCommand {
    /// Minimum clamp area over generations × CDM targets.
    Size(EsdSizeArgs),
    /// Simulate one CDM event at a fixed clamp area.
    Check(EsdCheckArgs),
}

#[derive(Debug, Args)]
pub struct EsdSizeArgs {
    #[arg(long, default_value = "ubump")]
    pub tech: InterfaceKind,
    /// Generations, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub gen: Vec<usize>,
    /// CDM targets in volts, comma separated (default: esd.targets_v).
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<f64>,
    /// Re-solve the clamp series resistance so that generation 0 at 125 V
    /// sizes to esd.calibration_area_um2 before sizing.
    #[arg(long)]
    pub calibrate: bool,
}

#[derive(Debug, Args)]
pub struct EsdCheckArgs {
    #[arg(long, default_value = "hybrid")]
    pub tech: InterfaceKind,
    #[arg(long, default_value_t = 4)]
    pub gen: usize,
    /// CDM precharge, volts (default: esd.target_v).
    #[arg(long)]
    pub target: Option<f64>,
    /// Total clamp area, μm².
    #[arg(long, default_value_t = 0.0)]
    pub area: f64,
}

/// Channel model an ESD bench uses: the published row for micro-bumps,
/// compact-model extraction otherwise.
pub fn esd_parasitics(tech: &TechGeneration, cfg: &Config) -> Result<ChannelParasitics, CliError> {
    let published = match tech.kind {
        InterfaceKind::MicroBump => extraction::published_micro_bump(tech.index),
        InterfaceKind::HybridBond => None,
    };
    match published {
        Some(p) => Ok(p),
        None => Ok(extract_channel(tech, &cfg.extraction_params(), None)?),
    }
}

pub fn esd(c: &EsdCommand, cfg: &mut Config, out: &mut Output) -> Result<(), CliError> {
    match c {
        EsdCommand::Size(a) => esd_size(a, cfg, out),
        EsdCommand::Check(a) => esd_check(a, cfg, out),
    }
}

fn esd_size(a: &EsdSizeArgs, cfg: &mut Config, out: &mut Output) -> Result<(), CliError> {
    if a.calibrate {
        let reference = list_generations(InterfaceKind::MicroBump).remove(0);
        let bench = cfg.cdm_bench(esd::TABLE_TARGETS[3], esd_parasitics(&reference, cfg)?);
        let model = esd::calibrate_rs(&bench, cfg.esd.calibration_area_um2, &cfg.sizing_options(), (1.0, 1000.0))?;
        cfg.esd.diode_rs_ohm_um2 = model.rs;
        out.say(format!("calibrated r_s = {} Ω·μm²", num(model.rs)));
    }
    let targets = if a.targets.is_empty() {
        cfg.esd.targets_v.clone()
    } else {
        a.targets.clone()
    };
    if targets.is_empty() {
        return Err(CliError::Usage("no CDM targets given".into()));
    }
    let techs = generations(a.tech, &a.gen)?;
    let benches = techs
        .iter()
        .map(|t| Ok((t.index, cfg.cdm_bench(targets[0], esd_parasitics(t, cfg)?))))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut cells = esd::sizing_table(&benches, &targets, &cfg.sizing_options())?;
    if a.tech == InterfaceKind::HybridBond {
        // the published grid is for micro-bumps only
        for c in &mut cells {
            c.published = None;
            c.deviation_pct = None;
        }
    }
    out.write("esd_size.csv", &sizing_csv(a.tech, &cells))?;
    let mut head = format!("{:>8}", "target_V");
    for t in &techs {
        let _ = write!(head, " {:>10}", format!("gen{}", t.index));
    }
    out.say(head);
    for chunk in cells.chunks(techs.len()) {
        let mut line = format!("{:>8}", num(chunk[0].target_v));
        for c in chunk {
            let _ = write!(line, " {:>10.2}", c.area);
        }
        out.say(line);
    }
    Ok(())
}

pub fn sizing_csv(kind: InterfaceKind, cells: &[SizingCell]) -> String {
    let mut csv = String::from(
        "tech,generation,target_v,area_um2,peak_v,no_protection,published_um2,deviation_pct\n",
    );
    for c in cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            kind.short_name(),
            c.generation,
            num(c.target_v),
            num(c.area),
            num(c.peak),
            c.area == 0.0,
            opt(c.published),
            opt(c.deviation_pct)
        );
    }
    csv
}

fn esd_check(a: &EsdCheckArgs, cfg: &mut Config, out: &mut Output) -> Result<(), CliError> {
    let tech = builtin_generation(a.tech, a.gen)?;
    let v = a.target.unwrap_or(cfg.esd.target_v);
    cfg.esd.target_v = v;
    let bench = cfg.cdm_bench(v, esd_parasitics(&tech, cfg)?).with_area(a.area);
    bench.validate()?;
    let mut peak = 0.0f64;
    let mut series = Vec::new();
    for &s in bench.polarity.signs() {
        let w = esd::simulate_polarity(&bench, s)?;
        let tag = if s > 0.0 { "pos" } else { "neg" };
        out.write(&format!("esd_check_{tag}.csv"), &w.to_csv())?;
        let gate = w.voltage("gate").map_err(mna::SolverError::from)?;
        peak = gate.iter().fold(peak, |m, v| m.max(v.abs()));
        let pts = w.time.iter().zip(gate.iter()).map(|(t, v)| (t * 1e9, *v)).collect();
        series.push(Series::new(format!("gate ({tag})"), pts));
    }
    let title = format!("CDM {} V, {} gen {}, clamp {} μm²", num(v), tech.kind, tech.index, num(a.area));
    let chart = Chart {
        title: &title,
        x_label: "time (ns)",
        y_label: "gate voltage (V)",
        series,
        hline: Some((bench.v_bd, "V_bd")),
        legend: true,
    };
    out.write("esd_check.svg", &svg::render(&chart))?;
    let bd = num(bench.v_bd);
    let verdict = if peak < bench.v_bd {
        if a.area == 0.0 {
            format!("PASS, peak < {bd} V, no diode")
        } else {
            format!("PASS, peak < {bd} V with {} μm² clamp", num(a.area))
        }
    } else {
        format!("FAIL, peak ≥ {bd} V")
    };
    let polarity = match bench.polarity {
        Polarity::Both => "both polarities",
        Polarity::Positive => "positive",
        Polarity::Negative => "negative",
    };
    out.write("esd_check.txt", &format!("{verdict}\npeak_v = {}\n", num(peak)))?;
    out.say(format!("{verdict} (peak {peak:.3} V, {polarity})"));
    Ok(())
}

// -------------------------------------------------------------------- eye

#[derive(Debug, Args)]
pub struct EyeArgs {
    #[arg(long, default_value = "ubump")]
    pub tech: InterfaceKind,
    /// Generations, comma separated (default: 5).
    #[arg(long, value_delimiter = ',')]
    pub gen: Vec<usize>,
    /// Channel lengths in μm, comma separated (default: native length).
    #[arg(long, value_delimiter = ',')]
    pub length_um: Vec<f64>,
}

pub struct EyePoint {
    pub tech: InterfaceKind,
    pub generation: usize,
    pub length: f64,
    pub n_seg: usize,
    pub eye: EyeDiagram,
    pub metrics: EyeMetrics,
}

/// Simulates every `(generation, length)` pair; results come back in grid
/// order whatever the scheduling.
pub fn eye_sweep(
    cfg: &Config,
    kind: InterfaceKind,
    gens: &[usize],
    lengths_um: &[f64],
) -> Result<Vec<EyePoint>, CliError> {
    let gens = if gens.is_empty() { vec![5] } else { gens.to_vec() };
    let dcfg = cfg.dsl_config();
    dcfg.validate()?;
    let params = cfg.extraction_params();
    let mut jobs = Vec::new();
    for g in gens {
        let tech = builtin_generation(kind, g)?;
        if lengths_um.is_empty() {
            jobs.push((tech, tech.wire.length));
        } else {
            jobs.extend(lengths_um.iter().map(|l| (tech, l * 1e-6)));
        }
    }
    jobs.par_iter()
        .map(|(tech, len)| {
            let par = extract_channel(tech, &params, Some(*len))?;
            let eye = dsl::simulate_eye(&par, *len, &dcfg)?;
            let metrics = dsl::eye_metrics(&eye)?;
            Ok(EyePoint {
                tech: kind,
                generation: tech.index,
                length: *len,
                n_seg: dcfg.segments_for(*len),
                eye,
                metrics,
            })
        })
        .collect()
}

pub fn eye_metrics_csv(points: &[EyePoint]) -> String {
    let mut csv = String::from("tech,generation,length_um,n_seg,height_v,width_ui,jitter_ui\n");
    for p in points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            p.tech.short_name(),
            p.generation,
            num(p.length * 1e6),
            p.n_seg,
            num(p.metrics.height),
            num(p.metrics.width / p.eye.ui),
            num(p.metrics.jitter / p.eye.ui)
        );
    }
    csv
}

pub fn eye(a: &EyeArgs, cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let points = eye_sweep(cfg, a.tech, &a.gen, &a.length_um)?;
    out.write("eye.csv", &eye_metrics_csv(&points))?;
    out.say(format!("{:>4} {:>10} {:>6} {:>10} {:>9} {:>10}", "gen", "length_um", "n_seg", "height_V", "width_UI", "jitter_UI"));
    for p in &points {
        let tag = format!("g{}_{}um", p.generation, num(p.length * 1e6));
        out.write(&format!("eye_{tag}.csv"), &p.eye.to_csv())?;
        out.write(&format!("eye_{tag}.svg"), &eye_svg(p))?;
        out.say(format!(
            "{:>4} {:>10.1} {:>6} {:>10.4} {:>9.3} {:>10.4}",
            p.generation,
            p.length * 1e6,
            p.n_seg,
            p.metrics.height,
            p.metrics.width / p.eye.ui,
            p.metrics.jitter / p.eye.ui
        ));
    }
    Ok(())
}

const SVG_EYE_TRACES: usize = 64;

fn eye_svg(p: &EyePoint) -> String {
    let spu = p.eye.samples_per_ui() as f64;
    // the CSV holds every trace; the view keeps an evenly spaced subset
    let stride = p.eye.traces.len().div_ceil(SVG_EYE_TRACES).max(1);
    let series = p
        .eye
        .traces
        .iter()
        .step_by(stride)
        .map(|tr| {
            let pts = tr.iter().enumerate().map(|(k, v)| (k as f64 / spu, *v)).collect();
            Series {
                opacity: 0.25,
                color: Some("#1f77b4"),
                ..Series::new("", pts)
            }
        })
        .collect();
    let title = format!(
        "Eye: {} gen {}, {} μm, height {:.3} V",
        p.tech,
        p.generation,
        num(p.length * 1e6),
        p.metrics.height
    );
    svg::render(&Chart {
        title: &title,
        x_label: "time (UI)",
        y_label: "victim far end (V)",
        series,
        hline: None,
        legend: false,
    })
}

// ---------------------------------------------------------------- explore

#[derive(Debug, Args)]
pub struct ExploreArgs {
    /// Explicit edge grid in mm, comma separated (default: the explore
    /// section's evenly spaced grid).
    #[arg(long, value_delimiter = ',')]
    pub edge_mm: Vec<f64>,
}

pub fn exploration(cfg: &Config, edges: &[f64]) -> Result<Exploration, CliError> {
    let e = &cfg.explore;
    let grid = if edges.is_empty() {
        explorer::edge_grid(e.edge_min_mm, e.edge_max_mm, e.edge_points)
    } else {
        edges.to_vec()
    };
    Ok(explorer::supported_range(&cfg.protocols(), &cfg.compute_model(), &grid)?)
}

pub fn explore_csv(ex: &Exploration) -> String {
    let mut csv = String::from("edge_mm,demand_gbps");
    for (p, _) in &ex.supported {
        let n = p.to_string().to_lowercase();
        let _ = write!(csv, ",{n}_channels,{n}_area_mm2,{n}_supply_gbps,{n}_supported");
    }
    csv.push('\n');
    for pt in &ex.points {
        let _ = write!(csv, "{},{}", num(pt.edge_mm), num(pt.demand_gbps));
        for p in &pt.protocols {
            let _ = write!(
                csv,
                ",{},{},{},{}",
                p.channels,
                num(p.area_mm2),
                num(p.supply_gbps),
                p.supported
            );
        }
        csv.push('\n');
    }
    csv
}

pub fn explore(a: &ExploreArgs, cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let ex = exploration(cfg, &a.edge_mm)?;
    out.write("explore.csv", &explore_csv(&ex))?;
    let curve = |f: &dyn Fn(&explorer::ExploreResult) -> f64| -> Vec<(f64, f64)> {
        ex.points.iter().map(|p| (p.edge_mm, f(p))).collect()
    };
    let mut bw = vec![Series::new("compute demand", curve(&|p| p.demand_gbps))];
    let mut area = Vec::new();
    for (i, (name, _)) in ex.supported.iter().enumerate() {
        bw.push(Series::new(format!("{name} supply"), curve(&|p| p.protocols[i].supply_gbps)));
        area.push(Series::new(format!("{name} bump array"), curve(&|p| p.protocols[i].area_mm2)));
    }
    let title = format!("Bandwidth vs edge ({} node)", cfg.explore.node);
    out.write(
        "explore_bandwidth.svg",
        &svg::render(&Chart {
            title: &title,
            x_label: "chiplet edge (mm)",
            y_label: "bandwidth (Gb/s)",
            series: bw,
            hline: None,
            legend: true,
        }),
    )?;
    out.write(
        "explore_area.svg",
        &svg::render(&Chart {
            title: "I/O bump-array area vs edge",
            x_label: "chiplet edge (mm)",
            y_label: "area (mm²)",
            series: area,
            hline: None,
            legend: true,
        }),
    )?;
    for (name, runs) in &ex.supported {
        let spans: Vec<String> = runs.iter().map(|(lo, hi)| format!("{}–{} mm", num(*lo), num(*hi))).collect();
        let spans = if spans.is_empty() { "nowhere on the grid".to_string() } else { spans.join(", ") };
        out.say(format!("{name}: supported {spans}"));
    }
    Ok(())
}

// -------------------------------------------------------------------- sim

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Netlist deck.
    pub deck: PathBuf,
    /// Nodes to record (default: all).
    #[arg(long, value_delimiter = ',')]
    pub probe: Vec<String>,
}

pub fn sim(a: &SimArgs, out: &mut Output) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.deck)
        .map_err(|e| CliError::Usage(format!("cannot read deck `{}`: {e}", a.deck.display())))?;
    let deck = parse_netlist(&text)?;
    let ckt = &deck.circuit;
    let probes = a
        .probe
        .iter()
        .map(|n| {
            ckt.find_node(n)
                .ok_or_else(|| CliError::Usage(format!("deck has no node `{n}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match &deck.tran {
        Some(tcfg) => {
            let w = if probes.is_empty() {
                mna::transient(ckt, tcfg)?
            } else {
                mna::transient_probed(ckt, tcfg, &probes)?
            };
            out.write("sim.csv", &w.to_csv())?;
            out.say(format!("transient: {} samples, {} nodes", w.len(), w.nodes.len()));
        }
        None => {
            let dc = mna::dc_operating_point(ckt)?;
            let mut csv = String::from("node,voltage\n");
            for (k, name) in ckt.node_names().iter().enumerate().skip(1) {
                let _ = writeln!(csv, "{name},{}", num(dc.node_voltages[k]));
            }
            out.write("dc.csv", &csv)?;
            out.say(format!("DC operating point: {} nodes", ckt.node_count() - 1));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn numbers_are_short_and_stable() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1141.04), "1141.04");
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(-2.5e-15), "-0.0000000000000025");
    }
}
