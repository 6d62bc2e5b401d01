use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BenchReport, HarnessError, MapFile, Stats};
use crate::energy::{BatteryParams, Mode};
use crate::geometry::{Point2, ZoneKind};
use crate::planner::Trajectory;

pub const QUIET_FILL: &str = "#bdbdbd";
pub const NO_FLY_FILL: &str = "#e53935";
pub const GAS_STROKE: &str = "#d81b9a";
pub const ELECTRIC_STROKE: &str = "#2e7d32";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    Svg,
    Csv,
}

/// What to draw.
#[derive(Debug, Clone, Copy)]
pub enum PlotSource<'a> {
    Report(&'a BenchReport),
    Plan {
        map: &'a MapFile,
        trajectory: &'a Trajectory,
        params: &'a BatteryParams,
    },
}

/// Writes `source` to `path` as SVG or CSV.
pub fn emit_plot(source: PlotSource<'_>, format: PlotFormat, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let text = match (source, format) {
        (PlotSource::Report(r), PlotFormat::Svg) => box_plot_svg(r),
        (PlotSource::Report(r), PlotFormat::Csv) => r.to_csv_string()?,
        (
            PlotSource::Plan {
                map,
                trajectory,
                params,
            },
            PlotFormat::Svg,
        ) => plan_svg(map, trajectory, params),
        (PlotSource::Plan { trajectory, .. }, PlotFormat::Csv) => trajectory_csv(trajectory)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Gas => "gas",
        Mode::Electric => "electric",
    }
}

fn stroke(mode: Mode) -> &'static str {
    match mode {
        Mode::Gas => GAS_STROKE,
        Mode::Electric => ELECTRIC_STROKE,
    }
}

fn points_attr(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in points {
        let _ = write!(s, "{x:.3},{y:.3} ");
    }
    s.trim_end().to_owned()
}

/// Map with zones and the mode-colored path, above a charge-versus-distance
/// profile.
pub fn plan_svg(map: &MapFile, trajectory: &Trajectory, params: &BatteryParams) -> String {
    const W: f64 = 800.0;
    const PROFILE_H: f64 = 200.0;
    const PAD: f64 = 40.0;
    let (mw, mh) = map.bounds;
    let scale = W / mw;
    let map_h = mh * scale;
    let to_svg = |p: Point2| (p.x * scale, map_h - p.y * scale);
    let total_h = map_h + PROFILE_H + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{total_h:.0}" viewBox="0 0 {W} {total_h:.3}">"#
    );
    let _ = writeln!(
        s,
        r#"<g class="map"><rect x="0" y="0" width="{W}" height="{map_h:.3}" fill="white" stroke="black"/>"#
    );
    for z in &map.zones {
        let (class, fill) = match z.kind {
            ZoneKind::Quiet => ("zone-quiet", QUIET_FILL),
            ZoneKind::NoFly => ("zone-no-fly", NO_FLY_FILL),
        };
        let pts = points_attr(z.polygon.vertices().iter().map(|&p| to_svg(p)));
        let _ = writeln!(
            s,
            r#"<polygon class="{class}" data-zone="{}" points="{pts}" fill="{fill}"/>"#,
            z.id
        );
    }
    for seg in &trajectory.segments {
        let pts = points_attr(seg.points.iter().map(|&p| to_svg(p)));
        let _ = writeln!(
            s,
            r#"<polyline class="seg-{}" points="{pts}" fill="none" stroke="{}" stroke-width="3"/>"#,
            mode_name(seg.mode),
            stroke(seg.mode)
        );
    }
    if let (Some(first), Some(last)) = (trajectory.segments.first(), trajectory.segments.last()) {
        for (class, p) in [("start", first.start()), ("goal", last.end())] {
            let (x, y) = to_svg(p);
            let _ = writeln!(
                s,
                r#"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="5" fill="black"/>"#
            );
        }
    }
    s.push_str("</g>\n");

    let top = map_h + PAD;
    let total_len = trajectory.length().max(f64::MIN_POSITIVE);
    let span = (params.q_max - params.q_min).max(f64::MIN_POSITIVE);
    let px = |dist: f64| PAD + (W - 2.0 * PAD) * dist / total_len;
    let py = |q: f64| top + PROFILE_H * (params.q_max - q) / span;
    let _ = writeln!(
        s,
        r#"<g class="profile"><rect x="{PAD}" y="{top:.3}" width="{:.3}" height="{PROFILE_H}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.3}" font-size="12">charge vs distance</text>"#,
        top - 6.0
    );
    let mut along = 0.0;
    for seg in &trajectory.segments {
        let (x0, y0, x1, y1) = (px(along), py(seg.q_start), px(along + seg.length), py(seg.q_end));
        let _ = writeln!(
            s,
            r#"<line class="profile-{}" x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="{}" stroke-width="2"/>"#,
            mode_name(seg.mode),
            stroke(seg.mode)
        );
        along += seg.length;
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Segment table of a trajectory.
pub fn trajectory_csv(trajectory: &Trajectory) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "mode", "x0", "y0", "x1", "y1", "length", "q_start", "q_end"])?;
    for (i, seg) in trajectory.segments.iter().enumerate() {
        let (a, b) = (seg.start(), seg.end());
        w.write_record([
            i.to_string(),
            mode_name(seg.mode).to_owned(),
            a.x.to_string(),
            a.y.to_string(),
            b.x.to_string(),
            b.y.to_string(),
            seg.length.to_string(),
            seg.q_start.to_string(),
            seg.q_end.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Box plots of the gap percentage, one group per discretization.
pub fn box_plot_svg(report: &BenchReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    let groups: Vec<(usize, Option<Stats>)> = report
        .summary()
        .into_iter()
        .map(|row| (row.discretization, row.gap))
        .collect();
    let y_max = groups
        .iter()
        .filter_map(|(_, s)| s.map(|s| s.max))
        .fold(1.0_f64, f64::max)
        * 1.1;
    let py = |v: f64| H - PAD - (H - 2.0 * PAD) * v / y_max;
    let slot = (W - 2.0 * PAD) / groups.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{:.3}" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.3}" font-size="12">gap between bounds (%)</text>"#,
        PAD - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.3}" font-size="10">{y_max:.1}</text>"#,
        PAD + 10.0
    );
    for (i, (d, stats)) in groups.iter().enumerate() {
        let cx = PAD + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let _ = writeln!(s, r#"<g class="box-group" data-discretization="{d}">"#);
        if let Some(st) = stats {
            let _ = writeln!(
                s,
                r#"<line class="whisker" x1="{cx:.3}" y1="{:.3}" x2="{cx:.3}" y2="{:.3}" stroke="black"/>"#,
                py(st.min),
                py(st.max)
            );
            let _ = writeln!(
                s,
                r#"<rect class="box" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{QUIET_FILL}" stroke="black"/>"#,
                cx - half,
                py(st.q3),
                2.0 * half,
                (py(st.q1) - py(st.q3)).max(0.5)
            );
            let _ = writeln!(
                s,
                r#"<line class="median" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
                cx - half,
                py(st.median),
                cx + half,
                py(st.median)
            );
            let _ = writeln!(
                s,
                r#"<circle class="mean" cx="{cx:.3}" cy="{:.3}" r="3" fill="{ELECTRIC_STROKE}"/>"#,
                py(st.mean)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.3}" y="{:.3}" font-size="12" text-anchor="middle">{d}</text>"#,
            H - PAD + 16.0
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
