use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::seeker::Trajectory;

/// Upper bound on drawn points per series; longer runs are strided.
const MAX_POINTS: usize = 4000;

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn series(traj: &Trajectory, pick: impl Fn(usize, usize) -> f64, node: usize) -> Vec<(f64, f64)> {
    let stride = traj.len().div_ceil(MAX_POINTS).max(1);
    let mut pts: Vec<(f64, f64)> = (0..traj.len())
        .step_by(stride)
        .map(|k| (k as f64, pick(k, node)))
        .collect();
    let last = traj.len() - 1;
    if !last.is_multiple_of(stride) {
        pts.push((last as f64, pick(last, node)));
    }
    pts
}

fn y_range(all: &[Vec<(f64, f64)>], extra: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in all
        .iter()
        .flatten()
        .map(|p| p.1)
        .chain(extra.iter().copied())
    {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn draw(
    path: &Path,
    title: &str,
    y_label: &str,
    lines: &[Vec<(f64, f64)>],
    labels: &[String],
    reference: &[f64],
) -> Result<()> {
    let x_max = lines.iter().flatten().map(|p| p.0).fold(1.0, f64::max);
    let (y0, y1) = y_range(lines, reference);
    let root = SVGBackend::new(path, (960, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..x_max, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("iteration k")
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    for (j, (pts, label)) in lines.iter().zip(labels).enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(1)))
            .map_err(plot_err)?
            .label(label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    for (j, &r) in reference.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        chart
            .draw_series(DashedLineSeries::new(
                vec![(0.0, r), (x_max, r)],
                4,
                4,
                BLACK.mix(0.8).stroke_width(1),
            ))
            .map_err(plot_err)?
            .label(format!("p*_{} = {r:.4}", j + 1))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.mix(0.5)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Writes `power.svg` (intermediary actions against iteration, with the
/// reference equilibrium dashed when given) and `payoff.svg` into `dir`.
pub fn plot_trajectory(
    traj: &Trajectory,
    dir: &Path,
    reference: Option<&[f64]>,
) -> Result<Vec<PathBuf>> {
    if traj.is_empty() {
        return Err(Error::Malformed("trajectory has no rows".into()));
    }
    std::fs::create_dir_all(dir)?;
    let n = traj.node_count();
    let reference = reference.unwrap_or(&[]);
    let power: Vec<_> = (0..n)
        .map(|j| series(traj, |k, j| traj.records[k].hat_a[j], j))
        .collect();
    let payoff: Vec<_> = (0..n)
        .map(|j| series(traj, |k, j| traj.records[k].payoff[j], j))
        .collect();
    let power_path = dir.join("power.svg");
    let payoff_path = dir.join("payoff.svg");
    let labels = |prefix: &str| (1..=n).map(|j| format!("{prefix}_{j}")).collect::<Vec<_>>();
    draw(
        &power_path,
        "Action evolution",
        "hat_a",
        &power,
        &labels("hat_a"),
        reference,
    )?;
    draw(
        &payoff_path,
        "Payoff evolution",
        "realized payoff",
        &payoff,
        &labels("r"),
        &[],
    )?;
    Ok(vec![power_path, payoff_path])
}
