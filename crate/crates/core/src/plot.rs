//! Static SVG figures for a battery run.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::stats;

const SIZE: (u32, u32) = (720, 480);
const HIGH: RGBColor = RGBColor(200, 60, 40);
const LOW: RGBColor = RGBColor(40, 90, 190);

fn draw_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Io(format!("plot: {e:?}"))
}

/// `[lo, hi]` over finite values, widened when degenerate.
fn extent<'a>(values: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Structural entropy per window for every run of both arms.
pub fn entropy_trajectories(path: &Path, high: &[Vec<f64>], low: &[Vec<f64>]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let len = high.iter().chain(low).map(Vec::len).max().unwrap_or(1);
    let (lo, hi) = extent(high.iter().chain(low).flatten());
    let mut chart = ChartBuilder::on(&root)
        .caption("Structural entropy by window", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(0f64..len as f64, lo..hi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("window")
        .y_desc("E (bits)")
        .draw()
        .map_err(draw_err)?;
    for (runs, color, label) in [(high, HIGH, "high AI share"), (low, LOW, "low AI share")] {
        for (i, run) in runs.iter().enumerate() {
            let s = chart
                .draw_series(LineSeries::new(
                    run.iter().enumerate().map(|(t, &e)| (t as f64, e)),
                    color.mix(0.5),
                ))
                .map_err(draw_err)?;
            if i == 0 {
                s.label(label)
                    .legend(move |(x, y)| PathElement::new([(x, y), (x + 16, y)], color));
            }
        }
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Reliability against the agent ratio, with the detected break.
pub fn reliability_vs_ratio(path: &Path, reliability: &[f64], r: &[f64], r_star: Option<f64>) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (xlo, xhi) = extent(r);
    let (ylo, yhi) = extent(reliability);
    let mut chart = ChartBuilder::on(&root)
        .caption("Reliability against agent ratio", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(xlo..xhi, ylo..yhi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("r = AI agents / humans")
        .y_desc("CI pass share")
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(
            r.iter()
                .zip(reliability)
                .map(|(&x, &y)| Circle::new((x, y), 2, LOW.mix(0.6).filled())),
        )
        .map_err(draw_err)?;
    if let Some(rs) = r_star.filter(|v| v.is_finite()) {
        chart
            .draw_series(LineSeries::new([(rs, ylo), (rs, yhi)], HIGH.stroke_width(2)))
            .map_err(draw_err)?
            .label(format!("r* = {rs:.2}"))
            .legend(|(x, y)| PathElement::new([(x, y), (x + 16, y)], HIGH));
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.8))
            .draw()
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)
}

/// Change rate against AI head-count on log-log axes, with the OLS fit.
pub fn rate_fit(path: &Path, rates: &[(f64, f64)]) -> Result<()> {
    let pts: Vec<(f64, f64)> = rates
        .iter()
        .filter(|(n, k)| *n > 0.0 && *k > 0.0)
        .map(|(n, k)| (n.ln(), k.ln()))
        .collect();
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (xlo, xhi) = extent(pts.iter().map(|p| &p.0));
    let (ylo, yhi) = extent(pts.iter().map(|p| &p.1));
    let mut chart = ChartBuilder::on(&root)
        .caption("Change rate scaling", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(xlo..xhi, ylo..yhi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("ln AI agents")
        .y_desc("ln AI commits per window")
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(pts.iter().map(|&p| Circle::new(p, 2, LOW.mix(0.5).filled())))
        .map_err(draw_err)?;
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Ok(fit) = stats::ols(&xs, &ys) {
        let line = [xlo, xhi].map(|x| (x, fit.intercept + fit.slope * x));
        chart
            .draw_series(LineSeries::new(line, HIGH.stroke_width(2)))
            .map_err(draw_err)?
            .label(format!("slope {:.2}", fit.slope))
            .legend(|(x, y)| PathElement::new([(x, y), (x + 16, y)], HIGH));
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.8))
            .draw()
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)
}

/// Effective information of both levels.
pub fn ei_bars(path: &Path, ei_micro: f64, ei_macro: f64) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let top = ei_micro.max(ei_macro).max(1e-6) * 1.15;
    let mut chart = ChartBuilder::on(&root)
        .caption("Effective information", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d((0u32..2u32).into_segmented(), 0f64..top)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_label_formatter(&|x| match x {
            SegmentValue::CenterOf(0) => "micro".into(),
            SegmentValue::CenterOf(1) => "macro".into(),
            _ => String::new(),
        })
        .y_desc("bits")
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(
            [(0u32, ei_micro, LOW), (1, ei_macro, HIGH)]
                .into_iter()
                .map(|(i, v, c)| {
                    let mut bar = Rectangle::new(
                        [(SegmentValue::Exact(i), 0.0), (SegmentValue::Exact(i + 1), v)],
                        c.filled(),
                    );
                    bar.set_margin(0, 0, 30, 30);
                    bar
                }),
        )
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Share of cascades that spread, by clustering decile.
pub fn cascade_vs_clustering(path: &Path, occurrence: &[bool], clustering: &[f64]) -> Result<()> {
    let mut rows: Vec<(f64, bool)> = clustering
        .iter()
        .copied()
        .zip(occurrence.iter().copied())
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let chunk = rows.len().div_ceil(10).max(1);
    let bins: Vec<(f64, f64)> = rows
        .chunks(chunk)
        .map(|c| {
            let x = c.iter().map(|r| r.0).sum::<f64>() / c.len() as f64;
            let y = c.iter().filter(|r| r.1).count() as f64 / c.len() as f64;
            (x, y)
        })
        .collect();
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (xlo, xhi) = extent(bins.iter().map(|b| &b.0));
    let (ylo, yhi) = extent(bins.iter().map(|b| &b.1));
    let mut chart = ChartBuilder::on(&root)
        .caption("Cascade occurrence against clustering", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(xlo..xhi, ylo..yhi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("clustering coefficient (decile mean)")
        .y_desc("share of cascades that spread")
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(LineSeries::new(bins.iter().copied(), LOW))
        .map_err(draw_err)?;
    chart
        .draw_series(bins.iter().map(|&b| Circle::new(b, 4, LOW.filled())))
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_svg_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.svg");
        entropy_trajectories(&p, &[vec![1.0, 1.2, 1.4]], &[vec![1.0, 1.0, 1.1]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("<svg") && text.contains("Structural entropy"));

        let p = dir.path().join("b.svg");
        ei_bars(&p, 0.8, 1.0).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().contains("<rect"));
    }

    #[test]
    fn degenerate_inputs_still_draw() {
        let dir = tempfile::tempdir().unwrap();
        rate_fit(&dir.path().join("r.svg"), &[]).unwrap();
        reliability_vs_ratio(&dir.path().join("p.svg"), &[0.9], &[1.0], Some(f64::NAN)).unwrap();
        cascade_vs_clustering(&dir.path().join("c.svg"), &[true, false], &[0.1, 0.1]).unwrap();
    }
}
