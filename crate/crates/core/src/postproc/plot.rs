//! SVG line charts.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Axis {
    #[default]
    Linear,
    Log,
}

/// Chart layout and labels.
#[derive(Debug, Clone, Default)]
pub struct ChartSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_axis: Axis,
    pub y_axis: Axis,
    /// Draw the y axis increasing downwards (as is usual for `Cp`).
    pub invert_y: bool,
}

/// One named polyline.
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

const PALETTE: [RGBColor; 5] = [BLACK, RED, BLUE, RGBColor(0, 128, 0), RGBColor(128, 0, 128)];

fn range(values: impl Iterator<Item = f64>, axis: Axis) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite() && (axis == Axis::Linear || *v > 0.0)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi <= lo {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    if axis == Axis::Linear {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn plot_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Serde(format!("plotting {}: {e}", path.display()))
}

/// Render `series` into an SVG file.
pub fn line_chart(path: &Path, spec: &ChartSpec<'_>, series: &[Series<'_>]) -> Result<()> {
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()), spec.x_axis);
    let (mut y0, mut y1) = range(series.iter().flat_map(|s| s.y.iter().copied()), spec.y_axis);
    if spec.invert_y {
        std::mem::swap(&mut y0, &mut y1);
    }
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(spec.title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(44)
        .y_label_area_size(64);
    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(spec.x_label)
                .y_desc(spec.y_label)
                .draw()
                .map_err(|e| plot_err(path, e))?;
            for (i, s) in series.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                let pts: Vec<(f64, f64)> = s
                    .x
                    .iter()
                    .zip(s.y)
                    .filter(|(x, y)| {
                        x.is_finite()
                            && y.is_finite()
                            && (spec.x_axis == Axis::Linear || **x > 0.0)
                            && (spec.y_axis == Axis::Linear || **y > 0.0)
                    })
                    .map(|(x, y)| (*x, *y))
                    .collect();
                chart
                    .draw_series(LineSeries::new(pts, &color))
                    .map_err(|e| plot_err(path, e))?
                    .label(s.label)
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            }
            if series.len() > 1 {
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.8))
                    .border_style(BLACK)
                    .draw()
                    .map_err(|e| plot_err(path, e))?;
            }
        }};
    }
    match (spec.x_axis, spec.y_axis) {
        (Axis::Linear, Axis::Linear) => draw!(builder
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| plot_err(path, e))?),
        (Axis::Log, Axis::Log) => draw!(builder
            .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
            .map_err(|e| plot_err(path, e))?),
        (Axis::Linear, Axis::Log) => draw!(builder
            .build_cartesian_2d(x0..x1, (y0..y1).log_scale())
            .map_err(|e| plot_err(path, e))?),
        (Axis::Log, Axis::Linear) => draw!(builder
            .build_cartesian_2d((x0..x1).log_scale(), y0..y1)
            .map_err(|e| plot_err(path, e))?),
    }
    root.present().map_err(|e| plot_err(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_svg() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.svg");
        let x: Vec<f64> = (1..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let spec = ChartSpec {
            title: "psd",
            x_label: "St",
            y_label: "density",
            x_axis: Axis::Log,
            y_axis: Axis::Log,
            invert_y: false,
        };
        line_chart(&p, &spec, &[Series { label: "a", x: &x, y: &y }]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("<svg"));
    }
}
