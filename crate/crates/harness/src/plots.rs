//! Static figures: loss curves and confusion matrices as SVG, digit grids as PNG.

use std::path::Path;

use guided_gan_core::datapipe::SequenceWindow;
use guided_gan_core::evalkit::Confusion;
use image::{GrayImage, Luma};
use plotters::prelude::*;

use crate::error::{CliError, CliResult};

fn plot_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Runtime(format!("plotting {}: {e}", path.display()))
}

/// One line per named series of `(epoch, value)` points.
pub fn loss_curves(series: &[(String, Vec<(f64, f64)>)], title: &str, path: &Path) -> CliResult<()> {
    let err = plot_err(path);
    let pts = series.iter().flat_map(|(_, p)| p.iter()).filter(|(_, y)| y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let pad = ((y1 - y0) * 0.05).max(1e-6);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
        .map_err(&err)?;
    chart.configure_mesh().x_desc("epoch").y_desc("loss").draw().map_err(&err)?;
    for (i, (name, p)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(p.iter().copied().filter(|(_, y)| y.is_finite()), color.stroke_width(2)))
            .map_err(&err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(&err)?;
    root.present().map_err(&err)
}

/// Row-normalised heat map with raw counts written in each cell.
pub fn confusion_heatmap(c: &Confusion, title: &str, path: &Path) -> CliResult<()> {
    let err = plot_err(path);
    let k = c.classes();
    let side = 120 + 48 * k as u32;
    let root = SVGBackend::new(path, (side, side)).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(40)
        .build_cartesian_2d(0f64..k as f64, k as f64..0f64)
        .map_err(&err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc("predicted")
        .y_desc("true")
        .x_labels(k)
        .y_labels(k)
        .x_label_formatter(&|v| format!("{}", v.floor() as usize))
        .y_label_formatter(&|v| format!("{}", v.floor() as usize))
        .draw()
        .map_err(&err)?;
    for (t, row) in c.counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        for (p, &n) in row.iter().enumerate() {
            let share = if total > 0 { n as f64 / total as f64 } else { 0.0 };
            let shade = (255.0 * (1.0 - share)) as u8;
            let (x, y) = (p as f64, t as f64);
            chart
                .draw_series(std::iter::once(Rectangle::new([(x, y), (x + 1.0, y + 1.0)], RGBColor(shade, shade, 255).filled())))
                .map_err(&err)?;
            let ink = if share > 0.5 { WHITE } else { BLACK };
            chart
                .draw_series(std::iter::once(Text::new(n.to_string(), (x + 0.3, y + 0.4), ("sans-serif", 13).into_font().color(&ink))))
                .map_err(&err)?;
        }
    }
    root.present().map_err(&err)
}

/// Tiles `channels × steps` windows as images with one timestep per pixel row,
/// mapping `[-1, 1]` to black..white, `cols` tiles per row with a 2 px gutter.
pub fn window_grid(windows: &[&SequenceWindow], cols: usize, path: &Path) -> CliResult<()> {
    let first = windows.first().ok_or_else(|| CliError::Runtime("no windows to draw".into()))?;
    let (w, h) = (first.channels as u32, first.steps as u32);
    let cols = cols.max(1).min(windows.len()) as u32;
    let rows = (windows.len() as u32).div_ceil(cols);
    let gap = 2;
    let mut img = GrayImage::from_pixel(cols * (w + gap) + gap, rows * (h + gap) + gap, Luma([128]));
    for (i, win) in windows.iter().enumerate() {
        let (gx, gy) = (i as u32 % cols, i as u32 / cols);
        for t in 0..h {
            for c in 0..w {
                let v = win.get(c as usize, t as usize).clamp(-1.0, 1.0);
                let px = ((v + 1.0) * 127.5).round() as u8;
                img.put_pixel(gap + gx * (w + gap) + c, gap + gy * (h + gap) + t, Luma([px]));
            }
        }
    }
    img.save(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use guided_gan_core::datapipe::SourceSpan;

    #[test]
    fn figures_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let series = vec![("d_loss".to_string(), vec![(0.0, 1.4), (1.0, 1.2)]), ("g_loss".to_string(), vec![(0.0, 0.7), (1.0, f64::NAN)])];
        loss_curves(&series, "losses", &dir.path().join("l.svg")).unwrap();
        let c = Confusion { counts: vec![vec![8, 2], vec![3, 7]] };
        confusion_heatmap(&c, "confusion", &dir.path().join("c.svg")).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("c.svg")).unwrap();
        assert!(svg.contains(">\n7\n</text>"), "count 7 not drawn");
        let w = SequenceWindow { channels: 3, steps: 2, values: vec![-1.0, 1.0, 0.0, 0.5, -0.5, 1.0], label: None, span: SourceSpan { stream: 0, start: 0 } };
        let p = dir.path().join("g.png");
        window_grid(&[&w, &w, &w], 2, &p).unwrap();
        let img = image::open(&p).unwrap().to_luma8();
        assert_eq!(img.dimensions(), (2 * 5 + 2, 2 * 4 + 2));
        // channel 0, step 1 of the first tile is +1
        assert_eq!(img.get_pixel(2, 3)[0], 255);
    }
}
