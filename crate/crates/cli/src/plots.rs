use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use gridledger::experiments::{ExpResult, Table};
use plotters::prelude::*;

struct Figure {
    experiment: &'static str,
    table: &'static str,
    file: &'static str,
    title: &'static str,
    x_label: &'static str,
    y_label: &'static str,
    /// Column indices: x, then (column, legend) per line.
    x: usize,
    lines: &'static [(usize, &'static str)],
}

const FIGURES: [Figure; 3] = [
    Figure {
        experiment: "exp2",
        table: "series_amortized.csv",
        file: "amortized_gas.svg",
        title: "Amortized gas per record vs batch size",
        x_label: "batch size",
        y_label: "gas per record",
        x: 0,
        lines: &[(1, "baseline"), (2, "proposed")],
    },
    Figure {
        experiment: "exp2",
        table: "series_hourly.csv",
        file: "hourly_gas.svg",
        title: "Hourly total gas",
        x_label: "hour",
        y_label: "gas",
        x: 0,
        lines: &[(3, "baseline"), (4, "proposed")],
    },
    Figure {
        experiment: "exp2",
        table: "series_gas_per_tx.csv",
        file: "gas_per_tx.svg",
        title: "Mean gas per transaction over the day",
        x_label: "hour",
        y_label: "gas per tx",
        x: 0,
        lines: &[(1, "baseline"), (2, "proposed")],
    },
];

fn column(table: &Table, index: usize) -> Result<Vec<f64>> {
    table
        .rows
        .iter()
        .map(|row| {
            let cell = row.split(',').nth(index).ok_or_else(|| anyhow!("{}: short row `{row}`", table.file_name))?;
            cell.parse::<f64>().with_context(|| format!("{}: `{cell}` is not numeric", table.file_name))
        })
        .collect()
}

fn draw(fig: &Figure, table: &Table, path: &Path) -> Result<()> {
    let xs = column(table, fig.x)?;
    let series: Vec<Vec<f64>> = fig.lines.iter().map(|(c, _)| column(table, *c)).collect::<Result<_>>()?;
    let x_max = xs.iter().copied().fold(1.0, f64::max);
    let y_max = series.iter().flatten().copied().fold(1.0, f64::max) * 1.05;

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(fig.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(0f64..x_max, 0f64..y_max)?;
    chart.configure_mesh().x_desc(fig.x_label).y_desc(fig.y_label).draw()?;
    for (i, ((_, name), ys)) in fig.lines.iter().zip(&series).enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(xs.iter().copied().zip(ys.iter().copied()), color.stroke_width(2)))?
            .label(*name)
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], color));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}

/// Renders every figure whose source experiment is in `results`.
pub fn emit(results: &[ExpResult], out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for fig in &FIGURES {
        let Some(res) = results.iter().find(|r| r.id == fig.experiment) else { continue };
        let table = res.table(fig.table).ok_or_else(|| anyhow!("{} has no {}", fig.experiment, fig.table))?;
        let dir = out.join(fig.experiment);
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(fig.file);
        draw(fig, table, &path).with_context(|| format!("rendering {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
