use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SummaryRow;
use crate::error::{bail, Result};

/// Decay rates drawn as dashed reference lines: `n^{-0.5}`, `n^{-1}`, `n^{-2}`.
pub const GUIDE_RATES: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub graphon: String,
    pub series: String,
    pub n: usize,
    pub value: f64,
}

fn is_output_metric(m: &str) -> bool {
    m == "output_l2" || m == "mse_u"
}

/// Median curves of the output metrics, one series per mode, plus guide
/// lines per graphon. Guides start at the highest curve's first point.
pub fn plot_series(summary: &[SummaryRow]) -> Vec<PlotPoint> {
    let mut by_graphon: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in summary.iter().filter(|r| r.statistic == "median" && is_output_metric(&r.metric)) {
        by_graphon.entry(&r.graphon).or_default().push(r);
    }
    let mut out = Vec::new();
    for (graphon, rows) in by_graphon {
        let mut sizes: Vec<usize> = rows.iter().filter_map(|r| r.n).collect();
        sizes.sort();
        sizes.dedup();
        for r in &rows {
            out.push(PlotPoint { graphon: graphon.into(), series: r.mode.clone(), n: r.n.unwrap_or(0), value: r.value });
        }
        let n0 = sizes[0];
        let top = rows.iter().filter(|r| r.n == Some(n0)).map(|r| r.value).fold(0.0, f64::max);
        if top <= 0.0 {
            continue;
        }
        for rate in GUIDE_RATES {
            for &n in &sizes {
                out.push(PlotPoint {
                    graphon: graphon.into(),
                    series: format!("n^-{rate}"),
                    n,
                    value: top * (n as f64 / n0 as f64).powf(-rate),
                });
            }
        }
    }
    out
}

pub fn write_plot_csv(path: impl AsRef<Path>, points: &[PlotPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

const COLOURS: [&str; 6] = ["#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#30343f"];
const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 360.0;
const MARGIN: f64 = 60.0;

/// Log-log line chart, one panel per graphon. Guide lines are dashed grey.
pub fn write_plot_svg(path: impl AsRef<Path>, points: &[PlotPoint]) -> Result<()> {
    let positive: Vec<&PlotPoint> = points.iter().filter(|p| p.value > 0.0 && p.n > 0).collect();
    if positive.is_empty() {
        bail!(Argument, "nothing to plot: no positive values");
    }
    let mut panels: BTreeMap<&str, BTreeMap<&str, Vec<(f64, f64)>>> = BTreeMap::new();
    for p in &positive {
        panels.entry(&p.graphon).or_default().entry(&p.series).or_default().push((p.n as f64, p.value));
    }
    let height = PANEL_H * panels.len() as f64;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" font-family="sans-serif" font-size="11">"#).unwrap();
    for (k, (graphon, series)) in panels.iter().enumerate() {
        let y0 = k as f64 * PANEL_H;
        let all = series.values().flatten();
        let (mut xl, mut xh, mut yl, mut yh) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in all {
            xl = xl.min(x.log10());
            xh = xh.max(x.log10());
            yl = yl.min(y.log10());
            yh = yh.max(y.log10());
        }
        let (xs, ys) = ((xh - xl).max(1e-9), (yh - yl).max(1e-9));
        let px = |x: f64| MARGIN + (x.log10() - xl) / xs * (PANEL_W - 2.0 * MARGIN);
        let py = |y: f64| y0 + PANEL_H - MARGIN + (yl - y.log10()) / ys * (PANEL_H - 2.0 * MARGIN);
        writeln!(s, r#"<text x="{MARGIN}" y="{}">{graphon} (log-log, error vs n)</text>"#, y0 + 20.0).unwrap();
        writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            y0 + MARGIN - 10.0,
            PANEL_W - 2.0 * MARGIN,
            PANEL_H - 2.0 * MARGIN + 10.0
        )
        .unwrap();
        let mut colour = 0;
        for (legend, (name, pts)) in series.iter().enumerate() {
            let guide = name.starts_with("n^");
            let style = if guide {
                r##"stroke="#999" stroke-dasharray="4 3""##.to_string()
            } else {
                colour += 1;
                format!(r#"stroke="{}" stroke-width="2""#, COLOURS[(colour - 1) % COLOURS.len()])
            };
            let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
            writeln!(s, r#"<polyline fill="none" {style} points="{}"/>"#, line.join(" ")).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" {}>{name}</text>"#,
                PANEL_W - MARGIN + 4.0,
                y0 + MARGIN + 14.0 * legend as f64,
                style.replace("stroke", "fill").replace("fill-width=\"2\"", "").replace("fill-dasharray=\"4 3\"", "")
            )
            .unwrap();
        }
        for (n, anchor) in [(10f64.powf(xl), "start"), (10f64.powf(xh), "end")] {
            writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="{anchor}">{:.0}</text>"#, px(n), y0 + PANEL_H - MARGIN + 16.0, n).unwrap();
        }
        for v in [10f64.powf(yl), 10f64.powf(yh)] {
            writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2e}</text>"#, MARGIN - 4.0, py(v) + 4.0).unwrap();
        }
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: &str, n: usize, value: f64) -> SummaryRow {
        SummaryRow {
            model_id: "m".into(),
            graphon: "sbm".into(),
            mode: mode.into(),
            metric: "output_l2".into(),
            statistic: "median".into(),
            n: Some(n),
            value,
        }
    }

    #[test]
    fn guides_anchor_at_the_top_curve() {
        let summary = vec![row("ew-fixed", 32, 1.0), row("ew-fixed", 64, 0.5), row("ep-raw", 32, 2.0), row("ep-raw", 64, 2.0)];
        let pts = plot_series(&summary);
        let guide: Vec<&PlotPoint> = pts.iter().filter(|p| p.series == "n^-1").collect();
        assert_eq!(guide.len(), 2);
        assert_eq!(guide[0].value, 2.0);
        assert!((guide[1].value - 1.0).abs() < 1e-12);
        assert_eq!(pts.iter().filter(|p| p.series == "n^-0.5").count(), 2);
    }
}
