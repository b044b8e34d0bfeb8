//! Plot data: a `(timestamp, actual, forecast)` CSV for external tools and
//! a small standalone SVG line chart.

use std::fmt::Write as _;
use std::path::Path;

use loadcast::io::{fmt_f64, format_timestamp, write_csv, write_text};
use loadcast::series::HourlyTimeSeries;

use crate::error::CliResult;

/// The actual column is empty when no actuals are known.
pub fn write_plot_csv(path: &Path, forecast: &HourlyTimeSeries, actual: Option<&[f64]>) -> CliResult<()> {
    let rows = forecast.values().iter().enumerate().map(|(i, f)| {
        vec![
            format_timestamp(forecast.timestamp(i)),
            actual.map_or(String::new(), |a| fmt_f64(a[i])),
            fmt_f64(*f),
        ]
    });
    write_csv(path, &["timestamp", "actual", "forecast"], rows)?;
    Ok(())
}

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
/// Longer series are averaged into this many buckets.
const MAX_POINTS: usize = 1500;

fn bucket_means(v: &[f64]) -> Vec<f64> {
    let size = v.len().div_ceil(MAX_POINTS).max(1);
    v.chunks(size).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

fn polyline(v: &[f64], lo: f64, hi: f64, color: &str) -> String {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let dx = if v.len() > 1 { (WIDTH - 2.0 * MARGIN) / (v.len() - 1) as f64 } else { 0.0 };
    let mut pts = String::new();
    for (i, y) in v.iter().enumerate() {
        let px = MARGIN + dx * i as f64;
        let py = HEIGHT - MARGIN - (y - lo) / span * (HEIGHT - 2.0 * MARGIN);
        let _ = write!(pts, "{px:.1},{py:.1} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
        pts.trim_end()
    )
}

pub fn render_svg(title: &str, forecast: &HourlyTimeSeries, actual: Option<&[f64]>) -> String {
    let f = bucket_means(forecast.values());
    let a = actual.map(bucket_means);
    let all = f.iter().chain(a.iter().flatten());
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n\
         <line x1=\"{MARGIN}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"5\" y=\"{MARGIN}\" font-family=\"sans-serif\" font-size=\"10\">{hi:.0}</text>\n\
         <text x=\"5\" y=\"{b}\" font-family=\"sans-serif\" font-size=\"10\">{lo:.0}</text>\n\
         <text x=\"{MARGIN}\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n\
         <text x=\"{r}\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
        xml_escape(title),
        format_timestamp(forecast.start()),
        format_timestamp(forecast.end()),
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = HEIGHT - MARGIN + 15.0,
    );
    if let Some(a) = &a {
        svg.push_str(&polyline(a, lo, hi, "#888888"));
    }
    svg.push_str(&polyline(&f, lo, hi, "#c0392b"));
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(path: &Path, title: &str, forecast: &HourlyTimeSeries, actual: Option<&[f64]>) -> CliResult<()> {
    write_text(path, &render_svg(title, forecast, actual))?;
    Ok(())
}
