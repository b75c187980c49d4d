//! RD reports: CSV (round-trippable), BD-rate text summaries, SVG plots.
//!
//! CSV schema, one row per RD point:
//! `sequence,codec,preset,label,qp,bitrate_kbps,psnr,ssim,msssim,vmaf`
//! with empty cells for absent optional metrics. Floats print in Rust's
//! shortest round-trip form, so `read_csv(write_csv(curves))` is exact.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::rd::{BdRateResult, MetricKind, RdCurve, RdPoint};

const HEADER: [&str; 10] = [
    "sequence",
    "codec",
    "preset",
    "label",
    "qp",
    "bitrate_kbps",
    "psnr",
    "ssim",
    "msssim",
    "vmaf",
];

/// Write curves as CSV, one row per RD point.
pub fn write_csv(curves: &[RdCurve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if curves.is_empty() {
        return Err(Error::Contract("no curves to report".into()));
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer.write_record(HEADER).map_err(|e| csv_err(path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for curve in curves {
        for point in &curve.points {
            writer
                .write_record([
                    curve.sequence.as_str(),
                    curve.codec.as_str(),
                    curve.preset.as_str(),
                    curve.label.as_str(),
                    &point.qp.to_string(),
                    &point.bitrate_kbps.to_string(),
                    &point.metrics.psnr.to_string(),
                    &opt(point.metrics.ssim),
                    &opt(point.metrics.ms_ssim),
                    &opt(point.metrics.vmaf),
                ])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parse a report CSV back into curves. Rows group by
/// (sequence, codec, preset, label) in order of first appearance.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<RdCurve>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Serialization(format!(
            "{}: unexpected CSV header {:?}",
            path.display(),
            headers
        )));
    }
    let mut curves: Vec<RdCurve> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let parse_f64 = |i: usize| -> Result<f64> {
            record
                .get(i)
                .unwrap_or("")
                .parse()
                .map_err(|_| bad_field(path, line, HEADER[i], record.get(i)))
        };
        let parse_opt = |i: usize| -> Result<Option<f64>> {
            match record.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|_| bad_field(path, line, HEADER[i], record.get(i))),
            }
        };
        let key = (field(0), field(1), field(2), field(3));
        let point = RdPoint {
            qp: record
                .get(4)
                .unwrap_or("")
                .parse()
                .map_err(|_| bad_field(path, line, "qp", record.get(4)))?,
            bitrate_kbps: parse_f64(5)?,
            metrics: MetricReport {
                psnr: parse_f64(6)?,
                ssim: parse_opt(7)?,
                ms_ssim: parse_opt(8)?,
                vmaf: parse_opt(9)?,
            },
        };
        match curves.iter_mut().find(|c| {
            (
                c.sequence.as_str(),
                c.codec.as_str(),
                c.preset.as_str(),
                c.label.as_str(),
            ) == (
                key.0.as_str(),
                key.1.as_str(),
                key.2.as_str(),
                key.3.as_str(),
            )
        }) {
            Some(curve) => curve.points.push(point),
            None => curves.push(RdCurve {
                sequence: key.0,
                codec: key.1,
                preset: key.2,
                label: key.3,
                points: vec![point],
            }),
        }
    }
    if curves.is_empty() {
        return Err(Error::Serialization(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(curves)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Serialization(format!("{}: {e}", path.display()))
}

fn bad_field(path: &Path, line: usize, name: &str, value: Option<&str>) -> Error {
    Error::Serialization(format!(
        "{}: row {}: bad {name} value {:?}",
        path.display(),
        line + 2,
        value.unwrap_or("")
    ))
}

/// Full report: the CSV at `csv_path` plus, when BD-rate results are
/// given, a text summary next to it (`.summary.txt`).
pub fn emit_report(
    curves: &[RdCurve],
    bd_results: &[(String, BdRateResult)],
    csv_path: impl AsRef<Path>,
) -> Result<()> {
    let csv_path = csv_path.as_ref();
    write_csv(curves, csv_path)?;
    if !bd_results.is_empty() {
        write_summary(bd_results, csv_path.with_extension("summary.txt"))?;
    }
    Ok(())
}

/// Plain-text summary of labeled BD-rate results.
pub fn write_summary(results: &[(String, BdRateResult)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if results.is_empty() {
        return Err(Error::Contract("no BD-rate results to summarize".into()));
    }
    let mut text = String::from("bd-rate summary (negative = bitrate saving)\n");
    for (label, r) in results {
        text.push_str(&format!(
            "{label}: {:+.4}% ({} overlap [{:.6}, {:.6}])\n",
            r.percent,
            r.metric.name(),
            r.overlap.0,
            r.overlap.1
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Standalone SVG plot: log-scaled bitrate on x, the selected metric on
/// y, one polyline per curve with a legend.
pub fn emit_plot(curves: &[RdCurve], metric: MetricKind, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut series: Vec<(&RdCurve, Vec<(f64, f64)>)> = Vec::new();
    for curve in curves {
        let mut pts = Vec::new();
        for p in &curve.points {
            if let Some(q) = metric.extract(&p.metrics) {
                if p.bitrate_kbps > 0.0 && q.is_finite() {
                    pts.push((p.bitrate_kbps.log10(), q));
                }
            }
        }
        if pts.len() >= 2 {
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            series.push((curve, pts));
        }
    }
    if series.is_empty() {
        return Err(Error::Contract(format!(
            "no curve carries metric {} with at least 2 points",
            metric.name()
        )));
    }

    let (width, height) = (800.0, 500.0);
    let (ml, mr, mt, mb) = (70.0, 30.0, 30.0, 60.0);
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut x0, mut x1) = min_max(all.iter().map(|p| p.0));
    let (mut y0, mut y1) = min_max(all.iter().map(|p| p.1));
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (width - ml - mr);
    let sy = |y: f64| height - mb - (y - y0) / (y1 - y0) * (height - mt - mb);

    const PALETTE: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Decade and half-decade ticks on the log-rate axis.
    let mut tick = x0.floor();
    svg.push_str("<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n");
    while tick <= x1.ceil() + 1e-9 {
        for t in [tick, tick + 10f64.log10() / 2.0] {
            if t >= x0 - 1e-9 && t <= x1 + 1e-9 {
                let x = sx(t);
                svg.push_str(&format!(
                    "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
                     stroke=\"#ddd\"/>\n",
                    mt,
                    height - mb
                ));
                svg.push_str(&format!(
                    "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.0}</text>\n",
                    height - mb + 16.0,
                    10f64.powf(t)
                ));
            }
        }
        tick += 1.0;
    }
    for i in 0..=4 {
        let q = y0 + (y1 - y0) * f64::from(i) / 4.0;
        let y = sy(q);
        svg.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n",
            width - mr
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{q:.4}</text>\n",
            ml - 6.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">bitrate (kbps, log scale)</text>\n",
        (ml + width - mr) / 2.0,
        height - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (mt + height - mb) / 2.0,
        (mt + height - mb) / 2.0,
        metric.name()
    ));
    svg.push_str("</g>\n");

    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n",
        width - ml - mr,
        height - mt - mb
    ));

    for (i, (curve, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path_points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            path_points.join(" ")
        ));
        for &(x, y) in pts {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        let ly = mt + 16.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            ml + 10.0,
            ml + 34.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">{}</text>\n",
            ml + 40.0,
            ly + 4.0,
            escape_xml(&format!(
                "{} {} [{}] {}",
                curve.sequence, curve.codec, curve.preset, curve.label
            ))
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
