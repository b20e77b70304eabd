//! CSV tables and a dependency-free SVG line chart rendered from CSV text.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{domain, Result};
use crate::exact_spectra::Spectrum;
use crate::sweep::{Family, SweepTable};

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Header and rows of a sweep as CSV. Failed samples keep their parameter,
/// leave value cells empty and carry the failure in the `status` column.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let (x, prefix) = match table.family {
        Family::ApertureIsosceles => ("alpha", "mu"),
        Family::RectangleAspect => ("ratio", "M"),
    };
    let mut header = vec![x.to_string()];
    header.extend(table.n_values.iter().map(|n| format!("{prefix}{n}D2")));
    header.extend(table.n_values.iter().map(|n| format!("err_{prefix}{n}D2")));
    header.push("status".into());
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![r.parameter.to_string()];
        rec.extend(r.values.iter().map(|&v| cell(v)));
        rec.extend(r.errors.iter().map(|&v| cell(v)));
        rec.push(r.failure.clone().map_or_else(|| "ok".into(), |f| format!("failed: {f}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv_string(table: &SweepTable) -> Result<String> {
    let mut buf = Vec::new();
    write_sweep_csv(table, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `j, value[, m, n][, error]` per eigenvalue.
pub fn write_spectrum_csv<W: Write>(s: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["j", "value"];
    if s.labels().is_some() {
        header.extend(["m", "n"]);
    }
    if s.error_estimates().is_some() {
        header.push("error");
    }
    w.write_record(&header)?;
    for (k, v) in s.values().iter().enumerate() {
        let mut rec = vec![(k + 1).to_string(), v.to_string()];
        if let Some(l) = s.labels() {
            rec.push(l[k].0.to_string());
            rec.push(l[k].1.to_string());
        }
        if let Some(e) = s.error_estimates() {
            rec.push(e[k].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes any header plus rows of display-able cells.
pub fn write_table_csv<W: Write>(header: &[&str], rows: &[Vec<String>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Renders a line chart of every numeric column against the first column.
/// Columns whose header starts with `err_` and non-numeric columns are skipped;
/// empty cells break the line.
pub fn render_svg(csv_text: &str, title: &str) -> Result<String> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(domain("need an x column and at least one series"));
    }
    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    let parse = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    let series_cols: Vec<usize> = (1..headers.len())
        .filter(|&c| !headers[c].starts_with("err_"))
        .filter(|&c| records.iter().any(|r| r.get(c).and_then(parse).is_some()))
        .collect();
    let mut xs = Vec::new();
    let mut series: Vec<Vec<Option<(f64, f64)>>> = vec![Vec::new(); series_cols.len()];
    for r in &records {
        let Some(x) = r.get(0).and_then(parse) else { continue };
        xs.push(x);
        for (k, &c) in series_cols.iter().enumerate() {
            series[k].push(r.get(c).and_then(parse).map(|y| (x, y)));
        }
    }
    let ys: Vec<f64> = series.iter().flatten().flatten().map(|p| p.1).collect();
    if xs.is_empty() || ys.is_empty() {
        return Err(domain("no numeric data to plot"));
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let (w, h, ml, mr, mt, mb) = (720.0, 480.0, 70.0, 140.0, 40.0, 50.0);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{ml},{mt} L{ml},{} L{},{}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr,
        h - mb
    );
    for k in 0..=5 {
        let fx = x0 + (x1 - x0) * k as f64 / 5.0;
        let fy = y0 + (y1 - y0) * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            sx(fx),
            h - mb + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            ml - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" x2="{}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            w - mr,
            sy(fy),
            sy(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
        (ml + w - mr) / 2.0,
        h - 10.0,
        escape(&headers[0])
    );
    for (k, pts) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for p in pts {
            match p {
                Some((x, y)) => {
                    let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(*x), sy(*y));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = mt + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            w - mr + 10.0,
            w - mr + 30.0,
            w - mr + 36.0,
            ly + 4.0,
            escape(&headers[series_cols[k]])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
