//! CSV and SVG emission. Output bytes depend only on the values written.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qmarket_core::TimeSeries;

use crate::error::CliResult;

pub const SERIES_HEADER: &str = "t,n_shares,n_cash,n_loi,portfolio,conserved_M";

/// `%.15g`: 15 significant digits, trailing zeros dropped, exponent form
/// outside `[1e−5, 1e15)`.
pub fn fmt_g15(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn series_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(64 * (series.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let row = [
            series.times[i],
            series.n_shares[i],
            series.n_cash[i],
            series.n_loi[i],
            series.portfolio[i],
            series.conserved[i],
        ];
        push_row(&mut out, &row);
    }
    out
}

pub fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g15(*v));
    }
    out.push('\n');
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of `y(t)` with a frame, min/max tick labels and a title.
pub fn line_svg(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;
    let finite = |v: &[f64]| {
        v.iter()
            .filter(|x| x.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    };
    let (mut x0, mut x1) = finite(xs);
    let (mut y0, mut y1) = finite(ys);
    if !(x0 < x1) {
        x0 = if x0.is_finite() { x0 - 0.5 } else { 0.0 };
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        let c = if y0.is_finite() { y0 } else { 0.0 };
        y0 = c - 0.5;
        y1 = c + 0.5;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
        }
    }
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.trim_end()
    );
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(body)
        );
    };
    text(&mut s, W / 2.0, 24.0, "middle", title);
    text(&mut s, LEFT, H - BOTTOM + 18.0, "middle", &fmt_g15(x0));
    text(&mut s, W - RIGHT, H - BOTTOM + 18.0, "middle", &fmt_g15(x1));
    text(&mut s, LEFT - 6.0, H - BOTTOM, "end", &format!("{y0:.4}"));
    text(&mut s, LEFT - 6.0, TOP + 4.0, "end", &format!("{y1:.4}"));
    text(&mut s, (LEFT + W - RIGHT) / 2.0, H - 12.0, "middle", x_label);
    text(&mut s, 16.0, (TOP + H - BOTTOM) / 2.0, "middle", y_label);
    s.push_str("</svg>\n");
    s
}
