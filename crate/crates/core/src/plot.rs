//! Minimal SVG emitters: axes, points, error bars, polylines.

use std::fmt::Write;

use crate::analysis::CorrelationReport;
use crate::profile::IdCurve;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;
const TICKS: usize = 5;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 1.0, hi + 1.0)
            }
        };
        let (x_min, x_max) = widen(x);
        let (y_min, y_max) = widen(y);
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let (left, right) = (MARGIN, WIDTH - MARGIN);
        let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{left:.2} {top:.2} V{bottom:.2} H{right:.2}" fill="none" stroke="black"/>"#
        );
        for t in 0..=TICKS {
            let frac = t as f64 / TICKS as f64;
            let xv = self.x_min + frac * (self.x_max - self.x_min);
            let yv = self.y_min + frac * (self.y_max - self.y_min);
            let (x, y) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 4.0,
                bottom + 16.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 4.0,
                left - 6.0,
                y + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// ID against relative depth, one polyline per curve.
pub fn curve_svg(curve: &IdCurve) -> String {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter_map(|p| p.estimate.as_ref().map(|e| (p.relative_depth, e.value)))
        .collect();
    let (_, y_hi) = range(pts.iter().map(|p| p.1));
    let y_hi = if y_hi.is_finite() { y_hi * 1.1 } else { 1.0 };
    let frame = Frame::new((0.0, 1.0), (0.0, y_hi));

    let mut out = String::new();
    let title = format!("{} / {}", curve.model_id, curve.dataset_id);
    frame.open(
        &mut out,
        &title,
        "relative depth i/L",
        "intrinsic dimension",
    );
    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            frame.px(x),
            frame.py(y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Per-dataset mean peak ID against dataset ID with std error bars and the OLS line.
pub fn scatter_svg(report: &CorrelationReport) -> String {
    let (x_lo, x_hi) = range(report.points.iter().flat_map(|p| {
        let s = p.d_data_spread.unwrap_or(0.0);
        [p.d_data - s, p.d_data + s]
    }));
    let (y_lo, y_hi) = range(
        report
            .points
            .iter()
            .flat_map(|p| [p.mean_dmax - p.std_dmax, p.mean_dmax + p.std_dmax]),
    );
    let pad_x = 0.05 * (x_hi - x_lo);
    let pad_y = 0.05 * (y_hi - y_lo);
    let frame = Frame::new((x_lo - pad_x, x_hi + pad_x), (y_lo - pad_y, y_hi + pad_y));

    let mut out = String::new();
    let title = format!(
        "r = {:.3}, fit: y = {:.3} x + {:.3}",
        report.r, report.fit.slope, report.fit.intercept
    );
    frame.open(
        &mut out,
        &title,
        "dataset ID d_data",
        "peak representation ID d_max",
    );

    let (fx0, fx1) = (frame.x_min, frame.x_max);
    let fit = |x: f64| report.fit.slope * x + report.fit.intercept;
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        frame.px(fx0),
        frame.py(fit(fx0)),
        frame.px(fx1),
        frame.py(fit(fx1))
    );
    for p in &report.points {
        let (cx, cy) = (frame.px(p.d_data), frame.py(p.mean_dmax));
        let color = match p.domain {
            crate::analysis::Domain::Natural => "darkorange",
            crate::analysis::Domain::Medical => "seagreen",
        };
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/>"#,
            frame.py(p.mean_dmax - p.std_dmax),
            frame.py(p.mean_dmax + p.std_dmax)
        );
        if let Some(s) = p.d_data_spread {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{cy:.2}" x2="{:.2}" y2="{cy:.2}" stroke="{color}"/>"#,
                frame.px(p.d_data - s),
                frame.px(p.d_data + s)
            );
        }
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{color}"><title>{}</title></circle>"#,
            escape(&p.dataset_id)
        );
    }
    out.push_str("</svg>\n");
    out
}
