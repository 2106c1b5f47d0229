//! Minimal SVG line charts. Plots are derived views of the CSVs; coordinates
//! are printed at fixed precision so output is deterministic.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Stroke opacity, for overlaid eye traces.
    pub opacity: f64,
    pub color: Option<&'static str>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            opacity: 1.0,
            color: None,
        }
    }
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Series>,
    /// Horizontal reference line, e.g. a breakdown limit.
    pub hline: Option<(f64, &'a str)>,
    pub legend: bool,
}

fn bounds(chart: &Chart) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let pts = chart.series.iter().flat_map(|s| s.points.iter().copied());
    for (x, y) in pts.chain(chart.hline.map(|(y, _)| (f64::NAN, y))) {
        if x.is_finite() {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
        }
        if y.is_finite() {
            b.2 = b.2.min(y);
            b.3 = b.3.max(y);
        }
    }
    if !(b.0 < b.1) {
        b = (b.0.min(0.0), b.0.max(0.0) + 1.0, b.2, b.3);
    }
    if !(b.2 < b.3) {
        let y = if b.2.is_finite() { b.2 } else { 0.0 };
        b.2 = y - 1.0;
        b.3 = y + 1.0;
    }
    let pad = 0.05 * (b.3 - b.2);
    (b.0, b.1, b.2 - pad, b.3 + pad)
}

pub fn render(chart: &Chart) -> String {
    let (x0, x1, y0, y1) = bounds(chart);
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (W - ml - mr, H - mt - mb);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(chart.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(xv),
            H - mb + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            ml - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        H - 10.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(chart.y_label)
    );
    if let Some((y, label)) = chart.hline {
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" x2="{:.1}" y1="{:.2}" y2="{:.2}" stroke="#d00" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" fill="#d00" text-anchor="end">{}</text>"##,
            ml + pw,
            sy(y),
            sy(y),
            ml + pw - 4.0,
            sy(y) - 4.0,
            escape(label)
        );
    }
    for (i, series) in chart.series.iter().enumerate() {
        let color = series.color.unwrap_or(PALETTE[i % PALETTE.len()]);
        let mut pts = String::new();
        for &(x, y) in &series.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-opacity="{}" stroke-width="1.5" points="{}"/>"#,
            series.opacity,
            pts.trim_end()
        );
        if chart.legend {
            let ly = mt + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                ml + 10.0,
                ml + 30.0,
                ml + 36.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
