//! Standalone SVG charts: line charts, bar charts, heat strips and matrices.
//!
//! Coordinates are printed with two decimals so identical data gives
//! byte-identical documents.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    s
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

/// Maps data ranges onto the plot area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let widen = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn axes(&self, s: &mut String, x_label: &str, y_label: &str) {
        let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
        let _ = writeln!(
            s,
            r#"<path d="M{left:.2},{top:.2} L{left:.2},{bottom:.2} L{right:.2},{bottom:.2}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let yv = self.y0 + f * (self.y1 - self.y0);
            let xv = self.x0 + f * (self.x1 - self.x0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
                left - 4.0,
                self.py(yv) + 3.0,
                tick(yv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
                self.px(xv),
                bottom + 14.0,
                tick(xv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            HEIGHT - 10.0,
            escape(x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#,
            y,
            color(i)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            x + 14.0,
            y + 9.0,
            escape(name)
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// One polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let frame = Frame::new(x0.min(0.0), x1.max(0.0), y0.min(0.0), y1.max(0.0));
    let mut s = open(WIDTH, HEIGHT, title);
    frame.axes(&mut s, x_label, y_label);
    for (i, (name, points)) in series.iter().enumerate() {
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            escape(name),
            coords.join(" "),
            color(i)
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut s, &names);
    close(s)
}

/// One bar per entry, from zero.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let (lo, hi) = bounds(bars.iter().map(|b| b.1));
    let frame = Frame::new(0.0, bars.len().max(1) as f64, lo.min(0.0), hi.max(0.0));
    let mut s = open(WIDTH, HEIGHT, title);
    frame.axes(&mut s, "", y_label);
    for (i, (name, value)) in bars.iter().enumerate() {
        let (xa, xb) = (frame.px(i as f64 + 0.15), frame.px(i as f64 + 0.85));
        let (ya, yb) = (frame.py(value.max(0.0)), frame.py(value.min(0.0)));
        let _ = writeln!(
            s,
            r#"<rect class="bar" data-name="{}" x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}</title></rect>"#,
            escape(name),
            xb - xa,
            yb - ya,
            color(i),
            escape(&format!("{name}: {value}"))
        );
    }
    let names: Vec<&str> = bars.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut s, &names);
    close(s)
}

/// Each channel as a line over a strip of cells shaded by `intensity`
/// (expected in `[0, 1]`).
pub fn heat_strip(title: &str, signal: &[Vec<f64>], intensity: &[Vec<f64>]) -> String {
    let band = 120.0;
    let height = MARGIN_TOP + band * signal.len() as f64 + 20.0;
    let width = WIDTH;
    let inner = width - 2.0 * 20.0;
    let mut s = open(width, height, title);
    for (ch, (values, heat)) in signal.iter().zip(intensity).enumerate() {
        let top = MARGIN_TOP + band * ch as f64;
        let n = values.len().max(1);
        let cell = inner / n as f64;
        for (i, h) in heat.iter().enumerate() {
            let alpha = h.clamp(0.0, 1.0);
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#d62728" fill-opacity="{alpha:.3}"/>"##,
                20.0 + cell * i as f64,
                cell + 0.01,
                band - 10.0
            );
        }
        let (lo, hi) = bounds(values.iter().copied());
        let span = if hi > lo { hi - lo } else { 1.0 };
        let coords: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = 20.0 + cell * (i as f64 + 0.5);
                let y = top + (band - 10.0) * (1.0 - (v - lo) / span);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="signal" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }
    close(s)
}

/// Grid of cells shaded by value, with the value printed in each cell.
pub fn matrix_chart(title: &str, row_label: &str, col_label: &str, labels: &[String], values: &[Vec<f64>]) -> String {
    let n = labels.len().max(1);
    let cell = (360.0 / n as f64).min(60.0);
    let (left, top) = (90.0, 60.0);
    let width = left + cell * n as f64 + 30.0;
    let height = top + cell * n as f64 + 50.0;
    let (lo, hi) = bounds(values.iter().flatten().copied().filter(|v| v.is_finite()));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = open(width, height, title);
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let shade = if v.is_finite() { (v - lo) / span } else { 0.0 };
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="#1f77b4" fill-opacity="{:.3}" stroke="white"/>"##,
                left + cell * c as f64,
                top + cell * r as f64,
                0.1 + 0.9 * shade
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
                left + cell * (c as f64 + 0.5),
                top + cell * (r as f64 + 0.5) + 3.0,
                if v.is_finite() { format!("{v:.2}") } else { "-".into() }
            );
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            top + cell * (i as f64 + 0.5) + 4.0,
            escape(label)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            left + cell * (i as f64 + 0.5),
            top - 6.0,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        left + cell * n as f64 / 2.0,
        height - 14.0,
        escape(col_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        top + cell * n as f64 / 2.0,
        top + cell * n as f64 / 2.0,
        escape(row_label)
    );
    close(s)
}
