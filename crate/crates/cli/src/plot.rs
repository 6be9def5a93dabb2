//! Self-contained SVG line charts (no external assets, no scripts).
//!
//! Deliberately small: polyline series on linear or log10 y-axes, nice-ish
//! tick values, optional dashing per series, a simple legend, and a grid
//! compositor for multi-panel figures.

/// One curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Index into the palette.
    pub color: usize,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: usize) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
            color,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ChartConfig {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
    pub log_y: bool,
    pub legend: bool,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "t".into(),
            y_label: String::new(),
            width: 640.0,
            height: 420.0,
            log_y: false,
            legend: true,
        }
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 14.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 46.0;

/// Render one chart as a complete `<svg>` document.
pub fn line_chart(config: &ChartConfig, series: &[Series]) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = config.width,
        h = config.height
    ));
    svg.push('\n');
    svg.push_str(&chart_group(config, series, 0.0, 0.0));
    svg.push_str("</svg>\n");
    svg
}

/// Compose several charts into one figure, `columns` per row.
pub fn panel_grid(title: &str, panels: &[(ChartConfig, Vec<Series>)], columns: usize) -> String {
    assert!(columns > 0 && !panels.is_empty());
    let rows = panels.len().div_ceil(columns);
    let cell_w = panels.iter().map(|(c, _)| c.width).fold(0.0, f64::max);
    let cell_h = panels.iter().map(|(c, _)| c.height).fold(0.0, f64::max);
    let title_h = if title.is_empty() { 0.0 } else { 28.0 };
    let total_w = cell_w * columns as f64;
    let total_h = cell_h * rows as f64 + title_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    ));
    svg.push('\n');
    if !title.is_empty() {
        svg.push_str(&format!(
            r#"<text x="{}" y="19" text-anchor="middle" font-family="sans-serif" font-size="15" font-weight="bold">{}</text>"#,
            total_w / 2.0,
            escape(title)
        ));
        svg.push('\n');
    }
    for (i, (config, series)) in panels.iter().enumerate() {
        let x = (i % columns) as f64 * cell_w;
        let y = (i / columns) as f64 * cell_h + title_h;
        svg.push_str(&chart_group(config, series, x, y));
    }
    svg.push_str("</svg>\n");
    svg
}

fn chart_group(config: &ChartConfig, series: &[Series], ox: f64, oy: f64) -> String {
    let plot_w = config.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = config.height - MARGIN_TOP - MARGIN_BOTTOM;

    // data ranges
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut y_pos_min = f64::INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
            if y > 0.0 {
                y_pos_min = y_pos_min.min(y);
            }
        }
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }

    // y transform
    let (t_min, t_max, transform): (f64, f64, Box<dyn Fn(f64) -> Option<f64>>) = if config.log_y {
        let floor = if y_pos_min.is_finite() { y_pos_min } else { 1e-12 };
        let lo = floor.log10().floor();
        let hi = if y_max > 0.0 { y_max.log10().ceil() } else { lo + 1.0 };
        let hi = if hi <= lo { lo + 1.0 } else { hi };
        (lo, hi, Box::new(move |y: f64| (y > 0.0).then(|| y.log10())))
    } else {
        let lo = y_min.min(0.0);
        let hi = if y_max > lo { y_max } else { lo + 1.0 };
        let pad = (hi - lo) * 0.04;
        (lo, hi + pad, Box::new(|y: f64| Some(y)))
    };

    let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |t: f64| MARGIN_TOP + plot_h - (t - t_min) / (t_max - t_min) * plot_h;

    let mut g = format!("<g transform=\"translate({ox},{oy})\">\n");
    // frame
    g.push_str(&format!(
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="white" stroke="#888" stroke-width="1"/>"##
    ));
    g.push('\n');

    // ticks
    for x in nice_ticks(x_min, x_max, 5) {
        let px = sx(x);
        g.push_str(&format!(
            r##"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{y2:.2}" stroke="#ddd" stroke-width="0.6"/>"##,
            y1 = MARGIN_TOP,
            y2 = MARGIN_TOP + plot_h
        ));
        g.push_str(&format!(
            r#"<text x="{px:.2}" y="{ty:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            format_tick(x),
            ty = MARGIN_TOP + plot_h + 14.0
        ));
        g.push('\n');
    }
    let y_ticks: Vec<f64> = if config.log_y {
        (t_min.round() as i64..=t_max.round() as i64).map(|e| e as f64).collect()
    } else {
        nice_ticks(t_min, t_max, 5)
    };
    for t in y_ticks {
        let py = sy(t);
        if !(MARGIN_TOP - 1.0..=MARGIN_TOP + plot_h + 1.0).contains(&py) {
            continue;
        }
        let label = if config.log_y {
            format!("1e{}", t as i64)
        } else {
            format_tick(t)
        };
        g.push_str(&format!(
            r##"<line x1="{x1}" y1="{py:.2}" x2="{x2:.2}" y2="{py:.2}" stroke="#ddd" stroke-width="0.6"/>"##,
            x1 = MARGIN_LEFT,
            x2 = MARGIN_LEFT + plot_w
        ));
        g.push_str(&format!(
            r#"<text x="{tx:.2}" y="{py:.2}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="10">{label}</text>"#,
            tx = MARGIN_LEFT - 5.0
        ));
        g.push('\n');
    }

    // series
    for s in series {
        let color = PALETTE[s.color % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            match transform(y) {
                Some(t) => {
                    let px = sx(x);
                    let py = sy(t.clamp(t_min, t_max));
                    path.push_str(if pen_down { "L" } else { "M" });
                    path.push_str(&format!("{px:.2},{py:.2} "));
                    pen_down = true;
                }
                None => pen_down = false, // log scale skips nonpositive values
            }
        }
        if !path.is_empty() {
            g.push_str(&format!(
                r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.4"{dash}/>"#
            ));
            g.push('\n');
        }
    }

    // labels
    if !config.title.is_empty() {
        g.push_str(&format!(
            r#"<text x="{cx:.2}" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="12" font-weight="bold">{}</text>"#,
            escape(&config.title),
            cx = MARGIN_LEFT + plot_w / 2.0,
            ty = MARGIN_TOP - 9.0
        ));
        g.push('\n');
    }
    g.push_str(&format!(
        r#"<text x="{cx:.2}" y="{ty:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
        escape(&config.x_label),
        cx = MARGIN_LEFT + plot_w / 2.0,
        ty = config.height - 12.0
    ));
    g.push('\n');
    if !config.y_label.is_empty() {
        g.push_str(&format!(
            r#"<text x="14" y="{cy:.2}" text-anchor="middle" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {cy:.2})">{}</text>"#,
            escape(&config.y_label),
            cy = MARGIN_TOP + plot_h / 2.0
        ));
        g.push('\n');
    }

    // legend (skipped when it would drown the plot)
    if config.legend && series.len() <= 12 {
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[s.color % PALETTE.len()];
            let lx = MARGIN_LEFT + plot_w - 120.0;
            let ly = MARGIN_TOP + 14.0 + i as f64 * 14.0;
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            g.push_str(&format!(
                r#"<line x1="{lx}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="1.6"{dash}/>"#,
                x2 = lx + 22.0
            ));
            g.push_str(&format!(
                r#"<text x="{tx}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" font-size="10">{}</text>"#,
                escape(&s.label),
                tx = lx + 27.0
            ));
            g.push('\n');
        }
    }
    g.push_str("</g>\n");
    g
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if span <= 0.0 || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut x = first;
    while x <= hi + step * 1e-9 {
        ticks.push(if x.abs() < step * 1e-9 { 0.0 } else { x });
        x += step;
    }
    ticks
}

fn format_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let ax = x.abs();
    if ax >= 1e4 || ax < 1e-3 {
        format!("{x:.0e}")
    } else if ax >= 1.0 {
        let s = format!("{x:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
