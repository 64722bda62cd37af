//! Static SVG views of results.csv. Charts read nothing but result rows.

use std::fmt::Write;

use crate::config::ExperimentKind;
use crate::experiments::ALL_SEEDS;
use crate::output::Row;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

enum View {
    /// One line per metric against the number in labels `"{prefix}{x}"`.
    Lines {
        prefix: &'static str,
        metrics: &'static [&'static str],
        x_title: &'static str,
        log_x: bool,
    },
    /// One bar per label for an aggregate metric.
    Bars { metric: &'static str },
}

fn view(kind: ExperimentKind) -> (&'static str, View) {
    match kind {
        ExperimentKind::Kelly => (
            "Kelly fraction by number of games",
            View::Lines {
                prefix: "n=",
                metrics: &["paper_fraction", "numeric_fraction"],
                x_title: "games per round",
                log_x: false,
            },
        ),
        ExperimentKind::Lottery => ("Monte Carlo net payoff per ticket", View::Bars { metric: "mc_mean_net" }),
        ExperimentKind::Sde => (
            "Mean price",
            View::Lines {
                prefix: "t=",
                metrics: &["price_mean", "price_mean_exact"],
                x_title: "time",
                log_x: false,
            },
        ),
        ExperimentKind::Arena => ("Mean log growth", View::Bars { metric: "mean_log_growth" }),
        ExperimentKind::Hedge => (
            "Hedging error against the gamma accrual",
            View::Lines {
                prefix: "steps=",
                metrics: &["mean_abs_gap"],
                x_title: "rehedges to maturity (log scale)",
                log_x: true,
            },
        ),
        ExperimentKind::Impact => (
            "Two-venue cycle net cash",
            View::Lines {
                prefix: "round=",
                metrics: &["net_cash"],
                x_title: "round",
                log_x: false,
            },
        ),
    }
}

/// Renders the chart for `kind`, or `None` when the rows hold nothing to plot.
pub fn render(kind: ExperimentKind, rows: &[Row]) -> Option<String> {
    let (title, view) = view(kind);
    match view {
        View::Lines {
            prefix,
            metrics,
            x_title,
            log_x,
        } => {
            let series: Vec<(&str, Vec<(f64, f64)>)> = metrics
                .iter()
                .map(|&m| {
                    let mut pts: Vec<(f64, f64)> = rows
                        .iter()
                        .filter(|r| r.metric == m)
                        .filter_map(|r| {
                            let x: f64 = r.label.strip_prefix(prefix)?.parse().ok()?;
                            let x = if log_x { x.log10() } else { x };
                            (x.is_finite() && r.value.is_finite()).then_some((x, r.value))
                        })
                        .collect();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    (m, pts)
                })
                .filter(|(_, pts)| !pts.is_empty())
                .collect();
            if series.is_empty() {
                return None;
            }
            Some(lines(title, x_title, log_x, &series))
        }
        View::Bars { metric } => {
            let bars: Vec<(&str, f64)> = rows
                .iter()
                .filter(|r| r.metric == metric && (r.seed == ALL_SEEDS || kind != ExperimentKind::Arena))
                .filter(|r| r.value.is_finite())
                .map(|r| (r.label.as_str(), r.value))
                .collect();
            if bars.is_empty() {
                return None;
            }
            Some(bar_chart(title, metric, &bars))
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Expands a degenerate range so the scale stays finite.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

struct Frame {
    svg: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(title)
        );
        Frame { svg, x, y }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn y_axis(&mut self) {
        for i in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * f64::from(i) / 4.0;
            let y = self.py(v);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                WIDTH - RIGHT,
                LEFT - 6.0,
                y + 4.0,
                tick(v)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
    }

    fn legend(&mut self, i: usize, name: &str) {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            self.svg,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            COLORS[i % COLORS.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn lines(title: &str, x_title: &str, log_x: bool, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let mut f = Frame::new(title, padded(x0, x1), padded(y0, y1));
    f.y_axis();
    for i in 0..=4 {
        let v = f.x.0 + (f.x.1 - f.x.0) * f64::from(i) / 4.0;
        let label = if log_x { tick(10f64.powf(v)) } else { tick(v) };
        let x = f.px(v);
        let _ = writeln!(
            f.svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            HEIGHT - BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        f.svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(x_title)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            f.svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for c in &coords {
            let (cx, cy) = c.split_once(',').expect("formatted pair");
            let _ = writeln!(f.svg, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        f.legend(i, name);
    }
    f.finish()
}

fn bar_chart(title: &str, metric: &str, bars: &[(&str, f64)]) -> String {
    let lo = bars.iter().map(|b| b.1).fold(0.0, f64::min);
    let hi = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let mut f = Frame::new(title, (0.0, bars.len() as f64), padded(lo, hi));
    f.y_axis();
    let zero = f.py(0.0);
    for (i, &(label, value)) in bars.iter().enumerate() {
        let x = f.px(i as f64 + 0.15);
        let w = f.px(i as f64 + 0.85) - x;
        let y = f.py(value);
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            f.svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{color}"/>"#,
            y.min(zero),
            (y - zero).abs()
        );
        f.legend(i, label);
    }
    let _ = writeln!(
        f.svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(metric)
    );
    f.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: &str, metric: &str, value: f64) -> Row {
        Row {
            experiment: "kelly".into(),
            seed: "0".into(),
            label: label.into(),
            metric: metric.into(),
            value,
        }
    }

    #[test]
    fn line_chart_has_a_point_per_row() {
        let rows: Vec<Row> = (1..=4).map(|n| row(&format!("n={n}"), "numeric_fraction", 0.1 * f64::from(n))).collect();
        let svg = render(ExperimentKind::Kelly, &rows).unwrap();
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn nothing_to_plot() {
        assert!(render(ExperimentKind::Kelly, &[row("n=1", "other", 1.0)]).is_none());
    }

    #[test]
    fn labels_are_escaped() {
        let rows = vec![Row {
            experiment: "arena".into(),
            seed: "all".into(),
            label: "a<b>&c".into(),
            metric: "mean_log_growth".into(),
            value: -0.5,
        }];
        let svg = render(ExperimentKind::Arena, &rows).unwrap();
        assert!(svg.contains("a&lt;b&gt;&amp;c"));
    }
}
