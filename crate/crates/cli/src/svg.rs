//! Static line charts of loss against round.

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
const MAX_POINTS: usize = 1500;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// One named curve of `(round, loss)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(u64, f64)>,
}

/// Renders the curves with a base-10 logarithmic loss axis.
///
/// When some loss is not positive, every value is shifted by `c = 1 - min`
/// before taking the logarithm and the axis label states the shift. Curves
/// longer than `MAX_POINTS` are thinned to an even stride that keeps the
/// final point.
pub fn line_chart(title: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let min_loss = all.clone().map(|p| p.1).filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let t_max = all.clone().map(|p| p.0).max().unwrap_or(1).max(2);
    let shift = if min_loss.is_finite() && min_loss <= 0.0 { 1.0 - min_loss } else { 0.0 };
    let to_y = |v: f64| (v + shift).log10();

    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| to_y(p.1)))
        .filter(|y| y.is_finite())
        .collect();
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let lo = lo.floor();
    let hi = hi.ceil().max(lo + 1.0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: u64| LEFT + plot_w * (t as f64 - 1.0) / (t_max as f64 - 1.0);
    let py = |y: f64| TOP + plot_h * (hi - y) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    let decades = (hi - lo) as i64;
    let step = (decades / 8).max(1);
    let mut k = lo as i64;
    while k <= hi as i64 {
        let y = py(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        k += step;
    }
    for i in 0..=4u64 {
        let t = 1 + (t_max - 1) * i / 4;
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#, TOP + plot_h + 20.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">round t</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let y_label = if shift == 0.0 { "loss (log scale)".to_string() } else { format!("loss + {shift:.6} (log scale)") };
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stride = ser.points.len().div_ceil(MAX_POINTS).max(1);
        let last = ser.points.len().saturating_sub(1);
        let mut pts = String::new();
        for (j, &(t, v)) in ser.points.iter().enumerate() {
            if j % stride != 0 && j != last {
                continue;
            }
            let y = to_y(v);
            if !y.is_finite() {
                continue;
            }
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", px(t), py(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#,
            escape(&ser.name)
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#,
            lx + 25.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 32.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ser(name: &str, f: impl Fn(u64) -> f64, n: u64) -> Series {
        Series { name: name.into(), points: (1..=n).map(|t| (t, f(t))).collect() }
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = line_chart("demo", &[ser("a", |t| 1.0 / t as f64, 50), ser("b<c>", |t| 2.0 / t as f64, 50)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c&gt;"));
        assert!(svg.contains("loss (log scale)"));
    }

    #[test]
    fn nonpositive_losses_are_shifted() {
        let svg = line_chart("q", &[ser("a", |t| -3.0 + 1.0 / t as f64, 20)]);
        assert!(svg.contains("loss + 3.950000"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn long_series_are_thinned() {
        let svg = line_chart("long", &[ser("a", |t| 1.0 + t as f64, 100_000)]);
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let n = poly.split("points=\"").nth(1).unwrap().split(' ').count();
        assert!(n <= MAX_POINTS + 1, "{n}");
    }

    #[test]
    fn deterministic() {
        let data = [ser("a", |t| (t as f64).sqrt(), 300)];
        assert_eq!(line_chart("d", &data), line_chart("d", &data));
    }
}
