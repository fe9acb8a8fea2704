//! Cumulative-profit line charts as plain SVG. Output is a pure function of
//! the input curves, so identical bundles give byte-identical files.

use std::fmt::Write;
use std::path::Path;

use chrono::NaiveDate;

use crate::backtest::read_cumprofit_csv;
use crate::error::{Error, Result};

pub struct Curve {
    pub name: String,
    pub points: Vec<(NaiveDate, f64)>,
}

const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];

const W: f64 = 800.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Renders the curves plus a black benchmark line.
pub fn render_svg(curves: &[Curve], benchmark: &Curve) -> String {
    let all = || curves.iter().chain(std::iter::once(benchmark)).flat_map(|c| c.points.iter());
    let (mut d0, mut d1) = (NaiveDate::MAX, NaiveDate::MIN);
    let (mut y0, mut y1) = (0.0f64, 0.0f64);
    for (d, y) in all() {
        d0 = d0.min(*d);
        d1 = d1.max(*d);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if d0 > d1 {
        d0 = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        d1 = d0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let span = ((d1 - d0).num_days() as f64).max(1.0);
    let px = |d: NaiveDate| LEFT + (d - d0).num_days() as f64 / span * (W - LEFT - RIGHT);
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (xa, xb, ya, yb) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r##"<path d="M{xa},{ya} L{xa},{yb} L{xb},{yb}" fill="none" stroke="#444"/>"##);
    for i in 0..=4 {
        let v = y0 + (y1 - y0) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{xa}" y2="{y:.2}" stroke="#444"/>"##, xa - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, xa - 6.0, y + 4.0);
    }
    for (i, d) in [d0, d1].into_iter().enumerate() {
        let anchor = if i == 0 { "start" } else { "end" };
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{d}</text>"#, px(d), yb + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Date</text>"#, (xa + xb) / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Cumulative profit (per 1 USD per day)</text>"#,
        (ya + yb) / 2.0,
        (ya + yb) / 2.0
    );

    let mut line = |name: &str, points: &[(NaiveDate, f64)], color: &str, slot: usize| {
        if !points.is_empty() {
            let mut d = String::new();
            for (i, (x, y)) in points.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(*x), py(*y));
            }
            let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        }
        let ly = TOP + 10.0 + 18.0 * slot as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            xb + 12.0,
            xb + 32.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, xb + 38.0, ly + 4.0, escape(name));
    };
    line(&benchmark.name, &benchmark.points, "#000000", 0);
    for (i, c) in curves.iter().enumerate() {
        line(&c.name, &c.points, PALETTE[i % PALETTE.len()], i + 1);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `cumprofit_<spec>.csv` for each spec and the benchmark curve from a bundle.
pub fn plot_bundle(dir: &Path, specs: &[String]) -> Result<String> {
    let mut curves = Vec::new();
    for spec in specs {
        let path = dir.join(format!("cumprofit_{spec}.csv"));
        if !path.exists() {
            return Err(Error::UnknownSpec(spec.clone()));
        }
        curves.push(Curve {
            name: spec.clone(),
            points: read_cumprofit_csv(&path)?,
        });
    }
    let benchmark = Curve {
        name: "benchmark".into(),
        points: read_cumprofit_csv(dir.join("cumprofit_benchmark.csv"))?,
    };
    Ok(render_svg(&curves, &benchmark))
}
