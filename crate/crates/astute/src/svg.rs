//! Self-contained SVG line charts of astuteness curves.

use std::fmt::Write;

use astute_core::robustness::RobustnessCurve;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

struct Frame {
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + (t - self.lo) / (self.hi - self.lo) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - v.clamp(0.0, 1.0) * (HEIGHT - TOP - BOTTOM)
    }

    /// Points of `curve` restricted to `[lo, hi]`, with the ends filled by
    /// the same constant extrapolation the AUC uses.
    fn path(&self, curve: &RobustnessCurve) -> String {
        let mut pts = vec![(self.lo, curve.value_at(self.lo))];
        pts.extend(
            curve.grid.iter().zip(&curve.values).filter(|(&g, _)| g > self.lo && g < self.hi).map(|(&g, &v)| (g, v)),
        );
        pts.push((self.hi, curve.value_at(self.hi)));
        let mut s = String::new();
        for (k, (t, v)) in pts.into_iter().enumerate() {
            let _ = write!(s, "{}{:.2},{:.2}", if k == 0 { "" } else { " " }, self.x(t), self.y(v));
        }
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One chart: empirical astuteness solid, predicted lower bound dashed, both
/// over `[lo, hi] × [0, 1]`. `spread` adds ±1 standard-deviation bars to the
/// empirical curve at its grid points.
pub fn chart(
    title: &str,
    empirical: &RobustnessCurve,
    bound: &RobustnessCurve,
    lo: f64,
    hi: f64,
    spread: Option<&[f64]>,
) -> String {
    let f = Frame { lo, hi };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // gridlines and ticks
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let y = f.y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, LEFT - 6.0, y + 4.0);
    }
    for k in 0..=5 {
        let t = lo + (hi - lo) * k as f64 / 5.0;
        let x = f.x(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333333" stroke-width="1"/>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 4.0
        );
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"#, HEIGHT - BOTTOM + 16.0);
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">astuteness</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );

    if let Some(sd) = spread {
        for ((&g, &v), &e) in empirical.grid.iter().zip(&empirical.values).zip(sd) {
            if g < lo || g > hi || e <= 0.0 {
                continue;
            }
            let x = f.x(g);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#1f77b4" stroke-width="1"/>"##,
                f.y(v - e),
                f.y(v + e)
            );
        }
    }
    let _ =
        writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, f.path(empirical));
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="6 4"/>"##,
        f.path(bound)
    );

    // legend
    let (lx, ly) = (WIDTH - RIGHT - 150.0, HEIGHT - BOTTOM - 34.0);
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#1f77b4" stroke-width="2"/>"##,
        lx + 24.0
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">empirical</text>"#, lx + 30.0, ly + 4.0);
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="2" stroke-dasharray="6 4"/>"##,
        ly + 16.0,
        lx + 24.0,
        ly + 16.0
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">predicted bound</text>"#, lx + 30.0, ly + 20.0);
    s.push_str("</svg>\n");
    s
}
