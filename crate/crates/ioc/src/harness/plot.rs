//! Minimal self-contained SVG renderers: line charts for learning curves and
//! cell grids for heatmaps. No dependencies, text output only.

use std::fmt::Write as _;

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    /// Optional half-width band around each point (for standard errors).
    pub band: Option<Vec<f64>>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Series { label: label.into(), points, color, band: None }
    }
}

fn nice_ticks(lo: f64, hi: f64, want: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / want as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        // Snap near-zero ticks so labels do not read "-0".
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Render one or more series as an SVG line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (820.0, 500.0);
    let (ml, mr, mt, mb) = (70.0, 25.0, 45.0, 55.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let r = s.band.as_ref().map(|b| b[i]).unwrap_or(0.0);
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y - r), ys.1.max(y + r));
        }
    }
    if !xs.0.is_finite() {
        xs = (0.0, 1.0);
        ys = (0.0, 1.0);
    }
    if ys.0 == ys.1 {
        ys = (ys.0 - 1.0, ys.1 + 1.0);
    }
    // A little headroom keeps curves off the frame.
    let pad = (ys.1 - ys.0) * 0.05;
    let ys = (ys.0 - pad, ys.1 + pad);
    let px = |x: f64| ml + (x - xs.0) / (xs.1 - xs.0) * pw;
    let py = |y: f64| mt + ph - (y - ys.0) / (ys.1 - ys.0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="26" text-anchor="middle" font-size="17">{}</text>"#,
        w / 2.0,
        title
    );

    for t in nice_ticks(xs.0, xs.1, 6) {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{mt}" x2="{x:.1}" y2="{:.1}" stroke="#e0e0e0"/>"##,
            mt + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            mt + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(ys.0, ys.1, 6) {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
            ml + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">{}</text>"#,
            ml - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        ml + pw / 2.0,
        h - 12.0,
        x_label
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {:.1})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        y_label
    );

    for (si, ser) in series.iter().enumerate() {
        if let Some(band) = &ser.band {
            let mut d = String::new();
            for (i, &(x, y)) in ser.points.iter().enumerate() {
                let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, px(x), py(y + band[i]));
            }
            for (i, &(x, y)) in ser.points.iter().enumerate().rev() {
                let _ = write!(d, "L{:.1},{:.1} ", px(x), py(y - band[i]));
            }
            let _ = writeln!(
                s,
                r#"<path d="{}Z" fill="{}" opacity="0.15" stroke="none"/>"#,
                d, ser.color
            );
        }
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
            pts.join(" "),
            ser.color
        );
        let ly = mt + 18.0 + si as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/>"#,
            ml + pw - 150.0,
            ml + pw - 120.0,
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="13">{}</text>"#,
            ml + pw - 112.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Map `v` in [0,1] to a white-to-blue ramp.
fn ramp(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 - 224.0 * v) as u8;
    let g = (255.0 - 136.0 * v) as u8;
    let b = (255.0 - 75.0 * v) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Render per-cell values over a grid layout. `cells` holds (row, col,
/// value); missing cells are painted as walls.
pub fn grid_heatmap(
    title: &str,
    height: usize,
    width: usize,
    cells: &[(usize, usize, f64)],
    lo: f64,
    hi: f64,
) -> String {
    let cell = 34.0;
    let mt = 48.0;
    let w = width as f64 * cell + 20.0;
    let h = height as f64 * cell + mt + 16.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        title
    );
    let mut known = vec![vec![None; width]; height];
    for &(r, c, v) in cells {
        known[r][c] = Some(v);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    for r in 0..height {
        for c in 0..width {
            let x = 10.0 + c as f64 * cell;
            let y = mt + r as f64 * cell;
            match known[r][c] {
                Some(v) => {
                    let color = ramp((v - lo) / span);
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="{color}" stroke="#bbb" stroke-width="0.5"/>"##
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="9">{:.2}</text>"#,
                        x + cell / 2.0,
                        y + cell / 2.0 + 3.0,
                        v
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="#444"/>"##
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_series_and_labels() {
        let s = Series::new("steps", vec![(0.0, 10.0), (1.0, 8.0), (2.0, 3.0)], PALETTE[0]);
        let svg = line_chart("learning", "episode", "steps", &[s]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("</svg>"));
        assert!(svg.contains("learning"));
        assert!(svg.contains("episode"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("#1f77b4"));
    }

    #[test]
    fn chart_handles_flat_and_single_point_series() {
        let flat = Series::new("flat", vec![(0.0, 5.0), (1.0, 5.0)], PALETTE[1]);
        let svg = line_chart("t", "x", "y", &[flat]);
        assert!(svg.contains("polyline"));
        let single = Series::new("one", vec![(2.0, 3.0)], PALETTE[2]);
        let svg = line_chart("t", "x", "y", &[single]);
        assert!(svg.contains("<svg"));
    }

    #[test]
    fn band_adds_a_filled_path() {
        let mut s = Series::new("m", vec![(0.0, 1.0), (1.0, 2.0)], PALETTE[0]);
        s.band = Some(vec![0.5, 0.25]);
        let svg = line_chart("t", "x", "y", &[s]);
        assert!(svg.contains("opacity=\"0.15\""));
    }

    #[test]
    fn ticks_are_round_numbers() {
        let t = nice_ticks(0.0, 500.0, 6);
        assert!(t.contains(&0.0) && t.contains(&500.0));
        for pair in t.windows(2) {
            assert!((pair[1] - pair[0] - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn heatmap_paints_walls_dark() {
        let svg = grid_heatmap("interest", 3, 3, &[(1, 1, 0.5)], 0.0, 1.0);
        assert!(svg.contains("#444"));
        assert!(svg.contains("0.50"));
    }
}
