//! Deterministic SVG plots: component graphs scaled by a slope factor,
//! schedule tick marks, and optional minima-sample overlays. Output is a
//! pure function of the inputs — no ids, timestamps, or map iteration.

use crate::scalar::{to_f64, Scalar};
use crate::schedule::SwitchSchedule;
use crate::system::NSystem;

#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    /// Plotted value is P_j(q)·slope_scale, flattening the steep slopes.
    pub slope_scale: Scalar,
    pub labels: bool,
    pub marks: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 900,
            height: 560,
            slope_scale: crate::scalar::rat(1, 2),
            labels: true,
            marks: true,
        }
    }
}

const MARGIN: f64 = 46.0;
const PALETTE: [&str; 6] = [
    "#1f6f8b", "#c85a19", "#3c8d46", "#8d3c7e", "#6b5b1e", "#445577",
];

/// Shared pixels-per-unit on both axes, so a scaled slope s draws at its
/// true angle atan(s); the drawing is centered in the leftover direction.
struct Frame {
    unit: f64,
    x_off: f64,
    y_base: f64,
    v_min: f64,
    v_max: f64,
}

impl Frame {
    fn fit(w: f64, h: f64, q_max: f64, v_min: f64, v_max: f64) -> Frame {
        let span = (v_max - v_min).max(1e-9);
        let unit = ((w - 2.0 * MARGIN) / q_max).min((h - 2.0 * MARGIN) / span);
        let x_off = MARGIN + ((w - 2.0 * MARGIN) - q_max * unit) / 2.0;
        let y_base = h - MARGIN - ((h - 2.0 * MARGIN) - span * unit) / 2.0;
        Frame {
            unit,
            x_off,
            y_base,
            v_min,
            v_max,
        }
    }

    fn x(&self, q: f64) -> f64 {
        self.x_off + q * self.unit
    }

    fn y(&self, v: f64) -> f64 {
        self.y_base - (v - self.v_min) * self.unit
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the system; returns the SVG text and the number of overlay rows
/// skipped for lying outside [0, horizon].
pub fn render_svg(
    s: &NSystem,
    sched: Option<&SwitchSchedule>,
    overlay: Option<&[(f64, [f64; 3], bool)]>,
    spec: &RenderSpec,
) -> (String, usize) {
    let scale = to_f64(&spec.slope_scale);
    let q_max = to_f64(&s.horizon).max(1e-9);
    let mut v_min = 0.0f64;
    let mut v_max = 0.0f64;
    for f in &s.components {
        for (_, v) in &f.points {
            let sv = to_f64(v) * scale;
            v_min = v_min.min(sv);
            v_max = v_max.max(sv);
        }
    }
    if let Some(rows) = overlay {
        for (q, ls, _) in rows {
            if *q >= 0.0 && *q <= q_max {
                for l in ls {
                    v_min = v_min.min(l * scale);
                    v_max = v_max.max(l * scale);
                }
            }
        }
    }
    let pad = (v_max - v_min).max(1e-9) * 0.06;
    let frame = Frame::fit(
        spec.width as f64,
        spec.height as f64,
        q_max,
        v_min - pad,
        v_max + pad,
    );

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        spec.width, spec.height, spec.width, spec.height
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"#fdfcf8\"/>\n",
        spec.width, spec.height
    ));

    // Axes: q along the bottom, value axis on the left, zero line dashed.
    let x0 = frame.x(0.0);
    let x1 = frame.x(q_max);
    let y_zero = frame.y(0.0);
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#555\" stroke-width=\"1\"/>\n",
        fmt(x0),
        fmt(frame.y(frame.v_min)),
        fmt(x0),
        fmt(frame.y(frame.v_max))
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" \
         stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
        fmt(x0),
        fmt(y_zero),
        fmt(x1),
        fmt(y_zero)
    ));

    // Component graphs: breakpoints suffice for piecewise-linear shapes.
    for (idx, f) in s.components.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut pts = String::new();
        for (q, v) in &f.points {
            if !pts.is_empty() {
                pts.push(' ');
            }
            pts.push_str(&format!(
                "{},{}",
                fmt(frame.x(to_f64(q))),
                fmt(frame.y(to_f64(v) * scale))
            ));
        }
        svg.push_str(&format!(
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n"
        ));
        if spec.labels {
            let (q, v) = f.points.last().expect("non-empty component");
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">P{}</text>\n",
                fmt(frame.x(to_f64(q)) + 4.0),
                fmt(frame.y(to_f64(v) * scale) + 4.0),
                idx + 1
            ));
        }
    }

    // Schedule ticks along the bottom edge.
    if spec.marks {
        if let Some(sc) = sched {
            let mut ticks: Vec<(f64, String)> = Vec::new();
            for (i, l) in sc.l.iter().enumerate() {
                ticks.push((to_f64(l), format!("l{i}")));
            }
            for (t, r) in sc.r.iter().enumerate() {
                ticks.push((to_f64(r), format!("r{}", t + 1)));
            }
            for (i, row) in sc.w.iter().enumerate() {
                for w in row {
                    ticks.push((to_f64(w), format!("w{}", i + 1)));
                }
            }
            for (p, z) in sc.zigzags.iter().enumerate() {
                ticks.push((to_f64(&z.b0), format!("b{p}")));
                ticks.push((to_f64(&z.q_tilde), format!("q~{}", p + 1)));
            }
            let y_base = frame.y(frame.v_min);
            for (q, label) in &ticks {
                let x = frame.x(*q);
                svg.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#777\" \
                     stroke-width=\"1\"/>\n",
                    fmt(x),
                    fmt(y_base),
                    fmt(x),
                    fmt(y_base - 6.0)
                ));
                if spec.labels {
                    svg.push_str(&format!(
                        "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#555\" \
                         text-anchor=\"middle\">{label}</text>\n",
                        fmt(x),
                        fmt(y_base + 12.0)
                    ));
                }
            }
        }
    }

    // Minima sample dots, hollow when uncertified.
    let mut skipped = 0usize;
    if let Some(rows) = overlay {
        for (q, ls, certified) in rows {
            if *q < 0.0 || *q > q_max {
                skipped += 1;
                continue;
            }
            for (j, l) in ls.iter().enumerate() {
                let color = PALETTE[j % PALETTE.len()];
                let fill = if *certified { color } else { "none" };
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{fill}\" \
                     stroke=\"{color}\" stroke-width=\"1\"/>\n",
                    fmt(frame.x(*q)),
                    fmt(frame.y(l * scale))
                ));
            }
        }
    }

    svg.push_str("</svg>\n");
    (svg, skipped)
}
