//! Minimal SVG rendering: a line plot of `q(t)` above a raster of `X_omega(t)`.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;

fn num(v: f64) -> String {
    format!("{v:.2}")
}

/// Signed value in `[-1, 1]` to a blue-white-red colour.
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x)).round() as u8;
    let (r, g, b) = if v >= 0.0 { (255, fade(v), fade(v)) } else { (fade(-v), fade(-v), 255) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn axes(s: &mut String, top: f64, label_x: &str, label_y: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, b) = (MARGIN, WIDTH - MARGIN / 2.0, top + PANEL_H);
    writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(l),
        num(top),
        num(r - l),
        num(PANEL_H)
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{label_x}</text>"#, num((l + r) / 2.0), num(b + 32.0))
        .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{label_y}</text>"#,
        num(top + PANEL_H / 2.0),
        num(top + PANEL_H / 2.0)
    )
    .unwrap();
    for (v, anchor, px, py) in [(x.0, "start", l, b + 16.0), (x.1, "end", r, b + 16.0)] {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{v}</text>"#, num(px), num(py)).unwrap();
    }
    for (v, py) in [(y.0, b), (y.1, top + 10.0)] {
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            num(l - 4.0),
            num(py),
            format_args!("{v:.3}")
        )
        .unwrap();
    }
}

/// `x[j][k]` is the mode at `omegas[j]` and time `times[k]`.
pub fn figure(t: &[f64], q: &[f64], omegas: &[f64], times: &[f64], x: &[Vec<f64>]) -> String {
    let mut s = String::new();
    let height = 2.0 * PANEL_H + 3.0 * MARGIN;
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    let (l, r) = (MARGIN, WIDTH - MARGIN / 2.0);
    let (t0, t1) = (t.first().copied().unwrap_or(0.0), t.last().copied().unwrap_or(1.0));
    let qmax = q.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let top = MARGIN / 2.0;
    axes(&mut s, top, "t", "q(t)", (t0, t1), (-qmax, qmax));
    let sx = |v: f64| l + (v - t0) / (t1 - t0) * (r - l);
    let sy = |v: f64| top + PANEL_H / 2.0 - v / qmax * (PANEL_H / 2.0 - 4.0);
    let points: Vec<String> = t.iter().zip(q).map(|(a, b)| format!("{},{}", num(sx(*a)), num(sy(*b)))).collect();
    writeln!(s, r#"<polyline fill="none" stroke="navy" stroke-width="1.5" points="{}"/>"#, points.join(" ")).unwrap();

    let top = MARGIN * 2.0 + PANEL_H;
    let (w0, w1) = (omegas.first().copied().unwrap_or(0.0), omegas.last().copied().unwrap_or(1.0));
    let xmax = x.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let (cw, ch) = ((r - l) / times.len().max(1) as f64, PANEL_H / omegas.len().max(1) as f64);
    writeln!(s, r#"<g shape-rendering="crispEdges">"#).unwrap();
    for (j, row) in x.iter().enumerate() {
        let y = top + PANEL_H - (j + 1) as f64 * ch;
        for (k, v) in row.iter().enumerate() {
            let xpos = l + k as f64 * cw;
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(xpos),
                num(y),
                num(cw + 0.05),
                num(ch + 0.05),
                diverging(v / xmax)
            )
            .unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();
    let (ts0, ts1) = (times.first().copied().unwrap_or(0.0), times.last().copied().unwrap_or(1.0));
    axes(&mut s, top, "t", "omega", (ts0, ts1), (w0, w1));
    writeln!(s, "</svg>").unwrap();
    s
}
