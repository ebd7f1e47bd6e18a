//! Minimal hand-written SVG line charts.

use std::fmt::Write as _;

use obsplan_core::eval::ScenarioConfig;

use crate::report::ArmView;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn style(label: &str) -> (&'static str, &'static str) {
    match label {
        "initial" => ("#f28e2b", "6,4"),
        "og" => ("#d62728", "none"),
        "cov" => ("#17becf", "none"),
        _ => ("#4e79a7", "none"),
    }
}

fn header(out: &mut String) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let (x1, y1) = (WIDTH - MARGIN, MARGIN);
    writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#).unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let vx = x_range.0 + f * (x_range.1 - x_range.0);
        let vy = y_range.0 + f * (y_range.1 - y_range.0);
        writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{vx:.3}</text>"#,
            y0 + 16.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{vy:.3}</text>"#,
            x0 - 6.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
}

fn legend(out: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let (color, dash) = style(label);
        let y = MARGIN + 14.0 * i as f64;
        let x = WIDTH - MARGIN - 90.0;
        writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            x + 24.0
        )
        .unwrap();
        writeln!(out, r#"<text x="{}" y="{}">{label}</text>"#, x + 30.0, y + 4.0).unwrap();
    }
}

fn polyline(out: &mut String, label: &str, points: impl Iterator<Item = (f64, f64)>) {
    let (color, dash) = style(label);
    let pts: Vec<String> = points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
        pts.join(" ")
    )
    .unwrap();
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Covariance trace against time step, one line per arm.
pub fn traces_plot(arms: &[ArmView<'_>]) -> String {
    let k = arms.first().map_or(1, |a| a.arm.traces.len().saturating_sub(1)).max(1);
    let max = arms
        .iter()
        .flat_map(|a| a.arm.traces.iter().copied())
        .fold(0.0, f64::max);
    let y_range = (0.0, if max > 0.0 { max * 1.05 } else { 1.0 });
    let mut out = String::new();
    header(&mut out);
    axes(&mut out, "time step", "trace of covariance", (0.0, k as f64), y_range);
    let sx = |t: f64| MARGIN + t / k as f64 * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y_range.0) / (y_range.1 - y_range.0) * (HEIGHT - 2.0 * MARGIN);
    for a in arms {
        polyline(
            &mut out,
            a.label,
            a.arm.traces.iter().enumerate().map(|(t, v)| (sx(t as f64), sy(*v))),
        );
    }
    legend(&mut out, &arms.iter().map(|a| a.label).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Planar paths with landmarks, start and goal region, equal axis scale.
pub fn paths_plot(scenario: &ScenarioConfig, arms: &[ArmView<'_>]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for a in arms {
        for s in a.arm.trajectory.states() {
            xs.push(s[0]);
            ys.push(s[1]);
        }
    }
    for l in scenario.observation.landmarks.positions() {
        xs.push(l[0]);
        ys.push(l[1]);
    }
    xs.extend([scenario.goal[0] - scenario.r_g, scenario.goal[0] + scenario.r_g]);
    ys.extend([scenario.goal[1] - scenario.r_g, scenario.goal[1] + scenario.r_g]);
    let fold = |v: &[f64]| {
        v.iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
    };
    let (xr, yr) = (padded(fold(&xs).0, fold(&xs).1), padded(fold(&ys).0, fold(&ys).1));
    let span = (xr.1 - xr.0).max(yr.1 - yr.0);
    let (cx, cy) = ((xr.0 + xr.1) / 2.0, (yr.0 + yr.1) / 2.0);
    let x_range = (cx - span / 2.0, cx + span / 2.0);
    let y_range = (cy - span / 2.0, cy + span / 2.0);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let scale = plot_w.min(plot_h) / span;
    let sx = |x: f64| MARGIN + (x - x_range.0) * scale;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_range.0) * scale;

    let mut out = String::new();
    header(&mut out);
    axes(
        &mut out,
        "x [m]",
        "y [m]",
        x_range,
        (y_range.0, y_range.0 + plot_h / scale),
    );
    for l in scenario.observation.landmarks.positions() {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="14" fill="#ffe08a" fill-opacity="0.6"/><circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"##,
            sx(l[0]),
            sy(l[1]),
            sx(l[0]),
            sy(l[1])
        )
        .unwrap();
    }
    writeln!(
        out,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#9467bd" stroke-width="2"/>"##,
        sx(scenario.goal[0]),
        sy(scenario.goal[1]),
        (scenario.r_g * scale).max(3.0)
    )
    .unwrap();
    let (px, py) = (sx(scenario.x0[0]), sy(scenario.x0[1]));
    writeln!(
        out,
        r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#2ca02c"/>"##,
        px,
        py - 7.0,
        px + 7.0,
        py,
        px,
        py + 7.0,
        px - 7.0,
        py
    )
    .unwrap();
    for a in arms {
        polyline(
            &mut out,
            a.label,
            a.arm.trajectory.states().iter().map(|s| (sx(s[0]), sy(s[1]))),
        );
    }
    legend(&mut out, &arms.iter().map(|a| a.label).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}
