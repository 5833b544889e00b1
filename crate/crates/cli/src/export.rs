//! Trajectory CSV and SVG figures.

use std::fmt::Write as _;
use std::path::Path;

use hitchplan::integrate::Trajectory;
use hitchplan::kinematics::TrailerGeometry;
use hitchplan::planner::PlanReport;

pub const CSV_HEADER: &str = "t,x,y,theta,phi,u1,u2";

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(t.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for ((time, q), u) in t.times().iter().zip(t.states()).zip(t.controls()) {
        let row = [*time, q[0], q[1], q[2], q[3], u.0, u.1];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.14e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One parsed row `[t, x, y, theta, phi, u1, u2]`.
pub type CsvRow = [f64; 7];

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(format!("{}:1: expected header `{CSV_HEADER}`", path.display())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(format!("{}:{}: expected 7 fields, found {}", path.display(), i + 1, cells.len()));
        }
        let mut row = [0.0; 7];
        for (j, c) in cells.iter().enumerate() {
            row[j] = c.trim().parse().map_err(|_| {
                format!("{}:{}: field `{}` is not a number: {c:?}", path.display(), i + 1, CSV_HEADER.split(',').nth(j).unwrap())
            })?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

/// Trailer-axle point for a raw state.
fn axle(q: &[f64; 4], g: &TrailerGeometry) -> (f64, f64) {
    let hx = q[0] - g.l_r() * q[2].cos();
    let hy = q[1] - g.l_r() * q[2].sin();
    (hx - g.l_t() * (q[2] + q[3]).cos(), hy - g.l_t() * (q[2] + q[3]).sin())
}

fn hitch(q: &[f64; 4], g: &TrailerGeometry) -> (f64, f64) {
    (q[0] - g.l_r() * q[2].cos(), q[1] - g.l_r() * q[2].sin())
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn px(&self, p: (f64, f64)) -> (f64, f64) {
        (self.margin + (p.0 - self.min_x) * self.scale, self.margin + (self.max_y - p.1) * self.scale)
    }
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], style: &str) {
    out.push_str("<polyline points=\"");
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = f.px(*p);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    let _ = writeln!(out, "\" fill=\"none\" {style}/>");
}

fn ghost(out: &mut String, f: &Frame, q: &[f64; 4], g: &TrailerGeometry, colour: &str, label: &str) {
    let (r, h, a) = (f.px((q[0], q[1])), f.px(hitch(q, g)), f.px(axle(q, g)));
    let _ = writeln!(
        out,
        "<g class=\"{label}\" stroke=\"{colour}\" fill=\"{colour}\" opacity=\"0.6\">\
<polyline points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"none\" stroke-width=\"3\"/>\
<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"6\"/><rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\"/></g>",
        r.0, r.1, h.0, h.1, a.0, a.1, r.0, r.1, a.0 - 5.0, a.1 - 5.0
    );
}

/// Static drawing of a plan: robot path, trailer-axle path, start and goal
/// ghosts and restart markers.
pub fn render_svg(report: &PlanReport, g: &TrailerGeometry) -> Result<String, String> {
    let states = report.trajectory.states();
    if states.len() < 2 {
        return Err("cannot draw a plan with fewer than two samples".into());
    }
    let robot: Vec<(f64, f64)> = states.iter().map(|q| (q[0], q[1])).collect();
    let trailer: Vec<(f64, f64)> = states.iter().map(|q| axle(q, g)).collect();
    let goal = report.goal;
    let mut all: Vec<(f64, f64)> = robot.iter().chain(&trailer).copied().collect();
    all.extend([(goal[0], goal[1]), hitch(&goal, g), axle(&goal, g)]);
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &all {
        min_x = min_x.min(p.0);
        max_x = max_x.max(p.0);
        min_y = min_y.min(p.1);
        max_y = max_y.max(p.1);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let width = 800.0;
    let margin = 30.0;
    let scale = (width - 2.0 * margin) / span;
    let frame = Frame { min_x, max_y, scale, margin };
    let w = 2.0 * margin + (max_x - min_x) * scale;
    let h = 2.0 * margin + (max_y - min_y) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    polyline(&mut out, &frame, &trailer, "stroke=\"#d9822b\" stroke-width=\"1.5\" class=\"trailer\"");
    polyline(&mut out, &frame, &robot, "stroke=\"#1f5fa8\" stroke-width=\"2\" class=\"robot\"");
    ghost(&mut out, &frame, &states[0], g, "#777777", "start");
    ghost(&mut out, &frame, &goal, g, "#2a9d3a", "goal");
    for q in &report.restarts {
        let (x, y) = frame.px((q[0], q[1]));
        let _ = writeln!(out, "<circle class=\"restart\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"black\"/>");
    }
    let _ = writeln!(
        out,
        "<text x=\"{margin}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">eps = {:.3e}, alpha = {:.5}</text>",
        report.eps, report.alpha
    );
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_figure(report: &PlanReport, g: &TrailerGeometry, path: &Path) -> Result<(), String> {
    let svg = render_svg(report, g)?;
    std::fs::write(path, svg).map_err(|e| format!("{}: {e}", path.display()))
}
