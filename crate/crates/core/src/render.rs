//! SVG rendering of instances, plans and execution traces.
//!
//! Output is plain text with coordinates at two decimals, so identical
//! inputs always give byte-identical documents.

use std::fmt::Write;

use crate::arrangement::{Arrangement, Instance, Plan};
use crate::geometry::Point2;
use crate::sim::ExecTrace;

/// Pixels per meter.
const SCALE: f64 = 1000.0;
const MARGIN: f64 = 20.0;

/// What to draw on top of the instance.
#[derive(Debug, Clone, Copy)]
pub enum Overlay<'a> {
    None,
    Plan(&'a Plan),
    Trace(&'a ExecTrace),
}

struct Frame {
    x_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.x_min) * SCALE,
            MARGIN + (self.y_max - p.y) * SCALE,
        )
    }
}

fn f(v: f64) -> String {
    format!("{v:.2}")
}

fn draw_discs(out: &mut String, fr: &Frame, a: &Arrangement, r: f64) {
    for (i, &p) in a.positions().iter().enumerate() {
        let (x, y) = fr.px(p);
        let _ = writeln!(
            out,
            r##"  <circle class="object" cx="{}" cy="{}" r="{}" fill="#c8c8c8" stroke="#606060" stroke-width="1"/>"##,
            f(x),
            f(y),
            f(r * SCALE)
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="12" text-anchor="middle" dominant-baseline="central">{i}</text>"#,
            f(x),
            f(y)
        );
    }
}

fn draw_arrow(out: &mut String, fr: &Frame, from: Point2, to: Point2, class: &str, color: &str) {
    let (x1, y1) = fr.px(from);
    let (x2, y2) = fr.px(to);
    let _ = writeln!(
        out,
        r#"  <line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.5" marker-end="url(#arrow)"/>"#,
        f(x1),
        f(y1),
        f(x2),
        f(y2)
    );
}

/// Workspace (dashed), target outlines, object discs with indices, and
/// motion arrows from the overlay.
pub fn render_svg(instance: &Instance, overlay: Overlay<'_>) -> String {
    let ws = &instance.workspace;
    let fr = Frame {
        x_min: ws.x_min,
        y_max: ws.y_max,
    };
    let w = ws.width() * SCALE + 2.0 * MARGIN;
    let h = ws.height() * SCALE + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        f(w),
        f(h)
    );
    out.push_str(
        r##"  <defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#1f4e9c"/></marker></defs>
"##,
    );
    let _ = writeln!(
        out,
        r##"  <rect class="workspace" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000" stroke-dasharray="6,4"/>"##,
        f(MARGIN),
        f(MARGIN),
        f(ws.width() * SCALE),
        f(ws.height() * SCALE)
    );
    for (i, &t) in instance.target.positions().iter().enumerate() {
        let (x, y) = fr.px(t);
        let _ = writeln!(
            out,
            r##"  <circle class="target" cx="{}" cy="{}" r="{}" fill="none" stroke="#2a8a2a" stroke-width="1" stroke-dasharray="3,2"/>"##,
            f(x),
            f(y),
            f(instance.radius * SCALE)
        );
        let _ = writeln!(
            out,
            r##"  <text class="target-label" x="{}" y="{}" font-size="9" fill="#2a8a2a" text-anchor="middle">{i}</text>"##,
            f(x),
            f(y + instance.radius * SCALE + 9.0)
        );
    }
    draw_discs(&mut out, &fr, &instance.initial, instance.radius);

    match overlay {
        Overlay::None => {}
        Overlay::Plan(plan) => {
            for m in &plan.motions {
                draw_arrow(&mut out, &fr, m.pick, m.place, "motion", "#1f4e9c");
            }
        }
        Overlay::Trace(trace) => {
            for step in &trace.steps {
                for p in &step.perturbations {
                    let (x, y) = fr.px(p.new_position);
                    let _ = writeln!(
                        out,
                        r##"  <circle class="perturbation" cx="{}" cy="{}" r="4" fill="#c0392b"/>"##,
                        f(x),
                        f(y)
                    );
                }
                if let Some(m) = &step.motion {
                    draw_arrow(&mut out, &fr, m.pick, m.place, "motion", "#1f4e9c");
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
