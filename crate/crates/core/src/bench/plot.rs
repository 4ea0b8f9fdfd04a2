//! SVG rendering of a workspace, its regions and a trajectory.

use std::fmt::Write as _;
use std::path::Path;

use super::Scenario;
use crate::parser::RegionKind;
use crate::system::Trajectory;

const WORKSPACE: f64 = 15.0;
const SCALE: f64 = 40.0;

fn px(v: f64) -> f64 {
    v * SCALE
}

/// Flips y so that the origin sits bottom-left.
fn py(v: f64) -> f64 {
    (WORKSPACE - v) * SCALE
}

fn fill(kind: RegionKind) -> &'static str {
    match kind {
        RegionKind::Obstacle => "#808080",
        RegionKind::Goal => "#2ca02c",
        RegionKind::Target | RegionKind::Key => "#1f77b4",
        RegionKind::Door => "#d62728",
    }
}

/// Renders the scenario regions and, when non-empty, the trajectory outputs.
pub fn render_svg(scenario: &Scenario, trajectory: &Trajectory) -> String {
    let size = WORKSPACE * SCALE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>"#);
    for r in &scenario.regions {
        let (x0, x1) = r.bounds[0];
        let (y0, y1) = r.bounds.get(1).copied().unwrap_or((0.0, WORKSPACE));
        let color = r.color.as_deref().unwrap_or(fill(r.kind));
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.5"><title>{}</title></rect>"#,
            px(x0),
            py(y1),
            px(x1 - x0),
            px(y1 - y0),
            r.name
        );
    }
    if !trajectory.y.is_empty() {
        let pts: Vec<String> = trajectory
            .y
            .iter()
            .map(|y| format!("{:.2},{:.2}", px(y[0]), py(y[1])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            pts.join(" ")
        );
        let first = &trajectory.y[0];
        let last = &trajectory.y[trajectory.y.len() - 1];
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="6" fill="black"/>"#,
            px(first[0]),
            py(first[1])
        );
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="black"/>"#,
            px(last[0]) - 6.0,
            py(last[1]) - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn plot_trajectory(scenario: &Scenario, trajectory: &Trajectory, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(scenario, trajectory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::scenario_two_target;

    #[test]
    fn empty_trajectory_draws_regions_only() {
        let s = scenario_two_target();
        let svg = render_svg(&s, &Trajectory::default());
        assert_eq!(svg.matches("<rect").count(), 1 + s.regions.len());
        assert!(!svg.contains("polyline"));
        assert!(svg.contains("#808080") && svg.contains("#2ca02c") && svg.contains("#1f77b4"));
    }

    #[test]
    fn deterministic_output() {
        let s = scenario_two_target();
        let t = Trajectory {
            x: vec![vec![0.0; 4]; 2],
            u: vec![vec![0.0; 2]; 2],
            y: vec![vec![2.5, 2.0], vec![2.5, 2.5]],
        };
        assert_eq!(render_svg(&s, &t), render_svg(&s, &t));
        assert!(render_svg(&s, &t).contains("<polyline points=\"100.00,520.00 100.00,500.00\""));
    }
}
