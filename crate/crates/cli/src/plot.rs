//! SVG rendering of a team plan over its instance.

use std::fmt::Write;

use ctop::ProblemInstance;

const PIXELS_PER_UNIT: f64 = 60.0;
const MARGIN: f64 = 40.0;
const CAPTION_HEIGHT: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Renders the vertices, one polyline per robot and the depot markers.
///
/// Every polyline carries `data-robot` and a space-separated `data-path` of
/// vertex ids so the plan can be read back from the file.
pub fn render_svg(
    instance: &ProblemInstance,
    paths: &[Vec<usize>],
    utility: f64,
    wall_time_s: f64,
) -> String {
    let vs = instance.vertices();
    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in vs {
        min_x = min_x.min(v.x);
        max_x = max_x.max(v.x);
        min_y = min_y.min(v.y);
        max_y = max_y.max(v.y);
    }
    let width = (max_x - min_x) * PIXELS_PER_UNIT + 2.0 * MARGIN;
    let plot_height = (max_y - min_y) * PIXELS_PER_UNIT + 2.0 * MARGIN;
    let height = plot_height + CAPTION_HEIGHT;
    let px = |x: f64| MARGIN + (x - min_x) * PIXELS_PER_UNIT;
    let py = |y: f64| MARGIN + (max_y - y) * PIXELS_PER_UNIT;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(svg, r#"<g id="vertices">"#);
    for &id in instance.sampling_ids() {
        let v = &vs[id];
        let _ = writeln!(
            svg,
            r##"<circle data-id="{id}" cx="{:.2}" cy="{:.2}" r="4" fill="#bbbbbb"/>"##,
            px(v.x),
            py(v.y)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="paths">"#);
    for (k, path) in paths.iter().enumerate() {
        let points: Vec<String> = path
            .iter()
            .filter_map(|&id| vs.get(id))
            .map(|v| format!("{:.2},{:.2}", px(v.x), py(v.y)))
            .collect();
        let ids: Vec<String> = path.iter().map(usize::to_string).collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-robot="{k}" data-path="{}" points="{}" fill="none" stroke="{}" stroke-width="2.5"/>"#,
            ids.join(" "),
            points.join(" "),
            PALETTE[k % PALETTE.len()]
        );
    }
    let _ = writeln!(svg, "</g>");

    let (s, f) = (&vs[instance.start_id()], &vs[instance.finish_id()]);
    let _ = writeln!(svg, r#"<g id="depots">"#);
    let _ = writeln!(
        svg,
        r#"<rect data-role="start" data-id="{}" x="{:.2}" y="{:.2}" width="12" height="12" fill="black"/>"#,
        s.id,
        px(s.x) - 6.0,
        py(s.y) - 6.0
    );
    let _ = writeln!(
        svg,
        r#"<circle data-role="finish" data-id="{}" cx="{:.2}" cy="{:.2}" r="9" fill="none" stroke="black" stroke-width="2"/>"#,
        f.id,
        px(f.x),
        py(f.y)
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<text id="caption" x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">The gathered utility is {utility:.3} and the time to calculate is {wall_time_s:.2} seconds.</text>"#,
        MARGIN,
        plot_height + CAPTION_HEIGHT / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Reads the `data-path` attributes back, in robot order.
#[cfg(test)]
pub fn paths_from_svg(svg: &str) -> Vec<Vec<usize>> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .filter_map(|l| {
            let rest = &l[l.find("data-path=\"")? + 11..];
            let ids = &rest[..rest.find('"')?];
            ids.split_whitespace().map(|t| t.parse().ok()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctop::{build_grid_instance, GridSpec};

    #[test]
    fn paths_round_trip() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let (s, f) = (inst.start_id(), inst.finish_id());
        let paths = vec![vec![s, 0, 1, 4, f], vec![s, f], vec![s, 6, 7, f]];
        let svg = render_svg(&inst, &paths, 5.25, 0.5);
        assert_eq!(paths_from_svg(&svg), paths);
        assert!(svg.contains("The gathered utility is 5.250 and the time to calculate is 0.50 seconds."));
    }

    #[test]
    fn empty_plan_has_depots_only() {
        let inst = build_grid_instance(&GridSpec::new(2, 2)).unwrap();
        let svg = render_svg(&inst, &[], 0.0, 0.0);
        assert!(svg.contains(r#"data-role="start""#));
        assert!(svg.contains(r#"data-role="finish""#));
        assert!(!svg.contains("<polyline"));
    }
}
