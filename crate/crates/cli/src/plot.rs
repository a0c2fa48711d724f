use std::fmt::Write;

use unsemi_core::rational::{to_f64, to_short_string};
use unsemi_core::verify::SoundClass;
use unsemi_core::Rational;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Grid membership and projected solver points over a base box.
#[derive(Debug, Clone)]
pub struct PlotData {
    pub title: String,
    pub bounds: Vec<(f64, f64)>,
    pub grid_res: usize,
    pub grid: Vec<(Vec<Rational>, bool)>,
    pub solver: Vec<(Vec<f64>, SoundClass)>,
}

fn class_name(c: SoundClass) -> &'static str {
    match c {
        SoundClass::Hit => "hit",
        SoundClass::Miss => "miss",
        SoundClass::BoundarySkipped => "boundary",
    }
}

/// One row per grid point and per solver point.
pub fn csv(data: &PlotData) -> String {
    let m = data.bounds.len();
    let mut out = String::from("source");
    for i in 1..=m {
        write!(out, ",x{i}").unwrap();
    }
    out.push_str(",class\n");
    for (x, inside) in &data.grid {
        out.push_str("grid");
        for v in x {
            write!(out, ",{}", to_short_string(v)).unwrap();
        }
        writeln!(out, ",{}", if *inside { "in" } else { "out" }).unwrap();
    }
    for (x, class) in &data.solver {
        out.push_str("solver");
        for v in x {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{}", class_name(*class)).unwrap();
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot for one or two base dimensions. In one dimension the grid
/// strip sits above the solver strip.
pub fn svg(data: &PlotData) -> String {
    let m = data.bounds.len();
    assert!(matches!(m, 1 | 2), "svg needs one or two base dimensions");
    let span = SIZE - 2.0 * MARGIN;
    let (x_lo, x_hi) = data.bounds[0];
    let px = |v: f64| MARGIN + (v - x_lo) / (x_hi - x_lo) * span;
    let py = |v: f64| match m {
        2 => {
            let (lo, hi) = data.bounds[1];
            MARGIN + (hi - v) / (hi - lo) * span
        }
        _ => v,
    };
    let cell = (span / (data.grid_res.max(2) - 1) as f64).max(1.0);
    let grid_row = SIZE / 2.0 - 30.0;
    let solver_row = SIZE / 2.0 + 30.0;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(&data.title)).unwrap();
    writeln!(out, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##).unwrap();
    writeln!(out, r##"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="#444444"/>"##)
        .unwrap();
    writeln!(out, r##"<g fill="#9ecae1">"##).unwrap();
    for (x, inside) in &data.grid {
        if !inside {
            continue;
        }
        let cx = px(to_f64(&x[0]));
        let cy = if m == 2 { py(to_f64(&x[1])) } else { grid_row };
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}"/>"#,
            cx - cell / 2.0,
            cy - cell / 2.0
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    for (class, colour, r) in [
        (SoundClass::Hit, "#d62728", 1.5),
        (SoundClass::BoundarySkipped, "#ff7f0e", 1.5),
        (SoundClass::Miss, "#000000", 3.0),
    ] {
        writeln!(out, r#"<g class="{}" fill="{colour}">"#, class_name(class)).unwrap();
        for (x, _) in data.solver.iter().filter(|(_, c)| *c == class) {
            let cy = if m == 2 { py(x[1]) } else { solver_row };
            writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}"/>"#, px(x[0]), cy).unwrap();
        }
        out.push_str("</g>\n");
    }
    let label_y = SIZE - MARGIN / 2.0;
    writeln!(out, r##"<g font-family="sans-serif" font-size="12" fill="#222222">"##).unwrap();
    writeln!(out, r#"<text x="{MARGIN}" y="{label_y}">x1 = {x_lo}</text>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="{label_y}" text-anchor="end">x1 = {x_hi}</text>"#, SIZE - MARGIN).unwrap();
    if m == 2 {
        let (lo, hi) = data.bounds[1];
        writeln!(out, r#"<text x="4" y="{}">x2 = {lo}</text>"#, SIZE - MARGIN).unwrap();
        writeln!(out, r#"<text x="4" y="{}">x2 = {hi}</text>"#, MARGIN - 4.0).unwrap();
    }
    writeln!(out, r#"<text x="{MARGIN}" y="{}">{}</text>"#, MARGIN / 2.0, escape(&data.title)).unwrap();
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use unsemi_core::rational::int;

    fn data(m: usize) -> PlotData {
        PlotData {
            title: "x1 < 1 & x1 >= 0".into(),
            bounds: vec![(-1.0, 1.0); m],
            grid_res: 3,
            grid: vec![(vec![int(0); m], true), (vec![int(1); m], false)],
            solver: vec![(vec![0.5; m], SoundClass::Hit), (vec![0.9; m], SoundClass::Miss)],
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = csv(&data(3));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "source,x1,x2,x3,class");
        assert_eq!(lines[1], "grid,0,0,0,in");
        assert_eq!(lines[2], "grid,1,1,1,out");
        assert_eq!(lines[3], "solver,0.5,0.5,0.5,hit");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn svg_draws_inside_points_only() {
        for m in [1, 2] {
            let s = svg(&data(m));
            assert!(s.starts_with("<svg"));
            assert!(s.ends_with("</svg>\n"));
            assert_eq!(s.matches("<rect").count(), 3);
            assert_eq!(s.matches("<circle").count(), 2);
            assert!(s.contains("x1 &lt; 1 &amp; x1 &gt;= 0"));
        }
    }
}
