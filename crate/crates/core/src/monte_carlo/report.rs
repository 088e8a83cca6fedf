//! CSV table and dependency-free SVG coverage charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::McCellResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "a,lambda,n,rrmse_a_pct,rrmse_lambda_pct,coverage_a,coverage_lambda,mean_p_star,invalid_count";

/// Plain decimal with six significant digits (`0.250000`, `23.4568`, `NaN`).
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    // The exponent of the correctly rounded 6-digit mantissa fixes the decimals.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp >= 5 {
        let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("round trip");
        format!("{rounded:.0}")
    } else {
        format!("{:.*}", (5 - exp) as usize, x)
    }
}

fn csv_row(r: &McCellResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        format_sig6(r.a),
        format_sig6(r.lambda),
        r.n,
        format_sig6(100.0 * r.rrmse_a),
        format_sig6(100.0 * r.rrmse_lambda),
        format_sig6(r.coverage_a),
        format_sig6(r.coverage_lambda),
        format_sig6(r.mean_p_star),
        r.invalid_count
    )
}

pub fn csv_string(results: &[McCellResult]) -> String {
    let mut out = String::with_capacity(64 * (results.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn write_csv(results: &[McCellResult], path: &Path) -> Result<()> {
    fs::write(path, csv_string(results)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Param {
    A,
    Lambda,
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::Lambda => "lambda",
        }
    }

    fn coverage(self, r: &McCellResult) -> f64 {
        match self {
            Param::A => r.coverage_a,
            Param::Lambda => r.coverage_lambda,
        }
    }
}

/// `coverage_<param>_a<value>.svg`, with `<value>` in shortest form (`0.25`, `1`).
pub fn svg_file_name(param: &str, a: f64) -> String {
    format!("coverage_{param}_a{a}.svg")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn coverage_svg(a: f64, param: Param, cells: &[&McCellResult], level: f64) -> String {
    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for c in cells {
        by_n.entry(c.n)
            .or_default()
            .push((c.lambda, param.coverage(c)));
    }
    for pts in by_n.values_mut() {
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    }

    let (mut x_min, mut x_max) = cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.lambda), hi.max(c.lambda))
        });
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let y_lo = cells
        .iter()
        .map(|c| param.coverage(c))
        .fold(level, f64::min);
    let y_min = ((y_lo - 0.02) * 50.0).floor() / 50.0;
    let y_min = y_min.clamp(0.0, level - 0.02);
    let y_max = 1.0;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">Coverage of {:.0}% intervals for {} (a = {a})</text>"#,
        WIDTH / 2.0,
        100.0 * level,
        param.name()
    );

    // Axes.
    let (x0, y0, x1, y1) = (MARGIN_L, HEIGHT - MARGIN_B, WIDTH - MARGIN_R, MARGIN_T);
    let _ = writeln!(s, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}"/>"#
    );
    let _ = writeln!(s, "</g>");

    let x_ticks = 6;
    for k in 0..=x_ticks {
        let v = x_min + (x_max - x_min) * k as f64 / x_ticks as f64;
        let px = sx(v);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            trim_number(v)
        );
    }
    let y_ticks = 5;
    for k in 0..=y_ticks {
        let v = y_min + (y_max - y_min) * k as f64 / y_ticks as f64;
        let py = sy(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">lambda</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">empirical coverage</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    // Nominal level.
    let _ = writeln!(
        s,
        r##"<line class="nominal" x1="{x0:.1}" y1="{:.1}" x2="{x1:.1}" y2="{:.1}" stroke="#555" stroke-dasharray="6 4"/>"##,
        sy(level),
        sy(level)
    );

    for (i, (n, pts)) in by_n.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-n="{n}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle class="marker" data-n="{n}" cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN_T + 20.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">n = {n}</text>"#,
            x1 + 10.0,
            x1 + 35.0,
            x1 + 40.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Two charts (coverage of `a` and of `λ` against `λ`) per distinct `a`.
pub fn write_svgs(results: &[McCellResult], level: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut by_a: Vec<(f64, Vec<&McCellResult>)> = Vec::new();
    for r in results {
        match by_a.iter_mut().find(|(a, _)| *a == r.a) {
            Some((_, v)) => v.push(r),
            None => by_a.push((r.a, vec![r])),
        }
    }
    let mut written = Vec::new();
    for (a, cells) in &by_a {
        for param in [Param::A, Param::Lambda] {
            let path = dir.join(svg_file_name(param.name(), *a));
            fs::write(&path, coverage_svg(*a, param, cells, level))
                .map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Write the CSV table to `csv_path` and the coverage charts into `svg_dir`.
pub fn emit_report(
    results: &[McCellResult],
    level: f64,
    csv_path: &Path,
    svg_dir: &Path,
) -> Result<Vec<PathBuf>> {
    write_csv(results, csv_path)?;
    fs::create_dir_all(svg_dir).map_err(|e| Error::io(svg_dir, e))?;
    write_svgs(results, level, svg_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(a: f64, lambda: f64, n: usize) -> McCellResult {
        McCellResult {
            a,
            lambda,
            n,
            rrmse_a: 0.123456789,
            rrmse_lambda: 0.05,
            rrmse_a_se: 0.01,
            rrmse_lambda_se: 0.01,
            coverage_a: 0.9465,
            coverage_lambda: 0.951,
            mean_p_star: 0.25,
            invalid_count: 0,
            flagged_count: 0,
            replicates: 100,
        }
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.25), "0.250000");
        assert_eq!(format_sig6(12.345678), "12.3457");
        assert_eq!(format_sig6(1.0), "1.00000");
        assert_eq!(format_sig6(9.999999), "10.0000");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(12345678.0), "12345700");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(0.0), "0.00000");
        assert_eq!(format_sig6(f64::NAN), "NaN");
    }

    #[test]
    fn empty_results_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("report.csv");
        let svgs = emit_report(&[], 0.95, &csv, dir.path()).unwrap();
        assert!(svgs.is_empty());
        assert_eq!(fs::read_to_string(&csv).unwrap(), format!("{CSV_HEADER}\n"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn single_cell_report() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("report.csv");
        let svgs = emit_report(&[cell(0.5, 2.0, 100)], 0.95, &csv, dir.path()).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[1],
            "0.500000,2.00000,100,12.3457,5.00000,0.946500,0.951000,0.250000,0"
        );
        assert!(!text.contains('\r'));
        assert_eq!(svgs.len(), 2);
        let names: Vec<String> = svgs
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["coverage_a_a0.5.svg", "coverage_lambda_a0.5.svg"]);
        for p in &svgs {
            let svg = fs::read_to_string(p).unwrap();
            assert_eq!(svg.matches("<polyline").count(), 1);
            assert_eq!(svg.matches(r#"class="marker""#).count(), 1);
            assert_eq!(svg.matches(r#"class="nominal""#).count(), 1);
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        }
    }

    #[test]
    fn full_grid_file_count() {
        let mut results = Vec::new();
        for &a in &[0.25, 0.5, 0.75, 1.0] {
            for k in 1..=24 {
                for &n in &[100, 200] {
                    results.push(cell(a, k as f64 * 0.5, n));
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let svg_dir = dir.path().join("svg");
        let svgs = emit_report(&results, 0.95, &dir.path().join("r.csv"), &svg_dir).unwrap();
        assert_eq!(svgs.len(), 8);
        let svg = fs::read_to_string(svg_dir.join("coverage_lambda_a1.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"class="marker""#).count(), 48);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("report.csv");
        let err = write_csv(&[], &bad).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }
}
