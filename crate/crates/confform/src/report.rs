//! Deterministic serialization of solver and matcher outputs.
//!
//! Every number is printed with 17 significant digits via [`fmt_g17`], so
//! identical inputs produce byte-identical JSON and CSV artifacts.

use crate::atlas::AtlasRow;
use crate::error::{Error, Result};
use crate::junction::{ComponentState, MatchResult};
use crate::scalar::{fmt_g17, Real};
use crate::solver::SolveReport;

/// JSON for one solve: `{"k":, "c":, "iterations":, "residual":, "area":,
/// "length":, "converged":, "u":[...]}`.
pub fn solve_report_json<T: Real>(k: T, c: T, report: &SolveReport<T>) -> String {
    let mut out = String::with_capacity(64 + 24 * report.state.len());
    out.push('{');
    out.push_str(&format!("\"k\":{},", fmt_g17(k)));
    out.push_str(&format!("\"c\":{},", fmt_g17(c)));
    out.push_str(&format!("\"iterations\":{},", report.iterations));
    out.push_str(&format!("\"residual\":{},", fmt_g17(report.residual_inf_norm)));
    out.push_str(&format!("\"area\":{},", fmt_g17(report.area)));
    out.push_str(&format!("\"length\":{},", fmt_g17(report.boundary_length)));
    out.push_str(&format!("\"converged\":{},", report.converged));
    out.push_str("\"u\":[");
    for (i, &u) in report.state.values().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g17(u));
    }
    out.push_str("]}");
    out.push('\n');
    out
}

/// CSV table of atlas rows: `k,c,L,A,L_hat,A_hat,converged`.
pub fn atlas_csv<T: Real>(rows: &[AtlasRow<T>]) -> String {
    let mut out = String::from("k,c,L,A,L_hat,A_hat,converged\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_g17(row.k),
            fmt_g17(row.c),
            fmt_g17(row.length),
            fmt_g17(row.area),
            fmt_g17(row.l_hat),
            fmt_g17(row.a_hat),
            row.converged
        ));
    }
    out
}

/// CSV table for the disk family: `rho,L,kappa,c_hat`.
pub fn disk_csv<T: Real>(rows: &[(T, T, T, T)]) -> String {
    let mut out = String::from("rho,L,kappa,c_hat\n");
    for &(rho, l, kappa, c_hat) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(rho),
            fmt_g17(l),
            fmt_g17(kappa),
            fmt_g17(c_hat)
        ));
    }
    out
}

/// JSON for a triple-junction match, including the correspondence tables.
pub fn match_result_json<T: Real>(result: &MatchResult<T>) -> String {
    let mut out = String::new();
    out.push('{');
    out.push_str(&format!("\"k\":{},", fmt_g17(result.k)));
    out.push_str(&format!("\"l0\":{},", fmt_g17(result.l0)));
    out.push_str("\"c\":[");
    for (i, &ci) in result.c.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g17(ci));
    }
    out.push_str("],");
    out.push_str(&format!(
        "\"chi\":[{},{},{}],",
        result.chi[0], result.chi[1], result.chi[2]
    ));
    out.push_str(&format!("\"chi_m\":{},", result.chi_m));
    out.push_str(&format!(
        "\"root_residual\":{},",
        fmt_g17(result.root_residual)
    ));
    out.push_str("\"realized_lengths\":[");
    for (i, &l) in result.realized_lengths.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g17(l));
    }
    out.push_str("],");
    out.push_str("\"components\":[");
    for (i, state) in result.states.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match state {
            ComponentState::Mesh(u) => {
                out.push_str("{\"kind\":\"mesh\",\"u\":[");
                for (j, &uj) in u.values().iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&fmt_g17(uj));
                }
                out.push_str("]}");
            }
            ComponentState::Disk(p) => {
                out.push_str(&format!("{{\"kind\":\"disk\",\"rho\":{}}}", fmt_g17(p.rho())));
            }
            ComponentState::Hemisphere => {
                out.push_str("{\"kind\":\"hemisphere\"}");
            }
        }
    }
    out.push_str("],");
    out.push_str("\"correspondences\":[");
    for (i, corr) in result.correspondences.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for (j, &(t, idx, frac)) in corr.rows.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{},{},{}]", fmt_g17(t), idx, fmt_g17(frac)));
        }
        out.push(']');
    }
    out.push_str("]}");
    out.push('\n');
    out
}

const PLOT_WIDTH: f64 = 640.0;
const PLOT_HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 45.0;

/// SVG polyline plot of a sampled curve with labeled axes. When the y-range
/// crosses zero a horizontal reference line is drawn at y = 0.
pub fn emit_plot<T: Real>(points: &[(T, T)], x_label: &str, y_label: &str) -> Result<String> {
    if points.len() < 2 {
        return Err(Error::Precondition(format!(
            "plot needs at least 2 samples, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.to_f64().unwrap()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.to_f64().unwrap()).collect();
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("plot samples must be finite".into()));
    }
    let (mut x0, mut x1) = (xs[0], xs[0]);
    let (mut y0, mut y1) = (ys[0], ys[0]);
    for &x in &xs {
        x0 = x0.min(x);
        x1 = x1.max(x);
    }
    for &y in &ys {
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-300 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-300 {
        y1 = y0 + 1.0;
    }
    let plot_w = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    // Range labels.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.6}</text>\n",
        sx(x0),
        MARGIN_TOP + plot_h + 16.0,
        x0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.6}</text>\n",
        sx(x1),
        MARGIN_TOP + plot_h + 16.0,
        x1
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.6}</text>\n",
        MARGIN_LEFT - 6.0,
        sy(y0) + 4.0,
        y0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.6}</text>\n",
        MARGIN_LEFT - 6.0,
        sy(y1) + 4.0,
        y1
    ));
    // Axis names.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        PLOT_HEIGHT - 8.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">{}</text>\n",
        16.0,
        MARGIN_TOP + plot_h / 2.0,
        16.0,
        MARGIN_TOP + plot_h / 2.0,
        y_label
    ));
    // Zero reference when the curve crosses it.
    if y0 < 0.0 && y1 > 0.0 {
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
            MARGIN_LEFT,
            sy(0.0),
            MARGIN_LEFT + plot_w,
            sy(0.0)
        ));
    }
    svg.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"");
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        if i > 0 {
            svg.push(' ');
        }
        svg.push_str(&format!("{:.3},{:.3}", sx(x), sy(y)));
    }
    svg.push_str("\"/>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_rejects_single_sample() {
        let err = emit_plot::<f64>(&[(0.0, 1.0)], "c", "L").unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn plot_draws_zero_line_only_when_crossing() {
        let crossing = emit_plot::<f64>(&[(0.0, -1.0), (1.0, 2.0)], "c", "L_hat").unwrap();
        assert!(crossing.contains("stroke-dasharray"));
        let positive = emit_plot::<f64>(&[(0.0, 1.0), (1.0, 2.0)], "c", "L").unwrap();
        assert!(!positive.contains("stroke-dasharray"));
    }

    #[test]
    fn csv_headers_match_schema() {
        let rows: Vec<AtlasRow<f64>> = Vec::new();
        assert!(atlas_csv(&rows).starts_with("k,c,L,A,L_hat,A_hat,converged\n"));
        let disk: Vec<(f64, f64, f64, f64)> = Vec::new();
        assert!(disk_csv(&disk).starts_with("rho,L,kappa,c_hat\n"));
    }
}
