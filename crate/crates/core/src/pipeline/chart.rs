//! SVG bar chart of mean Wu-Palmer similarity with ±1 s.d. error bars.

use std::fmt::Write as _;
use std::path::Path;

use super::report::EvaluationReport;
use crate::error::{Error, Result};

const PLOT_TOP: f64 = 40.0;
const PLOT_HEIGHT: f64 = 300.0;
const PLOT_LEFT: f64 = 60.0;
const BAR_WIDTH: f64 = 60.0;
const BAR_GAP: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn y_of(v: f64) -> f64 {
    PLOT_TOP + PLOT_HEIGHT * (1.0 - v.clamp(0.0, 1.0))
}

/// One bar per report, labelled `subject split`, on a fixed [0, 1] axis.
pub fn render_chart(reports: &[EvaluationReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no reports to chart".into()));
    }
    if let Some(r) = reports.iter().find(|r| r.aggregates.n_items == 0) {
        return Err(Error::InvalidParameter(format!(
            "report for {} {} has no scored items",
            r.subject, r.split
        )));
    }
    let width = PLOT_LEFT + BAR_GAP + reports.len() as f64 * (BAR_WIDTH + BAR_GAP);
    let height = PLOT_TOP + PLOT_HEIGHT + 50.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">Wu-Palmer similarity (mean ± s.d.)</text>"#,
        width / 2.0
    );
    for tick in 0..=4 {
        let v = f64::from(tick) * 0.25;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            width - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            PLOT_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{PLOT_LEFT:.1}" y1="{PLOT_TOP:.1}" x2="{PLOT_LEFT:.1}" y2="{:.1}" stroke="black"/>"#,
        PLOT_TOP + PLOT_HEIGHT
    );
    for (i, r) in reports.iter().enumerate() {
        let a = &r.aggregates;
        let x = PLOT_LEFT + BAR_GAP + i as f64 * (BAR_WIDTH + BAR_GAP);
        let top = y_of(a.mean_wup);
        let _ = writeln!(
            svg,
            r##"<rect class="bar" x="{x:.1}" y="{top:.1}" width="{BAR_WIDTH:.1}" height="{:.1}" fill="#4c72b0"><title>{} {}: {:.3} ± {:.3} (n = {})</title></rect>"##,
            PLOT_TOP + PLOT_HEIGHT - top,
            escape(&r.subject),
            r.split,
            a.mean_wup,
            a.std_wup,
            a.n_items
        );
        let cx = x + BAR_WIDTH / 2.0;
        let (lo, hi) = (y_of(a.mean_wup - a.std_wup), y_of(a.mean_wup + a.std_wup));
        let _ = writeln!(
            svg,
            r#"<path class="error-bar" d="M{cx:.1} {lo:.1}V{hi:.1}M{:.1} {lo:.1}H{:.1}M{:.1} {hi:.1}H{:.1}" stroke="black" fill="none"/>"#,
            cx - 8.0,
            cx + 8.0,
            cx - 8.0,
            cx + 8.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{} {}</text>"#,
            PLOT_TOP + PLOT_HEIGHT + 20.0,
            escape(&r.subject),
            r.split
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_report_chart(reports: &[EvaluationReport], out_svg: &Path) -> Result<()> {
    let svg = render_chart(reports)?;
    std::fs::write(out_svg, svg).map_err(|e| Error::io(out_svg, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::Split;
    use crate::pipeline::report::tests::{record, settings};

    fn report(split: Split, wup: f64) -> EvaluationReport {
        EvaluationReport::new("sub-01".into(), split, settings(), vec![record("a", "x", "x", wup)], vec![])
    }

    #[test]
    fn two_bars_for_train_and_test() {
        let svg = render_chart(&[report(Split::Train, 0.8), report(Split::Test, 0.6)]).unwrap();
        assert_eq!(svg.matches("class=\"bar\"").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn full_height_at_one() {
        let svg = render_chart(&[report(Split::Test, 1.0)]).unwrap();
        assert!(svg.contains(&format!("y=\"{PLOT_TOP:.1}\" width=\"{BAR_WIDTH:.1}\" height=\"{PLOT_HEIGHT:.1}\"")));
    }

    #[test]
    fn deterministic() {
        let r = [report(Split::Test, 0.4)];
        assert_eq!(render_chart(&r).unwrap(), render_chart(&r).unwrap());
    }

    #[test]
    fn empty_is_error() {
        assert!(render_chart(&[]).is_err());
        let empty = EvaluationReport::new("s".into(), Split::Test, settings(), vec![], vec![]);
        assert!(render_chart(&[empty]).is_err());
    }
}
