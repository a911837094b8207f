use std::fmt::Write;

use super::RankedReport;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar chart of the `top` most frequent outcomes. Valid outcomes are blue,
/// the reported answer dark blue, invalid ones grey.
pub fn render_frequency_svg(report: &RankedReport, top: usize, title: &str) -> String {
    let rows = &report.rows[..report.rows.len().min(top.max(1))];
    let peak = rows.iter().map(|r| r.frequency).fold(0.0, f64::max).max(1e-12);
    let plot_w = WIDTH - MARGIN_LEFT - 20.0;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let slot = plot_w / rows.len().max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let base = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="black"/>"#,
        WIDTH - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base:.1}" stroke="black"/>"#
    );
    for tick in 0..=4 {
        let f = peak * tick as f64 / 4.0;
        let y = base - plot_h * tick as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            MARGIN_LEFT - 4.0,
            y + 3.0,
            f
        );
    }
    for (k, row) in rows.iter().enumerate() {
        let h = plot_h * row.frequency / peak;
        let x = MARGIN_LEFT + slot * k as f64 + slot * 0.15;
        let fill = if report.answer == Some(k) {
            "#1f3f8f"
        } else if row.valid {
            "#5b8fd9"
        } else {
            "#b0b0b0"
        };
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{fill}"><title>{} count={} energy={:.4}</title></rect>"#,
            base - h,
            slot * 0.7,
            row.bitstring,
            row.count,
            row.energy
        );
        let lx = x + slot * 0.35;
        let _ = writeln!(
            svg,
            r#"<text x="{lx:.1}" y="{:.1}" transform="rotate(-70 {lx:.1} {:.1})" text-anchor="end">{}</text>"#,
            base + 8.0,
            base + 8.0,
            row.bitstring
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::RankedRow;

    #[test]
    fn bars_follow_rows() {
        let row = |index, count, valid| RankedRow {
            index,
            bitstring: format!("{index:04b}"),
            count,
            frequency: count as f64 / 10.0,
            energy: 1.0,
            valid,
            validity: String::new(),
            paths: None,
        };
        let report = RankedReport {
            shots: 10,
            rows: vec![row(3, 6, false), row(5, 4, true)],
            answer: Some(1),
        };
        let svg = render_frequency_svg(&report, 10, "a < b");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<rect x=").count(), 2);
        assert!(svg.contains("#1f3f8f") && svg.contains("#b0b0b0"));
        assert_eq!(svg, render_frequency_svg(&report, 10, "a < b"));
    }
}
