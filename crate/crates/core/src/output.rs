//! CSV and SVG emission for sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::sweep::{SweepError, SweepRow};

/// Column names of the sweep CSV, in order.
pub const CSV_HEADER: [&str; 23] = [
    "p_node_w",
    "p_relay_w",
    "span_m",
    "n1_w",
    "n2_w",
    "policy",
    "packet_count",
    "wavelength_m",
    "bandwidth_hz",
    "node_tx_gain",
    "node_rx_gain",
    "relay_tx_gain",
    "relay_rx_gain",
    "packet_length_bits",
    "relay_location_m",
    "t1_s",
    "t2_s",
    "regime",
    "average_delay_s",
    "average_instant_aoi_sim_s",
    "exact_closed_form_s",
    "asymptotic_closed_form_s",
    "optimal_location_for_row_m",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn record(row: &SweepRow) -> [String; 23] {
    let f = format_float;
    [
        f(row.p_node_w),
        f(row.p_relay_w),
        f(row.span_m),
        f(row.n1_w),
        f(row.n2_w),
        row.policy.clone(),
        row.packet_count.to_string(),
        f(row.wavelength_m),
        f(row.bandwidth_hz),
        f(row.node_tx_gain),
        f(row.node_rx_gain),
        f(row.relay_tx_gain),
        f(row.relay_rx_gain),
        f(row.packet_length_bits),
        f(row.relay_location_m),
        f(row.t1_s),
        f(row.t2_s),
        row.regime.as_str().to_string(),
        f(row.average_delay_s),
        f(row.average_instant_aoi_sim_s),
        f(row.exact_closed_form_s),
        f(row.asymptotic_closed_form_s),
        f(row.optimal_location_for_row_m),
    ]
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Config("no rows to write".into()));
    }
    std::fs::write(path, csv_string(rows)).map_err(|source| SweepError::Io {
        path: path.to_owned(),
        source,
    })
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 44.0;
const COLUMNS: usize = 3;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

// Keyed by bit patterns so BTreeMap ordering is deterministic and exact.
type PanelKey = (u64, u64, u64, u64);

fn panel_key(r: &SweepRow) -> PanelKey {
    (
        r.p_relay_w.to_bits(),
        r.span_m.to_bits(),
        r.n1_w.to_bits(),
        r.n2_w.to_bits(),
    )
}

/// One panel per `(p_relay, span, noise)` with average age against node
/// power, one line per relay-location policy.
pub fn render_svg(rows: &[SweepRow]) -> String {
    let mut panels: BTreeMap<PanelKey, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        panels.entry(panel_key(r)).or_default().push(r);
    }
    let mut policies: Vec<&str> = Vec::new();
    for r in rows {
        if !policies.contains(&r.policy.as_str()) {
            policies.push(&r.policy);
        }
    }

    let n_panels = panels.len().max(1);
    let grid_rows = n_panels.div_ceil(COLUMNS);
    let cols = n_panels.min(COLUMNS);
    let legend_h = 24.0;
    let width = cols as f64 * PANEL_W;
    let height = grid_rows as f64 * PANEL_H + legend_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (k, policy) in policies.iter().enumerate() {
        let x = 10.0 + k as f64 * 110.0;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="12" x2="{}" y2="12" stroke="{color}" stroke-width="2"/><text x="{}" y="16">l = {}</text>"#,
            x + 20.0,
            x + 24.0,
            policy_label(policy)
        );
    }

    for (i, group) in panels.values().enumerate() {
        let ox = (i % COLUMNS) as f64 * PANEL_W;
        let oy = legend_h + (i / COLUMNS) as f64 * PANEL_H;
        render_panel(&mut s, ox, oy, group, &policies);
    }
    s.push_str("</svg>\n");
    s
}

fn policy_label(policy: &str) -> String {
    if policy == "optimal" {
        "l* (t1 = t2)".to_string()
    } else {
        format!("{policy} d")
    }
}

fn render_panel(s: &mut String, ox: f64, oy: f64, rows: &[&SweepRow], policies: &[&str]) {
    let first = rows[0];
    let mut xs: Vec<f64> = rows.iter().map(|r| r.p_node_w).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (x_min, x_max) = (xs[0], xs[xs.len() - 1]);
    let y_max = rows
        .iter()
        .map(|r| r.average_instant_aoi_sim_s)
        .fold(f64::MIN, f64::max);
    let y_min = rows
        .iter()
        .map(|r| r.average_instant_aoi_sim_s)
        .fold(f64::MAX, f64::min);
    let (y_lo, y_hi) = if y_max > y_min {
        let pad = 0.05 * (y_max - y_min);
        (y_min - pad, y_max + pad)
    } else {
        (y_min * 0.9, y_min * 1.1 + f64::MIN_POSITIVE)
    };

    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| {
        if x_max > x_min {
            ox + MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w
        } else {
            ox + MARGIN_L + 0.5 * plot_w
        }
    };
    let py = |y: f64| oy + MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">P_relay = {} W, d = {} m, N1 = {:e} W, N2 = {:e} W</text>"#,
        ox + PANEL_W / 2.0,
        oy + 18.0,
        first.p_relay_w,
        first.span_m,
        first.n1_w,
        first.n2_w
    );
    let (x0, y0) = (ox + MARGIN_L, oy + MARGIN_T + plot_h);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{:.2} V{y0:.2} H{:.2}" fill="none" stroke="black"/>"#,
        oy + MARGIN_T,
        x0 + plot_w
    );
    for (label, y) in [(y_lo, py(y_lo)), (y_hi, py(y_hi))] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.4}</text>"#,
            x0 - 4.0,
            y + 4.0,
            label
        );
    }
    for &x in &xs {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            y0 + 14.0,
            x
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">P_node (W)</text>"#,
        x0 + plot_w / 2.0,
        y0 + 32.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">average AoI (s)</text>"#,
        ox + 14.0,
        oy + MARGIN_T + plot_h / 2.0,
        ox + 14.0,
        oy + MARGIN_T + plot_h / 2.0
    );

    for (k, policy) in policies.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.policy == *policy)
            .map(|r| (r.p_node_w, r.average_instant_aoi_sim_s))
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(x, y) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
    }
}

pub fn emit_svg(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Config("no rows to plot".into()));
    }
    std::fs::write(path, render_svg(rows)).map_err(|source| SweepError::Io {
        path: path.to_owned(),
        source,
    })
}
