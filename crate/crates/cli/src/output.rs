use serde_json::{json, Value};

use wgheat_core::model::ValidationReport;
use wgheat_core::solver::Trajectory;
use wgheat_core::sweep::format_float;
use wgheat_core::thermo::Analysis;
use wgheat_core::{heat_currents, DensityMatrix, SystemConfig};

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize") + "\n"
}

fn csv_lines(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn config_json(config: &SystemConfig) -> String {
    pretty(&json!(config))
}

pub fn steady_json(config: &SystemConfig, report: &ValidationReport, a: &Analysis) -> String {
    let rho = a.steady.rho.matrix();
    let part = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..4).map(|j| (0..4).map(|k| f(&rho[(j, k)])).collect()).collect()
    };
    pretty(&json!({
        "config": config,
        "validation": report,
        "steady_state": {
            "method": a.steady.method,
            "residual": a.steady.residual,
            "residual_bound": a.steady.residual_bound(),
            "singular_values": a.steady.singular_values,
            "spectral_norm": a.steady.spectral_norm,
            "rho_re": part(|z| z.re),
            "rho_im": part(|z| z.im),
        },
        "currents": a.currents,
        "engine": a.engine,
        "t_eff": a.t_eff,
    }))
}

pub fn steady_csv(a: &Analysis) -> String {
    let rho = &a.steady.rho;
    let c = &a.currents;
    let mut rows: Vec<(String, f64)> = Vec::new();
    for j in 0..4 {
        rows.push((format!("rho{0}{0}", j + 1), rho.get(j, j).re));
    }
    for (j, k) in [(3, 1), (3, 2), (2, 1)] {
        let z = rho.get(j, k);
        rows.push((format!("re_rho{}{}", j + 1, k + 1), z.re));
        rows.push((format!("im_rho{}{}", j + 1, k + 1), z.im));
    }
    rows.extend([
        ("J_W1".to_string(), c.j_w[0]),
        ("J_W2".to_string(), c.j_w[1]),
        ("J_L1".to_string(), c.j_l[0]),
        ("J_L2".to_string(), c.j_l[1]),
        ("J_total".to_string(), c.j_total),
        ("P".to_string(), a.engine.power),
        ("Q_hot".to_string(), a.engine.heat_in),
        ("eta".to_string(), a.engine.efficiency.unwrap_or(f64::NAN)),
        ("carnot".to_string(), a.engine.carnot),
        ("T_eff".to_string(), a.t_eff.value()),
        ("residual".to_string(), a.steady.residual),
    ]);
    csv_lines(
        &["quantity", "value"],
        rows.into_iter().map(|(k, v)| vec![k, format_float(v)]),
    )
}

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "t", "rho11", "rho22", "rho33", "rho44", "re_rho42", "im_rho42", "re_rho43", "im_rho43",
    "re_rho32", "im_rho32", "J_W1", "J_W2", "J_L1", "J_L2",
];

pub struct Table {
    pub rows: Vec<Vec<f64>>,
}

pub fn trajectory_table(config: &SystemConfig, traj: &Trajectory) -> Table {
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, m)| {
            let mut r = vec![*t];
            r.extend((0..4).map(|j| m[(j, j)].re));
            for (j, k) in [(3, 1), (3, 2), (2, 1)] {
                r.extend([m[(j, k)].re, m[(j, k)].im]);
            }
            // integration noise can push a state just outside the checks
            match DensityMatrix::new(*m).and_then(|rho| heat_currents(config, &rho)) {
                Ok(c) => r.extend([c.j_w[0], c.j_w[1], c.j_l[0], c.j_l[1]]),
                Err(_) => r.extend([f64::NAN; 4]),
            }
            r
        })
        .collect();
    Table { rows }
}

impl Table {
    pub fn to_csv(&self) -> String {
        csv_lines(
            &TRAJECTORY_COLUMNS,
            self.rows.iter().map(|r| r.iter().map(|x| format_float(*x)).collect()),
        )
    }

    pub fn to_json(&self, config: &SystemConfig, traj: &Trajectory) -> String {
        pretty(&json!({
            "config": config,
            "step": traj.step,
            "derivative_norm": traj.derivative_norm,
            "columns": TRAJECTORY_COLUMNS,
            "rows": self.rows,
        }))
    }
}

pub fn validation_json(report: &ValidationReport) -> String {
    pretty(&json!({
        "status": report.status(),
        "fatal": report.fatal,
        "warnings": report.warnings,
        "messages": report.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    }))
}

pub fn validation_csv(report: &ValidationReport) -> String {
    let rows = report
        .fatal
        .iter()
        .map(|m| vec!["fatal".to_string(), format!("\"{}\"", m.replace('"', "\"\""))])
        .chain(
            report
                .warnings
                .iter()
                .map(|w| vec!["warning".to_string(), format!("\"{}\"", w.to_string().replace('"', "\"\""))]),
        );
    csv_lines(&["severity", "message"], rows)
}

pub fn validation_text(report: &ValidationReport) -> String {
    let mut s = format!("status: {}\n", json!(report.status()).as_str().unwrap_or("?"));
    for m in &report.fatal {
        s.push_str(&format!("fatal: {m}\n"));
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}
