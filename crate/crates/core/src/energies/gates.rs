use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{HnsError, Result};
use crate::solvers::ModelParams;
use crate::spectral::{sobolev_norm, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GateKind {
    /// A hard inequality between two numbers.
    Threshold,
    /// `O(ε^{s/2})`: the value is the ratio to the target power.
    BigO,
    /// `o(1)`: the value itself, passing below 1.
    LittleO,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateEntry {
    pub name: String,
    pub kind: GateKind,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub epsilon: f64,
    pub entries: Vec<GateEntry>,
}

impl GateReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&GateEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub const CSV_HEADER: [&'static str; 6] =
        ["epsilon", "gate", "kind", "value", "threshold", "passed"];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for e in &self.entries {
            out.write_record([
                self.epsilon.to_string(),
                e.name.clone(),
                format!("{:?}", e.kind),
                e.value.to_string(),
                e.threshold.to_string(),
                e.passed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for GateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gates at epsilon = {}", self.epsilon)?;
        writeln!(
            f,
            "{:<22} {:<10} {:>14} {:>14}  result",
            "gate", "kind", "value", "threshold"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<22} {:<10} {:>14.6e} {:>14.6e}  {}",
                e.name,
                format!("{:?}", e.kind),
                e.value,
                e.threshold,
                if e.passed { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn constant(constants: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    constants
        .get(key)
        .copied()
        .ok_or_else(|| HnsError::InvalidParams(format!("missing constant {key}")))
}

/// Every smallness assumption of the convergence results evaluated on
/// `(u₀, u₁)` against the limit data `v₀` at the model's ε.
///
/// `O(ε^{s/2})` conditions are reported as ratios and pass when finite; a
/// single ε cannot certify them, see [`size_ratio_table`]. `o(1)` conditions
/// pass below 1.
pub fn smallness_gates(
    u0: &SpectralField,
    u1: &SpectralField,
    v0: &SpectralField,
    params: &ModelParams,
    constants: &BTreeMap<String, f64>,
) -> Result<GateReport> {
    u0.check_grid(u1)?;
    u0.check_grid(v0)?;
    let dim = u0.grid.dim;
    let n2 = 0.5 * dim as f64;
    let (eps, s, delta) = (params.epsilon, params.s, params.delta);
    let h = |f: &SpectralField, sigma: f64| sobolev_norm(f, sigma);
    let mut entries = Vec::new();
    let mut push = |name: &str, kind: GateKind, value: f64, threshold: f64| {
        let passed = match kind {
            GateKind::Threshold => value <= threshold,
            GateKind::BigO => value.is_finite(),
            GateKind::LittleO => value < threshold,
        };
        entries.push(GateEntry {
            name: name.into(),
            kind,
            value,
            threshold,
            passed,
        });
    };

    let target = eps.powf(0.5 * s);
    push(
        "size_i",
        GateKind::BigO,
        size_ratio(u0, u1, v0, eps, s),
        f64::INFINITY,
    );
    let size_ii = eps.powf(0.5 * (1.0 + delta)) * h(u0, n2 + delta)
        + eps.powf(0.5 * delta) * h(u0, n2 - 1.0 + delta);
    push("size_ii", GateKind::BigO, size_ii / target, f64::INFINITY);
    push(
        "size_iii",
        GateKind::LittleO,
        eps.powf(1.0 + 0.5 * delta) * h(u1, n2 - 1.0 + delta),
        1.0,
    );

    if dim == 2 {
        let hi = eps.powf(0.5 * (1.0 + delta)) * h(u0, 1.0 + delta)
            + eps.powf(0.5 * delta) * h(u0, delta);
        push("H_i", GateKind::LittleO, hi, 1.0);
        push(
            "H_ii",
            GateKind::LittleO,
            eps.sqrt() * h(u0, 1.0) + eps * h(u1, 0.0),
            1.0,
        );
        let c3 = constant(constants, "C3")?;
        push(
            "linf",
            GateKind::Threshold,
            u0.to_physical().max_abs(),
            0.5 / (c3 * eps.sqrt()),
        );
        if params.penalized() {
            let k = constant(constants, "K")?;
            let l2 = h(u0, 0.0);
            let bound = if l2 > 0.0 {
                2.0 / (k * k * l2 * l2)
            } else {
                f64::INFINITY
            };
            push("alpha_bound", GateKind::Threshold, params.alpha, bound);
        }
    } else {
        push(
            "H'_i",
            GateKind::LittleO,
            eps.powf(0.5 * (1.0 + delta)) * h(u0, 1.5 + delta),
            1.0,
        );
        push(
            "H'_ii",
            GateKind::LittleO,
            eps.powf(0.5 * delta) * h(u0, 0.5 + delta),
            1.0,
        );
        let k1 = constant(constants, "K1")?;
        push(
            "linf",
            GateKind::Threshold,
            u0.to_physical().max_abs(),
            0.5 / (k1 * eps.sqrt()),
        );
        let k2 = constant(constants, "K2")?;
        push(
            "half_norm_small",
            GateKind::Threshold,
            h(u0, 0.5),
            1.0 / (36.0 * k2.powi(3)),
        );
    }
    Ok(GateReport {
        epsilon: eps,
        entries,
    })
}

/// `(‖u₀−v₀‖_{Ḣ^{n/2−1}} + ε‖u₁‖_{Ḣ^{n/2−1}} + ε^{1/2}‖u₀‖_{Ḣ^{n/2}}) / ε^{s/2}`.
fn size_ratio(u0: &SpectralField, u1: &SpectralField, v0: &SpectralField, eps: f64, s: f64) -> f64 {
    let sigma = 0.5 * u0.grid.dim as f64 - 1.0;
    let lhs = sobolev_norm(&u0.sub(v0), sigma)
        + eps * sobolev_norm(u1, sigma)
        + eps.sqrt() * sobolev_norm(u0, sigma + 1.0);
    lhs / eps.powf(0.5 * s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub epsilon: f64,
    pub ratio: f64,
}

/// The leading size condition over an ε grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    /// Log-log slope of the ratio against ε.
    pub slope: f64,
    /// The ratio does not grow as ε decreases (slope ≥ −0.1).
    pub bounded: bool,
}

impl RatioTable {
    pub const CSV_HEADER: [&'static str; 2] = ["epsilon", "ratio"];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([r.epsilon.to_string(), r.ratio.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Tabulate the leading size ratio for data built at each ε by `build`.
pub fn size_ratio_table(
    v0: &SpectralField,
    s: f64,
    eps_grid: &[f64],
    build: impl Fn(f64) -> Result<(SpectralField, SpectralField)>,
) -> Result<RatioTable> {
    if eps_grid.len() < 2 {
        return Err(HnsError::InvalidParams(
            "ratio table needs at least two epsilon values".into(),
        ));
    }
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let (u0, u1) = build(eps)?;
        rows.push(RatioRow {
            epsilon: eps,
            ratio: size_ratio(&u0, &u1, v0, eps, s),
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ratio > 0.0)
        .map(|r| (r.epsilon.ln(), r.ratio.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        least_squares_slope(&pts)
    } else {
        0.0
    };
    Ok(RatioTable {
        bounded: slope >= -0.1 && rows.iter().all(|r| r.ratio.is_finite()),
        rows,
        slope,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
