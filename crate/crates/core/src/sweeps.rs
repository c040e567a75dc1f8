//! Parameter sweeps that regenerate the data behind each figure.
//!
//! Grids include both endpoints and use [`linspace`], so a grid of
//! `2n - 1` points contains every point of the `n`-point grid bit for bit.
//! Rows are independent and are evaluated through an [`Execution`] strategy;
//! row order is fixed by the grid regardless of strategy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussian::PHYSICALITY_TOL;
use crate::optimize::linspace;
use crate::protocols::{
    db_to_variance, variance_to_db, zero_leakage_heralding, PmParams, ProtocolKind,
    INFINITE_SQUEEZING_VSQZ,
};
use crate::security::{
    chi_asym_equal_noise, chi_asym_general_bound, chi_asym_symmetric, key_rate_heralding,
    optimize_modulation, plob_bound, BOUND_SCAN_POINTS, BOUND_TOL, DEFAULT_BETA, DEFAULT_V_MAX,
    HOLEVO_CLAMP,
};

/// Default resolution of the two-dimensional contour sweeps.
pub const DEFAULT_CONTOUR_POINTS: usize = 101;
pub const DEFAULT_D_MAX_KM: f64 = 200.0;
pub const DEFAULT_LOSS_DB_PER_KM: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig4a,
    Fig4b,
    Fig5,
    Fig6,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }

    fn required_fixed(self) -> &'static [&'static str] {
        match self {
            FigureId::Fig2 => &["t_x", "xi_x", "v_sig"],
            FigureId::Fig4a | FigureId::Fig4b => &["v_sig", "xi"],
            FigureId::Fig5 => &["t", "xi"],
            FigureId::Fig6 => &[
                "xi",
                "beta",
                "loss_db_per_km",
                "v_sqz_infinite",
                "v_sqz_finite",
                "v_max",
            ],
        }
    }

    fn axis_names(self) -> &'static [&'static str] {
        match self {
            FigureId::Fig2 => &["v_sqz"],
            FigureId::Fig4a | FigureId::Fig4b => &["t", "v_sqz"],
            FigureId::Fig5 => &["v_sig", "v_sqz"],
            FigureId::Fig6 => &["distance_km"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, points: usize) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
            points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

/// Everything needed to regenerate one figure's data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub figure: FigureId,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<String, f64>,
    /// Output curves, in column order.
    pub curves: Vec<String>,
}

fn fixed(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn curves(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl SweepSpec {
    /// Eve's information bounds for the asymmetric protocol versus squeezing.
    pub fn fig2(points: usize) -> Self {
        Self {
            figure: FigureId::Fig2,
            axes: vec![Axis::new("v_sqz", 0.01, 1.0, points)],
            fixed: fixed(&[("t_x", 0.5), ("xi_x", 0.01), ("v_sig", 0.5)]),
            curves: curves(&["chi_symmetric", "chi_equal_noise", "chi_general"]),
        }
    }

    /// Heralding-protocol Holevo information over (T, v_sqz) at `v_sig = 0.3`.
    pub fn fig4(xi: f64, t_points: usize, v_sqz_points: usize) -> Self {
        Self {
            figure: if xi == 0.0 {
                FigureId::Fig4a
            } else {
                FigureId::Fig4b
            },
            axes: vec![
                Axis::new("t", 0.01, 1.0, t_points),
                Axis::new("v_sqz", 0.01, 1.99, v_sqz_points),
            ],
            fixed: fixed(&[("v_sig", 0.3), ("xi", xi)]),
            curves: curves(&["chi"]),
        }
    }

    /// Heralding-protocol Holevo information over (v_sig, v_sqz), pure loss at `T = 0.5`.
    pub fn fig5(v_sig_points: usize, v_sqz_points: usize) -> Self {
        Self {
            figure: FigureId::Fig5,
            axes: vec![
                Axis::new("v_sig", 0.0, 1.0, v_sig_points),
                Axis::new("v_sqz", 0.01, 1.0, v_sqz_points),
            ],
            fixed: fixed(&[("t", 0.5), ("xi", 0.0)]),
            curves: curves(&["chi"]),
        }
    }

    /// Key rate versus fiber distance for the heralding protocol and the
    /// comparison protocols, with the repeaterless bound.
    pub fn fig6(d_max_km: f64, points: usize) -> Self {
        Self {
            figure: FigureId::Fig6,
            axes: vec![Axis::new("distance_km", 0.0, d_max_km, points)],
            fixed: fixed(&[
                ("xi", 0.05),
                ("beta", DEFAULT_BETA),
                ("loss_db_per_km", DEFAULT_LOSS_DB_PER_KM),
                ("v_sqz_infinite", INFINITE_SQUEEZING_VSQZ),
                ("v_sqz_finite", db_to_variance(10.0)),
                ("v_max", DEFAULT_V_MAX),
            ]),
            curves: curves(&[
                "t",
                "heralding_infinite",
                "heralding_10db",
                "squeezed_homodyne",
                "coherent_heterodyne",
                "plob",
            ]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.figure.axis_names();
        if self.axes.len() != names.len() {
            return Err(Error::param(
                "axes",
                self.axes.len() as f64,
                "wrong number of axes for figure",
            ));
        }
        for (axis, expected) in self.axes.iter().zip(names) {
            if axis.name != *expected {
                return Err(Error::param("axes", 0.0, "axis names do not match figure"));
            }
            if axis.points < 2 {
                return Err(Error::param(
                    "points",
                    axis.points as f64,
                    "need at least 2 grid points",
                ));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min < axis.max) {
                return Err(Error::param("axis", axis.min, "need finite min < max"));
            }
        }
        for key in self.figure.required_fixed() {
            if !self.fixed.contains_key(*key) {
                return Err(Error::param("fixed", f64::NAN, "missing fixed parameter"));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> f64 {
        self.fixed[key]
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.name.clone()).collect();
        if self.figure == FigureId::Fig2 {
            cols.push("sqz_db".to_string());
        }
        cols.extend(self.curves.iter().cloned());
        cols
    }

    /// Axis points in row order (first axis outermost).
    fn grid(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            rows = rows
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        rows
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// Some outputs diverge (e.g. the repeaterless bound at zero loss).
    Unbounded,
    /// Inputs define no physical state, or a numerical step failed.
    Unphysical,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Unbounded => "unbounded",
            RowStatus::Unphysical => "unphysical",
        }
    }
}

/// One grid point: axis values followed by outputs. `None` marks a value
/// that could not be reported; the status says why.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<Option<f64>>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub figure: FigureId,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub metadata: BTreeMap<String, Value>,
}

impl SweepResult {
    /// Values of a named column, `None` where the row has no value.
    /// Clamps negative key rates to zero for plotting. Library results keep
    /// the raw (possibly negative) rates; this is applied on emission.
    pub fn floor_key_rates(&mut self) {
        if self.figure != FigureId::Fig6 {
            return;
        }
        let rate_cols: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.starts_with("heralding") || c.starts_with("squeezed") || c.starts_with("coherent")
            })
            .map(|(i, _)| i)
            .collect();
        for row in &mut self.rows {
            for &i in &rate_cols {
                if let Some(v) = row.values[i].as_mut() {
                    *v = v.max(0.0);
                }
            }
        }
        self.metadata
            .insert("rates_floored_at_zero".into(), json!(true));
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn row_from(axis: &[f64], outputs: Result<Vec<f64>>) -> SweepRow {
    let mut values: Vec<Option<f64>> = axis.iter().copied().map(finite).collect();
    match outputs {
        Ok(out) => {
            let status = if out.iter().all(|v| v.is_finite()) {
                RowStatus::Ok
            } else {
                RowStatus::Unbounded
            };
            values.extend(out.into_iter().map(finite));
            SweepRow { values, status }
        }
        Err(_) => SweepRow {
            values,
            status: RowStatus::Unphysical,
        },
    }
}

fn heralding_pm(v_sqz: f64) -> Result<PmParams> {
    PmParams::new(zero_leakage_heralding(v_sqz)?, v_sqz)
}

pub fn distance_to_transmissivity(d_km: f64, loss_db_per_km: f64) -> Result<f64> {
    if !(d_km >= 0.0) || !d_km.is_finite() {
        return Err(Error::param("distance_km", d_km, "must be >= 0"));
    }
    if !(loss_db_per_km >= 0.0) || !loss_db_per_km.is_finite() {
        return Err(Error::param(
            "loss_db_per_km",
            loss_db_per_km,
            "must be >= 0",
        ));
    }
    Ok(10f64.powf(-loss_db_per_km * d_km / 10.0))
}

fn evaluate_row(spec: &SweepSpec, axis: &[f64]) -> Result<Vec<f64>> {
    match spec.figure {
        FigureId::Fig2 => {
            let v_sqz = axis[0];
            let (t_x, xi_x) = (spec.get("t_x"), spec.get("xi_x"));
            let pm = PmParams::new(spec.get("v_sig"), v_sqz)?;
            Ok(vec![
                variance_to_db(v_sqz),
                chi_asym_symmetric(pm, t_x, xi_x)?,
                chi_asym_equal_noise(pm, t_x, xi_x)?.chi,
                chi_asym_general_bound(pm, t_x, xi_x)?.chi,
            ])
        }
        FigureId::Fig4a | FigureId::Fig4b => {
            let (t, v_sqz) = (axis[0], axis[1]);
            let pm = PmParams::new(spec.get("v_sig"), v_sqz)?;
            Ok(vec![key_rate_heralding(pm, t, spec.get("xi"), 1.0)?.chi_eb])
        }
        FigureId::Fig5 => {
            let (v_sig, v_sqz) = (axis[0], axis[1]);
            let pm = PmParams::new(v_sig, v_sqz)?;
            Ok(vec![
                key_rate_heralding(pm, spec.get("t"), spec.get("xi"), 1.0)?.chi_eb,
            ])
        }
        FigureId::Fig6 => {
            let t = distance_to_transmissivity(axis[0], spec.get("loss_db_per_km"))?;
            let (xi, beta, v_max) = (spec.get("xi"), spec.get("beta"), spec.get("v_max"));
            let herald_inf =
                key_rate_heralding(heralding_pm(spec.get("v_sqz_infinite"))?, t, xi, beta)?;
            let herald_fin =
                key_rate_heralding(heralding_pm(spec.get("v_sqz_finite"))?, t, xi, beta)?;
            let (_, sq) = optimize_modulation(ProtocolKind::SqueezedHomodyne, t, xi, beta, v_max)?;
            let (_, coh) =
                optimize_modulation(ProtocolKind::CoherentHeterodyne, t, xi, beta, v_max)?;
            let plob = if t < 1.0 {
                plob_bound(t)?
            } else {
                f64::INFINITY
            };
            Ok(vec![
                t,
                herald_inf.key_rate,
                herald_fin.key_rate,
                sq.key_rate,
                coh.key_rate,
                plob,
            ])
        }
    }
}

fn metadata(spec: &SweepSpec) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("figure".into(), json!(spec.figure.name()));
    m.insert("library".into(), json!("cvqkd"));
    m.insert("library_version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("axes".into(), json!(spec.axes));
    m.insert("fixed".into(), json!(spec.fixed));
    m.insert(
        "tolerances".into(),
        json!({
            "physicality": PHYSICALITY_TOL,
            "holevo_clamp": HOLEVO_CLAMP,
            "bound_tol": BOUND_TOL,
            "bound_scan_points": BOUND_SCAN_POINTS,
        }),
    );
    m.insert(
        "units".into(),
        json!("shot-noise units; rates in bits per channel use"),
    );
    if spec.figure == FigureId::Fig6 {
        m.insert("rates_floored_at_zero".into(), json!(false));
        let inf = spec.get("v_sqz_infinite");
        let fin = spec.get("v_sqz_finite");
        m.insert(
            "heralding_v_sig".into(),
            json!({
                "infinite": zero_leakage_heralding(inf).ok(),
                "10db": zero_leakage_heralding(fin).ok(),
            }),
        );
    }
    m
}

/// Evaluates every grid point of `spec`.
pub fn run(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.grid();
    let rows = exec.map(&grid, |axis| row_from(axis, evaluate_row(spec, axis)));
    Ok(SweepResult {
        figure: spec.figure,
        columns: spec.columns(),
        rows,
        metadata: metadata(spec),
    })
}

pub fn run_fig2(points: usize) -> Result<SweepResult> {
    run(&SweepSpec::fig2(points), Execution::default())
}

pub fn run_fig4(xi: f64, t_points: usize, v_sqz_points: usize) -> Result<SweepResult> {
    run(
        &SweepSpec::fig4(xi, t_points, v_sqz_points),
        Execution::default(),
    )
}

pub fn run_fig5(v_sig_points: usize, v_sqz_points: usize) -> Result<SweepResult> {
    run(
        &SweepSpec::fig5(v_sig_points, v_sqz_points),
        Execution::default(),
    )
}

pub fn run_fig6(d_max_km: f64, points: usize) -> Result<SweepResult> {
    if !(d_max_km > 0.0) {
        return Err(Error::param("d_max", d_max_km, "must be > 0"));
    }
    run(&SweepSpec::fig6(d_max_km, points), Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_transmissivity(0.0, 0.2).unwrap(), 1.0);
        assert_abs_diff_eq!(
            distance_to_transmissivity(50.0, 0.2).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            distance_to_transmissivity(15.0, 0.2).unwrap(),
            0.501_187_233_627_272_3,
            epsilon = 1e-12
        );
        assert!(distance_to_transmissivity(-1.0, 0.2).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::fig2(1).validate().is_err());
        let mut s = SweepSpec::fig6(100.0, 5);
        s.fixed.remove("beta");
        assert!(s.validate().is_err());
        assert!(SweepSpec::fig5(3, 3).validate().is_ok());
        assert!(run_fig6(0.0, 5).is_err());
    }

    #[test]
    fn fig2_shape_and_order() {
        let r = run_fig2(5).unwrap();
        assert_eq!(
            r.columns,
            [
                "v_sqz",
                "sqz_db",
                "chi_symmetric",
                "chi_equal_noise",
                "chi_general"
            ]
        );
        assert_eq!(r.rows.len(), 5);
        for row in &r.rows {
            assert_eq!(row.status, RowStatus::Ok);
            let v: Vec<f64> = row.values.iter().map(|v| v.unwrap()).collect();
            assert!(v[4] >= v[3] - 1e-9 && v[3] >= v[2] - 1e-9, "{v:?}");
            assert!(v[2] >= 0.0);
        }
        let last = r.rows.last().unwrap();
        assert_eq!(last.values[0], Some(1.0));
        assert_eq!(last.values[1], Some(0.0));
    }

    #[test]
    fn fig4_grid_is_row_major() {
        let r = run_fig4(0.0, 3, 4).unwrap();
        assert_eq!(r.figure, FigureId::Fig4a);
        assert_eq!(r.rows.len(), 12);
        assert_eq!(r.rows[0].values[0], Some(0.01));
        assert_eq!(r.rows[3].values[1], Some(1.99));
        assert_eq!(r.rows[4].values[0], r.rows[7].values[0]);
        assert_eq!(run_fig4(0.001, 2, 2).unwrap().figure, FigureId::Fig4b);
    }

    #[test]
    fn fig6_zero_distance_is_flagged() {
        let r = run_fig6(100.0, 3).unwrap();
        assert_eq!(r.columns.len(), 7);
        assert_eq!(r.rows[0].status, RowStatus::Unbounded);
        assert_eq!(r.rows[0].values[6], None);
        assert_eq!(r.rows[1].status, RowStatus::Ok);
        assert!(r.rows[1].values.iter().all(|v| v.is_some()));

        let far = run_fig6(300.0, 2).unwrap();
        let coh = far.column("coherent_heterodyne").unwrap()[1].unwrap();
        assert!(coh < 0.0, "raw rate should stay negative: {coh}");
        let mut floored = far.clone();
        floored.floor_key_rates();
        assert_eq!(floored.column("coherent_heterodyne").unwrap()[1], Some(0.0));
        assert_eq!(floored.metadata["rates_floored_at_zero"], json!(true));
    }

    #[test]
    fn sequential_and_default_agree_bitwise() {
        let spec = SweepSpec::fig5(4, 4);
        let a = run(&spec, Execution::Sequential).unwrap();
        let b = run(&spec, Execution::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_keeps_rows() {
        let coarse = run_fig5(3, 3).unwrap();
        let fine = run_fig5(5, 5).unwrap();
        for (i, row) in coarse.rows.iter().enumerate() {
            let (a, b) = (i / 3, i % 3);
            let j = (2 * a) * 5 + 2 * b;
            for (x, y) in row.values.iter().zip(&fine.rows[j].values) {
                assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
            }
        }
    }
}
