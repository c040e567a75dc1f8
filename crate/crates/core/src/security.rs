//! Eavesdropper information, mutual information and asymptotic key rates
//! under collective attacks with reverse reconciliation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    condition_heterodyne, condition_homodyne, is_physical, von_neumann_entropy, CovarianceMatrix,
    Quadrature, PHYSICALITY_TOL,
};
use crate::optimize::{bisect_boundary, linspace, logspace, scan_then_refine};
use crate::protocols::{
    asym_channel_cm, bob_alice_cm, comparison_cm, heralding_cm_closed_form, pm_to_eb,
    ChannelParams, EbParams, PmParams, ProtocolKind,
};

/// Negative Holevo values above this are rounding noise and are clamped to zero.
pub const HOLEVO_CLAMP: f64 = 1e-9;
/// Scan resolution of the attack-model maximizations.
pub const BOUND_SCAN_POINTS: usize = 200;
/// Abscissa tolerance of golden-section refinement and boundary bisection.
pub const BOUND_TOL: f64 = 1e-10;
/// Upper end of the modulation-variance search for the comparison protocols.
pub const DEFAULT_V_MAX: f64 = 1e3;
/// Reconciliation efficiency used for the distance curves.
pub const DEFAULT_BETA: f64 = 0.95;

/// How Eve's information is bounded for the asymmetric protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackModel {
    /// Eve's channel is the same in both quadratures.
    SymmetricChannel,
    /// Unknown p correlation bounded only by physicality of the state.
    GeneralPhysicalityBound,
    /// Excess noise assumed equal in both quadratures, unknown `T_p`.
    EqualExcessNoise,
}

impl AttackModel {
    pub fn name(self) -> &'static str {
        match self {
            AttackModel::SymmetricChannel => "symmetric",
            AttackModel::GeneralPhysicalityBound => "general",
            AttackModel::EqualExcessNoise => "equal-noise",
        }
    }
}

/// Optimizer trace attached to a key-rate evaluation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Name of the optimized variable, when an optimization ran.
    pub argmax_name: Option<String>,
    pub argmax: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub i_ab: f64,
    pub chi_eb: f64,
    pub key_rate: f64,
    pub beta: f64,
    pub diagnostics: Diagnostics,
}

impl KeyRateResult {
    fn new(i_ab: f64, chi_eb: f64, beta: f64, diagnostics: Diagnostics) -> Self {
        Self {
            i_ab,
            chi_eb,
            key_rate: devetak_winter(i_ab, chi_eb, beta),
            beta,
            diagnostics,
        }
    }
}

/// Result of maximizing Eve's information over one unknown parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiBound {
    pub chi: f64,
    /// Value of the unknown parameter at the maximum.
    pub argmax: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn clamp_chi(chi: f64) -> f64 {
    if chi < 0.0 && chi > -HOLEVO_CLAMP {
        0.0
    } else {
        chi
    }
}

/// `χ_EB = S(Γ) - S(Γ | homodyne of measured_mode)`.
///
/// Bob holds `measured_mode`; by purification Eve's entropies equal those of
/// the joint and conditional states.
pub fn holevo(cm: &CovarianceMatrix, measured_mode: usize, quad: Quadrature) -> Result<f64> {
    let joint = von_neumann_entropy(cm)?;
    let conditional = von_neumann_entropy(&condition_homodyne(cm, measured_mode, quad)?)?;
    Ok(clamp_chi(joint - conditional))
}

/// Holevo information when Bob heterodynes `measured_mode`.
pub fn holevo_heterodyne(cm: &CovarianceMatrix, measured_mode: usize) -> Result<f64> {
    let joint = von_neumann_entropy(cm)?;
    let conditional = von_neumann_entropy(&condition_heterodyne(cm, measured_mode)?)?;
    Ok(clamp_chi(joint - conditional))
}

/// `½ log2(v_b / v_b_given_a)` for homodyne data.
pub fn mutual_information_homodyne(v_b: f64, v_b_given_a: f64) -> Result<f64> {
    if !(v_b_given_a > 0.0) {
        return Err(Error::param(
            "v_b_given_a",
            v_b_given_a,
            "conditional variance must be > 0",
        ));
    }
    let ratio = v_b / v_b_given_a;
    if !(ratio >= 1.0 - 1e-12) {
        return Err(Error::param(
            "v_b",
            v_b,
            "conditional variance exceeds unconditional variance",
        ));
    }
    Ok(0.5 * ratio.max(1.0).log2())
}

/// `K = β I_AB - χ_EB`, not floored.
pub fn devetak_winter(i_ab: f64, chi_eb: f64, beta: f64) -> f64 {
    beta * i_ab - chi_eb
}

/// Repeaterless bound `-log2(1 - η)` of the pure-loss channel.
pub fn plob_bound(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::param("eta", eta, "must lie in [0, 1)"));
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::param("tol", tol, "must be finite and > 0"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", beta, "must lie in [0, 1]"));
    }
    Ok(())
}

/// Alice–Bob x-quadrature mutual information of a two-mode state where both
/// homodyne x (Alice mode 0, Bob mode 1).
fn homodyne_x_information(cm: &CovarianceMatrix) -> Result<f64> {
    let v_b = cm.get(2, 2);
    let conditional = condition_homodyne(cm, 0, Quadrature::X)?;
    mutual_information_homodyne(v_b, conditional.get(0, 0))
}

/// Eve's information for the asymmetric protocol under a symmetric channel.
pub fn chi_asym_symmetric(pm: PmParams, t: f64, xi: f64) -> Result<f64> {
    let eb = pm_to_eb(pm)?;
    let cm = asym_channel_cm(eb, &ChannelParams::symmetric(t, xi)?)?;
    holevo(&cm, 1, Quadrature::X)
}

/// State of the general attack: x entries from the measured `(T_x, ξ_x)`,
/// Bob's p variance from a simulated symmetric channel, and a free `c_p`.
fn general_attack_cm(eb: EbParams, t_x: f64, xi_x: f64, c_p: f64) -> Result<CovarianceMatrix> {
    let EbParams { mu, r } = eb;
    let e2 = (2.0 * r).exp();
    let m2 = mu * mu - 1.0;
    let c_x = (t_x * m2 / e2).sqrt();
    let v_x = t_x * (mu / e2 + xi_x) + 1.0 - t_x;
    let v_p = t_x * (mu * e2 + xi_x) + 1.0 - t_x;
    bob_alice_cm(mu, c_x, c_p, v_x, v_p)
}

/// Interval of `c_p` for which the general-attack state is physical.
///
/// The symmetric-channel value is always physical; the boundary on each
/// side is found by bisection against the positivity limit `|c_p| < sqrt(mu v_p)`.
pub fn feasible_cp_interval(pm: PmParams, t_x: f64, xi_x: f64) -> Result<(f64, f64)> {
    feasible_cp_interval_tol(pm, t_x, xi_x, BOUND_TOL)
}

fn feasible_cp_interval_tol(pm: PmParams, t_x: f64, xi_x: f64, tol: f64) -> Result<(f64, f64)> {
    let eb = pm_to_eb(pm)?;
    ChannelParams::symmetric(t_x, xi_x)?;
    let c_sym = asym_channel_cm(eb, &ChannelParams::symmetric(t_x, xi_x)?)?.get(1, 3);
    let feasible = |c: f64| {
        general_attack_cm(eb, t_x, xi_x, c)
            .map(|cm| is_physical(&cm, PHYSICALITY_TOL))
            .unwrap_or(false)
    };
    if !feasible(c_sym) {
        return Err(Error::EmptyFeasibleSet);
    }
    let probe = general_attack_cm(eb, t_x, xi_x, 0.0)?;
    let limit = (probe.get(1, 1) * probe.get(3, 3)).sqrt();
    let (lo, _) = bisect_boundary(feasible, c_sym, -limit, tol);
    let (hi, _) = bisect_boundary(feasible, c_sym, limit, tol);
    Ok((lo, hi))
}

/// Upper bound on Eve's information over every physical value of the
/// unmeasured correlation `c_p`.
pub fn chi_asym_general_bound(pm: PmParams, t_x: f64, xi_x: f64) -> Result<ChiBound> {
    chi_asym_general_bound_tol(pm, t_x, xi_x, BOUND_TOL)
}

/// [`chi_asym_general_bound`] with an explicit tolerance on `c_p`.
pub fn chi_asym_general_bound_tol(pm: PmParams, t_x: f64, xi_x: f64, tol: f64) -> Result<ChiBound> {
    check_tol(tol)?;
    let eb = pm_to_eb(pm)?;
    let (lo, hi) = feasible_cp_interval_tol(pm, t_x, xi_x, tol)?;
    // The conditional state after Bob's x-homodyne does not involve c_p.
    let conditional = {
        let cm = general_attack_cm(eb, t_x, xi_x, lo)?;
        von_neumann_entropy(&condition_homodyne(&cm, 1, Quadrature::X)?)?
    };
    let objective = |c: f64| {
        general_attack_cm(eb, t_x, xi_x, c)
            .and_then(|cm| von_neumann_entropy(&cm))
            .map(|s| s - conditional)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid = linspace(lo, hi, BOUND_SCAN_POINTS);
    let best = scan_then_refine(objective, &grid, tol);
    Ok(ChiBound {
        chi: clamp_chi(best.value),
        argmax: best.x,
        iterations: best.iterations,
        evaluations: best.evaluations,
    })
}

/// Bound on Eve's information assuming `ξ_p = ξ_x` and an unknown `T_p ∈ [0, 1]`.
///
/// Values of `T_p` for which the resulting state is unphysical are skipped.
pub fn chi_asym_equal_noise(pm: PmParams, t_x: f64, xi_x: f64) -> Result<ChiBound> {
    chi_asym_equal_noise_tol(pm, t_x, xi_x, BOUND_TOL)
}

/// [`chi_asym_equal_noise`] with an explicit tolerance on `T_p`.
pub fn chi_asym_equal_noise_tol(pm: PmParams, t_x: f64, xi_x: f64, tol: f64) -> Result<ChiBound> {
    check_tol(tol)?;
    let eb = pm_to_eb(pm)?;
    ChannelParams::symmetric(t_x, xi_x)?;
    let objective = |t_p: f64| {
        ChannelParams::new(t_x, t_p, xi_x, xi_x)
            .and_then(|ch| asym_channel_cm(eb, &ch))
            .and_then(|cm| {
                if is_physical(&cm, PHYSICALITY_TOL) {
                    holevo(&cm, 1, Quadrature::X)
                } else {
                    Err(Error::EmptyFeasibleSet)
                }
            })
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid = linspace(0.0, 1.0, BOUND_SCAN_POINTS);
    let best = scan_then_refine(objective, &grid, tol);
    if !best.value.is_finite() {
        return Err(Error::EmptyFeasibleSet);
    }
    Ok(ChiBound {
        chi: clamp_chi(best.value),
        argmax: best.x,
        iterations: best.iterations,
        evaluations: best.evaluations,
    })
}

/// Key rate of the asymmetric protocol in a symmetric thermal-loss channel,
/// with Eve's information bounded according to `attack`.
pub fn key_rate_asym(
    pm: PmParams,
    t: f64,
    xi: f64,
    beta: f64,
    attack: AttackModel,
) -> Result<KeyRateResult> {
    key_rate_asym_tol(pm, t, xi, beta, attack, BOUND_TOL)
}

/// [`key_rate_asym`] with an explicit tolerance for the attack-bound optimizers.
pub fn key_rate_asym_tol(
    pm: PmParams,
    t: f64,
    xi: f64,
    beta: f64,
    attack: AttackModel,
    tol: f64,
) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let eb = pm_to_eb(pm)?;
    let cm = asym_channel_cm(eb, &ChannelParams::symmetric(t, xi)?)?;
    let i_ab = homodyne_x_information(&cm)?;
    let (chi, diagnostics) = match attack {
        AttackModel::SymmetricChannel => (holevo(&cm, 1, Quadrature::X)?, Diagnostics::default()),
        AttackModel::GeneralPhysicalityBound => {
            let b = chi_asym_general_bound_tol(pm, t, xi, tol)?;
            (b.chi, bound_diagnostics("c_p", &b))
        }
        AttackModel::EqualExcessNoise => {
            let b = chi_asym_equal_noise_tol(pm, t, xi, tol)?;
            (b.chi, bound_diagnostics("t_p", &b))
        }
    };
    Ok(KeyRateResult::new(i_ab, chi, beta, diagnostics))
}

/// Key rate of the asymmetric protocol through a known, possibly
/// quadrature-dependent, thermal-loss channel.
pub fn key_rate_asym_channel(pm: PmParams, ch: &ChannelParams, beta: f64) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let cm = asym_channel_cm(pm_to_eb(pm)?, ch)?;
    if !is_physical(&cm, PHYSICALITY_TOL) {
        return Err(Error::param(
            "t_p",
            ch.t_p,
            "channel parameters give an unphysical state",
        ));
    }
    let i_ab = homodyne_x_information(&cm)?;
    let chi = holevo(&cm, 1, Quadrature::X)?;
    Ok(KeyRateResult::new(i_ab, chi, beta, Diagnostics::default()))
}

fn bound_diagnostics(name: &str, b: &ChiBound) -> Diagnostics {
    Diagnostics {
        argmax_name: Some(name.to_string()),
        argmax: Some(b.argmax),
        iterations: b.iterations,
        evaluations: b.evaluations,
    }
}

/// Key rate of the heralding protocol after Alice's x-homodyne of A3, with
/// Alice (A1) and Bob both homodyning x.
pub fn key_rate_heralding(pm: PmParams, t: f64, xi: f64, beta: f64) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let eb = pm_to_eb(pm)?;
    let cm = heralding_cm_closed_form(eb, t, xi)?;
    let v_b = cm.get(4, 4);
    // modes after removing A1: (A2, B)
    let v_b_given_a = condition_homodyne(&cm, 0, Quadrature::X)?.get(2, 2);
    let i_ab = mutual_information_homodyne(v_b, v_b_given_a)?;
    let chi = holevo(&cm, 2, Quadrature::X)?;
    Ok(KeyRateResult::new(i_ab, chi, beta, Diagnostics::default()))
}

/// Key rate of a comparison protocol at a fixed modulation variance `v`.
pub fn key_rate_comparison(
    kind: ProtocolKind,
    v: f64,
    t: f64,
    xi: f64,
    beta: f64,
) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let cm = comparison_cm(kind, v, t, xi)?;
    let v_b = cm.get(2, 2);
    let (i_ab, chi) = match kind {
        ProtocolKind::SqueezedHomodyne => {
            (homodyne_x_information(&cm)?, holevo(&cm, 1, Quadrature::X)?)
        }
        ProtocolKind::CoherentHeterodyne => {
            let v_b_given_a = condition_heterodyne(&cm, 0)?.get(0, 0);
            let i_ab = ((v_b + 1.0) / (v_b_given_a + 1.0)).max(1.0).log2();
            (i_ab, holevo_heterodyne(&cm, 1)?)
        }
        _ => return Err(Error::UnsupportedProtocol(kind.name())),
    };
    Ok(KeyRateResult::new(i_ab, chi, beta, Diagnostics::default()))
}

/// Number of log-spaced seeds for [`optimize_modulation`].
pub const MODULATION_SEEDS: usize = 61;

/// Maximizes a comparison protocol's key rate over `V ∈ [1, v_max]`.
///
/// A logarithmic grid seeds golden-section refinement. A flat objective
/// returns the smallest maximizing `V`.
pub fn optimize_modulation(
    kind: ProtocolKind,
    t: f64,
    xi: f64,
    beta: f64,
    v_max: f64,
) -> Result<(f64, KeyRateResult)> {
    optimize_modulation_tol(kind, t, xi, beta, v_max, 1e-9 * v_max)
}

/// [`optimize_modulation`] with an explicit tolerance on `V`.
pub fn optimize_modulation_tol(
    kind: ProtocolKind,
    t: f64,
    xi: f64,
    beta: f64,
    v_max: f64,
    tol: f64,
) -> Result<(f64, KeyRateResult)> {
    check_tol(tol)?;
    if !(v_max > 1.0) || !v_max.is_finite() {
        return Err(Error::param("v_max", v_max, "must be finite and > 1"));
    }
    // surface parameter errors before optimizing
    key_rate_comparison(kind, 1.0, t, xi, beta)?;
    let objective = |v: f64| {
        key_rate_comparison(kind, v, t, xi, beta)
            .map(|k| k.key_rate)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid = logspace(1.0, v_max, MODULATION_SEEDS);
    let best = scan_then_refine(objective, &grid, tol);
    let mut result = key_rate_comparison(kind, best.x, t, xi, beta)?;
    result.diagnostics = Diagnostics {
        argmax_name: Some("V".to_string()),
        argmax: Some(best.x),
        iterations: best.iterations,
        evaluations: best.evaluations,
    };
    Ok((best.x, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{g_entropy, thermal_loss_channel, two_mode_squeezed};
    use crate::protocols::{
        heralding_equivalent_asym, zero_leakage_heralding, zero_leakage_heralding_inverse, EbParams,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn holevo_pure_tmsv_is_zero() {
        let t = two_mode_squeezed(3.0).unwrap();
        assert!(holevo(&t, 1, Quadrature::X).unwrap() < 1e-12);
        assert!(holevo(&t, 1, Quadrature::P).unwrap() < 1e-12);
    }

    #[test]
    fn holevo_lossy_tmsv_oracle() {
        // Joint spectrum {1.5, 1}. Conditional on Bob's x: Alice variances
        // (2 - 0.5·3/1.5, 2) = (1, 2), ν = √2.
        let lossy = thermal_loss_channel(
            &two_mode_squeezed(2.0).unwrap(),
            1,
            &ChannelParams::symmetric(0.5, 0.0).unwrap(),
        )
        .unwrap();
        let expected = g_entropy(1.5).unwrap() - g_entropy(2f64.sqrt()).unwrap();
        assert_abs_diff_eq!(
            holevo(&lossy, 1, Quadrature::X).unwrap(),
            expected,
            epsilon = 1e-12
        );
        // mpmath, 30 digits
        assert_abs_diff_eq!(expected, 0.104_162_191_994_915, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(mutual_information_homodyne(2.0, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mutual_information_homodyne(4.0, 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(mutual_information_homodyne(1.0, 2.0).is_err());
        assert!(mutual_information_homodyne(1.0, 0.0).is_err());
    }

    #[test]
    fn devetak_winter_examples() {
        assert_eq!(devetak_winter(1.0, 0.0, 1.0), 1.0);
        assert_abs_diff_eq!(devetak_winter(1.0, 0.3, 0.95), 0.65, epsilon = 1e-15);
        assert!(devetak_winter(0.5, 0.6, 1.0) < 0.0);
    }

    #[test]
    fn plob_examples() {
        assert_abs_diff_eq!(plob_bound(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            plob_bound(0.9).unwrap(),
            std::f64::consts::LOG2_10,
            epsilon = 1e-12
        );
        assert_eq!(plob_bound(0.0).unwrap(), 0.0);
        assert!(plob_bound(1.0).is_err());
    }

    #[test]
    fn asym_zero_leakage_pure_loss() {
        let pm = PmParams::new(0.5, 0.5).unwrap();
        for t in [0.1, 0.5, 0.9] {
            assert!(chi_asym_symmetric(pm, t, 0.0).unwrap() <= 1e-9);
            let k = key_rate_asym(pm, t, 0.0, 1.0, AttackModel::SymmetricChannel).unwrap();
            assert!(k.chi_eb <= 1e-9);
            assert_abs_diff_eq!(k.key_rate, k.i_ab, epsilon = 1e-9);
        }
    }

    #[test]
    fn asym_symmetric_two_routes() {
        let pm = PmParams::new(0.5, 1.0).unwrap();
        let chi = chi_asym_symmetric(pm, 0.5, 0.01).unwrap();
        let cm = asym_channel_cm(
            pm_to_eb(pm).unwrap(),
            &ChannelParams::symmetric(0.5, 0.01).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(chi, holevo(&cm, 1, Quadrature::X).unwrap(), epsilon = 1e-12);
        assert!(chi > 0.0);
    }

    #[test]
    fn general_bound_dominates_symmetric() {
        for v_sqz in [1.0, 0.5, 0.1] {
            let pm = PmParams::new(0.5, v_sqz).unwrap();
            let sym = chi_asym_symmetric(pm, 0.5, 0.01).unwrap();
            let general = chi_asym_general_bound(pm, 0.5, 0.01).unwrap();
            assert!(
                general.chi >= sym - 1e-9,
                "{v_sqz}: {} < {sym}",
                general.chi
            );
        }
    }

    #[test]
    fn general_conditional_entropy_independent_of_cp() {
        let pm = PmParams::new(0.5, 0.3).unwrap();
        let eb = pm_to_eb(pm).unwrap();
        let (lo, hi) = feasible_cp_interval(pm, 0.5, 0.01).unwrap();
        assert!(lo < hi);
        let s = |c| {
            let cm = general_attack_cm(eb, 0.5, 0.01, c).unwrap();
            von_neumann_entropy(&condition_homodyne(&cm, 1, Quadrature::X).unwrap()).unwrap()
        };
        assert!((s(lo) - s(hi)).abs() <= 1e-12);
    }

    #[test]
    fn feasible_interval_edges_are_tight() {
        let pm = PmParams::new(0.5, 0.4).unwrap();
        let eb = pm_to_eb(pm).unwrap();
        let (lo, hi) = feasible_cp_interval(pm, 0.5, 0.01).unwrap();
        let phys = |c| {
            is_physical(
                &general_attack_cm(eb, 0.5, 0.01, c).unwrap(),
                PHYSICALITY_TOL,
            )
        };
        assert!(phys(lo) && phys(hi));
        assert!(!phys(lo - 1e-6) && !phys(hi + 1e-6));
    }

    #[test]
    fn equal_noise_contains_symmetric_candidate() {
        let pm = PmParams::new(0.5, 0.6).unwrap();
        let sym = chi_asym_symmetric(pm, 0.5, 0.01).unwrap();
        let eq = chi_asym_equal_noise(pm, 0.5, 0.01).unwrap();
        assert!(eq.chi >= sym - 1e-9);
        assert!((0.0..=1.0).contains(&eq.argmax));
    }

    #[test]
    fn beta_zero_rate_is_minus_chi() {
        let pm = PmParams::new(0.5, 0.3).unwrap();
        let k = key_rate_asym(pm, 0.4, 0.02, 0.0, AttackModel::SymmetricChannel).unwrap();
        assert_eq!(k.key_rate, -k.chi_eb);
        assert!(k.key_rate <= 0.0);
        assert!(key_rate_asym(pm, 0.4, 0.02, 1.5, AttackModel::SymmetricChannel).is_err());
    }

    #[test]
    fn heralding_zero_leakage() {
        let (v_sqz, _) = zero_leakage_heralding_inverse(0.3).unwrap();
        let pm = PmParams::new(0.3, v_sqz).unwrap();
        for t in [0.05, 0.5, 0.95] {
            let k = key_rate_heralding(pm, t, 0.0, 1.0).unwrap();
            assert!(k.chi_eb <= 1e-8, "T={t}: {}", k.chi_eb);
            assert!(k.i_ab > 0.0);
        }
    }

    #[test]
    fn heralding_chi_matches_asym_at_any_squeezing() {
        let v_sqz = 0.25;
        let pm = PmParams::new(zero_leakage_heralding(v_sqz).unwrap(), v_sqz).unwrap();
        let asym = heralding_equivalent_asym(pm).unwrap();
        for (t, xi) in [(0.3, 0.0), (0.7, 0.05), (0.5, 0.1)] {
            let h = key_rate_heralding(pm, t, xi, 0.95).unwrap();
            let a = key_rate_asym(asym, t, xi, 0.95, AttackModel::SymmetricChannel).unwrap();
            assert_abs_diff_eq!(h.chi_eb, a.chi_eb, epsilon = 1e-10);
        }
    }

    #[test]
    fn heralding_information_gap_closed_form() {
        // Pre-channel conditional x variances: heralded (A1 only)
        // 2μe^{2r}/(e^{4r}μ²+1) versus 2e^{2r}/(μ(e^{4r}+1)).
        let pm = PmParams::new(0.3, 0.4).unwrap();
        let EbParams { mu, r } = pm_to_eb(pm).unwrap();
        let (e2, e4) = ((2.0 * r).exp(), (4.0 * r).exp());
        let herald_cond = 2.0 * mu * e2 / (e4 * mu * mu + 1.0);
        let b1 = 2.0 * mu * e2 / (e4 + 1.0);
        let h = key_rate_heralding(pm, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(h.i_ab, 0.5 * (b1 / herald_cond).log2(), epsilon = 1e-12);

        let asym_cond = 2.0 * e2 / (mu * (e4 + 1.0));
        let a = key_rate_asym(
            heralding_equivalent_asym(pm).unwrap(),
            1.0,
            0.0,
            1.0,
            AttackModel::SymmetricChannel,
        )
        .unwrap();
        assert_abs_diff_eq!(a.i_ab, 0.5 * (b1 / asym_cond).log2(), epsilon = 1e-12);
        assert!(a.i_ab > h.i_ab);
    }

    #[test]
    fn heralding_rate_matches_asym_when_deeply_squeezed() {
        let v_sqz = 1e-5;
        let pm = PmParams::new(zero_leakage_heralding(v_sqz).unwrap(), v_sqz).unwrap();
        let asym = heralding_equivalent_asym(pm).unwrap();
        for (t, xi) in [(0.1, 0.0), (0.9, 0.0), (0.5, 0.1)] {
            let h = key_rate_heralding(pm, t, xi, 0.95).unwrap();
            let a = key_rate_asym(asym, t, xi, 0.95, AttackModel::SymmetricChannel).unwrap();
            assert_abs_diff_eq!(h.key_rate, a.key_rate, epsilon = 1e-8);
        }
    }

    #[test]
    fn comparison_no_modulation() {
        for kind in [
            ProtocolKind::SqueezedHomodyne,
            ProtocolKind::CoherentHeterodyne,
        ] {
            let k = key_rate_comparison(kind, 1.0, 0.5, 0.05, 0.95).unwrap();
            assert!(k.i_ab.abs() < 1e-12);
            assert!(k.key_rate <= 1e-12);
        }
        let ideal =
            key_rate_comparison(ProtocolKind::SqueezedHomodyne, 10.0, 1.0, 0.0, 1.0).unwrap();
        assert!(ideal.chi_eb < 1e-12);
    }

    #[test]
    fn optimizer_dominates_fixed_points() {
        for kind in [
            ProtocolKind::SqueezedHomodyne,
            ProtocolKind::CoherentHeterodyne,
        ] {
            let (v, best) = optimize_modulation(kind, 0.5, 0.05, 0.95, DEFAULT_V_MAX).unwrap();
            assert!((1.0..=DEFAULT_V_MAX).contains(&v));
            for probe in [2.0, 20.0] {
                let k = key_rate_comparison(kind, probe, 0.5, 0.05, 0.95).unwrap();
                assert!(best.key_rate >= k.key_rate);
            }
        }
    }

    #[test]
    fn optimizer_caps_at_v_max_without_noise() {
        let grid = logspace(1.0, DEFAULT_V_MAX, 40);
        let rates: Vec<f64> = grid
            .iter()
            .map(|&v| {
                key_rate_comparison(ProtocolKind::SqueezedHomodyne, v, 1.0, 0.0, 1.0)
                    .unwrap()
                    .key_rate
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]));
        let (v, _) =
            optimize_modulation(ProtocolKind::SqueezedHomodyne, 1.0, 0.0, 1.0, DEFAULT_V_MAX)
                .unwrap();
        assert!(v > 0.99 * DEFAULT_V_MAX);
    }
}
