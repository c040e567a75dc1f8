//! Protocol parameterizations and the covariance matrices they produce.
//!
//! The asymmetric minimum-leakage protocol sends x-squeezed states modulated
//! along x. Its entanglement-based (EB) picture is a two-mode squeezed vacuum
//! of variance `mu` whose outgoing mode is squeezed by `r`. The heralding
//! protocol interferes two such sources (one rotated by 90°) on a balanced
//! beamsplitter and conditions on Alice's x-homodyne of the leftover mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_beamsplitter, apply_squeezer, condition_homodyne, partial_state, thermal_loss_channel,
    two_mode_squeezed, CovarianceMatrix, Quadrature,
};

/// Squeezed-quadrature variance used for "infinite" squeezing curves.
pub const INFINITE_SQUEEZING_VSQZ: f64 = 1e-4;

/// Converts a squeezing level in dB to a quadrature variance in shot-noise units.
pub fn db_to_variance(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Converts a quadrature variance to a squeezing level in dB (positive = squeezed).
pub fn variance_to_db(v: f64) -> f64 {
    -10.0 * v.log10()
}

/// Prepare-and-measure parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmParams {
    /// Gaussian modulation variance.
    pub v_sig: f64,
    /// Variance of the squeezed quadrature of each prepared state.
    pub v_sqz: f64,
}

impl PmParams {
    pub fn new(v_sig: f64, v_sqz: f64) -> Result<Self> {
        let pm = Self { v_sig, v_sqz };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_sqz > 0.0) || !self.v_sqz.is_finite() {
            return Err(Error::param("v_sqz", self.v_sqz, "must be > 0"));
        }
        if !(self.v_sig >= 0.0) || !self.v_sig.is_finite() {
            return Err(Error::param("v_sig", self.v_sig, "must be >= 0"));
        }
        Ok(())
    }
}

/// Entanglement-based parameters: EPR variance and the squeezing applied to
/// the outgoing mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EbParams {
    pub mu: f64,
    pub r: f64,
}

impl EbParams {
    pub fn new(mu: f64, r: f64) -> Result<Self> {
        let eb = Self { mu, r };
        eb.validate()?;
        Ok(eb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 1.0) || !self.mu.is_finite() {
            return Err(Error::param("mu", self.mu, "EPR variance must be >= 1"));
        }
        if !self.r.is_finite() {
            return Err(Error::param("r", self.r, "must be finite"));
        }
        Ok(())
    }

    /// `sqrt(mu^2 - 1)`, the EPR correlation strength.
    fn correlation(&self) -> f64 {
        (self.mu * self.mu - 1.0).sqrt()
    }
}

/// Per-quadrature channel transmittance and input-referred excess noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub t_x: f64,
    pub t_p: f64,
    pub xi_x: f64,
    pub xi_p: f64,
}

impl ChannelParams {
    pub fn new(t_x: f64, t_p: f64, xi_x: f64, xi_p: f64) -> Result<Self> {
        let ch = Self {
            t_x,
            t_p,
            xi_x,
            xi_p,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn symmetric(t: f64, xi: f64) -> Result<Self> {
        Self::new(t, t, xi, xi)
    }

    pub fn is_symmetric(&self) -> bool {
        self.t_x == self.t_p && self.xi_x == self.xi_p
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_x", self.t_x), ("t_p", self.t_p)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::param(name, t, "transmittance must lie in [0, 1]"));
            }
        }
        for (name, xi) in [("xi_x", self.xi_x), ("xi_p", self.xi_p)] {
            if !(xi >= 0.0) || !xi.is_finite() {
                return Err(Error::param(name, xi, "excess noise must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    AsymmetricMinLeak,
    Heralding,
    SqueezedHomodyne,
    CoherentHeterodyne,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::AsymmetricMinLeak => "asymmetric-min-leak",
            ProtocolKind::Heralding => "heralding",
            ProtocolKind::SqueezedHomodyne => "squeezed-homodyne",
            ProtocolKind::CoherentHeterodyne => "coherent-heterodyne",
        }
    }
}

/// `mu = sqrt(1 + v_sig / v_sqz)`, `r = -ln(sqrt(v_sqz (v_sqz + v_sig))) / 2`.
pub fn pm_to_eb(pm: PmParams) -> Result<EbParams> {
    pm.validate()?;
    let mu = (1.0 + pm.v_sig / pm.v_sqz).sqrt();
    let r = -0.5 * (pm.v_sqz * (pm.v_sqz + pm.v_sig)).sqrt().ln();
    Ok(EbParams { mu, r })
}

/// Inverse of [`pm_to_eb`]: with `V = e^{-2r}`, `mu V = v_sig + v_sqz` and
/// `mu / V = 1 / v_sqz`.
pub fn eb_to_pm(eb: EbParams) -> Result<PmParams> {
    eb.validate()?;
    let v = (-2.0 * eb.r).exp();
    let v_sqz = v / eb.mu;
    let v_sig = eb.mu * v - v_sqz;
    if !(v_sqz > 0.0) {
        return Err(Error::param(
            "v_sqz",
            v_sqz,
            "EB point has no PM realization",
        ));
    }
    // μV - V/μ is exactly zero at μ = 1; rounding can leave a tiny negative.
    let v_sig = if v_sig < 0.0 && v_sig > -1e-15 * eb.mu * v {
        0.0
    } else {
        v_sig
    };
    if v_sig < 0.0 {
        return Err(Error::param(
            "v_sig",
            v_sig,
            "EB point has no PM realization",
        ));
    }
    Ok(PmParams { v_sig, v_sqz })
}

/// Alice–Bob state before the channel: TMSV(`mu`) with the outgoing mode
/// squeezed by `r`.
pub fn asym_input_cm(eb: EbParams) -> Result<CovarianceMatrix> {
    eb.validate()?;
    let EbParams { mu, r } = eb;
    let c = eb.correlation();
    let (em, ep) = ((-r).exp(), r.exp());
    CovarianceMatrix::from_row_slice(
        2,
        &[
            mu,
            0.0,
            em * c,
            0.0, //
            0.0,
            mu,
            0.0,
            -ep * c, //
            em * c,
            0.0,
            mu * em * em,
            0.0, //
            0.0,
            -ep * c,
            0.0,
            mu * ep * ep,
        ],
    )
}

/// Alice–Bob state after a (possibly asymmetric) thermal-loss channel.
pub fn asym_channel_cm(eb: EbParams, ch: &ChannelParams) -> Result<CovarianceMatrix> {
    eb.validate()?;
    ch.validate()?;
    let EbParams { mu, r } = eb;
    let m2 = mu * mu - 1.0;
    let e2 = (2.0 * r).exp();
    let c_x = (ch.t_x * m2 / e2).sqrt();
    let c_p = -(ch.t_p * e2 * m2).sqrt();
    let v_x = ch.t_x * (mu / e2 + ch.xi_x) + 1.0 - ch.t_x;
    let v_p = ch.t_p * (mu * e2 + ch.xi_p) + 1.0 - ch.t_p;
    bob_alice_cm(mu, c_x, c_p, v_x, v_p)
}

/// The generic Alice–Bob matrix with diagonal Alice block `mu I`.
pub(crate) fn bob_alice_cm(
    mu: f64,
    c_x: f64,
    c_p: f64,
    v_x: f64,
    v_p: f64,
) -> Result<CovarianceMatrix> {
    CovarianceMatrix::from_row_slice(
        2,
        &[
            mu, 0.0, c_x, 0.0, //
            0.0, mu, 0.0, c_p, //
            c_x, 0.0, v_x, 0.0, //
            0.0, c_p, 0.0, v_p,
        ],
    )
}

/// Modulation variance that removes Eve's information in a pure-loss channel:
/// `v_sig = 1 - v_sqz`.
pub fn zero_leakage_asym(v_sqz: f64) -> Result<f64> {
    if !(v_sqz > 0.0 && v_sqz <= 1.0) {
        return Err(Error::param("v_sqz", v_sqz, "must lie in (0, 1]"));
    }
    Ok(1.0 - v_sqz)
}

/// Heralding zero-leakage condition `v_sig = (v_sqz² - 2 v_sqz + 1) / (2 - v_sqz)`.
pub fn zero_leakage_heralding(v_sqz: f64) -> Result<f64> {
    if !(v_sqz > 0.0 && v_sqz < 2.0) {
        return Err(Error::param("v_sqz", v_sqz, "must lie in (0, 2)"));
    }
    Ok((v_sqz * v_sqz - 2.0 * v_sqz + 1.0) / (2.0 - v_sqz))
}

/// Both squeezed-variance solutions of the heralding zero-leakage condition
/// for a given modulation, smaller (squeezed) root first.
///
/// Solves `v_sqz² + (v_sig - 2) v_sqz + (1 - 2 v_sig) = 0`. The discriminant
/// is `v_sig (v_sig + 4)`; the squeezed root is positive only for
/// `v_sig < 1/2`.
pub fn zero_leakage_heralding_inverse(v_sig: f64) -> Result<(f64, f64)> {
    if !v_sig.is_finite() {
        return Err(Error::param("v_sig", v_sig, "must be finite"));
    }
    let disc = v_sig * (v_sig + 4.0);
    if disc < 0.0 {
        return Err(Error::param("v_sig", v_sig, "negative discriminant"));
    }
    if !(v_sig < 0.5) {
        return Err(Error::param(
            "v_sig",
            v_sig,
            "squeezed root is non-positive for v_sig >= 0.5",
        ));
    }
    let b = v_sig - 2.0;
    let root = disc.sqrt();
    // -b > 0 here, so the large root is cancellation-free; the small one
    // comes from the product of roots.
    let large = 0.5 * (-b + root);
    let small = (1.0 - 2.0 * v_sig) / large;
    Ok((small, large))
}

/// Closed-form heralded three-mode state (A1, A2, B) after the channel and
/// after Alice's x-homodyne of A3.
pub fn heralding_cm_closed_form(eb: EbParams, t: f64, xi: f64) -> Result<CovarianceMatrix> {
    eb.validate()?;
    ChannelParams::symmetric(t, xi)?;
    let EbParams { mu, r } = eb;
    let s = eb.correlation();
    let e2 = (2.0 * r).exp();
    let e4 = e2 * e2;
    let d = e4 + 1.0;
    let a1 = (e4 * mu * mu + 1.0) / (mu * d);
    let a2 = (mu * mu + e4) / (mu * d);
    let b1 = (e4 - t + t * xi - t * e4 + t * xi * e4 + 2.0 * t * mu * e2 + 1.0) / d;
    let b2 = t * xi - t + 0.5 * t * (mu / e2 + mu * e2) + 1.0;
    let c1 = e2 * (mu * mu - 1.0) / (mu * d);
    let k = (2.0 * t).sqrt() * s;
    let c2 = k * (3.0 * r).exp() / d;
    let c3 = -k * r.exp() / 2.0;
    let c4 = k * r.exp() / d;
    let c5 = -k * (-r).exp() / 2.0;
    CovarianceMatrix::from_row_slice(
        3,
        &[
            a1, 0.0, c1, 0.0, c2, 0.0, //
            0.0, mu, 0.0, 0.0, 0.0, c3, //
            c1, 0.0, a2, 0.0, c4, 0.0, //
            0.0, 0.0, 0.0, mu, 0.0, c5, //
            c2, 0.0, c4, 0.0, b1, 0.0, //
            0.0, c3, 0.0, c5, 0.0, b2,
        ],
    )
}

/// Pre-channel four-mode heralding source, modes ordered (A1, B, A2, A3).
///
/// Two TMSV(`mu`) pairs (A1, B) and (A2, A3); B is squeezed in x by `r`,
/// A3 in p by the same amount; then B and A3 meet on a 50:50 beamsplitter
/// with `B' = (B + A3)/√2`, `A3' = (A3 - B)/√2`.
pub fn heralding_source_cm(eb: EbParams) -> Result<CovarianceMatrix> {
    eb.validate()?;
    let pair = two_mode_squeezed(eb.mu)?;
    let state = CovarianceMatrix::direct_sum(&[&pair, &pair]);
    let state = apply_squeezer(&state, 1, eb.r)?;
    let state = apply_squeezer(&state, 3, -eb.r)?;
    apply_beamsplitter(&state, 1, 3, 0.5)
}

/// Heralded three-mode state (A1, A2, B) built by explicit Gaussian operations.
/// Independent of [`heralding_cm_closed_form`] and used to check it.
pub fn heralding_cm_pipeline(eb: EbParams, t: f64, xi: f64) -> Result<CovarianceMatrix> {
    let channel = ChannelParams::symmetric(t, xi)?;
    let state = heralding_source_cm(eb)?;
    let state = thermal_loss_channel(&state, 1, &channel)?;
    // remaining order after removing A3: (A1, B, A2)
    let heralded = condition_homodyne(&state, 3, Quadrature::X)?;
    partial_state(&heralded, &[0, 2, 1])
}

/// Bob's single-mode state after the channel and Alice's heralding x-homodyne.
pub fn heralded_bob_cm(eb: EbParams, t: f64, xi: f64) -> Result<CovarianceMatrix> {
    eb.validate()?;
    ChannelParams::symmetric(t, xi)?;
    let EbParams { mu, r } = eb;
    let e2 = (2.0 * r).exp();
    let e4 = e2 * e2;
    let v_x = (e4 - t + t * xi - t * e4 + t * xi * e4 + 2.0 * t * mu * e2 + 1.0) / (e4 + 1.0);
    let v_p = t * xi - t + t * mu * (2.0 * r).cosh() + 1.0;
    Ok(CovarianceMatrix::single_mode(v_x, v_p))
}

/// Asymmetric-protocol parameters whose channel output matches the heralded
/// state seen by Bob.
///
/// Heralding leaves Bob a squeezed state with variances
/// `(mu / cosh 2r, mu cosh 2r)`, i.e. an asymmetric-protocol source with the
/// same `mu` and outgoing squeezing `r' = ln(cosh 2r) / 2`.
pub fn heralding_equivalent_asym(pm: PmParams) -> Result<PmParams> {
    let eb = pm_to_eb(pm)?;
    let r = 0.5 * (2.0 * eb.r).cosh().ln();
    eb_to_pm(EbParams { mu: eb.mu, r })
}

/// Shared EB state of the comparison protocols: TMSV(`v`) with Bob's mode
/// through a symmetric thermal-loss channel.
pub fn comparison_cm(kind: ProtocolKind, v: f64, t: f64, xi: f64) -> Result<CovarianceMatrix> {
    match kind {
        ProtocolKind::SqueezedHomodyne | ProtocolKind::CoherentHeterodyne => {}
        _ => return Err(Error::UnsupportedProtocol(kind.name())),
    }
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::param("V", v, "modulation variance must be >= 1"));
    }
    ChannelParams::symmetric(t, xi)?;
    let c = (t * (v * v - 1.0)).sqrt();
    let v_b = t * (v + xi) + 1.0 - t;
    bob_alice_cm(v, c, -c, v_b, v_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{is_physical, symplectic_eigenvalues};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pm_eb_examples() {
        let eb = pm_to_eb(PmParams::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(eb, EbParams { mu: 1.0, r: 0.0 });

        let eb = pm_to_eb(PmParams::new(0.5, 0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(eb.mu, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(eb.r, 0.173_286_795, epsilon = 1e-9);
        assert_abs_diff_eq!(eb.mu * (-2.0 * eb.r).exp(), 1.0, epsilon = 1e-15);

        assert!(pm_to_eb(PmParams {
            v_sig: 0.1,
            v_sqz: 0.0
        })
        .is_err());
    }

    #[test]
    fn eb_pm_examples() {
        let pm = eb_to_pm(EbParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(
            pm,
            PmParams {
                v_sig: 0.0,
                v_sqz: 1.0
            }
        );

        let pm = eb_to_pm(EbParams::new(2f64.sqrt(), 0.173_286_795_139_986_3).unwrap()).unwrap();
        assert_abs_diff_eq!(pm.v_sig, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pm.v_sqz, 0.5, epsilon = 1e-12);

        let mu: f64 = 3.7;
        let pm = eb_to_pm(EbParams::new(mu, mu.sqrt().ln()).unwrap()).unwrap();
        assert_abs_diff_eq!(pm.v_sig + pm.v_sqz, 1.0, epsilon = 1e-14);

        // μ = 1 with squeezing would need negative modulation
        assert!(eb_to_pm(EbParams::new(2.0, -2.0).unwrap()).is_ok());
        assert!(eb_to_pm(EbParams { mu: 0.5, r: 0.0 }).is_err());
    }

    #[test]
    fn input_cm_matches_construction() {
        let eb = EbParams::new(2.3, 0.41).unwrap();
        let direct = asym_input_cm(eb).unwrap();
        let built = apply_squeezer(&two_mode_squeezed(2.3).unwrap(), 1, 0.41).unwrap();
        assert!(direct.max_abs_diff(&built) < 1e-12);

        let r0 = asym_input_cm(EbParams::new(2.3, 0.0).unwrap()).unwrap();
        assert!(r0.max_abs_diff(&two_mode_squeezed(2.3).unwrap()) < 1e-15);
    }

    #[test]
    fn input_cm_shot_noise_forms() {
        let mu: f64 = 4.0;
        let shot = asym_input_cm(EbParams::new(mu, mu.sqrt().ln()).unwrap()).unwrap();
        let printed = CovarianceMatrix::from_row_slice(
            2,
            &[
                mu,
                0.0,
                ((mu * mu - 1.0) / mu).sqrt(),
                0.0, //
                0.0,
                mu,
                0.0,
                -(mu * (mu * mu - 1.0)).sqrt(), //
                ((mu * mu - 1.0) / mu).sqrt(),
                0.0,
                1.0,
                0.0, //
                0.0,
                -(mu * (mu * mu - 1.0)).sqrt(),
                0.0,
                mu * mu,
            ],
        )
        .unwrap();
        assert!(shot.max_abs_diff(&printed) < 1e-12);

        let coherent = asym_input_cm(EbParams::new(mu, -mu.sqrt().ln()).unwrap()).unwrap();
        assert_abs_diff_eq!(coherent.get(3, 3), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn channel_cm_examples() {
        let eb = EbParams::new(3.0, -0.3).unwrap();
        let id = ChannelParams::symmetric(1.0, 0.0).unwrap();
        assert!(
            asym_channel_cm(eb, &id)
                .unwrap()
                .max_abs_diff(&asym_input_cm(eb).unwrap())
                < 1e-14
        );

        let (t, xi) = (0.42, 0.03);
        let sym = asym_channel_cm(eb, &ChannelParams::symmetric(t, xi).unwrap()).unwrap();
        let (mu, r) = (eb.mu, eb.r);
        let m2: f64 = mu * mu - 1.0;
        assert_abs_diff_eq!(sym.get(0, 2), (-r).exp() * (t * m2).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(sym.get(1, 3), -r.exp() * (t * m2).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            sym.get(2, 2),
            t * ((-2.0 * r).exp() * mu + xi) + 1.0 - t,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            sym.get(3, 3),
            t * ((2.0 * r).exp() * mu + xi) + 1.0 - t,
            epsilon = 1e-14
        );

        let conditional = condition_homodyne(&sym, 1, Quadrature::X).unwrap();
        let vx = t * ((-2.0 * r).exp() * mu + xi) + 1.0 - t;
        assert_abs_diff_eq!(
            conditional.get(0, 0),
            mu - t * (-2.0 * r).exp() * m2 / vx,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(conditional.get(1, 1), mu, epsilon = 1e-14);
    }

    #[test]
    fn zero_leakage_conditions() {
        assert_eq!(zero_leakage_asym(1.0).unwrap(), 0.0);
        assert_eq!(zero_leakage_asym(0.5).unwrap(), 0.5);
        assert_abs_diff_eq!(zero_leakage_asym(0.2).unwrap(), 0.8, epsilon = 1e-15);
        assert!(zero_leakage_asym(1.2).is_err());

        assert_eq!(zero_leakage_heralding(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(zero_leakage_heralding(1e-9).unwrap(), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(zero_leakage_heralding(0.2821).unwrap(), 0.3, epsilon = 5e-5);
        assert!(zero_leakage_heralding(2.0).is_err());
        assert!(zero_leakage_heralding(0.0).is_err());
    }

    #[test]
    fn zero_leakage_inverse() {
        let (s, a) = zero_leakage_heralding_inverse(0.3).unwrap();
        assert_abs_diff_eq!(s, 0.2821, epsilon = 5e-5);
        assert_abs_diff_eq!(a, 1.4179, epsilon = 5e-5);
        assert!((zero_leakage_heralding(s).unwrap() - 0.3).abs() < 1e-10);
        assert!((zero_leakage_heralding(a).unwrap() - 0.3).abs() < 1e-10);

        let (s, a) = zero_leakage_heralding_inverse(0.0).unwrap();
        assert_eq!((s, a), (1.0, 1.0));

        assert!(zero_leakage_heralding_inverse(-0.1).is_err());
        assert!(zero_leakage_heralding_inverse(0.5).is_err());
    }

    #[test]
    fn heralding_trivial_mu() {
        let eb = EbParams::new(1.0, 0.0).unwrap();
        let (t, xi) = (0.3, 0.2);
        let expected = CovarianceMatrix::direct_sum(&[
            &CovarianceMatrix::vacuum(2),
            &CovarianceMatrix::single_mode(1.0 + t * xi, 1.0 + t * xi),
        ]);
        let closed = heralding_cm_closed_form(eb, t, xi).unwrap();
        let pipeline = heralding_cm_pipeline(eb, t, xi).unwrap();
        assert!(closed.max_abs_diff(&expected) < 1e-14);
        assert!(pipeline.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn heralding_b1_is_shot_noise_at_zero_leakage() {
        let (v_sqz, _) = zero_leakage_heralding_inverse(0.3).unwrap();
        let eb = pm_to_eb(PmParams::new(0.3, v_sqz).unwrap()).unwrap();
        assert_abs_diff_eq!(eb.mu, (2.0 * eb.r).cosh(), epsilon = 1e-12);
        let closed = heralding_cm_closed_form(eb, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(closed.get(4, 4), 1.0, epsilon = 1e-12);
        for t in [0.1, 0.5, 0.9] {
            let bob = heralded_bob_cm(eb, t, 0.0).unwrap();
            assert_abs_diff_eq!(bob.get(0, 0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn heralding_pipeline_matches_closed_form() {
        for &(mu, r, t, xi) in &[
            (2.0, 0.3, 0.5, 0.01),
            (7.5, -0.8, 0.13, 0.2),
            (1.3, 1.2, 0.99, 0.0),
        ] {
            let eb = EbParams::new(mu, r).unwrap();
            let closed = heralding_cm_closed_form(eb, t, xi).unwrap();
            let pipeline = heralding_cm_pipeline(eb, t, xi).unwrap();
            assert!(closed.max_abs_diff(&pipeline) < 1e-10, "{mu} {r} {t} {xi}");
        }
    }

    #[test]
    fn heralding_source_bob_is_symmetric() {
        let eb = EbParams::new(3.0, 0.6).unwrap();
        let src = heralding_source_cm(eb).unwrap();
        let bob = partial_state(&src, &[1]).unwrap();
        let v = 3.0 * (1.2f64).cosh();
        assert!(bob.max_abs_diff(&CovarianceMatrix::single_mode(v, v)) < 1e-12);
    }

    #[test]
    fn heralded_bob_matches_block() {
        let eb = EbParams::new(2.7, 0.35).unwrap();
        let closed = heralding_cm_closed_form(eb, 0.6, 0.04).unwrap();
        let block = partial_state(&closed, &[2]).unwrap();
        assert!(block.max_abs_diff(&heralded_bob_cm(eb, 0.6, 0.04).unwrap()) < 1e-12);
        let pipeline = heralding_cm_pipeline(eb, 0.6, 0.04).unwrap();
        assert!(partial_state(&pipeline, &[2]).unwrap().max_abs_diff(&block) < 1e-10);
    }

    #[test]
    fn comparison_cm_examples() {
        let vac = comparison_cm(ProtocolKind::SqueezedHomodyne, 1.0, 0.4, 0.1).unwrap();
        let expected = thermal_loss_channel(
            &CovarianceMatrix::vacuum(2),
            1,
            &ChannelParams::symmetric(0.4, 0.1).unwrap(),
        )
        .unwrap();
        assert!(vac.max_abs_diff(&expected) < 1e-15);

        let ideal = comparison_cm(ProtocolKind::CoherentHeterodyne, 5.0, 1.0, 0.0).unwrap();
        assert!(ideal.max_abs_diff(&two_mode_squeezed(5.0).unwrap()) < 1e-14);

        let cm = comparison_cm(ProtocolKind::SqueezedHomodyne, 12.0, 0.3, 0.05).unwrap();
        let built = thermal_loss_channel(
            &two_mode_squeezed(12.0).unwrap(),
            1,
            &ChannelParams::symmetric(0.3, 0.05).unwrap(),
        )
        .unwrap();
        assert!(cm.max_abs_diff(&built) < 1e-12);

        assert!(comparison_cm(ProtocolKind::Heralding, 2.0, 0.5, 0.0).is_err());
        assert!(comparison_cm(ProtocolKind::SqueezedHomodyne, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn builders_are_physical() {
        let eb = EbParams::new(5.0, -0.9).unwrap();
        let ch = ChannelParams::new(0.3, 0.8, 0.1, 0.3).unwrap();
        assert!(is_physical(&asym_channel_cm(eb, &ch).unwrap(), 1e-8));
        assert!(is_physical(
            &heralding_cm_closed_form(eb, 0.3, 0.1).unwrap(),
            1e-8
        ));
        let nu = symplectic_eigenvalues(&heralding_cm_closed_form(eb, 1.0, 0.0).unwrap()).unwrap();
        assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-9), "{nu:?}");
    }

    #[test]
    fn db_conversion() {
        assert_abs_diff_eq!(db_to_variance(10.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(variance_to_db(0.1), 10.0, epsilon = 1e-12);
    }
}
