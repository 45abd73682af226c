//! Shared domain types: crystal gains, loss elements, detector efficiencies
//! and the interferometer configuration built from them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_range, NliError, Result};

/// Amplification of one nonlinear crystal.
///
/// `v` is the mean photon number an unseeded crystal emits per mode,
/// `v = sinh^2 r`, and `u = cosh^2 r = 1 + v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainSetting {
    squeeze_r: f64,
    v: f64,
    u: f64,
    phase_u: f64,
    phase_v: f64,
}

impl GainSetting {
    pub fn from_v(v: f64) -> Result<Self> {
        let v = check_range("V", v, 0.0, f64::INFINITY, "V >= 0")?;
        Ok(Self {
            squeeze_r: v.sqrt().asinh(),
            v,
            u: 1.0 + v,
            phase_u: 0.0,
            phase_v: 0.0,
        })
    }

    pub fn from_squeeze(r: f64) -> Result<Self> {
        let r = check_range("squeeze_r", r, 0.0, f64::INFINITY, "r >= 0")?;
        let s = r.sinh();
        Ok(Self {
            squeeze_r: r,
            v: s * s,
            u: 1.0 + s * s,
            phase_u: 0.0,
            phase_v: 0.0,
        })
    }

    pub fn with_phases(mut self, phase_u: f64, phase_v: f64) -> Self {
        self.phase_u = phase_u;
        self.phase_v = phase_v;
        self
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn squeeze_r(&self) -> f64 {
        self.squeeze_r
    }

    pub fn phase_u(&self) -> f64 {
        self.phase_u
    }

    pub fn phase_v(&self) -> f64 {
        self.phase_v
    }

    /// Complex coefficient `u` of the Bogoliubov transformation, `|u| = cosh r`.
    pub fn u_coeff(&self) -> Complex64 {
        Complex64::from_polar(self.u.sqrt(), self.phase_u)
    }

    /// Complex coefficient `v`, `|v| = sinh r`.
    pub fn v_coeff(&self) -> Complex64 {
        Complex64::from_polar(self.v.sqrt(), self.phase_v)
    }
}

pub fn gain_from_v(v: f64) -> Result<GainSetting> {
    GainSetting::from_v(v)
}

/// Beam-splitter loss element with field transmittance `t`.
///
/// The reflection amplitude is taken real and non-negative, `r = sqrt(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossChannel {
    #[serde(serialize_with = "serialize_complex")]
    t: Complex64,
    transmittance: f64,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut tup = s.serialize_tuple(2)?;
    tup.serialize_element(&z.re)?;
    tup.serialize_element(&z.im)?;
    tup.end()
}

impl LossChannel {
    pub fn lossless() -> Self {
        Self {
            t: Complex64::new(1.0, 0.0),
            transmittance: 1.0,
        }
    }

    pub fn from_transmittance(t: f64) -> Result<Self> {
        let t = check_range("T", t, 0.0, 1.0, "0 <= T <= 1")?;
        Ok(Self {
            t: Complex64::new(t.sqrt(), 0.0),
            transmittance: t,
        })
    }

    pub fn from_amplitude(t: Complex64) -> Result<Self> {
        let transmittance = check_range("|t|^2", t.norm_sqr(), 0.0, 1.0, "|t| <= 1")?;
        Ok(Self { t, transmittance })
    }

    /// Same intensity transmittance, field phase replaced by `phase`.
    pub fn with_phase(self, phase: f64) -> Self {
        Self {
            t: Complex64::from_polar(self.transmittance.sqrt(), phase),
            transmittance: self.transmittance,
        }
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    pub fn r(&self) -> Complex64 {
        Complex64::new(self.reflectivity().sqrt(), 0.0)
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn reflectivity(&self) -> f64 {
        1.0 - self.transmittance
    }
}

/// Transmittance of the beam splitter in front of a detector, `0 < eta <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct DetectionEfficiency(f64);

impl DetectionEfficiency {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
            Ok(Self(eta))
        } else {
            Err(NliError::Domain {
                name: "eta",
                value: eta,
                expected: "0 < eta <= 1",
            })
        }
    }

    pub fn perfect() -> Self {
        Self(1.0)
    }

    pub fn eta(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Flavor {
    Degenerate,
    NondegeneratePort1,
    NondegeneratePort2,
    NondegenerateSum,
}

impl Flavor {
    pub fn is_degenerate(self) -> bool {
        matches!(self, Flavor::Degenerate)
    }

    /// Observed port of a nondegenerate flavor.
    pub fn port(self) -> Option<Port> {
        match self {
            Flavor::Degenerate => None,
            Flavor::NondegeneratePort1 => Some(Port::One),
            Flavor::NondegeneratePort2 => Some(Port::Two),
            Flavor::NondegenerateSum => Some(Port::Sum),
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = NliError;

    /// Accepts `degenerate`, `port1`, `port2` and `sum`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "degenerate" | "d" => Ok(Flavor::Degenerate),
            "port1" | "1" => Ok(Flavor::NondegeneratePort1),
            "port2" | "2" => Ok(Flavor::NondegeneratePort2),
            "sum" | "+" => Ok(Flavor::NondegenerateSum),
            other => Err(NliError::InvalidConfig(format!(
                "unknown flavor `{other}` (expected degenerate, port1, port2 or sum)"
            ))),
        }
    }
}

/// Output of the nondegenerate interferometer that is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Port {
    One,
    Two,
    Sum,
}

impl Port {
    pub fn flavor(self) -> Flavor {
        match self {
            Port::One => Flavor::NondegeneratePort1,
            Port::Two => Flavor::NondegeneratePort2,
            Port::Sum => Flavor::NondegenerateSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InternalLoss {
    Single(LossChannel),
    PerArm(LossChannel, LossChannel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Detection {
    Single(DetectionEfficiency),
    PerPort(DetectionEfficiency, DetectionEfficiency),
}

/// Complete interferometer: source crystal A, internal loss, analyzer
/// crystal B and detection loss, at interference phase `phi`.
///
/// `phi` is the phase entering the closed forms; the phases stored in the
/// gains and loss channels only matter for the operator-level oracles,
/// which realize `phi` through [`NliConfig::realized_arms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NliConfig {
    gain_a: GainSetting,
    gain_b: GainSetting,
    flavor: Flavor,
    internal_loss: InternalLoss,
    detection: Detection,
    phi: f64,
}

impl NliConfig {
    pub fn new(
        flavor: Flavor,
        gain_a: GainSetting,
        gain_b: GainSetting,
        internal_loss: InternalLoss,
        detection: Detection,
        phi: f64,
    ) -> Result<Self> {
        match (flavor, &internal_loss) {
            (Flavor::Degenerate, InternalLoss::Single(_)) => {}
            (Flavor::Degenerate, _) => {
                return Err(NliError::InvalidConfig(
                    "degenerate interferometer takes exactly one internal loss channel".into(),
                ))
            }
            (_, InternalLoss::PerArm(..)) => {}
            (_, _) => {
                return Err(NliError::InvalidConfig(
                    "nondegenerate interferometer takes one internal loss channel per arm".into(),
                ))
            }
        }
        match (flavor, &detection) {
            (Flavor::NondegenerateSum, Detection::PerPort(..)) => {}
            (Flavor::NondegenerateSum, _) => {
                return Err(NliError::InvalidConfig(
                    "sum port takes one detection efficiency per port".into(),
                ))
            }
            (_, Detection::Single(_)) => {}
            (_, _) => {
                return Err(NliError::InvalidConfig(
                    "single-port detection takes exactly one efficiency".into(),
                ))
            }
        }
        if !phi.is_finite() {
            return Err(NliError::Domain {
                name: "phi",
                value: phi,
                expected: "finite phase",
            });
        }
        Ok(Self {
            gain_a,
            gain_b,
            flavor,
            internal_loss,
            detection,
            phi,
        })
    }

    /// Lossless degenerate interferometer with perfect detection at `phi = 0`.
    pub fn degenerate(v_a: f64, v_b: f64) -> Result<Self> {
        Self::new(
            Flavor::Degenerate,
            GainSetting::from_v(v_a)?,
            GainSetting::from_v(v_b)?,
            InternalLoss::Single(LossChannel::lossless()),
            Detection::Single(DetectionEfficiency::perfect()),
            0.0,
        )
    }

    /// Lossless nondegenerate interferometer observed through `port`.
    pub fn nondegenerate(port: Port, v_a: f64, v_b: f64) -> Result<Self> {
        let detection = match port {
            Port::Sum => Detection::PerPort(DetectionEfficiency::perfect(), DetectionEfficiency::perfect()),
            _ => Detection::Single(DetectionEfficiency::perfect()),
        };
        Self::new(
            port.flavor(),
            GainSetting::from_v(v_a)?,
            GainSetting::from_v(v_b)?,
            InternalLoss::PerArm(LossChannel::lossless(), LossChannel::lossless()),
            detection,
            0.0,
        )
    }

    /// Builds a configuration from complex element parameters, deriving the
    /// interference phase from the pump and propagation phases.
    pub fn from_elements(
        flavor: Flavor,
        gain_a: GainSetting,
        gain_b: GainSetting,
        internal_loss: InternalLoss,
        detection: Detection,
    ) -> Result<Self> {
        let phi = match internal_loss {
            InternalLoss::Single(loss) => effective_phase(&gain_a, &gain_b, &loss),
            InternalLoss::PerArm(arm1, arm2) => effective_phase_nondegenerate(&gain_a, &gain_b, &arm1, &arm2),
        };
        Self::new(flavor, gain_a, gain_b, internal_loss, detection, phi)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_gains(mut self, v_a: f64, v_b: f64) -> Result<Self> {
        self.gain_a = GainSetting::from_v(v_a)?;
        self.gain_b = GainSetting::from_v(v_b)?;
        Ok(self)
    }

    pub fn with_gain_settings(mut self, gain_a: GainSetting, gain_b: GainSetting) -> Self {
        self.gain_a = gain_a;
        self.gain_b = gain_b;
        self
    }

    /// Internal transmittance: the single channel of a degenerate
    /// configuration, or both arms of a nondegenerate one.
    pub fn with_internal_transmittance(mut self, t: f64) -> Result<Self> {
        let loss = LossChannel::from_transmittance(t)?;
        self.internal_loss = match self.internal_loss {
            InternalLoss::Single(_) => InternalLoss::Single(loss),
            InternalLoss::PerArm(..) => InternalLoss::PerArm(loss, loss),
        };
        Ok(self)
    }

    /// Internal reflectivity `R = 1 - T`, applied like
    /// [`NliConfig::with_internal_transmittance`].
    pub fn with_internal_reflectivity(self, r: f64) -> Result<Self> {
        let r = check_range("R", r, 0.0, 1.0, "0 <= R <= 1")?;
        self.with_internal_transmittance(1.0 - r)
    }

    pub fn with_arm_transmittances(mut self, t1: f64, t2: f64) -> Result<Self> {
        if self.flavor.is_degenerate() {
            return Err(NliError::WrongFlavor {
                expected: "nondegenerate",
            });
        }
        self.internal_loss = InternalLoss::PerArm(
            LossChannel::from_transmittance(t1)?,
            LossChannel::from_transmittance(t2)?,
        );
        Ok(self)
    }

    /// Same efficiency on every detector.
    pub fn with_detection(mut self, eta: f64) -> Result<Self> {
        let eta = DetectionEfficiency::new(eta)?;
        self.detection = match self.detection {
            Detection::Single(_) => Detection::Single(eta),
            Detection::PerPort(..) => Detection::PerPort(eta, eta),
        };
        Ok(self)
    }

    pub fn with_port_efficiencies(mut self, eta1: f64, eta2: f64) -> Result<Self> {
        if self.flavor != Flavor::NondegenerateSum {
            return Err(NliError::WrongFlavor {
                expected: "nondegenerate sum-port",
            });
        }
        self.detection = Detection::PerPort(DetectionEfficiency::new(eta1)?, DetectionEfficiency::new(eta2)?);
        Ok(self)
    }

    /// Same physical interferometer observed as `flavor`. Switching between
    /// degenerate and nondegenerate keeps the (first) transmittance.
    pub fn with_flavor(self, flavor: Flavor) -> Result<Self> {
        let internal_loss = match (flavor.is_degenerate(), self.internal_loss) {
            (true, InternalLoss::PerArm(arm, _)) => InternalLoss::Single(arm),
            (false, InternalLoss::Single(loss)) => InternalLoss::PerArm(loss, loss),
            (_, keep) => keep,
        };
        let (eta1, eta2) = self.port_efficiencies();
        let detection = match flavor {
            Flavor::NondegenerateSum => Detection::PerPort(DetectionEfficiency(eta1), DetectionEfficiency(eta2)),
            Flavor::NondegeneratePort2 => Detection::Single(DetectionEfficiency(eta2)),
            _ => Detection::Single(DetectionEfficiency(eta1)),
        };
        Self::new(flavor, self.gain_a, self.gain_b, internal_loss, detection, self.phi)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn gain_a(&self) -> &GainSetting {
        &self.gain_a
    }

    pub fn gain_b(&self) -> &GainSetting {
        &self.gain_b
    }

    pub fn internal_loss(&self) -> &InternalLoss {
        &self.internal_loss
    }

    pub fn detection(&self) -> &Detection {
        &self.detection
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn v_a(&self) -> f64 {
        self.gain_a.v
    }

    pub fn v_b(&self) -> f64 {
        self.gain_b.v
    }

    pub fn u_a(&self) -> f64 {
        self.gain_a.u
    }

    pub fn u_b(&self) -> f64 {
        self.gain_b.u
    }

    /// Intensity transmittances of the two arms; a degenerate
    /// configuration reports its single channel twice.
    pub fn arm_transmittances(&self) -> (f64, f64) {
        match self.internal_loss {
            InternalLoss::Single(loss) => (loss.transmittance, loss.transmittance),
            InternalLoss::PerArm(a, b) => (a.transmittance, b.transmittance),
        }
    }

    /// Internal transmittance `T_d` (first arm for nondegenerate flavors).
    pub fn transmittance(&self) -> f64 {
        self.arm_transmittances().0
    }

    pub fn reflectivity(&self) -> f64 {
        match self.internal_loss {
            InternalLoss::Single(loss) | InternalLoss::PerArm(loss, _) => loss.reflectivity(),
        }
    }

    /// Detection efficiency per port; single-detector flavors report the
    /// same efficiency twice.
    pub fn port_efficiencies(&self) -> (f64, f64) {
        match self.detection {
            Detection::Single(eta) => (eta.0, eta.0),
            Detection::PerPort(a, b) => (a.0, b.0),
        }
    }

    /// Efficiency of the single detector (first port for the sum flavor).
    pub fn eta(&self) -> f64 {
        self.port_efficiencies().0
    }

    /// Photons from crystal A that survive the internal loss, `V_t = T_d V_A`.
    pub fn v_t(&self) -> f64 {
        self.transmittance() * self.gain_a.v
    }

    pub fn u_t(&self) -> f64 {
        1.0 + self.v_t()
    }

    pub fn v_min(&self) -> f64 {
        self.gain_a.v.min(self.gain_b.v)
    }

    pub fn v_max(&self) -> f64 {
        self.gain_a.v.max(self.gain_b.v)
    }

    pub fn u_min(&self) -> f64 {
        1.0 + self.v_min()
    }

    pub fn u_max(&self) -> f64 {
        1.0 + self.v_max()
    }

    /// Loss channels carrying the propagation phase that, together with the
    /// crystal phases, realizes `phi`. Degenerate configurations return their
    /// channel twice; nondegenerate ones split the phase evenly over the arms.
    pub fn realized_arms(&self) -> (LossChannel, LossChannel) {
        let a = &self.gain_a;
        let b = &self.gain_b;
        let pump = a.phase_u + a.phase_v + b.phase_u - b.phase_v;
        match self.internal_loss {
            InternalLoss::Single(loss) => {
                let loss = loss.with_phase(0.5 * (self.phi - PI - pump));
                (loss, loss)
            }
            InternalLoss::PerArm(arm1, arm2) => {
                let half = 0.5 * (self.phi - PI - pump);
                (arm1.with_phase(half), arm2.with_phase(half))
            }
        }
    }
}

/// Interference phase of the degenerate interferometer,
/// `arg(u_A v_A u_B conj(v_B) t^2) + pi`, folded into `[0, 2 pi)`.
pub fn effective_phase(gain_a: &GainSetting, gain_b: &GainSetting, loss: &LossChannel) -> f64 {
    let z = gain_a.u_coeff() * gain_a.v_coeff() * gain_b.u_coeff() * gain_b.v_coeff().conj() * loss.t * loss.t;
    fold_phase(phase_of(z, gain_a, gain_b, 2.0 * loss.t.arg()) + PI)
}

/// Interference phase of the nondegenerate interferometer,
/// `arg(u_A u_B v_A conj(v_B) t_1 t_2) + pi`, folded into `[0, 2 pi)`.
pub fn effective_phase_nondegenerate(
    gain_a: &GainSetting,
    gain_b: &GainSetting,
    arm1: &LossChannel,
    arm2: &LossChannel,
) -> f64 {
    let z = gain_a.u_coeff() * gain_b.u_coeff() * gain_a.v_coeff() * gain_b.v_coeff().conj() * arm1.t * arm2.t;
    fold_phase(phase_of(z, gain_a, gain_b, arm1.t.arg() + arm2.t.arg()) + PI)
}

// The product vanishes when a crystal is off or the arm is opaque; its
// argument is then the sum of the factor phases, which keeps the phase
// well defined for the operator-level oracles.
fn phase_of(z: Complex64, a: &GainSetting, b: &GainSetting, propagation: f64) -> f64 {
    if z.norm() > 0.0 {
        z.arg()
    } else {
        a.phase_u + a.phase_v + b.phase_u - b.phase_v + propagation
    }
}

pub fn fold_phase(phi: f64) -> f64 {
    let folded = phi.rem_euclid(TAU);
    if folded >= TAU {
        0.0
    } else {
        folded
    }
}

/// Mean and variance of a photon count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonStatistics {
    pub mean_n: f64,
    pub variance: f64,
    pub inverse_fano: f64,
}

impl PhotonStatistics {
    /// The inverse Fano factor `mean / variance` is set to 0 when the
    /// variance vanishes.
    pub fn new(mean_n: f64, variance: f64) -> Self {
        let inverse_fano = if variance > 0.0 { mean_n / variance } else { 0.0 };
        Self {
            mean_n,
            variance,
            inverse_fano,
        }
    }
}

/// Minimal phase uncertainty of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub phi_min: f64,
    pub delta_phi_sq: f64,
    pub delta_phi_sq_detected: f64,
    pub n_at_min: f64,
    pub limiting_v: f64,
}
