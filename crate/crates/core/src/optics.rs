//! Circuit elements of the swapping setup as [`ModeTransform`]s.
//!
//! Matrices act on creation operators (`a†_in -> Σ U[in, out] b†_out`), so a
//! Jones matrix `J` (acting on field amplitudes) enters transposed.
//! Path-level elements are declared on wavepacket 0; use
//! [`FockState::apply_transform_all_wavepackets`](crate::fock::FockState::apply_transform_all_wavepackets)
//! to act on every wavepacket of a path.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, ModeTransform, Path, Pol};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Phase convention for two-port beam splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsConvention {
    /// `[[t, i r], [i r, t]]`
    #[default]
    Symmetric,
    /// `[[t, r], [r, -t]]`
    RealSign,
}

fn bs_block(transmission: f64, convention: BsConvention) -> Result<[[Complex64; 2]; 2]> {
    if !(0.0..=1.0).contains(&transmission) {
        return Err(Error::param(format!("beam splitter transmission {transmission} outside [0, 1]")));
    }
    let t = transmission.sqrt();
    let r = (1.0 - transmission).sqrt();
    Ok(match convention {
        BsConvention::Symmetric => [[c(t, 0.0), c(0.0, r)], [c(0.0, r), c(t, 0.0)]],
        BsConvention::RealSign => [[c(t, 0.0), c(r, 0.0)], [c(r, 0.0), c(-t, 0.0)]],
    })
}

/// Two-mode beam splitter acting in place on `mode1`, `mode2`, with power
/// transmission `transmission`.
pub fn beam_splitter(mode1: ModeId, mode2: ModeId, transmission: f64) -> Result<ModeTransform> {
    beam_splitter_with(mode1, mode2, transmission, BsConvention::Symmetric)
}

pub fn beam_splitter_with(
    mode1: ModeId,
    mode2: ModeId,
    transmission: f64,
    convention: BsConvention,
) -> Result<ModeTransform> {
    if mode1 == mode2 {
        return Err(Error::DuplicateMode(mode1));
    }
    let b = bs_block(transmission, convention)?;
    ModeTransform::square(vec![mode1, mode2], DMatrix::from_row_slice(2, 2, &[b[0][0], b[0][1], b[1][0], b[1][1]]))
}

/// Polarization-independent beam splitter from paths `(in1, in2)` onto
/// `(out1, out2)`; `out1` is the transmitted port of `in1`.
pub fn beam_splitter_paths(
    in1: Path,
    in2: Path,
    out1: Path,
    out2: Path,
    transmission: f64,
    convention: BsConvention,
) -> Result<ModeTransform> {
    distinct(&[in1, in2])?;
    distinct(&[out1, out2])?;
    let b = bs_block(transmission, convention)?;
    let parts = Pol::BOTH
        .iter()
        .map(|&pol| {
            ModeTransform::new(
                vec![ModeId::new(in1, pol), ModeId::new(in2, pol)],
                vec![ModeId::new(out1, pol), ModeId::new(out2, pol)],
                DMatrix::from_row_slice(2, 2, &[b[0][0], b[0][1], b[1][0], b[1][1]]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ModeTransform::direct_sum(&parts)
}

/// Non-ideal behaviour of a polarizing beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbsImperfection {
    /// Power extinction ratio (dB) for H light; `f64::INFINITY` for none.
    pub extinction_h_db: f64,
    /// Power extinction ratio (dB) for V light.
    pub extinction_v_db: f64,
    /// Rotation of the PBS axis relative to the input basis (radians).
    pub misalignment_rad: f64,
}

impl Default for PbsImperfection {
    fn default() -> Self {
        PbsImperfection::IDEAL
    }
}

impl PbsImperfection {
    pub const IDEAL: PbsImperfection =
        PbsImperfection { extinction_h_db: f64::INFINITY, extinction_v_db: f64::INFINITY, misalignment_rad: 0.0 };

    pub fn new(extinction_h_db: f64, extinction_v_db: f64, misalignment_rad: f64) -> Result<Self> {
        let imp = PbsImperfection { extinction_h_db, extinction_v_db, misalignment_rad };
        imp.validate()?;
        Ok(imp)
    }

    /// Same extinction ratio for both polarizations, no misalignment.
    pub fn leaky(extinction_db: f64) -> Result<Self> {
        PbsImperfection::new(extinction_db, extinction_db, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for er in [self.extinction_h_db, self.extinction_v_db] {
            if er.is_nan() || er < 0.0 {
                return Err(Error::param(format!("extinction ratio {er} dB must be >= 0")));
            }
        }
        if !(self.misalignment_rad.abs() < std::f64::consts::FRAC_PI_4) {
            return Err(Error::param(format!("misalignment {} rad must satisfy |phi| < pi/4", self.misalignment_rad)));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.leakage_amplitude(Pol::H) == 0.0 && self.leakage_amplitude(Pol::V) == 0.0 && self.misalignment_rad == 0.0
    }

    /// Amplitude routed to the wrong port, `10^(-ER/20)`.
    pub fn leakage_amplitude(&self, pol: Pol) -> f64 {
        let er = match pol {
            Pol::H => self.extinction_h_db,
            Pol::V => self.extinction_v_db,
        };
        if er.is_infinite() {
            0.0
        } else {
            10f64.powf(-er / 20.0)
        }
    }

    /// Total mixing angle for `pol`: leakage angle plus axis misalignment.
    fn mixing_angle(&self, pol: Pol) -> f64 {
        self.leakage_amplitude(pol).asin() + self.misalignment_rad
    }
}

/// Ideal PBS: H from `in1` and V from `in2` exit at `out3`; V from `in1` and
/// H from `in2` exit at `out4`.
pub fn pbs_ideal(in1: Path, in2: Path, out3: Path, out4: Path) -> Result<ModeTransform> {
    pbs_imperfect(in1, in2, out3, out4, PbsImperfection::IDEAL)
}

/// PBS with finite extinction and axis misalignment.
///
/// Leakage keeps the polarization label and moves amplitude `ε = 10^(-ER/20)`
/// to the other output, with `√(1-ε²)` left on the correct one; V leaking
/// into the transmitted port picks up a minus sign. Misalignment by `φ` rotates
/// the input basis before routing, which adds `φ` to the leakage angle
/// `asin ε`. For `ε = 0`: `h†₁ -> cos φ h†₃ + sin φ h†₄` and
/// `v†₁ -> cos φ v†₄ - sin φ v†₃`.
pub fn pbs_imperfect(in1: Path, in2: Path, out3: Path, out4: Path, imp: PbsImperfection) -> Result<ModeTransform> {
    distinct(&[in1, in2, out3, out4])?;
    imp.validate()?;
    let (ch, sh) = {
        let a = imp.mixing_angle(Pol::H);
        (a.cos(), a.sin())
    };
    let (cv, sv) = {
        let a = imp.mixing_angle(Pol::V);
        (a.cos(), a.sin())
    };
    let inputs = vec![ModeId::h(in1), ModeId::v(in1), ModeId::h(in2), ModeId::v(in2)];
    let outputs = vec![ModeId::h(out3), ModeId::v(out3), ModeId::h(out4), ModeId::v(out4)];
    #[rustfmt::skip]
    let u = DMatrix::from_row_slice(4, 4, &[
        // out:   H3           V3            H4           V4
        c(ch, 0.0), c(0.0, 0.0), c(sh, 0.0), c(0.0, 0.0),   // H1
        c(0.0, 0.0), c(-sv, 0.0), c(0.0, 0.0), c(cv, 0.0),  // V1
        c(-sh, 0.0), c(0.0, 0.0), c(ch, 0.0), c(0.0, 0.0),  // H2
        c(0.0, 0.0), c(cv, 0.0), c(0.0, 0.0), c(sv, 0.0),   // V2
    ]);
    ModeTransform::new(inputs, outputs, u)
}

/// Element with Jones matrix `jones` (acting on `(E_H, E_V)`) on one path.
pub fn jones_element(path: Path, jones: Matrix2<Complex64>) -> Result<ModeTransform> {
    let u = jones.transpose();
    ModeTransform::square(
        vec![ModeId::h(path), ModeId::v(path)],
        DMatrix::from_row_slice(2, 2, &[u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]]),
    )
}

/// Half-wave plate with its fast axis at `angle_rad` from H:
/// `J = [[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]]`.
pub fn hwp(path: Path, angle_rad: f64) -> Result<ModeTransform> {
    finite(angle_rad)?;
    let (s, co) = (2.0 * angle_rad).sin_cos();
    jones_element(path, Matrix2::new(c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0)))
}

/// Quarter-wave plate with its fast axis at `angle_rad` from H.
///
/// `J = R(-θ) diag(1, i) R(θ)`, retardance π/2 on the slow axis, global phase
/// dropped; `qwp(θ)⁴` is the identity.
pub fn qwp(path: Path, angle_rad: f64) -> Result<ModeTransform> {
    finite(angle_rad)?;
    let (s, co) = angle_rad.sin_cos();
    let i = c(0.0, 1.0);
    let one = c(1.0, 0.0);
    let off = (one - i) * s * co;
    jones_element(path, Matrix2::new(one * co * co + i * s * s, off, off, one * s * s + i * co * co))
}

/// `a† -> e^{iφ} a†` on one mode.
pub fn phase_shift(mode: ModeId, phi: f64) -> Result<ModeTransform> {
    finite(phi)?;
    ModeTransform::square(vec![mode], DMatrix::from_element(1, 1, Complex64::from_polar(1.0, phi)))
}

/// The same phase on both polarizations of a path.
pub fn path_phase(path: Path, phi: f64) -> Result<ModeTransform> {
    finite(phi)?;
    let p = Complex64::from_polar(1.0, phi);
    ModeTransform::square(
        vec![ModeId::h(path), ModeId::v(path)],
        DMatrix::from_row_slice(2, 2, &[p, c(0.0, 0.0), c(0.0, 0.0), p]),
    )
}

/// Loss as a beam splitter onto the environment mode `Loss(sink)`:
/// `a† -> √η a† + √(1-η) x†`.
pub fn loss_channel(mode: ModeId, eta: f64, sink: u16) -> Result<ModeTransform> {
    check_eta(eta)?;
    let loss = ModeId { path: Path::Loss(sink), ..mode };
    ModeTransform::new(
        vec![mode],
        vec![mode, loss],
        DMatrix::from_row_slice(1, 2, &[c(eta.sqrt(), 0.0), c((1.0 - eta).sqrt(), 0.0)]),
    )
}

/// Polarization-independent loss on a path, both polarizations going to `Loss(sink)`.
pub fn path_loss(path: Path, eta: f64, sink: u16) -> Result<ModeTransform> {
    ModeTransform::direct_sum(&[loss_channel(ModeId::h(path), eta, sink)?, loss_channel(ModeId::v(path), eta, sink)?])
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(format!("transmission {eta} outside [0, 1]")));
    }
    Ok(())
}

fn finite(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::param(format!("angle {x} is not finite")));
    }
    Ok(())
}

fn distinct(paths: &[Path]) -> Result<()> {
    for (i, p) in paths.iter().enumerate() {
        if paths[..i].contains(p) {
            return Err(Error::param(format!("path {p} used twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockState, ModeRegister};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn matrix_distance(a: &ModeTransform, b: &ModeTransform) -> f64 {
        assert_eq!(a.inputs(), b.inputs());
        assert_eq!(a.outputs(), b.outputs());
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn photon(reg_paths: &[Path], mode: ModeId) -> FockState {
        FockState::vacuum(ModeRegister::from_paths(reg_paths).unwrap()).unwrap().apply_creation(mode).unwrap()
    }

    #[test]
    fn full_transmission_is_identity() {
        let (m1, m2) = (ModeId::h(Path::Port(1)), ModeId::h(Path::Port(2)));
        let t = beam_splitter(m1, m2, 1.0).unwrap();
        assert_eq!(t, ModeTransform::identity(vec![m1, m2]));
        assert!(beam_splitter(m1, m2, 1.5).is_err());
        assert!(beam_splitter(m1, m1, 0.5).is_err());
    }

    #[test]
    fn balanced_splitter_hom_suppression() {
        let (m1, m2) = (ModeId::h(Path::Port(1)), ModeId::h(Path::Port(2)));
        let s = FockState::vacuum(ModeRegister::new([m1, m2]).unwrap())
            .unwrap()
            .apply_creation(m1)
            .unwrap()
            .apply_creation(m2)
            .unwrap();
        let out = s.apply_transform(&beam_splitter(m1, m2, 0.5).unwrap()).unwrap();
        assert_eq!(out.amplitude(&[1, 1]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_balanced_splitters_swap_ports() {
        // Analytic oracle: the product is a permutation times a phase.
        let (m1, m2) = (ModeId::h(Path::Port(1)), ModeId::h(Path::Port(2)));
        let bs = beam_splitter(m1, m2, 0.5).unwrap();
        let mz = bs.then(&bs).unwrap();
        let u = mz.matrix();
        assert!(u[(0, 0)].norm() < 1e-15 && u[(1, 1)].norm() < 1e-15);
        assert!(close(u[(0, 1)], Complex64::new(0.0, 1.0)) && close(u[(1, 0)], Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn ideal_pbs_routes_by_polarization() {
        let t = pbs_ideal(Path::Port(1), Path::Port(2), Path::Port(3), Path::Port(4)).unwrap();
        let (g, d) = (0.6, 0.8);
        // (γ h₁ + δ v₁)|0⟩ -> (γ h₃ + δ v₄)|0⟩
        assert!(close(t.coefficient(&ModeId::h(Path::Port(1)), &ModeId::h(Path::Port(3))) * g, Complex64::new(g, 0.0)));
        assert!(close(t.coefficient(&ModeId::v(Path::Port(1)), &ModeId::v(Path::Port(4))) * d, Complex64::new(d, 0.0)));
        assert_eq!(t.coefficient(&ModeId::h(Path::Port(1)), &ModeId::h(Path::Port(4))), Complex64::new(0.0, 0.0));
        // Mirror port: H in port 2 leaves through port 4.
        assert!(close(t.coefficient(&ModeId::h(Path::Port(2)), &ModeId::h(Path::Port(4))), Complex64::new(1.0, 0.0)));
        assert!(pbs_ideal(Path::A, Path::A, Path::C, Path::Alice).is_err());
    }

    #[test]
    fn pbs_limit_cases() {
        let ideal = pbs_ideal(Path::A, Path::APrime, Path::C, Path::Alice).unwrap();
        let limit = pbs_imperfect(Path::A, Path::APrime, Path::C, Path::Alice, PbsImperfection::new(f64::INFINITY, f64::INFINITY, 0.0).unwrap())
            .unwrap();
        assert!(matrix_distance(&ideal, &limit) < 1e-12);
        let mut prev = f64::INFINITY;
        for er in [20.0, 40.0, 60.0, 80.0] {
            let t = pbs_imperfect(Path::A, Path::APrime, Path::C, Path::Alice, PbsImperfection::leaky(er).unwrap()).unwrap();
            let dist = matrix_distance(&ideal, &t);
            assert!(dist < prev);
            prev = dist;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn misaligned_pbs_matches_rotation_form() {
        let phi = 0.02;
        let t = pbs_imperfect(
            Path::Port(1),
            Path::Port(2),
            Path::Port(3),
            Path::Port(4),
            PbsImperfection::new(f64::INFINITY, f64::INFINITY, phi).unwrap(),
        )
        .unwrap();
        let (g, d) = (0.6, 0.8);
        let s = photon(&[Path::Port(1), Path::Port(2)], ModeId::h(Path::Port(1)))
            .scaled(Complex64::new(g, 0.0))
            .add(&photon(&[Path::Port(1), Path::Port(2)], ModeId::v(Path::Port(1))).scaled(Complex64::new(d, 0.0)))
            .unwrap();
        let out = s.apply_transform(&t).unwrap();
        let amp = |m: ModeId| out.amplitude_of(&[(m, 1)]).unwrap();
        assert!(close(amp(ModeId::h(Path::Port(3))), Complex64::new(g * phi.cos(), 0.0)));
        assert!(close(amp(ModeId::h(Path::Port(4))), Complex64::new(g * phi.sin(), 0.0)));
        assert!(close(amp(ModeId::v(Path::Port(4))), Complex64::new(d * phi.cos(), 0.0)));
        assert!(close(amp(ModeId::v(Path::Port(3))), Complex64::new(-d * phi.sin(), 0.0)));
    }

    #[test]
    fn thirty_db_leakage_amplitudes() {
        let imp = PbsImperfection::leaky(30.0).unwrap();
        let eps = imp.leakage_amplitude(Pol::H);
        assert_abs_diff_eq!(eps, 10f64.powf(-1.5), epsilon = 1e-15);
        assert_abs_diff_eq!(eps * eps, 1e-3, epsilon = 1e-15);
        let t = pbs_imperfect(Path::Port(1), Path::Port(2), Path::Port(3), Path::Port(4), imp).unwrap();
        let main = t.coefficient(&ModeId::h(Path::Port(1)), &ModeId::h(Path::Port(3)));
        assert_abs_diff_eq!(main.re, (1.0 - 1e-3f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.coefficient(&ModeId::h(Path::Port(1)), &ModeId::h(Path::Port(4))).re, eps, epsilon = 1e-15);
    }

    #[test]
    fn imperfection_validation() {
        assert!(PbsImperfection::new(-1.0, 20.0, 0.0).is_err());
        assert!(PbsImperfection::new(20.0, 20.0, FRAC_PI_4).is_err());
        assert!(PbsImperfection::new(20.0, 20.0, 0.03).is_ok());
    }

    #[test]
    fn hwp_at_22_5_removes_same_path_coincidence() {
        let p = Path::C;
        let s = photon(&[p], ModeId::h(p)).apply_creation(ModeId::v(p)).unwrap();
        let out = s.apply_transform(&hwp(p, FRAC_PI_8).unwrap()).unwrap();
        // h†v† -> (h†² - v†²)/2, i.e. amplitudes ±√2/2 on |2,0⟩ and |0,2⟩.
        assert!(out.amplitude(&[1, 1]).norm() < 1e-15);
        assert!(close(out.amplitude(&[2, 0]), Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.amplitude(&[0, 2]), Complex64::new(-FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn hwp_at_zero_flips_v_sign() {
        let t = hwp(Path::A, 0.0).unwrap();
        assert!(close(t.coefficient(&ModeId::h(Path::A), &ModeId::h(Path::A)), Complex64::new(1.0, 0.0)));
        assert!(close(t.coefficient(&ModeId::v(Path::A), &ModeId::v(Path::A)), Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn wave_plate_powers() {
        for k in 0..12 {
            let th = -PI + k as f64 * 0.61;
            let h = hwp(Path::A, th).unwrap();
            assert!(matrix_distance(&h.then(&h).unwrap(), &ModeTransform::identity(h.inputs().to_vec())) < 1e-12);
            let q = qwp(Path::A, th).unwrap();
            let q4 = q.then(&q).unwrap().then(&q).unwrap().then(&q).unwrap();
            assert!(matrix_distance(&q4, &ModeTransform::identity(q.inputs().to_vec())) < 1e-12);
            assert!(q.isometry_deviation() < 1e-12);
        }
    }

    #[test]
    fn zero_phase_is_identity() {
        let m = ModeId::h(Path::A);
        assert_eq!(phase_shift(m, 0.0).unwrap(), ModeTransform::identity(vec![m]));
    }

    #[test]
    fn loss_channel_weights() {
        let m = ModeId::h(Path::Alice);
        let one = photon(&[Path::Alice], m);
        let kept = one.apply_transform(&loss_channel(m, 1.0, 0).unwrap()).unwrap();
        assert_eq!(kept.amplitude_of(&[(m, 1)]).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(kept.num_terms(), 1);
        let gone = one.apply_transform(&loss_channel(m, 0.0, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(gone.amplitude_of(&[(ModeId::h(Path::Loss(0)), 1)]).unwrap().norm(), 1.0, epsilon = 1e-15);
        let part = one.apply_transform(&loss_channel(m, 0.8, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(part.amplitude_of(&[(m, 1)]).unwrap().norm_sqr(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(part.amplitude_of(&[(ModeId::h(Path::Loss(0)), 1)]).unwrap().norm_sqr(), 0.2, epsilon = 1e-15);
        assert!(loss_channel(m, 1.2, 0).is_err());
    }

    #[test]
    fn constructors_are_isometric() {
        let imp = PbsImperfection::new(20.0, 35.0, 0.03).unwrap();
        let all = [
            beam_splitter_paths(Path::C, Path::D, Path::E, Path::F, 0.3, BsConvention::RealSign).unwrap(),
            pbs_imperfect(Path::A, Path::APrime, Path::C, Path::Alice, imp).unwrap(),
            hwp(Path::C, 0.3).unwrap(),
            qwp(Path::C, 0.3).unwrap(),
            path_phase(Path::A, 1.1).unwrap(),
            path_loss(Path::Bob, 0.7, 3).unwrap(),
        ];
        for t in &all {
            assert!(t.isometry_deviation() < 1e-12);
        }
    }
}
