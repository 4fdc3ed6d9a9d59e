//! Herald projection at the central station and figures of merit of the
//! delivered two-qubit state.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Arm, FockState, ModeId, ModeRegister, Occupation, Path, Pol};

/// Tolerance on the norm of states handed to [`herald`].
pub const NORM_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;
const TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorModel {
    /// Click on one or more photons.
    #[default]
    Threshold,
    /// Photon-number resolving.
    Pnr,
}

/// One detector behind a projection PBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub arm: Arm,
    pub pol: Pol,
}

impl Channel {
    pub const fn new(arm: Arm, pol: Pol) -> Self {
        Channel { arm, pol }
    }

    pub const ALL: [Channel; 4] = [
        Channel::new(Arm::E, Pol::H),
        Channel::new(Arm::E, Pol::V),
        Channel::new(Arm::F, Pol::H),
        Channel::new(Arm::F, Pol::V),
    ];

    pub fn path(self) -> Path {
        Path::Detector(self.arm, self.pol)
    }
}

/// Detection pattern that heralds a successful swap.
///
/// Threshold patterns require at least one photon in each listed channel.
/// PNR patterns require the exact listed count in each listed channel.
/// Channels that are not listed are traced out either way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeraldPattern {
    model: DetectorModel,
    required: Vec<(Channel, u8)>,
}

impl HeraldPattern {
    pub fn threshold(channels: &[Channel]) -> Result<Self> {
        HeraldPattern::build(DetectorModel::Threshold, channels.iter().map(|&c| (c, 1)).collect())
    }

    pub fn pnr(counts: &[(Channel, u8)]) -> Result<Self> {
        HeraldPattern::build(DetectorModel::Pnr, counts.to_vec())
    }

    fn build(model: DetectorModel, required: Vec<(Channel, u8)>) -> Result<Self> {
        if required.is_empty() {
            return Err(Error::param("herald pattern lists no detectors"));
        }
        for (i, (c, _)) in required.iter().enumerate() {
            if required[..i].iter().any(|(d, _)| d == c) {
                return Err(Error::param(format!("detector {:?}{:?} listed twice", c.pol, c.arm)));
            }
        }
        Ok(HeraldPattern { model, required })
    }

    /// One photon in Ve and one in Hf. The PNR version also demands that
    /// He and Vf stay dark.
    pub fn standard(model: DetectorModel) -> Self {
        let ve = Channel::new(Arm::E, Pol::V);
        let hf = Channel::new(Arm::F, Pol::H);
        match model {
            DetectorModel::Threshold => HeraldPattern { model, required: vec![(ve, 1), (hf, 1)] },
            DetectorModel::Pnr => HeraldPattern {
                model,
                required: vec![(ve, 1), (hf, 1), (Channel::new(Arm::E, Pol::H), 0), (Channel::new(Arm::F, Pol::V), 0)],
            },
        }
    }

    pub fn model(&self) -> DetectorModel {
        self.model
    }

    pub fn required(&self) -> &[(Channel, u8)] {
        &self.required
    }

    /// Fewest photons the detectors must receive for the pattern to fire.
    pub fn min_photons(&self) -> usize {
        self.required
            .iter()
            .map(|(_, n)| match self.model {
                DetectorModel::Threshold => 1,
                DetectorModel::Pnr => *n as usize,
            })
            .sum()
    }

    fn accepts(&self, counts: &[usize]) -> bool {
        self.required.iter().zip(counts).all(|((_, want), &got)| match self.model {
            DetectorModel::Threshold => got >= 1,
            DetectorModel::Pnr => got == *want as usize,
        })
    }
}

/// Conditional state of the two delivered qubits on basis HH, HV, VH, VV
/// (first letter: path a).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix2Q {
    /// `None` when the one-photon-per-side block has zero weight.
    pub rho: Option<Matrix4<Complex64>>,
    /// Probability that both a and b hold exactly one photon.
    pub in_subspace_weight: f64,
}

impl DensityMatrix2Q {
    pub fn new(rho: Matrix4<Complex64>, in_subspace_weight: f64) -> Result<Self> {
        check_density(&rho)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&in_subspace_weight) {
            return Err(Error::InvalidDensityMatrix(format!("weight {in_subspace_weight} outside [0, 1]")));
        }
        Ok(DensityMatrix2Q { rho: Some(rho), in_subspace_weight: in_subspace_weight.clamp(0.0, 1.0) })
    }

    /// Weight-0 sentinel: no state in the qubit block.
    pub fn absent() -> Self {
        DensityMatrix2Q { rho: None, in_subspace_weight: 0.0 }
    }

    pub fn pure(psi: &Vector4<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let v = psi / Complex64::new(n, 0.0);
        DensityMatrix2Q::new(v * v.adjoint(), 1.0)
    }

    /// Builds from an unnormalized block and the total probability it is a part of.
    pub fn from_block(block: Matrix4<Complex64>, total: f64) -> Result<Self> {
        let block = hermitize(&block);
        let w = block.trace().re;
        if w <= 0.0 || total <= 0.0 {
            return Ok(DensityMatrix2Q::absent());
        }
        DensityMatrix2Q::new(block / Complex64::new(w, 0.0), (w / total).min(1.0))
    }

    pub fn is_absent(&self) -> bool {
        self.rho.is_none()
    }

    fn rho_or_err(&self) -> Result<&Matrix4<Complex64>> {
        self.rho.as_ref().ok_or_else(|| Error::InvalidDensityMatrix("no state in the qubit block".into()))
    }
}

pub fn check_density(rho: &Matrix4<Complex64>) -> Result<()> {
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
    }
    let min = SymmetricEigen::new(*rho).eigenvalues.min();
    if min < EIGEN_FLOOR {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

pub(crate) fn hermitize(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Result of projecting onto a herald pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    pub herald_prob: f64,
    pub conditional: DensityMatrix2Q,
}

impl HeraldOutcome {
    /// Probability of the herald together with one photon at each receiver.
    pub fn fourfold_prob(&self) -> f64 {
        self.herald_prob * self.conditional.in_subspace_weight
    }
}

/// Basis index of a delivered two-photon term.
fn qubit_index(pol_a: Pol, pol_b: Pol) -> usize {
    let bit = |p: Pol| match p {
        Pol::H => 0,
        Pol::V => 1,
    };
    2 * bit(pol_a) + bit(pol_b)
}

/// Environment label of a term in the qubit block: the occupation with the
/// two delivered photons removed, plus their wavepacket labels.
type EnvKey = (Occupation, u8, u8);

/// Herald-accepted part of a (possibly unnormalized) state, arranged for
/// bilinear products.
#[derive(Debug, Clone)]
pub struct HeraldProjection {
    register: ModeRegister,
    delivered_register: ModeRegister,
    accepted: FxHashMap<Occupation, Complex64>,
    block: FxHashMap<EnvKey, Vector4<Complex64>>,
}

/// Scalar herald weight and qubit block of `|ψ⟩⟨χ|` restricted to the herald.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldMoments {
    pub herald: Complex64,
    pub block: Matrix4<Complex64>,
}

impl HeraldMoments {
    pub fn zero() -> Self {
        HeraldMoments { herald: Complex64::new(0.0, 0.0), block: Matrix4::zeros() }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        HeraldMoments { herald: self.herald * c, block: self.block * c }
    }

    pub fn add_assign(&mut self, other: &HeraldMoments) {
        self.herald += other.herald;
        self.block += other.block;
    }

    pub fn outcome(&self) -> Result<HeraldOutcome> {
        let p = self.herald.re;
        if p <= 0.0 {
            return Ok(HeraldOutcome { herald_prob: 0.0, conditional: DensityMatrix2Q::absent() });
        }
        Ok(HeraldOutcome { herald_prob: p.min(1.0), conditional: DensityMatrix2Q::from_block(self.block, p)? })
    }
}

fn positions(register: &ModeRegister, path: Path) -> Vec<usize> {
    register.iter().enumerate().filter(|(_, m)| m.path == path).map(|(i, _)| i).collect()
}

/// Terms of `state` accepted by `pattern`, unnormalized.
pub fn accepted_part(state: &FockState, pattern: &HeraldPattern) -> Result<FockState> {
    let reg = state.register();
    let channels: Vec<Vec<usize>> = pattern
        .required
        .iter()
        .map(|(c, _)| {
            let p = positions(reg, c.path());
            if p.is_empty() {
                Err(Error::UnknownMode(ModeId::new(c.path(), c.pol)))
            } else {
                Ok(p)
            }
        })
        .collect::<Result<_>>()?;
    Ok(state.filter(|occ| {
        let counts: Vec<usize> = channels.iter().map(|p| p.iter().map(|&i| occ[i] as usize).sum()).collect();
        pattern.accepts(&counts)
    }))
}

/// Projects `state` onto `pattern` without normalizing.
pub fn project(state: &FockState, pattern: &HeraldPattern) -> Result<HeraldProjection> {
    let accepted = accepted_part(state, pattern)?;
    HeraldProjection::new(&accepted, &accepted)
}

fn qubit_block<'a>(
    reg: &ModeRegister,
    terms: impl Iterator<Item = (&'a Occupation, Complex64)>,
) -> Result<FxHashMap<EnvKey, Vector4<Complex64>>> {
    let a = positions(reg, Path::Alice);
    let b = positions(reg, Path::Bob);
    if a.is_empty() {
        return Err(Error::UnknownMode(ModeId::h(Path::Alice)));
    }
    if b.is_empty() {
        return Err(Error::UnknownMode(ModeId::h(Path::Bob)));
    }
    let modes = reg.modes();
    let single = |occ: &[u8], pos: &[usize]| -> Option<usize> {
        let mut found = None;
        for &i in pos {
            match occ[i] {
                0 => {}
                1 if found.is_none() => found = Some(i),
                _ => return None,
            }
        }
        found
    };
    let mut block: FxHashMap<EnvKey, Vector4<Complex64>> = FxHashMap::default();
    for (occ, amp) in terms {
        let (Some(ia), Some(ib)) = (single(occ, &a), single(occ, &b)) else { continue };
        let mut env = occ.clone();
        env[ia] = 0;
        env[ib] = 0;
        let key = (env, modes[ia].internal, modes[ib].internal);
        block.entry(key).or_insert_with(Vector4::zeros)[qubit_index(modes[ia].pol, modes[ib].pol)] += amp;
    }
    Ok(block)
}

impl HeraldProjection {
    /// `accepted` is the herald-accepted state; `delivered` is the same state
    /// after any further maps on modes the herald does not read (such as
    /// loss on a and b). Herald weights come from the former, the qubit
    /// block from the latter.
    pub fn new(accepted: &FockState, delivered: &FockState) -> Result<Self> {
        let block = qubit_block(delivered.register(), delivered.terms())?;
        Ok(HeraldProjection {
            register: accepted.register().clone(),
            delivered_register: delivered.register().clone(),
            accepted: accepted.terms().map(|(o, a)| (o.clone(), a)).collect(),
            block,
        })
    }

    /// Herald weight and qubit block of `|self⟩⟨other|`.
    pub fn moments(&self, other: &HeraldProjection) -> Result<HeraldMoments> {
        if self.register != other.register || self.delivered_register != other.delivered_register {
            return Err(Error::RegisterMismatch);
        }
        let mut herald = Complex64::new(0.0, 0.0);
        for (occ, amp) in &self.accepted {
            if let Some(b) = other.accepted.get(occ) {
                herald += amp * b.conj();
            }
        }
        let mut block = Matrix4::zeros();
        for (key, v) in &self.block {
            if let Some(w) = other.block.get(key) {
                block += v * w.adjoint();
            }
        }
        Ok(HeraldMoments { herald, block })
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }
}

fn check_normalized(state: &FockState) -> Result<()> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(n));
    }
    Ok(())
}

/// Projects onto the herald, traces out the central station and loss modes,
/// and returns the herald probability and the conditional state of a and b.
pub fn herald(state: &FockState, pattern: &HeraldPattern) -> Result<HeraldOutcome> {
    check_normalized(state)?;
    let proj = project(state, pattern)?;
    proj.moments(&proj)?.outcome()
}

/// Reduced state of paths a and b; every other mode is traced out.
pub fn reduce_to_qubits(state: &FockState) -> Result<DensityMatrix2Q> {
    let total = state.norm_sqr();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let block = qubit_block(state.register(), state.terms())?;
    let mut m = Matrix4::zeros();
    for v in block.values() {
        m += v * v.adjoint();
    }
    DensityMatrix2Q::from_block(m, total)
}

pub fn psi_minus() -> Vector4<Complex64> {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Vector4::new(Complex64::new(0.0, 0.0), s, -s, Complex64::new(0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    /// Counts every heralded event; out-of-block events score 0.
    pub f_total: f64,
    /// Conditioned on one photon per receiver.
    pub f_postselected: f64,
}

pub fn fidelity_to_psi_minus(d: &DensityMatrix2Q) -> Result<Fidelity> {
    let Some(rho) = &d.rho else {
        return Ok(Fidelity { f_total: 0.0, f_postselected: 0.0 });
    };
    check_density(rho)?;
    let f_ps = fidelity_to_pure(rho, &psi_minus());
    Ok(Fidelity { f_total: d.in_subspace_weight * f_ps, f_postselected: f_ps })
}

/// `⟨ψ|ρ|ψ⟩` for normalized `ψ`, clamped to [0, 1].
pub fn fidelity_to_pure(rho: &Matrix4<Complex64>, psi: &Vector4<Complex64>) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re.clamp(0.0, 1.0)
}

pub fn purity(d: &DensityMatrix2Q) -> Result<f64> {
    let rho = d.rho_or_err()?;
    check_density(rho)?;
    Ok((rho * rho).trace().re)
}

/// Uhlmann fidelity between two density matrices.
pub fn state_fidelity(rho: &Matrix4<Complex64>, sigma: &Matrix4<Complex64>) -> f64 {
    let sqrt_rho = psd_sqrt(rho);
    let inner = sqrt_rho * sigma * sqrt_rho;
    let ev = SymmetricEigen::new(hermitize(&inner)).eigenvalues;
    let s: f64 = ev.iter().map(|&x| x.max(0.0).sqrt()).sum();
    (s * s).clamp(0.0, 1.0)
}

pub(crate) fn psd_sqrt(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x.max(0.0).sqrt(), 0.0)));
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Heralded fidelity from event counts: `(fourfolds / heralds) · F_ps`.
pub fn heralded_fidelity_estimator(fourfolds: u64, heralds: u64, f_ps: f64) -> Result<f64> {
    if heralds == 0 {
        return Err(Error::param("no heralding events"));
    }
    if fourfolds > heralds {
        return Err(Error::param(format!("{fourfolds} fourfolds exceed {heralds} heralds")));
    }
    heralded_fidelity_from_probabilities(fourfolds as f64, heralds as f64, f_ps)
}

/// Same estimator on exact probabilities.
pub fn heralded_fidelity_from_probabilities(p_fourfold: f64, p_herald: f64, f_ps: f64) -> Result<f64> {
    if !(p_herald > 0.0) {
        return Err(Error::param("herald probability must be positive"));
    }
    if !(0.0..=1.0).contains(&f_ps) {
        return Err(Error::param(format!("f_ps = {f_ps} outside [0, 1]")));
    }
    if p_fourfold < 0.0 || p_fourfold > p_herald * (1.0 + 1e-12) {
        return Err(Error::param("fourfold probability outside [0, herald probability]"));
    }
    Ok(p_fourfold / p_herald * f_ps)
}
