use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use super::mode::{ModeId, ModeRegister};
use super::transform::ModeTransform;
use crate::error::{Error, Result};

/// Amplitudes below this magnitude are dropped after every transform.
pub const AMP_PRUNE_TOL: f64 = 1e-12;

/// Default cap on the total photon number of any stored term.
pub const DEFAULT_MAX_PHOTONS: usize = 8;

/// Photon number per register position.
pub type Occupation = Vec<u8>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse multi-mode Fock state `Σ c_n |n⟩` over an ordered register.
#[derive(Clone)]
pub struct FockState {
    register: ModeRegister,
    terms: FxHashMap<Occupation, Complex64>,
    max_photons: usize,
}

impl FockState {
    /// The vacuum on `register`.
    pub fn vacuum(register: ModeRegister) -> Result<Self> {
        if register.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let mut terms = FxHashMap::default();
        terms.insert(vec![0; register.len()], Complex64::new(1.0, 0.0));
        Ok(FockState { register, terms, max_photons: DEFAULT_MAX_PHOTONS })
    }

    /// Builds a state from explicit terms; repeated occupations are summed.
    pub fn from_terms(
        register: ModeRegister,
        terms: impl IntoIterator<Item = (Occupation, Complex64)>,
    ) -> Result<Self> {
        if register.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let mut state = FockState { register, terms: FxHashMap::default(), max_photons: DEFAULT_MAX_PHOTONS };
        for (occ, amp) in terms {
            if occ.len() != state.register.len() {
                return Err(Error::param(format!(
                    "occupation has {} entries for a register of {} modes",
                    occ.len(),
                    state.register.len()
                )));
            }
            state.check_cap(&occ)?;
            *state.terms.entry(occ).or_insert(ZERO) += amp;
        }
        state.terms.retain(|_, a| a.norm() >= AMP_PRUNE_TOL);
        Ok(state)
    }

    /// Builds a state from sparse `(mode, count)` descriptions of each term.
    pub fn from_sparse_terms<'a>(
        register: ModeRegister,
        terms: impl IntoIterator<Item = (&'a [(ModeId, u8)], Complex64)>,
    ) -> Result<Self> {
        let terms: Vec<(Occupation, Complex64)> = terms
            .into_iter()
            .map(|(counts, amp)| Ok((occupation_from(&register, counts)?, amp)))
            .collect::<Result<_>>()?;
        FockState::from_terms(register, terms)
    }

    pub fn with_max_photons(mut self, max_photons: usize) -> Result<Self> {
        self.max_photons = max_photons;
        for occ in self.terms.keys() {
            self.check_cap(occ)?;
        }
        Ok(self)
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, Complex64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    /// Terms in lexicographic occupation order.
    pub fn sorted_terms(&self) -> Vec<(&Occupation, Complex64)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(ZERO)
    }

    /// Amplitude of the term with the given photon counts (all other modes empty).
    pub fn amplitude_of(&self, counts: &[(ModeId, u8)]) -> Result<Complex64> {
        Ok(self.amplitude(&occupation_from(&self.register, counts)?))
    }

    pub fn occupation(&self, counts: &[(ModeId, u8)]) -> Result<Occupation> {
        occupation_from(&self.register, counts)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().fold(0.0, |s, a| s + a.norm_sqr())
    }

    /// `a†|ψ⟩` for one mode. The result is not renormalized.
    pub fn apply_creation(&self, mode: ModeId) -> Result<Self> {
        let pos = self.register.position(&mode).ok_or(Error::UnknownMode(mode))?;
        let mut terms = FxHashMap::default();
        for (occ, amp) in &self.terms {
            let mut next = occ.clone();
            next[pos] += 1;
            self.check_cap(&next)?;
            terms.insert(next, amp * f64::from(occ[pos] + 1).sqrt());
        }
        Ok(FockState { register: self.register.clone(), terms, max_photons: self.max_photons })
    }

    /// Applies a linear mode transform by substituting every input creation
    /// operator with its image and expanding onto the vacuum.
    ///
    /// Output modes missing from the register are appended in the order the
    /// transform declares them.
    pub fn apply_transform(&self, t: &ModeTransform) -> Result<Self> {
        let in_pos: Vec<usize> = t
            .inputs()
            .iter()
            .map(|m| self.register.position(m).ok_or(Error::UnknownMode(*m)))
            .collect::<Result<_>>()?;
        let old_len = self.register.len();
        let mut register = self.register.clone();
        let mut out_pos = Vec::with_capacity(t.outputs().len());
        for m in t.outputs() {
            let p = match register.position(m) {
                Some(p) => p,
                None => register.push(*m)?,
            };
            out_pos.push(p);
        }
        for (m, &p) in t.outputs().iter().zip(&out_pos) {
            if p < old_len && !in_pos.contains(&p) && self.terms.keys().any(|occ| occ[p] != 0) {
                return Err(Error::OccupiedOutput(*m));
            }
        }

        let rows = t.sparse_rows();
        let n_out = out_pos.len();
        let new_len = register.len();
        let mut cache: FxHashMap<Vec<u8>, Vec<(Vec<u8>, Complex64)>> = FxHashMap::default();
        let mut terms: FxHashMap<Occupation, Complex64> = FxHashMap::default();
        terms.reserve(self.terms.len());
        for (occ, &amp) in &self.terms {
            let sub: Vec<u8> = in_pos.iter().map(|&p| occ[p]).collect();
            let mut base = occ.clone();
            base.resize(new_len, 0);
            if sub.iter().all(|&n| n == 0) {
                *terms.entry(base).or_insert(ZERO) += amp;
                continue;
            }
            for &p in &in_pos {
                base[p] = 0;
            }
            let expansion = cache.entry(sub).or_insert_with_key(|sub| expand_monomial(sub, &rows, n_out));
            for (m, coef) in expansion.iter() {
                let mut key = base.clone();
                let mut factor = 1.0;
                for (j, &mj) in m.iter().enumerate() {
                    if mj == 0 {
                        continue;
                    }
                    let p = out_pos[j];
                    let r = key[p];
                    factor *= raising_factor(r, mj);
                    key[p] = r + mj;
                }
                *terms.entry(key).or_insert(ZERO) += amp * coef * factor;
            }
        }
        terms.retain(|_, a| a.norm() >= AMP_PRUNE_TOL);
        Ok(FockState { register, terms, max_photons: self.max_photons })
    }

    /// Applies `t` to every wavepacket index present on its input paths.
    ///
    /// `t` is relabelled onto each internal index in turn; input modes missing
    /// from the register are added as vacuum first.
    pub fn apply_transform_all_wavepackets(&self, t: &ModeTransform) -> Result<Self> {
        let mut internals: Vec<u8> = self
            .register
            .iter()
            .filter(|m| t.inputs().iter().any(|i| i.path == m.path && i.pol == m.pol))
            .map(|m| m.internal)
            .collect();
        internals.sort_unstable();
        internals.dedup();
        let mut state = self.clone();
        for k in internals {
            let tk = t.with_internal(k);
            state = state.extend_register(tk.inputs())?.apply_transform(&tk)?;
        }
        Ok(state)
    }

    /// Appends any of `modes` that are not yet in the register, as vacuum.
    pub fn extend_register(&self, modes: &[ModeId]) -> Result<Self> {
        let missing: Vec<ModeId> = modes.iter().filter(|m| !self.register.contains(m)).copied().collect();
        if missing.is_empty() {
            return Ok(self.clone());
        }
        let mut register = self.register.clone();
        for m in missing {
            register.push(m)?;
        }
        let len = register.len();
        let terms = self
            .terms
            .iter()
            .map(|(occ, a)| {
                let mut k = occ.clone();
                k.resize(len, 0);
                (k, *a)
            })
            .collect();
        Ok(FockState { register, terms, max_photons: self.max_photons })
    }

    /// Same state expressed over `register`, which must hold the same modes.
    pub fn reordered(&self, register: &ModeRegister) -> Result<Self> {
        if self.register == *register {
            return Ok(self.clone());
        }
        if !self.register.same_modes(register) {
            return Err(Error::RegisterMismatch);
        }
        let perm: Vec<usize> = register.iter().map(|m| self.register.position(m).unwrap()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(occ, a)| (perm.iter().map(|&p| occ[p]).collect(), *a))
            .collect();
        Ok(FockState { register: register.clone(), terms, max_photons: self.max_photons })
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &FockState) -> Result<Complex64> {
        let other = other.reordered(&self.register)?;
        let (small, large, swap) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, false)
        } else {
            (&other.terms, &self.terms, true)
        };
        let mut acc = ZERO;
        for (occ, a) in small {
            if let Some(b) = large.get(occ) {
                acc += if swap { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn tensor_product(&self, other: &FockState) -> Result<Self> {
        if let Some(m) = other.register.iter().find(|m| self.register.contains(m)) {
            return Err(Error::OverlappingRegisters(*m));
        }
        let register = ModeRegister::new(self.register.iter().chain(other.register.iter()).copied())?;
        let max_photons = self.max_photons.max(other.max_photons);
        let mut terms = FxHashMap::default();
        for (o1, a1) in &self.terms {
            for (o2, a2) in &other.terms {
                let amp = a1 * a2;
                if amp.norm() < AMP_PRUNE_TOL {
                    continue;
                }
                let mut k = o1.clone();
                k.extend_from_slice(o2);
                let n: usize = k.iter().map(|&x| x as usize).sum();
                if n > max_photons {
                    return Err(Error::PhotonCap { found: n, cap: max_photons });
                }
                terms.insert(k, amp);
            }
        }
        Ok(FockState { register, terms, max_photons })
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Drops terms with `|amplitude| < tol`; returns the state and the
    /// discarded weight.
    pub fn prune(&self, tol: f64) -> (Self, f64) {
        let mut dropped = 0.0;
        let mut terms = FxHashMap::default();
        for (occ, a) in &self.terms {
            if a.norm() < tol {
                dropped += a.norm_sqr();
            } else {
                terms.insert(occ.clone(), *a);
            }
        }
        (FockState { register: self.register.clone(), terms, max_photons: self.max_photons }, dropped)
    }

    /// Weight per total photon number.
    pub fn photon_sectors(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (occ, a) in &self.terms {
            let n = occ.iter().map(|&x| x as usize).sum();
            *out.entry(n).or_insert(0.0) += a.norm_sqr();
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect();
        FockState { register: self.register.clone(), terms, max_photons: self.max_photons }
    }

    /// Superposition `self + other`.
    pub fn add(&self, other: &FockState) -> Result<Self> {
        let other = other.reordered(&self.register)?;
        let mut terms = self.terms.clone();
        for (k, a) in other.terms {
            *terms.entry(k).or_insert(ZERO) += a;
        }
        terms.retain(|_, a| a.norm() >= AMP_PRUNE_TOL);
        Ok(FockState { register: self.register.clone(), terms, max_photons: self.max_photons })
    }

    /// Keeps only the terms whose occupation satisfies `keep` (an unnormalized projection).
    pub fn filter(&self, keep: impl Fn(&[u8]) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, a)| (k.clone(), *a)).collect();
        FockState { register: self.register.clone(), terms, max_photons: self.max_photons }
    }

    /// Multiplies every term by `f(occupation)`.
    pub fn map_amplitudes(&self, f: impl Fn(&[u8]) -> Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * f(k))).collect();
        FockState { register: self.register.clone(), terms, max_photons: self.max_photons }
    }

    /// Splits the state into orthogonal pieces labelled by `label(occupation)`.
    pub fn split_by<K: Ord>(&self, label: impl Fn(&[u8]) -> K) -> BTreeMap<K, FockState> {
        let mut parts: BTreeMap<K, FxHashMap<Occupation, Complex64>> = BTreeMap::new();
        for (k, a) in &self.terms {
            parts.entry(label(k)).or_default().insert(k.clone(), *a);
        }
        parts
            .into_iter()
            .map(|(l, terms)| (l, FockState { register: self.register.clone(), terms, max_photons: self.max_photons }))
            .collect()
    }

    /// Total photon count over the register positions selected by `select`.
    pub fn count_where(&self, occ: &[u8], select: impl Fn(&ModeId) -> bool) -> usize {
        self.register.iter().zip(occ).filter(|(m, _)| select(m)).map(|(_, &n)| n as usize).sum()
    }

    fn check_cap(&self, occ: &[u8]) -> Result<()> {
        let n: usize = occ.iter().map(|&x| x as usize).sum();
        if n > self.max_photons {
            return Err(Error::PhotonCap { found: n, cap: self.max_photons });
        }
        Ok(())
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FockState over {} modes, {} terms", self.register.len(), self.terms.len())?;
        for (occ, a) in self.sorted_terms() {
            let label: Vec<String> = self
                .register
                .iter()
                .zip(occ.iter())
                .filter(|(_, &n)| n > 0)
                .map(|(m, n)| if *n == 1 { m.to_string() } else { format!("{m}^{n}") })
                .collect();
            writeln!(f, "  ({:+.6}{:+.6}i) |{}⟩", a.re, a.im, label.join(" "))?;
        }
        Ok(())
    }
}

fn occupation_from(register: &ModeRegister, counts: &[(ModeId, u8)]) -> Result<Occupation> {
    let mut occ = vec![0; register.len()];
    for (m, n) in counts {
        let p = register.position(m).ok_or(Error::UnknownMode(*m))?;
        occ[p] += n;
    }
    Ok(occ)
}

/// `√((r+m)!/r!)`, the amplitude picked up by `(b†)^m` acting on `|r⟩`.
fn raising_factor(r: u8, m: u8) -> f64 {
    (u32::from(r) + 1..=u32::from(r) + u32::from(m)).map(f64::from).product::<f64>().sqrt()
}

/// Expands `Π_i (Σ_j U_ij b†_j)^{n_i} / Π_i √(n_i!)` into monomial
/// coefficients over the output columns.
fn expand_monomial(sub: &[u8], rows: &[Vec<(usize, Complex64)>], n_out: usize) -> Vec<(Vec<u8>, Complex64)> {
    let mut poly: FxHashMap<Vec<u8>, Complex64> = FxHashMap::default();
    poly.insert(vec![0; n_out], Complex64::new(1.0, 0.0));
    let mut norm = 1.0;
    for (i, &n) in sub.iter().enumerate() {
        for k in 0..n {
            norm *= f64::from(k + 1);
            let mut next: FxHashMap<Vec<u8>, Complex64> = FxHashMap::default();
            for (mono, c) in &poly {
                for &(j, u) in &rows[i] {
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_insert(ZERO) += c * u;
                }
            }
            poly = next;
        }
    }
    let scale = 1.0 / norm.sqrt();
    let mut out: Vec<(Vec<u8>, Complex64)> = poly
        .into_iter()
        .filter(|(_, c)| *c != ZERO)
        .map(|(m, c)| (m, c * scale))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
