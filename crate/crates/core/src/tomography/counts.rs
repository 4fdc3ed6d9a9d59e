use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::detection::DensityMatrix2Q;
use crate::error::{Error, Result};

/// Local measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Eigenvectors for the `+` and `-` outcomes: D/A, R/L, H/V.
    pub fn eigenvectors(self) -> [Vector2<Complex64>; 2] {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => [Vector2::new(s, s), Vector2::new(s, -s)],
            Pauli::Y => [Vector2::new(s, s * i), Vector2::new(s, -s * i)],
            Pauli::Z => [Vector2::new(one, z), Vector2::new(z, one)],
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One basis per side: `a` for Alice's qubit, `b` for Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Setting {
    pub a: Pauli,
    pub b: Pauli,
}

impl Setting {
    /// The nine Pauli pairs, XX first.
    pub fn all() -> Vec<Setting> {
        Pauli::ALL.iter().flat_map(|&a| Pauli::ALL.iter().map(move |&b| Setting { a, b })).collect()
    }

    /// Product states for outcomes `++`, `+-`, `-+`, `--` on basis HH, HV, VH, VV.
    pub fn outcome_vectors(self) -> [Vector4<Complex64>; 4] {
        let ea = self.a.eigenvectors();
        let eb = self.b.eigenvectors();
        let kron = |u: &Vector2<Complex64>, v: &Vector2<Complex64>| {
            Vector4::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])
        };
        [kron(&ea[0], &eb[0]), kron(&ea[0], &eb[1]), kron(&ea[1], &eb[0]), kron(&ea[1], &eb[1])]
    }

    pub fn projectors(self) -> [Matrix4<Complex64>; 4] {
        self.outcome_vectors().map(|w| w * w.adjoint())
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a.symbol(), self.b.symbol())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = |c: char| match c {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::param(format!("unknown basis {c:?}"))),
        };
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => Ok(Setting { a: p(a)?, b: p(b)? }),
            _ => Err(Error::param(format!("malformed setting {s:?}"))),
        }
    }
}

pub const OUTCOME_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

/// Outcome counts, one row of four per setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TomographyCounts {
    pub settings: Vec<Setting>,
    pub counts: Vec<[u64; 4]>,
    pub shots: u64,
}

impl TomographyCounts {
    pub fn new(settings: Vec<Setting>, counts: Vec<[u64; 4]>, shots: u64) -> Result<Self> {
        if settings.len() != counts.len() {
            return Err(Error::param("one count row per setting required"));
        }
        for (s, row) in settings.iter().zip(&counts) {
            if row.iter().sum::<u64>() != shots {
                return Err(Error::param(format!("counts for {s} do not sum to {shots}")));
            }
        }
        Ok(TomographyCounts { settings, counts, shots })
    }

    pub fn total(&self) -> u64 {
        self.shots * self.settings.len() as u64
    }

    /// Fails unless every Pauli pair is present.
    pub fn check_complete(&self) -> Result<()> {
        for s in Setting::all() {
            if !self.settings.contains(&s) {
                return Err(Error::param(format!("setting {s} missing; state not identifiable")));
            }
        }
        Ok(())
    }

    /// `(outcome state, count)` for every setting and outcome.
    pub fn events(&self) -> Vec<(Vector4<Complex64>, f64)> {
        self.settings
            .iter()
            .zip(&self.counts)
            .flat_map(|(s, row)| s.outcome_vectors().into_iter().zip(row.map(|n| n as f64)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["setting", "outcome", "count"])?;
        for (s, row) in self.settings.iter().zip(&self.counts) {
            for (label, n) in OUTCOME_LABELS.iter().zip(row) {
                wr.write_record([s.to_string(), label.to_string(), n.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut settings: Vec<Setting> = Vec::new();
        let mut counts: Vec<[u64; 4]> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::param("count rows need setting,outcome,count"));
            }
            let s: Setting = rec[0].parse()?;
            let k = OUTCOME_LABELS
                .iter()
                .position(|l| *l == &rec[1])
                .ok_or_else(|| Error::param(format!("unknown outcome {:?}", &rec[1])))?;
            let n: u64 = rec[2].parse().map_err(|_| Error::param(format!("bad count {:?}", &rec[2])))?;
            let i = match settings.iter().position(|x| *x == s) {
                Some(i) => i,
                None => {
                    settings.push(s);
                    counts.push([0; 4]);
                    settings.len() - 1
                }
            };
            counts[i][k] += n;
        }
        let shots = counts.first().map(|r| r.iter().sum()).unwrap_or(0);
        TomographyCounts::new(settings, counts, shots)
    }
}

/// Born-rule outcome probabilities, one row per setting of [`Setting::all`].
pub fn outcome_probabilities(rho: &Matrix4<Complex64>) -> Vec<[f64; 4]> {
    Setting::all()
        .into_iter()
        .map(|s| {
            let p = s.outcome_vectors().map(|w| born(rho, &w));
            let z: f64 = p.iter().sum();
            p.map(|x| x / z)
        })
        .collect()
}

/// `⟨w|ρ|w⟩`, floored at zero.
pub fn born(rho: &Matrix4<Complex64>, w: &Vector4<Complex64>) -> f64 {
    (w.adjoint() * rho * w)[(0, 0)].re.max(0.0)
}

/// Multinomial counts for all nine settings, reproducible per seed.
pub fn simulate_counts(d: &DensityMatrix2Q, shots: u64, seed: u64) -> Result<TomographyCounts> {
    let rho = d.rho.as_ref().ok_or_else(|| Error::InvalidDensityMatrix("no state to measure".into()))?;
    crate::detection::check_density(rho)?;
    if shots == 0 {
        return Err(Error::param("shots must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = outcome_probabilities(rho)
        .into_iter()
        .map(|p| multinomial(&mut rng, shots, &p))
        .collect::<Result<Vec<_>>>()?;
    TomographyCounts::new(Setting::all(), counts, shots)
}

fn multinomial(rng: &mut ChaCha8Rng, n: u64, p: &[f64; 4]) -> Result<[u64; 4]> {
    let mut out = [0u64; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (p[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q).map_err(|e| Error::Numerical(e.to_string()))?.sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= p[k];
    }
    out[3] = left;
    Ok(out)
}
