//! Jordan-Wigner layer for open spin-1/2 XY chains.
//!
//! Conventions (0-based): Majorana `2s` is `Z_0 ⋯ Z_{s-1} X_s` and Majorana
//! `2s+1` is `Z_0 ⋯ Z_{s-1} Y_s`. The chain Hamiltonian is
//!
//! ```text
//! H = -Σ_k (Jx_k X_k X_{k+1} + Jy_k Y_k Y_{k+1}) - Σ_k B_k Z_k
//! ```
//!
//! and a spin pointing up (`Z|↑⟩ = |↑⟩`) is an empty fermionic mode.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flo::{
    conjugate, fock_covariance, skew_exp, CovarianceMatrix, FockString, ModeRotation, SkewMatrix,
};

/// Couplings of an open XY chain with transverse field.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams {
    jx: Vec<f64>,
    jy: Vec<f64>,
    b: Vec<f64>,
}

impl ChainParams {
    /// `jx` and `jy` hold one value per bond (`L - 1`), `b` one per site (`L`).
    pub fn new(jx: Vec<f64>, jy: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let sites = b.len();
        if sites == 0 {
            return Err(Error::InvalidChain("chain needs at least one site".into()));
        }
        if jx.len() != sites - 1 || jy.len() != sites - 1 {
            return Err(Error::InvalidChain(format!(
                "{sites} sites need {} bond couplings, got Jx: {}, Jy: {}",
                sites - 1,
                jx.len(),
                jy.len()
            )));
        }
        if jx.iter().chain(&jy).chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidChain("couplings must be finite".into()));
        }
        Ok(Self { jx, jy, b })
    }

    pub fn uniform(sites: usize, jx: f64, jy: f64, b: f64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidChain("chain needs at least one site".into()));
        }
        Self::new(vec![jx; sites - 1], vec![jy; sites - 1], vec![b; sites])
    }

    /// Transverse-field Ising chain: `Jx = J`, `Jy = 0`, field `B`.
    pub fn tfim(sites: usize, j: f64, b: f64) -> Result<Self> {
        Self::uniform(sites, j, 0.0, b)
    }

    pub fn sites(&self) -> usize {
        self.b.len()
    }

    pub fn jx(&self) -> &[f64] {
        &self.jx
    }

    pub fn jy(&self) -> &[f64] {
        &self.jy
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Same chain with every bond coupling set to zero (`H_B`).
    pub fn field_part(&self) -> ChainParams {
        let bonds = self.sites() - 1;
        Self {
            jx: vec![0.0; bonds],
            jy: vec![0.0; bonds],
            b: self.b.clone(),
        }
    }

    /// Same chain with the field set to zero (`H_J`).
    pub fn bond_part(&self) -> ChainParams {
        Self {
            jx: self.jx.clone(),
            jy: self.jy.clone(),
            b: vec![0.0; self.sites()],
        }
    }
}

/// A sudden quench from the Fock state `omega` under a chain Hamiltonian,
/// continuous (`trotter_steps == 0`) or split into `trotter_steps`
/// field/bond pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct QuenchSpec {
    pub params: ChainParams,
    pub t: f64,
    pub trotter_steps: u64,
    pub omega: FockString,
}

impl QuenchSpec {
    pub fn new(params: ChainParams, t: f64, trotter_steps: u64, omega: FockString) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParams(format!(
                "evolution time {t} must be finite and ≥ 0"
            )));
        }
        if omega.len() != params.sites() {
            return Err(Error::InvalidChain(format!(
                "Fock string has {} modes, chain has {} sites",
                omega.len(),
                params.sites()
            )));
        }
        Ok(Self {
            params,
            t,
            trotter_steps,
            omega,
        })
    }

    /// Quench of the all-up product state.
    pub fn from_all_up(params: ChainParams, t: f64, trotter_steps: u64) -> Result<Self> {
        let omega = FockString::zeros(params.sites());
        Self::new(params, t, trotter_steps, omega)
    }

    /// Pulse length `Δt = t / T`.
    pub fn time_step(&self) -> Option<f64> {
        (self.trotter_steps > 0).then(|| self.t / self.trotter_steps as f64)
    }

    pub fn with_trotter_steps(&self, trotter_steps: u64) -> QuenchSpec {
        Self {
            trotter_steps,
            ..self.clone()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QuenchSpecFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&QuenchSpecFile::from(self))?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn broadcast(self, len: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            ScalarOrList::Scalar(x) => Ok(vec![x; len]),
            ScalarOrList::List(v) if v.len() == len => Ok(v),
            ScalarOrList::List(v) => Err(Error::InvalidChain(format!(
                "{name} has {} entries, expected {len}",
                v.len()
            ))),
        }
    }
}

/// On-disk form of [`QuenchSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
struct QuenchSpecFile {
    #[serde(rename = "L")]
    sites: usize,
    #[serde(rename = "Jx")]
    jx: ScalarOrList,
    #[serde(rename = "Jy", default = "zero_coupling")]
    jy: ScalarOrList,
    #[serde(rename = "B")]
    b: ScalarOrList,
    t: f64,
    #[serde(rename = "T", default)]
    trotter_steps: u64,
    #[serde(default)]
    omega: Option<Vec<u8>>,
}

fn zero_coupling() -> ScalarOrList {
    ScalarOrList::Scalar(0.0)
}

impl TryFrom<QuenchSpecFile> for QuenchSpec {
    type Error = Error;

    fn try_from(f: QuenchSpecFile) -> Result<Self> {
        if f.sites == 0 {
            return Err(Error::InvalidChain("L must be positive".into()));
        }
        let bonds = f.sites - 1;
        let params = ChainParams::new(
            f.jx.broadcast(bonds, "Jx")?,
            f.jy.broadcast(bonds, "Jy")?,
            f.b.broadcast(f.sites, "B")?,
        )?;
        let omega = match f.omega {
            Some(bits) => FockString::new(bits)?,
            None => FockString::zeros(f.sites),
        };
        QuenchSpec::new(params, f.t, f.trotter_steps, omega)
    }
}

impl From<&QuenchSpec> for QuenchSpecFile {
    fn from(s: &QuenchSpec) -> Self {
        Self {
            sites: s.params.sites(),
            jx: ScalarOrList::List(s.params.jx.clone()),
            jy: ScalarOrList::List(s.params.jy.clone()),
            b: ScalarOrList::List(s.params.b.clone()),
            t: s.t,
            trotter_steps: s.trotter_steps,
            omega: Some(s.omega.bits().to_vec()),
        }
    }
}

/// Coupling matrix `A` with `H_spin = (i/4) Σ A_jk m_j m_k`.
///
/// Non-zero upper-triangle entries (0-based, site `s`):
/// `A[2s, 2s+1] = 2B_s`, `A[2s+1, 2s+2] = 2Jx_s`, `A[2s, 2s+3] = -2Jy_s`.
pub fn xy_coupling_matrix(params: &ChainParams) -> SkewMatrix {
    let sites = params.sites();
    let dim = 2 * sites;
    let mut a = DMatrix::zeros(dim, dim);
    let mut set = |j: usize, k: usize, v: f64| {
        a[(j, k)] = v;
        a[(k, j)] = -v;
    };
    for s in 0..sites {
        set(2 * s, 2 * s + 1, 2.0 * params.b[s]);
    }
    for s in 0..sites.saturating_sub(1) {
        set(2 * s + 1, 2 * s + 2, 2.0 * params.jx[s]);
        set(2 * s, 2 * s + 3, -2.0 * params.jy[s]);
    }
    SkewMatrix::antisymmetrized(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Global phase `i^power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_power(p: u8) -> Self {
        match p % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// `(re, im)` of the phase.
    pub fn as_pair(self) -> (f64, f64) {
        match self {
            Phase::PlusOne => (1.0, 0.0),
            Phase::PlusI => (0.0, 1.0),
            Phase::MinusOne => (-1.0, 0.0),
            Phase::MinusI => (0.0, -1.0),
        }
    }
}

/// `phase · σ^{a_1}_{s_1} ⋯ σ^{a_n}_{s_n}` with strictly increasing sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub factors: Vec<(usize, Axis)>,
    pub phase: Phase,
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        write!(f, "{phase}")?;
        for (s, a) in &self.factors {
            write!(f, " {a:?}{s}")?;
        }
        Ok(())
    }
}

/// `σ^a σ^b = i^p σ^c`; `None` encodes the identity.
fn pauli_product(a: Option<Axis>, b: Option<Axis>) -> (u8, Option<Axis>) {
    use Axis::*;
    match (a, b) {
        (None, x) | (x, None) => (0, x),
        (Some(a), Some(b)) if a == b => (0, None),
        (Some(X), Some(Y)) => (1, Some(Z)),
        (Some(Y), Some(Z)) => (1, Some(X)),
        (Some(Z), Some(X)) => (1, Some(Y)),
        (Some(Y), Some(X)) => (3, Some(Z)),
        (Some(Z), Some(Y)) => (3, Some(X)),
        (Some(X), Some(Z)) => (3, Some(Y)),
        _ => unreachable!(),
    }
}

/// Site-wise Pauli content of the Jordan-Wigner Majorana `index`.
fn majorana_factor(index: usize, site: usize) -> Option<Axis> {
    let s = index / 2;
    if site < s {
        Some(Axis::Z)
    } else if site == s {
        Some(if index.is_multiple_of(2) { Axis::X } else { Axis::Y })
    } else {
        None
    }
}

/// Pauli string `P` and phase with `m_j m_k = phase · P` (0-based, `j < k`).
pub fn majorana_pair_pauli_string(j: usize, k: usize) -> Result<PauliString> {
    if j >= k {
        return Err(Error::InvalidIndexOrder { j, k });
    }
    let mut power = 0u8;
    let mut factors = Vec::new();
    for site in 0..=(k / 2) {
        let (p, axis) = pauli_product(majorana_factor(j, site), majorana_factor(k, site));
        power += p;
        if let Some(axis) = axis {
            factors.push((site, axis));
        }
    }
    Ok(PauliString {
        factors,
        phase: Phase::from_power(power),
    })
}

/// Mode-space propagator of the Trotterized evolution
/// `U_T = (e^{-iΔt H_B} e^{-iΔt H_J})^T`, namely `(e^{Δt A_B} e^{Δt A_J})^T`.
pub fn trotter_rotation(spec: &QuenchSpec) -> Result<ModeRotation> {
    let dt = spec.time_step().ok_or_else(|| {
        Error::ContractViolation(
            "trotter_rotation needs T ≥ 1; use quench_rotation for T = 0".into(),
        )
    })?;
    let a_field = xy_coupling_matrix(&spec.params.field_part());
    let a_bond = xy_coupling_matrix(&spec.params.bond_part());
    let step = skew_exp(&a_field, dt)?.compose(&skew_exp(&a_bond, dt)?)?;
    Ok(step.pow(spec.trotter_steps))
}

/// Mode-space propagator `e^{tA}` of the continuous evolution.
pub fn quench_rotation(spec: &QuenchSpec) -> Result<ModeRotation> {
    if spec.trotter_steps != 0 {
        return Err(Error::ContractViolation(
            "quench_rotation describes continuous evolution (T = 0)".into(),
        ));
    }
    skew_exp(&xy_coupling_matrix(&spec.params), spec.t)
}

/// The propagator selected by `spec.trotter_steps`.
pub fn propagator(spec: &QuenchSpec) -> Result<ModeRotation> {
    if spec.trotter_steps == 0 {
        quench_rotation(spec)
    } else {
        trotter_rotation(spec)
    }
}

/// Covariance matrix `Q M_ω Qᵀ` of the quenched state.
pub fn quench_target(spec: &QuenchSpec) -> Result<CovarianceMatrix> {
    conjugate(&fock_covariance(&spec.omega), &propagator(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_coupling_pattern() {
        let a = xy_coupling_matrix(&ChainParams::tfim(3, 1.0, 1.0).unwrap());
        let expected_upper = [
            (0, 1, 2.0),
            (1, 2, 2.0),
            (2, 3, 2.0),
            (3, 4, 2.0),
            (4, 5, 2.0),
        ];
        let mut count = 0;
        for j in 0..6 {
            for k in (j + 1)..6 {
                let v = a.get(j, k);
                if v != 0.0 {
                    count += 1;
                    assert!(
                        expected_upper.contains(&(j, k, v)),
                        "unexpected ({j},{k})={v}"
                    );
                }
            }
        }
        assert_eq!(count, expected_upper.len());
    }

    #[test]
    fn decoupled_sites_give_block_diagonal() {
        let a = xy_coupling_matrix(&ChainParams::uniform(2, 0.0, 0.0, 1.0).unwrap());
        let expected = SkewMatrix::from_row_major(
            4,
            &[
                0., 2., 0., 0., -2., 0., 0., 0., 0., 0., 0., 2., 0., 0., -2., 0.,
            ],
        )
        .unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn coupling_bandwidth_at_most_three() {
        let p = ChainParams::new(
            vec![0.3, -1.2, 0.7],
            vec![1.1, 0.4, -0.9],
            vec![0.5, 2.0, -1.0, 0.1],
        )
        .unwrap();
        let a = xy_coupling_matrix(&p);
        for j in 0..8usize {
            for k in 0..8usize {
                if j.abs_diff(k) > 3 {
                    assert_eq!(a.get(j, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn dictionary_cases() {
        // m_{2k-1} m_{2k} = i Z_k (1-based).
        let p = majorana_pair_pauli_string(4, 5).unwrap();
        assert_eq!(
            p,
            PauliString {
                factors: vec![(2, Axis::Z)],
                phase: Phase::PlusI
            }
        );
        // m_{2j} m_{2j+1} = i X_j X_{j+1}.
        let p = majorana_pair_pauli_string(1, 2).unwrap();
        assert_eq!(
            p,
            PauliString {
                factors: vec![(0, Axis::X), (1, Axis::X)],
                phase: Phase::PlusI
            }
        );
        // m_1 m_6 = -i Y_1 Z_2 Y_3.
        let p = majorana_pair_pauli_string(0, 5).unwrap();
        assert_eq!(
            p,
            PauliString {
                factors: vec![(0, Axis::Y), (1, Axis::Z), (2, Axis::Y)],
                phase: Phase::MinusI
            }
        );
        assert!(matches!(
            majorana_pair_pauli_string(3, 3),
            Err(Error::InvalidIndexOrder { .. })
        ));
        assert!(matches!(
            majorana_pair_pauli_string(4, 2),
            Err(Error::InvalidIndexOrder { .. })
        ));
    }

    #[test]
    fn dictionary_parity_cases_match_closed_forms() {
        // Closed forms for 1-based j < k sites (here 0-based sites a < b).
        for a in 0..3 {
            for b in (a + 1)..4 {
                let z: Vec<(usize, Axis)> = ((a + 1)..b).map(|s| (s, Axis::Z)).collect();
                let with = |first: Axis, last: Axis| {
                    let mut f = vec![(a, first)];
                    f.extend(z.iter().copied());
                    f.push((b, last));
                    f
                };
                let cases = [
                    (2 * a, 2 * b, Phase::MinusI, with(Axis::Y, Axis::X)),
                    (2 * a, 2 * b + 1, Phase::MinusI, with(Axis::Y, Axis::Y)),
                    (2 * a + 1, 2 * b, Phase::PlusI, with(Axis::X, Axis::X)),
                    (2 * a + 1, 2 * b + 1, Phase::PlusI, with(Axis::X, Axis::Y)),
                ];
                for (j, k, phase, factors) in cases {
                    let got = majorana_pair_pauli_string(j, k).unwrap();
                    assert_eq!(got, PauliString { factors, phase }, "pair ({j},{k})");
                }
            }
        }
    }

    #[test]
    fn chain_validation() {
        assert!(ChainParams::new(vec![1.0], vec![], vec![1.0, 1.0]).is_err());
        assert!(ChainParams::new(vec![], vec![], vec![]).is_err());
        assert!(ChainParams::uniform(2, f64::NAN, 0.0, 1.0).is_err());
        let p = ChainParams::tfim(2, 1.0, 1.0).unwrap();
        assert!(QuenchSpec::from_all_up(p.clone(), -1.0, 0).is_err());
        assert!(QuenchSpec::new(p, 1.0, 0, FockString::zeros(3)).is_err());
    }

    #[test]
    fn quench_spec_json_broadcasts_scalars() {
        let s = QuenchSpec::from_json(r#"{"L": 3, "Jx": 1.0, "Jy": [0.0, 0.5], "B": 2.0, "t": 0.5, "T": 4, "omega": [0,1,0]}"#)
            .unwrap();
        assert_eq!(s.params.jx(), &[1.0, 1.0]);
        assert_eq!(s.params.jy(), &[0.0, 0.5]);
        assert_eq!(s.params.b(), &[2.0, 2.0, 2.0]);
        assert_eq!(s.trotter_steps, 4);
        assert_eq!(s.omega.bits(), &[0, 1, 0]);
        let back = QuenchSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(QuenchSpec::from_json(r#"{"L": 3, "Jx": [1.0], "B": 2.0, "t": 0.5}"#).is_err());
    }

    #[test]
    fn rotation_contracts() {
        let p = ChainParams::tfim(2, 1.0, 1.0).unwrap();
        let cont = QuenchSpec::from_all_up(p.clone(), 1.0, 0).unwrap();
        assert!(matches!(
            trotter_rotation(&cont),
            Err(Error::ContractViolation(_))
        ));
        let trot = cont.with_trotter_steps(3);
        assert!(matches!(
            quench_rotation(&trot),
            Err(Error::ContractViolation(_))
        ));
        let q = quench_rotation(&cont).unwrap();
        assert!(q.orthogonality_defect() < 1e-12);
        assert!((q.matrix().clone().determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_time_quench_is_the_initial_state() {
        let p = ChainParams::tfim(3, 1.0, 1.0).unwrap();
        let w = FockString::new(vec![1, 0, 1]).unwrap();
        let spec = QuenchSpec::new(p, 0.0, 0, w.clone()).unwrap();
        let m = quench_target(&spec).unwrap();
        assert!(m.max_abs_diff(&fock_covariance(&w)) < 1e-14);
        let q = quench_rotation(&spec).unwrap();
        assert!(q.max_abs_diff(&ModeRotation::identity(6)) < 1e-14);
    }

    #[test]
    fn single_trotter_step_is_the_pulse_product() {
        let p = ChainParams::tfim(3, 0.8, 1.3).unwrap();
        let spec = QuenchSpec::from_all_up(p.clone(), 0.4, 1).unwrap();
        let expected = skew_exp(&xy_coupling_matrix(&p.field_part()), 0.4)
            .unwrap()
            .compose(&skew_exp(&xy_coupling_matrix(&p.bond_part()), 0.4).unwrap())
            .unwrap();
        assert!(trotter_rotation(&spec).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn field_only_trotterization_is_exact() {
        let p = ChainParams::tfim(4, 0.0, 1.0).unwrap();
        let exact = quench_rotation(&QuenchSpec::from_all_up(p.clone(), 0.9, 0).unwrap()).unwrap();
        for steps in [1, 3, 16] {
            let q =
                trotter_rotation(&QuenchSpec::from_all_up(p.clone(), 0.9, steps).unwrap()).unwrap();
            assert!(q.max_abs_diff(&exact) < 1e-10);
        }
    }
}
