//! Brute-force Hilbert-space reference for small chains.
//!
//! Operators are dense `2^L × 2^L` complex matrices in the spin
//! computational basis, site 0 being the most significant tensor factor and
//! `|0⟩ = |↑⟩`. Everything here is exponential in `L` and meant only as
//! ground truth for the covariance-matrix machinery.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flo::{CovarianceMatrix, FockString, SkewMatrix};
use crate::spin::{Axis, ChainParams, PauliString, QuenchSpec};

pub type C64 = Complex64;

/// Default largest chain accepted by the oracle.
pub const DEFAULT_ORACLE_CAP: usize = 8;
/// Hard upper limit for [`ExactOracle::with_cap`].
pub const MAX_ORACLE_CAP: usize = 10;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;
const DECOMPOSITION_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense operator on `L` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    modes: usize,
    m: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(modes: usize, m: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << modes;
        if m.shape() != (dim, dim) {
            return Err(Error::InvalidDimension(format!(
                "operator on {modes} modes must be {dim}×{dim}, got {:?}",
                m.shape()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericalFailure("non-finite operator entry".into()));
        }
        Ok(Self { modes, m })
    }

    pub fn identity(modes: usize) -> Self {
        let dim = 1usize << modes;
        Self {
            modes,
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self {
            modes: self.modes,
            m: self.m.adjoint(),
        }
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        Self {
            modes: self.modes,
            m: &self.m * &other.m,
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `tr[self · ρ]`.
    pub fn expectation(&self, rho: &DenseState) -> C64 {
        trace_of_product(&self.m, rho.matrix())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_c(&(&self.m - self.m.adjoint()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        max_abs_c(&(&self.m * self.m.adjoint() - DMatrix::<C64>::identity(dim, dim)))
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        max_abs_c(&(&self.m - &other.m))
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    rho: DenseOperator,
}

impl DenseState {
    pub fn from_density(rho: DenseOperator) -> Result<Self> {
        let herm = rho.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = rho.hermitian_eigenvalues()[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { rho })
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized here.
    pub fn pure(modes: usize, psi: &[C64]) -> Result<Self> {
        let dim = 1usize << modes;
        if psi.len() != dim {
            return Err(Error::InvalidDimension(format!(
                "state vector must have {dim} entries"
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let v = nalgebra::DVector::from_iterator(dim, psi.iter().map(|z| z / norm));
        let m = &v * v.adjoint();
        Ok(Self {
            rho: DenseOperator { modes, m },
        })
    }

    pub fn fock(omega: &FockString) -> Self {
        let modes = omega.len();
        let dim = 1usize << modes;
        let mut m = DMatrix::zeros(dim, dim);
        m[(omega.index(), omega.index())] = ONE;
        Self {
            rho: DenseOperator { modes, m },
        }
    }

    pub fn maximally_mixed(modes: usize) -> Self {
        let dim = 1usize << modes;
        let m = DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
        Self {
            rho: DenseOperator { modes, m },
        }
    }

    /// `Σ_i p_i ρ_i` for probabilities `p_i`.
    pub fn mixture(parts: &[(f64, &DenseState)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let modes = first.1.modes();
        let dim = 1usize << modes;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, state) in parts {
            if state.modes() != modes {
                return Err(Error::InvalidDimension(
                    "mixture components differ in size".into(),
                ));
            }
            m += state.matrix() * C64::new(*p, 0.0);
        }
        Self::from_density(DenseOperator { modes, m })
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &DenseOperator) -> DenseState {
        let m = u.matrix() * self.matrix() * u.matrix().adjoint();
        Self {
            rho: DenseOperator {
                modes: self.modes(),
                m,
            },
        }
    }

    pub fn modes(&self) -> usize {
        self.rho.modes
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho.m
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.rho
    }

    /// `tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        trace_of_product(self.matrix(), self.matrix()).re
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() <= 1e-10
    }

    /// Trace norm `‖self - other‖₁`.
    pub fn trace_distance_norm(&self, other: &DenseState) -> f64 {
        let diff = DenseOperator {
            modes: self.modes(),
            m: self.matrix() - other.matrix(),
        };
        diff.hermitian_eigenvalues().iter().map(|x| x.abs()).sum()
    }
}

/// Pauli monomial `i^phase · X^flip · Z^zmask` on the computational basis.
///
/// Basis index bit `L-1-s` holds site `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Monomial {
    flip: usize,
    zmask: usize,
    phase: u8,
}

impl Monomial {
    fn site_bit(modes: usize, site: usize) -> usize {
        1 << (modes - 1 - site)
    }

    fn single(modes: usize, site: usize, axis: Axis) -> Self {
        let bit = Self::site_bit(modes, site);
        match axis {
            Axis::X => Self {
                flip: bit,
                zmask: 0,
                phase: 0,
            },
            Axis::Z => Self {
                flip: 0,
                zmask: bit,
                phase: 0,
            },
            // Y = i X Z
            Axis::Y => Self {
                flip: bit,
                zmask: bit,
                phase: 1,
            },
        }
    }

    /// `self · other`.
    fn mul(self, other: Monomial) -> Monomial {
        // Z^b X^c = (-1)^{|b∧c|} X^c Z^b
        let swap = ((self.zmask & other.flip).count_ones() % 2) as u8 * 2;
        Monomial {
            flip: self.flip ^ other.flip,
            zmask: self.zmask ^ other.zmask,
            phase: (self.phase + other.phase + swap) % 4,
        }
    }

    /// `(coefficient, row)` with `P|col⟩ = coefficient |row⟩`.
    #[inline]
    fn apply(self, col: usize) -> (C64, usize) {
        let sign = if (self.zmask & col).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        (i_power(self.phase) * sign, col ^ self.flip)
    }

    fn majorana(modes: usize, index: usize) -> Self {
        let site = index / 2;
        let mut m = Monomial {
            flip: 0,
            zmask: 0,
            phase: 0,
        };
        for s in 0..site {
            m = m.mul(Self::single(modes, s, Axis::Z));
        }
        let axis = if index.is_multiple_of(2) { Axis::X } else { Axis::Y };
        m.mul(Self::single(modes, site, axis))
    }

    fn add_to(self, coefficient: C64, target: &mut DMatrix<C64>) {
        for col in 0..target.ncols() {
            let (c, row) = self.apply(col);
            target[(row, col)] += coefficient * c;
        }
    }

    /// `tr[P ρ] = Σ_y ⟨y⊕flip| ... ⟩`, linear in the dimension.
    fn trace_with(self, rho: &DMatrix<C64>) -> C64 {
        (0..rho.ncols())
            .map(|col| {
                let (c, row) = self.apply(col);
                c * rho[(col, row)]
            })
            .sum()
    }
}

fn i_power(p: u8) -> C64 {
    match p % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

fn pauli_2x2(axis: Option<Axis>) -> DMatrix<C64> {
    match axis {
        None => DMatrix::identity(2, 2),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Kronecker product `⊗_s σ^{axis(s)}` over all sites.
fn kron_chain(modes: usize, axis_at: impl Fn(usize) -> Option<Axis>) -> DMatrix<C64> {
    let mut out = pauli_2x2(axis_at(0));
    for s in 1..modes {
        out = out.kronecker(&pauli_2x2(axis_at(s)));
    }
    out
}

/// Jordan-Wigner Majorana matrix `m_index` (0-based) on `L` sites, built
/// from explicit Kronecker products.
pub fn jw_majorana(index: usize, modes: usize) -> Result<DenseOperator> {
    if modes == 0 || index >= 2 * modes {
        return Err(Error::IndexOutOfRange { index, modes });
    }
    let site = index / 2;
    let last = if index.is_multiple_of(2) { Axis::X } else { Axis::Y };
    let m = kron_chain(modes, |s| match s.cmp(&site) {
        std::cmp::Ordering::Less => Some(Axis::Z),
        std::cmp::Ordering::Equal => Some(last),
        std::cmp::Ordering::Greater => None,
    });
    Ok(DenseOperator { modes, m })
}

/// Dense matrix of `phase · P` for a Pauli string on `L` sites.
pub fn pauli_string_matrix(p: &PauliString, modes: usize) -> Result<DenseOperator> {
    if let Some(&(site, _)) = p.factors.iter().find(|(s, _)| *s >= modes) {
        return Err(Error::IndexOutOfRange { index: site, modes });
    }
    let m = kron_chain(modes, |s| {
        p.factors.iter().find(|(fs, _)| *fs == s).map(|(_, a)| *a)
    });
    let (re, im) = p.phase.as_pair();
    Ok(DenseOperator {
        modes,
        m: m * C64::new(re, im),
    })
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn hermitian_exp(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let eig = SymmetricEigen::try_new(h.m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut scaled = eig.eigenvectors.clone();
    for (mut col, &e) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= C64::from_polar(1.0, -t * e);
    }
    DenseOperator::new(h.modes, scaled * eig.eigenvectors.adjoint())
}

/// Dense reference for one chain length.
pub struct ExactOracle {
    modes: usize,
    majoranas: Vec<Monomial>,
}

impl ExactOracle {
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_cap(modes, DEFAULT_ORACLE_CAP)
    }

    pub fn with_cap(modes: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_ORACLE_CAP);
        if modes > cap {
            return Err(Error::OracleCapExceeded { modes, cap });
        }
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "oracle needs at least one mode".into(),
            ));
        }
        let majoranas = (0..2 * modes)
            .map(|j| Monomial::majorana(modes, j))
            .collect();
        Ok(Self { modes, majoranas })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn check_modes(&self, modes: usize) -> Result<()> {
        if modes != self.modes {
            return Err(Error::InvalidDimension(format!(
                "oracle built for {} modes, got {modes}",
                self.modes
            )));
        }
        Ok(())
    }

    /// Dense `m_index`, from the oracle's monomial representation.
    pub fn majorana(&self, index: usize) -> Result<DenseOperator> {
        let mono = *self.majoranas.get(index).ok_or(Error::IndexOutOfRange {
            index,
            modes: self.modes,
        })?;
        let dim = 1usize << self.modes;
        let mut m = DMatrix::zeros(dim, dim);
        mono.add_to(ONE, &mut m);
        Ok(DenseOperator {
            modes: self.modes,
            m,
        })
    }

    /// `H(A) = (i/4) Σ_jk A_jk m_j m_k`.
    pub fn quadratic_hamiltonian(&self, a: &SkewMatrix) -> Result<DenseOperator> {
        self.check_modes(a.modes())?;
        let dim = 1usize << self.modes;
        let mut h = DMatrix::zeros(dim, dim);
        for j in 0..a.dim() {
            for k in (j + 1)..a.dim() {
                let v = a.get(j, k);
                if v != 0.0 {
                    // (i/4)(A_jk m_j m_k + A_kj m_k m_j) = (i/2) A_jk m_j m_k for j ≠ k.
                    let mono = self.majoranas[j].mul(self.majoranas[k]);
                    mono.add_to(I * (0.5 * v), &mut h);
                }
            }
        }
        DenseOperator::new(self.modes, h)
    }

    /// Spin Hamiltonian `-Σ (Jx XX + Jy YY) - Σ B Z` from explicit Pauli products.
    pub fn spin_hamiltonian(&self, params: &ChainParams) -> Result<DenseOperator> {
        self.check_modes(params.sites())?;
        let n = self.modes;
        let dim = 1usize << n;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        let term = |a: usize, axis: Axis, b: Option<usize>| {
            kron_chain(n, |s| (s == a || Some(s) == b).then_some(axis))
        };
        for k in 0..n {
            h -= term(k, Axis::Z, None) * C64::new(params.b()[k], 0.0);
        }
        for k in 0..n.saturating_sub(1) {
            h -= term(k, Axis::X, Some(k + 1)) * C64::new(params.jx()[k], 0.0);
            h -= term(k, Axis::Y, Some(k + 1)) * C64::new(params.jy()[k], 0.0);
        }
        DenseOperator::new(n, h)
    }

    /// Gaussian unitary `exp(-i t H(A))`, whose mode rotation is `exp(tA)`.
    pub fn gaussian_unitary(&self, a: &SkewMatrix, t: f64) -> Result<DenseOperator> {
        hermitian_exp(&self.quadratic_hamiltonian(a)?, t)
    }

    /// `n^(ω) = Σ_k [(1-ω_k) n_k + ω_k (1 - n_k)]`: Hamming distance to `ω`
    /// on the Fock basis.
    pub fn excitation_operator(&self, omega: &FockString) -> Result<DenseOperator> {
        self.check_modes(omega.len())?;
        let dim = 1usize << self.modes;
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            let nu = FockString::from_index(x, self.modes);
            m[(x, x)] = C64::new(nu.hamming(omega) as f64, 0.0);
        }
        DenseOperator::new(self.modes, m)
    }

    /// Witness `W = U (I - n^(ω)) U†`.
    pub fn witness_operator(&self, u: &DenseOperator, omega: &FockString) -> Result<DenseOperator> {
        self.check_modes(u.modes())?;
        let defect = u.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        let n = self.excitation_operator(omega)?;
        let inner = DenseOperator::identity(self.modes).m - n.m;
        DenseOperator::new(self.modes, u.matrix() * inner * u.matrix().adjoint())
    }

    /// `M_jk = (i/2) tr([m_j, m_k] ρ)`.
    pub fn covariance_from_state(&self, rho: &DenseState) -> Result<CovarianceMatrix> {
        self.check_modes(rho.modes())?;
        let dim = 2 * self.modes;
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in (j + 1)..dim {
                // [m_j, m_k] = 2 m_j m_k for j ≠ k.
                let mono = self.majoranas[j].mul(self.majoranas[k]);
                let v = I * mono.trace_with(rho.matrix());
                if v.im.abs() > 1e-10 {
                    return Err(Error::NumericalFailure(format!(
                        "covariance entry ({j},{k}) has imaginary part {:e}",
                        v.im
                    )));
                }
                m[(j, k)] = v.re;
                m[(k, j)] = -v.re;
            }
        }
        CovarianceMatrix::new(SkewMatrix::from_matrix(m)?)
    }

    /// Fock state `|ω⟩` evolved by the Trotter sequence
    /// `U_T = (e^{-iΔt H_B} e^{-iΔt H_J})^T`, or by `e^{-itH}` when `T = 0`.
    pub fn exact_trotter_state(&self, spec: &QuenchSpec) -> Result<DenseState> {
        self.check_modes(spec.params.sites())?;
        let initial = DenseState::fock(&spec.omega);
        let u = match spec.time_step() {
            None => hermitian_exp(&self.spin_hamiltonian(&spec.params)?, spec.t)?,
            Some(dt) => {
                let u_field =
                    hermitian_exp(&self.spin_hamiltonian(&spec.params.field_part())?, dt)?;
                let u_bond = hermitian_exp(&self.spin_hamiltonian(&spec.params.bond_part())?, dt)?;
                let step = u_field.mul(&u_bond);
                let mut u = DenseOperator::identity(self.modes);
                for _ in 0..spec.trotter_steps {
                    u = step.mul(&u);
                }
                u
            }
        };
        Ok(initial.evolve(&u))
    }
}

/// `W = I - Δ⁻¹ Σ_l λ_l P_l` for a pure target and a decomposition
/// `ρ_t + Σ P_l = I` with `tr[ρ_t P_l] = 0` and `0 < Δ = λ_1 ≤ … ≤ λ_N`.
pub fn general_witness(
    target: &DenseState,
    projectors: &[DenseOperator],
    weights: &[f64],
) -> Result<DenseOperator> {
    if projectors.is_empty() || projectors.len() != weights.len() {
        return Err(Error::InvalidDecomposition(format!(
            "{} operators for {} weights",
            projectors.len(),
            weights.len()
        )));
    }
    if !target.is_pure() {
        return Err(Error::InvalidDecomposition("target is not pure".into()));
    }
    if !(weights[0] > 0.0) || weights.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidDecomposition(
            "weights must be positive and nondecreasing".into(),
        ));
    }
    let modes = target.modes();
    let dim = 1usize << modes;
    let mut resolution = target.matrix().clone();
    for (l, p) in projectors.iter().enumerate() {
        if p.modes() != modes {
            return Err(Error::InvalidDecomposition(format!(
                "operator {l} has the wrong size"
            )));
        }
        if p.hermiticity_defect() > DECOMPOSITION_TOL
            || p.hermitian_eigenvalues()[0] < -DECOMPOSITION_TOL
        {
            return Err(Error::InvalidDecomposition(format!(
                "operator {l} is not positive semidefinite"
            )));
        }
        let overlap = trace_of_product(target.matrix(), p.matrix()).norm();
        if overlap > DECOMPOSITION_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "operator {l} overlaps the target (tr = {overlap:e})"
            )));
        }
        resolution += p.matrix();
    }
    let defect = max_abs_c(&(resolution - DMatrix::<C64>::identity(dim, dim)));
    if defect > DECOMPOSITION_TOL {
        return Err(Error::InvalidDecomposition(format!(
            "operators do not resolve the identity (defect {defect:e})"
        )));
    }
    let gap = weights[0];
    let mut w = DMatrix::<C64>::identity(dim, dim);
    for (p, &lambda) in projectors.iter().zip(weights) {
        w -= p.matrix() * C64::new(lambda / gap, 0.0);
    }
    DenseOperator::new(modes, w)
}

/// `F = tr[ρ_t ρ_p]` for a pure target.
pub fn exact_fidelity(target: &DenseState, prep: &DenseState) -> Result<f64> {
    if !target.is_pure() {
        return Err(Error::NotPure {
            defect: (1.0 - target.purity()).abs(),
        });
    }
    if target.modes() != prep.modes() {
        return Err(Error::InvalidDimension("states differ in size".into()));
    }
    Ok(trace_of_product(target.matrix(), prep.matrix()).re)
}

fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    // tr[AB] = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn max_abs_c(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
