//! Exact density-matrix algebra for one photon carrying two qubits of
//! structure: polarization (`h`/`v`) and path (reference `0` / signal `1`).
//!
//! The joint basis order is fixed everywhere in this crate as
//! `(h0, h1, v0, v1)` — polarization is the slow index, path the fast one,
//! so a product operator `A (x) B` acts with `A` on polarization and `B` on
//! path. All states are plain 4x4 complex matrices; no approximation beyond
//! f64 arithmetic is involved.

use crate::{check_range, eig, math, Error, Result};
use num_complex::Complex;

/// Complex scalar used throughout.
pub type C = Complex<f64>;

pub(crate) type Mat2 = [[C; 2]; 2];
pub(crate) type Mat4 = [[C; 4]; 4];

/// Largest tolerated deviation from `m == m^dagger`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues may dip this far below zero before a state is rejected.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Traces may exceed one by at most this much.
pub const TRACE_TOL: f64 = 1e-12;
/// Below this trace a state carries no usable population (post-selection
/// and visibility refuse to normalize it).
pub const DEGENERATE_TRACE: f64 = 1e-15;

const ZERO: C = Complex::new(0.0, 0.0);
const ONE: C = Complex::new(1.0, 0.0);

/// Photon polarization along the protocol's analysis basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

/// Which arm of the interferometer the photon occupies.
///
/// The signal path (index 1) illuminates the object; the reference path
/// (index 0) stays inside the apparatus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathLabel {
    Reference,
    Signal,
}

impl Polarization {
    pub const fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl PathLabel {
    pub const fn index(self) -> usize {
        match self {
            PathLabel::Reference => 0,
            PathLabel::Signal => 1,
        }
    }
}

/// One joint basis vector, e.g. `v` polarization on the signal path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub pol: Polarization,
    pub path: PathLabel,
}

impl BasisLabel {
    pub const H0: BasisLabel = BasisLabel::new(Polarization::H, PathLabel::Reference);
    pub const H1: BasisLabel = BasisLabel::new(Polarization::H, PathLabel::Signal);
    pub const V0: BasisLabel = BasisLabel::new(Polarization::V, PathLabel::Reference);
    pub const V1: BasisLabel = BasisLabel::new(Polarization::V, PathLabel::Signal);

    pub const fn new(pol: Polarization, path: PathLabel) -> Self {
        BasisLabel { pol, path }
    }

    /// Position in the fixed `(h0, h1, v0, v1)` ordering.
    pub const fn index(self) -> usize {
        self.pol.index() * 2 + self.path.index()
    }

    /// Inverse of [`BasisLabel::index`]; panics outside `0..4`.
    pub fn from_index(index: usize) -> Self {
        match index {
            0 => Self::H0,
            1 => Self::H1,
            2 => Self::V0,
            3 => Self::V1,
            _ => panic!("basis index {index} outside 0..4"),
        }
    }
}

/// Which paths a polarization operator is applied along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSelector {
    Neither,
    ReferenceOnly,
    SignalOnly,
    Both,
}

impl PathSelector {
    fn selects(self, path_index: usize) -> bool {
        match self {
            PathSelector::Neither => false,
            PathSelector::ReferenceOnly => path_index == 0,
            PathSelector::SignalOnly => path_index == 1,
            PathSelector::Both => true,
        }
    }
}

/// A 2x2 complex operator on a single qubit factor.
///
/// Constructors cover the waveplate families used by the receiver; the same
/// type doubles as the path-mixing rotation since that is mathematically the
/// identical 2x2 family (the method it is passed to decides which tensor
/// factor it acts on).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolOperator {
    m: Mat2,
}

impl PolOperator {
    pub const fn from_matrix(m: Mat2) -> Self {
        PolOperator { m }
    }

    pub const fn identity() -> Self {
        Self::from_matrix([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Proper rotation `[[cos t, -sin t], [sin t, cos t]]` (determinant +1).
    pub fn rotator(theta: f64) -> Self {
        let (c, s) = (math::cos(theta), math::sin(theta));
        Self::from_matrix([
            [C::new(c, 0.0), C::new(-s, 0.0)],
            [C::new(s, 0.0), C::new(c, 0.0)],
        ])
    }

    /// Half-wave plate at physical angle `kappa`:
    /// `[[cos 2k, sin 2k], [sin 2k, -cos 2k]]` (determinant -1, involutive).
    ///
    /// `hwp(t / 2)` realizes the same column magnitudes as `rotator(t)`; the
    /// two differ by a sign pattern (a reflection instead of a rotation).
    pub fn hwp(kappa: f64) -> Self {
        let (c, s) = (math::cos(2.0 * kappa), math::sin(2.0 * kappa));
        Self::from_matrix([
            [C::new(c, 0.0), C::new(s, 0.0)],
            [C::new(s, 0.0), C::new(-c, 0.0)],
        ])
    }

    pub const fn pauli_x() -> Self {
        Self::from_matrix([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn pauli_y() -> Self {
        Self::from_matrix([
            [ZERO, Complex::new(0.0, -1.0)],
            [Complex::new(0.0, 1.0), ZERO],
        ])
    }

    pub const fn pauli_z() -> Self {
        Self::from_matrix([[ONE, ZERO], [ZERO, Complex::new(-1.0, 0.0)]])
    }

    pub const fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C {
        self.m[row][col]
    }

    /// `self * other` (matrix product, `other` applied first).
    pub fn compose(&self, other: &PolOperator) -> PolOperator {
        let a = &self.m;
        let b = &other.m;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        PolOperator { m: out }
    }
}

/// Density matrix of the polarization-path photon (possibly sub-normalized:
/// lossy channels shrink the trace, which per-trial statistics keep as-is).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolPathState {
    m: Mat4,
}

impl PolPathState {
    /// The protocol's entangled probe
    /// `(|h>|0> - |v>|1>) / sqrt(2)`: `h` travels the reference path, `v`
    /// the signal path, with a definite relative phase between the branches.
    pub fn entangled() -> Self {
        let mut m = [[ZERO; 4]; 4];
        let half = C::new(0.5, 0.0);
        let h0 = BasisLabel::H0.index();
        let v1 = BasisLabel::V1.index();
        m[h0][h0] = half;
        m[v1][v1] = half;
        m[h0][v1] = -half;
        m[v1][h0] = -half;
        PolPathState { m }
    }

    /// The classical baseline: a polarization superposition
    /// `(|h> - |v>) / sqrt(2)` sent down the signal path only, with no
    /// polarization-path correlation (the reference-path block is zero).
    pub fn classical_signal() -> Self {
        let mut m = [[ZERO; 4]; 4];
        let half = C::new(0.5, 0.0);
        let h1 = BasisLabel::H1.index();
        let v1 = BasisLabel::V1.index();
        m[h1][h1] = half;
        m[v1][v1] = half;
        m[h1][v1] = -half;
        m[v1][h1] = -half;
        PolPathState { m }
    }

    /// Fully mixed polarization confined to the signal path,
    /// `(I_pol / 2) (x) |1><1|` — the stand-in for unpolarized background
    /// light that entered through the object port.
    pub fn unpolarized_signal() -> Self {
        let mut m = [[ZERO; 4]; 4];
        let half = C::new(0.5, 0.0);
        m[BasisLabel::H1.index()][BasisLabel::H1.index()] = half;
        m[BasisLabel::V1.index()][BasisLabel::V1.index()] = half;
        PolPathState { m }
    }

    /// Fully mixed state on both factors, `I_4 / 4`.
    pub fn maximally_mixed() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C::new(0.25, 0.0);
        }
        PolPathState { m }
    }

    /// Builds a state from a raw matrix, enforcing hermiticity, positivity,
    /// and the trace bound.
    pub fn from_matrix(m: Mat4) -> Result<Self> {
        let state = PolPathState { m };
        state.validate()?;
        Ok(state)
    }

    pub const fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn entry(&self, row: BasisLabel, col: BasisLabel) -> C {
        self.m[row.index()][col.index()]
    }

    /// Real parts of the diagonal in `(h0, h1, v0, v1)` order.
    pub fn diagonal(&self) -> [f64; 4] {
        [
            self.m[0][0].re,
            self.m[1][1].re,
            self.m[2][2].re,
            self.m[3][3].re,
        ]
    }

    /// Probability weight on one joint outcome (diagonal entry by label).
    pub fn population(&self, label: BasisLabel) -> f64 {
        self.m[label.index()][label.index()].re
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Checks the state invariants: hermiticity within [`HERMITICITY_TOL`],
    /// eigenvalues above [`EIGENVALUE_FLOOR`], trace in `(0, 1 + TRACE_TOL]`.
    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            for j in 0..4 {
                let d = self.m[i][j] - self.m[j][i].conj();
                if math::hypot(d.re, d.im) > HERMITICITY_TOL {
                    return Err(Error::InvalidState("matrix is not hermitian"));
                }
            }
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + TRACE_TOL) {
            return Err(Error::InvalidState("trace outside (0, 1]"));
        }
        let eigs = self.eigenvalues();
        if eigs.iter().any(|&e| e < EIGENVALUE_FLOOR) {
            return Err(Error::InvalidState("negative eigenvalue"));
        }
        Ok(())
    }

    /// Eigenvalues of the (hermitian) matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        eig::eigvals_hermitian4(&self.m)
    }

    /// Applies a polarization operator along the selected paths:
    /// `E rho E^dagger` with
    /// `E = sum_(q selected) op (x) |q><q| + sum_(q not) 1 (x) |q><q|`.
    pub fn apply_pol(&self, op: &PolOperator, paths: PathSelector) -> Self {
        let mut e = [[ZERO; 4]; 4];
        for p in 0..2 {
            for pp in 0..2 {
                for q in 0..2 {
                    let val = if paths.selects(q) {
                        op.m[p][pp]
                    } else if p == pp {
                        ONE
                    } else {
                        ZERO
                    };
                    e[p * 2 + q][pp * 2 + q] = val;
                }
            }
        }
        self.conjugated_by(&e)
    }

    /// Applies a 2x2 operator to the path factor: `(1 (x) op) rho (..)^dagger`.
    pub fn apply_to_path(&self, op: &PolOperator) -> Self {
        let mut e = [[ZERO; 4]; 4];
        for p in 0..2 {
            for q in 0..2 {
                for qq in 0..2 {
                    e[p * 2 + q][p * 2 + qq] = op.m[q][qq];
                }
            }
        }
        self.conjugated_by(&e)
    }

    /// Partial trace over the path factor: the photon's 2x2 polarization
    /// state regardless of which arm it took.
    pub fn pol_marginal(&self) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for p in 0..2 {
            for pp in 0..2 {
                for q in 0..2 {
                    out[p][pp] += self.m[p * 2 + q][pp * 2 + q];
                }
            }
        }
        out
    }

    /// The (sub-normalized) 2x2 polarization block conditioned on one path,
    /// `<q| rho |q>`.
    pub fn path_block(&self, path: PathLabel) -> Mat2 {
        let q = path.index();
        let mut out = [[ZERO; 2]; 2];
        for p in 0..2 {
            for pp in 0..2 {
                out[p][pp] = self.m[p * 2 + q][pp * 2 + q];
            }
        }
        out
    }

    /// Negativity across the polarization|path cut: sum of the absolute
    /// values of the negative eigenvalues of the partial transpose. Zero
    /// exactly for product/separable states, 1/2 for the maximally
    /// entangled probe.
    pub fn negativity(&self) -> f64 {
        let mut pt = [[ZERO; 4]; 4];
        for p in 0..2 {
            for q in 0..2 {
                for pp in 0..2 {
                    for qq in 0..2 {
                        // transpose the path indices only
                        pt[p * 2 + q][pp * 2 + qq] = self.m[p * 2 + qq][pp * 2 + q];
                    }
                }
            }
        }
        let eigs = eig::eigvals_hermitian4(&pt);
        eigs.iter().filter(|&&e| e < 0.0).map(|e| -e).sum()
    }

    /// `factor * rho` (entry-wise; used to build mixtures and channels).
    pub fn scale(&self, factor: f64) -> Self {
        let f = C::new(factor, 0.0);
        let mut m = self.m;
        for row in m.iter_mut() {
            for cell in row.iter_mut() {
                *cell *= f;
            }
        }
        PolPathState { m }
    }

    /// Entry-wise sum with another state (mixture building block).
    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.m;
        for (row, orow) in m.iter_mut().zip(other.m.iter()) {
            for (cell, ocell) in row.iter_mut().zip(orow.iter()) {
                *cell += *ocell;
            }
        }
        PolPathState { m }
    }

    /// Largest entry-wise absolute difference from another state.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let d = self.m[i][j] - other.m[i][j];
                let mag = math::hypot(d.re, d.im);
                if mag > worst {
                    worst = mag;
                }
            }
        }
        worst
    }

    /// `u * rho * u^dagger` for an arbitrary 4x4 operator `u` (channels in
    /// this crate are built from these conjugations plus convex sums).
    pub(crate) fn conjugated_by(&self, u: &Mat4) -> Self {
        let urho = mul4(u, &self.m);
        let udag = adjoint4(u);
        PolPathState {
            m: mul4(&urho, &udag),
        }
    }

    /// Normalizes to unit trace; errors if the trace is degenerate.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr < DEGENERATE_TRACE {
            return Err(Error::DegenerateState("trace too small to normalize"));
        }
        Ok(self.scale(1.0 / tr))
    }
}

/// Loss operator for an object of reflectivity `eta` sitting in the signal
/// path: `|h><h| (x) |0><0| + sqrt(eta) |v><v| (x) |1><1|`, i.e.
/// `diag(1, 0, 0, sqrt(eta))` in the fixed basis. Not trace preserving.
pub(crate) fn loss_operator(eta: f64) -> Result<Mat4> {
    check_range("eta", eta, 0.0, 1.0)?;
    let mut t = [[ZERO; 4]; 4];
    t[BasisLabel::H0.index()][BasisLabel::H0.index()] = ONE;
    t[BasisLabel::V1.index()][BasisLabel::V1.index()] = C::new(math::sqrt(eta), 0.0);
    Ok(t)
}

pub(crate) fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub(crate) fn adjoint4(a: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}
