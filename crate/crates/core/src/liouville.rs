//! Lindblad dissipators, the Liouvillian superoperator and steady states.
//!
//! The generator is
//!
//! ```text
//! ρ̇ = −i[H, ρ] + 2κ L(a) + 2γ L(σ) + 2P_a L(a†)
//! L(C) = C ρ C† − ½ C†C ρ − ½ ρ C†C
//! ```
//!
//! acting on column-stacked `vec(ρ)`, so that
//! `−i[H,·] ↦ −i(1⊗H − Hᵀ⊗1)` and `L(C) ↦ C̄⊗C − ½ 1⊗C†C − ½ (C†C)ᵀ⊗1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use crate::operators::{build_operators, OperatorSet, SystemParams};

/// Steady-state eigenvalues below this are reported as a positivity failure.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

/// Largest photon population allowed in the top Fock level of a converged
/// steady state.
pub const TOP_LEVEL_TOLERANCE: f64 = 1e-5;

/// Truncation escalation stops here.
pub const MAX_N_MAX: usize = 9;

const HALF: Complex64 = Complex64::new(0.5, 0.0);

/// One weighted collapse channel, `weight · L(collapse)`.
#[derive(Clone, Debug)]
pub struct DissipatorSpec {
    pub collapse: ComplexMatrix,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

/// Density matrix with unit trace, Hermitian and positive within round-off.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGENVALUE_FLOOR: f64 = -1e-10;

    /// Validates the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        if matrix.hermiticity_defect() > Self::HERMITICITY_TOL {
            return Err(Error::InvalidParams {
                field: "rho",
                reason: "not Hermitian".into(),
            });
        }
        if (matrix.trace() - Complex64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidParams {
                field: "rho",
                reason: format!("trace {} ≠ 1", matrix.trace()),
            });
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < Self::EIGENVALUE_FLOOR {
            return Err(Error::PositivityViolation {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { matrix })
    }

    /// Pure-state projector onto basis vector `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// `C ρ C† − ½ C†C ρ − ½ ρ C†C`.
pub fn dissipator_action(c: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let cd = c.adjoint();
    let cdc = cd.matmul(c);
    let jump = c.matmul(rho).matmul(&cd);
    let anti = &cdc.matmul(rho) + &rho.matmul(&cdc);
    &jump - &anti.scale(HALF)
}

pub fn hamiltonian_superoperator(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    let minus_i = Complex64::new(0.0, -1.0);
    (&id.kron(h) - &h.transpose().kron(&id)).scale(minus_i)
}

pub fn dissipator_superoperator(c: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(c.rows());
    let cdc = c.adjoint().matmul(c);
    let jump = c.conj().kron(c);
    let anti = &id.kron(&cdc) + &cdc.transpose().kron(&id);
    &jump - &anti.scale(HALF)
}

impl Liouvillian {
    pub fn from_parts(h: &ComplexMatrix, dissipators: &[DissipatorSpec]) -> Result<Self> {
        let dim = h.rows();
        let mut matrix = hamiltonian_superoperator(h);
        for spec in dissipators {
            if spec.collapse.rows() != dim || !spec.collapse.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "collapse operator {}x{} on a {dim}-dimensional space",
                    spec.collapse.rows(),
                    spec.collapse.cols()
                )));
            }
            if !spec.weight.is_finite() || spec.weight < 0.0 {
                return Err(Error::InvalidParams {
                    field: "weight",
                    reason: format!("dissipator weight {}", spec.weight),
                });
            }
            if spec.weight == 0.0 {
                continue;
            }
            let d = dissipator_superoperator(&spec.collapse).scale(Complex64::new(spec.weight, 0.0));
            matrix = &matrix + &d;
        }
        Ok(Self { dim, matrix })
    }

    /// `L ρ` as a matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = self.matrix.mul_vec(&rho.vectorize());
        ComplexMatrix::unvectorize(&v, self.dim).expect("dimension fixed at construction")
    }

    /// `max_j |Σ_k L[(k,k), j]|`: how far the trace functional is from
    /// annihilating the generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|j| {
                (0..d)
                    .map(|k| self.matrix[(numerics::diagonal_index(k, d), j)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Liouvillian of the pumped (or unpumped) cavity-dot system with weights
/// 2κ, 2γ and 2P_a.
pub fn build_liouvillian(ops: &OperatorSet, params: &SystemParams, include_pump: bool) -> Result<Liouvillian> {
    params.validate()?;
    if include_pump {
        params.check_pump()?;
    }
    let mut dissipators = vec![
        DissipatorSpec {
            collapse: ops.a.clone(),
            weight: 2.0 * params.kappa_me(),
        },
        DissipatorSpec {
            collapse: ops.sigma.clone(),
            weight: 2.0 * params.gamma,
        },
    ];
    if include_pump {
        dissipators.push(DissipatorSpec {
            collapse: ops.a.adjoint(),
            weight: 2.0 * params.pump,
        });
    }
    Liouvillian::from_parts(&ops.h, &dissipators)
}

/// Unique steady state of `L`, Hermitized and checked for positivity.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let v = numerics::sector_null_vector(&l.matrix, l.dim)?;
    let matrix = ComplexMatrix::unvectorize(&v, l.dim)?;
    let min_eig = matrix.hermitian_eigenvalues()[0];
    if min_eig < POSITIVITY_FLOOR {
        return Err(Error::PositivityViolation {
            min_eigenvalue: min_eig,
        });
    }
    Ok(DensityMatrix { matrix })
}

/// `Tr(ρ A)`.
pub fn expectation(rho: &DensityMatrix, a: &ComplexMatrix) -> Complex64 {
    trace_product(rho.matrix(), a)
}

/// `Tr(X A)` without forming the product.
pub fn trace_product(x: &ComplexMatrix, a: &ComplexMatrix) -> Complex64 {
    assert_eq!(x.rows(), a.cols());
    assert_eq!(x.cols(), a.rows());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            acc += x[(i, j)] * a[(j, i)];
        }
    }
    acc
}

/// Steady state together with the operators and generator that produced it.
#[derive(Clone, Debug)]
pub struct SteadySolution {
    pub params: SystemParams,
    pub ops: OperatorSet,
    pub liouvillian: Liouvillian,
    pub rho: DensityMatrix,
}

impl SteadySolution {
    /// Population of the highest retained photon number.
    pub fn top_level_population(&self) -> f64 {
        expectation(&self.rho, &self.ops.photon_projector(self.ops.n_max)).re
    }

    pub fn photon_number(&self) -> f64 {
        expectation(&self.rho, &self.ops.number()).re
    }
}

pub fn solve_steady(params: &SystemParams, include_pump: bool) -> Result<SteadySolution> {
    let ops = build_operators(params)?;
    let liouvillian = build_liouvillian(&ops, params, include_pump)?;
    let rho = steady_state(&liouvillian)?;
    Ok(SteadySolution {
        params: *params,
        ops,
        liouvillian,
        rho,
    })
}

/// Steady state with truncation escalation: starting from `params.n_max`,
/// retries with n_max + 2 (capped at `max_n_max`) while the top Fock level
/// holds more than [`TOP_LEVEL_TOLERANCE`] or positivity fails.
pub fn converged_steady_state(
    params: &SystemParams,
    include_pump: bool,
    max_n_max: usize,
) -> Result<SteadySolution> {
    let mut trial = *params;
    loop {
        let outcome = solve_steady(&trial, include_pump);
        let retry_error = match outcome {
            Ok(sol) => {
                let top = sol.top_level_population();
                if top <= TOP_LEVEL_TOLERANCE {
                    return Ok(sol);
                }
                Error::TruncationNotConverged {
                    n_max: trial.n_max,
                    top_population: top,
                }
            }
            Err(e @ Error::PositivityViolation { .. }) => e,
            Err(e) => return Err(e),
        };
        if trial.n_max >= max_n_max {
            return Err(retry_error);
        }
        log::debug!("{retry_error}; escalating truncation");
        trial.n_max = (trial.n_max + 2).min(max_n_max);
    }
}
