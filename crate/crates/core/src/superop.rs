//! Liouville-space superoperators under column-stacking vectorization,
//! vec(X)[i + N·j] = X[i, j], for which vec(A X B) = (Bᵀ ⊗ A) vec(X).

use crate::error::{Error, Result};
use crate::linalg::{self, kron, CMatrix, CVector, C64, I, ZERO};
use crate::model::{DensityMatrix, LindbladModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperKind {
    /// Generator L with d vec(ρ)/dt = L vec(ρ); trace functional annihilated.
    Generator,
    /// Evolution map; trace functional preserved.
    Map,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim_hilbert: usize,
    mat: CMatrix,
    kind: SuperKind,
}

impl Superoperator {
    pub fn new(dim_hilbert: usize, mat: CMatrix, kind: SuperKind) -> Result<Self> {
        let d = dim_hilbert * dim_hilbert;
        if mat.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "superoperator for N = {dim_hilbert} must be {d}x{d}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Superoperator {
            dim_hilbert,
            mat,
            kind,
        })
    }

    pub fn identity(dim_hilbert: usize) -> Self {
        let d = dim_hilbert * dim_hilbert;
        Superoperator {
            dim_hilbert,
            mat: CMatrix::identity(d, d),
            kind: SuperKind::Map,
        }
    }

    pub fn dim_hilbert(&self) -> usize {
        self.dim_hilbert
    }

    pub fn dim_liouville(&self) -> usize {
        self.dim_hilbert * self.dim_hilbert
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn kind(&self) -> SuperKind {
        self.kind
    }

    /// Norm of (vec I)†·mat (generators) or (vec I)†·mat − (vec I)† (maps).
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim_hilbert;
        let mut acc = 0.0;
        for col in 0..self.mat.ncols() {
            let mut s: C64 = (0..n).map(|i| self.mat[(i + n * i, col)]).sum();
            if self.kind == SuperKind::Map && col % (n + 1) == 0 {
                s -= C64::new(1.0, 0.0);
            }
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }

    /// Composition `self ∘ first` (apply `first`, then `self`).
    pub fn after(&self, first: &Superoperator) -> Result<Superoperator> {
        if self.dim_hilbert != first.dim_hilbert {
            return Err(Error::Dimension("composing superoperators of different size".into()));
        }
        Ok(Superoperator {
            dim_hilbert: self.dim_hilbert,
            mat: linalg::matmul(&self.mat, &first.mat),
            kind: SuperKind::Map,
        })
    }

    pub fn apply_vec(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim_liouville() {
            return Err(Error::Dimension(format!(
                "vector of length {} for a {}-dimensional Liouville space",
                v.len(),
                self.dim_liouville()
            )));
        }
        Ok(&self.mat * v)
    }
}

pub fn vectorize(x: &CMatrix) -> CVector {
    // nalgebra storage is already column-major
    CVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &CVector, n: usize) -> Result<CMatrix> {
    if v.len() != n * n {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot be reshaped to {n}x{n}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(n, n, v.as_slice()))
}

/// −i(I⊗H − Hᵀ⊗I)
pub fn commutator_superop(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let id = CMatrix::identity(n, n);
    (kron(&id, h) - kron(&h.transpose(), &id)) * (-I)
}

/// Γ[(L*)⊗L − ½ I⊗(L†L) − ½ (L†L)ᵀ⊗I]
pub fn dissipator_superop(l: &CMatrix, rate: f64) -> CMatrix {
    let n = l.nrows();
    if rate == 0.0 {
        return CMatrix::zeros(n * n, n * n);
    }
    let id = CMatrix::identity(n, n);
    let ldl = l.adjoint() * l;
    let m = kron(&l.conjugate(), l) - kron(&id, &ldl).scale(0.5) - kron(&ldl.transpose(), &id).scale(0.5);
    m.scale(rate)
}

/// L(t) for a model already known to be valid.
pub(crate) fn liouvillian_matrix(model: &LindbladModel, t: f64) -> CMatrix {
    let mut m = commutator_superop(&model.hamiltonian_at(t));
    for (i, jump) in model.jumps().iter().enumerate() {
        if jump.rate == 0.0 {
            continue;
        }
        let op = if jump.is_static() {
            jump.operator.clone()
        } else {
            model.jump_at(i, t)
        };
        m += dissipator_superop(&op, jump.rate);
    }
    m
}

/// The generator L(t) of the Floquet-Lindblad equation at time t.
pub fn build_liouvillian(model: &LindbladModel, t: f64) -> Result<Superoperator> {
    model.ensure_valid()?;
    Ok(Superoperator {
        dim_hilbert: model.dim(),
        mat: liouvillian_matrix(model, t),
        kind: SuperKind::Generator,
    })
}

pub fn apply(sop: &Superoperator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != sop.dim_hilbert {
        return Err(Error::Dimension(format!(
            "{}x{} operator for a superoperator on N = {}",
            rho.dim(),
            rho.dim(),
            sop.dim_hilbert
        )));
    }
    let out = sop.apply_vec(&vectorize(rho.mat()))?;
    DensityMatrix::new(unvectorize(&out, sop.dim_hilbert)?)
}

/// Elementary matrix |i⟩⟨j|.
pub fn elementary(n: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::from_element(n, n, ZERO);
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}
