"""Dense complex linear algebra helpers shared by the network and engine.

Density matrices are vectorized row-major (``rho.reshape(-1)``), so that
``vec(A @ X @ B) == kron(A, B.T) @ vec(X)``.
"""

import numpy as np

DEFAULT_TOL = 1e-10
HERMITIAN_ATOL = 1e-12


def vec(rho):
    return np.asarray(rho).reshape(-1)


def unvec(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {dim}x{dim} matrix")
    return v.reshape(dim, dim)


def is_hermitian(a, atol=HERMITIAN_ATOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T), initial=0.0) < atol


def commutator_superop(h):
    """Superoperator of ``X -> -i[H, X]``."""
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def dissipator_superop(v):
    """Superoperator of ``X -> V X V^+ - {V^+ V, X}/2``."""
    eye = np.eye(v.shape[0])
    vdv = v.conj().T @ v
    return np.kron(v, v.conj()) - 0.5 * np.kron(vdv, eye) - 0.5 * np.kron(eye, vdv.T)


def null_space(a, tol=DEFAULT_TOL):
    """Orthonormal basis of the numerical kernel of a square matrix.

    Singular values below ``tol * sigma_max`` are treated as zero. Returns a
    list of 1-D arrays (possibly empty).
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"null_space needs a square matrix, got shape {a.shape}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = a.shape[0]
    if n == 0:
        return []
    _, s, vh = np.linalg.svd(a)
    smax = s[0]
    if smax == 0.0:
        return [row for row in np.eye(n, dtype=np.result_type(a, float))]
    rank = int(np.sum(s > tol * smax))
    return [vh[k].conj() for k in range(rank, n)]


def rk4_propagator(liouvillian, dt):
    """One classic fourth-order Runge-Kutta step for the linear ODE ``x' = L x``.

    For a linear generator the four stages collapse into the degree-4
    Taylor polynomial of ``exp(dt L)``.
    """
    hl = dt * np.asarray(liouvillian)
    n = hl.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ hl / k
        out = out + term
    return out


def integrate_master_equation(liouvillian, rho0, t_final, dt=None):
    """Evolve ``rho0`` to ``t_final`` with fixed-step RK4 on the vectorized state.

    The default step is ``0.01 / ||L||_2``. Since every step applies the same
    propagator matrix, the ``n`` steps are taken by repeated squaring; the
    result equals the stepwise iteration up to rounding.
    """
    liouvillian = np.asarray(liouvillian)
    rho0 = np.asarray(rho0)
    dim = rho0.shape[0]
    if rho0.ndim != 2 or rho0.shape[1] != dim:
        raise ValueError("rho0 must be a square matrix")
    if liouvillian.shape != (dim * dim, dim * dim):
        raise ValueError(
            f"liouvillian shape {liouvillian.shape} does not act on {dim}x{dim} density matrices"
        )
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if dt is not None and not dt > 0:
        raise ValueError("dt must be positive")
    norm = np.linalg.norm(liouvillian, 2)
    if norm == 0.0 or t_final == 0:
        return rho0.astype(complex)
    if dt is None:
        dt = 0.01 / norm
    steps = max(1, int(np.ceil(t_final / dt - 1e-9)))
    step = rk4_propagator(liouvillian, t_final / steps)
    prop = np.linalg.matrix_power(step, steps)
    return unvec(prop @ vec(rho0).astype(complex), dim)
