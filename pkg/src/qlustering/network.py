"""Tight-binding transport network, its GKSL generator and steady-state currents.

State space is the vacuum plus one level per network site. In the
``(d + 1)``-dimensional basis index 0 is the vacuum and index ``k + 1`` is
site ``k``. Sites are ordered input layer, hidden layer, output layer.
All rates and hopping amplitudes share one energy unit.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .numerics import DEFAULT_TOL, commutator_superop, dissipator_superop, null_space, unvec

DEFAULT_GAMMA_IN = 1.0
DEFAULT_GAMMA_OUT = 1.0

MASK_POLICIES = ("open", "layered", "full")
# strong dephasing makes the site block stiff (rcond ~ 1e-11) without making it singular
SINGULAR_RCOND = 1e3 * np.finfo(float).eps


class SteadyStateError(RuntimeError):
    pass


class DegenerateSteadyState(SteadyStateError):
    """The generator has more than one stationary state (dark or disconnected network)."""


class NoSteadyState(SteadyStateError):
    """No kernel vector was found at the requested tolerance."""


def layer_mask(L, M, q, policy="open", allow_onsite=False):
    """Symmetric boolean adjacency over the ``L + M + q`` sites.

    ``layered`` allows only input-hidden and hidden-output edges. ``open``
    forbids only direct input-output edges. ``full`` allows everything.
    The diagonal is set from ``allow_onsite``.
    """
    if policy not in MASK_POLICIES:
        raise ValueError(f"unknown mask policy {policy!r}, expected one of {MASK_POLICIES}")
    d = L + M + q
    layer = np.repeat([0, 1, 2], [L, M, q])
    a, b = np.meshgrid(layer, layer, indexing="ij")
    if policy == "full":
        mask = np.ones((d, d), dtype=bool)
    elif policy == "open":
        mask = ~(((a == 0) & (b == 2)) | ((a == 2) & (b == 0)))
    else:
        mask = np.abs(a - b) == 1
    np.fill_diagonal(mask, allow_onsite)
    return mask


@dataclass(frozen=True)
class NetworkTopology:
    L: int
    M: int
    q: int
    mask: np.ndarray = None
    allow_onsite: bool = False
    policy: str = "open"

    def __post_init__(self):
        if self.L < 1 or self.M < 0 or self.q < 1:
            raise ValueError(f"invalid architecture {self.L}-{self.M}-{self.q}")
        if self.mask is None:
            mask = layer_mask(self.L, self.M, self.q, self.policy, self.allow_onsite)
        else:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != (self.d, self.d):
                raise ValueError(f"mask shape {mask.shape} does not match d = {self.d}")
            if not np.array_equal(mask, mask.T):
                raise ValueError("mask must be symmetric")
            object.__setattr__(self, "policy", "custom")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def d(self):
        return self.L + self.M + self.q

    @property
    def input_sites(self):
        return list(range(self.L))

    @property
    def hidden_sites(self):
        return list(range(self.L, self.L + self.M))

    @property
    def output_sites(self):
        return list(range(self.L + self.M, self.d))

    def allowed_entries(self):
        """Upper-triangle (i <= j) index pairs that may carry a hopping term."""
        i, j = np.nonzero(np.triu(self.mask))
        return list(zip(i.tolist(), j.tolist()))

    def __repr__(self):
        return f"NetworkTopology({self.L}-{self.M}-{self.q}, policy={self.policy!r})"


@dataclass(frozen=True)
class Hamiltonian:
    """Real symmetric hopping matrix on a topology."""

    topology: NetworkTopology
    h: np.ndarray
    h_max: float = None

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        d = self.topology.d
        if h.shape != (d, d):
            raise ValueError(f"hopping matrix shape {h.shape} does not match d = {d}")
        if not np.array_equal(h, h.T):
            raise ValueError("hopping matrix must be symmetric")
        if np.any(h[~self.topology.mask] != 0):
            raise ValueError("hopping matrix has entries on edges forbidden by the mask")
        if self.h_max is not None and np.max(np.abs(h), initial=0.0) > self.h_max:
            raise ValueError(f"hopping amplitude exceeds h_max = {self.h_max}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @classmethod
    def random(cls, topology, rng, h_max=2.0):
        h = np.zeros((topology.d, topology.d))
        for i, j in topology.allowed_entries():
            h[i, j] = h[j, i] = rng.uniform(-h_max, h_max)
        return cls(topology, h, h_max)

    def with_entry(self, i, j, value):
        h = self.h.copy()
        h[i, j] = h[j, i] = value
        return Hamiltonian(self.topology, h, self.h_max)

    @property
    def d(self):
        return self.topology.d


@dataclass(frozen=True)
class LindbladSpec:
    psi: np.ndarray
    output_sites: tuple
    gamma_in: float = DEFAULT_GAMMA_IN
    gamma_out: float = DEFAULT_GAMMA_OUT
    gamma_dephase: float = 0.0

    def __post_init__(self):
        psi = np.array(self.psi, dtype=complex).reshape(-1)
        if not np.isclose(np.linalg.norm(psi), 1.0, rtol=0, atol=1e-10):
            raise ValueError(f"injection vector must be unit norm, got {np.linalg.norm(psi)}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        outs = tuple(int(r) for r in self.output_sites)
        if len(set(outs)) != len(outs):
            raise ValueError("output sites must be distinct")
        object.__setattr__(self, "output_sites", outs)
        for name in ("gamma_in", "gamma_out", "gamma_dephase"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def for_topology(cls, topology, psi=None, **rates):
        if psi is None:
            psi = np.eye(topology.L)[0]
        return cls(psi=psi, output_sites=tuple(topology.output_sites), **rates)

    def with_psi(self, psi):
        return replace(self, psi=psi)

    def check(self, topology):
        if self.psi.size != topology.L:
            raise ValueError(f"psi has length {self.psi.size}, network has L = {topology.L} input sites")
        outs = set(topology.output_sites)
        bad = [r for r in self.output_sites if r not in outs]
        if bad:
            raise ValueError(f"output sites {bad} are not in the output layer {sorted(outs)}")


def build_liouvillian(H, spec):
    """Superoperator of the GKSL generator on the vacuum + single-exciton space."""
    topo = H.topology
    spec.check(topo)
    d = topo.d
    dim = d + 1
    ham = np.zeros((dim, dim), dtype=complex)
    ham[1:, 1:] = H.h
    gen = commutator_superop(ham)

    if spec.gamma_in > 0:
        v_in = np.zeros((dim, dim), dtype=complex)
        v_in[1 : topo.L + 1, 0] = np.sqrt(spec.gamma_in) * spec.psi
        gen = gen + dissipator_superop(v_in)
    if spec.gamma_out > 0:
        for r in spec.output_sites:
            v_out = np.zeros((dim, dim), dtype=complex)
            v_out[0, r + 1] = np.sqrt(spec.gamma_out)
            gen = gen + dissipator_superop(v_out)
    if spec.gamma_dephase > 0:
        for j in range(d):
            v_dep = np.zeros((dim, dim), dtype=complex)
            v_dep[j + 1, j + 1] = np.sqrt(spec.gamma_dephase)
            gen = gen + dissipator_superop(v_dep)
    return gen


def steady_state(liouvillian, tol=DEFAULT_TOL):
    """Unique stationary density matrix of a generator, from its null space."""
    kernel = null_space(liouvillian, tol)
    if not kernel:
        raise NoSteadyState("generator has no kernel at tolerance %g" % tol)
    if len(kernel) > 1:
        raise DegenerateSteadyState(f"generator kernel has dimension {len(kernel)}")
    rho = unvec(kernel[0])
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise NoSteadyState("kernel vector is traceless")
    return rho / tr


def output_currents(rho_s, spec):
    """Extraction current ``gamma_out * rho[r, r]`` at each output port, in port order."""
    rho_s = np.asarray(rho_s)
    idx = np.asarray(spec.output_sites, dtype=int) + 1
    if rho_s.ndim != 2 or rho_s.shape[0] != rho_s.shape[1] or (idx.size and idx.max() >= rho_s.shape[0]):
        raise ValueError("density matrix does not cover the output sites")
    return spec.gamma_out * np.real(np.diagonal(rho_s)[idx])


def injection_current(rho_s, spec):
    """Current entering through the injection dissipator, ``gamma_in * rho[vac, vac]``."""
    return spec.gamma_in * float(np.real(np.asarray(rho_s)[0, 0]))


def currents_for_input(H, base_spec, psi):
    spec = base_spec.with_psi(psi)
    return output_currents(steady_state(build_liouvillian(H, spec)), spec)


class CurrentSolver:
    """Steady-state currents for many inputs through one Hamiltonian.

    The stationary state has no vacuum-site coherence, and its site block
    solves ``S[X] = -gamma_in * rho_vac * |psi><psi|`` where ``S`` is the
    site-block generator: coherent evolution under the non-Hermitian
    ``H_eff = H - i gamma_out/2 P_out`` plus dephasing. ``S`` does not depend
    on the input, so it is factored once and reused for every input.

    Without dephasing ``S`` is diagonalized through the eigenvectors of
    ``H_eff`` (``method="eig"``); otherwise it is LU-factored as a dense
    ``d^2 x d^2`` matrix (``method="lu"``). ``"auto"`` picks eig when possible.
    """

    def __init__(self, H, spec, tol=DEFAULT_TOL, method="auto"):
        topo = H.topology
        spec.check(topo)
        self.topology = topo
        self.spec = spec
        self.d = d = topo.d
        self.outputs = outs = np.asarray(spec.output_sites, dtype=int)
        h_eff = H.h.astype(complex)
        h_eff[outs, outs] -= 0.5j * spec.gamma_out
        if method == "auto":
            method = "lu" if spec.gamma_dephase > 0 else "eig"
        if method == "eig" and spec.gamma_dephase > 0:
            raise ValueError("eig method cannot handle dephasing")
        self.method = method
        if method == "eig":
            self._init_eig(h_eff, tol)
        elif method == "lu":
            self._init_lu(h_eff, tol)
        else:
            raise ValueError(f"unknown method {method!r}")

    def _init_eig(self, h_eff, tol):
        lam, vecs = np.linalg.eig(h_eff)
        scale = max(1.0, np.abs(lam).max())
        if lam.imag.max() > -tol * scale:
            raise DegenerateSteadyState(f"H_eff has a non-decaying mode (Im lambda = {lam.imag.max():.3g})")
        vinv = np.linalg.inv(vecs)
        if np.linalg.norm(vecs) * np.linalg.norm(vinv) > 1.0 / tol:
            # near an exceptional point; the dense solve is reliable there
            self.method = "lu"
            self._init_lu(h_eff, tol)
            return
        self._vecs = vecs
        self._vinv = vinv
        # Y = V Z V^+ with Z_ab = -i phi_a conj(phi_b) / (lam_a - conj(lam_b))
        self._kern = kern = -1j / (lam[:, None] - lam.conj()[None, :])
        vo = vecs[self.outputs]
        self._out_forms = vo[:, :, None] * vo.conj()[:, None, :] * kern
        self._trace_form = (vecs.conj().T @ vecs).T * kern

    def _init_lu(self, h_eff, tol):
        d = self.d
        eye = np.eye(d)
        site_gen = -1j * (np.kron(h_eff, eye) - np.kron(eye, h_eff.conj()))
        if self.spec.gamma_dephase > 0:
            offdiag = 1.0 - eye.reshape(-1)
            site_gen[np.diag_indices(d * d)] -= self.spec.gamma_dephase * offdiag
        anorm = np.abs(site_gen).sum(axis=0).max()
        self._lu = linalg.lu_factor(site_gen, check_finite=False)
        rcond, info = linalg.lapack.zgecon(self._lu[0], anorm, norm="1")
        self.rcond = rcond
        if info != 0 or not rcond > SINGULAR_RCOND:
            raise DegenerateSteadyState(f"site-block generator is singular (rcond = {rcond:.3g})")

    def densities(self, psis):
        """Full ``(N, d+1, d+1)`` steady states for the rows of ``psis``."""
        y = self._site_blocks(psis)
        rho_vac = self._rho_vac(np.real(np.trace(y, axis1=1, axis2=2)))
        n, d = y.shape[0], self.d
        rho = np.zeros((n, d + 1, d + 1), dtype=complex)
        rho[:, 0, 0] = rho_vac
        rho[:, 1:, 1:] = self.spec.gamma_in * rho_vac[:, None, None] * y
        return 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))

    def currents(self, psis):
        """``(N, q)`` array of output currents for the rows of ``psis``."""
        src = self._sources(psis)
        if self.method == "eig":
            phi = src @ self._vinv.T
            pops = np.real((np.matmul(phi, self._out_forms) * phi.conj()).sum(axis=-1)).T
            tr = np.real(((phi @ self._trace_form) * phi.conj()).sum(axis=-1))
        else:
            y = self._site_blocks(psis)
            pops = np.real(y[:, self.outputs, self.outputs])
            tr = np.real(np.trace(y, axis1=1, axis2=2))
        rho_vac = self._rho_vac(tr)
        return self.spec.gamma_out * self.spec.gamma_in * rho_vac[:, None] * pops

    def _rho_vac(self, site_trace):
        return 1.0 / (1.0 + self.spec.gamma_in * site_trace)

    def _sources(self, psis):
        psis = np.atleast_2d(np.asarray(psis, dtype=complex))
        n, L = psis.shape
        if L != self.topology.L:
            raise ValueError(f"inputs have dimension {L}, network has L = {self.topology.L}")
        src = np.zeros((n, self.d), dtype=complex)
        src[:, :L] = psis
        return src

    def _site_blocks(self, psis):
        """Site blocks ``Y`` with ``S[Y] = -|psi><psi|``, shape ``(N, d, d)``."""
        src = self._sources(psis)
        n, d = src.shape
        if self.method == "eig":
            phi = src @ self._vinv.T
            z = phi[:, :, None] * phi.conj()[:, None, :] * self._kern
            return self._vecs @ z @ self._vecs.conj().T
        rhs = -np.einsum("na,nb->abn", src, src.conj()).reshape(d * d, n)
        return linalg.lu_solve(self._lu, rhs, check_finite=False).T.reshape(n, d, d)


def batch_currents(H, spec, psis, tol=DEFAULT_TOL):
    return CurrentSolver(H, spec, tol).currents(psis)
