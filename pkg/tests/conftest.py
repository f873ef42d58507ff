import numpy as np
import pytest

from qlustering.network import Hamiltonian, LindbladSpec, NetworkTopology


def random_network(rng, L, M, q, h_max=2.0, policy="layered", dephase=0.0, psi=None):
    topo = NetworkTopology(L, M, q, policy=policy)
    H = Hamiltonian.random(topo, rng, h_max)
    if psi is None:
        psi = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        psi /= np.linalg.norm(psi)
    spec = LindbladSpec.for_topology(topo, psi, gamma_dephase=dephase)
    return H, spec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def report(request):
    """Numbered PASS/FAIL lines from the benchmark checks, echoed in the terminal summary."""
    lines = {}
    request.config.acceptance_report = lines
    return lines


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_report", None)
    if lines:
        terminalreporter.section("acceptance")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
        passed = sum(" PASS " in line for line in lines.values())
        terminalreporter.write_line(f"{passed}/{len(lines)} passed")
