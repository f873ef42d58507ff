"""Two sites, one hop: compare the solvers with the closed-form current.

For a single input site coupled to a single output site with hopping h,
the steady-state output current is

    j = 4 g_in g_out h^2 / (g_in g_out^2 + 8 g_in h^2 + 4 g_out h^2)

Run:  python demos/dimer_current.py
"""

import numpy as np

from qlustering import CurrentSolver, Hamiltonian, LindbladSpec, NetworkTopology, output_currents, steady_state
from qlustering.network import build_liouvillian


def closed_form(h, g_in, g_out):
    return 4 * g_in * g_out * h**2 / (g_in * g_out**2 + 8 * g_in * h**2 + 4 * g_out * h**2)


topo = NetworkTopology(1, 0, 1, policy="full")  # direct input-output hop
print(f"{'h':>6} {'g_in':>5} {'g_out':>5} {'svd':>12} {'fast':>12} {'exact':>12}")
for h, g_in, g_out in [(0.5, 1, 1), (1, 1, 1), (2, 1, 1), (1, 3, 0.5), (1, 0.2, 5)]:
    H = Hamiltonian(topo, np.array([[0.0, h], [h, 0.0]]))
    spec = LindbladSpec(np.array([1.0]), (1,), gamma_in=g_in, gamma_out=g_out)
    rho = steady_state(build_liouvillian(H, spec))
    j_svd = output_currents(rho, spec)[0]
    j_fast = CurrentSolver(H, spec).currents(np.array([[1.0]]))[0, 0]
    print(f"{h:6.2f} {g_in:5.2f} {g_out:5.2f} {j_svd:12.9f} {j_fast:12.9f} {closed_form(h, g_in, g_out):12.9f}")

# at unit rates the current saturates at 1/3 however strong the hop is
hs = np.logspace(-2, 3, 6)
print("\nunit rates, large h:", np.round([closed_form(h, 1, 1) for h in hs], 5))
