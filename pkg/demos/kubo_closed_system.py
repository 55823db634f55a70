"""Without baths the response reduces to the Kubo formula.

phi(tau) = <i[V, A(tau)]> in the Gibbs state, with A(tau) the unitary
Heisenberg evolution. The bath-induced part phi12 is identically zero.
"""
import numpy as np
from scipy.linalg import expm

from lgks_response import Liouvillian, build_first_order_generator, gibbs_state, response_function
from lgks_response.core import commutator, dag, expectation, random_hermitian

rng = np.random.default_rng(7)
H0 = np.diag([0.0, 1.3, 2.9, 4.8]).astype(complex)
V = random_hermitian(4, rng)
A = random_hermitian(4, rng)
pi0 = gibbs_state(H0, 1.5)

tau = np.linspace(0, 10, 201)
tr = response_function(A, Liouvillian(H0, ()), build_first_order_generator(V), pi0, tau)
kubo = []
for t in tau:
    U = expm(-1j * H0 * t)
    kubo.append(expectation(pi0, 1j * commutator(V, dag(U) @ A @ U)).real)
print(f"max |phi11 - Kubo| = {np.max(np.abs(tr.phi11 - np.array(kubo))):.2e}")
print(f"max |phi12|        = {np.max(np.abs(tr.phi12)):.2e}")
