"""Programmatic acceptance checks, grouped into suites.

Every check returns CheckResult records carrying the measured value, the
tolerance it was held to and the wall time. Nothing here adjusts a
tolerance to make a check pass; failing checks are reported as failing.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import (commutator, dag, expectation, gibbs_log, gibbs_state,
                   random_density, random_hermitian)
from .lgks import (BathSpec, Liouvillian, build_liouvillian,
                   propagate, propagate_samples, steady_state)
from .models import (build_oscillator_scenario,
                     build_perturbed_qubit_global, build_qubit_scenario,
                     oscillator_global_generator, oscillator_reference, preset,
                     qubit_global_current, qubit_reference)
from .perturb import (FirstOrderProblem, build_first_order_generator,
                      build_global_perturbed,
                      first_order_problem, first_order_states)
from .response import (finite_difference_oracle, resolved_tau_grid,
                       response_function, steady_state_response)
from .thermo import (entropy_production, entropy_production_first_order,
                     heat_current, heat_current_first_order, spohn_functional)


@dataclass
class CheckResult:
    criterion: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    runtime: float = 0.0
    detail: str = ""
    report_only: bool = False

    def line(self):
        status = "INFO" if self.report_only else ("PASS" if self.passed else "FAIL")
        return (f"[{status}] {self.criterion} {self.name}: measured={self.measured:.6g} "
                f"tol={self.tolerance:.3g} time={self.runtime:.2f}s {self.detail}").rstrip()


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _energy_current(label):
    """Heat current of one bath measured with the generator's own Hamiltonian."""
    def J(L, rho):
        return expectation(rho, L.dissipator(label).apply_adjoint(L.hamiltonian)).real
    return J


def random_eigenvector_model(seed=3, d=4):
    """Small non-degenerate model whose perturbation has no diagonal in the H0 eigenbasis."""
    rng = np.random.default_rng(seed)
    H0 = np.diag([0.0, 1.3, 2.9, 4.8])[:d, :d].astype(complex)
    V = random_hermitian(d, rng)
    V -= np.diag(np.diag(V))
    baths = (BathSpec("a", random_hermitian(d, rng), 1.5), BathSpec("b", random_hermitian(d, rng), 0.7))
    return H0, V, baths


# ---------------------------------------------------------------------- qubit

def criterion_1():
    with _Timer() as tm:
        p = preset("fig3")
        m = build_qubit_scenario(p)
        pi = steady_state(m.L0)
        J = heat_current(m.L0, "a", m.H0, pi)
    ref = qubit_reference("J0", p)
    err = _rel(J, ref)
    return [CheckResult("#1", "qubit J0 vs closed form", err <= 1e-8 and tm.elapsed < 1, err, 1e-8, tm.elapsed,
                        f"J0={J:.12g} ref={ref:.12g}")]


def criterion_2():
    with _Timer() as tm:
        p = preset("fig3")
        m = build_qubit_scenario(p)
        est, unc = finite_difference_oracle(m, _energy_current("a"), [1e-2, 1e-3, 1e-4], mode="local")
    ref = qubit_reference("J1", p)
    err = _rel(est, ref)
    return [CheckResult("#2", "qubit J1 local via finite differences", err <= 1e-5 and tm.elapsed < 5, err, 1e-5,
                        tm.elapsed, f"J1={est:.12g} ref={ref:.12g} richardson_err={unc:.2g}")]


def criterion_3():
    out = []
    with _Timer() as tm:
        p = preset("fig4-low-T")
        m = build_qubit_scenario(p)
        Lx = build_perturbed_qubit_global(p)
        Lg = build_global_perturbed(m.H0, m.V, p.delta, m.baths)
        diff = np.linalg.norm(Lx.dense() - Lg.dense(), 2)
    out.append(CheckResult("#3", "four-channel vs generic global generator", diff < 1e-12, diff, 1e-12, tm.elapsed))
    with _Timer() as tm:
        rows = {}
        for name in ("fig4-low-T", "fig4-high-T"):
            p = preset(name)
            rho = steady_state(build_perturbed_qubit_global(p))
            Jg = qubit_global_current(p, rho)
            J0, J1 = qubit_reference("J0", p), qubit_reference("J1", p)
            rows[name] = (Jg, J0, J0 + p.delta * J1, abs(p.delta * J1))
    Jg, J0, Jl, corr = rows["fig4-low-T"]
    ratio = abs(Jg - Jl) / corr
    out.append(CheckResult("#3", "low T: global deviation / local correction", ratio > 5, ratio, 5.0, tm.elapsed,
                           f"J_global={Jg:.6g} J0+dJ1={Jl:.6g}"))
    Jg, J0, Jl, corr = rows["fig4-high-T"]
    rel = _rel(Jg, Jl)
    out.append(CheckResult("#3", "high T: global vs J0+dJ1", rel < 0.02 and tm.elapsed < 10, rel, 0.02, tm.elapsed,
                           f"J_global={Jg:.6g} J0+dJ1={Jl:.6g}"))
    # the four-channel current formula vs the generic energy current on the same state
    p = preset("fig4-low-T")
    Lg = build_perturbed_qubit_global(p)
    rho = steady_state(Lg)
    J_energy = _energy_current("a")(Lg, rho)
    rel = _rel(qubit_global_current(p, rho), J_energy)
    out.append(CheckResult("#3", "four-channel current formula vs Tr(rho D^dag H)", rel < 1e-10, rel, 1e-10))
    return out


# ----------------------------------------------------------------- oscillator

def _ness_ada(p):
    m = build_oscillator_scenario(p, first_order=False)
    return expectation(steady_state(m.L0), m.ops["ada"]).real


def criterion_4():
    with _Timer() as tm:
        p = preset("fig2-deskscale")
        a8 = _ness_ada(p)
        a10 = _ness_ada(p.with_(nmax=10))
    ref = oscillator_reference("ada", p)
    err = _rel(a8, ref)
    shift = _rel(a10, a8)
    big = oscillator_reference("ada", preset("fig2"))
    return [
        CheckResult("#4", "NESS <a^dag a> vs formula (nmax=8)", err <= 1e-3 and tm.elapsed < 30, err, 1e-3,
                    tm.elapsed, f"numeric={a8:.10g} formula={ref:.10g}"),
        CheckResult("#4", "truncation shift nmax 8 -> 10", shift < 1e-4, shift, 1e-4),
        CheckResult("#4", "formula at the fig2 preset vs reference 107.4", abs(big - 107.4) < 0.05,
                    big, 0.05, report_only=True, detail="report only"),
    ]


def oscillator_response_trace(p, tmax, n=None, omega=None):
    m = build_oscillator_scenario(p)
    pi = steady_state(m.L0)
    tau = (np.linspace(0.0, tmax, n) if n is not None
           else resolved_tau_grid(m.L0, tmax, omega=p.omega_minus if omega is None else omega))
    return m, response_function(m.ops["ada"], m.L0, m.L1, pi, tau,
                                metadata={"scenario": "oscillator", "delta": p.delta, "observable": "a^dag a"})


def _pointwise(num, ref):
    mask = np.abs(ref) > 1e-3 * np.max(np.abs(ref))
    return float(np.max(np.abs(num - ref)[mask] / np.abs(ref[mask])))


def criterion_5(nmax=10):
    with _Timer() as tm:
        p = preset("fig2-deskscale").with_(nmax=nmax)
        _, tr = oscillator_response_trace(p, 10.0 / p.gamma_minus, n=2001)
    tau = tr.tau_grid
    e11 = _pointwise(tr.phi11, oscillator_reference("phi11", p, tau))
    e12 = _pointwise(tr.phi12, oscillator_reference("phi12", p, tau))
    c12 = _pointwise(tr.phi12, oscillator_reference("phi12_closure", p, tau))
    ok = tm.elapsed < 120
    return [
        CheckResult("#5", f"phi11 vs (nbar-1) closed form (nmax={nmax})", e11 <= 1e-3 and ok, e11, 1e-3, tm.elapsed),
        CheckResult("#5", f"phi12 vs (nbar-1) closed form (nmax={nmax})", e12 <= 1e-3 and ok, e12, 1e-3, tm.elapsed,
                    f"nbar={p.nbar_minus:.4g}"),
        CheckResult("#5", "phi12 vs exact closure of the generator", c12 <= 1e-3, c12, 1e-3,
                    report_only=True, detail="report only"),
    ]


def criterion_6():
    out = []
    for gm in (1.0, 3.0):
        with _Timer() as tm:
            p = preset("fig2-deskscale").with_(Ta=0.0, Tb=0.0, gamma_minus=gm, nmax=6)
            _, tr = oscillator_response_trace(p, 40.0 / gm)
            P11, P12 = steady_state_response(tr)
        ref = -3 * p.epsilon / p.omega_plus
        err = _rel(P11 + P12, ref)
        out.append(CheckResult("#6", f"T=0 total response, gamma_minus={gm:g}", err <= 1e-3 and tm.elapsed < 60,
                               err, 1e-3, tm.elapsed, f"Phi={P11 + P12:.10g} ref={ref:.10g}"))
    return out


def criterion_7():
    with _Timer() as tm:
        base = preset("fig2")
        dT = base.Ta - base.Tb
        Tb = np.logspace(3, 5, 21)
        P11, P12, Pc = [], [], []
        for T in Tb:
            p = base.with_(Ta=T + dT / 2, Tb=T - dT / 2)
            P11.append(oscillator_reference("Phi11_inf", p))
            P12.append(oscillator_reference("Phi12_inf", p))
            Pc.append(oscillator_reference("Phi12_inf_closure", p))
        P11, P12, Pc = np.array(P11), np.array(P12), np.array(Pc)
        s11, s12 = _slope(Tb, np.abs(P11)), _slope(Tb, np.abs(P12))
        tot = P11 + P12
        flips = bool(np.any(np.sign(tot[1:]) != np.sign(tot[:-1])))
        sc = _slope(Tb, np.abs(Pc))
        totc = P11 + Pc
        flips_c = bool(np.any(np.sign(totc[1:]) != np.sign(totc[:-1])))
    return [
        CheckResult("#7", "slope |Phi11(inf)| vs Tbar", abs(s11 - 1) <= 0.05, s11, 0.05, tm.elapsed),
        CheckResult("#7", "slope |Phi12(inf)| vs Tbar", abs(s12 - 2) <= 0.05, s12, 0.05, tm.elapsed),
        CheckResult("#7", "total response changes sign", flips and tm.elapsed < 1, float(flips), 0.0, tm.elapsed),
        CheckResult("#7", "slope |Phi12(inf)| vs Tbar, exact closure", True, sc, 0.05, tm.elapsed,
                    f"sign change with closure: {flips_c}", report_only=True),
    ]


# --------------------------------------------------------------------- thermo

def _thermo_models():
    q = build_qubit_scenario(preset("fig3"))
    po = preset("fig2-deskscale").with_(nmax=6)
    o = build_oscillator_scenario(po)
    return [("qubit", q.H0, q.L0), ("oscillator", o.H0, o.L0)], o


def criterion_8():
    out = []
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    models, osc = _thermo_models()
    spohn_min, sigma_min, gibbs_err, balance = np.inf, np.inf, 0.0, 0.0
    for name, H, L in models:
        d = L.dim
        for D in L.dissipators:
            Ls = L.restricted([D.label])
            pi = steady_state(Ls)
            gibbs_err = max(gibbs_err, float(np.max(np.abs(pi - gibbs_state(H, D.temperature)))))
            lp = gibbs_log(H, D.temperature)
            for _ in range(100 if D.label == "a" else 0):
                spohn_min = min(spohn_min, spohn_functional(Ls, random_density(d, rng), pi, log_pi=lp))
        ness = steady_state(L)
        J = [heat_current(L, D.label, H, ness) for D in L.dissipators]
        balance = max(balance, abs(sum(J)) / max(max(abs(x) for x in J), 1e-300))
        # start from the ground state of H
        _, U = np.linalg.eigh(H)
        rho0 = np.outer(U[:, 0], U[:, 0].conj())
        times = np.linspace(0.0, 10.0, 101)[1:]
        for rho in propagate_samples(L, rho0, times, method="exact"):
            sigma_min = min(sigma_min, entropy_production(L, rho, H).entropy_production)
    out.append(CheckResult("#8", "Spohn functional min over 100 random states per model", spohn_min >= -1e-8,
                           spohn_min, -1e-8))
    out.append(CheckResult("#8", "entropy production min along transients", sigma_min >= -1e-8, sigma_min, -1e-8))
    out.append(CheckResult("#8", "single-bath steady state vs Gibbs", gibbs_err <= 1e-7, gibbs_err, 1e-7))
    out.append(CheckResult("#8", "NESS current balance", balance <= 1e-8, balance, 1e-8))
    # first-order entropy production with one bath, on the oscillator and a generic model
    times = np.linspace(0.0, 10.0, 50)
    osc_single = FirstOrderProblem(osc.H0, osc.V, osc.L0.restricted(["a"]), osc.L1.restricted(["a"]))
    s_osc = float(np.max(np.abs(entropy_production_first_order(osc_single, times))))
    H0, V, baths = random_eigenvector_model()
    gen = first_order_problem(H0, V, baths[:1], zero_frequency=0.3)
    s_gen = float(np.max(np.abs(entropy_production_first_order(gen, times))))
    elapsed = time.perf_counter() - t0
    out.append(CheckResult("#8", "single-bath sigma1 at 50 times (oscillator)", s_osc <= 1e-8 and elapsed < 120,
                           s_osc, 1e-8, elapsed))
    out.append(CheckResult("#8", "single-bath sigma1 at 50 times (generic model)", s_gen <= 1e-8, s_gen, 1e-8,
                           detail="qubit: levels shift at first order, sigma1 undefined"))
    return out


# ------------------------------------------------------------ perturbation

def criterion_9():
    out = []
    t0 = time.perf_counter()
    p = preset("fig2-deskscale").with_(nmax=5)
    m = build_oscillator_scenario(p)
    L0d, L1d = m.L0.dense(), m.L1.dense()
    deltas = np.array([1e-2, 1e-3, 1e-4])
    gen = [np.linalg.norm(oscillator_global_generator(p, d).dense() - L0d - d * L1d, 2) for d in deltas]
    res = [m.expansion.eigenpair_residual(m.H0, d) for d in deltas]
    s_gen, s_res = _slope(deltas, gen), _slope(deltas, res)
    out.append(CheckResult("#9", "||L_global - L0 - d L1|| slope", abs(s_gen - 2) <= 0.05, s_gen, 0.05))
    out.append(CheckResult("#9", "eigenpair residual slope", abs(s_res - 2) <= 0.05, s_res, 0.05))
    pi0 = steady_state(m.L0)
    times = np.linspace(0.0, 10.0, 21)
    tr = max(abs(np.trace(r)) for r in first_order_states(m.L0, m.L1, pi0, times))
    out.append(CheckResult("#9", "rho1 traceless", tr <= 1e-10, tr, 1e-10))
    worst = 0.0
    for prob in (FirstOrderProblem(m.H0, m.V, m.L0, m.L1),
                 first_order_problem(*random_eigenvector_model(), zero_frequency=0.3)):
        for lab in prob.L0.labels:
            e = heat_current_first_order(prob, lab, times, form="energy")
            s = heat_current_first_order(prob, lab, times, form="entropy")
            scale = max(np.max(np.abs(e)), 1e-12)
            worst = max(worst, float(np.max(np.abs(e - s)) / scale))
    elapsed = time.perf_counter() - t0
    out.append(CheckResult("#9", "J1 energy form vs entropy form", worst <= 1e-7 and elapsed < 120, worst, 1e-7,
                           elapsed))
    return out


def criterion_10():
    out = []
    with _Timer() as tm:
        H0, V, _ = random_eigenvector_model()
        L0 = Liouvillian(H0, ())
        L1 = build_first_order_generator(V)
        pi0 = gibbs_state(H0, 1.5)
        A = random_hermitian(H0.shape[0], np.random.default_rng(11))
        tau = np.linspace(0.0, 20.0, 401)
        tr = response_function(A, L0, L1, pi0, tau)
        ref = []
        for t in tau:
            U = expm(-1j * H0 * t)
            ref.append(expectation(pi0, 1j * commutator(V, dag(U) @ A @ U)).real)
        ref = np.array(ref)
        err = float(np.max(np.abs(tr.phi11 - ref)) / max(np.max(np.abs(ref)), 1e-300))
        z = float(np.max(np.abs(tr.phi12)))
    out.append(CheckResult("#10", "no baths: phi12 identically zero", z == 0.0, z, 0.0, tm.elapsed))
    out.append(CheckResult("#10", "no baths: phi11 vs unitary Kubo", err <= 1e-8 and tm.elapsed < 30, err, 1e-8,
                           tm.elapsed, f"max|phi11|={np.max(np.abs(ref)):.4g}"))
    return out


# ----------------------------------------------------------------------- core

def core_checks():
    out = []
    rng = np.random.default_rng(7)
    H0, V, baths = random_eigenvector_model()
    q = build_qubit_scenario(preset("fig3"))
    kms = 0.0
    for L in (q.L0, build_liouvillian(H0, baths, zero_frequency=0.3)):
        for D in L.dissipators:
            for w, gp, gm, _ in D.channels:
                if D.temperature and gp:
                    kms = max(kms, abs(gm - np.exp(-w / D.temperature) * gp) / gp)
    out.append(CheckResult("core", "KMS ratio of rates", kms <= 1e-12, kms, 1e-12))
    L = build_liouvillian(H0, baths, zero_frequency=0.3)
    trace_err = dual_err = 0.0
    for _ in range(10):
        rho = random_density(4, rng)
        A = random_hermitian(4, rng)
        trace_err = max(trace_err, abs(np.trace(L.apply(rho))), np.max(np.abs(L.apply_adjoint(np.eye(4)))))
        lhs = expectation(L.apply(rho), A)
        rhs = expectation(rho, L.apply_adjoint(A))
        dual_err = max(dual_err, abs(lhs - rhs) / max(abs(lhs), 1.0))
    out.append(CheckResult("core", "trace preservation", trace_err <= 1e-12, trace_err, 1e-12))
    out.append(CheckResult("core", "Schrodinger/Heisenberg duality", dual_err <= 1e-12, dual_err, 1e-12))
    rho = random_density(4, rng)
    exact = (expm(L.dense() * 1.7) @ rho.reshape(-1, order="F")).reshape(4, 4, order="F")
    rk = propagate(L, rho, 1.7)
    err = float(np.max(np.abs(rk - exact)))
    out.append(CheckResult("core", "RK4 propagation vs matrix exponential", err <= 1e-8, err, 1e-8))
    return out


SUITES = {
    "core": (core_checks, criterion_10),
    "qubit": (criterion_1, criterion_2, criterion_3),
    "oscillator": (criterion_4, criterion_5, criterion_6, criterion_7, criterion_9),
    "thermo": (criterion_8,),
}


def run_suite(name="all", stream=None):
    """Run one suite (or all) and return the list of results; lines are printed to stream."""
    names = list(SUITES) if name == "all" else [name]
    results = []
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; choose from all, {', '.join(SUITES)}")
        for fn in SUITES[n]:
            for r in fn():
                results.append(r)
                if stream is not None:
                    print(r.line(), file=stream, flush=True)
    return results
