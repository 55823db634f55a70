"""`respond`: run the oscillator and qubit scenarios, sweep parameters, write CSV, run checks.

All inputs are in units hbar = k_B = gamma = 1: frequencies and energies in
units of gamma, temperatures in hbar*gamma/k_B, times in 1/gamma.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .core import expectation
from .errors import LGKSError
from .lgks import propagate_samples, steady_state
from .models import (PRESETS, OscillatorScenario, QubitScenario,
                     build_oscillator_scenario, build_qubit_scenario,
                     oscillator_global_generator, oscillator_reference,
                     qubit_reference)
from .perturb import build_global_perturbed, build_local_perturbed
from .response import cumulative_response, response_function
from .thermo import entropy_production

SWEEP_VARS = ("delta", "Tbar", "dT", "g", "epsilon")
TASKS = ("response", "heat", "entropy", "sweep")
PARAMS = {
    "oscillator": ("omega", "g", "epsilon", "gamma_plus", "gamma_minus", "Ta", "Tb", "delta", "nmax"),
    "qubit": ("omega", "g", "Omega", "gamma_plus", "gamma_minus", "Ta", "Tb", "delta"),
}
DEFAULT_PRESET = {"oscillator": "fig2-deskscale", "qubit": "fig3"}


class ConfigError(Exception):
    pass


# --------------------------------------------------------------- configuration

def read_config_file(path):
    """Flat `key = value` lines; `#` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_sweep(text):
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"sweep must be var:lo:hi:n, got {text!r}")
    var, lo, hi, n = parts
    if var not in SWEEP_VARS:
        raise ConfigError(f"sweep variable must be one of {', '.join(SWEEP_VARS)}")
    try:
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"bad sweep range {text!r}") from exc
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"empty or non-finite sweep range {text!r}")
    return var, np.linspace(lo, hi, n)


def _num(key, value):
    try:
        x = int(value) if key in ("nmax", "workers") else float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if not math.isfinite(x):
        raise ConfigError(f"{key} must be finite")
    return x


def with_value(p, var, x):
    """Scenario with one sweep variable set; Tbar and dT keep the other fixed."""
    dT, Tbar = p.Ta - p.Tb, 0.5 * (p.Ta + p.Tb)
    if var == "Tbar":
        return p.with_(Ta=x + dT / 2, Tb=x - dT / 2)
    if var == "dT":
        return p.with_(Ta=Tbar + x / 2, Tb=Tbar - x / 2)
    if var == "epsilon" and isinstance(p, QubitScenario):
        raise ConfigError("the qubit scenario has no epsilon")
    return p.with_(**{var: x})


def build_config(args):
    """Merge config file and flags into (scenario, settings)."""
    file_vals = read_config_file(args.config) if args.config else {}
    kind = args.command

    def get(key):
        v = getattr(args, key, None)
        return file_vals.get(key) if v is None else v

    name = get("preset") or DEFAULT_PRESET[kind]
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    if PRESETS[name][0] != kind:
        raise ConfigError(f"preset {name!r} is a {PRESETS[name][0]} preset")
    values = dict(PRESETS[name][1])
    for key in PARAMS[kind]:
        v = get(key)
        if v is not None:
            values[key] = _num(key, v)
    Tbar, dT = get("Tbar"), get("dT")
    if Tbar is not None or dT is not None:
        Tm = 0.5 * (values["Ta"] + values["Tb"]) if Tbar is None else _num("Tbar", Tbar)
        d = values["Ta"] - values["Tb"] if dT is None else _num("dT", dT)
        values["Ta"], values["Tb"] = Tm + d / 2, Tm - d / 2
    if "nmax" in values:
        values["nmax"] = int(values["nmax"])
    sweep = parse_sweep(get("sweep")) if get("sweep") else None
    if sweep is not None and sweep[0] in ("Tbar", "dT"):
        # the swept quantity replaces the base value, so validate at the first point
        Tm, d = 0.5 * (values["Ta"] + values["Tb"]), values["Ta"] - values["Tb"]
        if sweep[0] == "Tbar":
            Tm = sweep[1][0]
        else:
            d = sweep[1][0]
        values["Ta"], values["Tb"] = Tm + d / 2, Tm - d / 2
    cls = OscillatorScenario if kind == "oscillator" else QubitScenario
    try:
        scenario = cls(**values)
        for T in (scenario.Ta, scenario.Tb):
            if T < 0:
                raise ValueError("temperatures must be non-negative")
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    task = get("task") or "response"
    if task not in TASKS:
        raise ConfigError(f"task must be one of {', '.join(TASKS)}")
    if task == "sweep" and sweep is None:
        raise ConfigError("task sweep needs --sweep var:lo:hi:n")
    if task in ("response", "entropy") and sweep is not None:
        raise ConfigError(f"task {task} does not take a sweep")
    if sweep is not None:
        for x in sweep[1]:
            v = with_value(scenario, sweep[0], x)
            try:
                type(v)(**{k: getattr(v, k) for k in v.__dataclass_fields__})
                if v.Ta < 0 or v.Tb < 0:
                    raise ValueError("sweep drives a temperature negative")
            except ValueError as exc:
                raise ConfigError(f"sweep point {sweep[0]}={x:g}: {exc}") from exc
    settings = {
        "task": task,
        "sweep": sweep,
        "dt": None if get("dt") is None else _num("dt", get("dt")),
        "tmax": None if get("tmax") is None else _num("tmax", get("tmax")),
        "workers": 1 if get("workers") is None else int(_num("workers", get("workers"))),
        "out": get("out"),
    }
    if settings["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    for key in ("dt", "tmax"):
        if settings[key] is not None and settings[key] <= 0:
            raise ConfigError(f"{key} must be positive")
    return scenario, settings


# ---------------------------------------------------------------------- tasks

def _build(p):
    if isinstance(p, OscillatorScenario):
        return build_oscillator_scenario(p)
    return build_qubit_scenario(p)


def _current(L, label, H, rho):
    return expectation(rho, L.dissipator(label).apply_adjoint(H)).real


def heat_row(p):
    """J0, current of the local perturbed generator, current of the global generator (bath a)."""
    m = _build(p)
    H0, V = m.H0, m.V
    J0 = _current(m.L0, "a", H0, steady_state(m.L0))
    H = H0 + p.delta * V
    Lloc = build_local_perturbed(H0, V, p.delta, m.baths, check_regime=False)
    Jloc = _current(Lloc, "a", H, steady_state(Lloc))
    if isinstance(p, OscillatorScenario):
        Lg = oscillator_global_generator(p, p.delta)
    else:
        Lg = build_global_perturbed(H0, V, p.delta, m.baths)
    Jg = _current(Lg, "a", H, steady_state(Lg))
    return [J0, Jloc, Jg]


def analytic_row(p):
    if isinstance(p, OscillatorScenario):
        P11 = oscillator_reference("Phi11_inf", p)
        P12 = oscillator_reference("Phi12_inf", p)
        return [P11, P12, P11 + P12, oscillator_reference("Phi12_inf_closure", p)]
    return [qubit_reference("J0", p), qubit_reference("J1", p)]


def _point(job):
    task, p = job
    return heat_row(p) if task == "heat" else analytic_row(p)


def response_rows(p, dt, tmax):
    m = _build(p)
    if getattr(m, "L1", None) is None:
        from .perturb import first_order_corrections, _check_no_shift
        _check_no_shift(first_order_corrections(m.L0.dissipators[0].decomposition.eig, m.V), 1e-9)
    tmax = 12.0 / min(p.gamma_minus, p.gamma_plus) if tmax is None else tmax
    if dt is None:
        tau = np.linspace(0.0, tmax, max(2001, int(np.ceil(tmax * p.omega_minus * 30)) + 1))
    else:
        tau = np.arange(0.0, tmax + 0.5 * dt, dt)
    pi0 = steady_state(m.L0)
    tr = response_function(m.ops["ada"], m.L0, m.L1, pi0, tau)
    P11, P12 = cumulative_response(tr)
    return ["tau", "phi11", "phi12", "phi_total", "Phi11", "Phi12"], \
        [list(r) for r in zip(tr.tau_grid, tr.phi11, tr.phi12, tr.phi_total, P11, P12)]


def entropy_rows(p, dt, tmax):
    m = _build(p)
    tmax = 10.0 / min(p.gamma_minus, p.gamma_plus) if tmax is None else tmax
    dt = tmax / 200 if dt is None else dt
    times = np.arange(0.0, tmax + 0.5 * dt, dt)
    _, U = np.linalg.eigh(m.H0)
    rho0 = np.outer(U[:, 0], U[:, 0].conj())
    L = m.L0
    method = "exact" if L.is_secular else "rk4"
    rows = []
    states = propagate_samples(L, rho0, times, method=method)
    for t, rho in zip(times, states):
        s = entropy_production(L, rho, m.H0, t)
        rows.append([t, s.entropy, s.entropy_rate, s.entropy_production,
                     s.heat_currents["a"], s.heat_currents["b"]])
    return ["t", "S", "dS_dt", "sigma", "J_a", "J_b"], rows


def run_scenario(p, settings):
    """(header, rows) for a task."""
    task, sweep = settings["task"], settings["sweep"]
    if task == "response":
        return response_rows(p, settings["dt"], settings["tmax"])
    if task == "entropy":
        return entropy_rows(p, settings["dt"], settings["tmax"])
    if task == "heat":
        cols = ["J0", "J1_local", "J_global"]
    elif isinstance(p, OscillatorScenario):
        cols = ["Phi11_inf", "Phi12_inf", "Phi_total_inf", "Phi12_inf_closure"]
    else:
        cols = ["J0", "J1"]
    var, xs = sweep if sweep is not None else ("delta", np.array([p.delta]))
    jobs = [(task, with_value(p, var, x)) for x in xs]
    if settings["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=settings["workers"]) as ex:
            results = list(ex.map(_point, jobs))
    else:
        results = [_point(j) for j in jobs]
    return [var] + cols, [[x] + r for x, r in zip(xs, results)]


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{float(x) + 0.0:.17g}" for x in r])
    return buf.getvalue()


# ------------------------------------------------------------------------ CLI

def _add_common(sp, kind):
    sp.add_argument("--preset", help=f"named parameter set ({', '.join(k for k, v in PRESETS.items() if v[0] == kind)})")
    sp.add_argument("--config", help="flat key = value file; flags override it")
    sp.add_argument("--task", help="response | heat | entropy | sweep (default response)")
    sp.add_argument("--sweep", help=f"var:lo:hi:n with var in {', '.join(SWEEP_VARS)}")
    sp.add_argument("--out", help="CSV path (default standard output)")
    sp.add_argument("--dt", help="output sample spacing in 1/gamma")
    sp.add_argument("--tmax", help="end of the time grid in 1/gamma")
    sp.add_argument("--workers", help="processes for sweep points (output order is fixed)")
    sp.add_argument("--Ta", help="temperature of bath a")
    sp.add_argument("--Tb", help="temperature of bath b")
    sp.add_argument("--Tbar", help="mean temperature (keeps Ta - Tb)")
    sp.add_argument("--dT", help="Ta - Tb (keeps the mean)")
    sp.add_argument("--delta", help="perturbation strength")
    sp.add_argument("--omega", help="bare frequency")
    sp.add_argument("--g", help="inter-site coupling")
    sp.add_argument("--gamma-plus", dest="gamma_plus", help="decay rate at omega + g")
    sp.add_argument("--gamma-minus", dest="gamma_minus", help="decay rate at omega - g")


def make_parser():
    ap = argparse.ArgumentParser(
        prog="respond",
        description="Response of open quantum systems to a static perturbation. "
                    "Units: hbar = k_B = gamma = 1.")
    sub = ap.add_subparsers(dest="command", required=True)
    osc = sub.add_parser("oscillator", help="coupled oscillators in a linear field")
    _add_common(osc, "oscillator")
    osc.add_argument("--epsilon", help="linear field strength")
    osc.add_argument("--nmax", help="Fock states kept per normal mode")
    qb = sub.add_parser("qubit", help="coupled qubit pair")
    _add_common(qb, "qubit")
    qb.add_argument("--Omega", help="zz coupling energy of the perturbation")
    vf = sub.add_parser("verify", help="run acceptance checks")
    vf.add_argument("--suite", default="all", help="all | core | oscillator | qubit | thermo")
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.command == "verify":
        from .verification import SUITES, run_suite
        if args.suite != "all" and args.suite not in SUITES:
            print(f"respond: unknown suite {args.suite!r}", file=sys.stderr)
            return 2
        results = run_suite(args.suite, sys.stdout)
        failed = [r for r in results if not r.passed and not r.report_only]
        print(f"{len(results) - len(failed)} of {len(results)} checks passed")
        return 1 if failed else 0
    try:
        scenario, settings = build_config(args)
    except ConfigError as exc:
        print(f"respond: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        header, rows = run_scenario(scenario, settings)
    except ConfigError as exc:
        print(f"respond: configuration error: {exc}", file=sys.stderr)
        return 2
    except (LGKSError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"respond: numerical failure in task {settings['task']}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    text = format_csv(header, rows)
    if settings["out"]:
        with open(settings["out"], "w", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
