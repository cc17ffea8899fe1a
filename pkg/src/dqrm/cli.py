"""Command-line driver emitting machine-readable CSV/JSON scan data.

Subcommands
-----------
boundary   phase-diagram classification over a (gamma, g) grid plus bisected
           boundary curves for a list of orders k
sweep-eta  steady-state observables of the full model along an eta grid,
           with a truncation-drift convergence flag per row
steady     single-point steady-state evaluation (JSON), including the
           closed-form sigma_z prediction and, for --eta inf, the k=2
           closed-form cross-check
spectrum   spin-block eigenvalues and/or reduced-Liouvillian edge spectrum
meanfield  steady mean-field branches over a g grid, or one trajectory

Grids accept "start:stop:count" or comma lists.  Outputs are deterministic:
floats are formatted with %.9g and every file carries a version/params-hash
comment.  A flat key=value config file can seed any flag; explicit flags win.
Exit codes: 0 success, 1 solver failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from multiprocessing import Pool

import numpy as np

from . import __version__
from . import analytics, hierarchy, liouvillian, meanfield, moments, operators
from .model import INFINITE, QubitBranch, make_params, _Infinite

OBSERVABLE_NAMES = ("n", "n2", "n3", "sz", "sx", "a")


def fmt(x) -> str:
    """Deterministic scalar formatting: %.9g, complex as re+imj."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, _Infinite):
        return "inf"
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        x = complex(x)
        if x.imag == 0.0:
            return f"{x.real:.9g}"
        return f"{x.real:.9g}{x.imag:+.9g}j"
    if x is None:
        return "none"
    return f"{float(x):.9g}"


def parse_grid(text: str) -> np.ndarray:
    """Parse "start:stop:count" or a comma list into a float array."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"grid count must be >= 1, got {count}")
        if stop < start:
            raise ValueError(f"grid stop < start in {text!r}")
        return np.linspace(start, stop, count)
    return np.array([float(v) for v in text.split(",") if v.strip() != ""])


def parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip() != ""]


def params_hash(pairs: dict) -> str:
    blob = "\n".join(f"{k}={pairs[k]}" for k in sorted(pairs))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def write_csv(path: str, header: list[str], rows: list[tuple],
              meta: dict) -> None:
    lines = [f"# dqrm-version={__version__} params-hash={params_hash(meta)}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_config(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; keys match long flags."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line is not key=value: {raw!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


# ---------------------------------------------------------------------------
# boundary

def _classify_cell(task):
    gamma, g, kappa, omega0, k_max, parity, branch = task
    params = make_params(omega0, kappa, gamma, g, INFINITE)
    k = hierarchy.min_unstable_k(params, k_max, parity, branch)
    return "none" if k is None else k


def cmd_boundary(args) -> int:
    gammas = parse_grid(args.gamma)
    gs = parse_grid(args.g)
    branch = QubitBranch(args.branch)
    tasks = [(gamma, g, args.kappa, args.omega0, args.k_max, args.parity,
              branch)
             for gamma in gammas for g in gs]
    if args.workers > 1:
        with Pool(args.workers) as pool:
            labels = pool.map(_classify_cell, tasks, chunksize=64)
    else:
        labels = [_classify_cell(t) for t in tasks]
    rows = [(t[0], t[1], lab) for t, lab in zip(tasks, labels)]
    meta = dict(cmd="boundary", kappa=args.kappa, omega0=args.omega0,
                gamma=args.gamma, g=args.g, parity=args.parity,
                branch=branch.value, k_list=args.k_list, k_max=args.k_max)
    write_csv(args.out, ["gamma", "g", "min_unstable_k"], rows, meta)

    curves_out = args.curves_out or _derived_path(args.out, "_curves")
    k_list = parse_int_list(args.k_list)
    curve_rows = []
    for k in k_list:
        for gamma in gammas:
            gc = hierarchy.critical_coupling(k, branch, gamma,
                                             args.kappa / args.omega0)
            curve_rows.append((gamma, k, gc))
    for gamma in gammas:
        gc = hierarchy.analytic_boundary("gc_infinity", gamma,
                                         args.kappa / args.omega0)
        curve_rows.append((gamma, "inf", gc))
    write_csv(curves_out, ["gamma", "k", "gc"], curve_rows, meta)
    return 0


def _derived_path(path: str, suffix: str) -> str:
    if "." in path.rsplit("/", 1)[-1]:
        stem, ext = path.rsplit(".", 1)
        return f"{stem}{suffix}.{ext}"
    return path + suffix


# ---------------------------------------------------------------------------
# sweep-eta

def _observable_ops(trunc: operators.FockTruncation):
    a, adag, n = operators.ladder_ops(trunc)
    sx, _, sz, _, _ = operators.pauli_ops()
    i2 = operators.identity_op(2, operators.QUBIT)
    ifock = operators.identity_op(trunc.nmax, trunc.tag)
    n_full = operators.tensor(i2, n)
    return {
        "n": n_full,
        "n2": n_full @ n_full,
        "n3": n_full @ n_full @ n_full,
        "sz": operators.tensor(sz, ifock),
        "sx": operators.tensor(sx, ifock),
        "a": operators.tensor(i2, a),
    }


def _sweep_point(task):
    eta, gamma, g, kappa, omega0, nmax, obs_names = task
    params = make_params(omega0, kappa, gamma, g, eta)

    def solve(trunc):
        s = liouvillian.rabi_liouvillian(params, trunc)
        sol = liouvillian.steady_state(s)
        ops = _observable_ops(trunc)
        return {name: liouvillian.expectation(sol.rho, ops[name])
                for name in obs_names}

    trunc = operators.FockTruncation(nmax)
    try:
        base = solve(trunc)
        refined = solve(trunc.scaled(1.3))
    except liouvillian.DegenerateSteadyStateError:
        return [(eta, nmax, name, float("nan"), False, "degenerate")
                for name in obs_names]
    except liouvillian.SolverConvergenceError as exc:
        return [(eta, nmax, name, float("nan"), False, f"error:{exc}")
                for name in obs_names]
    rows = []
    for name in obs_names:
        v1, v2 = base[name], refined[name]
        drift = abs(v1 - v2) / max(abs(v2), 1e-300)
        value = v1.real if name != "a" else v1
        rows.append((eta, nmax, name, value, drift <= 0.01, "ok"))
    return rows


def cmd_sweep_eta(args) -> int:
    etas = parse_grid(args.eta)
    obs_names = [o.strip() for o in args.obs.split(",") if o.strip()]
    for name in obs_names:
        if name not in OBSERVABLE_NAMES:
            raise ValueError(f"unknown observable {name!r}; choose from "
                             f"{OBSERVABLE_NAMES}")
    tasks = [(float(eta), args.gamma, args.g, args.kappa, args.omega0,
              args.nmax, tuple(obs_names)) for eta in etas]
    if args.workers > 1:
        with Pool(args.workers) as pool:
            chunks = pool.map(_sweep_point, tasks)
    else:
        chunks = [_sweep_point(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    meta = dict(cmd="sweep-eta", kappa=args.kappa, omega0=args.omega0,
                gamma=args.gamma, g=args.g, eta=args.eta, nmax=args.nmax,
                obs=args.obs)
    write_csv(args.out, ["eta", "nmax", "observable", "value", "converged",
                         "status"], rows, meta)
    return 0


# ---------------------------------------------------------------------------
# steady

def cmd_steady(args) -> int:
    params = make_params(args.omega0, args.kappa, args.gamma, args.g, args.eta)
    trunc = operators.FockTruncation(args.nmax)
    doc: dict = {
        "version": __version__,
        "params": {"omega0": params.omega0, "kappa": params.kappa,
                   "gamma": params.gamma, "g": params.g,
                   "eta": "inf" if params.eta_is_infinite else params.eta},
        "nmax": args.nmax,
    }
    try:
        pred = analytics.sigma_z_infinity(params)
        doc["sigma_z_analytic"] = pred.value
        doc["sigma_z_saturated"] = pred.saturated
    except (analytics.BoundaryDivergenceError, ZeroDivisionError) as exc:
        doc["sigma_z_analytic"] = None
        doc["sigma_z_note"] = str(exc)

    if params.eta_is_infinite:
        branch = QubitBranch(args.branch)
        s = liouvillian.reduced_liouvillian(branch, params, trunc)
        sol = liouvillian.steady_state(s)
        a, adag, n = operators.ladder_ops(trunc)
        rho = sol.rho
        aa = liouvillian.expectation(rho, a @ a)
        nbar = liouvillian.expectation(rho, n)
        doc["branch"] = branch.value
        doc["observables"] = {
            "n": nbar.real,
            "n2": liouvillian.expectation(rho, n @ n).real,
            "n3": liouvillian.expectation(rho, n @ n @ n).real,
            "a_re": liouvillian.expectation(rho, a).real,
            "a_im": liouvillian.expectation(rho, a).imag,
        }
        try:
            cf = analytics.v2_steady(branch, params)
            numeric = (aa, nbar, aa.conjugate())
            doc["v2_closed_form"] = [[z.real, z.imag] for z in cf]
            doc["v2_numeric"] = [[z.real, z.imag] for z in numeric]
            doc["v2_max_abs_diff"] = max(abs(c - v)
                                         for c, v in zip(cf, numeric))
        except analytics.BoundaryDivergenceError as exc:
            doc["v2_note"] = str(exc)
    else:
        s = liouvillian.rabi_liouvillian(params, trunc)
        sol = liouvillian.steady_state(s)
        ops = _observable_ops(trunc)
        aval = liouvillian.expectation(sol.rho, ops["a"])
        doc["observables"] = {
            name: liouvillian.expectation(sol.rho, ops[name]).real
            for name in ("n", "n2", "n3", "sz", "sx")}
        doc["observables"]["a_re"] = aval.real
        doc["observables"]["a_im"] = aval.imag

        def n_at(tr):
            st = liouvillian.rabi_liouvillian(params, tr)
            so = liouvillian.steady_state(st)
            nf = _observable_ops(tr)["n"]
            return liouvillian.expectation(so.rho, nf).real

        drift = liouvillian.truncation_drift(n_at, trunc)
        doc["truncation"] = {"nmax_refined": trunc.scaled(1.3).nmax,
                             "n_drift": drift.drift,
                             "converged": drift.converged}

    doc["residual"] = sol.residual
    doc["gap_estimate"] = sol.gap_estimate
    doc["params_hash"] = params_hash(doc["params"])
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# spectrum

def cmd_spectrum(args) -> int:
    params = make_params(args.omega0, args.kappa, args.gamma, args.g, INFINITE)
    branch = QubitBranch(args.branch)
    rows = []
    if args.k:
        for k in parse_int_list(args.k):
            block = hierarchy.effective_hamiltonian(k, branch, params)
            vals = np.sort_complex(block.eigenvalues())
            rows.extend(("hk", k, v.real, v.imag) for v in vals)
    if args.liouvillian:
        trunc = operators.FockTruncation(args.nmax)
        s = liouvillian.reduced_liouvillian(branch, params, trunc)
        edge = liouvillian.spectrum_edge(s, args.count)
        rows.extend(("liouvillian", "", v.real, v.imag)
                    for v in edge.eigenvalues)
    if not rows:
        raise ValueError("nothing to do: pass --k and/or --liouvillian")
    meta = dict(cmd="spectrum", kappa=args.kappa, omega0=args.omega0,
                gamma=args.gamma, g=args.g, k=args.k or "",
                liouvillian=args.liouvillian, nmax=args.nmax,
                count=args.count, branch=branch.value)
    write_csv(args.out, ["source", "k", "re", "im"], rows, meta)
    return 0


# ---------------------------------------------------------------------------
# meanfield

def cmd_meanfield(args) -> int:
    meta = dict(cmd="meanfield", kappa=args.kappa, omega0=args.omega0,
                g=args.g, trajectory=args.trajectory)
    gs = np.sort(parse_grid(args.g))
    if args.trajectory:
        params = make_params(args.omega0, args.kappa, 0.0, float(gs[0]),
                             args.eta)
        state0 = meanfield.MeanFieldState(a=complex(args.kick), sx=0.0,
                                          sy=0.0, sz=-1.0)
        traj = meanfield.mf_evolve(state0, args.t_final, args.dt, params)
        rows = [(t, s[0], s[1], s[2], s[3], s[4])
                for t, s in zip(traj.times, traj.states)]
        write_csv(args.out, ["t", "re_a", "im_a", "sx", "sy", "sz"], rows,
                  meta)
        return 0
    rows = []
    for g in gs:
        params = make_params(args.omega0, args.kappa, 0.0, float(g), INFINITE)
        for branch_id, st in enumerate(meanfield.mf_steady_branches(params)):
            rows.append((g, branch_id, st.a.real, st.a.imag, st.sx, st.sy,
                         st.sz))
    write_csv(args.out, ["g", "branch_id", "re_a", "im_a", "sx", "sy", "sz"],
              rows, meta)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqrm",
        description="Dissipative quantum Rabi model scans and spectra")
    parser.add_argument("--config", default=None,
                        help="flat key=value file seeding any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eta_default=None):
        p.add_argument("--kappa", type=float, default=1.0)
        p.add_argument("--omega0", type=float, default=1.0)
        p.add_argument("--gamma", default="0.0")
        p.add_argument("--g", default="1.0")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", required=True)

    p = sub.add_parser("boundary", help="phase-diagram classification grid")
    common(p)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--branch", choices=("down", "up"), default="down")
    p.add_argument("--k-list", default="2,4,6,8")
    p.add_argument("--k-max", type=int, default=40)
    p.add_argument("--curves-out", default=None)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("sweep-eta", help="steady observables along an eta grid")
    common(p)
    p.add_argument("--eta", required=True)
    p.add_argument("--nmax", type=int, default=100)
    p.add_argument("--obs", default="n,n2,n3")
    p.set_defaults(func=cmd_sweep_eta, gamma_scalar=True, g_scalar=True)

    p = sub.add_parser("steady", help="single-point steady state (JSON)")
    common(p)
    p.add_argument("--eta", required=True,
                   help="frequency ratio, or 'inf' for the reduced model")
    p.add_argument("--branch", choices=("down", "up"), default="down")
    p.add_argument("--nmax", type=int, default=100)
    p.set_defaults(func=cmd_steady, gamma_scalar=True, g_scalar=True)

    p = sub.add_parser("spectrum", help="spin-block / Liouvillian spectra")
    common(p)
    p.add_argument("--k", default="",
                   help="comma list of orders for the spin blocks")
    p.add_argument("--liouvillian", action="store_true",
                   help="also compute the reduced-Liouvillian edge spectrum")
    p.add_argument("--branch", choices=("down", "up"), default="down")
    p.add_argument("--nmax", type=int, default=60)
    p.add_argument("--count", type=int, default=12)
    p.set_defaults(func=cmd_spectrum, gamma_scalar=True, g_scalar=True)

    p = sub.add_parser("meanfield", help="mean-field branches / trajectory")
    common(p)
    p.add_argument("--trajectory", action="store_true")
    p.add_argument("--eta", type=float, default=10.0)
    p.add_argument("--t-final", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--kick", type=float, default=1e-3,
                   help="initial symmetry-breaking order parameter")
    p.set_defaults(func=cmd_meanfield)
    return parser


def _apply_config(parser, argv):
    """Seed parser defaults from --config before the real parse."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = load_config(known.config)
        for action in parser._subparsers._group_actions[0].choices.values():
            usable = {k: v for k, v in values.items()
                      if any(opt.lstrip("-").replace("-", "_") == k
                             for a in action._actions for opt in a.option_strings)}
            for a in action._actions:
                for opt in a.option_strings:
                    key = opt.lstrip("-").replace("-", "_")
                    if key in usable:
                        val = usable[key]
                        if a.type is not None:
                            val = a.type(val)
                        elif isinstance(a, argparse._StoreTrueAction):
                            val = val.lower() in ("1", "true", "yes")
                        action.set_defaults(**{a.dest: val})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    # scalar flags that reuse the grid syntax in other commands
    for name in ("gamma", "g"):
        if hasattr(args, name) and isinstance(getattr(args, name), str) \
                and getattr(args, "func", None) is not cmd_boundary \
                and getattr(args, "func", None) is not cmd_meanfield:
            setattr(args, name, float(getattr(args, name)))
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"dqrm: error: {exc}", file=sys.stderr)
        return 2
    except (liouvillian.SolverConvergenceError,
            liouvillian.DegenerateSteadyStateError,
            analytics.BoundaryDivergenceError,
            moments.MomentInstabilityError,
            RuntimeError) as exc:
        print(f"dqrm: solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
