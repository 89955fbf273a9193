"""Command-line entry point: reproducible CSV/JSON runs of every subsystem.

Subcommands
-----------
moments       moments of a (modified) functional         -> k,re_nu,im_nu
from-measure  recurrence coefficients from moments       -> n,re_beta,im_beta,re_alpha,im_alpha
simulate      integrate a lattice/circle flow            -> t,site,... per system
verify-lax    commutator-identity residual report        -> JSON on stdout
spectrum      eigenvalues along a simulated trajectory   -> t,i,re_lambda,im_lambda
circle        verblunsky | kernel | cd | schur-check
oracle        closed-form families example1 | example2   -> same schema as from-measure

Complex numbers are `re,im` pairs on the command line and `[re, im]` arrays
in JSON files.  Every CSV starts with one metadata comment line
(`# ertl=<version> seed=<seed> config=<sha256 prefix>`); bodies are
deterministic for a fixed config and seed, with floats printed to 17
significant digits (round-trip exact).  Exit codes: 0 ok, 1 invalid
configuration, 2 numerical breakdown (a JSON error report goes to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import ErtlError
from .measures import MomentSpec, compute_moments
from .lorth import bootstrap_recurrence
from .lattice import (LatticeState, StepControl, integrate, rhs_ertl,
                      state_from_coeffs)
from .lax import lax_residual, spectrum as lax_spectrum
from .circle import (cd_from_verblunsky, integrate_cd, integrate_schur,
                     kernel_coeffs, rhs_schur, verblunsky_from_moments,
                     VerblunskySeq)
from .oracles import ClosedFormExample, example1_coeffs, example2_coeffs
from .measures import circle_lebesgue_spec


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected re or re,im, got {text!r}")


def _load_json_arg(text: str):
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    with open(text) as fh:
        return json.load(fh)


def _load_spec(text: str) -> MomentSpec:
    return MomentSpec.from_json_dict(_load_json_arg(text))


def _config_hash(args: argparse.Namespace) -> str:
    blob = json.dumps({k: repr(v) for k, v in sorted(vars(args).items())
                       if k not in ("out", "func")}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _open_out(args):
    path = getattr(args, "out", None)
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _emit(args, header: str, rows, seed=None):
    fh, close = _open_out(args)
    try:
        fh.write(f"# ertl={__version__} seed={seed} config={_config_hash(args)}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    finally:
        if close:
            fh.close()


def _cx_cells(z) -> list:
    z = complex(z)
    return [_f(z.real), _f(z.imag)]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_moments(args):
    spec = _load_spec(args.measure)
    table = compute_moments(spec, args.t, args.K)
    rows = [[str(k)] + _cx_cells(table.nu_at(k)) for k in range(-args.K, args.K + 1)]
    _emit(args, "k,re_nu,im_nu", rows)
    return 0


def _coeff_rows(t, beta, alpha_with_a1):
    """Rows n,re_beta,im_beta,re_alpha,im_alpha; alpha_with_a1[0] is alpha_1."""
    rows = []
    for n, b in enumerate(beta, start=1):
        a = alpha_with_a1[n - 1]
        rows.append([str(n)] + _cx_cells(b) + _cx_cells(a))
    return rows


def _cmd_from_measure(args):
    spec = _load_spec(args.measure)
    times = [float(x) for x in args.t.split(",")]
    all_rows = []
    dump = {}
    for t in times:
        table = compute_moments(spec, t, args.N + 1)
        lp, rc = bootstrap_recurrence(table, args.N, p=spec.p, q=spec.q)
        alpha = [0j] + list(rc.alpha)
        if len(times) == 1:
            all_rows += _coeff_rows(t, rc.beta, alpha)
            header = "n,re_beta,im_beta,re_alpha,im_alpha"
        else:
            for row in _coeff_rows(t, rc.beta, alpha):
                all_rows.append([_f(t)] + row)
            header = "t,n,re_beta,im_beta,re_alpha,im_alpha"
        if args.dump_poly:
            dump[_f(t)] = {
                "N": lp.N,
                "rows": [[[complex(c).real, complex(c).imag] for c in r] for r in lp.rows],
                "sigma_diag": [[complex(s).real, complex(s).imag] for s in lp.sigma_diag],
                "sigma_minus": [[complex(s).real, complex(s).imag] for s in lp.sigma_minus],
                "tau": [[complex(s).real, complex(s).imag] for s in lp.tau],
                "conventions": {"beta_0": 1, "alpha_0": -1, "alpha_1": 0},
            }
    _emit(args, header, all_rows)
    if args.dump_poly:
        with open(args.dump_poly, "w") as fh:
            json.dump(dump, fh, indent=1, sort_keys=True)
    return 0


def _lattice_init(args, N):
    if args.init:
        data = _load_json_arg(args.init)
        beta = [complex(*x) for x in data["beta"]]
        alpha = [complex(*x) for x in data["alpha"]]
        if len(alpha) == len(beta) - 1:          # free alpha_2..alpha_N
            alpha = [0j] + alpha + [0j]
        elif len(alpha) == len(beta) + 1:        # full alpha_1..alpha_{N+1}
            pass
        else:
            raise ValueError("alpha must list alpha_2..alpha_N or alpha_1..alpha_{N+1}")
        return LatticeState(p=args.p, q=args.q, t=args.t0, beta=beta, alpha=alpha)
    if N is None:
        raise ValueError("either --init or --N is required")
    beta = [1.0 + 0j] * N
    alpha = [0.25 + 0j] * (N - 1)
    return state_from_coeffs(args.p, args.q, args.t0, beta, alpha)


def _cmd_simulate(args):
    ctrl = StepControl(rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    t_out = [float(x) for x in args.t_out.split(",")] if args.t_out else None

    if args.system in ("ertl", "rtl1", "rtl2", "langmuir"):
        state = _lattice_init(args, args.N)
        traj = integrate(state, args.t_end, rhs_id=args.system, ctrl=ctrl, t_out=t_out)
        rows = []
        for t, s in zip(traj.times, traj.states):
            for n in range(1, s.N + 1):
                rows.append([_f(t), str(n)] + _cx_cells(s.beta[n - 1])
                            + _cx_cells(s.alpha[n - 1]))
        _emit(args, "t,site,re_beta,im_beta,re_alpha,im_alpha", rows)
        return 0

    if args.system == "cd":
        data = _load_json_arg(args.init) if args.init else None
        if data is None:
            raise ValueError("--system cd requires --init with {'c': [...], 'd': [...]}")
        c, d = [float(x) for x in data["c"]], [float(x) for x in data["d"]]
        times, cs, ds, _ = integrate_cd(c, d, args.q, args.t0, args.t_end,
                                        ctrl=ctrl, t_out=t_out)
        rows = []
        for t, cc, dd in zip(times, cs, ds):
            for n in range(1, len(cc) + 1):
                rows.append([_f(t), str(n), _f(cc[n - 1]), _f(dd[n - 1])])
        _emit(args, "t,site,c,d", rows)
        return 0

    if args.system == "schur":
        data = _load_json_arg(args.init) if args.init else None
        if data is None:
            raise ValueError("--system schur requires --init with {'a': [[re,im],...]}")
        a = [complex(*x) for x in data["a"]]
        times, seqs, _ = integrate_schur(VerblunskySeq(args.t0, tuple(a)), args.q,
                                         args.t_end, ctrl=ctrl, t_out=t_out)
        rows = []
        for t, v in zip(times, seqs):
            for n, an in enumerate(v.a):
                rows.append([_f(t), str(n)] + _cx_cells(an))
        _emit(args, "t,site,re_a,im_a", rows)
        return 0

    raise ValueError(f"unknown system {args.system!r}")


def _random_state(rng, N, p, q, t):
    beta = rng.uniform(0.5, 1.5, N) * np.exp(1j * rng.uniform(-0.5, 0.5, N))
    alpha = rng.uniform(0.2, 1.0, N - 1) * np.exp(1j * rng.uniform(-0.5, 0.5, N - 1))
    return state_from_coeffs(p, q, t, beta, alpha)


def _cmd_verify_lax(args):
    if args.init:
        state = _lattice_init(args, args.N)
        cases = [lax_residual(state)]
    else:
        rng = np.random.default_rng(args.seed)
        states = [_random_state(rng, args.N, args.p, args.q, args.t)
                  for _ in range(args.count)]
        workers = int(os.environ.get("ERTL_THREADS", "1") or "1")
        if workers > 1 and len(states) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                cases = list(pool.map(lax_residual, states))
        else:
            cases = [lax_residual(s) for s in states]
    report = {
        "N": args.N,
        "count": len(cases),
        "seed": args.seed,
        "residual": max(cases),
        "residuals": cases,
        "norms": {"normalization": "max(1, |H|_max * |F|_max)"},
        "pass": max(cases) < args.tol,
    }
    print(json.dumps(report, indent=1, sort_keys=True))
    return 0 if report["pass"] else 2


def _cmd_spectrum(args):
    # group the trajectory CSV by time and rebuild finite-closure states
    rows = []
    with open(args.traj) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("t,"):
                continue
            rows.append(line.split(","))
    by_t: dict = {}
    for r in rows:
        by_t.setdefault(r[0], []).append(r)
    out = []
    for tkey in by_t:
        grp = sorted(by_t[tkey], key=lambda r: int(r[1]))
        beta = [complex(float(r[2]), float(r[3])) for r in grp]
        alpha = [complex(float(r[4]), float(r[5])) for r in grp] + [0j]
        state = LatticeState(p=0, q=0, t=float(tkey), beta=beta, alpha=alpha)
        for i, lam in enumerate(lax_spectrum(state)):
            out.append([tkey, str(i)] + _cx_cells(lam))
    _emit(args, "t,i,re_lambda,im_lambda", out)
    return 0


def _circle_spec(args) -> MomentSpec:
    if args.measure:
        return _load_spec(args.measure)
    return circle_lebesgue_spec(args.q)


def _cmd_circle(args):
    spec = _circle_spec(args)
    K = max(args.N + 3, 4)
    table = compute_moments(spec, args.t, K)
    v = verblunsky_from_moments(table, args.N)

    if args.mode == "verblunsky":
        rows = [[str(n)] + _cx_cells(a) for n, a in enumerate(v.a)]
        _emit(args, "n,re_a,im_a", rows)
        return 0

    if args.mode == "kernel":
        beta, alpha, _ = kernel_coeffs(v, args.w)
        rows = _coeff_rows(args.t, beta, [0j] + list(alpha))
        _emit(args, "n,re_beta,im_beta,re_alpha,im_alpha", rows)
        return 0

    if args.mode == "cd":
        cs = cd_from_verblunsky(v, args.t)
        rows = []
        d_full = [0.0] + list(cs.d)
        for n in range(1, cs.N + 1):
            rows.append([str(n), _f(cs.c[n - 1]), _f(d_full[n - 1])])
        _emit(args, "n,c,d", rows)
        return 0

    if args.mode == "schur-check":
        h = args.h
        vp = verblunsky_from_moments(compute_moments(spec, args.t + h, K), args.N)
        vm = verblunsky_from_moments(compute_moments(spec, args.t - h, K), args.N)
        fd = [(ap - am) / (2.0 * h) for ap, am in zip(vp.a, vm.a)]
        rhs = rhs_schur(v, spec.q)
        errs = [abs(f - r) for f, r in zip(fd, rhs)]
        report = {
            "N": args.N,
            "t": args.t,
            "h": h,
            "max_err_n_ge_1": max(errs[1:]) if len(errs) > 1 else None,
            "err_n0_with_boundary": errs[0],
            "pass": max(errs[1:]) < args.tol if len(errs) > 1 else True,
        }
        print(json.dumps(report, indent=1, sort_keys=True))
        return 0 if report["pass"] else 2

    raise ValueError(f"unknown circle mode {args.mode!r}")


def _cmd_oracle(args):
    ex = ClosedFormExample(args.family, args.delta, args.q)
    fn = example1_coeffs if args.family == "example1" else example2_coeffs
    rc = fn(ex, args.t, args.N)
    rows = _coeff_rows(args.t, rc.beta, [0j] + list(rc.alpha))
    _emit(args, "n,re_beta,im_beta,re_alpha,im_alpha", rows)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ertl", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moments", help="moment table of a modified functional")
    m.add_argument("--measure", required=True, help="JSON spec (inline or path)")
    m.add_argument("--t", type=float, default=0.0)
    m.add_argument("--K", type=int, required=True)
    m.add_argument("--out", default="-")
    m.set_defaults(func=_cmd_moments)

    fm = sub.add_parser("from-measure", help="recurrence coefficients from moments")
    fm.add_argument("--measure", required=True)
    fm.add_argument("--t", default="0.0", help="comma-separated time points")
    fm.add_argument("--N", type=int, required=True)
    fm.add_argument("--out", default="-")
    fm.add_argument("--dump-poly", default=None, help="JSON dump of the full sequence")
    fm.set_defaults(func=_cmd_from_measure)

    sim = sub.add_parser("simulate", help="integrate a lattice or circle flow")
    sim.add_argument("--system", required=True,
                     choices=["ertl", "rtl1", "rtl2", "langmuir", "cd", "schur"])
    sim.add_argument("--N", type=int, default=None)
    sim.add_argument("--p", type=_parse_complex, default=0j)
    sim.add_argument("--q", type=_parse_complex, default=0j)
    sim.add_argument("--t0", type=float, default=0.0)
    sim.add_argument("--t-end", type=float, required=True)
    sim.add_argument("--t-out", default=None, help="comma-separated output times")
    sim.add_argument("--init", default=None, help="initial data JSON (inline or path)")
    sim.add_argument("--rel-tol", type=float, default=1e-10)
    sim.add_argument("--abs-tol", type=float, default=1e-12)
    sim.add_argument("--out", default="-")
    sim.set_defaults(func=_cmd_simulate)

    vl = sub.add_parser("verify-lax", help="commutator identity residual report")
    vl.add_argument("--N", type=int, required=True)
    vl.add_argument("--p", type=_parse_complex, default=1 + 0j)
    vl.add_argument("--q", type=_parse_complex, default=1 + 0j)
    vl.add_argument("--t", type=float, default=0.0)
    vl.add_argument("--seed", type=int, default=0)
    vl.add_argument("--count", type=int, default=1)
    vl.add_argument("--init", default=None)
    vl.add_argument("--tol", type=float, default=1e-12)
    vl.set_defaults(func=_cmd_verify_lax)

    sp = sub.add_parser("spectrum", help="eigenvalues along a trajectory CSV")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=_cmd_spectrum)

    ci = sub.add_parser("circle", help="unit-circle pipelines")
    ci.add_argument("mode", choices=["verblunsky", "kernel", "cd", "schur-check"])
    ci.add_argument("--measure", default=None, help="JSON circle spec; default Lebesgue")
    ci.add_argument("--q", type=_parse_complex, default=0.5 + 0j)
    ci.add_argument("--N", type=int, required=True)
    ci.add_argument("--t", type=float, default=0.0)
    ci.add_argument("--w", type=_parse_complex, default=1 + 0j)
    ci.add_argument("--h", type=float, default=1e-4, help="FD step for schur-check")
    ci.add_argument("--tol", type=float, default=1e-5)
    ci.add_argument("--out", default="-")
    ci.set_defaults(func=_cmd_circle)

    orc = sub.add_parser("oracle", help="closed-form coefficient families")
    orc.add_argument("family", choices=["example1", "example2"])
    orc.add_argument("--delta", type=float, required=True)
    orc.add_argument("--q", type=float, required=True)
    orc.add_argument("--t", type=float, default=0.0)
    orc.add_argument("--N", type=int, required=True)
    orc.add_argument("--out", default="-")
    orc.set_defaults(func=_cmd_oracle)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ErtlError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
