"""
Command-line front end.

Every command reads a channel spec (see :mod:`kraus_thermo.spec_io`), prints a
plain-text report and writes a JSON result next to the input
(``<stem>.<command>.json``) unless ``--out`` says otherwise.  Exit status is
0 on success, 1 on errors and 2 when a verdict came out undetermined.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import channel as chmod
from . import generic, measure, thermo, trajectory
from .errors import KrausThermoError
from .spec_io import dump_json, explicit_spec, load_spec, to_jsonable

EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED = 0, 1, 2
LOG2 = np.log(2.0)

log = logging.getLogger("kraus_thermo")


def _fmt(x, digits=10) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{x:.{digits}g}"
    if isinstance(x, complex):
        return f"{x.real:.{digits}g}{x.imag:+.{digits}g}j"
    if isinstance(x, np.ndarray) and x.ndim == 2:
        return "[" + "; ".join(" ".join(_fmt(_clean(v), 6) for v in row) for row in x) + "]"
    return str(x)


def _clean(v):
    v = complex(v)
    return v.real if abs(v.imag) < 1e-14 else v


def _table(rows, out) -> None:
    width = max(len(r[0]) for r in rows)
    for name, value in rows:
        print(f"  {name:<{width}}  {_fmt(value)}", file=out)


def _result_path(args, command: str) -> Path | None:
    if getattr(args, "out", None):
        return Path(args.out)
    spec = getattr(args, "spec", None)
    if spec:
        p = Path(spec)
        return p.with_name(f"{p.stem}.{command}.json")
    return None


def _write_result(args, command: str, payload: dict, out) -> None:
    path = _result_path(args, command)
    if path is None:
        return
    doc = {"command": command, "input": getattr(args, "spec", None), "result": to_jsonable(payload)}
    dump_json(doc, path)
    print(f"result written to {path}", file=out)


def _ensure_stochastic(ch: chmod.Channel, out) -> tuple[chmod.Channel, bool]:
    if chmod.is_stochastic(ch, tol=1e-8):
        return ch, False
    print("  channel is not stochastic; normalising first", file=out)
    return chmod.normalize(ch), True


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(args, out=sys.stdout) -> int:
    spec = load_spec(args.spec)
    fam = spec.family
    ch = chmod.Channel(fam)
    stoch = chmod.is_stochastic(ch)
    sd = ch.spectral
    report = chmod.irreducibility_report(ch)
    cls = generic.phi_erg_classify(fam)
    rows = [("dimension", fam.dim), ("atoms", len(fam)), ("measure mass", fam.mass),
            ("stochastic", stoch.ok), ("||phi*(Id) - Id||", stoch.residual),
            ("lambda", sd.lam), ("simple", sd.simple), ("gap", sd.gap),
            ("rho", sd.rho), ("sigma", sd.sigma),
            ("irreducibility", report.verdict), ("classification", str(cls))]
    payload = {"dim": fam.dim, "atoms": len(fam), "mass": fam.mass, "stochastic": stoch.ok,
               "stochastic_residual": stoch.residual, "lambda": sd.lam, "simple": sd.simple,
               "gap": sd.gap, "rho": sd.rho, "sigma": sd.sigma,
               "irreducibility": report.verdict, "classification": cls.kind,
               "invariant_subspaces": [s.basis for s in cls.subspaces]}
    try:
        nch = chmod.normalize(ch)
        nsd = nch.spectral
        rows += [("normalized lambda", nsd.lam),
                 ("normalized stochastic residual", chmod.is_stochastic(nch).residual)]
        payload["normalized"] = explicit_spec(nch.family)
    except KrausThermoError as exc:
        rows.append(("normalization", f"unavailable ({exc})"))
        payload["normalized"] = None
    print(f"analysis of {args.spec}", file=out)
    _table(rows, out)
    _write_result(args, "analyze", payload, out)
    undetermined = report.verdict == "undetermined" or cls.kind == "undetermined"
    return EXIT_UNDETERMINED if undetermined else EXIT_OK


def cmd_entropy(args, out=sys.stdout) -> int:
    spec = load_spec(args.spec)
    fam = spec.family
    ch, normalized = _ensure_stochastic(chmod.Channel(fam), out)
    kernel = thermo.transition_kernel(ch)
    h = thermo.entropy(ch)
    unit = "bits" if args.bits else "nats"
    shown = h / LOG2 if args.bits else h
    rows = [("measure mass", fam.mass), ("atoms", len(fam)), ("normalized first", normalized),
            (f"entropy ({unit})", shown), ("live rows", int(kernel.alive.sum())),
            ("sum of stationary masses", float(kernel.q.sum())),
            ("max kernel row-sum error",
             float(np.max(np.abs(kernel.P[kernel.alive] @ kernel.weights - 1.0))))]
    print(f"entropy of {args.spec}", file=out)
    _table(rows, out)
    _write_result(args, "entropy", {"entropy": shown, "unit": unit, "mass": fam.mass,
                                    "normalized_first": normalized,
                                    "stationary_masses": kernel.q, "rho": ch.spectral.rho}, out)
    return EXIT_OK


def cmd_pressure(args, out=sys.stdout) -> int:
    spec = load_spec(args.spec)
    H = spec.hamiltonian if spec.hamiltonian is not None else spec.family
    pot = thermo.potential_data(H)
    P = thermo.pressure(H)
    L = thermo.gibbs_maximizer(H, args.special_atom)
    check = thermo.gibbs_condition_check(L, H)
    value = thermo.pressure_functional(L, H, pot)
    print(f"pressure of {args.spec}", file=out)
    _table([("lambda_H", pot.lam), ("pressure log(lambda_H)", P),
            ("functional at maximizer", value), ("difference", value - P),
            ("Gibbs condition", check.ok), ("Gibbs deviation", check.deviation)], out)
    print("  U_H per atom:", file=out)
    for i, u in enumerate(pot.U[: args.show_atoms]):
        print(f"    {i:5d}  {u: .10g}", file=out)
    if len(pot.U) > args.show_atoms:
        print(f"    ... ({len(pot.U) - args.show_atoms} more)", file=out)
    maximizer_path = _result_path(args, "pressure")
    payload = {"lambda_H": pot.lam, "pressure": P, "U": pot.U,
               "functional_at_maximizer": value, "gibbs_condition": check.ok,
               "gibbs_deviation": check.deviation}
    if maximizer_path is not None:
        mpath = maximizer_path.with_name(maximizer_path.stem + ".maximizer.json")
        dump_json(explicit_spec(L), mpath)
        payload["maximizer_spec"] = str(mpath)
        print(f"Gibbs maximizer written to {mpath}", file=out)
    _write_result(args, "pressure", payload, out)
    return EXIT_OK


def cmd_simulate(args, out=sys.stdout) -> int:
    spec = load_spec(args.spec)
    ch = chmod.Channel(spec.family)
    config = trajectory.TrajectoryConfig(args.steps, args.burn_in, args.chains, args.seed)
    x0 = np.eye(ch.dim)[0] if args.x0 is None else np.array([complex(s) for s in args.x0.split(",")])
    sim = trajectory.simulate(ch, x0, config)
    bary = sim.barycenter
    rho = ch.spectral.rho
    rows = [("chains", config.n_chains), ("steps", config.n_steps), ("burn-in", config.burn_in),
            ("seed", config.seed), ("support points", len(sim.empirical)),
            ("barycenter", bary), ("rho_L", rho),
            ("||barycenter - rho_L||", float(np.linalg.norm(bary - rho))),
            ("chain barycenter spread", sim.spread)]
    print(f"simulation of {args.spec}", file=out)
    _table(rows, out)
    if args.csv:
        trajectory.write_trajectory_csv(args.csv, sim)
        print(f"trajectories written to {args.csv}", file=out)
    _write_result(args, "simulate", {
        "config": vars(config), "empirical": {"points": sim.empirical.points,
                                             "weights": sim.empirical.weights},
        "barycenter": bary, "rho": rho, "distance": float(np.linalg.norm(bary - rho)),
        "chain_barycenters": list(sim.chain_barycenters), "spread": sim.spread}, out)
    return EXIT_OK


def cmd_perturb(args, out=sys.stdout) -> int:
    spec = load_spec(args.spec)
    fam = spec.family
    before = generic.phi_erg_classify(fam)
    print(f"perturbation of {args.spec} (epsilon={args.epsilon:g})", file=out)
    try:
        new = generic.irreducible_perturbation(fam, args.epsilon, args.atom)
    except RuntimeError as exc:
        _table([("before", str(before)), ("after", f"undetermined ({exc})")], out)
        _write_result(args, "perturb", {"before": before.kind, "after": "undetermined"}, out)
        return EXIT_UNDETERMINED
    after = generic.phi_erg_classify(new)
    dist = generic.perturbation_distance(new, fam)
    _table([("before", str(before)), ("after", str(after)), ("distance", dist)], out)
    payload = {"before": before.kind, "after": after.kind, "distance": dist}
    path = _result_path(args, "perturb")
    if path is not None:
        spath = path.with_name(path.stem + ".spec.json")
        dump_json(explicit_spec(new), spath)
        payload["perturbed_spec"] = str(spath)
        print(f"perturbed spec written to {spath}", file=out)
    _write_result(args, "perturb", payload, out)
    return EXIT_UNDETERMINED if after.kind == "undetermined" else EXIT_OK


def _example_rows(name: str, args):
    """(quantity, expected, computed, tolerance) rows for one named example."""
    rows = []
    if name == "markov":
        p = [float(s) for s in args.p.split(",")]
        P = np.array(p).reshape(2, 2)
        _, fam = measure.from_markov_chain(P)
        ch = chmod.Channel(fam)
        pi = np.array([P[0, 1], 1 - P[0, 0]]) / (1 - P[0, 0] + P[0, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(P > 0, P * np.log(np.where(P > 0, P, 1)), 0)
        rate = float(-np.sum(pi[None, :] * plogp))
        rows += [("rho_inv[0,0]", pi[0], ch.spectral.rho[0, 0].real, 1e-9),
                 ("rho_inv[1,1]", pi[1], ch.spectral.rho[1, 1].real, 1e-9),
                 ("entropy (classical rate)", rate, thermo.entropy(ch), 1e-9),
                 ("irreducible", "irreducible", chmod.irreducibility_report(ch).verdict, None)]
    elif name == "four-proj":
        fam = measure.build_family(measure.four_projector_measure())
        ch = chmod.Channel(fam)
        inv = trajectory.invariant_measure(ch)
        nu = inv.measure
        rows += [("rho_inv", np.eye(2) / 2, ch.spectral.rho, 1e-12),
                 ("nu mass at e1", 0.5, nu.mass_near([1, 0]), 1e-10),
                 ("nu mass at e2", 0.5, nu.mass_near([0, 1]), 1e-10),
                 ("barycenter of nu", np.eye(2) / 2, trajectory.barycenter(nu), 1e-10),
                 ("irreducible", "irreducible", chmod.irreducibility_report(ch).verdict, None)]
    elif name == "shift":
        _, fam = measure.example1_family(args.mass_tol)
        ch = chmod.Channel(fam)
        rng = np.random.default_rng(args.seed)
        G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho = G @ G.conj().T
        rho /= np.trace(rho).real
        E11 = np.diag([1.0, 0.0])
        nu = trajectory.markov_operator_apply(trajectory.EmpiricalMeasure.dirac([1, 0]), ch)
        rows += [("atoms kept", "-", len(fam), None),
                 ("phi(rho) for a random density", E11, ch.apply(rho), 1e-8),
                 ("mass of delta_e1 pushforward at e1", 1.0, nu.mass_near([1, 0]), 1e-10),
                 ("classification", "phi_erg(dim 1)", str(generic.phi_erg_classify(fam)), None)]
    elif name == "gaussian":
        _, fam = measure.from_gaussian_rotation(args.n_r, args.n_theta)
        ch = chmod.Channel(fam)
        h = thermo.entropy(ch, rho=np.eye(2) / 2)
        closed = -(np.log(2.0) + 1.0 - np.euler_gamma)
        rows += [("fixed point", np.eye(2) / 2, ch.spectral.rho, 1e-6),
                 ("entropy (target value)", -3.61816, h, 2e-3),
                 ("entropy (closed form)", closed, h, 2e-3)]
    else:
        raise ValueError(f"unknown example {name!r}")
    return rows


def _agrees(expected, computed, tol) -> bool:
    if tol is None:
        return expected == "-" or str(expected) == str(computed)
    return bool(np.max(np.abs(np.asarray(expected) - np.asarray(computed))) <= tol)


def cmd_examples(args, out=sys.stdout) -> int:
    rows = _example_rows(args.name, args)
    print(f"example {args.name}", file=out)
    w = max(len(r[0]) for r in rows)
    print(f"  {'quantity':<{w}}  {'expected':>24}  {'computed':>24}  status", file=out)
    payload = []
    for name, expected, computed, tol in rows:
        ok = _agrees(expected, computed, tol)
        status = "ok" if ok else "MISMATCH"
        print(f"  {name:<{w}}  {_fmt(expected):>24}  {_fmt(computed):>24}  {status}", file=out)
        payload.append({"quantity": name, "expected": expected, "computed": computed,
                        "tolerance": tol, "agrees": ok})
    _write_result(args, f"examples-{args.name}", {"rows": payload}, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kraus-thermo", description=__doc__.strip().splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_spec(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("spec", help="channel spec (JSON)")
        sp.add_argument("--out", help="result file (default: next to the spec)")
        return sp

    with_spec("analyze", "spectral data, irreducibility and normalization")
    sp = with_spec("entropy", "entropy and transition kernel")
    sp.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    sp = with_spec("pressure", "pressure, potential and the Gibbs maximizer")
    sp.add_argument("--special-atom", type=int, default=None)
    sp.add_argument("--show-atoms", type=int, default=20)
    sp = with_spec("simulate", "Monte Carlo chains of the projective kernel")
    sp.add_argument("--steps", type=int, default=10_000)
    sp.add_argument("--burn-in", type=int, default=100)
    sp.add_argument("--chains", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--x0", help="start vector as comma-separated complex numbers")
    sp.add_argument("--csv", help="also write all trajectories to this CSV file")
    sp = with_spec("perturb", "nearby irreducible family")
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--atom", type=int, default=0, help="reference atom index")

    sp = sub.add_parser("examples", help="run a worked example end to end")
    sp.add_argument("name", choices=["shift", "four-proj", "markov", "gaussian"])
    sp.add_argument("--p", default="0.5,0.3,0.5,0.7",
                    help="column-stochastic 2x2 matrix, row-major (markov)")
    sp.add_argument("--n-r", type=int, default=40)
    sp.add_argument("--n-theta", type=int, default=32)
    sp.add_argument("--mass-tol", type=float, default=1e-4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="result file")
    return p


COMMANDS = {"analyze": cmd_analyze, "entropy": cmd_entropy, "pressure": cmd_pressure,
            "simulate": cmd_simulate, "perturb": cmd_perturb, "examples": cmd_examples}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, sys.stdout)
    except (KrausThermoError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
