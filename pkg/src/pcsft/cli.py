"""
Command-line experiments.

Every subcommand writes one JSON report (stdout or ``--out``). Reports are
byte-identical for identical arguments and seed, whatever ``--jobs`` is.
Exit status: 0 when every verdict passes, 1 on a failed verdict, 2 on input
or validation errors.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fields, filters, io, states
from .exceptions import PCSFTError
from .linalg import frobenius_distance, unitary_from_hamiltonian

#: Statistical residuals must stay below ``C / sqrt(n)`` (``C`` in units of the trace).
FROBENIUS_C = 5.0
#: Monte Carlo averages must agree within this many standard errors.
N_STDERR = 4.0
EXACT_TOL = 1e-10
NORM_TOL = 1e-12


class Report:
    """Structured record of one experiment plus its flat table of checked quantities."""

    def __init__(self, command, args):
        self.data = {"command": command, "args": args, "records": {}, "table": []}

    def record(self, key, value):
        self.data["records"][key] = value

    def row(self, name, value, *, stderr=None, exact=False, threshold=None, compare="le", target=None):
        """
        Add a table row. ``compare`` is ``"le"`` (``|value - target| <= threshold``
        with target 0 by default) or ``None`` for informational rows.
        """
        verdict = None
        if compare == "le" and threshold is not None:
            verdict = "pass" if abs(value - (target or 0.0)) <= threshold else "fail"
        elif compare == "le":
            verdict = "n/a"
        self.data["table"].append({
            "name": name,
            "value": float(value),
            "kind": "exact" if exact else "estimate",
            "stderr": None if exact else (None if stderr is None else float(stderr)),
            "target": None if target is None else float(target),
            "threshold": None if threshold is None else float(threshold),
            "verdict": verdict,
        })

    @property
    def passed(self):
        return all(r["verdict"] != "fail" for r in self.data["table"])

    def dumps(self):
        self.data["passed"] = self.passed
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"


def _mc_threshold(n, scale=1.0):
    return FROBENIUS_C * scale / np.sqrt(n)


def _require_seed(args):
    if args.seed is None:
        raise PCSFTError("--seed is required for sampling commands")


def cmd_sample(args):
    _require_seed(args)
    rho = io.load_operator(args.state, "density")
    spec = states.covariance_from_state(rho, args.sigma2, args.seed)
    ens = fields.sample(spec, args.n, n_jobs=args.jobs)
    n, X, D = ens.count, ens.samples, spec.covariance
    rep = Report("sample", _echo(args, "state", "sigma2", "n", "seed"))

    mean = fields.empirical_mean(ens)
    sd = np.sqrt(np.diag(D).real / n)
    z = np.where(sd > 0, np.abs(mean) / np.where(sd > 0, sd, 1.0), 0.0)
    rep.record("empirical_mean", io.encode_matrix(mean))
    rep.row("mean_residual_max_abs", float(np.max(np.abs(mean))), compare=None)
    rep.row("mean_residual_in_sigma", float(np.max(z)), threshold=N_STDERR)

    Dhat = fields.empirical_covariance(ens)
    rep.record("empirical_covariance", io.encode_matrix(Dhat))
    rep.record("covariance", io.encode_matrix(D))
    rep.row("covariance_residual", frobenius_distance(Dhat, D),
            threshold=_mc_threshold(n, args.sigma2))

    norms2 = np.sum(np.abs(X) ** 2, axis=1)
    err = float(norms2.std(ddof=1) / np.sqrt(n)) if n >= 2 else None
    rep.row("dispersion_exact", fields.dispersion(spec), exact=True, compare=None)
    rep.row("dispersion_estimate", float(norms2.mean()), stderr=err, target=args.sigma2,
            threshold=None if err is None else N_STDERR * err)
    return rep


def cmd_average(args):
    _require_seed(args)
    rho = io.load_operator(args.state, "density")
    A = io.load_operator(args.observable, "observable")
    res = states.check_scaling_relation(A, rho, args.sigma2, args.n, args.seed, n_jobs=args.jobs)
    rep = Report("average", _echo(args, "state", "observable", "sigma2", "n", "seed"))
    rep.row("quantum_average", states.quantum_average(A, rho), exact=True, compare=None)
    rep.row("rhs_sigma2_times_quantum_average", res.rhs, exact=True, compare=None)
    rep.row("lhs_classical_average", res.lhs, stderr=res.stderr, compare=None)
    rep.row("difference", res.difference, stderr=res.stderr, threshold=res.threshold)
    return rep


def cmd_evolve(args):
    _require_seed(args)
    rho = io.load_operator(args.state, "density")
    H = io.load_operator(args.hamiltonian, "hamiltonian")
    U = unitary_from_hamiltonian(H, args.t, args.hbar)
    filt = filters.LinearFilter(U).fit()
    spec = states.covariance_from_state(rho, args.sigma2, args.seed)
    ens_in = fields.sample(spec, args.n, n_jobs=args.jobs)
    ens_out = filt.apply(ens_in)
    rep = Report("evolve", _echo(args, "state", "hamiltonian", "t", "hbar", "sigma2", "n", "seed"))

    rho_t = U @ rho @ U.conj().T
    rep.record("rho_t_exact", io.encode_matrix(rho_t))
    rep.row("dispersion_change", fields.dispersion(ens_out.spec) - fields.dispersion(spec),
            exact=True, threshold=EXACT_TOL)

    rho_hat = states.state_from_covariance(fields.empirical_covariance(ens_out))
    rep.record("rho_t_empirical", io.encode_matrix(rho_hat))
    rep.row("state_residual", frobenius_distance(rho_hat, rho_t), threshold=_mc_threshold(args.n))

    n_in = np.linalg.norm(ens_in.samples, axis=1)
    n_out = np.linalg.norm(ens_out.samples, axis=1)
    rel = np.abs(n_out - n_in) / np.maximum(1.0, n_in)
    rep.row("norm_deviation_max", float(rel.max()), exact=True, threshold=NORM_TOL)
    return rep


def cmd_channel(args):
    rho = io.load_operator(args.state, "density")
    blocks = io.load_channel(args.channel)
    if not args.exact_only:
        _require_seed(args)
    ch = filters.BlockFilter(blocks, unchecked=args.unchecked, tol=args.tol, n_jobs=args.jobs).fit()
    rep = Report("channel", _echo(args, "state", "channel", "sigma2", "n", "seed", "tol",
                                  "exact_only", "unchecked"))
    _validation_rows(rep, ch.validation_, verdict=not args.unchecked)

    out = filters.kraus_channel_exact(ch, rho)
    rep.record("rho_out_exact", io.encode_matrix(out))
    tp = ch.validation_.trace_preserving
    if tp:
        rep.row("output_trace", float(np.trace(out).real), exact=True, target=1.0, threshold=EXACT_TOL)
    else:
        rep.row("output_trace", float(np.trace(out).real), exact=True, compare=None)

    dec = filters.channel_decomposition(ch, rho)
    rep.record("weights", [float(p) for p in dec.weights])
    rep.record("conditional_states",
               [None if s is None else io.encode_matrix(s) for s in dec.conditional_states])
    rep.record("degenerate_branches", list(dec.degenerate))
    if tp:
        rep.row("weights_sum", float(dec.weights.sum()), exact=True, target=1.0, threshold=EXACT_TOL)
    rep.row("decomposition_residual", frobenius_distance(dec.reconstruct(), out),
            exact=True, threshold=EXACT_TOL)

    if np.trace(out).real > states.ZERO_TRACE:
        rho_out = states.state_from_covariance(out)
        D_out = ch.covariance_out(args.sigma2 * rho)
        rep.row("covariance_route_residual",
                frobenius_distance(states.state_from_covariance(D_out), rho_out),
                exact=True, threshold=EXACT_TOL)
        if not args.exact_only:
            spec = states.covariance_from_state(rho, args.sigma2, args.seed)
            rho_hat = filters.output_state_mc(ch, spec, args.n)
            rep.record("rho_out_empirical", io.encode_matrix(rho_hat))
            rep.row("empirical_state_residual", frobenius_distance(rho_hat, rho_out),
                    threshold=_mc_threshold(args.n))
    return rep


def cmd_validate(args):
    blocks = io.load_channel(args.channel)
    rep = Report("validate", _echo(args, "channel", "tol"))
    _validation_rows(rep, filters.validate_kraus(blocks, args.tol))
    return rep


def _validation_rows(rep, v, verdict=True):
    rep.row("kraus_residual_sum_VdagV_minus_I", v.residual, exact=True, threshold=v.tol,
            compare="le" if verdict else None)
    rep.row("povm_residual_sum_VVdag_minus_I", v.povm_residual, exact=True, compare=None)
    rep.record("blocks_psd", v.blocks_psd)
    rep.record("trace_preserving", v.trace_preserving)


def _echo(args, *names):
    out = {}
    for k in names:
        v = getattr(args, k)
        out[k] = Path(v).name if isinstance(v, str) and k in ("state", "observable",
                                                                "hamiltonian", "channel") else v
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcsft", description="Quantum states and channels on classical Gaussian fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sampling=True):
        p.add_argument("--out", help="write the report here instead of stdout")
        if sampling:
            p.add_argument("--sigma2", type=float, default=1.0)
            p.add_argument("--n", type=int, default=100_000)
            p.add_argument("--seed", type=int)
            p.add_argument("--jobs", type=int, default=1,
                           help="sampling threads; does not change the output")

    p = sub.add_parser("sample", help="sample N(0, sigma2 rho) and compare statistics")
    p.add_argument("--state", required=True)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("average", help="classical vs rescaled quantum average")
    p.add_argument("--state", required=True)
    p.add_argument("--observable", required=True)
    common(p)
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("evolve", help="unitary filter against the exact evolved state")
    p.add_argument("--state", required=True)
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--hbar", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("channel", help="Kraus block filter against the exact channel")
    p.add_argument("--state", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--tol", type=float, default=EXACT_TOL)
    p.add_argument("--exact-only", action="store_true")
    p.add_argument("--unchecked", action="store_true",
                   help="allow channels that are not trace preserving")
    common(p)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("validate", help="check completeness of a Kraus set")
    p.add_argument("--channel", required=True)
    p.add_argument("--tol", type=float, default=EXACT_TOL)
    common(p, sampling=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "n", 1) < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return 2
    try:
        rep = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rep.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
