from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__ as _engine_version
from .analytics import (
    commute_times_exact,
    cover_time_bounds,
    hitting_times_tetali,
    private_commute_times,
    private_cover_time,
    private_hitting_times,
    private_hitting_times_tetali,
    resistance_matrix,
    resistance_sensitivity_demo,
)
from .cuts import cut_release
from .edgelist import load_graph, save_graph, write_values_csv
from .errors import PrivGraphError
from .experiment import DEFAULT_SPECTRAL_BETA, ExperimentConfig, run_experiment
from .graph import edge_endpoints
from .hash_utils import canonical_json_dumps, verify_report, write_report
from .mirror_descent import MirrorDescentConfig
from .oracles import brute_force_max_cut_error
from .privacy import BudgetLedger, topology_sample
from .sampler import BernoulliProfile, enumerate_conditional
from .schemas import ReleaseSettings, load_model, release_meta
from .spectral import spectral_release

logger = logging.getLogger("privgraph")

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _settings(args: argparse.Namespace) -> ReleaseSettings:
    path = getattr(args, "config", None)
    if not path:
        return ReleaseSettings()
    return load_model(ReleaseSettings, Path(path))


def _pick(flag: Any, settings: ReleaseSettings, name: str, default: Any = None) -> Any:
    """Explicit flag, then the settings document, then the default."""
    if flag is not None:
        return flag
    value = getattr(settings, name)
    return default if value is None else value


def _resolve_seed(args: argparse.Namespace, settings: ReleaseSettings) -> int:
    seed = _pick(getattr(args, "seed", None), settings, "seed")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    return int(seed)


def _require(value: Any, flag: str) -> Any:
    if value is None:
        raise _UsageError(f"{flag} is required (flag or --config)")
    return value


class _UsageError(ValueError):
    pass


def _write_meta(release, path: Optional[str], wall_time_ms: float) -> None:
    if not path:
        return
    meta = release_meta(release, wall_time_ms=wall_time_ms)
    write_report(meta.model_dump(mode="json", exclude_none=True), Path(path))


def _cmd_spectral(args: argparse.Namespace) -> int:
    settings = _settings(args)
    epsilon = _require(_pick(args.epsilon, settings, "epsilon"), "--epsilon")
    beta = _pick(args.beta, settings, "beta", DEFAULT_SPECTRAL_BETA)
    seed = _resolve_seed(args, settings)
    G = load_graph(args.input)
    started = time.perf_counter()
    release = spectral_release(G, epsilon, beta, np.random.default_rng(seed), BudgetLedger(), seed=seed)
    elapsed = (time.perf_counter() - started) * 1000.0
    save_graph(release.graph, args.output)
    _write_meta(release, args.meta, elapsed)
    total = release.budget
    print(f"ok: wrote {args.output} (m_hat={release.m_hat}, budget eps={total.epsilon:g} delta={total.delta:g})")
    return EXIT_OK


def _cmd_cut(args: argparse.Namespace) -> int:
    settings = _settings(args)
    epsilon = _require(_pick(args.epsilon, settings, "epsilon"), "--epsilon")
    delta = _require(_pick(args.delta, settings, "delta"), "--delta")
    beta = _pick(args.beta, settings, "beta")
    config = MirrorDescentConfig(
        iterations=_pick(args.md_iters, settings, "md_iterations"),
        mass_fraction=_pick(args.mass_fraction, settings, "mass_fraction", 0.5),
    )
    seed = _resolve_seed(args, settings)
    G = load_graph(args.input)
    started = time.perf_counter()
    release = cut_release(
        G, epsilon, delta, np.random.default_rng(seed), beta=beta, config=config, ledger=BudgetLedger(), seed=seed
    )
    elapsed = (time.perf_counter() - started) * 1000.0
    save_graph(release.graph, args.output)
    _write_meta(release, args.meta, elapsed)
    total = release.budget
    print(f"ok: wrote {args.output} (m_hat={release.m_hat}, budget eps={total.epsilon:g} delta={total.delta:g})")
    return EXIT_OK


def _pair_rows(matrix: np.ndarray):
    n = matrix.shape[0]
    return [(u, v, float(matrix[u, v])) for u in range(n) for v in range(u + 1, n)]


def _hitting_rows(matrix: np.ndarray):
    # matrix[u, t]: expected steps from u to t
    n = matrix.shape[0]
    return [(t, u, float(matrix[u, t])) for t in range(n) for u in range(n)]


def _cmd_analytics(args: argparse.Namespace) -> int:
    G = load_graph(args.input)
    stat = args.stat
    if args.exact:
        if stat == "resistance":
            rows, header = _pair_rows(resistance_matrix(G)), ("u", "v", "value")
        elif stat == "commute":
            rows, header = _pair_rows(commute_times_exact(G)), ("u", "v", "value")
        elif stat == "cover":
            commute = dict(((u, v), c) for u, v, c in _pair_rows(commute_times_exact(G)))
            lower, upper = cover_time_bounds(commute)
            rows = [("estimate", max(commute.values())), ("lower", lower), ("upper", upper)]
            header = ("quantity", "value")
        else:
            rows, header = _hitting_rows(hitting_times_tetali(G)), ("t", "u", "value")
        write_values_csv(args.output, header, rows)
        print(f"ok: wrote {args.output} (exact {stat})")
        return EXIT_OK

    if stat == "resistance":
        raise _UsageError("resistance has no private estimator; use commute, cover or hitting")
    settings = _settings(args)
    epsilon = _require(_pick(args.epsilon, settings, "epsilon"), "--epsilon")
    beta = _pick(args.beta, settings, "beta", DEFAULT_SPECTRAL_BETA)
    seed = _resolve_seed(args, settings)
    rng = np.random.default_rng(seed)
    ledger = BudgetLedger()
    if stat == "commute":
        result = private_commute_times(G, epsilon, beta, rng, ledger)
        rows, header, repaired = _pair_rows(result.matrix), ("u", "v", "value"), result.repaired
    elif stat == "cover":
        cover = private_cover_time(G, epsilon, beta, rng, ledger)
        rows = [("estimate", cover.estimate), ("lower", cover.lower), ("upper", cover.upper)]
        header, repaired = ("quantity", "value"), cover.commute.repaired
    else:
        route = private_hitting_times_tetali if args.hitting_route == "tetali" else private_hitting_times
        result = route(G, epsilon, beta, rng, ledger)
        rows = [(t, u, float(h)) for t, vec in sorted(result.vectors.items()) for u, h in enumerate(vec.values)]
        header, repaired = ("t", "u", "value"), result.repaired
    write_values_csv(args.output, header, rows)
    total = ledger.total()
    print(f"ok: wrote {args.output} (private {stat}, budget eps={total.epsilon:g}, repaired={str(repaired).lower()})")
    return EXIT_OK


def _cmd_sample(args: argparse.Namespace) -> int:
    settings = _settings(args)
    epsilon = _require(_pick(args.epsilon, settings, "epsilon"), "--epsilon")
    seed = _resolve_seed(args, settings)
    G = load_graph(args.input)
    ledger = BudgetLedger()
    ids = topology_sample(G, args.k, epsilon, np.random.default_rng(seed), ledger)
    doc = {
        "n": G.n,
        "k": args.k,
        "epsilon": epsilon,
        "seed": seed,
        "slots": ids.tolist(),
        "edges": [list(edge_endpoints(int(e), G.n)) for e in ids],
        "ledger": ledger.as_records(),
    }
    write_report(doc, Path(args.output))
    print(f"ok: wrote {args.output} ({len(ids)} slots)")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = load_model(ExperimentConfig, Path(args.experiment))
    if getattr(args, "seed", None) is not None:
        config = config.model_copy(update={"seed": args.seed})
    report = run_experiment(config, threads=getattr(args, "threads", None))
    sealed = write_report(report, Path(args.out))
    failed = [t for t in sealed["thresholds"] if not t["passed"]]
    if failed:
        print(f"failed: {len(failed)} of {len(sealed['thresholds'])} thresholds; see {args.out}")
        return EXIT_THRESHOLD
    print(f"ok: wrote {args.out} ({len(sealed['thresholds'])} thresholds passed)")
    return EXIT_OK


def _parse_probabilities(text: str) -> BernoulliProfile:
    try:
        probs = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise _UsageError(f"invalid probability list: {exc}") from exc
    return BernoulliProfile.from_probabilities(probs)


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.oracle == "cut-error":
        G = load_graph(args.input)
        H = load_graph(args.other, allow_negative=True)
        error, witness = brute_force_max_cut_error(G, H)
        print(f"ok: max cut error {error:.17g} at S={sorted(witness.S)} T={sorted(witness.T)}")
        return EXIT_OK
    if args.oracle == "conditional":
        law = enumerate_conditional(_parse_probabilities(args.probs), args.k)
        doc = {"k": args.k, "law": [{"x": list(bits), "p": float(p)} for bits, p in law.items()]}
        if args.output:
            Path(args.output).write_text(canonical_json_dumps(doc) + "\n", encoding="utf-8")
            print(f"ok: wrote {args.output} ({len(law)} configurations)")
        else:
            print(f"ok: {json.dumps(doc)}")
        return EXIT_OK
    value = resistance_sensitivity_demo(args.n)
    print(f"ok: resistance change {value:.17g}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    ok, message = verify_report(Path(args.report))
    if not ok:
        print(f"failed: {message}")
        return EXIT_USAGE
    print(f"ok: {message}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Root seed (default: fresh entropy)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="Worker threads for eval")
    common.add_argument("--config", default=argparse.SUPPRESS, help="ReleaseSettings JSON supplying defaults")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="privgraph", parents=[common], description="Differentially private graph releases")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_engine_version}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sp = subparsers.add_parser("spectral", parents=[common], help="Pure-DP spectral release")
    sp.add_argument("--input", required=True, help="Input edge list")
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--beta", type=float, default=None, help="Failure probability for the edge count")
    sp.add_argument("--output", required=True, help="Released edge list")
    sp.add_argument("--meta", default=None, help="Release metadata JSON")

    cp = subparsers.add_parser("cut", parents=[common], help="(eps, delta)-DP cut release")
    cp.add_argument("--input", required=True)
    cp.add_argument("--epsilon", type=float, default=None)
    cp.add_argument("--delta", type=float, default=None)
    cp.add_argument("--beta", type=float, default=None, help="Heavy/light split parameter")
    cp.add_argument("--md-iters", type=int, default=None, help="Mirror-descent rounds (default ceil(n ln n))")
    cp.add_argument("--mass-fraction", type=float, default=None, help="Share of eps for the mass estimate")
    cp.add_argument("--output", required=True)
    cp.add_argument("--meta", default=None)

    ap = subparsers.add_parser("analytics", parents=[common], help="Resistance and random-walk statistics")
    ap.add_argument("--input", required=True)
    ap.add_argument("--stat", required=True, choices=["resistance", "commute", "cover", "hitting"])
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--private", dest="exact", action="store_false")
    mode.add_argument("--exact", dest="exact", action="store_true")
    ap.add_argument("--epsilon", type=float, default=None)
    ap.add_argument("--beta", type=float, default=None)
    ap.add_argument("--hitting-route", choices=["linear", "tetali"], default="linear")
    ap.add_argument("--output", required=True, help="CSV output")

    smp = subparsers.add_parser("sample", parents=[common], help="Raw topology sampler")
    smp.add_argument("--input", required=True)
    smp.add_argument("--k", type=int, required=True, help="Subset size")
    smp.add_argument("--epsilon", type=float, default=None)
    smp.add_argument("--output", required=True, help="JSON output")

    ev = subparsers.add_parser("eval", parents=[common], help="Run an experiment config")
    ev.add_argument("experiment", help="ExperimentConfig JSON")
    ev.add_argument("--out", required=True, help="Report JSON path")

    op = subparsers.add_parser("oracle", parents=[common], help="Brute-force utilities")
    osub = op.add_subparsers(dest="oracle", required=True)
    ce = osub.add_parser("cut-error", help="Exact max (S,T)-cut error between two graphs")
    ce.add_argument("--input", required=True)
    ce.add_argument("--other", required=True, help="Second graph (may be signed)")
    co = osub.add_parser("conditional", help="Enumerate the conditional Bernoulli law")
    co.add_argument("--probs", required=True, help="Comma-separated probabilities")
    co.add_argument("--k", type=int, required=True)
    co.add_argument("--output", default=None)
    rs = osub.add_parser("resistance-sensitivity", help="R(0,1) change on K_n after removing edge {0,1}")
    rs.add_argument("--n", type=int, required=True)

    vp = subparsers.add_parser("verify", parents=[common], help="Check a report's self-hash")
    vp.add_argument("report")
    return parser


_COMMANDS = {
    "spectral": _cmd_spectral,
    "cut": _cmd_cut,
    "analytics": _cmd_analytics,
    "sample": _cmd_sample,
    "eval": _cmd_eval,
    "oracle": _cmd_oracle,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(bool(getattr(args, "verbose", False)))
    try:
        return _COMMANDS[args.command](args)
    except PrivGraphError as exc:
        print(f"failed: {exc.code}: {exc}")
        return EXIT_USAGE
    except _UsageError as exc:
        print(f"failed: E_USAGE: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        print(f"failed: E_IO: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
