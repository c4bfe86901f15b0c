"""Command-line entry point: gen, basis, run, sweep, verify."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .errors import RoutingError
from .network import network_stats, save_network
from .policies import DEBUG_POLICY_NAMES, POLICY_NAMES
from .spanner import exploration_basis

log = logging.getLogger("bandit_routing")


def _int_list(s):
    return [int(x) for x in s.split(",") if x]


def _str_list(s):
    return [x.strip() for x in s.split(",") if x.strip()]


def _float_list(s):
    return [float(x) for x in s.split(",") if x]


def _add_network(p, many=False):
    g = p.add_mutually_exclusive_group()
    if many:
        g.add_argument("--grid", type=_int_list, help="grid side length(s), comma separated")
    else:
        g.add_argument("--grid", type=int, help="grid side length p")
    g.add_argument("--network", help="network JSON file")


def _network_spec(args) -> harness.NetworkSpec:
    if args.network:
        return harness.NetworkSpec(file=args.network)
    if args.grid is None:
        raise ValueError("give --grid or --network")
    return harness.NetworkSpec(grid=args.grid)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit-routing",
                                     description="Online shortest-path routing with end-to-end delay feedback.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="print network statistics; optionally write the network JSON")
    _add_network(p)
    p.add_argument("--out", help="write the network as JSON here")

    p = sub.add_parser("basis", help="compute the exploration basis and its S")
    _add_network(p)
    p.add_argument("--out", help="output JSON file (default: stdout)")

    names = POLICY_NAMES + DEBUG_POLICY_NAMES
    p = sub.add_parser("run", help="one simulation run, optionally writing a regret trace CSV")
    _add_network(p)
    p.add_argument("--policy", required=True, choices=names)
    p.add_argument("--T", type=int, default=25000)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--mu-max", type=float, default=1000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stride", type=int, default=100)
    p.add_argument("--budget-secs", type=float, default=90.0)
    p.add_argument("--record-runtime", action="store_true",
                   help="fill the runtime_ms column (makes output non-reproducible)")
    p.add_argument("--out", help="trace CSV path")

    p = sub.add_parser("sweep", help="many runs over a grid of settings")
    _add_network(p, many=True)
    p.add_argument("--config", help="JSON config; command-line flags override it")
    p.add_argument("--policy", type=_str_list, dest="policies",
                   help="comma separated policy names")
    p.add_argument("--T", type=_int_list)
    p.add_argument("--R", type=_float_list)
    p.add_argument("--mu-max", type=float)
    p.add_argument("--iters", type=int, dest="iterations")
    p.add_argument("--seed", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--budget-secs", type=float)
    p.add_argument("--record-runtime", action="store_true", default=None)
    p.add_argument("--out", help="aggregated CSV path; per-run rows go to <out>.runs.csv")

    p = sub.add_parser("verify", help="check fast routines against exhaustive oracles")
    _add_network(p)
    p.add_argument("--basis", help="basis JSON file to check instead of a fresh one")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load(args):
    spec = _network_spec(args)
    return spec, spec.build()


def cmd_gen(args) -> int:
    spec, net = _load(args)
    st = network_stats(net)
    if args.out:
        save_network(net, args.out)
    print(f"p={spec.label or '-'} d={st.d} d0={st.d0} paths={st.path_count} "
          f"min_hops={st.min_hops} max_hops={st.max_hops}")
    return 0


def cmd_basis(args) -> int:
    _, net = _load(args)
    basis = exploration_basis(net)
    obj = basis.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(obj, fh)
    else:
        json.dump(obj, sys.stdout)
        sys.stdout.write("\n")
    hops = ",".join(str(p.hop_count) for p in basis.paths)
    print(f"d={net.d} d0={basis.d0} S={basis.S!r} hops={hops}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    spec, _ = _load(args)
    res = harness.run_single(spec, args.policy, args.T, args.R, args.seed,
                             args.mu_max, args.stride, args.budget_secs)
    if res.status != "ok":
        print(f"policy={res.policy} seed={res.seed} T={res.T}: {res.status}")
        return 0
    if args.out:
        harness.write_csv(args.out, harness.TRACE_COLUMNS,
                          harness.trace_rows(res, args.record_runtime))
    commit = "none" if res.commit_epoch is None else res.commit_epoch
    print(f"policy={res.policy} seed={res.seed} T={res.T} "
          f"cum_regret={res.final_pseudo_regret:.6g} time_avg={res.time_avg_pseudo_regret:.6g} "
          f"commit_epoch={commit} runtime_ms={res.runtime_ms:.1f}")
    return 0


def _sweep_config(args) -> harness.ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise ValueError("config must be a JSON object")
    if args.network:
        base["network"] = {"file": args.network}
    elif args.grid:
        base["network"] = [{"grid": g} for g in args.grid]
    for key in ("policies", "T", "R", "iterations", "seed", "stride", "jobs",
                "budget_secs", "record_runtime", "out"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    if args.mu_max is not None:
        base["mu_max"] = args.mu_max
    base.setdefault("policies", list(POLICY_NAMES))
    base.setdefault("T", [25000])
    base.setdefault("R", [1.0])
    return harness.ExperimentConfig.from_json(base)


def cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    results = harness.sweep(cfg)
    agg = harness.aggregate(results)
    for a in agg:
        mean = a["mean_time_avg_regret"]
        se = a["stderr_time_avg_regret"]
        shown = "n/a" if mean is None else f"{mean:.6g} +/- {se:.3g}"
        print(f"{a['policy']:>15} p={a['p'] or '-'} T={a['T']} R={a['R']:g} "
              f"time_avg={shown} runs={a['runs']} not_run={a['not_run']}")
    if cfg.out:
        harness.write_csv(cfg.out, harness.SWEEP_COLUMNS,
                          harness.aggregate_rows(agg, cfg.record_runtime))
        harness.write_csv(cfg.out + ".runs.csv", harness.RUN_COLUMNS,
                          (harness.run_row(r, cfg.record_runtime) for r in results))
    return 0


def cmd_verify(args) -> int:
    spec, net = _load(args)
    basis_obj = None
    if args.basis:
        with open(args.basis) as fh:
            basis_obj = json.load(fh)
        if not isinstance(basis_obj, dict):
            raise ValueError("basis file must hold a JSON object")
    expected = spec.grid ** 2 if spec.grid is not None else None
    checks = harness.verify(net, basis_obj, args.trials, args.seed, expected_rank=expected)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return 0 if all(c.passed for c in checks) else 1


COMMANDS = {"gen": cmd_gen, "basis": cmd_basis, "run": cmd_run,
            "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except (OSError, ValueError, TypeError, RoutingError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
