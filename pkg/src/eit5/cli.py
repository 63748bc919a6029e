"""Command-line entry point ``eit5``.

Exit codes: 0 success, 1 configuration error, 2 solver degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, DegenerateSystemError, EIT5Error, IntegrationError

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2


def _cmd_sweep(args) -> int:
    from .sweep import SweepConfig, load_config, preset, run_sweep, write_outputs

    if args.config is None and args.preset is None:
        raise ConfigError("give --config, --preset or both")
    base = preset(args.preset) if args.preset else SweepConfig()
    cfg = load_config(args.config, base) if args.config else base
    if args.method:
        cfg = SweepConfig.from_dict({**cfg.to_dict(), "method": args.method})
    table = run_sweep(cfg)
    write_outputs(table, args.out, args.json)
    failed = sum(bool(e) for e in table.errors)
    print(f"wrote {table.n_rows} rows to {args.out}" + (f" ({failed} failed)" if failed else ""))
    if failed == table.n_rows:
        raise DegenerateSystemError("every grid point failed")
    return EXIT_OK


def _cmd_features(args) -> int:
    from .sweep import SweepConfig, features_from_csv

    config = None
    if args.config_json:
        with open(args.config_json, encoding="utf-8") as fh:
            config = SweepConfig.from_dict(json.load(fh)["config"])
    report = features_from_csv(args.input, config, args.min_prominence)
    if isinstance(report, dict):
        payload = {key: rep.to_dict() for key, rep in report.items()}
    else:
        payload = report.to_dict()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    print(f"wrote feature report to {args.out}")
    return EXIT_OK


def _selftest_checks():
    """Small oracle-equivalence checks; yields ``(name, passed, detail)``."""
    from .analytic import chi_reduced
    from .dynamics import chi_time_domain
    from .model import AtomParams, FieldParams
    from .steady_state import chi_numeric

    rng = np.random.default_rng(12345)
    worst_as, worst_st = 0.0, 0.0
    for _ in range(20):
        atom = AtomParams(gamma_C=rng.uniform(0, 1e-2), gamma_Cprime=rng.uniform(0, 1e-2),
                          gamma_bb_tilde=rng.uniform(1e-3, 1e-2))
        fields = FieldParams(omega_mu=rng.uniform(0, 3), omega_b_rf=rng.uniform(0, 3),
                             omega_c_rf=rng.uniform(0, 3), delta_mu=rng.uniform(-1, 1))
        dp = rng.uniform(-3, 3, 16)
        a, s, t = chi_reduced(atom, fields, dp), chi_numeric(atom, fields, dp), chi_time_domain(atom, fields, dp)
        worst_as = max(worst_as, float(np.max(np.abs(a - s) / np.abs(s))))
        worst_st = max(worst_st, float(np.max(np.abs(s - t) / np.abs(s))))
    yield "closed form vs linear solve", worst_as < 1e-10, f"max rel diff {worst_as:.2e}"
    yield "linear solve vs time domain", worst_st < 1e-8, f"max rel diff {worst_st:.2e}"


def _cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in _selftest_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_DEGENERATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eit5", description="Five-level EIT susceptibility sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="evaluate a parameter sweep and write CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--preset", help="figure preset (fig2, fig2-zoom, fig3, fig5, fig6, fig7, fig8)")
    p.add_argument("--method", choices=["analytic", "solve", "linear-solve", "ode", "time-domain"])
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--json", help="optional JSON mirror of the configuration")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("features", help="extract peaks and widths from a sweep CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config-json", help="JSON written by 'sweep --json', enables analytic pairing")
    p.add_argument("--min-prominence", type=float, default=None)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("selftest", help="run quick oracle-equivalence checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateSystemError, IntegrationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EIT5Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
