"""Command line interface.

Subcommands:

* ``run``    -- simulate a scenario and write per-round records.
* ``verify`` -- run the {Q, D} reduction sweep and print dominance thresholds.
* ``oracle`` -- print the analytic anchor values of both games.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import epd_game, runner
from .chsh_game import (
    DEFAULT_ENTS, DEFAULT_GRID, Action, Strategy, build_win_table, joint_win_prob,
    max_joint_win_prob, win_prob,
)
from .epd_game import EpdAction


def _add_run_parser(sub):
    p = sub.add_parser("run", help="simulate a scenario and write records")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--game", choices=["chsh", "epd"])
    p.add_argument("--scenario", help="named scenario (see README)")
    p.add_argument("--gamma-ebits", type=float, dest="gamma_g_ebits",
                   help="game state entanglement in ebits")
    p.add_argument("--prior-a", dest="prior_a", help="first player's prior kind")
    p.add_argument("--prior-b", dest="prior_b", help="second player's prior kind")
    p.add_argument("--sims", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--iterations-per-round", type=int, dest="iterations_per_round")
    p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: $QGAMES_OUTDIR or cwd)")
    p.add_argument("--format", dest="fmt", choices=["csv", "jsonl"])
    p.add_argument("--workers", type=int)


def _cmd_run(args) -> int:
    overrides = {k: getattr(args, k) for k in (
        "game", "scenario", "gamma_g_ebits", "prior_a", "prior_b", "sims", "rounds",
        "iterations_per_round", "eps", "seed", "out", "fmt", "workers",
    )}
    config = runner.load_config(args.config, **overrides)
    records = runner.run_scenario(config)
    out = config.out or runner.default_out_path(config)
    runner.write_records(records, out, config.fmt, config.game)
    print(f"wrote {len(records)} rows to {out}")
    return 0


def _cmd_verify(args) -> int:
    e_low, e_high = epd_game.thresholds()
    reports = []
    for eps in args.eps:
        reports.append(epd_game.verify_reduction(
            theta_steps=args.theta_steps, phi_steps=args.phi_steps,
            gamma_steps=args.gamma_steps, eps=eps, raise_on_violation=False))
    if args.json:
        print(json.dumps({
            "thresholds_ebits": [e_low, e_high],
            "reports": [r.to_dict() for r in reports],
        }, indent=2))
    else:
        print(f"dominance thresholds: {e_low:.3f} / {e_high:.3f} ebits")
        for r in reports:
            print(r.summary())
    if not all(r.passed for r in reports):
        bad = next(r for r in reports if not r.passed)
        print(f"reduction violated at {bad.counterexample}", file=sys.stderr)
        return 1
    return 0


def _chsh_action(theta_frac: int, phi_frac: int) -> Action:
    return Action(theta_frac, phi_frac)


def _cmd_oracle(_args) -> int:
    eps = 0.1
    table0 = build_win_table(DEFAULT_GRID, DEFAULT_ENTS, 0.0)
    table = build_win_table(DEFAULT_GRID, DEFAULT_ENTS, eps)
    lines = [
        ("classical optimum (gamma=0, eps=0)", max_joint_win_prob(table0, 0)),
        ("classical optimum floored (eps=0.1)", max_joint_win_prob(table, 0)),
        ("quantum optimum (gamma=pi/2, eps=0)", max_joint_win_prob(table0, 10)),
        ("quantum optimum floored (eps=0.1)", max_joint_win_prob(table, 10)),
    ]
    # strategy worth 1/2 + (sqrt(3)+sqrt(6))/16 at the 1/3-entangled state
    alice = Strategy(_chsh_action(4, 0), _chsh_action(4, 4))
    bob = Strategy(_chsh_action(4, 0), _chsh_action(4, 2))
    gamma_third = math.pi / 3
    lines.append(("X/Y vs X/(X+Y)/sqrt2 at gamma=pi/3, eps=0",
                  joint_win_prob(alice, bob, gamma_third, 0.0)))
    # worked example round at maximal entanglement, eps=0.1
    a0, a1 = _chsh_action(7, 14), _chsh_action(2, 10)
    b0, b1 = _chsh_action(1, 15), _chsh_action(2, 2)
    gmax = math.pi / 2
    lines += [
        ("example iteration win p(x=0,y=0)", win_prob(0, 0, a0, b0, gmax, eps)),
        ("example iteration win p(x=0,y=1)", win_prob(0, 1, a0, b1, gmax, eps)),
        ("example iteration win p(x=1,y=1)", win_prob(1, 1, a1, b1, gmax, eps)),
        ("example joint win probability", joint_win_prob(Strategy(a0, a1), Strategy(b0, b1), gmax, eps)),
    ]
    pay_qq = epd_game.expected_payoffs(gmax, EpdAction.Q, EpdAction.Q, 0.0)
    pay_qd = epd_game.expected_payoffs(gmax, EpdAction.Q, EpdAction.D, 0.0)
    e_low, e_high = epd_game.thresholds()
    for label, value in lines:
        print(f"{label}: {value:.6f}")
    print(f"prisoners (Q,Q) payoff at gamma=pi/2, eps=0: ({pay_qq[0]:.6f}, {pay_qq[1]:.6f})")
    print(f"prisoners (Q,D) payoff at gamma=pi/2, eps=0: ({pay_qd[0]:.6f}, {pay_qd[1]:.6f})")
    print(f"dominance thresholds: {e_low:.3f} / {e_high:.3f} ebits "
          f"(gamma = arcsin(sqrt(1/5)), arcsin(sqrt(2/5)))")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qgames",
                                     description="iterated quantum game simulations")
    sub = parser.add_subparsers(dest="command")
    _add_run_parser(sub)
    v = sub.add_parser("verify", help="verify the prisoners' dilemma reduction")
    v.add_argument("--eps", type=float, nargs="+", default=[0.0, 0.1])
    v.add_argument("--theta-steps", type=int, default=17, dest="theta_steps")
    v.add_argument("--phi-steps", type=int, default=9, dest="phi_steps")
    v.add_argument("--gamma-steps", type=int, default=11, dest="gamma_steps")
    v.add_argument("--json", action="store_true")
    sub.add_parser("oracle", help="print analytic anchor values")

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_oracle(args)
    except (runner.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
