"""make_figures command line entry point."""

from __future__ import annotations

import argparse
import sys

from .plots import PlotSpec, render
from .series import SchemaError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="make_figures",
        description="render figures from qgames simulation CSV files")
    parser.add_argument("--input", nargs="*", default=[], help="input CSV path(s)")
    parser.add_argument("--game", required=True, choices=["chsh", "epd"])
    parser.add_argument("--metric", required=True,
                        choices=["winprob", "entanglement", "payoff", "dominance"])
    parser.add_argument("--window", type=int, default=10)
    parser.add_argument("--band", choices=["sd", "sdm"], default="sdm")
    parser.add_argument("--no-split", action="store_true",
                        help="plot one group instead of splitting by final mean")
    parser.add_argument("--eps", type=float, default=0.1)
    parser.add_argument("--gamma-ebits", type=float, default=None,
                        dest="game_state_ebits",
                        help="game state level drawn as a reference line")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(inputs=args.input, game=args.game, metric=args.metric,
                        out=args.out, window=args.window, band=args.band,
                        split=not args.no_split, eps=args.eps,
                        game_state_ebits=args.game_state_ebits)
        result = render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
