#!/usr/bin/env python3
"""Reproduce the Sybil-attack economics numbers against threshold verification.

Runs four experiments and writes one CSV per run next to a printed summary:

  headline      H=9000 S=1000 pairs: the attacker's income/cost ratio
  quad-groups   same population, groups of four: the rare lucky-group rate
  plateau       minion demand as the Sybil population grows past the humans
  reinvest      profits buy new Sybils; population share compounds to the cap

Usage: python3 scripts/attack_economics.py [--seed N] [--out DIR] [--quick]
"""

import argparse
import sys
import time
from pathlib import Path

from popkit.sybilsim import (
    DEFAULT_MASTER_SEED,
    SybilScenario,
    lucky_fraction_exact,
    plateau_curve,
    run_scenario,
)


def save_csv(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    print(f"  wrote {path}", file=sys.stderr)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument(
        "--quick", action="store_true", help="smaller populations and fewer replications"
    )
    args = parser.parse_args()

    scale = 10 if args.quick else 1
    reps = 5 if args.quick else 20
    base = dict(
        n_honest=9000 // scale,
        n_sybil=1000 // scale,
        threshold=0.5,
        window=10,
        cycles=200,
        replications=reps,
    )

    start = time.perf_counter()
    headline = run_scenario(SybilScenario(group_size=2, **base), master_seed=args.seed)
    advantage = headline.mean_over_cycles("advantage")
    lucky = headline.mean_over_cycles("lucky_fraction")
    exact = lucky_fraction_exact(base["n_honest"], base["n_sybil"], 2)
    print(f"headline: mean income/cost {advantage:.4f} (analytic 1/0.45 = {1 / 0.45:.4f})")
    print(f"headline: lucky-pair rate {lucky:.5f} (exact {exact:.5f})")
    save_csv(args.out, "headline.csv", headline.to_csv())

    quad = run_scenario(SybilScenario(group_size=4, **base), master_seed=args.seed)
    lucky4 = quad.mean_over_cycles("lucky_fraction")
    exact4 = lucky_fraction_exact(base["n_honest"], base["n_sybil"], 4)
    print(f"quad-groups: lucky rate {lucky4:.3e} (exact {exact4:.3e})")
    for note in quad.notes:
        print(f"  note: {note}")
    save_csv(args.out, "quad_groups.csv", quad.to_csv())

    H = 2000 // scale
    sweep = [s // scale for s in (200, 1000, 2000, 6000, 20000)]
    curve = plateau_curve(H=H, theta=0.5, g=2, S_values=sweep, seed=args.seed)
    print(f"plateau (H={H}, ceiling theta*H={0.5 * H:.0f}):")
    lines = ["sybils,minions_per_cycle"]
    for S, minions in curve:
        analytic = 0.5 * S * H / (S + H - 1)
        print(f"  S={S:>6d}  minions {minions:8.1f}  (analytic {analytic:8.1f})")
        lines.append(f"{S},{minions!r}")
    save_csv(args.out, "plateau.csv", "\n".join(lines) + "\n")

    reinvest = run_scenario(
        SybilScenario(group_size=2, reinvest=True, creation_cost=5.0, **base),
        master_seed=args.seed,
    )
    print(
        f"reinvest: share {reinvest.rows[0]['sybil_share']:.3f} -> "
        f"{reinvest.final_share:.3f} over {base['cycles']} cycles"
    )
    save_csv(args.out, "reinvest.csv", reinvest.to_csv())

    print(f"done in {time.perf_counter() - start:.1f}s (seed {args.seed})", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
