"""Steering a qubit from |0> to |1> with a smooth, bounded pulse.

Runs the bundled ``qubit_pi_pulse`` problem, prints one line per outer
iteration and a coarse text plot of the optimized control and the excited
state population. Pass ``--tight`` to keep iterating to a 1e-9 tolerance;
the quasi-Newton steps then settle linearly onto a stationary point near
cost 0.4198 where the Newton model stays indefinite (about a minute).

    python3 demos/qubit_benchmark.py [--tight]
"""

import sys

import numpy as np

from qpronto import extract_state, infidelity, solve
from qpronto.config import load_preset


def sparkline(values, width=60):
    bars = " .:-=+*#%@"
    idx = np.linspace(0, len(values) - 1, width).astype(int)
    v = np.asarray(values)[idx]
    lo, hi = v.min(), v.max()
    scaled = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    return "".join(bars[int(round(s * (len(bars) - 1)))] for s in scaled)


def main(tight=False):
    cfg = load_preset("qubit_pi_pulse")
    if tight:
        cfg = cfg.with_overrides(tol=1e-9)
    spec = cfg.cost()

    print(f"{'k':>3} {'cost':>10} {'-Dg':>10} {'gamma':>7} {'step':>13} {'infidelity':>10}")

    def show(rec):
        print(f"{rec.index:>3} {rec.cost:10.6f} {-rec.Dg:10.3e} {rec.gamma:7.4f} "
              f"{rec.step_kind.value:>13} {rec.infidelity:10.6f}")

    report = solve(cfg.system, spec, cfg.x0, cfg.initial_guess(), cfg.solver_config(), observer=show)
    xi = report.final
    u = xi.u.values[:, 0]
    pop1 = np.abs(np.array([extract_state(x) for x in xi.x.values])[:, 1]) ** 2

    print(f"\n{report.termination.value} after {report.steps} steps")
    print(f"final infidelity {infidelity(spec, xi.final_state):.6f}, max |u| {np.abs(u).max():.4f}")
    print(f"\nu(t)     [{u.min():+.3f}, {u.max():+.3f}]  {sparkline(u)}")
    print(f"P1(t)    [{pop1.min():.3f}, {pop1.max():.3f}]    {sparkline(pop1)}")


if __name__ == "__main__":
    main(tight="--tight" in sys.argv[1:])
