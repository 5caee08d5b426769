"""Fixed-end stability decided by the turning-limit derivative alpha.

A one-hump solution (I = 1) of the fixed-end problem sits exactly on the
border between the always-stable I = 0 case and the always-unstable
I >= 2 case. The sign of alpha, the E-derivative of the combined arc
length taken in the limit where the arc ends reach the turning point,
breaks the tie: alpha > 0 means stable, alpha < 0 unstable.

The same pendulum potential produces both verdicts depending on the
interval, and the harmonic well sits exactly on the fence (isochronous
oscillations, alpha = 0). Decided cases are cross-checked against the
conjugate-point oracle and a finite-difference Jacobi spectrum.
"""
import numpy as np

import varstab as vs

pend = vs.make_builtin("pendulum", M=1.0)

def run(name, spec, guess):
    traj = vs.shoot_dirichlet(spec, guess)
    verdict = vs.classify_dirichlet(traj)
    ev = verdict.evidence
    print(f"\n{name}: ends {spec.bc.T_a:g}/{spec.bc.T_b:g} "
          f"on [{spec.a:g}, {spec.b:g}]")
    print(f"  I = {ev.get('I')}, alpha = {ev.get('alpha'):+.6e}"
          f" -> {verdict.verdict} ({verdict.theorem})")

    # independent route: count conjugate points of h'' = -V''(theta) h
    problem = vs.from_trajectory(traj, "dirichlet", spec.potential)
    oracle, rep = vs.oracle_verdict(problem)
    lam = vs.fd_spectrum(problem, 800)[:3]
    print(f"  conjugate oracle: {oracle} (index {rep.index})")
    print(f"  lowest FD eigenvalues: {np.array2string(lam, precision=4)}")
    assert oracle == verdict.verdict
    return verdict

v1 = run("short hump", vs.ProblemSpec(pend, 0.0, 1.0,
                                      vs.Dirichlet(0.3, 0.3)), 0.2)
v2 = run("long hump ", vs.ProblemSpec(pend, 0.0, 5.0,
                                      vs.Dirichlet(-0.5, -0.5)), 0.5)
assert v1.is_stable and v2.is_unstable

# the harmonic well is isochronous: arc length does not move with E at
# all, alpha vanishes and no verdict is claimed
harm = vs.make_builtin("harmonic", k=1.0)
traj = vs.integrate_ivp(harm, -0.2, 1.1, (0.0, np.pi))
v3 = vs.classify_dirichlet(traj)
print(f"\nharmonic arc on [0, pi]: alpha = "
      f"{v3.evidence['alpha']:+.2e} -> {v3.verdict} ({v3.theorem})")
assert v3.verdict == "inconclusive"

print("\nsame index everywhere: alpha carries the verdict")
