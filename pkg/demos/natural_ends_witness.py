"""Natural boundary conditions: the signed count J and the tie-breaker beta.

With theta' pinned to A at both ends the verdict reads off J, the signed
number of potential-boundary crossings: J < 0 stable, J > 0 unstable.
J = 0 falls to beta, and the theorem behind beta <= 0 is constructive:
tau = theta' blended to zero slope near the ends is an explicit
perturbation with negative second variation. This script classifies a
stable and an unstable pendulum solution, then builds the witness for a
marginal rod loop and watches its second variation converge to the
predicted linear law as the blending width shrinks.
"""
import numpy as np

import varstab as vs

pend = vs.make_builtin("pendulum", M=81.0)

# natural ends theta' = A on both sides; shooting moves theta(0)
A = np.sqrt(243.0)
stable = vs.shoot_neumann(vs.ProblemSpec(pend, 0.0, 1.0, vs.Neumann(A)), 0.9)
v = vs.classify_neumann(stable)
print(f"A={A:.4f}, theta(0)={stable.theta_a:.6f}: {v.verdict} "
      f"(J = {v.evidence['J']})")

unstable = vs.shoot_neumann(vs.ProblemSpec(pend, 0.0, 1.0, vs.Neumann(A)), 0.6)
v = vs.classify_neumann(unstable)
print(f"A={A:.4f}, theta(0)={unstable.theta_a:.6f}: {v.verdict} "
      f"(J = {v.evidence['J']})")

# closed loops of the rod problem have J = 0 and beta = 0 exactly: the
# decision falls through to the constructive instability witness
eqs = vs.enumerate_equilibria(vs.RodParams(81.0, 1.5))
loop = next(q for q in eqs if q.category == "c" and q.k == 1)
v = loop.verdict
print(f"\nrod loop (c, k=1): J = {v.evidence['J']}, "
      f"beta = {v.evidence['beta']:+.3e} -> {v.verdict}")

traj = loop.profile
dva = float(pend.dv(traj.theta_a))
dvb = float(pend.dv(traj.theta_b))
predicted = -(2.0 / 3.0) * (dva ** 2 + dvb ** 2)
print("predicted d(delta2E)/d(eps) at eps -> 0:", f"{predicted:.6g}")
print(f"{'eps':>10s} {'delta2E':>13s} {'delta2E/eps':>13s}")
for eps in [1e-2, 1e-3, 1e-4, 1e-5]:
    prof = vs.destabilizing_perturbation(traj, pend, eps=eps, nu=eps)
    print(f"{eps:10.0e} {prof.delta2E:13.4e} {prof.delta2E / eps:13.6g}")
    assert prof.delta2E < 0

# settled_perturbation automates the shrink until the sign is trustworthy
prof = vs.settled_perturbation(traj, pend)
print(f"settled witness: eps = {prof.eps:.2e}, "
      f"delta2E = {prof.delta2E:.4e} < 0")
