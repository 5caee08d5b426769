"""Phase-plane indices of pendulum trajectories.

Integrates theta'' + M sin(theta) = 0 from a few initial conditions and
prints the two counts the stability tests are built on: I, the number of
turning points of theta on the interval, and J, the signed number of
crossings of the boundary ordinates p = +-|A| (weighted by which side of
the separatrix loop the trajectory pierces). The pseudo-energy
E = p^2/2 + V(theta) is conserved along every orbit and the integrator
reports its drift.
"""
import numpy as np

import varstab as vs

M = 2.0
pot = vs.make_builtin("pendulum", M=M)

# below the separatrix (E < M): libration, p changes sign every half period
# above it (E > M): whirl, p keeps its sign and theta grows monotonically
cases = [
    ("small swing ", 0.4, 0.0),
    ("wide swing  ", 2.9, 0.0),
    ("slow whirl  ", 0.3, 3.0),
    ("fast whirl  ", 0.3, 6.0),
]

print(f"pendulum M = {M}, interval [0, 6], A = 1")
print(f"{'case':14s} {'E':>9s} {'I':>3s} {'J':>3s}  drift")
for name, th0, p0 in cases:
    traj = vs.integrate_ivp(pot, th0, p0, (0.0, 6.0), A=1.0)
    rep = vs.index_report(traj)
    print(f"{name} {traj.E:9.4f} {rep.I:3d} {rep.J:3d}  "
          f"{traj.meta['energy_drift']:.2e}")

# turning points are theta' = 0 roots; the trajectory stores their abscissae
traj = vs.integrate_ivp(pot, 2.9, 0.0, (0.0, 6.0), A=1.0)
print("\nwide swing turning abscissae:",
      np.array2string(traj.crossings_h, precision=4))
print("theta' there:",
      np.array2string(np.array([float(traj.p(s)) for s in traj.crossings_h]),
                      precision=2, suppress_small=True))

# J is bracketed by I (never further than one apart) and bounded below by -1
for th0, p0 in [(0.4, 0.0), (2.9, 0.0), (0.3, 3.0), (1.3, 0.7)]:
    t = vs.integrate_ivp(pot, th0, p0, (0.0, 6.0), A=1.0)
    r = vs.index_report(t)
    assert r.I - 1 <= r.J <= r.I + 1 and r.J >= -1
print("\nindex inequalities I-1 <= J <= I+1, J >= -1 hold on all cases")
