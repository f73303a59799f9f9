"""Draw the cat's-eye vortex that forms under a steady interfacial wave.

With vorticity in the lower layer, the wave-frame flow develops a
critical layer: two stagnation points on the interface, an interior
center beneath the crest, and a band of closed streamlines bounded by
the separatrix through the interface pair.  This script solves the
nonlinear wave, locates that structure, and renders it.
"""
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from stratawave import asymptotics, continuation, elliptic
from stratawave.flowfield import (PushforwardField, find_stagnation_points,
                                  separatrix_and_layer, trace_streamline)
from stratawave.model import FluidParams

PARAMS = FluidParams(rho=2.0, rho_bar=1.0, g=9.8, sigma=0.0, omega=1.0,
                     omega_bar=0.0)
S = 0.04
NX, NY = 256, 129

# --------  solve the wave and the lower field  -------------------------------
guess = asymptotics.branch_expansion(1, 1, PARAMS, S)
pt = continuation.newton_correct(guess["lambda"], guess["profile"], S, PARAMS,
                                 nx=64, ny=97)
print(f"s = {S}: lambda = {pt.lam:.10f}, residual = {pt.residual:.2e}")
low = elliptic.solve_lower(pt.profile, PARAMS, nx=NX, ny=NY)
pf = PushforwardField(low)

report = find_stagnation_points(low)
print(f"stagnation points ({report.count}):")
for x, y, kind in report.points:
    print(f"  ({x:.6f}, {y:+.6f})  {kind}")
print(f"interface pair at zeta = {report.zeta:.6f} and "
      f"2 pi - zeta = {2 * np.pi - report.zeta:.6f}")
layer = separatrix_and_layer(low)
print(f"critical layer area = {report.critical_layer_area:.6f}")

# --------  render  ------------------------------------------------------------
xs = np.linspace(0.0, 2.0 * np.pi, 257)
qs = np.linspace(0.0, 1.0, 97)
eta = pt.profile.evaluate(xs)
X = np.broadcast_to(xs[:, None], (xs.size, qs.size))
Y = -1.0 + qs[None, :] * (1.0 + eta[:, None])
PSI = pf.psi(X.ravel(), Y.ravel()).reshape(X.shape)

fig, ax = plt.subplots(figsize=(8, 4.5))
ax.contour(X, Y, PSI, levels=24, colors="0.75", linewidths=0.6)

sep = report.separatrix
ax.plot(sep[:, 0], sep[:, 1], "r-", lw=1.6, label="separatrix")
for loop in layer["closed_streamline_samples"]:
    ax.plot(loop.points[:, 0], loop.points[:, 1], "b-", lw=0.9)
for depth in (-0.35, -0.6, -0.85):
    orbit = trace_streamline(low, (0.0, depth))
    ax.plot(orbit.points[:, 0], orbit.points[:, 1], "g-", lw=0.7)

ax.plot(xs, eta, "k-", lw=1.4, label="interface")
for x, y, kind in report.points:
    marker = "o" if kind == "interior-center" else "s"
    ax.plot([x], [y], marker, color="k", ms=6)
ax.plot(report.y_zeta_curve[:, 0], report.y_zeta_curve[:, 1], "m--", lw=1.0,
        label="vertical-velocity sign switch")

ax.set_xlim(0.0, 2.0 * np.pi)
ax.set_ylim(-1.0, float(np.max(eta)) + 0.02)
ax.set_xlabel("x")
ax.set_ylabel("y")
ax.set_title(f"lower-layer streamlines in the wave frame, s = {S}")
ax.legend(loc="lower right", fontsize=8)
fig.tight_layout()
fig.savefig("critical_layer.svg")
print("wrote critical_layer.svg")
