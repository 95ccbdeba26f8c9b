"""Brute-force pilot for the island-measure acceptance threshold.

Independent of the C++ angle-anchoring code: the lifted angle of DF^n v is
rebuilt from the number of times the transported vertical has crossed the
vertical line (each crossing is a clockwise half turn for a positive twist
map) plus the principal angle inside the current half plane.
"""
import numpy as np

def vertical_torsion(k, x, y, n):
    vx = np.zeros_like(x)
    vy = np.ones_like(x)
    crossings = np.zeros_like(x)
    for _ in range(n):
        kick = k * np.cos(2 * np.pi * x)
        nvx = (1 - kick) * vx + vy
        nvy = -kick * vx + vy
        crossings += (np.sign(nvx) != np.sign(vx)) & (vx != 0)
        s = np.hypot(nvx, nvy)
        vx, vy = nvx / s, nvy / s
        y = y - k / (2 * np.pi) * np.sin(2 * np.pi * x)
        x = x + y
    # angle from vertical of a vector with vx > 0 is in (-1/2, 0); with vx < 0
    # it is in (0, 1/2) and the lift subtracts one more half turn.
    principal = np.arctan2(-vx, vy) / (2 * np.pi)
    half = np.where(vx > 0, principal, principal - 1.0)
    # after m crossings: m even -> vx > 0, lift = -m/2 + principal;
    # m odd -> vx < 0, lift = -(m-1)/2 + principal - 1 (the principal is in (0,1/2)).
    lift = np.where(crossings % 2 == 0, -crossings / 2 + half, -(crossings - 1) / 2 + half)
    return lift / n

def main():
    rng = np.random.default_rng(42)
    m = 10_000
    x = rng.uniform(-0.1, 0.1, m)
    y = rng.uniform(-0.1, 0.1, m)
    t = vertical_torsion(1.0, x, y, 2000)
    neg = np.mean(t < -0.05)
    se = np.sqrt(neg * (1 - neg) / (m - 1))
    print(f"fraction_negative={neg:.4f} stderr={se:.4f}")
    print(f"mean torsion={t.mean():.5f} integral={0.04 * t.mean():.6f} "
          f"stderr={0.04 * t.std(ddof=1) / np.sqrt(m):.6f}")
    print(f"min={t.min():.4f} max={t.max():.4f}")
    # single-point anchors
    print("origin:", vertical_torsion(1.0, np.array([0.0]), np.array([0.0]), 10_000))
    print("hyperbolic:", vertical_torsion(1.0, np.array([0.5]), np.array([0.0]), 10_000))

if __name__ == "__main__":
    main()
