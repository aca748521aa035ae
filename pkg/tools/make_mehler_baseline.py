"""Regenerate src/mlcalc/data/mehler_baseline.json from a 50-digit mpmath series."""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50


def ml(beta, z):
    beta, z = mp.mpf(beta), mp.mpmathify(z)
    return mp.nsum(lambda n: z**n / mp.gamma(beta * n + 1), [0, mp.inf])


def defect(beta, t, s, q):
    E = lambda x: ml(beta, x)
    lhs = E(-(1 - mp.e ** (-2 * s)) * q / 2) * E(-(1 - mp.e ** (-2 * t)) * mp.e ** (-2 * s) * q / 2)
    return abs(lhs - E(-(1 - mp.e ** (-2 * (t + s))) * q / 2))


rows = []
for beta in ("0.5", "0.75"):
    for t, s in [("0.5", "0.5"), ("0.25", "1"), ("1", "0.25"), ("1", "1")]:
        for xi in ("0.5", "1"):
            q = mp.mpf(xi) ** 2
            rows.append({
                "beta": float(beta), "t": float(t), "s": float(s), "xi_norm": float(xi),
                "defect": mp.nstr(defect(mp.mpf(beta), mp.mpf(t), mp.mpf(s), q), 30),
            })

out = Path(__file__).resolve().parents[1] / "src" / "mlcalc" / "data" / "mehler_baseline.json"
out.write_text(json.dumps({"oracle": "mpmath series, 50 digits", "rows": rows}, indent=1) + "\n")
print(out)
