"""Regenerate the high-precision reference values for the Vandermonde kernels.

Writes ``src/expfit/data/kernel_fixtures.txt``: one record per line,

    p n1 n2 Re(delta) Im(delta) Re(ref) Im(ref)

with p = 0 for V(mu)^* V(omega) entries and p = 1 for V(mu)^* V'(omega)
entries.  References use the closed forms evaluated with 100 significant
digits on the exact binary value of each delta.

Usage:  python tools/make_kernel_fixtures.py [output]
"""
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 100

NS = (16, 256, 1024, 2**20)
MAGNITUDES = np.logspace(-18, 0, 37)
# directions in the closed left half plane, where decaying signals live
ANGLES = np.pi * np.array([0.5, 0.6, 0.75, 0.9, 1.0, 1.1, 1.25, 1.4, 1.5])


def ref_sum(p, n, d):
    z = mp.mpc(d.real, d.imag)
    if z == 0:
        return mp.mpf(n) if p == 0 else mp.mpf(n) * (n - 1) / 2
    e = mp.exp(z)
    en = mp.exp(n * z)
    if p == 0:
        return (1 - en) / (1 - e)
    return -n * en / (1 - e) + e * (1 - en) / (1 - e) ** 2


def main(path):
    lines = []
    for p in (0, 1):
        for n in NS:
            for r in MAGNITUDES:
                for th in ANGLES:
                    d = complex(r * np.cos(th), r * np.sin(th))
                    ref = ref_sum(p, n, d)
                    lines.append(
                        f"{p} 0 {n} {d.real:.17e} {d.imag:.17e} "
                        f"{mp.nstr(ref.real, 20, min_fixed=1, max_fixed=0)} "
                        f"{mp.nstr(ref.imag, 20, min_fixed=1, max_fixed=0)}"
                    )
            # exact zero
            ref = ref_sum(p, n, 0j)
            lines.append(f"{p} 0 {n} 0.0 0.0 {mp.nstr(ref, 20)} 0.0")
    Path(path).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} records to {path}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parents[1] / "src/expfit/data/kernel_fixtures.txt"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
