"""Generate src/equilab/data/bolza.json.

The regular hyperbolic octagon with interior angles pi/4 is centered at 0
in the disk model, with side midpoints at angles k pi/4.  Opposite sides
are paired by the hyperbolic translation along the axis through their
midpoints; its length is twice the inradius a, where cosh a = cot(pi/8).
The SU(1,1) matrices are moved to SL(2,R) by the Cayley transform that
sends i to 0.  A defining relator is found by brute force over words in
which every generator and every inverse occurs exactly once.
"""

import itertools
import json
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 40
OUT = Path(__file__).resolve().parents[1] / "src" / "equilab" / "data" / "bolza.json"


def main():
    inradius = mp.acosh(mp.cot(mp.pi / 8))
    circumradius = mp.acosh(mp.cot(mp.pi / 8) ** 2)
    ch, sh = mp.cosh(inradius), mp.sinh(inradius)
    T = mp.matrix([[ch, sh], [sh, ch]])
    C = mp.matrix([[1, -1j], [1, 1j]])
    Cinv = C**-1
    gens = []
    for k in range(4):
        phi = k * mp.pi / 4
        rot = mp.matrix([[mp.exp(1j * phi / 2), 0], [0, mp.exp(-1j * phi / 2)]])
        g = Cinv * rot * T * rot**-1 * C
        assert max(abs(mp.im(g[i, j])) for i in range(2) for j in range(2)) < mp.mpf(10) ** -30
        gens.append(mp.matrix([[mp.re(g[i, j]) for j in range(2)] for i in range(2)]))
    gens = gens + [g**-1 for g in gens]

    num = [np.array([[float(g[i, j]) for j in range(2)] for i in range(2)]) for g in gens]
    relator = None
    for word in itertools.permutations(range(8)):
        if word[0] != 0:
            continue
        m = np.eye(2)
        for j in word:
            m = m @ num[j]
        if min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max()) < 1e-9:
            relator = list(word)
            break
    assert relator is not None
    m = mp.eye(2)
    for j in relator:
        m = m * gens[j]
    sign = 1 if mp.re(m[0, 0]) > 0 else -1
    residual = max(abs(m[i, j] - sign * (1 if i == j else 0)) for i in range(2) for j in range(2))

    data = {
        "name": "bolza",
        "description": "Side pairings of the regular octagon with angles pi/4, "
                       "Dirichlet domain centered at i; the last four are the inverses.",
        "center": [0.0, 1.0],
        "generators": [[[mp.nstr(g[i, j], 30) for j in range(2)] for i in range(2)] for g in gens],
        "inverse_of": [(j + 4) % 8 for j in range(8)],
        "relator": relator,
        "relator_sign": sign,
        "relator_residual": mp.nstr(residual, 5),
        "inradius": mp.nstr(inradius, 30),
        "circumradius": mp.nstr(circumradius, 30),
        "area": mp.nstr(4 * mp.pi, 30),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {OUT}; relator {relator}, sign {sign}")


if __name__ == "__main__":
    main()
