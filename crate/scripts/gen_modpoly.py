"""Regenerate the classical modular polynomial tables in crates/core/data/.

Phi_q(X, Y) is recovered from the q-expansion identity Phi_q(j(q*tau), j(tau)) = 0
by exact linear algebra over Q.  Output: one line per coefficient, "a b c" meaning c * X^a * Y^b.

Usage: python3 scripts/gen_modpoly.py 2 3 5 7   (run from the repository root)
"""
import sys
from fractions import Fraction

PREC = 160


def sigma3(n):
    return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)


def mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for k, y in enumerate(b[: n - i]):
                out[i + k] += x * y
    return out


def j_series(n):
    # returns coefficients c with j = sum c[k] x^(k-1)
    e4 = [1] + [240 * sigma3(k) for k in range(1, n + 2)]
    e4c = mul(mul(e4, e4, n + 2), e4, n + 2)
    # Delta / x = prod (1 - x^k)^24
    d = [1] + [0] * (n + 1)
    for k in range(1, n + 2):
        for _ in range(24):
            for i in range(n + 1, k - 1, -1):
                d[i] -= d[i - k]
    # invert d
    inv = [0] * (n + 2)
    inv[0] = 1
    for i in range(1, n + 2):
        inv[i] = -sum(d[k] * inv[i - k] for k in range(1, i + 1))
    return mul(e4c, inv, n + 1)


class Laurent:
    def __init__(self, val, coeffs):
        self.val = val
        self.c = coeffs

    def __mul__(self, o):
        n = min(len(self.c), len(o.c))
        return Laurent(self.val + o.val, mul(self.c, o.c, n))

    def coeff(self, k):
        i = k - self.val
        return self.c[i] if 0 <= i < len(self.c) else 0


def modpoly(q, extra=30):
    js = j_series(PREC)
    Y = Laurent(-1, js)
    xc = [0] * (q * len(js))
    for i, c in enumerate(js):
        xc[q * i] = c
    X = Laurent(-q, xc)
    top = q * (q + 1)
    Xp = [Laurent(0, [1] + [0] * (PREC * 2))]
    Yp = [Laurent(0, [1] + [0] * (PREC * 2))]
    for _ in range(q + 1):
        Xp.append(Xp[-1] * X)
        Yp.append(Yp[-1] * Y)
    unknowns = [(a, b) for a in range(q + 1) for b in range(a + 1) if (a, b) != (q, q)]
    rows = []
    for k in range(-top, extra):
        row = []
        for (a, b) in unknowns:
            t = (Xp[a] * Yp[b]).coeff(k)
            if a != b:
                t += (Xp[b] * Yp[a]).coeff(k)
            row.append(Fraction(t))
        known = (Xp[q + 1].coeff(k) + Yp[q + 1].coeff(k) - (Xp[q] * Yp[q]).coeff(k))
        row.append(Fraction(-known))
        rows.append(row)
    n = len(unknowns)
    piv_row = 0
    for col in range(n):
        pr = next(r for r in range(piv_row, len(rows)) if rows[r][col] != 0)
        rows[piv_row], rows[pr] = rows[pr], rows[piv_row]
        pv = rows[piv_row][col]
        rows[piv_row] = [x / pv for x in rows[piv_row]]
        for r in range(len(rows)):
            if r != piv_row and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[piv_row])]
        piv_row += 1
    for r in range(n, len(rows)):
        assert rows[r][-1] == 0, "inconsistent system"
    coeffs = {(q + 1, 0): 1, (q, q): -1}
    for i, (a, b) in enumerate(unknowns):
        v = rows[i][-1]
        assert v.denominator == 1
        if v != 0:
            coeffs[(a, b)] = int(v)
    return coeffs


if __name__ == "__main__":
    for q in map(int, sys.argv[1:]):
        c = modpoly(q)
        full = {}
        for (a, b), v in c.items():
            full[(a, b)] = v
            full[(b, a)] = v
        with open(f"crates/core/data/phi{q}.txt", "w") as f:
            f.write(f"# classical modular polynomial of level {q}: lines 'a b c' mean c*X^a*Y^b\n")
            for (a, b) in sorted(full, reverse=True):
                f.write(f"{a} {b} {full[(a, b)]}\n")
