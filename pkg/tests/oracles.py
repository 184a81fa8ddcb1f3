"""Independent naive oracles the implementation is checked against.

Everything here is deliberately written as plain loops over plain lists,
separate from the package's own code paths, so the two sides can disagree.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def conv_oracle(image_rows, filter_rows):
    """Quadruple-loop convolution straight from the sliding-window definition."""
    h, w = len(image_rows), len(image_rows[0])
    kr, kc = len(filter_rows), len(filter_rows[0])
    out = []
    for i in range(h - kr + 1):
        row = []
        for n in range(w - kc + 1):
            total = 0
            for s in range(kr):
                for p in range(kc):
                    total += filter_rows[s][p] * image_rows[i + s][n + p]
            row.append(total)
        out.append(row)
    return out


def maxpool_oracle(image_rows, kr, kc):
    """Naive non-overlapping window scan."""
    h, w = len(image_rows), len(image_rows[0])
    out = []
    for i in range(0, h, kr):
        row = []
        for j in range(0, w, kc):
            best = image_rows[i][j]
            for s in range(kr):
                for p in range(kc):
                    if image_rows[i + s][j + p] > best:
                        best = image_rows[i + s][j + p]
            row.append(best)
        out.append(row)
    return out


def l0_oracle(x, y):
    count = 0
    for a, b in zip(x, y):
        if a != b:
            count += 1
    return count


def linf_oracle(x, y):
    best = 0
    for a, b in zip(x, y):
        d = a - b if a >= b else b - a
        if d > best:
            best = d
    return best


def argmax_oracle(values):
    best = 0
    for i in range(len(values)):
        if values[i] > values[best]:
            best = i
    return best


def gte_oracle(v1, v2):
    return all(a >= b for a, b in zip(v1, v2))


def extreme_stats_oracle(a):
    """(mean, max, threshold, extreme index list, distinct pattern) by recomputation."""
    n = len(a)
    mean = Fraction(sum(a), n)
    amax = a[0]
    for v in a[1:]:
        if v > amax:
            amax = v
    t = mean + (amax - mean) / 2
    extremes = [i for i, v in enumerate(a) if v > t]
    distinct = all(v > t or v < mean for v in a)
    return mean, amax, t, extremes, distinct


# -- Fourier-Motzkin elimination (feasibility cross-check) --------------------


def _normalize_rows(num_vars, constraints):
    rows = []
    for con in constraints:
        a = [Fraction(c) for c in con.coeffs]
        b = Fraction(con.rhs)
        if con.comparator in ("<=", "<"):
            rows.append((a, b, con.comparator == "<"))
        elif con.comparator in (">=", ">"):
            rows.append(([-c for c in a], -b, con.comparator == ">"))
        else:
            rows.append((a, b, False))
            rows.append(([-c for c in a], -b, False))
    return rows


def fm_feasible(num_vars, constraints) -> bool:
    """Fourier-Motzkin elimination over rationals with strictness tracking."""
    rows = _normalize_rows(num_vars, constraints)
    for var in range(num_vars - 1, -1, -1):
        uppers, lowers, rest = [], [], []
        for a, b, strict in rows:
            c = a[var]
            if c > 0:
                uppers.append(([x / c for x in a[:var]], b / c, strict))
            elif c < 0:
                lowers.append(([x / -c for x in a[:var]], b / -c, strict))
            else:
                rest.append((a[:var], b, strict))
        rows = rest
        for (au, bu, su) in uppers:
            for (al, bl, sl) in lowers:
                # lower: -x <= bl - al.rest  =>  x >= al.rest - bl
                # upper:  x <= bu - au.rest
                coeffs = [u + l for u, l in zip(au, al)]
                rows.append((coeffs, bu + bl, su or sl))
    for a, b, strict in rows:
        if strict:
            if not 0 < b:
                return False
        elif not 0 <= b:
            return False
    return True


def exhaustive_reach_status(net, spec):
    """Decide a reach spec by enumerating every full relu phase pattern.

    Composes the affine forms per pattern with its own plain-list arithmetic
    and calls the exact feasibility oracle once per pattern; any feasible
    pattern region containing a predicate violation refutes the property.
    """
    from exactnn.verifier import LinearConstraint, find_feasible_point, lower_network
    from exactnn.verifier.lowering import relu_nodes

    lowered, n = lower_network(net)
    nodes = relu_nodes(lowered)
    neg = spec.predicate.negation()
    for pattern in product(("active", "inactive"), repeat=len(nodes)):
        phases = dict(zip(nodes, pattern))
        cons = []
        for i, (lo, hi) in enumerate(spec.bounds):
            unit = tuple(1 if k == i else 0 for k in range(n))
            cons.append(LinearConstraint(unit, ">=", lo))
            cons.append(LinearConstraint(unit, "<=", hi))
        current = [([1 if k == i else 0 for k in range(n)], Fraction(0)) for i in range(n)]
        for li, layer in enumerate(lowered):
            pre = []
            for u in range(layer.size):
                row = layer.weights.row(u)
                coeffs = [Fraction(0)] * n
                const = Fraction(row[0])
                for j, w in enumerate(row[1:]):
                    if w == 0:
                        continue
                    c_j, k_j = current[j]
                    const += w * k_j
                    for k in range(n):
                        if c_j[k] != 0:
                            coeffs[k] += w * c_j[k]
                pre.append((coeffs, const))
            if layer.activation == "relu":
                nxt = []
                for u, (coeffs, const) in enumerate(pre):
                    if phases[(li, u)] == "active":
                        cons.append(LinearConstraint(tuple(coeffs), ">=", -const))
                        nxt.append((coeffs, const))
                    else:
                        cons.append(LinearConstraint(tuple(coeffs), "<=", -const))
                        nxt.append(([Fraction(0)] * n, Fraction(0)))
                current = nxt
            else:
                current = pre
        coeffs = [Fraction(0)] * n
        rhs = Fraction(neg.threshold)
        for c, (cf, ct) in zip(neg.coeffs, current):
            if c == 0:
                continue
            rhs -= c * ct
            for k in range(n):
                if cf[k] != 0:
                    coeffs[k] += c * cf[k]
        cons.append(LinearConstraint(tuple(coeffs), neg.comparator, rhs))
        if find_feasible_point(n, cons) is not None:
            return "refuted"
    return "proved"
