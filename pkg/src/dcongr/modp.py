"""Mod-p workhorses: GF(p) row reduction on monomial boxes and univariate
polynomial factorization over F_p.

Polynomials over F_p are lists of ints (index = degree), trimmed, with
coefficients in [0, p).
"""

from __future__ import annotations


def trim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_add(f, g, p):
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p
                 for i in range(n)])


def poly_sub(f, g, p):
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p
                 for i in range(n)])


def poly_mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = (out[i + j] + a * b) % p
    return trim(out)


def poly_divmod(f, g, p):
    f = list(f)
    g = trim(g)
    if not g:
        raise ZeroDivisionError("mod-p division by zero polynomial")
    inv_lead = pow(g[-1], -1, p)
    q = [0] * max(0, len(f) - len(g) + 1)
    for i in range(len(f) - len(g), -1, -1):
        c = (f[i + len(g) - 1] * inv_lead) % p
        if c:
            q[i] = c
            for j, b in enumerate(g):
                f[i + j] = (f[i + j] - c * b) % p
    return trim(q), trim(f)


def poly_mod(f, g, p):
    return poly_divmod(f, g, p)[1]


def poly_gcd(f, g, p):
    f, g = trim(f), trim(g)
    while g:
        f, g = g, poly_mod(f, g, p)
    if f:
        inv = pow(f[-1], -1, p)
        f = [(c * inv) % p for c in f]
    return f


def poly_pow_mod(f, e, mod, p):
    out = [1]
    f = poly_mod(f, mod, p)
    while e:
        if e & 1:
            out = poly_mod(poly_mul(out, f, p), mod, p)
        f = poly_mod(poly_mul(f, f, p), mod, p)
        e >>= 1
    return out


def poly_deriv(f, p):
    return trim([(i * f[i]) % p for i in range(1, len(f))])


def _pth_root(f, p):
    """Inverse of Frobenius on F_p[t]: f(t) = g(t)^p implies g."""
    return trim([f[i] for i in range(0, len(f), p)])


def squarefree_decomposition(f, p):
    """Yun-style decomposition adapted to characteristic p.

    Returns a list of (factor, multiplicity) with factor squarefree monic.
    """
    out = []
    f = trim(f)
    inv = pow(f[-1], -1, p)
    f = [(c * inv) % p for c in f]

    def rec(g, mult):
        if len(g) <= 1:
            return
        dg = poly_deriv(g, p)
        if not dg:
            rec(_pth_root(g, p), mult * p)
            return
        c = poly_gcd(g, dg, p)
        w, _ = poly_divmod(g, c, p)
        i = 1
        while len(w) > 1:
            y = poly_gcd(w, c, p)
            z, _ = poly_divmod(w, y, p)
            if len(z) > 1:
                out.append((z, mult * i))
            c, _ = poly_divmod(c, y, p)
            w = y
            i += 1
        if len(c) > 1:
            rec(c, mult)

    rec(f, 1)
    # merge duplicates (same factor may reappear through the p-power branch)
    merged = {}
    for g, m in out:
        merged[tuple(g)] = merged.get(tuple(g), 0) + m
    return [(list(k), m) for k, m in sorted(merged.items())]


def _equal_degree_split(f, d, p, rng_state):
    """Cantor-Zassenhaus split of a squarefree product of degree-d factors."""
    n = len(f) - 1
    if n == d:
        return [f]
    state = rng_state
    while True:
        state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 63)
        a = trim([(state >> (7 * i)) % p for i in range(n)])
        if len(a) <= 0:
            continue
        if p == 2:
            # trace map sum_{i<d} a^(2^i)
            tr = []
            cur = poly_mod(a, f, 2)
            for _ in range(d):
                tr = poly_add(tr, cur, 2)
                cur = poly_pow_mod(cur, 2, f, 2)
            g = poly_gcd(f, tr, 2)
        else:
            e = (p ** d - 1) // 2
            b = poly_pow_mod(a, e, f, p)
            b = trim([(b[0] - 1) % p] + b[1:]) if b else [p - 1]
            g = poly_gcd(f, b, p)
        if 0 < len(g) - 1 < n:
            rest, _ = poly_divmod(f, g, p)
            return (_equal_degree_split(g, d, p, state) +
                    _equal_degree_split(rest, d, p, state ^ 0x9E3779B9))


def factor_squarefree(f, p):
    """Irreducible factors of a squarefree monic polynomial."""
    out = []
    # distinct-degree stage
    h = [0, 1]  # t
    rem = f
    d = 0
    while len(rem) - 1 > 0:
        d += 1
        if 2 * d > len(rem) - 1:
            out.append((rem, len(rem) - 1))
            break
        h = poly_pow_mod(h, p, rem, p)
        diff = poly_sub(h, [0, 1], p)
        g = poly_gcd(rem, diff, p)
        if len(g) - 1 > 0:
            out.append((g, d))
            rem, _ = poly_divmod(rem, g, p)
            h = poly_mod(h, rem, p)
    factors = []
    for prod, d in out:
        factors.extend(_equal_degree_split(prod, d, p, 0x5DEECE66D))
    return factors


def factor_poly(f, p):
    """Full factorization over F_p.

    Returns (lead_coefficient, [(monic irreducible factor, multiplicity)]),
    factors sorted by (degree, coefficients) for determinism.
    """
    f = trim(f)
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    lead = f[-1]
    inv = pow(lead, -1, p)
    f = [(c * inv) % p for c in f]
    if len(f) == 1:
        return lead, []
    result = []
    for sqf, mult in squarefree_decomposition(f, p):
        for irr in factor_squarefree(sqf, p):
            result.append((irr, mult))
    result.sort(key=lambda fm: (len(fm[0]), fm[0]))
    return lead, result


def poly_str(f, var="t"):
    if not f:
        return "0"
    parts = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if not c:
            continue
        if i == 0:
            parts.append(f"{c}")
        elif i == 1:
            parts.append(f"{var}" if c == 1 else f"{c}*{var}")
        else:
            parts.append(f"{var}^{i}" if c == 1 else f"{c}*{var}^{i}")
    return "+".join(parts)


def row_reduce_box(rows, columns, p):
    """Row reduction of F_p vectors indexed by an ordered column list.

    rows: list of dicts {column_key: value mod p}.  Returns the set of pivot
    column keys (the achievable lead monomials of the row space when the
    column order lists the preferred lead first).
    """
    col_pos = {c: i for i, c in enumerate(columns)}
    work = []
    for r in rows:
        vec = [0] * len(columns)
        for key, val in r.items():
            v = val % p
            if v:
                vec[col_pos[key]] = v
        work.append(vec)
    pivots = {}
    for vec in work:
        for j in range(len(columns)):
            if vec[j] == 0:
                continue
            if j in pivots:
                c = vec[j]
                pv = pivots[j]
                for jj in range(j, len(columns)):
                    if pv[jj]:
                        vec[jj] = (vec[jj] - c * pv[jj]) % p
                continue
            inv = pow(vec[j], -1, p)
            pivots[j] = [(x * inv) % p for x in vec]
            break
    return {columns[j] for j in pivots}
