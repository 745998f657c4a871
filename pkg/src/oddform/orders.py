"""Orders of finite classical groups, from their closed product formulas."""

from __future__ import annotations

from math import prod


def sp_order(m: int, q: int) -> int:
    """``|Sp_{2m}(q)| = q^{m^2} prod_{i=1..m} (q^{2i} - 1)``."""
    return q ** (m * m) * prod(q ** (2 * i) - 1 for i in range(1, m + 1))


def odd_orthogonal_order(m: int, q: int) -> int:
    """``|SO_{2m+1}(q)|``; for even ``q`` this group is isomorphic to ``Sp_{2m}(q)``."""
    return sp_order(m, q)


def plus_omega_order(m: int, q: int) -> int:
    """``|Omega^+_{2m}(q)|`` for even ``q`` (the derived group of index 2 in ``O^+``)."""
    o = 2 * q ** (m * (m - 1)) * (q ** m - 1) * prod(q ** (2 * i) - 1 for i in range(1, m))
    return o // 2


def expected_eu_order(ctx, delta_kind: str) -> int | None:
    """The classical order that the elementary group should have over ``F_2`` with ``mu = 1``.

    With the maximal parameter the group acts as ``Sp_{2n}(2)`` on the hyperbolic
    part; with the minimal parameter the extra short root elements disappear and
    the group is the orthogonal ``Omega^+_{2n}(2)``.  Other contexts have no oracle.
    """
    if ctx.q != 2 or ctx.mu != ctx.one:
        return None
    if delta_kind == "max":
        return sp_order(ctx.n, 2)
    if delta_kind == "min":
        return plus_omega_order(ctx.n, 2)
    return None
