"""Chinese-remainder group-key transport.

A group key beta is masked per member as ``b_i = beta XOR q_i`` and all
masks are folded into one integer B with ``B = b_i (mod q_i)``. A member
recovers ``beta = (B mod q_i) XOR q_i``. Recovery is exact only when
``b_i < q_i``; primes whose low ``t`` bits are all ones (t = bit length of
the group order) guarantee that for every beta below ``2**t``.
"""

from __future__ import annotations

from math import gcd
from typing import Sequence, Tuple

from sympy.ntheory.modular import crt

from .errors import CRTError


def mask_width(order: int) -> int:
    return order.bit_length()


def has_mask_shape(q: int, width: int) -> bool:
    """True when the low ``width`` bits of ``q`` are all set."""
    low = (1 << width) - 1
    return q & low == low


def mask(beta: int, q: int) -> int:
    return beta ^ q


def crt_solve(residues: Sequence[Tuple[int, int]], check_coprime: bool = True) -> int:
    """Smallest non-negative B with B = b_i (mod q_i) for every (b_i, q_i)."""
    if not residues:
        return 0
    product = 1
    for b, q in residues:
        if q < 2:
            raise CRTError(f"modulus must be at least 2, got {q}")
        if not 0 <= b < q:
            raise CRTError(f"residue {b} outside [0, {q})")
        if check_coprime and gcd(product, q) != 1:
            raise CRTError(f"modulus {q} shares a factor with an earlier modulus")
        product *= q
    if len(residues) == 1:
        return residues[0][0]
    moduli = [q for _, q in residues]
    values = [b for b, _ in residues]
    solution, _ = crt(moduli, values, check=False)
    return int(solution)


def recover_group_key(solution: int, q: int) -> int:
    """beta = (B mod q) XOR q; a non-member gets an unrelated value."""
    return (solution % q) ^ q
