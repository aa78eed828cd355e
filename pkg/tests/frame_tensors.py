"""Random tensors built from prescribed frame components."""

import itertools
from fractions import Fraction

from vsi.frame import boost_weight_of
from vsi.tensor import DOWN, Tensor

_DUAL = {"l": "n", "n": "l", "m": "m"}


def dual_coframe(frame, metric):
    """Covectors theta^a with theta^a(e_b) = delta^a_b."""
    out = []
    for role in frame.roles:
        partner = _DUAL[role[0]] + role[1:]
        out.append(frame.covector(partner, metric))
    return out


def keeps_level(b, level, n_prop):
    """Whether weight ``b`` is allowed by conditions B1..B<level> (and N)."""
    for i in range(level):
        if all(x == 0 for x in b[:i]) and b[i] > 0:
            return False
    if n_prop and all(x == 0 for x in b):
        return False
    return True


def random_frame_tensor(rng, frame, metric, rank, level=0, n_prop=False, density=0.3):
    """A covariant tensor whose frame components are small random integers on
    a random subset of indices allowed by ``level``/``n_prop``; returns the
    tensor and its frame components."""
    theta = dual_coframe(frame, metric)
    n = frame.dim
    comps = {}
    for idx in itertools.product(range(n), repeat=rank):
        if not keeps_level(boost_weight_of(idx, frame), level, n_prop):
            continue
        if rng.random() < density:
            comps[idx] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))
    coord = {}
    for idx, val in comps.items():
        for J in itertools.product(range(n), repeat=rank):
            term = None
            for s, a in zip(idx, J):
                c = theta[s][a]
                if not c:
                    term = None
                    break
                term = c if term is None else term * c
            if term is not None:
                coord[J] = coord[J] + term * val if J in coord else term * val
    return Tensor(frame.ctx, (DOWN,) * rank, coord), comps
