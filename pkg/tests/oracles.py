"""Brute-force reference computations used as test oracles.

Nothing here imports the package under test.  States are plain dicts
``{basis tuple: amplitude}`` or flat arrays indexed most-significant-first,
and every operation is an explicit loop over basis states.
"""

import itertools
import math

import numpy as np

H = 1 / math.sqrt(2)


def bits(idx, n):
    return tuple((idx >> (n - 1 - j)) & 1 for j in range(n))


def index(bs):
    i = 0
    for b in bs:
        i = (i << 1) | b
    return i


def embed(gate, targets, slots):
    """Full-register matrix of ``gate`` on ``targets`` (identity elsewhere)."""
    n = len(slots)
    pos = [slots.index(t) for t in targets]
    full = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in itertools.product(range(2**n), repeat=2):
        bi, bj = bits(i, n), bits(j, n)
        if any(bi[k] != bj[k] for k in range(n) if k not in pos):
            continue
        full[i, j] = gate[index([bi[p] for p in pos]), index([bj[p] for p in pos])]
    return full


def outcome_probability(amps, n, axis, outcome):
    return sum(abs(amps[i]) ** 2 for i in range(2**n) if bits(i, n)[axis] == outcome)


def reduced_density(amps, n, keep_axes):
    k = len(keep_axes)
    rho = np.zeros((2**k, 2**k), dtype=complex)
    for i, j in itertools.product(range(2**n), repeat=2):
        bi, bj = bits(i, n), bits(j, n)
        if any(bi[m] != bj[m] for m in range(n) if m not in keep_axes):
            continue
        rho[index([bi[a] for a in keep_axes]), index([bj[a] for a in keep_axes])] += amps[i] * np.conj(amps[j])
    return rho


def overlap(a, b):
    return abs(sum(np.conj(x) * y for x, y in zip(a, b))) ** 2


# --- rule-based propagation through the interferometer -----------------
# basis tuples are (p, s, q2, q3); p: 0 = T (T'), 1 = R (R')


def _apply(state, rule):
    out = {}
    for key, amp in state.items():
        for new_key, c in rule(key):
            out[new_key] = out.get(new_key, 0) + amp * c
    return {k: v for k, v in out.items() if v != 0}


def propagate(alpha, beta, flip_channel="R"):
    """Dict states after every stage, built from the physical rules only."""
    st = {(0, 0): 1.0}
    stages = {"initial": st}

    def bs1(k):
        p, s = k
        if p == 0:
            return [((0, s), alpha), ((1, s), 1j * beta)]
        return [((0, s), 1j * beta), ((1, s), alpha)]

    st = stages["bs1"] = _apply(st, bs1)
    flip_p = 1 if flip_channel == "R" else 0
    st = stages["spin_flip"] = _apply(st, lambda k: [((k[0], k[1] ^ (k[0] == flip_p)), 1)])
    st = stages["attach_q2"] = {k + (0,): v for k, v in st.items()}
    st = stages["alice_cnot"] = _apply(st, lambda k: [((k[0], k[1], k[2] ^ k[1]), 1)])
    st = stages["attach_q3"] = {k + (0,): v for k, v in st.items()}
    st = stages["bob_cnot"] = _apply(st, lambda k: [((k[0], k[1], k[2], k[3] ^ k[1]), 1)])

    def bs2(k):
        p, rest = k[0], k[1:]
        if p == 0:
            return [((0,) + rest, 1j * H), ((1,) + rest, H)]
        return [((0,) + rest, H), ((1,) + rest, 1j * H)]

    st = stages["bs2"] = _apply(st, bs2)

    def sg(k):
        p, s, q2, q3 = k
        return [((p, 0, q2, q3), H), ((p, 1, q2, q3), H if s == 0 else -H)]

    stages["sg"] = _apply(st, sg)
    return stages


def dict_to_array(state, n):
    amps = np.zeros(2**n, dtype=complex)
    for k, v in state.items():
        amps[index(k)] = v
    return amps


def branch_states(sg_state):
    """Unnormalized (q2, q3) arrays for each (path, spin) readout."""
    out = {}
    for p, s in itertools.product((0, 1), repeat=2):
        v = np.zeros(4, dtype=complex)
        for (kp, ks, q2, q3), amp in sg_state.items():
            if (kp, ks) == (p, s):
                v[index((q2, q3))] += amp
        out[(p, s)] = v
    return out


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
