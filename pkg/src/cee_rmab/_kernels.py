"""Compiled inner loops. Semantics mirror ``markov.advance`` slot for slot."""

import numpy as np
from numba import njit


@njit(cache=True)
def play_block(cum_active, cum_passive, n_states, states, is_played, played,
               uniforms, pos, max_slots, stop_arm, stop_state, stop_visits, out):
    """Advance every arm for up to ``max_slots`` slots.

    Each arm consumes ``uniforms[a, pos + t]`` in slot ``t``. Played arms use
    their active cumulative rows, the rest use passive rows. The states of the
    played arms after each transition land in ``out[k, t]``. When
    ``stop_visits > 0`` the block ends after arm ``stop_arm`` has been seen in
    ``stop_state`` that many times. Returns the number of slots played.
    """
    n_arms = states.shape[0]
    k_play = played.shape[0]
    visits = 0
    length = 0
    for t in range(max_slots):
        for a in range(n_arms):
            u = uniforms[a, pos + t]
            s = states[a]
            m = n_states[a]
            k = 0
            if is_played[a]:
                while k < m - 1 and u >= cum_active[a, s, k]:
                    k += 1
            else:
                while k < m - 1 and u >= cum_passive[a, s, k]:
                    k += 1
            states[a] = k
        for j in range(k_play):
            out[j, t] = states[played[j]]
        length = t + 1
        if stop_visits > 0 and states[stop_arm] == stop_state:
            visits += 1
            if visits >= stop_visits:
                break
    return length


@njit(cache=True)
def markov_advance(cum, rewards, states, totals, uniforms, t0, horizons, h0, out):
    """Advance independent copies of one chain by ``uniforms.shape[1]`` slots.

    Copy ``r`` occupies ``states[r]`` in slot ``t0`` and has reward sum
    ``totals[r]`` over slots 1..t0. Slot ``t0 + j + 1`` uses ``uniforms[r, j]``.
    Whenever the slot count reaches ``horizons[h]`` (starting from ``h0``) the
    running sum is written to ``out[r, h]``. Returns the next horizon index.
    """
    reps, width = uniforms.shape
    m = cum.shape[0]
    n_h = horizons.shape[0]
    h_end = h0
    for r in range(reps):
        s = states[r]
        total = totals[r]
        h = h0
        for j in range(width):
            u = uniforms[r, j]
            k = 0
            while k < m - 1 and u >= cum[s, k]:
                k += 1
            s = k
            total += rewards[s]
            if h < n_h and t0 + j + 1 == horizons[h]:
                out[r, h] = total
                h += 1
        states[r] = s
        totals[r] = total
        h_end = h
    return h_end
