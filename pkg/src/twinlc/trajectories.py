"""Quantum-jump unraveling of the single-oscillator master equation.

Pure states evolve under the non-Hermitian effective Hamiltonian

    H_eff = H - (i/2) sum_j gamma_j L_j+ L_j,
    L_j in {a+, a^2, a+^3, a^4},

with norm-threshold waiting times: the squared norm decays multiplicatively
step by step, a jump fires when it crosses a uniform deviate, and the jump
channel is drawn proportionally to gamma_j ||L_j psi||^2.  All L_j+ L_j are
diagonal, so for an undriven oscillator H_eff is diagonal and a step is an
exact elementwise phase/decay multiply.  Between jumps the Fock support of
psi can only shrink (diagonal evolution does not spread the ladder), so the
kernel tracks an active index window and the per-step cost follows the
support width, not the cutoff.  With a drive the kernel falls back to a
dense one-step propagator; this path is exact too but costs O(d^2) a step.

Per-trajectory randomness comes from counter-based Philox streams, so fixed
seeds give bit-identical records and ensembles parallelize reproducibly.
"""

from __future__ import annotations

import os
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg import expm

from .fock import FockSpace
from .params import OscillatorParams

__all__ = [
    "TrajectoryRecord",
    "ResidenceStats",
    "run_trajectory",
    "run_ensemble",
    "residence_stats",
    "max_jump_rate",
    "safe_dt",
]

SUPPORT_FLOOR = 1e-150  # |psi_n|^2 below this is numerically irrelevant
RAND_CHUNK = 1 << 17
JUMP_BUFFER = 1 << 16

STATUS_DONE = 0
STATUS_NEED_RAND = 1
STATUS_JUMPS_FULL = 2
STATUS_UNDERFLOW = 3


@dataclass(frozen=True)
class TrajectoryRecord:
    """One unraveled trajectory sampled on a coarse time grid.

    ``amplitude`` is the ring radius r(t) = sqrt(<a+a>).  The coherent
    amplitude |<a>| is recorded separately as ``coherence``: with purely
    incoherent gain/damping every jump channel is a ladder shift, so the
    conditional state collapses onto a narrow band of Fock states and |<a>|
    decays to zero even while the energy keeps circling a ring.  Only the
    occupation radius can exhibit the dwell/tunneling structure between the
    two rings; for the mean-field coherent states the two definitions agree.

    jump_times/jump_channels hold up to ``max_recorded_jumps`` events;
    jump_counts always holds the complete per-channel totals.
    """

    times: np.ndarray
    amplitude: np.ndarray        # r(t) = sqrt(<a+a>)
    coherence: np.ndarray        # |<a>|(t)
    occupation: np.ndarray       # <n>(t)
    jump_times: np.ndarray
    jump_channels: np.ndarray
    jump_counts: np.ndarray      # shape (4,), channels (a+, a^2, a+^3, a^4)
    seed: int
    dt: float
    max_step_prob: float
    final_state: np.ndarray

    @property
    def jumps(self) -> list[tuple[float, int]]:
        return list(zip(self.jump_times.tolist(), self.jump_channels.tolist()))


ResidenceStats = namedtuple(
    "ResidenceStats", ["fraction_inner", "fraction_outer", "crossings"]
)


def _channel_tables(p: OscillatorParams, d: int):
    """Per-channel shift, rate*|element|^2, and element tables.

    Elements come from the truncated ladder: a+ loses its top matrix element
    at the cutoff, a+^3 its top three, exactly as the sparse operators used
    by the master equation.
    """
    n = np.arange(d, dtype=np.float64)
    w2 = np.zeros((4, d))
    w2[0, : d - 1] = (n[: d - 1] + 1.0)                               # a+
    w2[1] = n * (n - 1.0)                                             # a^2
    if d > 3:
        w2[2, : d - 3] = (n[: d - 3] + 1) * (n[: d - 3] + 2) * (n[: d - 3] + 3)
    w2[3] = n * (n - 1.0) * (n - 2.0) * (n - 3.0)                     # a^4
    w2[1, :2] = 0.0
    w2[3, :4] = 0.0
    shifts = np.array([1, -2, 3, -4], dtype=np.int64)
    gammas = np.array(p.gamma, dtype=np.float64)
    rate_w2 = gammas[:, None] * w2
    coeff = np.sqrt(w2)
    return shifts, rate_w2, coeff


@njit(cache=True)
def _apply_jump(psi, scratch, coeff, shift, lo, hi, d):
    """L_c psi into psi (unnormalized); returns the new support window."""
    new_lo = max(0, lo + shift)
    new_hi = min(d - 1, hi + shift)
    for m in range(new_lo, new_hi + 1):
        scratch[m] = 0.0 + 0.0j
    for n in range(lo, hi + 1):
        m = n + shift
        if 0 <= m < d:
            scratch[m] = coeff[n] * psi[n]
    for n in range(lo, hi + 1):
        psi[n] = 0.0 + 0.0j
    for m in range(new_lo, new_hi + 1):
        psi[m] = scratch[m]
    while new_lo < new_hi and (psi[new_lo].real**2 + psi[new_lo].imag**2) < SUPPORT_FLOOR:
        psi[new_lo] = 0.0 + 0.0j
        new_lo += 1
    while new_hi > new_lo and (psi[new_hi].real**2 + psi[new_hi].imag**2) < SUPPORT_FLOOR:
        psi[new_hi] = 0.0 + 0.0j
        new_hi -= 1
    return new_lo, new_hi


@njit(cache=True)
def _jump_event(psi, scratch, rate_w2, coeff, shifts, lo, hi, d, rand, ipos):
    """Pick a channel ~ gamma_j ||L_j psi||^2, apply it, renormalize."""
    w = np.zeros(4)
    total = 0.0
    for c in range(4):
        acc = 0.0
        row = rate_w2[c]
        for n in range(lo, hi + 1):
            acc += row[n] * (psi[n].real**2 + psi[n].imag**2)
        w[c] = acc
        total += acc
    v = rand[ipos] * total
    ipos += 1
    c = 0
    acc = w[0]
    while c < 3 and v > acc:
        c += 1
        acc += w[c]
    lo, hi = _apply_jump(psi, scratch, coeff[c], shifts[c], lo, hi, d)
    norm2 = 0.0
    for n in range(lo, hi + 1):
        norm2 += psi[n].real**2 + psi[n].imag**2
    if norm2 <= 0.0:
        return -1, lo, hi, ipos
    inv = 1.0 / np.sqrt(norm2)
    for n in range(lo, hi + 1):
        psi[n] *= inv
    return c, lo, hi, ipos


@njit(cache=True)
def _run_chunk_diag(psi, scratch, decay, rate_w2, coeff, shifts, state_f,
                    state_i, rand, jump_t, jump_c, record, t0, dt, n_steps, d):
    """Advance up to n_steps diagonal steps; mutates psi and state vectors.

    state_f: [u_threshold, cum_norm2, max_step_prob]
    state_i: [lo, hi, ipos, n_recorded, counts0..3]
    Returns (status, steps_done).
    """
    u = state_f[0]
    cum = state_f[1]
    maxp = state_f[2]
    lo = state_i[0]
    hi = state_i[1]
    ipos = state_i[2]
    nrec = state_i[3]
    status = STATUS_DONE
    step = 0
    while step < n_steps:
        if ipos + 2 > rand.size:
            status = STATUS_NEED_RAND
            break
        if record == 1 and nrec + 1 > jump_t.size:
            status = STATUS_JUMPS_FULL
            break
        norm2 = 0.0
        for n in range(lo, hi + 1):
            psi[n] *= decay[n]
            norm2 += psi[n].real**2 + psi[n].imag**2
        step += 1
        if norm2 <= 1e-300 or not np.isfinite(norm2):
            status = STATUS_UNDERFLOW
            break
        p_step = 1.0 - norm2
        if p_step > maxp:
            maxp = p_step
        inv = 1.0 / np.sqrt(norm2)
        for n in range(lo, hi + 1):
            psi[n] *= inv
        cum *= norm2
        if cum <= u:
            c, lo, hi, ipos = _jump_event(
                psi, scratch, rate_w2, coeff, shifts, lo, hi, d, rand, ipos
            )
            if c < 0:
                status = STATUS_UNDERFLOW
                break
            state_i[4 + c] += 1
            if record == 1:
                jump_t[nrec] = t0 + step * dt
                jump_c[nrec] = c
                nrec += 1
            u = rand[ipos]
            ipos += 1
            cum = 1.0
        else:
            # tighten the window as differential decay empties the edges
            while lo < hi and (psi[lo].real**2 + psi[lo].imag**2) < SUPPORT_FLOOR:
                psi[lo] = 0.0 + 0.0j
                lo += 1
            while hi > lo and (psi[hi].real**2 + psi[hi].imag**2) < SUPPORT_FLOOR:
                psi[hi] = 0.0 + 0.0j
                hi -= 1
    state_f[0] = u
    state_f[1] = cum
    state_f[2] = maxp
    state_i[0] = lo
    state_i[1] = hi
    state_i[2] = ipos
    state_i[3] = nrec
    return status, step


@njit(cache=True)
def _run_chunk_dense(psi, scratch, u_step, rate_w2, coeff, shifts, state_f,
                     state_i, rand, jump_t, jump_c, record, t0, dt, n_steps, d):
    """Dense-propagator variant for driven oscillators (full window)."""
    u = state_f[0]
    cum = state_f[1]
    maxp = state_f[2]
    ipos = state_i[2]
    nrec = state_i[3]
    status = STATUS_DONE
    step = 0
    while step < n_steps:
        if ipos + 2 > rand.size:
            status = STATUS_NEED_RAND
            break
        if record == 1 and nrec + 1 > jump_t.size:
            status = STATUS_JUMPS_FULL
            break
        norm2 = 0.0
        for m in range(d):
            acc = 0.0 + 0.0j
            for n in range(d):
                acc += u_step[m, n] * psi[n]
            scratch[m] = acc
            norm2 += acc.real**2 + acc.imag**2
        for m in range(d):
            psi[m] = scratch[m]
        step += 1
        if norm2 <= 1e-300 or not np.isfinite(norm2):
            status = STATUS_UNDERFLOW
            break
        p_step = 1.0 - norm2
        if p_step > maxp:
            maxp = p_step
        inv = 1.0 / np.sqrt(norm2)
        for n in range(d):
            psi[n] *= inv
        cum *= norm2
        if cum <= u:
            c, _, _, ipos = _jump_event(
                psi, scratch, rate_w2, coeff, shifts, 0, d - 1, d, rand, ipos
            )
            if c < 0:
                status = STATUS_UNDERFLOW
                break
            state_i[4 + c] += 1
            if record == 1:
                jump_t[nrec] = t0 + step * dt
                jump_c[nrec] = c
                nrec += 1
            u = rand[ipos]
            ipos += 1
            cum = 1.0
    state_f[0] = u
    state_f[1] = cum
    state_f[2] = maxp
    state_i[2] = ipos
    state_i[3] = nrec
    return status, step


def max_jump_rate(p: OscillatorParams, space: FockSpace) -> float:
    """Largest total jump rate sum_j gamma_j <n|L_j+ L_j|n> over the ladder."""
    _, rate_w2, _ = _channel_tables(p, space.dim)
    return float(rate_w2.sum(axis=0).max())


def safe_dt(p: OscillatorParams, space: FockSpace,
            p_max: float = 0.095) -> float:
    """Step keeping the per-step jump probability below p_max everywhere."""
    rate = max_jump_rate(p, space)
    if rate == 0.0:
        raise ValueError("all jump rates vanish; any dt works")
    return p_max / rate


def _support_window(psi: np.ndarray) -> tuple[int, int]:
    prob = psi.real**2 + psi.imag**2
    idx = np.nonzero(prob >= SUPPORT_FLOOR)[0]
    if idx.size == 0:
        raise ValueError("initial state has no support above the floor")
    return int(idx[0]), int(idx[-1])


def _amplitude_and_occupation(psi: np.ndarray) -> tuple[float, float]:
    prob = psi.real**2 + psi.imag**2
    occ = float(np.sum(prob * np.arange(psi.size)))
    n = np.arange(psi.size - 1)
    amp = np.abs(np.sum(np.conj(psi[:-1]) * np.sqrt(n + 1.0) * psi[1:]))
    return float(amp), occ


def run_trajectory(p: OscillatorParams, space: FockSpace, psi0: np.ndarray,
                   dt: float, t_final: float, seed: int, *,
                   sample_interval: float = 0.5, record_jumps: bool = True,
                   max_recorded_jumps: int = 1_000_000) -> TrajectoryRecord:
    """One quantum-jump trajectory; identical seed gives an identical record.

    The sample grid is quantized to whole steps: the effective interval is
    round(sample_interval/dt) steps.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    d = space.dim
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    if psi.shape != (d,):
        raise ValueError(f"psi0 must have shape ({d},)")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("psi0 must be nonzero")
    psi /= norm

    shifts, rate_w2, coeff = _channel_tables(p, d)
    gamma_tot = rate_w2.sum(axis=0)
    n = np.arange(d, dtype=np.float64)
    h_diag = p.delta * n + p.kerr * n * (n - 1.0)
    driven = complex(p.drive) != 0
    if driven:
        h = np.diag(h_diag.astype(complex))
        off = np.sqrt(n[1:])
        w = complex(p.drive)
        h += w * np.diag(off, -1) + np.conj(w) * np.diag(off, 1)
        u_step = expm(-1j * (h - 0.5j * np.diag(gamma_tot)) * dt)
        decay = np.zeros(1, dtype=np.complex128)  # unused
    else:
        decay = np.exp((-1j * h_diag - 0.5 * gamma_tot) * dt)
        u_step = np.zeros((1, 1), dtype=np.complex128)  # unused

    steps_per_sample = max(1, int(round(sample_interval / dt)))
    total_steps = int(round(t_final / dt))
    rng = np.random.Generator(np.random.Philox(seed))
    rand = rng.random(RAND_CHUNK)
    scratch = np.zeros(d, dtype=np.complex128)

    state_f = np.array([rng.random(), 1.0, 0.0])
    lo, hi = _support_window(psi)
    state_i = np.zeros(8, dtype=np.int64)
    state_i[0], state_i[1] = lo, hi

    jump_t = np.zeros(JUMP_BUFFER)
    jump_c = np.zeros(JUMP_BUFFER, dtype=np.int64)
    rec_t: list[np.ndarray] = []
    rec_c: list[np.ndarray] = []
    recorded = 0

    sample_times = [0.0]
    coh0, occ0 = _amplitude_and_occupation(psi)
    coherences = [coh0]
    occupations = [occ0]

    steps_done = 0
    while steps_done < total_steps:
        target = min(steps_per_sample, total_steps - steps_done)
        done_in_block = 0
        while done_in_block < target:
            record = 1 if (record_jumps and recorded < max_recorded_jumps) else 0
            args = (psi, scratch, rate_w2, coeff, shifts, state_f, state_i,
                    rand, jump_t, jump_c, record,
                    (steps_done + done_in_block) * dt, dt,
                    target - done_in_block, d)
            if driven:
                status, ran = _run_chunk_dense(psi, scratch, u_step, *args[2:])
            else:
                status, ran = _run_chunk_diag(psi, scratch, decay, *args[2:])
            done_in_block += ran
            nrec = int(state_i[3])
            if nrec:
                keep = min(nrec, max_recorded_jumps - recorded)
                rec_t.append(jump_t[:keep].copy())
                rec_c.append(jump_c[:keep].copy())
                recorded += keep
                state_i[3] = 0
            if status == STATUS_NEED_RAND:
                rand = rng.random(RAND_CHUNK)
                state_i[2] = 0
            elif status == STATUS_UNDERFLOW:
                raise FloatingPointError(
                    "state norm underflowed at step "
                    f"{steps_done + done_in_block}; decrease dt or the rates"
                )
        steps_done += target
        coh, occ = _amplitude_and_occupation(psi)
        sample_times.append(steps_done * dt)
        coherences.append(coh)
        occupations.append(occ)

    max_p = float(state_f[2])
    occupations = np.asarray(occupations)
    return TrajectoryRecord(
        times=np.asarray(sample_times),
        amplitude=np.sqrt(occupations),
        coherence=np.asarray(coherences),
        occupation=occupations,
        jump_times=np.concatenate(rec_t) if rec_t else np.zeros(0),
        jump_channels=(
            np.concatenate(rec_c) if rec_c else np.zeros(0, dtype=np.int64)
        ),
        jump_counts=state_i[4:8].copy(),
        seed=int(seed),
        dt=float(dt),
        max_step_prob=max_p,
        final_state=psi.copy(),
    )


def _ensemble_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _ensemble_worker(task):
    (p, space, psi0, dt, t_final, seed, kwargs) = task
    return run_trajectory(p, space, psi0, dt, t_final, seed, **kwargs)


def run_ensemble(p: OscillatorParams, space: FockSpace, psi0: np.ndarray,
                 dt: float, t_final: float, n_traj: int, master_seed: int,
                 workers: int | None = None,
                 **kwargs) -> list[TrajectoryRecord]:
    """Independent trajectories with per-trajectory derived seeds.

    Results are ordered by trajectory index regardless of scheduling, so a
    fixed master seed reproduces the ensemble exactly.
    """
    seeds = [_ensemble_seed(master_seed, i) for i in range(n_traj)]
    tasks = [(p, space, psi0, dt, t_final, s, kwargs) for s in seeds]
    if workers is None:
        workers = os.cpu_count() or 1
    workers = min(workers, n_traj)
    if workers <= 1:
        return [_ensemble_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_ensemble_worker, tasks))


def residence_stats(rec: TrajectoryRecord, r_c: float,
                    hysteresis: float = 0.5) -> ResidenceStats:
    """Dwell fractions on either side of r_c and hysteresis-filtered crossings.

    A crossing is only counted once the amplitude leaves the band
    r_c +- hysteresis on the opposite side, so jitter on the separatrix is
    not miscounted as tunneling.
    """
    r = np.asarray(rec.amplitude)
    if r.size == 0:
        raise ValueError("empty trajectory record")
    frac_in = float(np.mean(r < r_c))
    frac_out = float(np.mean(r > r_c))
    side = 0  # -1 inner, +1 outer, 0 undecided
    crossings = 0
    for val in r:
        if val > r_c + hysteresis:
            if side == -1:
                crossings += 1
            side = 1
        elif val < r_c - hysteresis:
            if side == 1:
                crossings += 1
            side = -1
    return ResidenceStats(frac_in, frac_out, crossings)
