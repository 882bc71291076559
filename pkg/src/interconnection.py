"""Frozen-position closed interconnection of plant, observer bank, combiner and controllers.

States are stacked as (plant x, bank z, band-pass f, PID c). The bank holds the local
predictions q_i(k|k-1), so the flexible-mode command at tick k uses only past measurements
and the interconnection has no algebraic loop.
"""

import logging
from typing import NamedTuple

import control
import numpy as np

from src.control_loops import FlexModeController, RigidBodyController
from src.errors import IllPosedError
from src.models import (
    BandPass,
    DecoupledPlant,
    FlexGains,
    ObserverBank,
    RigidBodyDesign,
    WeightingScheme,
)
from src.models.plant import PointLike
from src.numerics.discretization import zoh_discretize

logger = logging.getLogger(__name__)


class LoopDesign(NamedTuple):
    plant: DecoupledPlant
    bank: ObserverBank
    scheme: WeightingScheme
    gains: FlexGains
    bandpass: BandPass
    rb_design: RigidBodyDesign


def combiner_matrix(scheme: WeightingScheme, bank: ObserverBank, p: PointLike) -> np.ndarray:
    """
    Linear map from the stacked local predictions to the scheduled estimate.

    Rigid-body states come from the observer at bank.rigid_index; retained flexible states use
    the weights W_i(p).
    """
    n, n_states = bank.n, bank.n_states
    flex = bank.flex_slice()
    weights = scheme.weights(p)
    rigid = np.arange(flex.start)
    out = np.zeros((n_states, n * n_states))
    for i in range(n):
        block = np.zeros((n_states, n_states))
        if i == bank.rigid_index:
            block[rigid, rigid] = 1.0
        block[flex, flex] = weights[i] * np.eye(n_states - flex.start)
        out[:, i * n_states : (i + 1) * n_states] = block
    return out


def combine_predictions(
    scheme: WeightingScheme, bank: ObserverBank, local: np.ndarray, p: PointLike
) -> np.ndarray:
    """Same map as combiner_matrix, applied to local predictions of shape (n, n_states)."""
    flex = bank.flex_slice()
    q_hat = np.array(local[bank.rigid_index], dtype=float)
    q_hat[flex] = scheme.weights(p) @ local[:, flex]
    return q_hat


def frozen_loop(
    design: LoopDesign, p: PointLike, flex_enabled: bool, rb_closed: bool
) -> control.StateSpace:
    """
    Discrete LTI interconnection at a frozen scheduling point.

    Args:
        design (LoopDesign): Plant, observers, combiner and controllers.
        p (PointLike): Frozen scheduling point.
        flex_enabled (bool): Close the flexible-mode loop.
        rb_closed (bool): Close the rigid-body PID loop; otherwise u_RB is the external input.

    Returns:
        control.StateSpace: Map from u_RB (added to the PID output when closed) to y_RB.
    """
    plant, bank = design.plant, design.bank
    ts = bank.ts
    a_d, b_d = zoh_discretize(plant.a(), plant.b(), ts)
    p = plant.check_point(p)
    c_p = plant.c(p)
    n_x, n_u, n_y = a_d.shape[0], b_d.shape[1], c_p.shape[0]

    a_z, b_z = bank.stacked()
    b_zu, b_zy = b_z[:, :n_u], b_z[:, n_u:]
    n_z = a_z.shape[0]

    flex = FlexModeController(design.gains, design.bandpass, bank.n_rb, bank.keep)
    filt = flex.filters
    n_f = filt.a.shape[0]
    pick = flex.selector(bank.n_states) @ combiner_matrix(design.scheme, bank, p)

    pid = RigidBodyController(design.rb_design).feedback
    n_c = pid.a.shape[0] if rb_closed else 0

    # u_tilde = K_x x + K_z z + K_f f + K_c c + u
    k_x = np.zeros((n_u, n_x))
    k_z = np.zeros((n_u, n_z))
    k_f = np.zeros((n_u, n_f))
    k_c = np.zeros((n_u, n_c))
    if flex_enabled:
        k_z = flex.k_fm @ filt.d @ pick
        k_f = flex.k_fm @ filt.c
    if rb_closed:
        k_x = -pid.d @ c_p
        k_c = pid.c

    n = n_x + n_z + n_f + n_c
    sx, sz, sf, sc = (
        slice(0, n_x),
        slice(n_x, n_x + n_z),
        slice(n_x + n_z, n_x + n_z + n_f),
        slice(n_x + n_z + n_f, n),
    )
    k_all = np.hstack([k_x, k_z, k_f, k_c])
    a = np.zeros((n, n))
    b = np.zeros((n, n_u))

    a[sx] += b_d @ k_all
    a[sx, sx] += a_d
    b[sx] = b_d

    a[sz] += b_zu @ k_all
    a[sz, sz] += a_z
    a[sz, sx] += b_zy @ c_p
    b[sz] = b_zu

    a[sf, sf] = filt.a
    a[sf, sz] = filt.b @ pick

    if rb_closed:
        a[sc, sc] = pid.a
        a[sc, sx] = -pid.b @ c_p

    c = np.zeros((n_y, n))
    c[:, sx] = c_p
    if not np.all(np.isfinite(a)):
        raise IllPosedError("Interconnection matrices are not finite", point=p.as_tuple())
    return control.ss(a, b, c, np.zeros((n_y, n_u)), ts)


def loop_spectral_radius(system: control.StateSpace) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(system.A))))


def response(system: control.StateSpace, f_hz: np.ndarray) -> np.ndarray:
    """Frequency response on the unit circle, shape (n_freq, n_outputs, n_inputs)."""
    z = np.exp(1j * 2 * np.pi * np.asarray(f_hz, dtype=float) * system.dt)
    values = system(z, squeeze=False)
    return np.moveaxis(np.asarray(values), -1, 0)


def band_peak(
    system: control.StateSpace,
    band: tuple[float, float],
    channel: tuple[int, int],
    points: int = 401,
    rounds: int = 4,
) -> tuple[float, float]:
    """
    Largest magnitude of one channel inside a band, located by successive grid refinement.

    Returns:
        tuple[float, float]: Peak frequency (Hz) and magnitude.
    """
    lo, hi = band
    out, inp = channel
    f_peak, peak = lo, 0.0
    for _ in range(rounds):
        freq = np.linspace(lo, hi, points)
        magnitude = np.abs(response(system, freq)[:, out, inp])
        index = int(np.argmax(magnitude))
        f_peak, peak = float(freq[index]), float(magnitude[index])
        step = freq[1] - freq[0]
        lo, hi = max(band[0], f_peak - 2 * step), min(band[1], f_peak + 2 * step)
    return f_peak, peak
