"""Plant presets, resolved by name from the `plant.preset` config key."""

import numpy as np

from src.models import MechModel, PositionPolynomial, Workspace
from src.numerics import polynomials

# Rigid-body participation of the two flexible modes in (x, y, rz)
_GAMMA = np.array([[0.02, -0.01], [0.01, 0.02], [0.0, 0.01]])

# Decoupled sensor participation of the flexible modes: {(v, w): coefficient of q_x^v q_y^w}
_MODE_SHAPES = [
    [
        {(0, 0): 0.25, (1, 0): 0.1, (0, 1): 0.05, (1, 1): 0.4},
        {(0, 0): 0.03, (0, 1): 0.05},
        {(0, 0): 0.02, (1, 0): 0.1},
    ],
    [
        {(0, 0): 0.02},
        {(0, 0): 0.2, (1, 0): -0.1, (0, 1): 0.15, (1, 1): 0.3},
        {(0, 0): 0.05, (0, 1): 0.1},
    ],
]

# Decoupled actuator participation b_i of the flexible modes
_MODE_INPUTS = np.array([[0.3, 0.04, 0.0], [0.04, 0.22, 0.11]])

SYNTH_STAGE_HZ = (1050.0, 1800.0)
SYNTH_STAGE_ZETA = (0.001, 0.002)


def _table(entries: list[list[dict]]) -> np.ndarray:
    out = np.zeros((len(entries), len(entries[0]), 2, 2))
    for i, row in enumerate(entries):
        for j, terms in enumerate(row):
            for (v, w), value in terms.items():
                out[i, j, v, w] = value
    return out


def point_of_control(workspace: Workspace) -> PositionPolynomial:
    """Planar (x, y, rz) readout at (q_x, q_y): x - q_y rz, y + q_x rz, rz."""
    coefficients = np.zeros((3, 3, 2, 2))
    coefficients[0, 0, 0, 0] = coefficients[1, 1, 0, 0] = coefficients[2, 2, 0, 0] = 1.0
    coefficients[0, 2, 0, 1] = -1.0
    coefficients[1, 2, 1, 0] = 1.0
    return PositionPolynomial(coefficients=coefficients, workspace=workspace)


def synth_stage(workspace: Workspace) -> MechModel:
    """
    Three rigid-body DOFs (x, y, rz), three actuators, three sensors and two flexible modes
    at 1050 Hz and 1800 Hz whose sensor participation varies bilinearly over the workspace.
    """
    omega = 2 * np.pi * np.array(SYNTH_STAGE_HZ)
    zeta = np.array(SYNTH_STAGE_ZETA)

    # Modal basis V = [[I, Gamma], [0, I]] so that M = V^-T V^-1
    v_inv = np.eye(5)
    v_inv[:3, 3:] = -_GAMMA
    mass = v_inv.T @ v_inv
    stiffness = np.zeros((5, 5))
    stiffness[3:, 3:] = np.diag(omega**2)
    damping = np.zeros((5, 5))
    damping[3:, 3:] = np.diag(2 * zeta * omega)

    phi_a = np.zeros((5, 3))
    phi_a[:3] = np.eye(3)
    phi_a[3:] = _MODE_INPUTS - _GAMMA.T

    rigid = point_of_control(workspace)
    shapes = np.stack([_table([[t] for t in mode]) for mode in _MODE_SHAPES], axis=1)[:, :, 0]
    shapes = polynomials.add(shapes, -_GAMMA[:, :, None, None])
    flexible = polynomials.matmul(rigid.coefficients, shapes)
    degree = (flexible.shape[2] - 1, flexible.shape[3] - 1)
    phi_s = np.concatenate([polynomials.pad(rigid.coefficients, degree), flexible], axis=1)

    return MechModel(
        M=mass,
        D=damping,
        K=stiffness,
        Phi_a=phi_a,
        Phi_s=PositionPolynomial(coefficients=phi_s, workspace=workspace),
    )


def from_literals(
    M: list, D: list, K: list, Phi_a: list, Phi_s: dict, workspace: Workspace
) -> MechModel:
    coefficients = np.asarray(Phi_s["coefficients"], dtype=float)
    expected = tuple(d + 1 for d in Phi_s["degree"])
    if coefficients.ndim != 4 or coefficients.shape[2:] != expected:
        raise ValueError(
            f"Phi_s coefficients must have shape rows x cols x {expected[0]} x {expected[1]}, "
            f"got {coefficients.shape}"
        )
    return MechModel(
        M=M,
        D=D,
        K=K,
        Phi_a=Phi_a,
        Phi_s=PositionPolynomial(coefficients=coefficients, workspace=workspace),
    )
