"""Matrix-valued polynomials in two scheduling coordinates.

Coefficient tensors have shape (rows, cols, d_x + 1, d_y + 1); entry [i, j, v, w] multiplies
q_x^v q_y^w.
"""

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d


def monomials(q_x: float, q_y: float, degree: tuple[int, int]) -> np.ndarray:
    """Row of monomials q_x^v q_y^w, ordered (q_x^0..q_x^dx) kron (q_y^0..q_y^dy)."""
    return npoly.polyvander2d(np.asarray(q_x, float), np.asarray(q_y, float), list(degree))


def evaluate(coefficients: np.ndarray, q_x: float, q_y: float) -> np.ndarray:
    rows, cols, nx, ny = coefficients.shape
    basis = monomials(q_x, q_y, (nx - 1, ny - 1))
    flat = coefficients.reshape(rows * cols, nx * ny) @ basis.reshape(nx * ny)
    return flat.reshape(rows, cols)


def pad(coefficients: np.ndarray, degree: tuple[int, int]) -> np.ndarray:
    rows, cols, nx, ny = coefficients.shape
    out = np.zeros((rows, cols, degree[0] + 1, degree[1] + 1))
    out[:, :, :nx, :ny] = coefficients
    return out


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    degree = (max(a.shape[2], b.shape[2]) - 1, max(a.shape[3], b.shape[3]) - 1)
    return pad(a, degree) + pad(b, degree)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two polynomial matrices; coefficient planes multiply by 2-D convolution."""
    rows, inner, ax, ay = a.shape
    inner_b, cols, bx, by = b.shape
    if inner != inner_b:
        raise ValueError(f"Polynomial matrix shapes {a.shape[:2]} and {b.shape[:2]} do not chain")
    out = np.zeros((rows, cols, ax + bx - 1, ay + by - 1))
    for i in range(rows):
        for j in range(cols):
            for k in range(inner):
                out[i, j] += convolve2d(a[i, k], b[k, j])
    return out


def scale_right(a: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Polynomial matrix times a constant matrix."""
    return np.einsum("ikvw,kj->ijvw", a, matrix)


def scale_left(matrix: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Constant matrix times a polynomial matrix."""
    return np.einsum("ik,kjvw->ijvw", matrix, a)


def trim(coefficients: np.ndarray, atol: float = 0.0) -> np.ndarray:
    """Drop trailing degree planes whose coefficients are all within atol of zero."""
    out = coefficients
    while out.shape[2] > 1 and np.all(np.abs(out[:, :, -1, :]) <= atol):
        out = out[:, :, :-1, :]
    while out.shape[3] > 1 and np.all(np.abs(out[:, :, :, -1]) <= atol):
        out = out[:, :, :, :-1]
    return out


def _minor(a: np.ndarray, row: int, col: int) -> np.ndarray:
    keep_rows = [i for i in range(a.shape[0]) if i != row]
    keep_cols = [j for j in range(a.shape[1]) if j != col]
    return a[np.ix_(keep_rows, keep_cols)]


def determinant(a: np.ndarray) -> np.ndarray:
    """Determinant of a square polynomial matrix by cofactor expansion, as a 1x1 polynomial."""
    n = a.shape[0]
    if n == 1:
        return a.copy()
    total = np.zeros((1, 1, 1, 1))
    for col in range(n):
        sign = -1.0 if col % 2 else 1.0
        term = matmul(a[0:1, col : col + 1], determinant(_minor(a, 0, col)))
        total = add(total, sign * term)
    return total


def adjugate(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1, 1, 1))
    cofactors = [[None] * n for _ in range(n)]
    degree = (0, 0)
    for i in range(n):
        for j in range(n):
            sign = -1.0 if (i + j) % 2 else 1.0
            cofactors[i][j] = sign * determinant(_minor(a, i, j))
            degree = (
                max(degree[0], cofactors[i][j].shape[2] - 1),
                max(degree[1], cofactors[i][j].shape[3] - 1),
            )
    out = np.zeros((n, n, degree[0] + 1, degree[1] + 1))
    for i in range(n):
        for j in range(n):
            # adj(A)[j, i] = cofactor(i, j)
            out[j, i] = pad(cofactors[i][j], degree)[0, 0]
    return out
