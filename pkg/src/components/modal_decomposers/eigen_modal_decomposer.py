import logging

import numpy as np
from scipy import linalg

from src.components.modal_decomposers.base_modal_decomposer import BaseModalDecomposer
from src.errors import EigSolveFailure, NonProportionalDampingError, NonSymmetricError
from src.models import MechModel, ModalForm, PartitionedLpvPlant
from src.models.plant import block_diagonal, position_columns, velocity_rows

logger = logging.getLogger(__name__)


class EigenModalDecomposer(BaseModalDecomposer):
    """Mass-normalized modal form from the generalized eigenproblem K V = M V Lambda."""

    def run(self, mech: MechModel) -> tuple[ModalForm, PartitionedLpvPlant]:
        modal = self.to_modal(mech)
        partitioned = self.group_and_partition(modal)
        logger.info(
            "%d rigid-body modes, flexible modes at %s Hz",
            modal.n_rb,
            np.array2string(modal.omega[modal.n_rb :] / (2 * np.pi), precision=1),
        )
        return modal, partitioned

    def _check_symmetric(self, name: str, matrix: np.ndarray):
        rtol = self.settings.tolerances.symmetry_rtol
        asymmetry = np.linalg.norm(matrix - matrix.T, "fro")
        if asymmetry > rtol * max(np.linalg.norm(matrix, "fro"), np.finfo(float).tiny):
            raise NonSymmetricError(
                f"{name} is not symmetric (||{name} - {name}'|| = {asymmetry:.3g})"
            )

    def _align_rigid(self, vectors: np.ndarray, mech: MechModel) -> np.ndarray:
        """Rotate the rigid-body block so the sensor readout at the workspace center is SPD."""
        n_rb = vectors.shape[1]
        if n_rb == 0 or mech.n_y < n_rb:
            return vectors
        readout = mech.Phi_s(mech.workspace.center) @ vectors
        u, _, wt = np.linalg.svd(readout, full_matrices=False)
        return vectors @ (wt.T @ u.T)

    def to_modal(self, mech: MechModel) -> ModalForm:
        """
        Solve K V = M V Lambda and read the modal damping from V' D V.

        Args:
            mech (MechModel): The physical plant.

        Returns:
            ModalForm: Frequencies, damping ratios, mass-normalized modes and modal maps.
        """
        tol = self.settings.tolerances
        for name in ("M", "D", "K"):
            self._check_symmetric(name, getattr(mech, name))
        mass = 0.5 * (mech.M + mech.M.T)
        stiffness = 0.5 * (mech.K + mech.K.T)
        damping = 0.5 * (mech.D + mech.D.T)
        if np.min(np.linalg.eigvalsh(mass)) <= 0:
            raise EigSolveFailure("Mass matrix is not positive definite")

        try:
            eigenvalues, vectors = linalg.eigh(stiffness, mass)
        except (linalg.LinAlgError, ValueError) as e:
            raise EigSolveFailure(f"Generalized eigenproblem failed: {e}")

        scale = max(np.max(np.abs(eigenvalues)), np.finfo(float).tiny)
        if np.min(eigenvalues) < -tol.eig_rtol * scale - tol.rigid_tol**2:
            raise EigSolveFailure("Stiffness matrix is not positive semidefinite")
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        rigid = (eigenvalues <= tol.eig_rtol * scale) | (np.sqrt(eigenvalues) <= tol.rigid_tol)
        eigenvalues[rigid] = 0.0

        order = np.lexsort((np.arange(len(eigenvalues)), eigenvalues))
        eigenvalues, vectors, rigid = eigenvalues[order], vectors[:, order], rigid[order]
        n_rb = int(np.count_nonzero(rigid))
        omega = np.sqrt(eigenvalues)

        vectors = vectors.copy()
        vectors[:, :n_rb] = self._align_rigid(vectors[:, :n_rb], mech)
        for i in range(n_rb, vectors.shape[1]):
            if vectors[np.argmax(np.abs(vectors[:, i])), i] < 0:
                vectors[:, i] = -vectors[:, i]

        n = mech.n_x
        if np.linalg.norm(vectors.T @ mass @ vectors - np.eye(n)) > tol.modal_rtol * np.sqrt(n):
            raise EigSolveFailure("Eigenvectors are not mass-normalized")
        modal_stiffness = vectors.T @ stiffness @ vectors
        if np.linalg.norm(modal_stiffness - np.diag(eigenvalues)) > tol.modal_rtol * max(
            scale, 1.0
        ):
            raise EigSolveFailure("Eigenvectors do not diagonalize the stiffness matrix")

        modal_damping = vectors.T @ damping @ vectors
        diagonal = np.diag(modal_damping)
        off_diagonal = np.linalg.norm(modal_damping - np.diag(diagonal), "fro")
        if off_diagonal > tol.damping_offdiag * np.linalg.norm(diagonal):
            raise NonProportionalDampingError(
                f"Modal damping has off-diagonal mass {off_diagonal:.3g} "
                f"against diagonal {np.linalg.norm(diagonal):.3g}"
            )
        zeta = np.zeros(n)
        zeta[n_rb:] = diagonal[n_rb:] / (2.0 * omega[n_rb:])

        return ModalForm(
            omega=omega,
            zeta=zeta,
            vtilde=vectors,
            b_modal=vectors.T @ mech.Phi_a,
            c_modal=mech.Phi_s @ vectors,
            n_rb=n_rb,
        )

    @staticmethod
    def group_and_partition(modal: ModalForm) -> PartitionedLpvPlant:
        """Per-mode (position, velocity) pairs, rigid-body modes first."""
        n_rb = modal.n_rb
        return PartitionedLpvPlant(
            a_rb=block_diagonal(np.zeros(n_rb), np.zeros(n_rb)),
            a_fm=block_diagonal(modal.omega[n_rb:], modal.zeta[n_rb:]),
            b_rb=velocity_rows(modal.b_modal[:n_rb]),
            b_fm=velocity_rows(modal.b_modal[n_rb:]),
            c_rb=position_columns(modal.c_modal.columns(slice(0, n_rb))),
            c_fm=position_columns(modal.c_modal.columns(slice(n_rb, None))),
            omega_fm=modal.omega[n_rb:],
            zeta_fm=modal.zeta[n_rb:],
            n_rb=n_rb,
        )
