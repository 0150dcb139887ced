"""
isac-fbl - Cramér-Rao Bound for Parameter Sensing
Fisher information of the physical user parameters seen through the LS channel
estimate, and the CRB trace that lower-bounds their estimation MSE.

The LS error vec(E_h) (column stacking: channel column of user a in row-block a)
has covariance C_h = sigma_n2 ((G*)^{-1} ⊗ I_m). With J = ∂vec(H)/∂P:

    F = 2 Re{J^H C_h^{-1} J} = (2/sigma_n2) Re{ Σ_{a,b} conj(G_ab) J_a^H J_b }
    E ||P_hat − P||² >= tr(F^{-1})

J_a is the m×q slice of J for row-block a. The sum is evaluated blockwise; the
mk×mk Kronecker matrix is only built by dense_fisher_information, which serves
as the reference for small instances.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import structlog
from scipy import linalg

from src.core.errors import InvalidSpecError, SingularFIMError, SingularGramError

logger = structlog.get_logger()

# l_min(F) / l_max(F) at or below this → unidentifiable parameters
FIM_CUTOFF = 1e-12

PARAMETER_NAMES: Tuple[str, ...] = ("aoa", "range", "velocity")


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass
class JacobianMatrix:
    """
    Sensitivity of vec(H) to the user parameters, stored per user.

    Attributes:
        blocks: One m×q_i complex block per user; column j is ∂H_{:,i}/∂P_{i,j}
        names: Parameter names of each user's columns (same order as the block)
    """
    blocks: List[np.ndarray]
    names: List[Tuple[str, ...]] = field(default_factory=list)

    def __post_init__(self):
        if not self.blocks:
            raise InvalidSpecError("JacobianMatrix needs at least one user block")
        self.blocks = [np.atleast_2d(np.asarray(b, dtype=np.complex128)) for b in self.blocks]
        rows = {b.shape[0] for b in self.blocks}
        if len(rows) != 1:
            raise InvalidSpecError(f"Every user block must have m rows, got row counts {sorted(rows)}")
        if not self.names:
            self.names = [tuple(f"p{j}" for j in range(b.shape[1])) for b in self.blocks]
        if len(self.names) != len(self.blocks):
            raise InvalidSpecError("names must hold one tuple per user block")
        for block, names in zip(self.blocks, self.names):
            if block.shape[1] != len(names):
                raise InvalidSpecError(
                    f"Block has {block.shape[1]} columns but {len(names)} names"
                )

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def m(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def q(self) -> int:
        return sum(b.shape[1] for b in self.blocks)

    @property
    def column_labels(self) -> List[Tuple[int, str]]:
        """(user, parameter) for every column of dense()."""
        return [(i, name) for i, names in enumerate(self.names) for name in names]

    def dense(self) -> np.ndarray:
        """The mk×q column-stacked Jacobian, zero outside each user's row block."""
        J = np.zeros((self.m * self.k, self.q), dtype=np.complex128)
        col = 0
        for i, block in enumerate(self.blocks):
            J[i * self.m:(i + 1) * self.m, col:col + block.shape[1]] = block
            col += block.shape[1]
        return J

    def row_blocks(self) -> np.ndarray:
        """dense() reshaped to (k, m, q): slice a is J_a."""
        return self.dense().reshape(self.k, self.m, self.q)


@dataclass
class CrbResult:
    """
    Attributes:
        fim: Real symmetric q×q Fisher information
        crb_trace: tr(F^{-1}), lower bound on the summed parameter MSE
        per_parameter: diag(F^{-1}), one bound per column of J
    """
    fim: np.ndarray
    crb_trace: float
    per_parameter: np.ndarray


def select_parameters(J: JacobianMatrix, names: Sequence[str]) -> JacobianMatrix:
    """
    Keep only the named parameter columns of every user.

    Range and velocity columns of one user are both proportional to H_{:,i},
    so a joint FIM over them is singular; per-parameter sweeps select one.

    Example:
        >>> J_range = select_parameters(J, ["range"])
    """
    wanted = tuple(names)
    if not wanted:
        raise InvalidSpecError("select_parameters needs at least one name")
    blocks, kept = [], []
    for block, user_names in zip(J.blocks, J.names):
        missing = [n for n in wanted if n not in user_names]
        if missing:
            raise InvalidSpecError(f"Unknown parameter(s) {missing}; available {list(user_names)}")
        idx = [user_names.index(n) for n in wanted]
        blocks.append(block[:, idx])
        kept.append(wanted)
    return JacobianMatrix(blocks=blocks, names=kept)


# =============================================================================
# FISHER INFORMATION
# =============================================================================

def _check_gram(G: np.ndarray, k: int) -> np.ndarray:
    G = np.asarray(G, dtype=np.complex128)
    if G.shape != (k, k):
        raise InvalidSpecError(f"G must be {k}×{k} to match the Jacobian, got {G.shape}")
    G = 0.5 * (G + G.conj().T)
    try:
        linalg.cholesky(G, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularGramError("Gram matrix is not positive definite", k=k) from exc
    return G


def _check_noise(sigma_n2: float) -> None:
    if not sigma_n2 > 0:
        raise InvalidSpecError(f"sigma_n2 must be positive, got {sigma_n2}")


def fisher_information(J: JacobianMatrix, G: np.ndarray, sigma_n2: float) -> np.ndarray:
    """
    Blockwise FIM (2/sigma_n2) Re{ Σ_{a,b} conj(G_ab) J_a^H J_b }.

    Args:
        J: Channel Jacobian (k user blocks of m rows)
        G: Hermitian positive definite k×k Gram matrix XX^H
        sigma_n2: Noise variance

    Returns:
        Real symmetric q×q matrix

    Raises:
        SingularGramError: if G is not positive definite
    """
    _check_noise(sigma_n2)
    G = _check_gram(G, J.k)
    rows = J.row_blocks()
    # F_qr = Σ_ab conj(G_ab) Σ_j conj(J_ajq) J_bjr
    inner = np.einsum("ab,ajq,bjr->qr", G.conj(), rows.conj(), rows, optimize=True)
    fim = (2.0 / sigma_n2) * np.real(inner)
    return 0.5 * (fim + fim.T)


def dense_fisher_information(J: JacobianMatrix, G: np.ndarray, sigma_n2: float) -> np.ndarray:
    """2 Re{J^H C_h^{-1} J} with C_h^{-1} = (G* ⊗ I_m)/sigma_n2 materialized."""
    _check_noise(sigma_n2)
    G = _check_gram(G, J.k)
    precision = np.kron(G.conj(), np.eye(J.m)) / sigma_n2
    dense = J.dense()
    fim = 2.0 * np.real(dense.conj().T @ precision @ dense)
    return 0.5 * (fim + fim.T)


# =============================================================================
# CRB
# =============================================================================

def crb_trace(
    J: JacobianMatrix,
    G: np.ndarray,
    sigma_n2: float,
    allow_pinv: bool = False,
) -> CrbResult:
    """
    CRB on the summed MSE of all parameters in J.

    F is inverted through its symmetric eigendecomposition. Eigenvalues at or
    below FIM_CUTOFF·l_max mark unidentifiable directions: they raise
    SingularFIMError unless allow_pinv, which drops them (pseudo-inverse).

    Args:
        J: Channel Jacobian
        G: Gram matrix of the active codewords
        sigma_n2: Noise variance
        allow_pinv: Use the pseudo-inverse instead of failing on a singular F

    Returns:
        CrbResult

    Raises:
        SingularFIMError: if F is singular and allow_pinv is False, or F has no
            identifiable direction at all (F = 0)

    Example:
        >>> result = crb_trace(J, n * p_bar * np.eye(k), sigma_n2=1.0)
        >>> result.crb_trace == result.per_parameter.sum()
        True
    """
    fim = fisher_information(J, G, sigma_n2)
    eigenvalues, vectors = linalg.eigh(fim)
    l_max = float(eigenvalues[-1])
    keep = eigenvalues > FIM_CUTOFF * l_max if l_max > 0 else np.zeros_like(eigenvalues, dtype=bool)

    if not np.all(keep):
        if not allow_pinv or not np.any(keep):
            raise SingularFIMError(
                "Fisher information is singular; parameters are not identifiable",
                l_min=float(eigenvalues[0]),
                l_max=l_max,
                q=J.q,
            )
        logger.warning("fim_pseudo_inverse", dropped=int(np.sum(~keep)), q=J.q)

    inv_eig = np.zeros_like(eigenvalues)
    inv_eig[keep] = 1.0 / eigenvalues[keep]
    inverse = (vectors * inv_eig) @ vectors.T
    per_parameter = np.diag(inverse).copy()
    result = CrbResult(fim=fim, crb_trace=float(per_parameter.sum()), per_parameter=per_parameter)
    logger.debug("crb_computed", k=J.k, m=J.m, q=J.q, crb_trace=result.crb_trace)
    return result


# End of Cramér-Rao Bound for Parameter Sensing
