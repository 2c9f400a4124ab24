"""Real embedding of kets and operators.

A ket of dimension ``n`` maps to a real vector of length ``2n`` laid out as
``[Re(psi); Im(psi)]``. Operators map to ``2n x 2n`` real block matrices so
that complex matrix-vector products become real ones. Nothing downstream of
this module touches complex arithmetic.
"""

import numpy as np

HERMITIAN_TOL = 1e-12


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def embed_state(ket):
    """Map a complex ket to its stacked real representation."""
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    return np.concatenate([ket.real, ket.imag])


def extract_state(x):
    """Inverse of :func:`embed_state`."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size % 2:
        raise DimensionError(f"real state must have even length, got {x.size}")
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def _square(Y):
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {Y.shape}")
    return Y


def embed_observable(Y):
    """Block form ``[[Re Y, -Im Y], [Im Y, Re Y]]`` of a complex operator.

    For Hermitian ``Y`` the result is symmetric and ``x @ Yr @ x`` equals the
    expectation value of ``Y`` in the state ``x`` represents.
    """
    Y = _square(Y)
    return np.block([[Y.real, -Y.imag], [Y.imag, Y.real]])


def is_hermitian(H, tol=HERMITIAN_TOL):
    H = _square(H)
    return bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= tol)


def embed_generator(H):
    """Real generator of the Schrodinger flow, i.e. the embedding of ``-iH``.

    The result is skew-symmetric whenever ``H`` is Hermitian.
    """
    H = _square(H)
    if not is_hermitian(H):
        raise NotHermitianError("Hamiltonian is not Hermitian within 1e-12")
    # drop the sub-tolerance anti-Hermitian part so the result is exactly skew
    H = 0.5 * (H + H.conj().T)
    return embed_observable(-1j * H)
