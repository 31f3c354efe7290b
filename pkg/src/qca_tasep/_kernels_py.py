"""Pure-numpy fallback for the channel application kernel."""

import numpy as np

COMPILED = False


def apply_superop(
    data: np.ndarray,
    sup: np.ndarray,
    dim_left: int,
    phys: int,
    dim_right: int,
) -> np.ndarray:
    """Apply a local superoperator in place to a vectorized density matrix.

    data is the row-major vectorization of a density matrix over a
    dim_left x phys x dim_right tensor factorization (length the square of the
    product).  sup is (phys**2, phys**2) with row and column index
    ket*phys + bra.  data is modified in place and returned.
    """
    d = dim_left * phys * dim_right
    if data.shape != (d * d,):
        raise ValueError(
            f"data has length {data.shape}, expected ({d * d},) for the given "
            f"dimensions"
        )
    t = data.reshape(dim_left, phys, dim_right, dim_left, phys, dim_right)
    panel = np.moveaxis(t, (1, 4), (0, 1)).reshape(phys * phys, -1)
    out = np.asarray(sup) @ panel
    out = out.reshape(phys, phys, dim_left, dim_right, dim_left, dim_right)
    np.copyto(t, np.moveaxis(out, (0, 1), (1, 4)))
    return data
