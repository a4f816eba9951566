"""
Jost-function oracle for piecewise-constant wells.

Resonances of -d^2/dx^2 + V with V constant on layers of [-b, b] are the
zeros of F(E) = psi'(b) - i k psi(b), where psi starts outgoing at x = -b
(psi = e^{ikb}, psi' = -ik e^{ikb}) and k = sqrt(E) on the principal
branch. Inside a layer the transfer matrix only involves cos(qd),
sin(qd)/q and q sin(qd), which are even in q = sqrt(E - V), so no branch
choice enters there.
"""

import cmath
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import newton

from .errors import ParameterError, SolverError

Layer = Tuple[float, float]


def layers_from_steps(radius: float, values: Sequence[float]) -> List[Layer]:
    """(width, value) from -b to b for the symmetric step profile."""
    values = [float(v) for v in values]
    if not radius > 0 or not values:
        raise ParameterError("step well needs a positive radius and at least one value")
    width = radius / len(values)
    inner_to_outer = [(width, v) for v in values]
    return list(reversed(inner_to_outer)) + inner_to_outer


def _transfer(E: complex, width: float, value: float) -> np.ndarray:
    q = cmath.sqrt(E - value)
    qd = q * width
    c = cmath.cos(qd)
    s_over_q = width if q == 0 else cmath.sin(qd) / q
    return np.array([[c, s_over_q], [-q * q * s_over_q, c]], dtype=complex)


def jost_function(E: complex, layers: Sequence[Layer]) -> complex:
    E = complex(E)
    b = 0.5 * sum(w for w, _ in layers)
    k = cmath.sqrt(E)
    state = np.array([cmath.exp(1j * k * b), -1j * k * cmath.exp(1j * k * b)])
    for width, value in layers:
        state = _transfer(E, width, value) @ state
    return complex(state[1] - 1j * k * state[0])


def jost_resonance(layers: Sequence[Layer], guess: complex, tol: float = 1e-13,
                   maxiter: int = 200) -> complex:
    """Zero of the Jost function nearest the guess (secant iteration)."""
    try:
        root = newton(lambda E: jost_function(E, layers), complex(guess),
                      tol=tol, maxiter=maxiter)
    except RuntimeError as e:
        raise SolverError(f"Jost root search from {guess:.8g} failed: {e}")
    return complex(root)
