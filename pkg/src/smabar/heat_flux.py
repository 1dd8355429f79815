"""Stand-alone heat-flux constitutive laws.

Three flux models on a 1D gradient:

* Fourier:            q = -k grad(theta)
* flux relaxation:    tau0 dq/dt = -q - k grad(theta)   (finite-speed heat)
* generalised form:   q = -k grad(theta) - alpha d(k grad theta)/dt

The relaxation ODE is integrated exactly over a step for a piecewise
constant gradient, so unit tests against the closed-form exponential are
exact.  In the limit tau0 -> 0 the relaxed flux recovers the Fourier law.

Sign note: the first-order expansion of the relaxation-law solution is
q = -k grad(theta) + tau0 d(k grad theta)/dt + O(tau0^2), so the
generalised form reproduces it when its coefficient is taken as -tau0;
with a positive alpha the correction term enters with the opposite sign.
The function accepts either sign and documents alpha >= 0 as the intended
range of the model it implements.
"""

from __future__ import annotations

import math

__all__ = ["fourier_flux", "cattaneo_step", "generalized_flux"]


def fourier_flux(k: float, grad_theta: float) -> float:
    """Classical Fourier law q = -k grad(theta); requires k > 0."""
    if k <= 0:
        raise ValueError("conductivity k must be positive")
    return -k * grad_theta


def cattaneo_step(q: float, grad_theta: float, k: float, tau0: float,
                  dt: float) -> float:
    """Advance the flux relaxation ODE tau0 dq/dt = -q - k grad(theta).

    Exact exponential update for a gradient held constant over the step:

        q(t+dt) = q e^(-dt/tau0) + (-k grad_theta) (1 - e^(-dt/tau0))

    Raises for tau0 <= 0 (use fourier_flux instead) and dt <= 0.
    """
    if tau0 <= 0:
        raise ValueError("tau0 must be positive; use fourier_flux for tau0 = 0")
    if dt <= 0:
        raise ValueError("dt must be positive")
    decay = math.exp(-dt / tau0)
    return q * decay + fourier_flux(k, grad_theta) * (1.0 - decay)


def generalized_flux(k: float, grad_theta: float,
                     d_dt_of_k_grad_theta: float, alpha: float) -> float:
    """Generalised flux q = -k grad(theta) - alpha d(k grad theta)/dt.

    alpha = 0 reduces to the Fourier law; for a static field the rate term
    vanishes regardless of alpha.
    """
    return -k * grad_theta - alpha * d_dt_of_k_grad_theta
