"""Qubit models described by a JSON file instead of code.

File layout::

    {
      "hamiltonian": {"x": [c0, c1, ...],                  # polynomial in t
                      "z": {"times": [...], "values": [...]}},  # or a table
      "channels": [{"pauli": "z", "rate": 0.1},
                   {"pauli": "y", "rate": {"times": [...], "values": [...]}}],
      "rho0": [1, 0, 0, 1]
    }

Tables are interpolated piecewise-linearly.  Drives other than the bare
master equation are synthesized from a numerical eigensystem path sampled at
every half step of the integration grid.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..hs_algebra import PAULI, LindbladSpec, Superop, build_superop, devectorize, pauli_basis
from ..spectral import TimeGrid, spectral_path
from ..tqd import adiabatic_phases
from .base import Variants


def _scalar_fn(spec, what: str):
    if isinstance(spec, (int, float)):
        v = float(spec)
        return lambda t: v
    if isinstance(spec, list):
        coeffs = np.array(spec, dtype=float)[::-1]
        return lambda t: float(np.polyval(coeffs, t))
    if isinstance(spec, dict) and {"times", "values"} <= spec.keys():
        ts = np.asarray(spec["times"], dtype=float)
        vs = np.asarray(spec["values"], dtype=float)
        if ts.size != vs.size or ts.size < 1 or np.any(np.diff(ts) <= 0):
            raise ConfigError(f"{what}: times must be increasing and match values")
        return lambda t: float(np.interp(t, ts, vs))
    raise ConfigError(f"{what}: expected a number, a coefficient list or a times/values table")


def load_model_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"model file {path} does not exist")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file {path} is not valid JSON: {exc}") from exc


def spec_from_dict(data: dict) -> tuple[LindbladSpec, np.ndarray]:
    ham = data.get("hamiltonian", {})
    terms = []
    for label, coef in ham.items():
        if label not in ("x", "y", "z"):
            raise ConfigError(f"unknown Pauli label {label!r} in hamiltonian")
        terms.append((PAULI[label], _scalar_fn(coef, f"hamiltonian.{label}")))

    def H(t):
        out = np.zeros((2, 2), dtype=complex)
        for op, fn in terms:
            out = out + fn(t) * op
        return out

    channels = []
    for k, ch in enumerate(data.get("channels", [])):
        label = ch.get("pauli")
        if label not in ("x", "y", "z"):
            raise ConfigError(f"channel {k}: unknown Pauli label {label!r}")
        channels.append((PAULI[label], _scalar_fn(ch.get("rate", 0.0), f"channels[{k}].rate")))
    rho0 = np.asarray(data.get("rho0", [1, 0, 0, 1]), dtype=complex)
    if rho0.shape != (4,):
        raise ConfigError("rho0 must be a 4-component coherence vector")
    return LindbladSpec(H, channels, dim=2), rho0


def custom_variants(data: dict, grid: TimeGrid, *, populated_tol: float = 1e-10) -> Variants:
    spec, rho0 = spec_from_dict(data)
    basis = pauli_basis()
    L = build_superop(spec, basis, "L_custom")
    fine = grid.refined(2)
    path = spectral_path(L, fine)
    ts = fine.points
    Lmats = np.array([L(t) for t in ts])
    Ed = path.rights_dot
    G = np.einsum("jab,jba->ja", path.lefts, Ed)
    cd = np.einsum("jda,jae->jde", Ed, path.lefts) - np.einsum("jda,ja,jae->jde", path.rights, G, path.lefts)

    weights = np.abs(path.lefts[0] @ rho0)
    lam = path.eigenvalues - G
    theta = np.where(weights[None, :] > populated_tol, lam, -G)
    gen = np.einsum("jda,jae->jde", Ed, path.lefts) + np.einsum("jda,ja,jae->jde", path.rights, theta, path.lefts)

    ph = adiabatic_phases(path)
    coeff = path.lefts[0] @ rho0
    ad_vecs = np.einsum("jda,ja->jd", path.rights, np.exp(ph) * coeff)
    ad_vecs[:, 0] = 1.0

    def adiabatic_vector(t):
        return np.array([np.interp(t, ts, ad_vecs[:, k].real) for k in range(4)], dtype=complex)

    return Variants(
        name="custom",
        basis=basis,
        rho0=rho0,
        tau=grid.t1 - grid.t0,
        L_adiabatic=L,
        L_standard_tqd=Superop.from_samples(ts, Lmats + cd, "L_Stqd_custom"),
        L_generalized=Superop.from_samples(ts, gen, "L_Gtqd_custom"),
        target_state=devectorize(ad_vecs[-1], basis, trace_tol=1e-6),
        adiabatic_solution=lambda t: devectorize(adiabatic_vector(t), basis, trace_tol=1e-6),
        adiabatic_vector=adiabatic_vector,
        frame=None,
    )
