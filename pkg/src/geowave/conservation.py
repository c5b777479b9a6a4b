"""Noether conditions, fluxes, on-shell divergences and multipliers."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .geometry import equal_up_to_unit
from .jet import Pde, euler_operator, total_derivative
from .kernel import atoms as A
from .kernel.expr import ZERO_EXPR, Expr, KernelError, coefficients, diff, esum
from .oracle import DEFAULT_DIGITS, DEFAULT_TRIALS, Verdict, confirm_nonzero
from .symmetry import VectorField, noether_residual

__all__ = [
    "ConservationError",
    "ConservedVector",
    "Multiplier",
    "noether_condition",
    "noether_flux",
    "divergence_on_shell",
    "multiplier_check",
    "pair_check",
    "compare_density",
]


class ConservationError(KernelError):
    def __init__(self, msg: str, residual: Expr | None = None):
        super().__init__(msg)
        self.residual = residual


@dataclass
class ConservedVector:
    """Flux components keyed by coordinate; absent keys are unknown."""

    components: dict
    coords: tuple = ()
    name: str = ""

    def __post_init__(self):
        if not self.coords:
            self.coords = tuple(self.components)
        self.coords = tuple(self.coords)

    def complete(self) -> bool:
        return all(c in self.components for c in self.coords)

    def divergence(self) -> Expr:
        return esum(total_derivative(v, c) for c, v in self.components.items())

    def order(self) -> int:
        return max((v.order() for v in self.components.values()), default=0)


@dataclass
class Multiplier:
    q: Expr
    name: str = ""
    detail: dict = dc_field(default_factory=dict)


def _witness(v: Verdict, residual: Expr, trials, digits, seed) -> Verdict:
    c = confirm_nonzero(residual, trials, digits, seed)
    v.witness = c.witness
    v.confirmed = c.holds
    v.method = "symbolic+numeric"
    return v


def noether_condition(X: VectorField, L: Expr, gauge: dict | None = None,
                      trials: int = DEFAULT_TRIALS, digits: int = DEFAULT_DIGITS,
                      seed: int = 0) -> Verdict:
    """pr X(L) + L Div(xi) = Div(f).

    With ``gauge`` given the residual must vanish exactly; without it the
    residual must be a total divergence, tested by the Euler operator.
    """
    R = noether_residual(X, L, gauge)
    if gauge is not None:
        v = Verdict(R.is_zero(), R, "symbolic", name=X.name, detail={"test": "exact"})
        target = R
    else:
        E = euler_operator(R, X.field)
        v = Verdict(E.is_zero(), E, "symbolic", name=X.name,
                    detail={"test": "euler", "strict": R.is_zero()})
        target = E
    if not v.holds:
        _witness(v, target, trials, digits, seed)
    return v


def noether_flux(X: VectorField, L: Expr, gauge: dict | None = None) -> ConservedVector:
    """Phi^i = xi^i L + W dL/du_i - f_i with W = phi - xi^j u_j."""
    R = noether_residual(X, L, gauge)
    if not R.is_zero():
        raise ConservationError("Noether condition fails with this gauge", R)
    W = X.characteristic()
    comps = {}
    for c in X.coords:
        dL = diff(L, A.jet(X.field, (c,)))
        v = X.xi[c] * L + W * dL
        if gauge and c in gauge:
            v = v - gauge[c]
        comps[c] = v
    return ConservedVector(comps, X.coords, X.name)


def divergence_on_shell(phi: ConservedVector, pde: Pde, trials: int = DEFAULT_TRIALS,
                        digits: int = DEFAULT_DIGITS, seed: int = 0) -> Verdict:
    """Sum D_i Phi^i reduced modulo Delta = 0 and its consequences."""
    if not phi.complete():
        missing = [c for c in phi.coords if c not in phi.components]
        return Verdict(False, None, "none", name=phi.name,
                       detail={"status": "partial", "missing": missing})
    res = pde.reduce(phi.divergence())
    v = Verdict(res.is_zero(), res, "symbolic", name=phi.name)
    if not v.holds:
        _witness(v, res, trials, digits, seed)
    return v


def multiplier_check(q: Multiplier | Expr, pde: Pde, trials: int = DEFAULT_TRIALS,
                     digits: int = DEFAULT_DIGITS, seed: int = 0) -> Verdict:
    """E_u[Q Delta] == 0 identically in the jet variables."""
    qe = q.q if isinstance(q, Multiplier) else q
    name = q.name if isinstance(q, Multiplier) else ""
    E = euler_operator(qe * pde.delta, pde.field)
    v = Verdict(E.is_zero(), E, "symbolic", name=name)
    if not v.holds:
        _witness(v, E, trials, digits, seed)
    return v


def pair_check(q: Multiplier | Expr, phi: ConservedVector, pde: Pde,
               trials: int = DEFAULT_TRIALS, digits: int = DEFAULT_DIGITS,
               seed: int = 0) -> Verdict:
    """Sum D_i Phi^i - Q Delta == 0 identically."""
    qe = q.q if isinstance(q, Multiplier) else q
    if not phi.complete():
        missing = [c for c in phi.coords if c not in phi.components]
        return Verdict(False, None, "none", name=phi.name,
                       detail={"status": "partial: density-only record", "missing": missing})
    res = phi.divergence() - qe * pde.delta
    v = Verdict(res.is_zero(), res, "symbolic", name=phi.name)
    if not v.holds:
        _witness(v, res, trials, digits, seed)
    return v


def compare_density(computed: Expr, printed: Expr, pde: Pde | None = None,
                    trials: int = DEFAULT_TRIALS, digits: int = DEFAULT_DIGITS,
                    seed: int = 0) -> Verdict:
    """printed = lam*computed + T with lam a nonzero constant and T = 0 on shell."""
    v = equal_up_to_unit(printed, computed)
    unit = v.detail.get("unit")
    if v.holds and unit is not None and unit.is_constant():
        return Verdict(True, ZERO_EXPR, "symbolic", detail={"unit": unit, "trivial": False})
    for lam in _candidate_units(computed, printed):
        diff_ = printed - lam * computed
        if pde is not None:
            diff_ = pde.reduce(diff_)
        if diff_.is_zero():
            return Verdict(True, ZERO_EXPR, "symbolic", detail={"unit": lam, "trivial": True})
    lam = next(iter(_candidate_units(computed, printed)), Expr.const(1))
    res = printed - lam * computed
    if pde is not None:
        res = pde.reduce(res)
    out = Verdict(False, res, "symbolic", detail={"unit": lam, "reason": v.detail.get("reason")})
    return _witness(out, res, trials, digits, seed)


def _candidate_units(a: Expr, b: Expr) -> list:
    """Constant ratios b/a over shared jet monomials, most frequent first."""
    sel = lambda x: x.kind == A.JET  # noqa: E731
    try:
        ca = coefficients(a, sel)
        cb = coefficients(b, sel)
    except KernelError:
        return []
    counts: dict = {}
    for m in sorted(set(ca) & set(cb), key=str):
        r = cb[m] / ca[m]
        if r.is_constant() and not r.is_zero():
            counts[r] = counts.get(r, 0) + 1
    return [r for r, _ in sorted(counts.items(), key=lambda kv: -kv[1])]
