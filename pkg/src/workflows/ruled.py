from fractions import Fraction
from typing import Any, Dict, List, Tuple

import structlog

from ..core.artifacts import write_csv
from ..core.errors import ArityError, InternalConsistencyError
from ..core.exact import exact_value, parse_rational
from ..core.workflow import BaseWorkflow, WorkflowConfig
from ..futaki.ruled import (
    Mode,
    admissible_k,
    futaki_polynomial,
    mode_setup,
    ruled_asymptotics,
    ruled_bruteforce_tables,
    ruled_futaki_report,
)
from ..futaki.thresholds import WHOLE_QUARTIC, instability_thresholds, instability_window
from ..momentum.curvature import CONVENTION_NOTES, calabi_norm, sample_profile, scalar_curvature
from ..momentum.minimizer import glue_calabi_minimizer, infimum_report, junction_identity
from ..momentum.profiles import closed_form_profile, positivity_certificate, solve_extremal, vanishing_orders

logger = structlog.get_logger()

def bruteforce_agreement(task: Tuple[Fraction, Fraction, Mode, Tuple[int, ...]]) -> Dict[str, Any]:
    """Fit the brute-force tables and compare with the closed-form coefficients."""
    m, c, mode, ks = task
    divisor, pair = mode_setup(mode)
    tables = ruled_bruteforce_tables(m, c, ks, divisor, pair)
    fitted = tables.fitted()
    closed = ruled_asymptotics(m, c, divisor, pair)
    if [w.model_dump() for w in fitted] != [w.model_dump() for w in closed]:
        raise InternalConsistencyError("brute-force tables disagree with the closed forms", {"m": m, "c": c, "mode": mode})
    return {"mode": mode, "k_values": list(ks), "matches": True}


class RuledWorkflow(BaseWorkflow):
    """Futaki invariants, thresholds and momentum profiles of the ruled surface."""

    command = "ruled"
    actions = ("futaki", "thresholds", "extremal", "calabi-inf", "sample")

    def __init__(self, config: WorkflowConfig, processor=None):
        super().__init__(config, processor)
        self._logger = logger.bind(workflow="ruled")

    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        handler = {
            "futaki": self._futaki,
            "thresholds": self._thresholds,
            "extremal": self._extremal,
            "calabi-inf": self._calabi_inf,
            "sample": self._sample,
        }[data["action"]]
        return handler(data)

    def _futaki(self, data: Dict[str, Any]) -> Dict[str, Any]:
        m, c = parse_rational(data["m"]), parse_rational(data["c"])
        mode: Mode = data.get("mode", "whole")
        with self.phase("closed_form"):
            report = ruled_futaki_report(m, c, mode)
            poly = futaki_polynomial(m, mode)
        self.destabilized = report.relative_futaki < 0 or poly.degenerate_at_zero
        out: Dict[str, Any] = {
            "futaki": exact_value(report.futaki),
            "relative_futaki": exact_value(report.relative_futaki),
            "asymptotic_relative_futaki": exact_value(report.asymptotic_relative_futaki),
            "normalisation": exact_value(report.normalisation),
            "inner": exact_value(report.inner),
            "alpha_norm_squared": exact_value(report.alpha_norm_squared),
            "beta_norm_squared": exact_value(report.beta_norm_squared),
            "nondegenerate": report.nondegenerate,
            "second_order_positive": report.second_order_positive,
            "polynomial": [str(a) for a in poly.polynomial.coefficients],
            "vanishing_order": poly.vanishing_order,
        }
        kmax = data.get("bruteforce_check")
        if kmax:
            ks = tuple(k for k in admissible_k(m, c, int(kmax)) if k <= int(kmax))
            if len(ks) < 5:
                raise ArityError("brute-force check needs five admissible k up to kmax", {"kmax": kmax, "found": len(ks)})
            with self.phase("bruteforce"):
                out["bruteforce"] = self.map(bruteforce_agreement, [(m, c, mode, ks)])[0]
        if mode == "whole":
            self.notes.append("relative_futaki is the displayed whole-surface value, normalisation times the asymptotic one")
        return out

    def _thresholds(self, data: Dict[str, Any]) -> Dict[str, Any]:
        precision = data.get("precision", "1/1000")
        with self.phase("sturm"):
            thresholds = instability_thresholds(precision)
        out: Dict[str, Any] = {
            "precision": exact_value(thresholds.precision),
            "k1": {
                "interval": [str(thresholds.k1.lo), str(thresholds.k1.hi)],
                "value": thresholds.k1.value,
                "positive_roots": thresholds.k1.positive_roots,
            },
            "k2": {
                "interval": [str(thresholds.k2.lo), str(thresholds.k2.hi)],
                "value": thresholds.k2.value,
                "positive_roots": thresholds.k2.positive_roots,
            },
        }
        if data.get("m") is not None:
            m = parse_rational(data["m"])
            with self.phase("window"):
                windows = instability_window(m, data.get("mode", "whole"), precision)
            out["windows"] = [
                {
                    "left": [str(w.left.lo), str(w.left.hi)],
                    "right": [str(w.right.lo), str(w.right.hi)],
                    "sample": exact_value(w.sample),
                    "value": exact_value(w.value),
                }
                for w in windows
            ]
            self.destabilized = bool(windows)
        return out

    def _extremal(self, data: Dict[str, Any]) -> Dict[str, Any]:
        m = parse_rational(data["m"])
        kind = data.get("type", "smooth")
        shift = data.get("shift")
        with self.phase("profile"):
            if shift is not None:
                profile = closed_form_profile(m, "no-szero-shifted", shift=parse_rational(shift))
            else:
                profile = closed_form_profile(m, kind)
            solved = solve_extremal((profile.lo, profile.hi), profile.boundary_class)
        with self.phase("certificate"):
            certificate = positivity_certificate(profile)
            curve = scalar_curvature(profile)
            norm = calabi_norm(profile)
        slope, intercept = curve.pieces[0].affine() or (None, None)
        return {
            "interval": [exact_value(profile.lo), exact_value(profile.hi)],
            "boundary_class": profile.boundary_class,
            "numerator": [str(a) for a in profile.numerator],
            "matches_ode_solution": solved.polynomial == profile.polynomial,
            "positive": certificate.positive,
            "interior_roots": certificate.interior_roots,
            "vanishing_orders": list(vanishing_orders(profile)),
            "end_types": list(certificate.end_types),
            "bracket": certificate.bracket,
            "scalar_curvature": {"slope": exact_value(slope), "intercept": exact_value(intercept)},
            "average_scalar": exact_value(curve.average),
            "calabi_tau_integral": exact_value(norm.tau_integral),
        }

    def _calabi_inf(self, data: Dict[str, Any]) -> Dict[str, Any]:
        m = parse_rational(data["m"])
        refine = data.get("refine")
        with self.phase("infimum"):
            report = infimum_report(m, int(refine) if refine is not None else None)
        out: Dict[str, Any] = {
            "case": report.case,
            "junction": report.junction,
            "calabi_tau_integral": exact_value(report.calabi.tau_integral),
            "calabi_full_norm_squared": exact_value(report.calabi.full_norm_squared),
            "calabi_value": report.calabi_value,
            "futaki_h": exact_value(report.futaki),
            "h_norm_squared": exact_value(report.h_norm_squared),
            "futaki_bound": report.futaki_bound,
            "lower_bound_squared": report.lower_bound_squared,
            "relative_gap": report.relative_gap,
            "identity_residual": report.identity_residual,
            "junction_mismatch": report.junction_mismatch,
            "h_convex": report.h_convex,
        }
        if report.case == 1:
            identity = junction_identity(m)
            out["junction_identity"] = {"junction": str(identity.junction), "holds": identity.holds}
        self.notes.extend(report.calabi.notes)
        return out

    def _sample(self, data: Dict[str, Any]) -> Dict[str, Any]:
        m = parse_rational(data["m"])
        n = int(data["n"])
        kind = data.get("type")
        with self.phase("profile"):
            if kind is None:
                kind = "glued" if WHOLE_QUARTIC(m) > 0 else "smooth"
            profile = glue_calabi_minimizer(m).glued if kind == "glued" else closed_form_profile(m, kind)
            rows: List[Tuple[float, float, float]] = sample_profile(profile, n)
        out: Dict[str, Any] = {"type": kind, "rows": len(rows)}
        path = data.get("out")
        if path:
            with self.phase("write"):
                write_csv(path, ("tau", "phi", "S"), rows)
            out["file"] = path
        else:
            out["samples"] = [list(r) for r in rows]
        if kind == "glued":
            self.notes.extend(CONVENTION_NOTES)
        return out
