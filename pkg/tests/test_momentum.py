import math
from fractions import Fraction

import pytest

from src.core.errors import DomainError, PreconditionError, StablePolarizationError
from src.momentum.curvature import calabi_norm, sample_profile, scalar_curvature
from src.momentum.minimizer import (
    glue_calabi_minimizer,
    infimum_report,
    junction_identity,
    verify_futaki_identity,
)
from src.momentum.profiles import (
    closed_form_profile,
    positivity_certificate,
    solve_extremal,
    vanishing_orders,
)
from src.toric.bundle import IntervalFunction

BOUNDARY_CLASS = {"smooth": "smooth", "no-sinf": "complete-no-Sinf", "no-szero": "complete-no-S0"}


@pytest.mark.parametrize("mode", ["smooth", "no-sinf", "no-szero"])
@pytest.mark.parametrize("m", [1, 5, 17])
def test_closed_forms_solve_boundary_problem(m, mode):
    """The explicit profiles are the extremal solutions with their boundary data."""
    closed = closed_form_profile(m, mode)
    solved = solve_extremal((0, m), BOUNDARY_CLASS[mode])
    assert closed.polynomial == solved.polynomial
    assert scalar_curvature(closed).is_affine


@pytest.mark.parametrize("mode,last_positive", [("smooth", 18), ("no-sinf", 5), ("no-szero", 5)])
def test_positivity_flips(mode, last_positive):
    """Each family stays positive up to an integer threshold and fails after it."""
    assert positivity_certificate(closed_form_profile(last_positive, mode)).positive
    failing = positivity_certificate(closed_form_profile(last_positive + 1, mode))
    assert not failing.positive
    assert failing.interior_roots > 0


@pytest.mark.parametrize(
    "mode,orders,types",
    [
        ("smooth", (1, 1), ("smooth", "smooth")),
        ("no-sinf", (1, 2), ("smooth", "asymptotically-hyperbolic")),
        ("no-szero", (2, 1), ("asymptotically-hyperbolic", "smooth")),
    ],
)
def test_vanishing_orders(mode, orders, types):
    """End behaviour of φ matches the boundary class."""
    profile = closed_form_profile(3, mode)
    assert vanishing_orders(profile) == orders
    assert positivity_certificate(profile).end_types == types


def test_smooth_profile_at_m1():
    """S = (48τ − 18)/13 and φ(1/2) = 37/78."""
    profile = closed_form_profile(1)
    curve = scalar_curvature(profile)
    assert curve.pieces[0].affine() == (Fraction(48, 13), Fraction(-18, 13))
    assert profile(Fraction(1, 2)) == Fraction(37, 78)
    phi, dphi, _ = profile.derivatives(0)
    assert phi == 0 and dphi == 2
    assert curve.weighted_integral() == 0


def test_calabi_norm_is_exact_for_rational_extremal():
    """A rational affine S gives a rational τ-integral."""
    norm = calabi_norm(closed_form_profile(1))
    assert isinstance(norm.tau_integral, Fraction)
    assert norm.tau_integral > 0


def test_shift_required_for_shifted_mode():
    """The shifted profile needs its left endpoint inside [0, m)."""
    with pytest.raises(DomainError):
        closed_form_profile(5, "no-szero-shifted")
    with pytest.raises(DomainError):
        closed_form_profile(5, "no-szero-shifted", shift=5)
    with pytest.raises(DomainError):
        closed_form_profile(-1)


def test_solve_extremal_validates_interval():
    """b must exceed a."""
    with pytest.raises(DomainError):
        solve_extremal((2, 1), "smooth")
    with pytest.raises(DomainError):
        solve_extremal((0, 1), "complete-sideways")


def test_glued_minimizer_single_junction():
    """For m = 20 the pieces meet C² at √21 − 1."""
    minimizer = glue_calabi_minimizer(20)
    assert minimizer.case == 1
    assert minimizer.plateau is None
    assert abs(float(minimizer.junction) - (math.sqrt(21) - 1)) < 1e-12
    assert minimizer.glued.junction_mismatch() < 1e-9
    assert junction_identity(20).holds


def test_infimum_realised_in_single_junction_case():
    """The Calabi norm of the glued profile meets the Futaki bound for m = 20."""
    report = infimum_report(20)
    assert report.case == 1
    assert report.identity_residual < 1e-8
    assert report.junction_mismatch < 1e-9
    assert report.relative_gap < 1e-6
    assert report.futaki < 0


@pytest.mark.slow
def test_infimum_with_plateau():
    """Beyond k2(k2 + 2) a zero plateau appears and h is refined on it."""
    report = infimum_report(40, refine=32)
    assert report.case == 2
    assert report.relative_gap < 1e-4
    assert report.identity_residual < 1e-8


def test_stable_polarisation_has_nothing_to_glue():
    """m = 10 carries an extremal metric."""
    with pytest.raises(StablePolarizationError):
        glue_calabi_minimizer(10)


def test_futaki_identity_on_smooth_profile():
    """Affine h on a smooth extremal profile satisfies the identity."""
    profile = closed_form_profile(1)
    identity = verify_futaki_identity(profile, IntervalFunction.affine(0, 1, 1, -2))
    assert identity.residual < 1e-12


def test_futaki_identity_rejects_bending():
    """h may only bend where the profile vanishes."""
    with pytest.raises(PreconditionError):
        verify_futaki_identity(closed_form_profile(1), IntervalFunction.hinge(0, 1, Fraction(1, 2)))


def test_sample_profile_includes_junctions():
    """Samples are increasing, start at φ = 0 and contain the junction."""
    minimizer = glue_calabi_minimizer(20)
    rows = sample_profile(minimizer.glued, 5)
    taus = [row[0] for row in rows]
    assert taus == sorted(taus)
    assert len(rows) == 6
    assert rows[0][1] == 0.0
    assert any(abs(t - float(minimizer.junction)) < 1e-12 for t in taus)
    with pytest.raises(DomainError):
        sample_profile(closed_form_profile(1), 1)
