import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twomatrix import ModelSpec, log_weight
from twomatrix.errors import ModelValidationError


class TestLogWeight:
    def test_origin_vanishes(self, gaussian_model):
        assert log_weight(gaussian_model, 0.0, 0.0) == 0.0

    def test_unit_point(self, gaussian_model):
        # -1/2 - 1/2 + 1/2
        assert log_weight(gaussian_model, 1.0, 1.0) == pytest.approx(-0.5)

    def test_quartic_point(self):
        model = ModelSpec((0, 0, 0, 0, 0.25), (0, 0, 1.0, 0, 0.25), 1.0)
        # -1/4 - (4 + 4) + 2
        assert log_weight(model, 1.0, 2.0) == pytest.approx(-6.25)

    def test_broadcasts(self, gaussian_model):
        x = np.linspace(-1, 1, 5)[:, None]
        y = np.linspace(-2, 2, 7)[None, :]
        out = log_weight(gaussian_model, x, y)
        assert out.shape == (5, 7)

    @given(
        a=st.floats(0.1, 2.0),
        b=st.floats(0.1, 2.0),
        x=st.floats(-3, 3),
        y=st.floats(-3, 3),
    )
    @settings(max_examples=50, deadline=None)
    def test_matches_direct_arithmetic(self, a, b, x, y):
        tau = 0.5 * np.sqrt(4 * a * b)  # safely inside integrability
        model = ModelSpec((0.0, 0.0, a), (0.0, 0.0, b), tau)
        direct = -a * x * x - b * y * y + tau * x * y
        assert log_weight(model, x, y) == pytest.approx(direct, abs=1e-12)


class TestValidation:
    def test_odd_degree_rejected(self):
        with pytest.raises(ModelValidationError):
            ModelSpec((0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.5), 0.5)

    def test_negative_leading_rejected(self):
        with pytest.raises(ModelValidationError):
            ModelSpec((0.0, 0.0, -0.5), (0.0, 0.0, 0.5), 0.5)

    def test_zero_tau_rejected(self):
        with pytest.raises(ModelValidationError):
            ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 0.0)

    def test_quadratic_integrability(self):
        # tau**2 >= 4ab diverges: a = b = 1/2 -> need tau**2 < 1
        with pytest.raises(ModelValidationError):
            ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 1.0)
        ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 0.99)

    def test_quartic_any_tau(self):
        ModelSpec((0.0, 0.0, 0.0, 0.0, 0.25), (0.0, 0.0, 0.0, 0.0, 0.25), 5.0)

    def test_trailing_zero_coefficients_trimmed(self):
        model = ModelSpec((0.0, 0.0, 0.5, 0.0, 0.0), (0.0, 0.0, 0.5), 0.5)
        assert model.deg_v == 2


class TestJson:
    def test_round_trip(self, quartic_model):
        again = ModelSpec.from_json(quartic_model.to_json())
        assert again == quartic_model

    def test_keys(self, gaussian_model):
        data = json.loads(gaussian_model.to_json())
        assert set(data) == {"V", "W", "tau"}
        assert data["V"] == [0.0, 0.0, 0.5]

    def test_unknown_key_rejected(self):
        with pytest.raises(ModelValidationError):
            ModelSpec.from_json('{"V": [0,0,0.5], "W": [0,0,0.5], "tau": 0.5, "x": 1}')
