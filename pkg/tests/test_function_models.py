#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Unit Tests for the Function Models
"""

import math
import os
import sys
import unittest

import numpy as np

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from calculus_errors import EvalError, OrderExceededError
from funcmodel_engine.src.function_models import (
    Cos,
    Custom,
    Exp,
    Interval,
    InvQuad,
    Polynomial,
    Sin,
    SqrtEps,
    eval_deriv,
    parse_function_spec,
    product_model,
    sup_norm_estimate,
)


class TestBuiltinDerivatives(unittest.TestCase):
    """Closed-form derivatives of the built-in families"""

    def setUp(self):
        self.x = np.linspace(-3.0, 3.0, 13)

    def test_exp(self):
        f = Exp(0.5)
        np.testing.assert_allclose(f.eval_deriv(3, self.x), 0.125 * np.exp(0.5 * self.x), rtol=1e-14)

    def test_sin_and_cos_cycle(self):
        np.testing.assert_allclose(Sin(2.0).eval_deriv(1, self.x), 2.0 * np.cos(2.0 * self.x), atol=1e-14)
        np.testing.assert_allclose(Sin(1.0).eval_deriv(4, self.x), np.sin(self.x), atol=1e-14)
        np.testing.assert_allclose(Cos(1.0).eval_deriv(2, self.x), -np.cos(self.x), atol=1e-14)

    def test_invquad(self):
        f = InvQuad()
        np.testing.assert_allclose(f.eval_deriv(0, self.x), 1.0 / (1.0 + self.x ** 2), rtol=1e-14)
        np.testing.assert_allclose(f.eval_deriv(1, self.x), -2.0 * self.x / (1.0 + self.x ** 2) ** 2,
                                   rtol=1e-13, atol=1e-15)

    def test_sqrteps(self):
        f = SqrtEps(0.25)
        u = self.x ** 2 + 0.25
        np.testing.assert_allclose(f.eval_deriv(1, self.x), self.x / np.sqrt(u), rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(f.eval_deriv(2, self.x), 0.25 / u ** 1.5, rtol=1e-13)

    def test_polynomial(self):
        f = Polynomial([2.0, 0.0, -1.0, 3.0])
        self.assertEqual(f.degree, 3)
        self.assertEqual(f.eval_deriv(3, 0.7), 12.0)
        self.assertEqual(f.eval_deriv(5, 0.7), 0.0)
        self.assertEqual(Polynomial([0.0, 0.0, 1.0]).degree, 0)

    def test_scalar_input_gives_scalar(self):
        self.assertIsInstance(Exp().eval_deriv(0, 0.0), float)
        self.assertEqual(eval_deriv(Exp(), 2, 0.0), 1.0)

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(7)
        points = rng.uniform(-3.0, 3.0, size=50)
        h = 1e-5
        for f in (Exp(1.0), Sin(1.0), Cos(1.0), InvQuad(), SqrtEps(1.0), Polynomial([1, -2, 0, 1, 4, 1])):
            for k in range(1, 5):
                fd = (f.eval_deriv(k - 1, points + h) - f.eval_deriv(k - 1, points - h)) / (2.0 * h)
                exact = f.eval_deriv(k, points)
                np.testing.assert_array_less(np.abs(fd - exact), 1e-6 * (1.0 + np.abs(exact)),
                                             err_msg=f"{f} order {k}")


class TestModelErrors(unittest.TestCase):

    def test_order_exceeded(self):
        with self.assertRaises(OrderExceededError) as context:
            Exp(1.0, max_order=2).eval_deriv(3, 0.0)
        self.assertEqual(context.exception.max_order, 2)

    def test_non_finite_value(self):
        f = Custom([lambda x: 1.0 / x])
        with self.assertRaises(EvalError):
            f.eval_deriv(0, 0.0)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            SqrtEps(0.0)
        with self.assertRaises(ValueError):
            Exp(float('inf'))


class TestCustomAndProduct(unittest.TestCase):

    def test_custom_max_order(self):
        f = Custom([np.sin, np.cos], name='sine')
        self.assertEqual(f.max_order, 1)
        self.assertEqual(str(f), 'sine')
        with self.assertRaises(OrderExceededError):
            f.eval_deriv(2, 0.0)

    def test_product_leibniz(self):
        fg = product_model(Exp(1.0), Sin(1.0))
        x = np.array([-1.0, 0.0, 0.5, 2.0])
        np.testing.assert_allclose(fg.eval_deriv(1, x), np.exp(x) * (np.sin(x) + np.cos(x)), rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(fg.eval_deriv(2, x), 2.0 * np.exp(x) * np.cos(x), rtol=1e-13, atol=1e-15)


class TestSupNormEstimate(unittest.TestCase):

    def test_sin_on_wide_interval(self):
        estimate = sup_norm_estimate(Sin(1.0), 0, Interval(-2.0, 2.0))
        self.assertGreaterEqual(estimate, 1.0)
        self.assertLessEqual(estimate, 1.01)

    def test_invquad_matches_dense_scan(self):
        grid = np.linspace(-5.0, 5.0, 1_000_001)
        dense = float(np.max(np.abs(2.0 * grid / (1.0 + grid ** 2) ** 2)))
        estimate = sup_norm_estimate(InvQuad(), 1, Interval(-5.0, 5.0))
        self.assertLessEqual(abs(estimate - dense), 1.1e-2 * dense)

    def test_interval_hull(self):
        interval = Interval.hull([0.5, -1.0, 2.0], pad=0.5)
        self.assertEqual((interval.lo, interval.hi), (-1.5, 2.5))
        self.assertEqual(interval.width, 4.0)
        with self.assertRaises(ValueError):
            Interval(1.0, 0.0)


class TestFunctionSpec(unittest.TestCase):

    def test_parse_polynomial(self):
        spec = parse_function_spec('poly:1,0,0')
        model = spec.build()
        self.assertIsInstance(model, Polynomial)
        self.assertEqual(model.degree, 2)
        self.assertEqual(spec.label(), 'poly:1,0,0')

    def test_parse_defaults(self):
        self.assertEqual(parse_function_spec('exp').build().scale, 1.0)
        self.assertIsInstance(parse_function_spec('invquad').build(), InvQuad)
        self.assertEqual(parse_function_spec('SQRTEPS:0.5').build().eps, 0.5)

    def test_rejects_bad_specs(self):
        for text in ('bogus:1', 'exp:1,2', 'invquad:1', 'sqrteps:-1', 'poly', 'sin:x'):
            with self.assertRaises(ValueError, msg=text):
                parse_function_spec(text)

    def test_exact_sup_of_exp(self):
        estimate = sup_norm_estimate(Exp(1.0), 2, Interval(0.0, 1.0))
        self.assertAlmostEqual(estimate, 1.01 * math.e, places=12)


if __name__ == '__main__':
    unittest.main()
