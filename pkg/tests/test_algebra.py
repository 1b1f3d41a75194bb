import math

import numpy as np
import pytest

from diffscale.algebra import (
    AlgebraicNumber,
    PrimitivityError,
    QuadraticOrder,
    char_poly,
    fibonacci,
    golden_order,
    is_primitive,
    lyapunov_spectrum,
    metallic_order,
    spectral_data,
    star,
)

TAU = (1.0 + math.sqrt(5.0)) / 2.0

FIB_M = [[1, 1], [1, 0]]
PD_M = [[1, 2], [1, 0]]
KOLA_M = [[1, 1, 0], [1, 1, 1], [1, 0, 0]]  # a->abc, b->ab, c->b, counts per image


def golden(a=0, b=0):
    return AlgebraicNumber(golden_order(), a, b)


class TestStar:
    def test_tau_conjugate(self):
        t = star(golden(0, 1))
        assert (t.a, t.b) == (1, -1)

    def test_rational_fixed(self):
        one = golden(1, 0)
        assert star(one) == one

    def test_coefficient_formula(self):
        # (m + n tau)* = m + n - n tau
        x = star(golden(2, 3))
        assert (x.a, x.b) == (5, -3)

    def test_against_root_swap(self):
        # brute-force oracle: evaluate at the two real roots of x^2 - x - 1
        r1 = (1 + math.sqrt(5)) / 2
        r2 = (1 - math.sqrt(5)) / 2
        x = golden(2, 3)
        assert float(star(x)) == pytest.approx(2 + 3 * r2, abs=1e-12)
        assert float(x) == pytest.approx(2 + 3 * r1, abs=1e-12)

    def test_involution_and_homomorphism(self):
        rng = np.random.default_rng(1)
        coeffs = rng.integers(-50, 50, size=(2000, 4))
        for ax, bx, ay, by in coeffs.tolist():
            x, y = golden(ax, bx), golden(ay, by)
            assert star(star(x)) == x
            assert star(x * y) == star(x) * star(y)
            assert star(x + y) == star(x) + star(y)


class TestFibonacci:
    def test_base_cases(self):
        assert fibonacci(0) == 0
        assert fibonacci(1) == 1

    def test_ten(self):
        assert fibonacci(10) == 55

    def test_negative_extension(self):
        assert fibonacci(-1) == 1
        # f_{-n} = (-1)^{n+1} f_n
        for n in range(1, 12):
            assert fibonacci(-n) == (-1) ** (n + 1) * fibonacci(n)

    def test_recursion(self):
        for n in range(-20, 40):
            assert fibonacci(n + 1) == fibonacci(n) + fibonacci(n - 1)

    def test_closed_form(self):
        for n in range(41):
            closed = (TAU**n - (-1 / TAU) ** n) / math.sqrt(5)
            assert abs(fibonacci(n) - closed) < 1e-6

    def test_rejects_non_integer(self):
        with pytest.raises(TypeError):
            fibonacci(2.5)


class TestSpectralData:
    def test_fibonacci_matrix(self):
        sd = spectral_data(FIB_M)
        assert sd.pf_value == pytest.approx(TAU, abs=1e-14)
        assert sorted(sd.moduli) == pytest.approx([1 / TAU, TAU], abs=1e-13)
        assert sd.det == -1

    def test_period_doubling_matrix(self):
        sd = spectral_data(PD_M)
        assert sd.pf_value == pytest.approx(2.0, abs=1e-13)
        assert sorted(sd.moduli) == pytest.approx([1.0, 2.0], abs=1e-13)
        assert sd.det == -2

    def test_kolakoski_cubic(self):
        # PF value is the real root of x^3 - 2x^2 - 1
        sd = spectral_data(KOLA_M)
        lam = sd.pf_value
        assert lam**3 - 2 * lam**2 - 1 == pytest.approx(0.0, abs=1e-12)
        assert lam == pytest.approx(2.205569430400590, abs=1e-12)
        # complex pair modulus from |mu|^2 = |det|/lam
        small = sorted(sd.moduli)[0]
        assert small**2 == pytest.approx(1 / lam, abs=1e-12)

    def test_eigenvector_residuals(self):
        for m in (FIB_M, PD_M, KOLA_M):
            sd = spectral_data(m)
            a = np.array(m, dtype=float)
            assert np.linalg.norm(a @ sd.right - sd.pf_value * sd.right) < 1e-12
            assert np.linalg.norm(sd.left @ a - sd.pf_value * sd.left) < 1e-12
            assert np.all(sd.right > 0) and np.all(sd.left > 0)

    def test_pf_normalisation(self):
        # right vector sums to 1 (frequencies); left vector min entry is 1 (lengths)
        sd = spectral_data(FIB_M)
        assert sum(sd.right) == pytest.approx(1.0, abs=1e-14)
        assert min(sd.left) == pytest.approx(1.0, abs=1e-14)

    def test_det_eigenvalue_product(self):
        plastic = [[0, 1, 1], [1, 0, 0], [0, 1, 0]]
        for m in (KOLA_M, plastic):
            sd = spectral_data(m)
            prod = 1.0
            for mod in sd.moduli:
                prod *= mod
            assert prod == pytest.approx(abs(sd.det), rel=1e-12)

    def test_non_primitive_rejected(self):
        with pytest.raises(PrimitivityError):
            spectral_data([[2, 0], [0, 3]])


class TestLyapunovSpectrum:
    def test_fibonacci(self):
        spec = lyapunov_spectrum(FIB_M)
        assert spec == pytest.approx([math.log(TAU), -math.log(TAU)], abs=1e-13)

    def test_identity_collapses_to_zero(self):
        assert lyapunov_spectrum([[1, 0], [0, 1]]) == [0.0]

    def test_kolakoski_half_log(self):
        spec = lyapunov_spectrum(KOLA_M)
        lam = spectral_data(KOLA_M).pf_value
        assert spec == pytest.approx([math.log(lam), -0.5 * math.log(lam)], abs=1e-12)


class TestMatrixBasics:
    def test_primitivity(self):
        assert is_primitive(FIB_M)
        assert not is_primitive([[1, 0], [0, 1]])
        assert not is_primitive([[0, 1], [1, 0]])  # periodic, never positive

    def test_char_poly_fibonacci(self):
        # x^2 - x - 1, constant term first
        assert char_poly(FIB_M) == [-1, -1, 1]


class TestOrders:
    def test_golden_embedding(self):
        o = golden_order()
        assert float(AlgebraicNumber(o, 0, 1)) == pytest.approx(TAU, abs=1e-15)

    def test_metallic_generator(self):
        # theta = (p + sqrt(p^2+4))/2 solves x^2 = p x + 1
        for p in (1, 2, 3):
            o = metallic_order(p)
            th = float(AlgebraicNumber(o, 0, 1))
            assert th == pytest.approx((p + math.sqrt(p * p + 4)) / 2, abs=1e-13)

    def test_pisot_inequality(self):
        for p in (1, 2, 3, 5):
            o = metallic_order(p)
            th = AlgebraicNumber(o, 0, 1)
            assert float(th) > 1 > abs(float(star(th)))

    def test_exact_arithmetic(self):
        t = golden(0, 1)
        assert t * t == t + golden(1, 0)  # tau^2 = tau + 1
        x = golden(2, 3)
        assert x.field_norm() == 1
        assert (2 + 3 * TAU) * (2 + 3 * (1 - TAU)) == pytest.approx(1.0)
