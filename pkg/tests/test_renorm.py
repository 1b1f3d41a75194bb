import math

import numpy as np
import pytest

from diffscale.algebra import AlgebraicNumber, golden_order, lyapunov_spectrum, spectral_data
from diffscale.renorm import (
    PairCorrelationTable,
    cocycle_exponent,
    displacement_sets,
    exponent_report,
    fibonacci_pair_frequency,
    fourier_matrix,
    lyapunov_cocycle,
    measured_z_exponent,
    patch_pair_frequencies,
    predict_exponent,
    renorm_step,
    solve_pair_correlations,
)
from diffscale.substitution import catalogue, default_seed, substitution_patch

TAU = (1.0 + math.sqrt(5.0)) / 2.0
PAIRS = (("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"))


def golden(a=0, b=0):
    return AlgebraicNumber(golden_order(), a, b)


def random_table(rng, radius=8.0):
    values = {p: {} for p in PAIRS}
    for _ in range(40):
        z = golden(int(rng.integers(-4, 5)), int(rng.integers(-4, 5)))
        if abs(float(z)) > radius:
            continue
        pair = PAIRS[rng.integers(0, 4)]
        values[pair][z] = float(rng.uniform(0.0, 1.0))
    return PairCorrelationTable(values, radius)


class TestTable:
    def test_get_missing_is_zero(self):
        t = PairCorrelationTable({p: {} for p in PAIRS}, 1.0)
        assert t.get("a", "b", golden(1, 0)) == 0.0

    def test_total_at_sums_pairs(self):
        z = golden(0, 0)
        t = PairCorrelationTable(
            {("a", "a"): {z: 0.25}, ("a", "b"): {}, ("b", "a"): {}, ("b", "b"): {z: 0.5}},
            1.0,
        )
        assert t.total_at(z) == pytest.approx(0.75)

    def test_sup_diff(self):
        rng = np.random.default_rng(0)
        t = random_table(rng)
        assert t.sup_diff(t) == 0.0
        bumped = {p: dict(b) for p, b in t.values.items()}
        z = golden(1, 0)
        bumped[("a", "a")][z] = bumped[("a", "a")].get(z, 0.0) + 0.125
        assert t.sup_diff(PairCorrelationTable(bumped, t.radius)) == pytest.approx(0.125)


class TestRenormStep:
    def test_zero_table_fixed(self):
        zero = PairCorrelationTable({p: {} for p in PAIRS}, 5.0)
        out = renorm_step(zero)
        assert all(not bucket for bucket in out.values.values())

    def test_bb_pulls_from_aa_only(self):
        # the (b,b) output channel is fed by (a,a) alone, with distances
        # inflated by tau and weight scaled down once
        rng = np.random.default_rng(3)
        t = random_table(rng, radius=10.0)
        out = renorm_step(t)
        tau = golden_order().generator
        for z in list(out.values[("b", "b")]) + [golden(1, 0), golden(0, 1)]:
            if abs(float(z)) > out.radius:
                continue
            assert out.get("b", "b", z) == pytest.approx(
                t.get("a", "a", z / tau) / float(tau), abs=1e-14
            )

    def test_non_integral_distance_rejected(self):
        half = golden(0, 1) / golden(2, 0)
        t = PairCorrelationTable(
            {("a", "a"): {half: 0.5}, ("a", "b"): {}, ("b", "a"): {}, ("b", "b"): {}},
            2.0,
        )
        with pytest.raises(ValueError):
            renorm_step(t)

    def test_support_shrinks_by_tau(self):
        rng = np.random.default_rng(5)
        t = random_table(rng, radius=8.0)
        out = renorm_step(t)
        assert out.radius == pytest.approx(8.0 / TAU)
        assert all(abs(float(z)) <= out.radius + 1e-9 for z in out.distances())


@pytest.fixture(scope="module")
def table():
    return solve_pair_correlations(0.5, radius=5.0)


class TestFixedPoint:
    def test_single_letter_frequencies(self, table):
        zero = golden(0, 0)
        assert table.get("a", "a", zero) == pytest.approx(TAU - 1.0, abs=1e-10)
        assert table.get("b", "b", zero) == pytest.approx(2.0 - TAU, abs=1e-10)
        assert table.total_at(zero) == pytest.approx(1.0, abs=1e-12)

    def test_mixed_pairs_vanish_at_zero(self, table):
        zero = golden(0, 0)
        assert table.get("a", "b", zero) == 0.0
        assert table.get("b", "a", zero) == 0.0

    def test_transpose_symmetry(self, table):
        for (i, j), z, v in table.entries():
            assert table.get(j, i, -z) == pytest.approx(v, abs=1e-12)

    def test_window_overlap_oracle(self, table):
        sup = max(
            abs(v - fibonacci_pair_frequency(i, j, z)) for (i, j), z, v in table.entries()
        )
        assert sup < 1e-10

    def test_seed_independence(self, table):
        other = solve_pair_correlations(0.13, radius=5.0)
        assert table.sup_diff(other) < 1e-10

    def test_matches_patch_counts(self, table):
        rule = catalogue("fibonacci")
        patch = substitution_patch(rule, default_seed(rule), 7000.0)
        assert len(patch) > 10_000
        counted = patch_pair_frequencies(patch, list(table.distances()))
        assert table.sup_diff(counted) < 1e-3

    def test_bad_seed_rejected(self):
        for bad in (0.0, 1.0, -0.2):
            with pytest.raises(ValueError):
                solve_pair_correlations(bad)


class TestFourierMatrix:
    def test_zero_frequency_is_substitution_matrix(self):
        for name in ("fibonacci", "period_doubling", "kolakoski31", "rudin_shapiro"):
            rule = catalogue(name)
            b0 = fourier_matrix(rule, 0.0)
            assert np.array_equal(b0, np.array(rule.matrix(), dtype=complex))

    def test_golden_displacements(self):
        rule = catalogue("fibonacci")
        disp = displacement_sets(rule)
        tau = golden_order().generator
        assert disp[("a", "a")] == [tau * 0]
        assert disp[("b", "a")] == [tau]
        assert disp[("a", "b")] == [tau * 0]
        assert disp[("b", "b")] == []

    def test_entries_bounded_by_counts(self):
        rng = np.random.default_rng(11)
        for name in ("fibonacci", "limit_quasiperiodic", "rudin_shapiro"):
            rule = catalogue(name)
            counts = np.array(rule.matrix(), dtype=float)
            for k in rng.uniform(0.0, 5.0, 8):
                assert np.all(np.abs(fourier_matrix(rule, float(k))) <= counts + 1e-12)

    def test_supertile_recursion(self):
        # brute-force Fourier sums over level-6/7 supertiles, linked by one
        # inflation step: F_7(q) = B(q) F_6(2q) for the unit-length doubling rule
        rule = catalogue("period_doubling")

        def brute(level, k):
            words = {c: c for c in rule.alphabet}
            for _ in range(level):
                words = {c: rule.apply(words[c]) for c in rule.alphabet}
            out = np.zeros((2, 2), dtype=complex)
            for jj, j in enumerate(rule.alphabet):
                for pos, c in enumerate(words[j]):
                    out[rule.alphabet.index(c), jj] += np.exp(2j * np.pi * k * pos)
            return out

        q = 0.37 / 2**7
        f7 = brute(7, q)
        assert np.abs(f7 - fourier_matrix(rule, q) @ brute(6, 2 * q)).max() < 1e-10
        prod = np.eye(2, dtype=complex)
        for j in range(7):
            prod = prod @ fourier_matrix(rule, q * 2**j)
        assert np.abs(f7 - prod).max() < 1e-10


class TestCocycle:
    def test_fibonacci_dominant_exponent(self):
        # finite-depth estimate carries a log-prefactor/n correction, so the
        # tight band needs moderate k; convergence is checked separately above
        rule = catalogue("fibonacci")
        for k in (0.1, 0.2, 0.3):
            chi = cocycle_exponent(rule, k, 40)
            assert chi == pytest.approx(math.log(TAU), abs=0.01)

    def test_pf_vector_at_tiny_frequency(self):
        rule = catalogue("fibonacci")
        v = np.array(spectral_data(rule.matrix()).right, dtype=float)
        chi = cocycle_exponent(rule, 1e-9, 12, v=v / np.linalg.norm(v))
        assert chi == pytest.approx(math.log(TAU), abs=1e-7)

    def test_input_validation(self):
        rule = catalogue("fibonacci")
        with pytest.raises(ValueError):
            cocycle_exponent(rule, 0.5, 0)
        with pytest.raises(ValueError):
            cocycle_exponent(rule, 0.5, 10, v=[0.0, 0.0])

    def test_exponents_land_in_matrix_spectrum(self):
        rng = np.random.default_rng(7)
        rules = [
            catalogue(n)
            for n in (
                "fibonacci",
                "period_doubling",
                "limit_quasiperiodic",
                "kolakoski31",
                "plastic",
                "thue_morse",
                "rudin_shapiro",
            )
        ] + [catalogue("noble", p=2), catalogue("gtm", p=3, q=1)]
        for rule in rules:
            sigma = lyapunov_spectrum(rule.matrix())
            for k in rng.uniform(0.1, 0.6, 20):
                chi = cocycle_exponent(rule, float(k), 60)
                assert min(abs(chi - s) for s in sigma) < 0.05, rule.name

    def test_noble_shifted_pair(self):
        # amplitude vectors pick up the contracting branch: shifting the full
        # spectrum by -log(lambda) must produce {0, -2 log(lambda)}
        rule = catalogue("noble", p=2)
        lam = spectral_data(rule.matrix()).pf_value
        spec = lyapunov_cocycle(rule, 0.9, 60)
        shifted = sorted(s - math.log(lam) for s in spec)
        assert shifted[1] == pytest.approx(0.0, abs=0.02)
        assert shifted[0] == pytest.approx(-2.0 * math.log(1.0 + math.sqrt(2.0)), abs=0.02)

    def test_measured_exponent_fibonacci(self):
        z = measured_z_exponent(catalogue("fibonacci"), 0.7, depth=50)
        assert z == pytest.approx(4.0, abs=0.1)


class TestPrediction:
    def test_unimodular_binary_rules(self):
        for rule in (catalogue("fibonacci"), catalogue("noble", p=2), catalogue("noble", p=3)):
            pred = predict_exponent(rule)
            assert pred.derivation == "binary-det"
            assert pred.alpha_tilde == 2.0
            assert pred.z_exponent == 4.0

    def test_period_doubling(self):
        pred = predict_exponent(catalogue("period_doubling"))
        assert pred.alpha_tilde == pytest.approx(1.0)
        assert pred.z_exponent == pytest.approx(2.0)

    def test_limit_quasiperiodic_closed_form(self):
        pred = predict_exponent(catalogue("limit_quasiperiodic"))
        target = 2.0 * math.log(1.0 + math.sqrt(2.0)) / math.log(2.0 + math.sqrt(2.0))
        assert pred.alpha_tilde == pytest.approx(target, abs=1e-12)
        assert pred.alpha_tilde == pytest.approx(1.436, abs=1e-3)

    def test_kolakoski_exact_cube(self):
        pred = predict_exponent(catalogue("kolakoski31"))
        assert pred.derivation == "subleading-eigenvalue"
        assert pred.z_exponent == 3.0

    def test_thue_morse_exceptional(self):
        pred = predict_exponent(catalogue("thue_morse"))
        assert pred.exceptional is not None
        assert math.isinf(pred.alpha_tilde)

    def test_rudin_shapiro_candidates(self):
        pred = predict_exponent(catalogue("rudin_shapiro"))
        assert pred.z_exponent == pytest.approx(1.0, abs=1e-10)
        assert math.isinf(pred.candidates[-1])

    def test_report_record(self):
        rep = exponent_report(catalogue("noble", p=2))
        assert rep["rule"] == "noble(2)"
        assert rep["det"] == -1
        assert rep["lambda"] == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-13)
        assert rep["predicted_exponent"] == 4.0
        assert sorted(rep) == [
            "alpha_tilde",
            "det",
            "lambda",
            "lyapunov_spectrum",
            "predicted_exponent",
            "rule",
        ]
