import math

import numpy as np
import pytest

from hsphom.errors import DomainError
from hsphom.jsa import FilterSpec, JsaGrid, apply_filter
from hsphom.optics import SpectralAxis
from hsphom.schmidt import (
    SchmidtSpectrum,
    g2_from_purity,
    purity_from_g2,
    purity_from_schmidt,
    purity_vs_filter_sweep,
    schmidt_decompose,
    schmidt_number,
    trace_purity,
    write_sweep_csv,
)


def spectrum(weights):
    return SchmidtSpectrum(np.sqrt(np.asarray(weights, dtype=float)))


def double_gaussian(n, a, b, c, half_width=6.0):
    """exp(-a x^2 - b y^2 - 2 c x y) on x, y in [-half_width, half_width]."""
    scale = 1e11
    ax = SpectralAxis(1.2e15, 2 * half_width * scale, n)
    x = ax.detuning / scale
    X, Y = np.meshgrid(x, x, indexing="ij")
    amp = np.exp(-a * X**2 - b * Y**2 - 2 * c * X * Y)
    return JsaGrid(ax, SpectralAxis(1.3e15, 2 * half_width * scale, n), amp).normalize()


def analytic_K(a, b, c):
    return math.sqrt(a * b / (a * b - c * c))


class TestSchmidtNumber:
    def test_single_mode(self):
        assert schmidt_number(spectrum([1.0])) == 1.0

    def test_two_equal(self):
        assert schmidt_number(spectrum([0.5, 0.5])) == pytest.approx(2.0, rel=1e-12)

    def test_three_modes(self):
        # 1 / (0.36 + 0.09 + 0.01)
        assert schmidt_number(spectrum([0.6, 0.3, 0.1])) == pytest.approx(2.1739130434782608, rel=1e-12)

    @pytest.mark.parametrize(
        "weights,p",
        [
            ([1.0], 1.0),
            ([0.2] * 5, 0.2),
            # a^2 + (1-a)^2 = 0.9, i.e. K = 10/9
            ([(1 + math.sqrt(0.8)) / 2, (1 - math.sqrt(0.8)) / 2], 0.9),
        ],
    )
    def test_purity_is_inverse_K(self, weights, p):
        spec = spectrum(weights)
        assert purity_from_schmidt(spec) == pytest.approx(p, rel=1e-12)
        assert spec.schmidt_number == pytest.approx(1 / p, rel=1e-12)

    def test_unsorted_rejected(self):
        with pytest.raises(DomainError):
            SchmidtSpectrum(np.array([0.1, 0.9]))


class TestG2:
    def test_pure(self):
        assert g2_from_purity(1.0) == 2.0

    def test_many_modes_tends_to_one(self):
        assert g2_from_purity(1e-6) == pytest.approx(1.0, abs=1e-5)

    def test_inversion_chain(self):
        p = purity_from_g2(1.2)
        assert p == pytest.approx(0.2, rel=1e-12)
        assert 1 / p == pytest.approx(5.0, rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
    def test_purity_range(self, bad):
        with pytest.raises(DomainError):
            g2_from_purity(bad)

    @pytest.mark.parametrize("bad", [1.0, 2.5, 0.9])
    def test_g2_range(self, bad):
        with pytest.raises(DomainError):
            purity_from_g2(bad)


class TestDecompose:
    def test_separable(self):
        g = double_gaussian(101, 1.0, 0.7, 0.0)
        spec = schmidt_decompose(g)
        assert spec.coefficients[0] == pytest.approx(1.0, abs=1e-12)
        full = np.linalg.svd(g.amplitude * math.sqrt(g.cell), compute_uv=False)
        assert np.all(full[1:] < 1e-9)

    def test_weights_sum_to_one(self, paper_jsa):
        spec = schmidt_decompose(paper_jsa)
        assert np.sum(spec.weights) == pytest.approx(1.0, abs=1e-9)
        assert np.all(np.diff(spec.coefficients) <= 0)
        assert spec.truncation_residual < 1e-6

    @pytest.mark.parametrize("abc", [(1.0, 1.0, 0.6), (0.5, 2.0, -0.8), (1.0, 1.5, 0.95)])
    def test_double_gaussian_K(self, abc):
        g = double_gaussian(301, *abc)
        assert schmidt_decompose(g).schmidt_number == pytest.approx(analytic_K(*abc), rel=1e-6)

    def test_double_gaussian_geometric_decay(self):
        a, b, c = 1.0, 1.0, 0.8
        k = analytic_K(a, b, c)
        mu2 = (k - 1) / (k + 1)
        spec = schmidt_decompose(double_gaussian(1024, a, b, c, half_width=8.0))
        w = spec.weights
        ratios = w[1:6] / w[:5]
        assert np.allclose(ratios, mu2, rtol=1e-2)
        assert np.allclose(ratios, ratios[0], rtol=1e-2)

    def test_gaussian_pmf_paper_like_is_geometric(self, paper_jsa_builder):
        w = schmidt_decompose(paper_jsa_builder(512, "gaussian")).weights
        ratios = w[1:6] / w[:5]
        assert np.allclose(ratios, ratios[0], rtol=1e-2)

    def test_trace_purity_agrees(self, paper_jsa, idler_02nm):
        for g in (paper_jsa, apply_filter(paper_jsa, idler_02nm)):
            assert trace_purity(g) == pytest.approx(schmidt_decompose(g).purity, abs=1e-6)

    def test_phase_does_not_change_spectrum(self, paper_jsa):
        phase = np.exp(1j * np.linspace(0, 3, paper_jsa.signal_axis.n_points))[:, None]
        rotated = JsaGrid(paper_jsa.signal_axis, paper_jsa.idler_axis, paper_jsa.amplitude * phase)
        a = schmidt_decompose(paper_jsa).coefficients
        b = schmidt_decompose(rotated).coefficients
        assert np.allclose(a[:20], b[:20], atol=1e-12)

    def test_zero_jsa(self):
        ax = SpectralAxis(1e15, 1e12, 5)
        with pytest.raises(DomainError):
            schmidt_decompose(JsaGrid(ax, ax, np.zeros((5, 5))))


class TestPaperLike:
    def test_unfiltered_K(self, paper_jsa):
        assert 4.0 <= schmidt_decompose(paper_jsa).schmidt_number <= 6.0

    def test_grid_convergence(self, paper_jsa, paper_jsa_builder):
        k512 = schmidt_decompose(paper_jsa).schmidt_number
        k1024 = schmidt_decompose(paper_jsa_builder(1024)).schmidt_number
        assert abs(k1024 - k512) / k512 < 0.01

    def test_point_two_nm(self, paper_jsa, idler_02nm):
        p = schmidt_decompose(apply_filter(paper_jsa, idler_02nm)).purity
        assert 0.8 <= p <= 1.0


class TestSweep:
    WIDTHS = [0.1e-9, 0.2e-9, 0.3e-9, 0.5e-9, 1e-9, 2e-9, 5e-9]

    def test_monotone(self, paper_jsa, idler_02nm):
        rows = purity_vs_filter_sweep(paper_jsa, self.WIDTHS, idler_02nm)
        p = [r.purity for r in rows]
        assert all(b <= a + 1e-3 for a, b in zip(p, p[1:]))
        eff = [r.heralding_efficiency for r in rows]
        assert all(b >= a for a, b in zip(eff, eff[1:]))

    def test_units_echoed(self, paper_jsa, idler_02nm):
        rows = purity_vs_filter_sweep(paper_jsa, [0.1e-9, 0.2e-9], idler_02nm)
        assert [r.width_nm for r in rows] == [0.1, 0.2]
        assert rows[1].width_ghz == pytest.approx(24.5276, rel=1e-4)

    def test_all_pass_endpoint(self, paper_jsa):
        tmpl = FilterSpec("idler", "rect", 1e9, "hz")
        row = purity_vs_filter_sweep(paper_jsa, [1e15], tmpl)[0]
        assert row.purity == pytest.approx(schmidt_decompose(paper_jsa).purity, abs=1e-12)
        assert row.heralding_efficiency == pytest.approx(1.0, abs=1e-12)

    def test_single_cell_endpoint(self, paper_jsa):
        step_hz = paper_jsa.idler_axis.step / (2 * math.pi)
        point = paper_jsa.idler_axis.points[256]
        tmpl = FilterSpec("idler", "rect", 1e9, "hz", center=2 * math.pi * 299792458.0 / point)
        row = purity_vs_filter_sweep(paper_jsa, [step_hz], tmpl)[0]
        assert row.purity == pytest.approx(1.0, abs=1e-3)

    def test_workers_identical(self, paper_jsa, idler_02nm):
        a = purity_vs_filter_sweep(paper_jsa, self.WIDTHS, idler_02nm, workers=1)
        b = purity_vs_filter_sweep(paper_jsa, self.WIDTHS, idler_02nm, workers=4)
        assert a == b

    @pytest.mark.parametrize("widths", [[0.2e-9, 0.1e-9], [0.0, 1e-9]])
    def test_bad_widths(self, paper_jsa, idler_02nm, widths):
        with pytest.raises(DomainError):
            purity_vs_filter_sweep(paper_jsa, widths, idler_02nm)

    def test_csv(self, paper_jsa, idler_02nm, tmp_path):
        rows = purity_vs_filter_sweep(paper_jsa, [0.2e-9], idler_02nm)
        write_sweep_csv(rows, tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "width_nm,width_ghz,purity,schmidt_K,heralding_efficiency"
        assert float(lines[1].split(",")[2]) == rows[0].purity
