import io

import numpy as np
import pytest

from ftsbands.grids import (
    FunctionalSample,
    Grid,
    ModulationFunction,
    PredictionBand,
    ShapeError,
    band_contains,
    band_size,
    modulation_from_residuals,
    read_curves,
    weighted_sup_score,
    write_curves,
)

UNIT = Grid(0.0, 1.0, 3)


def sample(*values, grid=UNIT):
    return FunctionalSample(list(values), [grid] * len(values))


def modulation(*values, grid=UNIT):
    return ModulationFunction(list(values), [grid] * len(values))


class TestGrid:
    def test_points_equispaced(self):
        g = Grid(0.0, 1.0, 5)
        assert np.allclose(g.points, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert g.spacing == 0.25

    def test_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 5)
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 1)

    def test_nearest_index_clamps(self):
        g = Grid(0.0, 1.0, 5)
        assert g.nearest_index(0.26) == 1
        assert g.nearest_index(-3.0) == 0
        assert g.nearest_index(9.0) == 4


class TestWeightedSupScore:
    def test_zero_residual(self):
        y = sample([1.0, 2.0, 3.0])
        s = modulation([1.0, 1.0, 1.0])
        assert weighted_sup_score(y, y, s) == 0.0

    def test_sup_of_absolute_residuals(self):
        center = sample([0.0, 0.0, 0.0])
        y = sample([1.0, -2.0, 0.5])
        s = modulation([1.0, 1.0, 1.0])
        assert weighted_sup_score(y, center, s) == 2.0

    def test_two_components_hand_value(self):
        y = sample([0.5] * 3, [0.9] * 3)
        center = sample([0.0] * 3, [0.0] * 3)
        s = modulation([0.25] * 3, [1.0] * 3)
        assert weighted_sup_score(y, center, s) == pytest.approx(2.0)

    def test_scale_inverse_in_modulation(self):
        rng = np.random.default_rng(0)
        y = sample(rng.normal(size=3))
        center = sample(rng.normal(size=3))
        s = modulation(rng.uniform(0.5, 2.0, size=3))
        lam = 3.7
        assert weighted_sup_score(y, center, s.scaled(lam)) == pytest.approx(
            weighted_sup_score(y, center, s) / lam
        )

    def test_shape_mismatch(self):
        y = sample([1.0, 2.0, 3.0])
        other = sample(np.zeros(4), grid=Grid(0.0, 1.0, 4))
        s = modulation([1.0] * 3)
        with pytest.raises(ShapeError):
            weighted_sup_score(y, other, s)


class TestModulationFromResiduals:
    def test_all_zero_floors(self):
        res = [sample([0.0, 0.0, 0.0]) for _ in range(4)]
        s = modulation_from_residuals(res)
        assert np.all(s.values[0] == 1e-12 * 0.0 + 1.0)  # peak 0 -> floor 1

    def test_three_four_five(self):
        res = [sample([3.0, 0.0, 0.0]), sample([4.0, 0.0, 0.0])]
        s = modulation_from_residuals(res)
        assert s.values[0][0] == pytest.approx(5.0)

    def test_single_residual_absolute_value(self):
        res = [sample([-2.0, 1.5, 0.25])]
        s = modulation_from_residuals(res)
        assert np.allclose(s.values[0], [2.0, 1.5, 0.25])

    def test_order_invariant(self):
        rng = np.random.default_rng(3)
        res = [sample(rng.normal(size=3)) for _ in range(6)]
        s1 = modulation_from_residuals(res)
        s2 = modulation_from_residuals(res[::-1])
        assert np.array_equal(s1.values[0], s2.values[0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            modulation_from_residuals([])


class TestBandSize:
    def test_zero_width_at_k_zero(self):
        band = PredictionBand(sample([0.0] * 3), modulation([1.0] * 3), k=0.0, alpha=0.25)
        assert band_size(band) == 0.0

    def test_rectangle_area(self):
        band = PredictionBand(sample([0.0] * 3), modulation([1.0] * 3), k=2.0, alpha=0.25)
        assert band_size(band) == pytest.approx(4.0)

    def test_sum_over_components(self):
        band = PredictionBand(
            sample([0.0] * 3, [0.0] * 3),
            modulation([0.5] * 3, [0.5] * 3),
            k=1.0,
            alpha=0.25,
        )
        assert band_size(band) == pytest.approx(2.0)

    def test_linear_in_k_additive_in_components(self):
        rng = np.random.default_rng(5)
        s1 = rng.uniform(0.1, 2.0, size=3)
        s2 = rng.uniform(0.1, 2.0, size=3)
        one = PredictionBand(sample(np.zeros(3)), modulation(s1), k=1.0, alpha=0.25)
        three = PredictionBand(sample(np.zeros(3)), modulation(s1), k=3.0, alpha=0.25)
        assert band_size(three) == pytest.approx(3.0 * band_size(one))
        both = PredictionBand(
            sample(np.zeros(3), np.zeros(3)), modulation(s1, s2), k=1.0, alpha=0.25
        )
        other = PredictionBand(sample(np.zeros(3)), modulation(s2), k=1.0, alpha=0.25)
        assert band_size(both) == pytest.approx(band_size(one) + band_size(other))

    def test_entire_space_fails_loudly(self):
        band = PredictionBand(
            sample([0.0] * 3), modulation([1.0] * 3), k=np.inf, alpha=0.25, entire_space=True
        )
        with pytest.raises(ValueError, match="entire space"):
            band_size(band)


class TestBandContains:
    def band(self, k=1.5):
        return PredictionBand(sample([0.0] * 3), modulation([1.0, 2.0, 0.5]), k=k, alpha=0.25)

    def test_center_inside(self):
        band = self.band()
        assert band_contains(band, band.center)

    def test_point_beyond_k_outside(self):
        band = self.band()
        values = band.center.components[0].copy()
        values[1] += (band.k + 1.0) * band.modulation.values[0][1]
        assert not band_contains(band, sample(values))

    def test_boundary_score_inside(self):
        band = self.band()
        values = band.center.components[0] + band.k * band.modulation.values[0]
        assert band_contains(band, sample(values))

    def test_equivalence_with_score(self):
        rng = np.random.default_rng(7)
        band = self.band()
        for _ in range(200):
            y = sample(rng.normal(scale=2.0, size=3))
            expected = weighted_sup_score(y, band.center, band.modulation) <= band.k
            assert band_contains(band, y) == expected

    def test_entire_space_contains_everything(self):
        band = PredictionBand(
            sample([0.0] * 3), modulation([1.0] * 3), k=np.inf, alpha=0.2, entire_space=True
        )
        assert band_contains(band, sample([1e9, -1e9, 0.0]))


class TestCurveSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(11)
        grid = Grid(0.0, 2.0, 50)
        original = FunctionalSample([rng.normal(size=50), rng.normal(size=50)], [grid, grid])
        text = write_curves(original)
        back = read_curves(text)
        assert back.grids == original.grids
        for a, b in zip(back.components, original.components):
            assert np.allclose(a, b, rtol=1e-9, atol=0.0)

    def test_write_through_handle(self):
        fh = io.StringIO()
        write_curves(sample([1.0, 2.0, 3.0]), fh)
        assert fh.getvalue().startswith("grid 0 1 3 1")

    def test_mixed_grids_rejected(self):
        mixed = FunctionalSample(
            [np.zeros(3), np.zeros(4)], [UNIT, Grid(0.0, 1.0, 4)]
        )
        with pytest.raises(ValueError):
            write_curves(mixed)

    def test_bad_documents_rejected(self):
        with pytest.raises(ValueError):
            read_curves("")
        with pytest.raises(ValueError):
            read_curves("grid 0 1 3\n0 1\n")
        with pytest.raises(ValueError):
            read_curves("grid 0 1 2 1\n0 1\n")
