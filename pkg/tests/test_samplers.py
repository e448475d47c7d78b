import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from betagpp.errors import DomainError
from betagpp.pointproc import GppModel, MhcpModel
from betagpp.rng import stream
from betagpp.samplers import (PlanarSample, ginibre_eigenvalues, radial_batch, required_kmax,
                              sample_fading, sample_mhcp, sample_planar_gpp, sample_ppp,
                              sample_radial, sample_radial_palm, thin_and_scale)
from betagpp.windows import DiskWindow, RectWindow


def test_radial_batch_moments():
    m = GppModel(0.5, 2.0)
    q, kept = radial_batch(stream(3), m, 6, 200_000)
    assert kept.mean() == pytest.approx(0.5, abs=0.005)
    for k in range(1, 7):
        col = q[kept[:, k - 1], k - 1]
        # gamma(k, beta/c): mean k beta/c, variance k (beta/c)^2
        assert col.mean() == pytest.approx(k * 0.25, rel=0.01)
        assert col.var() == pytest.approx(k * 0.0625, rel=0.03)
    assert np.all(np.isinf(q[~kept]))


def test_radial_count_matches_intensity():
    m = GppModel(0.4, 1.5)
    radius = 3.0
    kmax = required_kmax(m, radius)
    counts = [len(sample_radial(m, kmax, s, radius).within(radius)) for s in range(400)]
    assert np.mean(counts) == pytest.approx(m.intensity * math.pi * radius**2, rel=0.03)


def test_palm_drops_first_index_only():
    m = GppModel(1.0, 1.0)
    full = sample_radial(m, 50, 11)
    palm = sample_radial_palm(m, 50, 11)
    assert palm.palm_conditioned and not full.palm_conditioned
    assert len(palm.squared_moduli) == len(full.squared_moduli) - 1
    assert set(palm.squared_moduli) < set(full.squared_moduli)


def test_required_kmax_enforced():
    m = GppModel(1.0, 1.0)
    need = required_kmax(m, 4.0)
    assert need > 16
    with pytest.raises(DomainError):
        sample_radial(m, need - 1, 0, radius=4.0)
    assert required_kmax(m, 0.0) == 1


def test_planar_gpp_intensity_and_window():
    m = GppModel(0.5, 1.0)
    s = sample_planar_gpp(m, 800, 5)
    assert isinstance(s.window, DiskWindow)
    assert s.intensity == pytest.approx(m.intensity, rel=0.1)
    sq = sample_planar_gpp(m, 800, 5, shape="square")
    assert isinstance(sq.window, RectWindow)
    assert np.all(sq.window.contains(sq.points))


def test_qr_backend_matches_lapack():
    a = np.sort_complex(ginibre_eigenvalues(30, 9, backend="lapack"))
    b = np.sort_complex(ginibre_eigenvalues(30, 9, backend="qr"))
    assert np.allclose(a, b, atol=1e-9)
    with pytest.raises(DomainError):
        ginibre_eigenvalues(5, 0, backend="magic")


def test_thinning_is_reproducible():
    e = ginibre_eigenvalues(300, 1)
    m = GppModel(0.3, 1.0)
    a = thin_and_scale(e, m, 300, 4)
    b = thin_and_scale(e, m, 300, 4)
    assert np.array_equal(a.points, b.points)
    with pytest.raises(DomainError):
        thin_and_scale(e, m, 300, 4, margin=1.0)


def test_ppp_count():
    w = RectWindow(0, 0, 20, 10)
    counts = [len(sample_ppp(0.5, w, s)) for s in range(200)]
    assert np.mean(counts) == pytest.approx(100, rel=0.03)


@pytest.mark.parametrize("variant", ["I", "II"])
def test_mhcp_hard_core_and_intensity(variant):
    m = MhcpModel.matched(0.1, 1.0, variant)
    w = RectWindow(0, 0, 60, 60)
    s = sample_mhcp(m, w, 2)
    assert s.process_tag == f"MHCP_{variant}"
    assert pdist(s.points).min() >= 1.0
    assert s.intensity == pytest.approx(m.intensity, rel=0.1)


def test_fading_mean():
    h = sample_fading(100_000, 2.0, 0)
    assert h.mean() == pytest.approx(0.5, rel=0.02)
    with pytest.raises(DomainError):
        sample_fading(10, 0.0, 0)


def test_planar_sample_validation_and_csv():
    w = RectWindow(0, 0, 1, 1)
    with pytest.raises(DomainError):
        PlanarSample([[2.0, 0.5]], w, "PPP")
    with pytest.raises(DomainError):
        PlanarSample([[0.5, 0.5]], w, "XYZ")
    s = PlanarSample([[0.25, 0.5]], w, "DATA")
    assert s.to_csv() == "x,y\n0.25,0.5\n"
