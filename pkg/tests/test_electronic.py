import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bound_states, reference_regions
from thzqd.electronic import (AxialGrid, QDGeometry, bessel_zero, build_potential, dipole_z,
                              node_count, radial_spectrum, solve_axial, solve_geometry,
                              write_spectrum_csv)
from thzqd.errors import ConfigurationError

# exact transfer-matrix energies of the reference stack (oracles.bound_states)
ORACLE_E10 = 12.6961
ORACLE_E20 = 20.7452


def test_reference_geometry_invariants(geometry):
    assert geometry.total_thickness == pytest.approx(41.0)
    assert geometry.is_mirror_symmetric()


@pytest.mark.parametrize("kw", [dict(layers=((0.0, 0.0),)), dict(radius_a=-1.0),
                                dict(effective_mass_ratio=1.5)])
def test_geometry_rejects_bad_values(kw):
    with pytest.raises(ConfigurationError):
        QDGeometry(**kw)


def test_potential_values(geometry):
    grid = AxialGrid.for_geometry(geometry)
    z, v = grid.z, build_potential(geometry, 0.0, grid)
    assert v[np.argmin(np.abs(z))] == 0.0
    assert v[np.argmin(np.abs(z - 9.5))] == 65.0  # inside the right barrier
    assert v[np.argmin(np.abs(z - 30.0))] == 300.0
    np.testing.assert_array_equal(v, v[::-1])


def test_potential_field_term(geometry):
    grid = AxialGrid.for_geometry(geometry)
    dv = build_potential(geometry, 1.0, grid) - build_potential(geometry, 0.0, grid)
    z = grid.z
    i, j = 1000, 3000
    assert dv[j] - dv[i] == pytest.approx(-(z[j] - z[i]))  # -1 meV per nm


def test_grid_narrower_than_stack(geometry):
    with pytest.raises(ConfigurationError):
        build_potential(geometry, 0.0, AxialGrid(-10.0, 10.0, 2000))


def test_box_ratio():
    z = np.linspace(0, 30, 4001)
    v = np.zeros_like(z)
    sp = solve_axial(z, v, 1 / 15, k=3)
    assert sp.energies[1] / sp.energies[0] == pytest.approx(4.0, rel=1e-3)
    assert sp.energies[2] / sp.energies[0] == pytest.approx(9.0, rel=1e-3)


def test_matches_transfer_matrix_oracle():
    sp = solve_geometry(QDGeometry(), 0.0)
    assert sp.transition(1) == pytest.approx(ORACLE_E10, rel=5e-3)
    assert sp.transition(2) == pytest.approx(ORACLE_E20, rel=5e-3)


def test_oracle_values_are_reproducible():
    e = bound_states(reference_regions(), 1 / 15, 40.0, 3)
    assert e[1] - e[0] == pytest.approx(ORACLE_E10, abs=1e-4)
    assert e[2] - e[0] == pytest.approx(ORACLE_E20, abs=1e-4)


def test_grid_convergence(geometry):
    coarse = solve_geometry(geometry, 0.0)
    grid = AxialGrid.for_geometry(geometry).refined()
    fine = solve_geometry(geometry, 0.0, grid)
    assert abs(fine.transition(1) / coarse.transition(1) - 1) < 5e-3


def test_normalization_nodes_parity(geometry):
    sp = solve_geometry(geometry, 0.0)
    for n, psi in enumerate(sp.wavefunctions.T):
        assert np.trapezoid(psi**2, sp.z) == pytest.approx(1.0, abs=1e-8)
        assert node_count(psi) == n
        parity = psi[::-1] * (-1) ** n
        assert np.max(np.abs(psi - parity)) < 1e-6


def test_parity_selection_rules(geometry):
    sp = solve_geometry(geometry, 0.0)
    assert abs(dipole_z(sp, 0, 0)) < 1e-3
    assert abs(dipole_z(sp, 0, 2)) < 1e-3
    assert abs(dipole_z(sp, 0, 1)) > 1.0
    assert dipole_z(sp, 1, 2) == pytest.approx(dipole_z(sp, 2, 1))


@settings(max_examples=10, deadline=None)
@given(st.floats(-2.5, 2.5))
def test_levels_ordered_and_sturm(field):
    sp = solve_geometry(QDGeometry(), field)
    assert np.all(np.diff(sp.energies) > 0)
    for n in range(4):
        assert node_count(sp.wavefunctions[:, n]) == n


def test_radial_spectrum(geometry):
    rs = radial_spectrum(geometry)
    assert rs.delta_e == pytest.approx(30.0, rel=0.03)
    assert rs.labels[1] == (1, 1)  # first excited: m = 1, x11
    x01 = bessel_zero(0, 1)
    assert x01 == pytest.approx(2.404, abs=1e-3)
    e0 = geometry.hbar2_2m * x01**2 / geometry.radius_a**2
    assert rs.energies[0] == pytest.approx(e0, rel=1e-12)
    small = QDGeometry(radius_a=geometry.radius_a / 2)
    np.testing.assert_allclose(radial_spectrum(small).energies, 4 * rs.energies, rtol=1e-12)


def test_radial_ceiling(geometry):
    rs = radial_spectrum(geometry, ceiling=26.5)
    assert rs.exceeds_ceiling


def test_spectrum_csv(tmp_path, geometry):
    grid = AxialGrid.for_geometry(geometry)
    v = build_potential(geometry, 0.0, grid)
    sp = solve_axial(grid.z, v, geometry.effective_mass_ratio)
    p = tmp_path / "s.csv"
    write_spectrum_csv(p, sp, v)
    lines = p.read_text().splitlines()
    assert len(lines) == grid.n_points + 1
