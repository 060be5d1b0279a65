import numpy as np
import pytest

from alhlab import metrics as M
from alhlab.errors import BoundaryStencilError, ConfigurationError
from alhlab.grid import FermiGrid, export_grid, import_grid


def test_export_import_round_trip(tmp_path):
    grid = FermiGrid.sample(M.random_analytic(2, 3), np.linspace(0.5, 1.0, 5), [np.linspace(0, 0.4, 3),
                                                                               np.linspace(0.1, 0.3, 4)])
    path = tmp_path / "g.txt"
    export_grid(grid, path)
    back = import_grid(path)
    assert back.shape == grid.shape
    np.testing.assert_array_equal(back.g_components, grid.g_components)
    np.testing.assert_array_equal(back.r_nodes, grid.r_nodes)
    header = path.read_text().splitlines()[2].split()
    assert header == ["y1", "y2", "r", "g11", "g12", "g22"]


def test_import_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("hello\n")
    with pytest.raises(ConfigurationError):
        import_grid(p)


def test_patch_geometry():
    g = FermiGrid.patch(M.horospherical(2), [1.0, 0.0, 0.0], [0.1, 0.2, 0.2], 2)
    assert g.shape == (5, 5, 5)
    assert g.center_node() == (2, 2, 2)
    np.testing.assert_allclose(g.spacing, [0.1, 0.2, 0.2])
    np.testing.assert_allclose(g.coords(g.center_node()), [1.0, 0.0, 0.0])
    np.testing.assert_allclose(g.g_components[2, 2, 2], np.exp(2.0) * np.eye(2))


def test_stencil_beyond_boundary_raises():
    g = FermiGrid.patch(M.horospherical(1), [1.0, 0.0], 0.1, 1)
    with pytest.raises(BoundaryStencilError):
        g.full_block((1, 1), 2)


@pytest.mark.parametrize("r", [[0.0, 0.1, 0.3], [0.2, 0.1], [0.0]])
def test_nonuniform_or_short_axis_rejected(r):
    with pytest.raises(ConfigurationError):
        FermiGrid.sample(M.flat_cylinder(1), r, np.array([0.0, 1.0]))


def test_asymmetric_components_rejected():
    gc = np.tile(np.eye(2), (2, 2, 2, 1, 1))
    gc[0, 0, 0, 0, 1] = 0.5
    with pytest.raises(ConfigurationError):
        FermiGrid(np.array([0.0, 1.0]), (np.array([0.0, 1.0]),) * 2, gc)
