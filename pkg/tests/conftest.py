import numpy as np
import pytest

from orthofpca import KIND_BSPLINE, KIND_ORTHONORMAL, BasisSpec, build_basis


@pytest.fixture(scope="session")
def spline12():
    return build_basis(BasisSpec(KIND_BSPLINE, 12, (0.0, 1.0)))


@pytest.fixture(scope="session")
def ortho6():
    return build_basis(BasisSpec(KIND_ORTHONORMAL, 6, (0.0, 1.0)))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
