import pytest

from klrloc.cartan import build_cartan
from klrloc.convolution import Crystal, catalog
from klrloc.linalg import make_field

P = 16777213


@pytest.fixture(scope="session")
def Fp():
    return make_field(f"F_{P}")


@pytest.fixture(scope="session")
def Q():
    return make_field("Q")


_crystals = {}


def crystal_of(label, F):
    key = (label, F.name)
    if key not in _crystals:
        _crystals[key] = Crystal(build_cartan(label), F)
    return _crystals[key]


@pytest.fixture(scope="session")
def crystals(Fp):
    return {t: crystal_of(t, Fp) for t in ("A2", "A3", "C2")}


_catalogs = {}


def catalog_of(cr, height):
    key = (cr.cd.name, cr.F.name, height)
    if key not in _catalogs:
        _catalogs[key] = catalog(cr, height)
    return _catalogs[key]
