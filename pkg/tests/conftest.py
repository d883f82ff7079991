import pytest

from omr_assembly import detect_io, synthetic


@pytest.fixture(scope="session")
def semantics():
    return detect_io.load_semantics()


def make_score(root, staff1_units, staff2_units):
    return synthetic.build_score(root, staff1_units, staff2_units)


def melody_units():
    return synthetic.fixture_units("melody")
