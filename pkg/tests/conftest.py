import pytest

from polarflip.codes import build_code, code_from_frozen


@pytest.fixture(scope="session")
def pattern_code():
    """N=16 code whose decode tree is [rate0, spc, rep, rate1]."""
    return code_from_frozen(16, 8, 0, [0, 1, 2, 3, 4, 8, 9, 10])


@pytest.fixture(scope="session")
def crc_code():
    """P(64,32) with the 8-bit CRC, the small working code."""
    return build_code(64, 32, 8)
