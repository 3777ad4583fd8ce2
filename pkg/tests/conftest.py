import math

import pytest

from ruledsurf import make_builtin_profile

TWO_PI = 2 * math.pi


@pytest.fixture
def helicoid():
    return make_builtin_profile("helicoid", delta0=1.0)


@pytest.fixture
def edlinger():
    return make_builtin_profile("edlinger", k0=-1.0, delta0=1.0)


@pytest.fixture
def orthoid():
    return make_builtin_profile("const_drall_orthoid", k=0.7, delta0=1.0)


@pytest.fixture
def conoid():
    return make_builtin_profile("const_drall_conoid", lam=1.0, delta0=1.0)


def builtin_profiles(domain=(0.0, TWO_PI)):
    return {
        "helicoid": make_builtin_profile("helicoid", domain, delta0=1.0),
        "edlinger": make_builtin_profile("edlinger", domain, k0=-1.0, delta0=1.0),
        "orthoid": make_builtin_profile("const_drall_orthoid", domain, k=0.7, delta0=1.0),
        "conoid": make_builtin_profile("const_drall_conoid", domain, lam=1.0, delta0=1.0),
    }


@pytest.fixture(params=["helicoid", "edlinger", "orthoid", "conoid"])
def builtin(request):
    return builtin_profiles()[request.param]
