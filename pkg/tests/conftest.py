import warnings

import pytest

from hsphom import jsa, phasematch

ACCEPTANCE_LINES = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def paper_preset():
    return phasematch.get_preset("paper-like")


@pytest.fixture(scope="session")
def pump80():
    return jsa.PumpSpec(780e-9, 80e9)


def _paper_jsa(pump, preset, n_points=512, pmf_mode="sinc"):
    crystal = preset.crystal()
    axes = jsa.default_axes(pump, crystal, preset.idler_wavelength, n_points=n_points, pmf_mode=pmf_mode)
    with warnings.catch_warnings():
        # sinc side lobes reach the +-5 FWHM grid edge at the 5e-3 level
        warnings.simplefilter("ignore", jsa.JsaBoundaryWarning)
        return jsa.build_jsa(pump, crystal, *axes, pmf_mode=pmf_mode)


@pytest.fixture(scope="session")
def paper_jsa(pump80, paper_preset):
    return _paper_jsa(pump80, paper_preset)


@pytest.fixture(scope="session")
def paper_jsa_builder(pump80, paper_preset):
    def build(n_points=512, pmf_mode="sinc"):
        return _paper_jsa(pump80, paper_preset, n_points, pmf_mode)
    return build


@pytest.fixture(scope="session")
def idler_02nm():
    return jsa.FilterSpec("idler", "rect", 0.2e-9, "m")
