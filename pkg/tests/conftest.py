import pytest

from upcint.constants import DEFAULT_CATALOG, lhc_beams, rhic_beams
from upcint.photoproduction import Photoproduction


@pytest.fixture(scope="session")
def catalog():
    return DEFAULT_CATALOG


@pytest.fixture(scope="session")
def rho(catalog):
    return catalog.meson("rho0")


@pytest.fixture(scope="session")
def jpsi(catalog):
    return catalog.meson("jpsi")


@pytest.fixture(scope="session")
def rhic_rho(rho):
    return Photoproduction.default(rhic_beams(), rho)


@pytest.fixture(scope="session")
def rhic_jpsi(jpsi):
    return Photoproduction.default(rhic_beams(), jpsi)


@pytest.fixture(scope="session")
def lhc_rho(rho):
    return Photoproduction.default(lhc_beams(), rho)


@pytest.fixture(scope="session")
def lhc_jpsi(jpsi):
    return Photoproduction.default(lhc_beams(), jpsi)


@pytest.fixture(scope="session")
def rho_coherent_events(rhic_rho):
    """10^5 RHIC rho0 events at y = 0 with full coherence."""
    from upcint.events import EventGenerator, GeneratorConfig
    from upcint.interference import DecoherenceModel

    cfg = GeneratorConfig(seed=20240601, n_events=100_000, decoherence=DecoherenceModel.full_coherence())
    return EventGenerator(rhic_rho, cfg).generate(threads=4)


@pytest.fixture(scope="session")
def rho_incoherent_events(rhic_rho):
    from upcint.events import EventGenerator, GeneratorConfig
    from upcint.interference import DecoherenceModel

    cfg = GeneratorConfig(seed=20240602, n_events=100_000, decoherence=DecoherenceModel.full_decoherence())
    return EventGenerator(rhic_rho, cfg).generate(threads=4)


# one verdict line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
