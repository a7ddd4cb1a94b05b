import pytest
from hypothesis import HealthCheck, settings

from cmech.process import PRESETS, preset

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

PRESET_NAMES = sorted(PRESETS)


@pytest.fixture(params=PRESET_NAMES)
def any_preset(request):
    return preset(request.param)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num][1])
