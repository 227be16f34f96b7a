from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from condcap.captions import StructuredCaption

settings.register_profile(
    "suite", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"[acceptance] {status} {name}")


@pytest.fixture
def full_caption() -> StructuredCaption:
    return StructuredCaption(
        dense="A young woman walks down a sunlit corridor adjusting her hat.",
        main_object="A young woman in a light blue t-shirt and a wide-brimmed hat.",
        background="A corridor with beige walls and large windows.",
        camera="The camera moves backward at the same height as the person.",
        style="Casual and candid.",
        action="She walks forward, occasionally adjusting her hat with both hands.",
    )
