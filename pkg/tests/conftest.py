import pytest

from dvbond import (
    DefaultSpec,
    FirmModel,
    IntensityFunction,
    PricingInputs,
    ShortRateModel,
)

# Benchmark scenario used throughout: Vasicek rates, firm at 100 with
# barriers 70/80, log-reciprocal intensity.
P0_RATE = dict(a1=0.01, a2=0.2, s_r=0.01, maturity=1.0)
P0_FIRM = dict(V0=100.0, mu=0.07, b=0.05, s_V=0.2)
P0_DEFAULT = dict(t1=0.5, t2=1.0, K1=70.0, K2=80.0, R_u=0.4, R_e=0.3)
P0_R = 0.05


@pytest.fixture(scope="session")
def p0_rate():
    return ShortRateModel(**P0_RATE)


@pytest.fixture(scope="session")
def p0_firm():
    return FirmModel(**P0_FIRM)


@pytest.fixture(scope="session")
def p0_spec():
    return DefaultSpec(**P0_DEFAULT, intensity=IntensityFunction.log_reciprocal())


@pytest.fixture(scope="session")
def p0_inputs(p0_rate, p0_firm, p0_spec):
    return PricingInputs(rate_model=p0_rate, firm=p0_firm, spec=p0_spec,
                         r=P0_R, t=0.0)


def make_inputs(*, rate=None, firm=None, default=None, r=P0_R, t=0.0,
                V1=None, intensity=None):
    """P0 with selective overrides."""
    rate_kw = {**P0_RATE, **(rate or {})}
    firm_kw = {**P0_FIRM, **(firm or {})}
    dflt_kw = {**P0_DEFAULT, **(default or {})}
    rate_kw.setdefault("maturity", dflt_kw["t2"])
    rate_kw["maturity"] = dflt_kw["t2"]
    spec = DefaultSpec(**dflt_kw,
                       intensity=intensity or IntensityFunction.log_reciprocal())
    return PricingInputs(
        rate_model=ShortRateModel(**rate_kw),
        firm=FirmModel(**firm_kw),
        spec=spec,
        r=r,
        t=t,
        V1=V1,
    )
