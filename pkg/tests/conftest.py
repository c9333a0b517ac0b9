import datetime as dt

import pytest

from rosterer import model as m
from rosterer.derivation import with_expanded_instances


def make_period(start="2026-03-02", days=7, holidays=(), threshold="21:00"):
    start_date = dt.date.fromisoformat(start)
    return m.PlanningPeriod(
        start_date,
        start_date + dt.timedelta(days=days - 1),
        public_holidays=frozenset(dt.date.fromisoformat(h) for h in holidays),
        weekend_threshold=m.parse_time_of_day(threshold),
    )


def night_template(tid="N", mandatory=True, **kw):
    return m.DutyTemplate(
        id=tid, weekdays=frozenset(range(7)), start=20 * 60, end=8 * 60, mandatory=mandatory, **kw
    )


def make_instance(period=None, physicians=2, duty_templates=None, expand=True, **kw):
    period = period or make_period()
    phys = tuple(m.Physician(id=f"p{i}") for i in range(physicians))
    inst = m.RosterInstance(
        id="test",
        period=period,
        physicians=phys,
        duty_templates=tuple(duty_templates) if duty_templates else (),
        **kw,
    )
    return with_expanded_instances(inst) if expand else inst


@pytest.fixture
def two_by_two():
    """Two physicians, two mandatory night duties on consecutive days."""
    return make_instance(period=make_period(days=2), duty_templates=[night_template()])
