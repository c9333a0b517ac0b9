import datetime as dt
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance, make_period, night_template
from rosterer import model as m


def errors_of(inst):
    return [f for f in m.validate_instance(inst) if f.severity == "error"]


def test_round_half_up_ratio_matches_fraction_reference():
    for value, num, den in [(5, 1, 2), (3, 1, 2), (2, 3, 4), (7, 2, 5), (0, 1, 3)]:
        expected = int((Fraction(value * num, den) + Fraction(1, 2)).__floor__())
        assert m.round_half_up_ratio(value, num, den) == expected


@given(st.integers(0, 50), st.integers(0, 8), st.integers(1, 8))
@settings(max_examples=200, deadline=None)
def test_round_half_up_ratio_property(value, num, den):
    expected = int((Fraction(value * num, den) + Fraction(1, 2)).__floor__())
    assert m.round_half_up_ratio(value, num, den) == expected


def test_round_half_up_ties_go_up():
    assert m.round_half_up_ratio(5, 1, 2) == 3  # 2.5 -> 3
    assert m.round_half_up_ratio(7, 1, 2) == 4  # 3.5 -> 4
    assert m.round_half_up(2.5) == 3


def test_time_of_day_parsing_roundtrip():
    assert m.parse_time_of_day("21:00") == 1260
    assert m.format_time_of_day(1260) == "21:00"
    with pytest.raises(ValueError):
        m.parse_time_of_day("24:00")


def test_wellformed_demo_instance_has_no_errors(two_by_two):
    assert errors_of(two_by_two) == []


def test_validation_is_pure(two_by_two):
    first = m.validate_instance(two_by_two)
    second = m.validate_instance(two_by_two)
    assert first == second


def test_qualification_conflict_is_an_error():
    tpl = night_template(
        required_quals=frozenset({"icu"}), excluded_quals=frozenset({"icu"})
    )
    inst = make_instance(
        duty_templates=[tpl],
        qualifications=(m.Qualification("icu"),),
    )
    codes = {f.code for f in errors_of(inst)}
    assert "qualification-conflict" in codes


def test_monthly_preference_cap_enforced():
    # Eleven undesired picks in one month against a cap of ten.
    inst = make_instance(
        period=make_period(days=11),
        duty_templates=[night_template()],
        preference_policy=m.PreferencePolicy({m.PreferenceLevel.UNDESIRED: 10}),
    )
    prefs = tuple(
        m.PreferenceRecord("p0", m.PreferenceLevel.UNDESIRED, duty_instance_id=d.id)
        for d in inst.duty_instances[:11]
    )
    inst = inst.replace(preferences=prefs)
    found = [f for f in errors_of(inst) if f.code == "preference-cap"]
    assert len(found) == 1
    assert "cap is 10" in found[0].message

    ok = inst.replace(preferences=prefs[:10])
    assert not [f for f in errors_of(ok) if f.code == "preference-cap"]


def test_impossible_never_on_weekly_targets():
    inst = make_instance(
        duty_templates=[night_template()],
        weekly_sets=(m.WeeklySetDefinition("ws", duty_templates=frozenset({"N"})),),
        preferences=(
            m.PreferenceRecord("p0", m.PreferenceLevel.IMPOSSIBLE, weekly_set_id="ws", week_index=1),
        ),
    )
    assert any(f.code == "impossible-weekly" for f in errors_of(inst))


def test_preassignment_to_unqualified_physician_is_error():
    tpl = night_template(required_quals=frozenset({"icu"}))
    inst = make_instance(
        duty_templates=[tpl],
        qualifications=(m.Qualification("icu"),),
    )
    duty = inst.duty_instances[0]
    bad = m.DutyInstance(duty.id, duty.template_id, duty.date, duty.start_abs, duty.end_abs, "p0")
    inst = inst.replace(duty_instances=(bad,) + inst.duty_instances[1:])
    assert any(f.code == "preassignment-unqualified" for f in errors_of(inst))


def test_pool_bound_mix_and_singleton():
    inst = make_instance(duty_templates=[night_template()])
    duty_ids = frozenset(d.id for d in inst.duty_instances)
    bad = m.Pool(id="x", physicians=frozenset({"p0", "p1"}), duty_instances=duty_ids,
                 exact_count=2, max_duties=3)
    inst_bad = inst.replace(pools=(bad,))
    assert any(f.code == "pool-bounds" for f in errors_of(inst_bad))

    single = m.Pool(id="s", physicians=frozenset({"p0"}), duty_instances=duty_ids, max_duties=2)
    inst_warn = inst.replace(pools=(single,))
    warnings = [f for f in m.validate_instance(inst_warn) if f.severity == "warning"]
    assert any(f.code == "pool-singleton" for f in warnings)


def test_rest_rule_levels_must_exceed_mandatory():
    inst = make_instance(
        duty_templates=[night_template()],
        rest_rules=(m.RestRule("N", "N", 24.0, (m.RestLevel(12.0, 1.0),)),),
    )
    assert any(f.code == "rest-levels" for f in errors_of(inst))


def test_weekend_policy_validation():
    inst = make_instance(weekend_policy=m.WeekendPolicy(cons_we=0))
    assert any(f.code == "weekend-policy" for f in errors_of(inst))
    inst = make_instance(weekend_policy=m.WeekendPolicy(max_we=1, des_max_we=2))
    assert any(f.code == "weekend-policy" for f in errors_of(inst))


def test_week_indexing():
    period = make_period(start="2026-03-02", days=14)  # a Monday
    assert m.week_index_of(period, dt.date(2026, 3, 2)) == 1
    assert m.week_index_of(period, dt.date(2026, 3, 8)) == 1
    assert m.week_index_of(period, dt.date(2026, 3, 9)) == 2
    assert m.num_weeks(period) == 2


SYMBOL_ACCESSORS = {
    # Day/weekend calendar and its monthly scaling
    "days": lambda ctx: ctx["inst"].period.num_days,
    "weekends": lambda ctx: ctx["der"].calendar.weekends,
    "months": lambda ctx: ctx["der"].calendar.months,
    "weekends-of-month": lambda ctx: ctx["der"].calendar.months[0].weekend_indices,
    "saturday-fraction": lambda ctx: ctx["der"].calendar.months[0].we_factor,
    # Physician groups
    "physicians": lambda ctx: ctx["inst"].physicians,
    "manually-planned": lambda ctx: [p for p in ctx["inst"].physicians if p.planned_manually],
    "ward-members": lambda ctx: ctx["inst"].shift_templates[0].ward_members,
    "one-duty-weekenders": lambda ctx: [
        p for p in ctx["inst"].physicians if p.weekend_preference is m.WeekendPreferenceKind.ONE_DUTY
    ],
    "multi-duty-weekenders": lambda ctx: [
        p for p in ctx["inst"].physicians if p.weekend_preference is m.WeekendPreferenceKind.MULTIPLE_DUTIES
    ],
    "employment-volume": lambda ctx: ctx["inst"].physicians[0].employment_rate,
    "absence-days": lambda ctx: ctx["inst"].physicians[0].absences,
    # Duties and shifts
    "duties": lambda ctx: ctx["inst"].duty_instances,
    "mandatory-duties": lambda ctx: [
        d for d in ctx["inst"].duty_instances if ctx["inst"].duty_template(d.template_id).mandatory
    ],
    "manual-duties": lambda ctx: [d for d in ctx["inst"].duty_instances if d.pre_assigned],
    "duty-qualified": lambda ctx: ctx["der"].duty_quali,
    "duty-soft-qualified": lambda ctx: ctx["der"].duty_quali_soft,
    "duties-by-day": lambda ctx: ctx["der"].duties_by_day,
    "duties-by-weekend": lambda ctx: ctx["der"].duties_by_weekend,
    "duties-by-month": lambda ctx: ctx["der"].duties_by_month,
    "before-absence-duties": lambda ctx: [
        t for t in ctx["inst"].duty_templates if t.forbidden_before_absence
    ],
    "after-absence-duties": lambda ctx: [
        t for t in ctx["inst"].duty_templates if t.forbidden_after_absence
    ],
    "shifts": lambda ctx: ctx["inst"].shift_instances,
    "shift-qualified": lambda ctx: ctx["der"].shift_quali,
    "shift-soft-qualified": lambda ctx: ctx["der"].shift_quali_soft,
    "shifts-by-day": lambda ctx: ctx["der"].shifts_by_day,
    "manual-shifts": lambda ctx: [s for s in ctx["inst"].shift_instances if s.pre_assigned],
    "staffing-min": lambda ctx: ctx["inst"].shift_templates[0].min_staff,
    "staffing-desired": lambda ctx: ctx["inst"].shift_templates[0].desired_min_staff,
    "staffing-max": lambda ctx: ctx["inst"].shift_templates[0].max_staff,
    # Blocks
    "duty-blocks": lambda ctx: [b for b in ctx["inst"].blocks if b.kind is m.BlockKind.DUTY],
    "shift-blocks": lambda ctx: [b for b in ctx["inst"].blocks if b.kind is m.BlockKind.SHIFT],
    "closed-to-duties-blocks": lambda ctx: [b for b in ctx["inst"].blocks if not b.allow_extra_duties_inside],
    "closed-to-shifts-blocks": lambda ctx: [b for b in ctx["inst"].blocks if not b.allow_extra_shifts_inside],
    "free-days-after": lambda ctx: ctx["inst"].blocks[0].free_days_after if ctx["inst"].blocks else 0,
    "block-predecessor": lambda ctx: [b.consecutive_predecessor for b in ctx["inst"].blocks],
    "block-span": lambda ctx: [(b.members[0], b.members[-1]) for b in ctx["inst"].blocks],
    "consecutive-run-windows": lambda ctx: ctx["der"].consec_windows,
    "predecessor-block-physicians": lambda ctx: ctx["der"].carry.prev_block_physicians,
    # Rest conflicts and carryover
    "mandatory-conflicts": lambda ctx: ctx["der"].hard_conflicts,
    "desired-conflicts": lambda ctx: ctx["der"].soft_conflicts,
    "carryover-duty-exclusions": lambda ctx: ctx["der"].carry.r_duty,
    "carryover-shift-exclusions": lambda ctx: ctx["der"].carry.r_shift,
    "carryover-duty-soft": lambda ctx: ctx["der"].carry.r_duty_soft,
    "carryover-shift-soft": lambda ctx: ctx["der"].carry.r_shift_soft,
    "past-worked-weekends": lambda ctx: ctx["der"].carry.past_we,
    "boundary-duty-physician": lambda ctx: ctx["der"].carry.duty_prev_physician,
    "duty-predecessor": lambda ctx: ctx["der"].duty_prev,
    # Preferences
    "impossible-duties": lambda ctx: ctx["der"].impossible_duties,
    "impossible-shifts": lambda ctx: ctx["der"].impossible_shifts,
    "weekly-sets": lambda ctx: ctx["inst"].weekly_sets,
    # Pools
    "pools": lambda ctx: ctx["inst"].pools,
    "pool-physicians": lambda ctx: ctx["inst"].pools[0].physicians if ctx["inst"].pools else frozenset(),
    "pool-duties": lambda ctx: ctx["inst"].pools[0].duty_instances if ctx["inst"].pools else frozenset(),
    "pool-exact": lambda ctx: [p.exact_count for p in ctx["inst"].pools],
    "pool-max": lambda ctx: [p.max_duties for p in ctx["inst"].pools],
    "pool-desired-max": lambda ctx: [p.des_max_duties for p in ctx["inst"].pools],
    "pool-min": lambda ctx: [p.min_duties for p in ctx["inst"].pools],
    "pool-desired-min": lambda ctx: [p.des_min_duties for p in ctx["inst"].pools],
    "pool-simultaneity-cap": lambda ctx: [p.max_phy_per_day for p in ctx["inst"].pools],
    "pool-desired-simultaneity": lambda ctx: [p.des_max_phy_per_day for p in ctx["inst"].pools],
    "fair-targets": lambda ctx: ctx["der"].target_num,
    # Weekend policy
    "max-worked-weekends": lambda ctx: ctx["inst"].weekend_policy.max_we,
    "desired-max-worked-weekends": lambda ctx: ctx["inst"].weekend_policy.des_max_we,
    "min-free-weekends": lambda ctx: ctx["inst"].weekend_policy.min_free_we,
    "desired-min-free-weekends": lambda ctx: ctx["inst"].weekend_policy.des_min_free_we,
    "max-consecutive-weekends": lambda ctx: ctx["inst"].weekend_policy.cons_we,
}


def test_every_configuration_symbol_is_reachable():
    """Each documented model quantity has a concrete accessor."""
    from rosterer.derivation import derive
    from rosterer.scenarios import cardiology

    inst = cardiology(seed=0)
    ctx = {"inst": inst, "der": derive(inst)}
    for name, accessor in SYMBOL_ACCESSORS.items():
        value = accessor(ctx)
        assert value is not None or name in (
            "max-worked-weekends",
            "min-free-weekends",
        ), f"symbol {name} unreachable"
