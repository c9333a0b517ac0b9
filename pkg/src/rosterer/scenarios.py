"""Bundled demo scenarios and the random tiny-instance generator.

Three synthetic department replicas cover the breadth of the
configuration space: a night/weekend duty service with backup duties and
fairness pools, a block-heavy department with weekly duty and shift
blocks, and a surgery department with daily late/night duties, ward
interaction, and monthly weekend caps over a month-straddling period.
All data is generated from a seed; no real hospital data is embedded.
"""

from __future__ import annotations

import datetime as dt
import random

from . import model as m
from .derivation import instance_id, with_expanded_instances

_SURNAMES = (
    "Abel", "Brandt", "Clauss", "Dorn", "Ebert", "Falk", "Grimm", "Hartig",
    "Iversen", "Jahn", "Kaiser", "Lorenz", "Mader", "Nolte", "Oswald", "Pabst",
    "Quandt", "Rehm", "Seidel", "Thiele", "Unger", "Vogt", "Wenzel", "Xander",
    "Yilmaz", "Zander", "Arnold", "Binder", "Conrad", "Dietz", "Engel", "Frank",
    "Gerber", "Hummel", "Ilg", "Jost", "Kraus", "Lang", "Moser", "Neubert",
    "Odenwald", "Pfeifer", "Quast", "Richter", "Sauer", "Trautmann", "Ulrich",
    "Voss", "Weber", "Zorn",
)

ALL_WEEK = frozenset(range(7))
WEEKDAYS = frozenset(range(5))
WEEKEND = frozenset({5, 6})


def _t(text: str) -> int:
    return m.parse_time_of_day(text)


def _physician_ids(count: int) -> list[str]:
    return [f"p{i + 1:02d}" for i in range(count)]


def _absences(rng: random.Random, period: m.PlanningPeriod, max_days: int) -> frozenset[dt.date]:
    days = rng.randint(0, max_days)
    picks = rng.sample(range(1, period.num_days + 1), k=min(days, period.num_days))
    out = set()
    for day in picks:
        date = period.date_of(day)
        out.add(date)
        # Absences tend to come in small runs (vacations).
        if rng.random() < 0.5 and day < period.num_days:
            out.add(period.date_of(day + 1))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Scenario 1: internal medicine style


def internal_medicine(seed: int = 0, num_physicians: int = 35) -> m.RosterInstance:
    """Night/day duty service: daily nights, weekend day duties, backups,
    ward shifts behind qualifications, fairness and simultaneity pools."""
    rng = random.Random(f"im-{seed}")
    period = m.PlanningPeriod(dt.date(2026, 3, 1), dt.date(2026, 3, 31))
    wards = [f"W{i}" for i in range(1, 6)]
    quals = [m.Qualification("icu6m", "six months intensive care")] + [
        m.Qualification(wid, f"ward {wid} member") for wid in wards
    ] + [m.Qualification("no_duties", "excluded from duty service")]

    pids = _physician_ids(num_physicians)
    physicians = []
    for i, pid in enumerate(pids):
        rate = rng.choices([1.0, 0.8, 0.6], weights=[8, 1, 1])[0]
        qset = {wards[i % len(wards)]}
        if rng.random() < 0.6:
            qset.add("icu6m")
        if i >= num_physicians - 2:
            qset.add("no_duties")
        physicians.append(
            m.Physician(
                id=pid,
                name=f"Dr. {_SURNAMES[i % len(_SURNAMES)]}",
                employment_rate=rate,
                qualifications=frozenset(qset),
                absences=_absences(rng, period, 3),
            )
        )

    duty_kwargs = dict(
        mandatory=True,
        forbidden_before_absence=True,
        excluded_quals=frozenset({"no_duties"}),
    )
    duty_templates = (
        m.DutyTemplate(id="N1", label="night 1", weekdays=ALL_WEEK, start=_t("20:00"), end=_t("08:00"),
                       required_quals=frozenset({"icu6m"}), **duty_kwargs),
        m.DutyTemplate(id="N2", label="night 2", weekdays=ALL_WEEK, start=_t("20:00"), end=_t("08:00"), **duty_kwargs),
        m.DutyTemplate(id="D1", label="weekend day 1", weekdays=WEEKEND, holiday_rule=m.HolidayRule.ALSO,
                       start=_t("08:00"), end=_t("20:00"), **duty_kwargs),
        m.DutyTemplate(id="D2", label="weekend day 2", weekdays=WEEKEND, holiday_rule=m.HolidayRule.ALSO,
                       start=_t("08:00"), end=_t("20:00"), **duty_kwargs),
        m.DutyTemplate(id="BN1", label="backup night 1", weekdays=ALL_WEEK, start=_t("20:00"), end=_t("08:00"),
                       mandatory=False, forbidden_before_absence=True, excluded_quals=frozenset({"no_duties"})),
        m.DutyTemplate(id="BD1", label="backup weekend day", weekdays=WEEKEND, holiday_rule=m.HolidayRule.ALSO,
                       start=_t("08:00"), end=_t("20:00"), mandatory=False,
                       forbidden_before_absence=True, excluded_quals=frozenset({"no_duties"})),
    )
    regular = ("N1", "N2", "D1", "D2")
    backups = ("BN1", "BD1")

    shift_templates = tuple(
        m.ShiftTemplate(
            id=f"S{wid}",
            label=f"ward {wid}",
            weekdays=WEEKDAYS,
            start=_t("07:15"),
            end=_t("16:00"),
            min_staff=1,
            desired_min_staff=4,
            max_staff=12,
            required_quals=frozenset({wid}),
        )
        for wid in wards
    )

    rules = []
    all_duties = regular + backups
    for a in all_duties:
        for b in all_duties:
            levels = ()
            if a in ("N1", "N2") and b in ("N1", "N2"):
                levels = m.rest_levels(48.0, 72.0)
            rules.append(m.RestRule(a, b, 24.0, levels))
    for duty in regular:
        for wid in wards:
            rules.append(m.RestRule(duty, f"S{wid}", 11.0))
            rules.append(m.RestRule(f"S{wid}", duty, 4.5))

    inst = m.RosterInstance(
        id=f"internal-medicine-{seed}",
        label="internal medicine replica",
        period=period,
        qualifications=tuple(quals),
        physicians=tuple(physicians),
        duty_templates=duty_templates,
        shift_templates=shift_templates,
        rest_rules=tuple(rules),
        preference_policy=m.PreferencePolicy(
            {m.PreferenceLevel.UNDESIRED: 10, m.PreferenceLevel.IMPOSSIBLE: 3}
        ),
        weekend_policy=m.WeekendPolicy(cons_we=3),
        weights=m.WeightConfig(),
    )
    inst = with_expanded_instances(inst)

    regular_ids = sorted(d.id for d in inst.duty_instances if d.template_id in regular)
    backup_ids = sorted(d.id for d in inst.duty_instances if d.template_id in backups)
    night_ids = sorted(d.id for d in inst.duty_instances if d.template_id in ("N1", "N2"))
    sat_nights = sorted(
        d.id for d in inst.duty_instances if d.template_id in ("N1", "N2") and d.date.weekday() == 5
    )
    weekend_duty_ids = sorted(
        d.id for d in inst.duty_instances if d.template_id in regular and d.date.weekday() in (5, 6)
    )

    eligible = [p.id for p in physicians if "no_duties" not in p.qualifications]
    reduced = eligible[-2:]  # fixed low duty counts by contract
    fair_members = [pid for pid in eligible if pid not in reduced]
    section_a = [p.id for p in physicians if p.qualifications & {"W1", "W2"}]
    section_b = [p.id for p in physicians if p.qualifications & {"W3", "W4", "W5"}]

    pools = (
        m.Pool(
            id="fair-regular",
            label="fair share of regular duties",
            physicians=frozenset(fair_members),
            duty_instances=frozenset(regular_ids),
            fair_distribution=True,
        ),
        m.Pool(
            id="reduced-a",
            physicians=frozenset({reduced[0]}),
            duty_instances=frozenset(regular_ids),
            exact_count=2,
        ),
        m.Pool(
            id="reduced-b",
            physicians=frozenset({reduced[1]}),
            duty_instances=frozenset(regular_ids),
            exact_count=2,
        ),
        m.Pool(
            id="backup-cap",
            physicians=frozenset(eligible),
            duty_instances=frozenset(backup_ids),
            max_duties=4,
        ),
        m.Pool(
            id="sat-night-cap",
            physicians=frozenset(eligible),
            duty_instances=frozenset(sat_nights),
            max_duties=1,
        ),
        m.Pool(
            id="section-a-nights",
            physicians=frozenset(pid for pid in section_a if pid in eligible),
            duty_instances=frozenset(night_ids),
            max_phy_per_day=1,
        ),
        m.Pool(
            id="section-b-nights",
            physicians=frozenset(pid for pid in section_b if pid in eligible),
            duty_instances=frozenset(night_ids),
            max_phy_per_day=1,
        ),
        m.Pool(
            id="weekend-load",
            physicians=frozenset(fair_members),
            duty_instances=frozenset(weekend_duty_ids),
            des_max_duties=2,
        ),
    )

    prefs = []
    duty_ids = regular_ids + backup_ids
    for p in physicians:
        if "no_duties" in p.qualifications:
            continue
        for _ in range(rng.randint(0, 5)):
            level = rng.choices(
                [
                    m.PreferenceLevel.STRONGLY_DESIRED,
                    m.PreferenceLevel.DESIRED,
                    m.PreferenceLevel.UNDESIRED,
                    m.PreferenceLevel.IMPOSSIBLE,
                ],
                weights=[1, 3, 4, 1],
            )[0]
            prefs.append(m.PreferenceRecord(p.id, level, duty_instance_id=rng.choice(duty_ids)))
    prefs = _dedupe_prefs(prefs)

    carry_phys = eligible[0:2]
    prev_sat = period.start_date - dt.timedelta(days=1)
    carry = m.CarryoverState(
        lookback_days=4,
        assignments=tuple(
            m.CarryoverAssignment(
                physician_id=pid,
                kind="duty",
                template_id=tpl,
                date=prev_sat,
                start_abs=-4 * 60,
                end_abs=-4 * 60 + 12 * 60,
            )
            for pid, tpl in zip(carry_phys, ("N1", "N2"))
        ),
        past_we={carry_phys[0]: 1, carry_phys[1]: 1},
    )
    return inst.replace(pools=pools, preferences=tuple(prefs), carryover=carry)


def _dedupe_prefs(prefs: list[m.PreferenceRecord]) -> list[m.PreferenceRecord]:
    """One record per (physician, target); the first selection wins."""
    seen: set[tuple] = set()
    out = []
    for pref in prefs:
        key = (pref.physician_id, pref.duty_instance_id, pref.weekly_set_id, pref.week_index)
        if key not in seen:
            seen.add(key)
            out.append(pref)
    return out


# ---------------------------------------------------------------------------
# Scenario 2: cardiology style (blocks, weekly preferences, shortages)


def cardiology(seed: int = 0, scale: str = "standard") -> m.RosterInstance:
    """Block-heavy department: weekly duty/shift blocks, ICU/CPU
    qualifications, weekly preferences, weekend bounds, carryover chains.

    ``scale="full"`` raises the physician count and adds blanket desired
    rest times between all duty pairs, which is what drives model sizes
    comparable to a production month.
    """
    if scale not in ("standard", "full"):
        raise ValueError(f"unknown scale {scale!r}")
    full = scale == "full"
    rng = random.Random(f"cardio-{seed}-{scale}")
    period = m.PlanningPeriod(
        dt.date(2026, 4, 1),
        dt.date(2026, 4, 30),
        public_holidays=frozenset({dt.date(2026, 4, 3), dt.date(2026, 4, 6)}),
    )
    num_physicians = 30 if full else 16
    quals = (
        m.Qualification("icu", "intensive care"),
        m.Qualification("cpu", "chest pain unit"),
    )

    pids = _physician_ids(num_physicians)
    physicians = []
    for i, pid in enumerate(pids):
        qset = set()
        if rng.random() < 0.5:
            qset.add("icu")
        if rng.random() < 0.4:
            qset.add("cpu")
        manual = i == num_physicians - 1
        physicians.append(
            m.Physician(
                id=pid,
                name=f"Dr. {_SURNAMES[(i * 3 + 1) % len(_SURNAMES)]}",
                employment_rate=rng.choices([1.0, 0.8], weights=[4, 1])[0],
                qualifications=frozenset(qset),
                absences=frozenset() if manual else _absences(rng, period, 3),
                planned_manually=manual,
                weekend_preference=rng.choices(
                    [
                        m.WeekendPreferenceKind.NONE,
                        m.WeekendPreferenceKind.ONE_DUTY,
                        m.WeekendPreferenceKind.MULTIPLE_DUTIES,
                    ],
                    weights=[2, 1, 1],
                )[0],
            )
        )

    def duty(tid, label, weekdays, start, end, req=(), **kw):
        return m.DutyTemplate(
            id=tid, label=label, weekdays=weekdays, start=_t(start), end=_t(end),
            mandatory=False, required_quals=frozenset(req),
            holiday_rule=m.HolidayRule.ALSO if weekdays == ALL_WEEK else kw.pop("holiday_rule", None),
            **kw,
        )

    duty_templates = (
        duty("IMD", "intermediate", ALL_WEEK, "15:30", "00:00"),
        duty("NGT", "night", ALL_WEEK, "22:00", "08:00"),
        duty("ICU_E", "icu early", ALL_WEEK, "07:00", "15:30", req=("icu",)),
        duty("ICU_D", "icu day", ALL_WEEK, "10:00", "18:30", req=("icu",)),
        duty("ICU_L", "icu late", ALL_WEEK, "14:00", "22:30", req=("icu",)),
        duty("ICU_N", "icu night", ALL_WEEK, "21:30", "08:00", req=("icu",)),
        duty("CPU_E", "cpu early", ALL_WEEK, "07:00", "15:30", req=("cpu",)),
        duty("CPU_L", "cpu late", ALL_WEEK, "14:00", "22:30", req=("cpu",)),
        duty("CPU_N", "cpu night", ALL_WEEK, "21:30", "08:00", req=("cpu",)),
        duty("CPU_O", "cpu outpatient", WEEKDAYS, "08:00", "16:30", req=("cpu",), holiday_rule=m.HolidayRule.NEVER),
        duty("FUNC", "function", frozenset(range(4)), "08:00", "16:30", holiday_rule=m.HolidayRule.NEVER),
        duty("FSUP", "function support", WEEKDAYS, "08:00", "16:30", holiday_rule=m.HolidayRule.NEVER),
    )

    wards = ["WA", "WB", "WC"]
    shift_templates = tuple(
        m.ShiftTemplate(
            id=f"S{wid}",
            label=f"ward {wid}",
            weekdays=WEEKDAYS,
            holiday_rule=m.HolidayRule.NEVER,
            start=_t("07:30"),
            end=_t("16:00"),
            min_staff=0,
            desired_min_staff=2,
            max_staff=6,
            desired_quals=frozenset({"icu"}) if wid == "WA" else frozenset(),
        )
        for wid in wards
    )

    all_duty_ids = [t.id for t in duty_templates]
    rules = []
    for a in all_duty_ids:
        for b in all_duty_ids:
            levels = ()
            if a in ("NGT", "ICU_N", "CPU_N") and b in ("NGT", "ICU_N", "CPU_N"):
                levels = m.rest_levels(48.0)
            elif full:
                levels = (m.RestLevel(36.0, 2.0), m.RestLevel(60.0, 1.0))
            rules.append(m.RestRule(a, b, 11.0, levels))
    for d in all_duty_ids:
        for wid in wards:
            rules.append(m.RestRule(d, f"S{wid}", 11.0))
            rules.append(m.RestRule(f"S{wid}", d, 0.0))

    inst = m.RosterInstance(
        id=f"cardiology-{seed}" + ("-full" if full else ""),
        label="cardiology replica",
        period=period,
        qualifications=quals,
        physicians=tuple(physicians),
        duty_templates=duty_templates,
        shift_templates=shift_templates,
        rest_rules=tuple(rules),
        weekly_sets=(
            m.WeeklySetDefinition("wk-morning", "mornings", frozenset({"ICU_E", "CPU_E"}), frozenset({"SWA", "SWB", "SWC"})),
            m.WeeklySetDefinition("wk-day", "daytime", frozenset({"ICU_D", "CPU_O", "FUNC", "FSUP"}), frozenset()),
            m.WeeklySetDefinition("wk-evening", "evenings", frozenset({"IMD", "ICU_L", "CPU_L"}), frozenset()),
            m.WeeklySetDefinition("wk-night", "nights", frozenset({"NGT", "ICU_N", "CPU_N"}), frozenset()),
        ),
        preference_policy=m.PreferencePolicy(
            {m.PreferenceLevel.IMPOSSIBLE: 2, m.PreferenceLevel.UNDESIRED: 8}
        ),
        weekend_policy=m.WeekendPolicy(
            max_we=3, des_max_we=2, des_min_free_we=1, cons_we=2
        ),
    )
    inst = with_expanded_instances(inst)

    by_tpl_date = {(d.template_id, d.date): d for d in inst.duty_instances}
    shift_by_tpl_date = {(s.template_id, s.date): s for s in inst.shift_instances}

    # Weekly blocks on full in-period weeks (Monday through the span end).
    blocks: list[m.BlockDefinition] = []
    mondays = [
        period.date_of(day)
        for day in range(1, period.num_days + 1)
        if period.date_of(day).weekday() == 0 and period.contains(period.date_of(day) + dt.timedelta(days=5))
    ]
    icun_block_members: list[str] = []
    prev_ward_chain: dict[str, str] = {wid: f"co-{wid}-w0" for wid in wards}
    for week_no, monday in enumerate(mondays, start=1):
        func_members = [
            by_tpl_date[("FUNC", monday + dt.timedelta(days=k))].id
            for k in range(4)
            if ("FUNC", monday + dt.timedelta(days=k)) in by_tpl_date
        ]
        night_members = [
            by_tpl_date[("NGT", monday + dt.timedelta(days=k))].id
            for k in (4, 5)
            if ("NGT", monday + dt.timedelta(days=k)) in by_tpl_date
        ]
        if func_members and night_members:
            blocks.append(
                m.BlockDefinition(
                    id=f"func-w{week_no}",
                    kind=m.BlockKind.DUTY,
                    members=tuple(func_members + night_members),
                    allow_extra_duties_inside=False,
                    allow_extra_shifts_inside=True,
                )
            )
        icun_members = [
            by_tpl_date[("ICU_N", monday + dt.timedelta(days=k))].id
            for k in range(5)
            if ("ICU_N", monday + dt.timedelta(days=k)) in by_tpl_date
        ]
        if len(icun_members) == 5:
            blocks.append(
                m.BlockDefinition(
                    id=f"icun-w{week_no}",
                    kind=m.BlockKind.DUTY,
                    members=tuple(icun_members),
                    allow_extra_duties_inside=False,
                    allow_extra_shifts_inside=False,
                    free_days_after=2,
                )
            )
            icun_block_members.extend(icun_members)
        for wid in wards:
            members = [
                shift_by_tpl_date[(f"S{wid}", monday + dt.timedelta(days=k))].id
                for k in range(5)
                if (f"S{wid}", monday + dt.timedelta(days=k)) in shift_by_tpl_date
            ]
            if len(members) >= 4:
                blocks.append(
                    m.BlockDefinition(
                        id=f"{wid}-w{week_no}",
                        kind=m.BlockKind.SHIFT,
                        members=tuple(members),
                        consecutive_predecessor=prev_ward_chain[wid],
                        desired_consecutive_weight=1.0,
                        max_consecutive_run=3,
                    )
                )
                prev_ward_chain[wid] = f"{wid}-w{week_no}"

    manual = physicians[-1]
    duty_instances = list(inst.duty_instances)
    manual_targets = [d for d in duty_instances if d.template_id == "FSUP"][:3:2]
    for d in manual_targets:
        idx = duty_instances.index(d)
        duty_instances[idx] = m.DutyInstance(d.id, d.template_id, d.date, d.start_abs, d.end_abs, manual.id)

    icu_ids = sorted(d.id for d in inst.duty_instances if d.template_id.startswith("ICU"))
    cpu_ids = sorted(d.id for d in inst.duty_instances if d.template_id.startswith("CPU"))
    weekend_ids = sorted(
        d.id
        for d in inst.duty_instances
        if d.date.weekday() in (5, 6) or d.date in period.public_holidays
    )
    fsup_ids = sorted(d.id for d in inst.duty_instances if d.template_id == "FSUP")
    icu_members = [p.id for p in physicians if "icu" in p.qualifications and not p.planned_manually]
    cpu_members = [p.id for p in physicians if "cpu" in p.qualifications and not p.planned_manually]
    regular_members = [p.id for p in physicians if not p.planned_manually]
    new_icu = icu_members[: max(2, len(icu_members) // 4)]

    pools = (
        m.Pool(
            id="icu-fair",
            physicians=frozenset(icu_members),
            duty_instances=frozenset(icu_ids),
            fair_distribution=True,
        ),
        m.Pool(
            id="cpu-fair",
            physicians=frozenset(cpu_members),
            duty_instances=frozenset(cpu_ids),
            fair_distribution=True,
        ),
        m.Pool(
            id="weekend-fair",
            physicians=frozenset(regular_members),
            duty_instances=frozenset(weekend_ids),
            fair_distribution=True,
            des_max_duties=3,
        ),
        m.Pool(
            id="fsup-cap",
            physicians=frozenset(regular_members),
            duty_instances=frozenset(fsup_ids),
            max_duties=5,
        ),
        m.Pool(
            id="icun-block-cap",
            label="at most one ICU night week",
            physicians=frozenset(icu_members),
            duty_instances=frozenset(icun_block_members),
            des_max_duties=5,
        ),
        m.Pool(
            id="new-icu-day",
            physicians=frozenset(new_icu),
            duty_instances=frozenset(
                d.id for d in inst.duty_instances if d.template_id in ("ICU_E", "ICU_D")
            ),
            max_phy_per_day=1,
        ),
    )

    prefs: list[m.PreferenceRecord] = []
    weekend_duty_ids = weekend_ids
    n_weeks = m.num_weeks(period)
    for p in physicians:
        if p.planned_manually:
            continue
        for _ in range(rng.randint(0, 3)):
            level = rng.choices(
                [
                    m.PreferenceLevel.STRONGLY_DESIRED,
                    m.PreferenceLevel.DESIRED,
                    m.PreferenceLevel.UNDESIRED,
                    m.PreferenceLevel.IMPOSSIBLE,
                ],
                weights=[2, 2, 3, 1],
            )[0]
            prefs.append(m.PreferenceRecord(p.id, level, duty_instance_id=rng.choice(weekend_duty_ids)))
        for _ in range(rng.randint(0, 3)):
            prefs.append(
                m.PreferenceRecord(
                    p.id,
                    rng.choice(
                        [
                            m.PreferenceLevel.STRONGLY_DESIRED,
                            m.PreferenceLevel.DESIRED,
                            m.PreferenceLevel.UNDESIRED,
                        ]
                    ),
                    weekly_set_id=rng.choice(["wk-morning", "wk-day", "wk-evening", "wk-night"]),
                    week_index=rng.randint(1, n_weeks),
                )
            )
    prefs = _dedupe_prefs(prefs)

    # Carryover: an ICU night block ended on the last day of March, a ward
    # chain continues, and two physicians enter with worked weekends.
    co_phys = regular_members[:3]
    last_march = period.start_date - dt.timedelta(days=1)
    carry = m.CarryoverState(
        lookback_days=4,
        assignments=(
            m.CarryoverAssignment(co_phys[0], "duty", "ICU_N", last_march, -(2 * 60 + 30), -(2 * 60 + 30) + 630),
            m.CarryoverAssignment(co_phys[1], "duty", "NGT", last_march, -120, -120 + 600),
        ),
        past_we={co_phys[1]: 2},
        pending_free_days={co_phys[0]: 2},
        prev_block_assignments={
            "co-icun-w0": (co_phys[0],),
            **{f"co-{wid}-w0": (regular_members[3 + i],) for i, wid in enumerate(wards)},
        },
    )

    return inst.replace(
        duty_instances=tuple(duty_instances),
        blocks=tuple(blocks),
        pools=pools,
        preferences=tuple(prefs),
        carryover=carry,
    )


# ---------------------------------------------------------------------------
# Scenario 3: orthopedics/trauma style (late/night duties, ward interplay)


def orthopedics(seed: int = 0, num_physicians: int = 24) -> m.RosterInstance:
    """Daily late and night duties against permanent ward assignments over
    a month-straddling period, with hard monthly weekend caps scaled by
    the in-period Saturday fraction."""
    rng = random.Random(f"ortho-{seed}")
    # A Tuesday-to-mid-month span: two months, each with half its
    # Saturdays inside, so the scaled weekend caps actually round.
    period = m.PlanningPeriod(
        dt.date(2026, 3, 17),
        dt.date(2026, 4, 15),
        public_holidays=frozenset({dt.date(2026, 4, 3), dt.date(2026, 4, 6)}),
    )
    num_wards = max(2, num_physicians // 3)
    wards = [f"V{i}" for i in range(1, num_wards + 1)]
    quals = [
        m.Qualification("exp1", "resident"),
        m.Qualification("exp2", "advanced resident"),
        m.Qualification("exp3", "fellow"),
    ] + [m.Qualification(wid, f"ward {wid}") for wid in wards]

    pids = _physician_ids(num_physicians)
    physicians = []
    for i, pid in enumerate(pids):
        exp = {"exp1"}
        if i % 3 != 0:
            exp.add("exp2")
        if i % 3 == 2:
            exp.add("exp3")
        physicians.append(
            m.Physician(
                id=pid,
                name=f"Dr. {_SURNAMES[(i * 7 + 3) % len(_SURNAMES)]}",
                employment_rate=1.0,
                qualifications=frozenset(exp | {wards[i % num_wards]}),
                absences=_absences(rng, period, 2),
            )
        )

    def night(tid, req):
        return (
            m.DutyTemplate(id=tid, label=f"{tid} weekday", weekdays=WEEKDAYS,
                           holiday_rule=m.HolidayRule.NEVER, start=_t("16:30"), end=_t("07:30"),
                           mandatory=True, forbidden_before_absence=True,
                           required_quals=frozenset({req}), desired_consecutive=False),
            m.DutyTemplate(id=f"{tid}w", label=f"{tid} weekend", weekdays=WEEKEND,
                           holiday_rule=m.HolidayRule.ALSO, start=_t("08:00"), end=_t("07:30"),
                           mandatory=True, forbidden_before_absence=True,
                           required_quals=frozenset({req})),
        )

    duty_templates = (
        *night("K1", "exp3"),
        *night("K2", "exp2"),
        *night("K3", "exp1"),
        m.DutyTemplate(id="L", label="late weekday", weekdays=WEEKDAYS, holiday_rule=m.HolidayRule.NEVER,
                       start=_t("14:30"), end=_t("23:00"), mandatory=True,
                       forbidden_before_absence=True, desired_consecutive=True),
        m.DutyTemplate(id="Lw", label="late weekend", weekdays=WEEKEND, holiday_rule=m.HolidayRule.ALSO,
                       start=_t("13:30"), end=_t("22:00"), mandatory=True,
                       forbidden_before_absence=True, desired_consecutive=True),
    )

    shift_templates = tuple(
        m.ShiftTemplate(
            id=f"S{wid}",
            label=f"ward {wid}",
            weekdays=WEEKDAYS,
            holiday_rule=m.HolidayRule.NEVER,
            start=_t("07:15"),
            end=_t("16:00"),
            min_staff=0,
            desired_min_staff=2,
            max_staff=4,
            required_quals=frozenset({wid}),
        )
        for wid in wards
    )

    duty_ids = [t.id for t in duty_templates]
    night_ids = [t for t in duty_ids if t.startswith("K")]
    late_ids = [t for t in duty_ids if t.startswith("L")]
    rules = []
    for a in duty_ids:
        for b in duty_ids:
            if a in night_ids and b in night_ids:
                rules.append(m.RestRule(a, b, 24.0))
            else:
                rules.append(m.RestRule(a, b, 10.0))
    for wid in wards:
        sid = f"S{wid}"
        for d in night_ids:
            rules.append(m.RestRule(d, sid, 9.0))   # no ward work the morning after a night
            rules.append(m.RestRule(sid, d, 0.0))   # ward day before a night is fine
        for d in late_ids:
            rules.append(m.RestRule(d, sid, 8.0))   # late yesterday, ward today: allowed
            rules.append(m.RestRule(sid, d, 1.0))   # late duty pulls the physician off the ward

    inst = m.RosterInstance(
        id=f"orthopedics-{seed}",
        label="orthopedics/trauma replica",
        period=period,
        qualifications=tuple(quals),
        physicians=tuple(physicians),
        duty_templates=duty_templates,
        shift_templates=shift_templates,
        rest_rules=tuple(rules),
        preference_policy=m.PreferencePolicy({m.PreferenceLevel.UNDESIRED: 15}),
        weekend_policy=m.WeekendPolicy(max_we=2, des_max_we=1, cons_we=2),
    )
    inst = with_expanded_instances(inst)

    march_nights = sorted(
        d.id for d in inst.duty_instances if d.template_id.startswith("K") and d.date.month == 3
    )
    april_nights = sorted(
        d.id for d in inst.duty_instances if d.template_id.startswith("K") and d.date.month == 4
    )
    all_members = frozenset(p.id for p in physicians)
    pools = (
        m.Pool(id="nights-march", physicians=all_members, duty_instances=frozenset(march_nights),
               max_duties=4, des_max_duties=2),
        m.Pool(id="nights-april", physicians=all_members, duty_instances=frozenset(april_nights),
               max_duties=4, des_max_duties=2),
    )

    prefs = []
    all_duty_inst = sorted(d.id for d in inst.duty_instances)
    for p in physicians:
        for _ in range(rng.randint(0, 6)):
            prefs.append(
                m.PreferenceRecord(
                    p.id,
                    rng.choices(
                        [m.PreferenceLevel.DESIRED, m.PreferenceLevel.UNDESIRED],
                        weights=[1, 2],
                    )[0],
                    duty_instance_id=rng.choice(all_duty_inst),
                )
            )
    prefs = _dedupe_prefs(prefs)

    day_before = period.start_date - dt.timedelta(days=1)  # the Monday before
    carry_phys = [p.id for p in physicians[:3]]
    carry = m.CarryoverState(
        lookback_days=3,
        assignments=(
            m.CarryoverAssignment(carry_phys[0], "duty", "K1", day_before, -450, 450),
            m.CarryoverAssignment(carry_phys[1], "duty", "L", day_before, -570, -60),
        ),
        past_we={carry_phys[0]: 1, carry_phys[2]: 2},
    )
    return inst.replace(pools=pools, preferences=tuple(prefs), carryover=carry)


SCENARIOS = {
    "internal-medicine": internal_medicine,
    "cardiology": cardiology,
    "orthopedics": orthopedics,
}


def demo_instance(name: str, seed: int = 0, **kwargs) -> m.RosterInstance:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return factory(seed=seed, **kwargs)


# ---------------------------------------------------------------------------
# Random tiny instances for the oracle equivalence suite


def random_tiny_instance(seed: int) -> m.RosterInstance:
    """A small random instance drawing on every constraint family.

    Deterministic per seed; sized so that after forced fixings the model
    keeps few enough free assignment variables for exhaustive search.
    """
    rng = random.Random(f"tiny-{seed}")
    num_phys = rng.randint(2, 4)
    num_days = rng.randint(3, 6)
    budget = 24 // num_phys  # total instances allowed

    start = dt.date(2026, 3, 2) + dt.timedelta(days=rng.randint(0, 13))
    holidays = frozenset({start + dt.timedelta(days=rng.randrange(num_days))} if rng.random() < 0.3 else set())
    period = m.PlanningPeriod(start, start + dt.timedelta(days=num_days - 1), holidays)

    quals = [m.Qualification("qa"), m.Qualification("qb")]
    physicians = []
    for i in range(num_phys):
        qset = set()
        if rng.random() < 0.6:
            qset.add("qa")
        if rng.random() < 0.3:
            qset.add("qb")
        absences = frozenset(
            period.date_of(d)
            for d in rng.sample(range(1, num_days + 1), k=rng.randint(0, 1))
        )
        physicians.append(
            m.Physician(
                id=f"p{i}",
                employment_rate=rng.choice([1.0, 0.8, 0.6]),
                qualifications=frozenset(qset),
                absences=absences,
                weekend_preference=rng.choices(
                    [
                        m.WeekendPreferenceKind.NONE,
                        m.WeekendPreferenceKind.ONE_DUTY,
                        m.WeekendPreferenceKind.MULTIPLE_DUTIES,
                    ],
                    weights=[3, 1, 1],
                )[0],
            )
        )

    num_duty_tpl = rng.randint(1, 2)
    duty_templates = []
    for k in range(num_duty_tpl):
        weekdays = frozenset(rng.sample(range(7), k=rng.randint(3, 7)))
        start_min = rng.choice([8 * 60, 14 * 60, 20 * 60])
        end_min = (start_min + rng.choice([8, 10, 12]) * 60) % m.MINUTES_PER_DAY
        duty_templates.append(
            m.DutyTemplate(
                id=f"d{k}",
                weekdays=weekdays,
                start=start_min,
                end=end_min,
                mandatory=rng.random() < 0.5,
                forbidden_before_absence=rng.random() < 0.4,
                forbidden_after_absence=rng.random() < 0.3,
                desired_consecutive=rng.random() < 0.4,
                required_quals=frozenset({"qa"}) if rng.random() < 0.3 else frozenset(),
                undesired_quals=frozenset({"qb"}) if rng.random() < 0.3 else frozenset(),
            )
        )
    shift_templates = []
    if rng.random() < 0.6:
        shift_templates.append(
            m.ShiftTemplate(
                id="s0",
                weekdays=frozenset(rng.sample(range(7), k=rng.randint(2, 5))),
                start=7 * 60,
                end=15 * 60,
                min_staff=0,
                desired_min_staff=rng.randint(0, 1),
                max_staff=2,
                ward_members=frozenset(
                    p.id for p in rng.sample(physicians, k=rng.randint(max(1, num_phys - 2), num_phys))
                )
                if rng.random() < 0.5
                else frozenset(),
            )
        )

    all_tpl = [t.id for t in duty_templates] + [t.id for t in shift_templates]
    rules = []
    for a in all_tpl:
        for b in all_tpl:
            if rng.random() < 0.45:
                levels = []
                if rng.random() < 0.5:
                    base = rng.choice([24.0, 36.0])
                    levels = [m.RestLevel(base, 4.0)]
                    if rng.random() < 0.5:
                        levels.append(m.RestLevel(base + 24.0, 2.0))
                rules.append(
                    m.RestRule(a, b, rng.choice([-2.0, 0.0, 10.0, 12.0, 24.0]), tuple(levels))
                )

    inst = m.RosterInstance(
        id=f"tiny-{seed}",
        period=period,
        qualifications=tuple(quals),
        physicians=tuple(physicians),
        duty_templates=tuple(duty_templates),
        shift_templates=tuple(shift_templates),
        rest_rules=tuple(rules),
        weekend_policy=m.WeekendPolicy(
            max_we=rng.choice([None, 1, 2]),
            des_max_we=rng.choice([None, 1]),
            min_free_we=rng.choice([None, 1]) if rng.random() < 0.3 else None,
            des_min_free_we=rng.choice([None, 1]),
            cons_we=rng.choice([None, 1, 2]),
        ),
    )
    inst = with_expanded_instances(inst)

    # Trim instances to the enumeration budget, then rebuild dependents.
    duties = list(inst.duty_instances)[: max(2, budget - len(inst.shift_instances) // 2)]
    shifts = list(inst.shift_instances)[: max(0, budget - len(duties))]
    inst = inst.replace(duty_instances=tuple(duties), shift_instances=tuple(shifts))

    duty_ids = [d.id for d in duties]
    blocks = []
    if len(duty_ids) >= 3 and rng.random() < 0.4:
        k = rng.choice([2, 3])
        members = tuple(duty_ids[:k])
        blocks.append(
            m.BlockDefinition(
                id="blk0",
                kind=m.BlockKind.DUTY,
                members=members,
                allow_extra_duties_inside=rng.random() < 0.5,
                allow_extra_shifts_inside=rng.random() < 0.7,
                free_days_after=rng.randint(0, 1),
            )
        )
    shift_ids = [s.id for s in shifts]
    if len(shift_ids) >= 4 and rng.random() < 0.4:
        half = len(shift_ids) // 2
        blocks.append(
            m.BlockDefinition(id="sblk0", kind=m.BlockKind.SHIFT, members=tuple(shift_ids[:half]))
        )
        blocks.append(
            m.BlockDefinition(
                id="sblk1",
                kind=m.BlockKind.SHIFT,
                members=tuple(shift_ids[half:]),
                consecutive_predecessor="sblk0",
                desired_consecutive_weight=1.0,
                max_consecutive_run=1 if rng.random() < 0.5 else None,
            )
        )

    pools = []
    if duty_ids and rng.random() < 0.7:
        members = frozenset(p.id for p in rng.sample(physicians, k=rng.randint(2, num_phys)))
        kind = rng.randrange(4)
        subset = frozenset(rng.sample(duty_ids, k=rng.randint(1, len(duty_ids))))
        if kind == 0:
            pools.append(m.Pool(id="pool0", physicians=members, duty_instances=subset, fair_distribution=True,
                                des_max_duties=rng.choice([None, 2])))
        elif kind == 1:
            pools.append(m.Pool(id="pool0", physicians=members, duty_instances=subset,
                                max_duties=rng.randint(1, 3), des_min_duties=rng.choice([None, 1])))
        elif kind == 2:
            pools.append(m.Pool(id="pool0", physicians=members, duty_instances=subset,
                                exact_count=rng.randint(0, 1)))
        else:
            pools.append(m.Pool(id="pool0", physicians=members, duty_instances=subset,
                                max_phy_per_day=1, des_max_phy_per_day=1))

    prefs = []
    for p in physicians:
        for _ in range(rng.randint(0, 2)):
            if duty_ids:
                prefs.append(
                    m.PreferenceRecord(
                        p.id,
                        rng.choice(
                            [
                                m.PreferenceLevel.STRONGLY_DESIRED,
                                m.PreferenceLevel.DESIRED,
                                m.PreferenceLevel.UNDESIRED,
                                m.PreferenceLevel.IMPOSSIBLE,
                            ]
                        ),
                        duty_instance_id=rng.choice(duty_ids),
                    )
                )
    prefs = _dedupe_prefs(prefs)

    manual_duties: list[m.DutyInstance] = []
    if duty_ids and rng.random() < 0.3:
        cand = inst.duty_instances[rng.randrange(len(inst.duty_instances))]
        tpl = inst.duty_template(cand.template_id)
        for p in physicians:
            impossible = any(
                pr.physician_id == p.id and pr.duty_instance_id == cand.id and pr.level is m.PreferenceLevel.IMPOSSIBLE
                for pr in prefs
            )
            if m.is_hard_qualified(p, tpl) and cand.date not in p.absences and not impossible:
                manual_duties = [m.DutyInstance(cand.id, cand.template_id, cand.date, cand.start_abs, cand.end_abs, p.id)]
                break
    if manual_duties:
        new = [manual_duties[0] if d.id == manual_duties[0].id else d for d in inst.duty_instances]
        inst = inst.replace(duty_instances=tuple(new))

    carry = m.CarryoverState()
    if rng.random() < 0.4 and duty_templates:
        before = period.start_date - dt.timedelta(days=1)
        tpl = rng.choice(duty_templates)
        carry = m.CarryoverState(
            lookback_days=3,
            assignments=(
                m.CarryoverAssignment(
                    physicians[0].id, "duty", tpl.id, before,
                    -m.MINUTES_PER_DAY + tpl.start,
                    -m.MINUTES_PER_DAY + tpl.start + ((tpl.end - tpl.start) % m.MINUTES_PER_DAY or m.MINUTES_PER_DAY),
                ),
            ),
            past_we={physicians[0].id: rng.randint(0, 2)},
        )

    return inst.replace(
        blocks=tuple(blocks),
        pools=tuple(pools),
        preferences=tuple(prefs),
        carryover=carry,
    )
