// Document and endpoint shapes shared with the rostering service.

export type Role = "planner" | "physician";

export type WeekendPreference = "one-duty" | "multiple-duties" | "none";

export type PreferenceLevel =
  | "strongly-desired"
  | "desired"
  | "indifferent"
  | "undesired"
  | "impossible";

export const DUTY_LEVELS: PreferenceLevel[] = [
  "strongly-desired",
  "desired",
  "indifferent",
  "undesired",
  "impossible",
];

// Weekly selections never offer "impossible".
export const WEEKLY_LEVELS: PreferenceLevel[] = [
  "strongly-desired",
  "desired",
  "indifferent",
  "undesired",
];

export interface Session {
  token: string;
  role: Role;
  physicianId?: string;
}

export interface PhysicianDoc {
  id: string;
  name: string;
  employment_rate: number;
  qualifications: string[];
  absences: string[];
  planned_manually: boolean;
  weekend_preference: "one-duty" | "multiple-duties" | "none";
}

export interface DutyTemplateDoc {
  id: string;
  label: string;
  weekdays: number[];
  start: string;
  end: string;
  mandatory: boolean;
}

export interface ShiftTemplateDoc {
  id: string;
  label: string;
  weekdays: number[];
  start: string;
  end: string;
  min_staff: number;
  desired_min_staff: number;
  max_staff: number;
}

export interface InstanceDoc {
  schema_version: number;
  kind: "roster-instance";
  id: string;
  label: string;
  period: {
    start_date: string;
    end_date: string;
    public_holidays: string[];
    weekend_threshold: string;
  };
  physicians: PhysicianDoc[];
  duty_templates: DutyTemplateDoc[];
  shift_templates: ShiftTemplateDoc[];
  duty_instances: DutyInstanceDoc[];
  shift_instances: ShiftInstanceDoc[];
  blocks: BlockDoc[];
  pools: PoolDoc[];
  weekly_sets: WeeklySetDoc[];
  preference_policy: { monthly_caps: Partial<Record<PreferenceLevel, number>> };
  weekend_policy: Record<string, number | null>;
}

export interface DutyInstanceDoc {
  id: string;
  template_id: string;
  date: string;
  start_abs: number;
  end_abs: number;
  pre_assigned: string | null;
}

export interface ShiftInstanceDoc {
  id: string;
  template_id: string;
  date: string;
  start_abs: number;
  end_abs: number;
  pre_assigned: string[];
}

export interface BlockDoc {
  id: string;
  kind: "duty-block" | "shift-block";
  members: string[];
  allow_extra_duties_inside: boolean;
  allow_extra_shifts_inside: boolean;
  free_days_after: number;
  consecutive_predecessor: string | null;
  max_consecutive_run: number | null;
}

export interface PoolDoc {
  id: string;
  label: string;
  physicians: string[];
  duty_instances: string[];
  fair_distribution: boolean;
  exact_count: number | null;
  max_duties: number | null;
  min_duties: number | null;
}

export interface WeeklySetDoc {
  id: string;
  label: string;
  duty_templates: string[];
  shift_templates: string[];
}

export interface PreferenceEntry {
  level: PreferenceLevel;
  duty_instance_id?: string | null;
  weekly_set_id?: string | null;
  week_index?: number | null;
}

export interface RemainingCaps {
  [level: string]: { cap: number; remaining_by_month: Record<string, number> };
}

export interface RosterDoc {
  instance_id: string;
  duty_assignments: Record<string, string>;
  shift_assignments: Record<string, string[]>;
  unassigned_duties: string[];
  objective: number;
  status: string;
}

export interface Finding {
  family: string;
  severity: "hard" | "soft";
  message: string;
  subjects: string[];
}

export interface RosterVersionRecord {
  instance_id: string;
  version: number;
  status: "draft" | "published";
  author: string;
  roster: RosterDoc;
  report: unknown;
  findings: Finding[];
  hard_count: number;
}

export interface JobRecord {
  job_id: string;
  instance_id: string;
  state: "queued" | "running" | "done" | "failed";
  roster_version?: number;
  objective?: number;
  hard_violations?: number;
  stage?: string;
  error?: string;
}
