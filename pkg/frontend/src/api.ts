// Typed client for the rostering REST API. The server stays the single
// authority; every mutation round-trips and errors are surfaced verbatim.

import type {
  Finding,
  InstanceDoc,
  JobRecord,
  PreferenceEntry,
  RemainingCaps,
  Role,
  RosterVersionRecord,
  Session,
  WeekendPreference,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public findings: Finding[] = [],
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private session: Session | null = null;

  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  get currentSession(): Session | null {
    return this.session;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.session) headers["Authorization"] = `Bearer ${this.session.token}`;
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let message = `${resp.status}`;
      let findings: Finding[] = [];
      try {
        const payload = await resp.json();
        const detail = payload.detail ?? payload;
        if (typeof detail === "string") {
          message = detail;
        } else if (detail && typeof detail === "object") {
          message = detail.message ?? JSON.stringify(detail);
          findings = detail.findings ?? [];
        }
      } catch {
        /* non-JSON error body: keep the status text */
      }
      throw new ApiError(resp.status, message, findings);
    }
    return (await resp.json()) as T;
  }

  async login(role: Role, physicianId?: string): Promise<Session> {
    const body = await this.request<{ token: string; role: Role; physician_id?: string }>(
      "POST",
      "/api/auth/login",
      { role, physician_id: physicianId },
    );
    this.session = { token: body.token, role: body.role, physicianId: body.physician_id ?? physicianId };
    return this.session;
  }

  logout(): void {
    this.session = null;
  }

  listInstances() {
    return this.request<{ id: string; version: number; label: string }[]>("GET", "/api/instances");
  }

  getInstance(id: string) {
    return this.request<{ version: number; instance: InstanceDoc }>("GET", `/api/instances/${id}`);
  }

  getPreferences(instanceId: string, physicianId: string) {
    return this.request<{
      physician_id: string;
      version: number;
      entries: PreferenceEntry[];
      remaining_caps: RemainingCaps;
      weekend_preference: WeekendPreference;
    }>("GET", `/api/instances/${instanceId}/preferences/${physicianId}`);
  }

  submitPreferences(
    instanceId: string,
    physicianId: string,
    entries: PreferenceEntry[],
    expectedVersion?: number,
    weekendPreference?: WeekendPreference,
  ) {
    return this.request<{ physician_id: string; version: number; remaining_caps: RemainingCaps }>(
      "POST",
      `/api/instances/${instanceId}/preferences`,
      {
        physician_id: physicianId,
        entries,
        expected_version: expectedVersion,
        weekend_preference: weekendPreference,
      },
    );
  }

  putSectionItem(
    instanceId: string,
    section: string,
    itemId: string,
    item: Record<string, unknown>,
    version: number,
  ) {
    return this.request<{ id: string; version: number; section: string; item_id: string }>(
      "PUT",
      `/api/instances/${instanceId}/${section}/${itemId}`,
      { version, item },
    );
  }

  solve(instanceId: string, options: { gap?: number; time_limit?: number; backend?: string } = {}) {
    return this.request<{ job_id: string; state: string }>(
      "POST",
      `/api/instances/${instanceId}/solve`,
      options,
    );
  }

  getJob(jobId: string) {
    return this.request<JobRecord>("GET", `/api/jobs/${jobId}`);
  }

  async pollJob(jobId: string, intervalMs = 500, timeoutMs = 15 * 60 * 1000): Promise<JobRecord> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done" || job.state === "failed") return job;
      if (Date.now() > deadline) throw new ApiError(408, "solve job timed out");
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  getRoster(instanceId: string, version?: number) {
    const suffix = version === undefined ? "" : `?version=${version}`;
    return this.request<RosterVersionRecord>("GET", `/api/instances/${instanceId}/roster${suffix}`);
  }

  listRosterVersions(instanceId: string) {
    return this.request<{ version: number; status: string; hard_count: number }[]>(
      "GET",
      `/api/instances/${instanceId}/roster-versions`,
    );
  }

  adjustRoster(instanceId: string, version: number, duties: Record<string, string | null>) {
    return this.request<{
      version: number;
      hard_findings: Finding[];
      objective: number;
      publishable: boolean;
    }>("POST", `/api/instances/${instanceId}/roster/${version}/adjust`, { duties });
  }

  publishRoster(instanceId: string, version: number) {
    return this.request<{ instance_id: string; published_version: number }>(
      "POST",
      `/api/instances/${instanceId}/roster/${version}/publish`,
    );
  }

  calendarUrl(instanceId: string, physicianId: string): string {
    return `${this.baseUrl}/api/instances/${instanceId}/calendar/${physicianId}.ics`;
  }
}
