import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

type Call = { url: string; init?: RequestInit };

function mockFetch(routes: Record<string, (init?: RequestInit) => { status: number; body: unknown }>) {
  const calls: Call[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const key = `${init?.method ?? "GET"} ${url}`;
    const route = routes[key];
    if (!route) throw new Error(`no mock for ${key}`);
    const { status, body } = route(init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("api client", () => {
  it("logs in and sends the bearer token afterwards", async () => {
    const { impl, calls } = mockFetch({
      "POST /api/auth/login": () => ({ status: 200, body: { token: "tok-1", role: "physician", physician_id: "p0" } }),
      "GET /api/instances": () => ({ status: 200, body: [] }),
    });
    const api = new ApiClient("", impl);
    const session = await api.login("physician", "p0");
    expect(session.physicianId).toBe("p0");
    await api.listInstances();
    const headers = calls[1]!.init!.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer tok-1");
  });

  it("surfaces the server's cap rejection verbatim", async () => {
    const detail = "physician 'p0' selected 'undesired' 11 times in 2026-03 (cap is 10 per month)";
    const { impl } = mockFetch({
      "POST /api/instances/cap-demo/preferences": () => ({ status: 400, body: { detail } }),
    });
    const api = new ApiClient("", impl);
    const error = await api
      .submitPreferences("cap-demo", "p0", [{ level: "undesired", duty_instance_id: "N@2026-03-02" }])
      .catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(400);
    expect(error.message).toBe(detail);
  });

  it("carries findings on a rejected publish", async () => {
    const { impl } = mockFetch({
      "POST /api/instances/cap-demo/roster/2/publish": () => ({
        status: 409,
        body: {
          detail: {
            message: "roster version 2 has 1 hard violation(s) and cannot be published",
            findings: [{ family: "14-rest-hard", severity: "hard", message: "clash", subjects: [] }],
          },
        },
      }),
    });
    const api = new ApiClient("", impl);
    const error = await api.publishRoster("cap-demo", 2).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(409);
    expect(error.findings).toHaveLength(1);
    expect(error.findings[0].family).toBe("14-rest-hard");
  });

  it("sends the weekend toggle alongside preference entries", async () => {
    const { impl, calls } = mockFetch({
      "POST /api/instances/cap-demo/preferences": () => ({
        status: 200,
        body: { physician_id: "p0", version: 2, remaining_caps: {} },
      }),
    });
    const api = new ApiClient("", impl);
    await api.submitPreferences("cap-demo", "p0", [], 1, "one-duty");
    const sent = JSON.parse(calls[0]!.init!.body as string);
    expect(sent.weekend_preference).toBe("one-duty");
    expect(sent.expected_version).toBe(1);
  });

  it("polls a job to completion", async () => {
    let polls = 0;
    const { impl } = mockFetch({
      "GET /api/jobs/j1": () => {
        polls += 1;
        return polls < 3
          ? { status: 200, body: { job_id: "j1", instance_id: "x", state: "running" } }
          : { status: 200, body: { job_id: "j1", instance_id: "x", state: "done", roster_version: 4 } };
      },
    });
    const api = new ApiClient("", impl);
    const job = await api.pollJob("j1", 1);
    expect(job.state).toBe("done");
    expect(job.roster_version).toBe(4);
    expect(polls).toBe(3);
  });

  it("builds the calendar export url", () => {
    const api = new ApiClient("https://dept.example");
    expect(api.calendarUrl("cap-demo", "p0")).toBe(
      "https://dept.example/api/instances/cap-demo/calendar/p0.ics",
    );
  });
});
