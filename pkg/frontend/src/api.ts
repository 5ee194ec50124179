/** Thin typed client over the studypilot HTTP API. */

import type {
  ApiErrorBody,
  CalendarEdit,
  CourseCard,
  IngestResponse,
  LearnerState,
  PlanResponse,
  Recommendation,
  Syllabus,
  TutorReply,
  Warning,
} from "./types.js";

/** A non-2xx response, carrying the server's error code and any violations. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly violations: Warning[];

  constructor(status: number, code: string, message: string, violations: Warning[] = []) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.violations = violations;
  }
}

export type FetchFn = typeof fetch;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, fetchFn: FetchFn = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let code = "http_error";
      let message = `HTTP ${resp.status}`;
      let violations: Warning[] = [];
      try {
        const doc = (await resp.json()) as ApiErrorBody;
        if (doc && doc.error) {
          code = doc.error.code;
          message = doc.error.message;
          violations = doc.error.violations ?? [];
        }
      } catch {
        // Non-JSON error body: keep the generic message.
      }
      throw new ApiError(resp.status, code, message, violations);
    }
    return (await resp.json()) as T;
  }

  courses(topic?: string): Promise<{ courses: CourseCard[] }> {
    const query = topic ? `?topic=${encodeURIComponent(topic)}` : "";
    return this.request("GET", `/courses${query}`);
  }

  topics(): Promise<{ topics: string[] }> {
    return this.request("GET", "/courses/topics");
  }

  recommend(goalText: string, k = 5): Promise<{ results: Recommendation[] }> {
    return this.request("POST", "/courses/recommend", { goal_text: goalText, k });
  }

  syllabus(courseId: string): Promise<Syllabus> {
    return this.request("GET", `/courses/${encodeURIComponent(courseId)}/syllabus`);
  }

  createPlan(doc: {
    course_id: string;
    dimension_answers?: { time: string; pace: string; path: string };
    profile?: unknown;
    use_llm?: boolean;
    start_date?: string;
  }): Promise<PlanResponse> {
    return this.request("POST", "/plans", doc);
  }

  getPlan(planId: string): Promise<PlanResponse> {
    return this.request("GET", `/plans/${encodeURIComponent(planId)}`);
  }

  patchEvents(planId: string, edits: CalendarEdit[]): Promise<PlanResponse> {
    return this.request("PATCH", `/plans/${encodeURIComponent(planId)}/events`, { edits });
  }

  state(planId: string): Promise<LearnerState> {
    return this.request("GET", `/plans/${encodeURIComponent(planId)}/state`);
  }

  recordProgress(planId: string, sessionId: string): Promise<LearnerState> {
    return this.request("POST", "/progress", { plan_id: planId, session_id: sessionId });
  }

  ask(planId: string, query: string): Promise<TutorReply> {
    return this.request("POST", "/tutor/ask", { plan_id: planId, query });
  }

  ingestCourse(courseId: string): Promise<IngestResponse> {
    return this.request("POST", "/transcripts/ingest", { course_id: courseId });
  }

  /** URL for the plan's iCal export, suitable for a download link. */
  icalUrl(planId: string): string {
    return `${this.baseUrl}/plans/${encodeURIComponent(planId)}/ical`;
  }
}
