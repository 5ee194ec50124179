/**
 * Keeps the rendered calendar in sync with the server's plan.
 *
 * Every drag turns into exactly one PATCH. While the request is in flight
 * the move is applied optimistically; on success the server's event list
 * replaces ours wholesale (it is authoritative — a move can shift warnings
 * or renumber nothing we can predict), and on a conflict (409) the events
 * snap back to the last server-confirmed snapshot.
 */

import { ApiClient, ApiError } from "./api.js";
import type { CalendarEvent, PlanResponse, Warning } from "./types.js";

export interface MoveResult {
  ok: boolean;
  warnings: Warning[];
  violations: Warning[];
}

export type EventsListener = (events: CalendarEvent[]) => void;

/** Add `minutes` to a "YYYY-MM-DDTHH:MM" timestamp, staying within the day's clock. */
export function shiftTimestamp(start: string, minutes: number): string {
  const [datePart, clockPart] = start.split("T");
  if (!datePart || !clockPart) throw new Error(`bad timestamp: ${start}`);
  const [h, m] = clockPart.split(":").map(Number);
  const total = (h ?? 0) * 60 + (m ?? 0) + minutes;
  const hh = String(Math.floor(total / 60) % 24).padStart(2, "0");
  const mm = String(total % 60).padStart(2, "0");
  return `${datePart}T${hh}:${mm}`;
}

function durationMinutes(event: CalendarEvent): number {
  const clock = (ts: string): number => {
    const [h, m] = ts.split("T")[1]!.split(":").map(Number);
    return (h ?? 0) * 60 + (m ?? 0);
  };
  return clock(event.end) - clock(event.start);
}

export class CalendarController {
  private readonly api: ApiClient;
  private readonly planId: string;
  private events: CalendarEvent[];
  private confirmed: CalendarEvent[];
  private revision: number;
  private warnings: Warning[];
  private queue: Promise<unknown> = Promise.resolve();
  private readonly listeners: EventsListener[] = [];

  constructor(api: ApiClient, plan: PlanResponse) {
    this.api = api;
    this.planId = plan.plan_id;
    this.events = plan.events;
    this.confirmed = plan.events;
    this.revision = plan.plan.revision;
    this.warnings = plan.warnings;
  }

  get planIdValue(): string {
    return this.planId;
  }

  get currentEvents(): CalendarEvent[] {
    return this.events;
  }

  get currentRevision(): number {
    return this.revision;
  }

  get currentWarnings(): Warning[] {
    return this.warnings;
  }

  onEventsChanged(listener: EventsListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.events);
  }

  private accept(response: PlanResponse): void {
    this.events = response.events;
    this.confirmed = response.events;
    this.revision = response.plan.revision;
    this.warnings = response.warnings;
    this.notify();
  }

  /**
   * Move one event to a new start time. Resolves after the server has
   * either confirmed the move or rejected it; concurrent calls run one
   * at a time so each PATCH sees the previous one's outcome.
   *
   * The ref is resolved to a session id up front: event ids are scoped to
   * a plan revision, so an id captured at drag time goes stale the moment
   * an earlier queued move is accepted. Session ids survive revisions and
   * the server accepts them as event refs.
   */
  moveEvent(eventId: string, newStart: string): Promise<MoveResult> {
    const target = this.events.find((e) => e.event_id === eventId || e.session_id === eventId);
    if (!target) return Promise.reject(new Error(`no such event: ${eventId}`));
    if (!target.editable) {
      return Promise.resolve({
        ok: false,
        warnings: [],
        violations: [{ code: "not_editable", message: "event is not editable" }],
      });
    }
    const sessionId = target.session_id;
    const run = this.queue.then(() => this.performMove(sessionId, newStart));
    // Keep the queue alive even when a move rejects.
    this.queue = run.catch(() => undefined);
    return run;
  }

  private async performMove(sessionId: string, newStart: string): Promise<MoveResult> {
    const target = this.events.find((e) => e.session_id === sessionId);
    if (!target) throw new Error(`session disappeared: ${sessionId}`);

    // Optimistic apply so the drag doesn't visibly bounce while in flight.
    const minutes = durationMinutes(target);
    this.events = this.events.map((e) =>
      e.session_id === sessionId ? { ...e, start: newStart, end: shiftTimestamp(newStart, minutes) } : e,
    );
    this.notify();

    try {
      const response = await this.api.patchEvents(this.planId, [
        { op: "move", event_id: sessionId, new_start: newStart },
      ]);
      this.accept(response);
      return { ok: true, warnings: response.warnings, violations: [] };
    } catch (err) {
      // Snap back to the last state the server confirmed.
      this.events = this.confirmed;
      this.notify();
      if (err instanceof ApiError && err.status === 409) {
        return { ok: false, warnings: [], violations: err.violations };
      }
      throw err;
    }
  }

  /** Re-fetch the plan, e.g. after progress was recorded elsewhere. */
  async refresh(): Promise<void> {
    const response = await this.api.getPlan(this.planId);
    this.accept(response);
  }
}
