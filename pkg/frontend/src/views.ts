/**
 * Pure derivations from the event list to what each calendar view renders.
 * No scheduling logic lives here — the server owns the plan; these only
 * group and slice what it sent.
 */

import type { CalendarEvent } from "./types.js";

export interface DayCell {
  date: string; // "YYYY-MM-DD"
  inMonth: boolean;
  events: CalendarEvent[];
}

export interface AgendaGroup {
  date: string;
  events: CalendarEvent[];
}

function dateOf(event: CalendarEvent): string {
  return event.start.split("T")[0]!;
}

function byStart(a: CalendarEvent, b: CalendarEvent): number {
  return a.start < b.start ? -1 : a.start > b.start ? 1 : 0;
}

/** Events grouped by date, each day's list sorted by start time. */
export function groupByDate(events: CalendarEvent[]): Map<string, CalendarEvent[]> {
  const groups = new Map<string, CalendarEvent[]>();
  for (const event of [...events].sort(byStart)) {
    const date = dateOf(event);
    const bucket = groups.get(date);
    if (bucket) bucket.push(event);
    else groups.set(date, [event]);
  }
  return groups;
}

function isoDate(d: Date): string {
  return d.toISOString().slice(0, 10);
}

function addDays(date: string, days: number): string {
  const d = new Date(`${date}T00:00:00Z`);
  d.setUTCDate(d.getUTCDate() + days);
  return isoDate(d);
}

/** Monday of the week containing `date`. */
export function weekStart(date: string): string {
  const d = new Date(`${date}T00:00:00Z`);
  const weekday = (d.getUTCDay() + 6) % 7; // Monday = 0
  return addDays(date, -weekday);
}

/**
 * A month grid: full weeks (Monday-first) covering the month, so the
 * first and last rows may include out-of-month padding cells.
 */
export function monthView(events: CalendarEvent[], year: number, month: number): DayCell[][] {
  const groups = groupByDate(events);
  const first = `${year}-${String(month).padStart(2, "0")}-01`;
  const firstOfNext = month === 12 ? `${year + 1}-01-01` : `${year}-${String(month + 1).padStart(2, "0")}-01`;
  const weeks: DayCell[][] = [];
  let cursor = weekStart(first);
  while (cursor < firstOfNext) {
    const week: DayCell[] = [];
    for (let i = 0; i < 7; i++) {
      const date = addDays(cursor, i);
      week.push({
        date,
        inMonth: date >= first && date < firstOfNext,
        events: groups.get(date) ?? [],
      });
    }
    weeks.push(week);
    cursor = addDays(cursor, 7);
  }
  return weeks;
}

/** Seven consecutive days starting at the Monday of `date`'s week. */
export function weekView(events: CalendarEvent[], date: string): DayCell[] {
  const groups = groupByDate(events);
  const start = weekStart(date);
  const days: DayCell[] = [];
  for (let i = 0; i < 7; i++) {
    const day = addDays(start, i);
    days.push({ date: day, inMonth: true, events: groups.get(day) ?? [] });
  }
  return days;
}

/** A single day's events, sorted by start. */
export function dayView(events: CalendarEvent[], date: string): CalendarEvent[] {
  return groupByDate(events).get(date) ?? [];
}

/** Every non-empty day in order — the linear "agenda" listing. */
export function agendaView(events: CalendarEvent[]): AgendaGroup[] {
  return [...groupByDate(events).entries()]
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([date, dayEvents]) => ({ date, events: dayEvents }));
}
