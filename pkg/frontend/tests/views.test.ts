import { describe, expect, it } from "vitest";
import { agendaView, dayView, groupByDate, monthView, weekStart, weekView } from "../src/views.js";
import type { CalendarEvent } from "../src/types.js";

function event(id: string, start: string, end: string): CalendarEvent {
  return {
    event_id: id,
    session_id: `s-${id}`,
    title: id,
    start,
    end,
    kind: "study",
    lesson_id: "l",
    editable: true,
  };
}

const events = [
  event("b", "2025-01-01T18:50", "2025-01-01T19:30"),
  event("a", "2025-01-01T18:00", "2025-01-01T18:40"),
  event("c", "2025-01-02T18:00", "2025-01-02T18:40"),
  event("d", "2025-01-12T18:00", "2025-01-12T18:40"),
];

describe("groupByDate", () => {
  it("buckets by date and sorts within the day", () => {
    const groups = groupByDate(events);
    expect([...groups.keys()].sort()).toEqual(["2025-01-01", "2025-01-02", "2025-01-12"]);
    expect(groups.get("2025-01-01")!.map((e) => e.event_id)).toEqual(["a", "b"]);
  });
});

describe("weekStart", () => {
  it("finds the Monday of any weekday", () => {
    expect(weekStart("2025-01-01")).toBe("2024-12-30"); // Wednesday
    expect(weekStart("2024-12-30")).toBe("2024-12-30"); // Monday stays
    expect(weekStart("2025-01-05")).toBe("2024-12-30"); // Sunday belongs to the prior Monday
  });
});

describe("monthView", () => {
  it("covers January 2025 in Monday-first weeks with padding marked", () => {
    const weeks = monthView(events, 2025, 1);
    expect(weeks).toHaveLength(5);
    for (const week of weeks) expect(week).toHaveLength(7);
    expect(weeks[0]![0]).toMatchObject({ date: "2024-12-30", inMonth: false });
    expect(weeks[0]![2]).toMatchObject({ date: "2025-01-01", inMonth: true });
    expect(weeks[4]![6]).toMatchObject({ date: "2025-02-02", inMonth: false });
  });

  it("places events in their cells", () => {
    const weeks = monthView(events, 2025, 1);
    const jan1 = weeks[0]![2]!;
    expect(jan1.events.map((e) => e.event_id)).toEqual(["a", "b"]);
    const jan12 = weeks[1]![6]!;
    expect(jan12.date).toBe("2025-01-12");
    expect(jan12.events.map((e) => e.event_id)).toEqual(["d"]);
  });

  it("handles December's year boundary", () => {
    const weeks = monthView([], 2025, 12);
    const last = weeks[weeks.length - 1]!;
    expect(last[6]!.date >= "2025-12-31").toBe(true);
  });
});

describe("weekView", () => {
  it("returns the seven days around the focus date", () => {
    const days = weekView(events, "2025-01-01");
    expect(days.map((d) => d.date)).toEqual([
      "2024-12-30",
      "2024-12-31",
      "2025-01-01",
      "2025-01-02",
      "2025-01-03",
      "2025-01-04",
      "2025-01-05",
    ]);
    expect(days[2]!.events).toHaveLength(2);
    expect(days[3]!.events).toHaveLength(1);
    expect(days[4]!.events).toHaveLength(0);
  });
});

describe("dayView", () => {
  it("returns a sorted single day, empty for quiet days", () => {
    expect(dayView(events, "2025-01-01").map((e) => e.event_id)).toEqual(["a", "b"]);
    expect(dayView(events, "2025-01-07")).toEqual([]);
  });
});

describe("agendaView", () => {
  it("lists only non-empty days in date order", () => {
    const groups = agendaView(events);
    expect(groups.map((g) => g.date)).toEqual(["2025-01-01", "2025-01-02", "2025-01-12"]);
    expect(groups[0]!.events.map((e) => e.event_id)).toEqual(["a", "b"]);
  });

  it("is empty with no events", () => {
    expect(agendaView([])).toEqual([]);
  });
});
