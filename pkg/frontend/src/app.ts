/**
 * DOM wiring: course picker → three onboarding questions → plan calendar
 * with drag-to-move, view switcher, warnings, iCal link, and tutor chat.
 */

import { ApiClient, ApiError } from "./api.js";
import { CalendarController, shiftTimestamp } from "./calendarController.js";
import { ChatPanel } from "./chat.js";
import { DIMENSION_PROMPTS, missingDimensions, planRequest } from "./dimensionForm.js";
import type { DimensionAnswers } from "./dimensionForm.js";
import { agendaView, dayView, monthView, weekView } from "./views.js";
import type { DayCell } from "./views.js";
import type { CalendarEvent, Syllabus, Warning } from "./types.js";

type ViewName = "month" | "week" | "day" | "agenda";

interface AppState {
  courseId: string | null;
  syllabus: Syllabus | null;
  controller: CalendarController | null;
  chat: ChatPanel | null;
  view: ViewName;
  focusDate: string | null;
}

const state: AppState = {
  courseId: null,
  syllabus: null,
  controller: null,
  chat: null,
  view: "month",
  focusDate: null,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function lessonTitles(syllabus: Syllabus): Map<string, string> {
  const titles = new Map<string, string>();
  for (const unit of syllabus.units) {
    for (const lesson of unit.lessons) titles.set(lesson.id, lesson.title);
  }
  return titles;
}

function clockOf(timestamp: string): string {
  return timestamp.split("T")[1] ?? "";
}

// ---------------------------------------------------------------- rendering

function renderWarnings(warnings: Warning[]): void {
  const box = must("warnings");
  box.replaceChildren();
  for (const warning of warnings) {
    const badge = el("span", "warning-badge", `${warning.code}: ${warning.message}`);
    box.appendChild(badge);
  }
}

function renderEventChip(event: CalendarEvent): HTMLElement {
  const chip = el("div", `event kind-${event.kind}`);
  chip.draggable = event.editable;
  chip.dataset.eventId = event.event_id;
  chip.appendChild(el("span", "event-time", clockOf(event.start)));
  chip.appendChild(el("span", "event-title", event.title));
  if (event.editable) {
    chip.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData("text/plain", event.event_id);
    });
    chip.addEventListener("click", () => promptMove(event));
  }
  return chip;
}

function renderDayCell(cell: DayCell): HTMLElement {
  const box = el("div", cell.inMonth ? "day-cell" : "day-cell outside");
  box.dataset.date = cell.date;
  box.appendChild(el("div", "day-label", cell.date.slice(8)));
  for (const event of cell.events) box.appendChild(renderEventChip(event));
  box.addEventListener("dragover", (ev) => ev.preventDefault());
  box.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const eventId = ev.dataTransfer?.getData("text/plain");
    if (eventId) dropOnDate(eventId, cell.date);
  });
  return box;
}

function renderCalendar(): void {
  const controller = state.controller;
  const grid = must("calendar");
  grid.replaceChildren();
  if (!controller) return;
  const events = controller.currentEvents;
  const focus = state.focusDate ?? events[0]?.start.split("T")[0] ?? "2025-01-01";

  if (state.view === "month") {
    const [year, month] = focus.split("-").map(Number);
    for (const week of monthView(events, year ?? 2025, month ?? 1)) {
      const row = el("div", "week-row");
      for (const cell of week) row.appendChild(renderDayCell(cell));
      grid.appendChild(row);
    }
  } else if (state.view === "week") {
    const row = el("div", "week-row");
    for (const cell of weekView(events, focus)) row.appendChild(renderDayCell(cell));
    grid.appendChild(row);
  } else if (state.view === "day") {
    const cell: DayCell = { date: focus, inMonth: true, events: dayView(events, focus) };
    grid.appendChild(renderDayCell(cell));
  } else {
    for (const group of agendaView(events)) {
      grid.appendChild(el("h3", "agenda-date", group.date));
      for (const event of group.events) grid.appendChild(renderEventChip(event));
    }
  }
  renderWarnings(controller.currentWarnings);
}

function renderChat(): void {
  const chat = state.chat;
  const log = must("chat-log");
  log.replaceChildren();
  if (!chat) return;
  for (const message of chat.messages) {
    const classes = message.notCovered ? `chat-${message.role} not-covered` : `chat-${message.role}`;
    const bubble = el("div", classes, message.body);
    for (const citation of message.citations) {
      bubble.appendChild(el("div", "citation", citation));
    }
    log.appendChild(bubble);
  }
  log.scrollTop = log.scrollHeight;
}

// ------------------------------------------------------------------ actions

async function promptMove(event: CalendarEvent): Promise<void> {
  const clock = window.prompt(`Move "${event.title}" to (HH:MM)`, clockOf(event.start));
  if (!clock) return;
  const date = event.start.split("T")[0];
  await applyMove(event.event_id, `${date}T${clock}`);
}

async function dropOnDate(eventId: string, date: string): Promise<void> {
  const controller = state.controller;
  if (!controller) return;
  const event = controller.currentEvents.find((e) => e.event_id === eventId);
  if (!event) return;
  await applyMove(eventId, `${date}T${clockOf(event.start)}`);
}

async function applyMove(eventId: string, newStart: string): Promise<void> {
  const controller = state.controller;
  if (!controller) return;
  const result = await controller.moveEvent(eventId, shiftTimestamp(newStart, 0));
  if (!result.ok) {
    const reasons = result.violations.map((v) => `${v.code}: ${v.message}`).join("\n");
    window.alert(`Move rejected:\n${reasons}`);
  }
}

async function pickCourse(api: ApiClient, courseId: string): Promise<void> {
  state.courseId = courseId;
  state.syllabus = await api.syllabus(courseId);
  const outline = must("syllabus");
  outline.replaceChildren();
  for (const unit of state.syllabus.units) {
    outline.appendChild(el("h3", "unit-title", unit.title));
    const list = el("ul");
    for (const lesson of unit.lessons) {
      list.appendChild(el("li", `difficulty-${lesson.difficulty}`, lesson.title));
    }
    outline.appendChild(list);
  }
  must("dimension-form").hidden = false;
}

async function submitDimensions(api: ApiClient): Promise<void> {
  if (!state.courseId || !state.syllabus) return;
  const answers: Partial<DimensionAnswers> = {
    time: (must("answer-time") as HTMLTextAreaElement).value,
    pace: (must("answer-pace") as HTMLTextAreaElement).value,
    path: (must("answer-path") as HTMLTextAreaElement).value,
  };
  const missing = missingDimensions(answers);
  const status = must("form-status");
  if (missing.length > 0) {
    status.textContent = `Please answer: ${missing.map((k) => DIMENSION_PROMPTS[k]).join(" ")}`;
    return;
  }
  status.textContent = "Building your plan…";
  try {
    const response = await api.createPlan(planRequest(state.courseId, answers as DimensionAnswers));
    status.textContent = "";
    state.controller = new CalendarController(api, response);
    state.controller.onEventsChanged(() => renderCalendar());
    state.chat = new ChatPanel(api, response.plan_id, lessonTitles(state.syllabus));
    state.focusDate = response.events[0]?.start.split("T")[0] ?? null;
    const ical = must("ical-link") as HTMLAnchorElement;
    ical.href = api.icalUrl(response.plan_id);
    ical.hidden = false;
    must("planner").hidden = false;
    renderCalendar();
  } catch (err) {
    status.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  }
}

async function sendChat(): Promise<void> {
  const chat = state.chat;
  const input = must("chat-input") as HTMLInputElement;
  if (!chat || !chat.canSend(input.value)) return;
  const query = input.value;
  input.value = "";
  await chat.send(query);
  renderChat();
}

// -------------------------------------------------------------------- setup

export async function start(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);

  const picker = must("course-picker") as HTMLSelectElement;
  const { courses } = await api.courses();
  for (const card of courses) {
    const option = el("option");
    option.value = card.course_id;
    option.textContent = card.title;
    picker.appendChild(option);
  }
  picker.addEventListener("change", () => {
    if (picker.value) void pickCourse(api, picker.value);
  });

  for (const key of ["time", "pace", "path"] as const) {
    must(`prompt-${key}`).textContent = DIMENSION_PROMPTS[key];
  }
  must("build-plan").addEventListener("click", () => void submitDimensions(api));

  for (const view of ["month", "week", "day", "agenda"] as ViewName[]) {
    must(`view-${view}`).addEventListener("click", () => {
      state.view = view;
      renderCalendar();
    });
  }

  must("chat-send").addEventListener("click", () => void sendChat());
  (must("chat-input") as HTMLInputElement).addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void sendChat();
  });
}

declare global {
  interface Window {
    STUDYPILOT_BASE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("course-picker")) {
  void start(window.STUDYPILOT_BASE_URL ?? "http://127.0.0.1:8500");
}
