/** Wire types for the studypilot JSON API (see docs/openapi.json). */

export interface CourseCard {
  course_id: string;
  title: string;
  topics: string[];
  description: string;
}

export interface Recommendation extends CourseCard {
  score: number;
}

export type Difficulty = "easy" | "medium" | "hard";

export interface LessonResource {
  kind: "video" | "reading" | "exercise";
  locator: string;
}

export interface Lesson {
  id: string;
  title: string;
  difficulty: Difficulty;
  resources: LessonResource[];
}

export interface SyllabusUnit {
  title: string;
  lessons: Lesson[];
}

export interface Syllabus {
  course_id: string;
  course_title: string;
  units: SyllabusUnit[];
}

export interface AvailabilityWindow {
  weekdays: string[];
  start: string; // "HH:MM"
  minutes: number;
}

export interface Profile {
  goals_text: string;
  availability: AvailabilityWindow[];
  segment_minutes: number;
  break_minutes: number;
  pace: "front_loaded" | "steady" | "back_loaded";
  path_preferences: string[];
  start_date: string;
}

export interface PlanSession {
  id: string;
  date: string; // "YYYY-MM-DD"
  start: string; // "HH:MM"
  end: string;
  kind: "study" | "break";
  lesson_id?: string;
  segment_ordinal?: number;
}

export interface Plan {
  course_id: string;
  revision: number;
  provenance: string;
  profile: Profile;
  sessions: PlanSession[];
}

export interface CalendarEvent {
  event_id: string;
  session_id: string;
  title: string;
  start: string; // "YYYY-MM-DDTHH:MM"
  end: string;
  kind: "study" | "break";
  lesson_id: string | null;
  editable: boolean;
}

export interface Warning {
  code: string;
  message: string;
  session_ids?: string[];
}

export interface PlanResponse {
  plan_id: string;
  provenance: string;
  plan: Plan;
  events: CalendarEvent[];
  warnings: Warning[];
}

export interface QuestionLogEntry {
  timestamp: string;
  query: string;
  answer_id?: string;
}

export interface LearnerState {
  course_id: string;
  completed_session_ids: string[];
  current_lesson_id: string | null;
  question_log: QuestionLogEntry[];
}

export interface Citation {
  lesson_id: string;
  start_s: number;
  end_s: number;
}

export interface TutorAnswer {
  kind: "answer";
  answer_id: string;
  relevant_lesson: string;
  body: string;
  citations: Citation[];
  provenance: "llm_composed" | "extractive";
}

export interface TutorNotCovered {
  kind: "not_covered";
  body: string;
  allowed_lessons: string[];
}

export type TutorReply = TutorAnswer | TutorNotCovered;

export interface IngestResponse {
  ingested: { lesson_id: string; segments: number; chunks: number }[];
  indexed_courses: string[];
}

/** One entry of a PATCH /plans/{id}/events request. */
export interface CalendarEdit {
  op: "move" | "add" | "delete";
  event_id?: string;
  new_start?: string; // ISO datetime
  payload?: { lesson_id: string; date: string; start: string; end?: string };
}

export interface ApiErrorBody {
  error: {
    code: string;
    message: string;
    violations?: Warning[];
  };
}
