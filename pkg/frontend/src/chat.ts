/** Tutor chat: message log plus citation formatting. */

import { ApiClient } from "./api.js";
import type { TutorReply } from "./types.js";

export interface ChatMessage {
  role: "user" | "tutor";
  body: string;
  citations: string[]; // already formatted for display
  notCovered: boolean; // render "come back later" replies distinctly
}

/** 125 -> "2:05". Chat timestamps never reach an hour. */
export function formatTimestamp(seconds: number): string {
  const whole = Math.floor(seconds);
  const m = Math.floor(whole / 60);
  const s = whole % 60;
  return `${m}:${String(s).padStart(2, "0")}`;
}

/** "Refraction of seismic waves @ 0:40" — title falls back to the lesson id. */
export function formatCitation(
  citation: { lesson_id: string; start_s: number },
  lessonTitles: Map<string, string>,
): string {
  const title = lessonTitles.get(citation.lesson_id) ?? citation.lesson_id;
  return `${title} @ ${formatTimestamp(citation.start_s)}`;
}

export class ChatPanel {
  private readonly api: ApiClient;
  private readonly planId: string;
  private readonly lessonTitles: Map<string, string>;
  readonly messages: ChatMessage[] = [];

  constructor(api: ApiClient, planId: string, lessonTitles: Map<string, string>) {
    this.api = api;
    this.planId = planId;
    this.lessonTitles = lessonTitles;
  }

  canSend(query: string): boolean {
    return query.trim().length > 0;
  }

  async send(query: string): Promise<TutorReply> {
    if (!this.canSend(query)) throw new Error("empty query");
    this.messages.push({ role: "user", body: query, citations: [], notCovered: false });
    const reply = await this.api.ask(this.planId, query);
    this.messages.push(this.toMessage(reply));
    return reply;
  }

  private toMessage(reply: TutorReply): ChatMessage {
    if (reply.kind === "not_covered") {
      return { role: "tutor", body: reply.body, citations: [], notCovered: true };
    }
    return {
      role: "tutor",
      body: reply.body,
      citations: reply.citations.map((c) => formatCitation(c, this.lessonTitles)),
      notCovered: false,
    };
  }
}
