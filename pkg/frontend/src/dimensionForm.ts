/**
 * The three onboarding questions — when can you study, how do you want the
 * effort distributed, and what do you want to emphasize — answered in free
 * text and sent verbatim for the server to interpret.
 */

export interface DimensionAnswers {
  time: string;
  pace: string;
  path: string;
}

export const DIMENSION_PROMPTS: Record<keyof DimensionAnswers, string> = {
  time: "When can you study, and for how long?",
  pace: "How should the workload be spread out?",
  path: "Anything you want to focus on or skip?",
};

/** Names of the dimensions still missing a non-blank answer. */
export function missingDimensions(answers: Partial<DimensionAnswers>): (keyof DimensionAnswers)[] {
  const keys: (keyof DimensionAnswers)[] = ["time", "pace", "path"];
  return keys.filter((key) => !(answers[key] ?? "").trim());
}

/** Body for POST /plans once every dimension is answered. */
export function planRequest(
  courseId: string,
  answers: DimensionAnswers,
): { course_id: string; dimension_answers: DimensionAnswers } {
  const missing = missingDimensions(answers);
  if (missing.length > 0) throw new Error(`unanswered dimensions: ${missing.join(", ")}`);
  return {
    course_id: courseId,
    dimension_answers: {
      time: answers.time.trim(),
      pace: answers.pace.trim(),
      path: answers.path.trim(),
    },
  };
}
