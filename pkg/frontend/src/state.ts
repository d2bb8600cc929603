// View-state machine for one judgment task: answer tracking, submit gating,
// and the single-submission guard. Pure logic, no DOM.

import type { AnnotationTask, JudgmentPayload } from "./types.js";
import { qualityFromStep } from "./types.js";

export type BinaryKey = "q1" | "q2" | "q3" | "q4";

export interface TaskViewState {
  task: AnnotationTask;
  revealed: boolean; // judgment pane appears only after the left pane was read
  answers: Partial<Record<BinaryKey, boolean>>;
  qualityStep: number | null;
  submitted: boolean;
}

export function newTaskState(task: AnnotationTask): TaskViewState {
  return { task, revealed: false, answers: {}, qualityStep: null, submitted: false };
}

export function setAnswer(state: TaskViewState, key: BinaryKey, value: boolean): TaskViewState {
  return { ...state, answers: { ...state.answers, [key]: value } };
}

export function setQualityStep(state: TaskViewState, step: number): TaskViewState {
  qualityFromStep(step); // validates range
  return { ...state, qualityStep: step };
}

export function reveal(state: TaskViewState): TaskViewState {
  return { ...state, revealed: true };
}

export function allAnswered(state: TaskViewState): boolean {
  const keys: BinaryKey[] = ["q1", "q2", "q3", "q4"];
  return keys.every((k) => typeof state.answers[k] === "boolean") && state.qualityStep !== null;
}

/** Submit is enabled only when every one of the five controls is answered
 *  and this task was not already submitted from this session. */
export function canSubmit(state: TaskViewState): boolean {
  return state.revealed && allAnswered(state) && !state.submitted;
}

export function buildPayload(state: TaskViewState, annotatorId: string): JudgmentPayload {
  if (!allAnswered(state)) {
    throw new Error("cannot build a payload before all five dimensions are answered");
  }
  return {
    annotator_id: annotatorId,
    task_id: state.task.task_id,
    q1: state.answers.q1 as boolean,
    q2: state.answers.q2 as boolean,
    q3: state.answers.q3 as boolean,
    q4: state.answers.q4 as boolean,
    quality: qualityFromStep(state.qualityStep as number),
  };
}

export function markSubmitted(state: TaskViewState): TaskViewState {
  return { ...state, submitted: true };
}
