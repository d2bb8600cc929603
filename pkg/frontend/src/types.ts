// Wire types mirroring the annotation service API. Field names must stay in
// lockstep with the service's JudgmentRecord JSONL schema.

export type Phase = "qualification" | "main";

export interface AnnotationTask {
  task_id: string;
  summary_id: string;
  claim: string;
  article_text: string;
  generated_explanation: string;
  phase: Phase;
}

export interface TaskResponse {
  phase: Phase;
  tasks: AnnotationTask[];
}

export interface JudgmentPayload {
  annotator_id: string;
  task_id: string;
  q1: boolean; // article contradiction
  q2: boolean; // self contradiction
  q3: boolean; // hallucination
  q4: boolean; // convincingness
  quality: number; // [0, 1]
}

export interface QualificationAnswer {
  task_id: string;
  q1: boolean;
  q2: boolean;
  q3: boolean;
  q4: boolean;
  quality: number | null;
}

export interface JudgmentRow {
  record_id: number;
  summary_id: string;
  annotator_id: string;
  q1: boolean;
  q2: boolean;
  q3: boolean;
  q4: boolean;
  quality: number;
  ts: string;
}

export interface Progress {
  total_summaries: number;
  total_judgments: number;
  fully_annotated: number;
  annotator?: {
    annotator_id: string;
    qualified: boolean;
    completed_count: number;
    judgments: JudgmentRow[];
  };
}

export const BINARY_QUESTIONS: { key: "q1" | "q2" | "q3" | "q4"; label: string }[] = [
  { key: "q1", label: "Does the explanation contradict the article?" },
  { key: "q2", label: "Does the explanation contradict itself?" },
  { key: "q3", label: "Does the explanation add facts not present in the article?" },
  { key: "q4", label: "Is the explanation convincing?" },
];

// 5-step rating slider mapped linearly onto [0, 1]
export const QUALITY_STEPS = 5;

export function qualityFromStep(step: number): number {
  if (!Number.isInteger(step) || step < 0 || step >= QUALITY_STEPS) {
    throw new Error(`slider step out of range: ${step}`);
  }
  return step / (QUALITY_STEPS - 1);
}
