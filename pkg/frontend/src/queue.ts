// Background submission queue: judgments submitted while offline are kept
// (at most once per task) and flushed when connectivity returns. A conflict
// response means the record is already stored server-side, so the entry is
// dropped rather than retried.

import { AnnotationClient, ApiError, OfflineError } from "./api.js";
import type { JudgmentPayload } from "./types.js";

export type QueueEvent =
  | { kind: "submitted"; taskId: string; recordId: number }
  | { kind: "queued"; taskId: string }
  | { kind: "conflict"; taskId: string; detail: string }
  | { kind: "rejected"; taskId: string; detail: string };

export class SubmissionQueue {
  private pending: JudgmentPayload[] = [];

  constructor(
    private client: AnnotationClient,
    private onEvent: (event: QueueEvent) => void = () => {},
  ) {}

  get pendingCount(): number {
    return this.pending.length;
  }

  /** Submit now if possible; queue on connectivity failure. Validation and
   *  conflict errors are surfaced, never retried. */
  async submit(payload: JudgmentPayload): Promise<boolean> {
    if (this.pending.some((p) => p.task_id === payload.task_id)) {
      return false; // already queued from this session
    }
    try {
      const result = await this.client.submitJudgment(payload);
      this.onEvent({ kind: "submitted", taskId: payload.task_id, recordId: result.record_id });
      return true;
    } catch (err) {
      if (err instanceof OfflineError) {
        this.pending.push(payload);
        this.onEvent({ kind: "queued", taskId: payload.task_id });
        return false;
      }
      if (err instanceof ApiError && err.status === 409) {
        this.onEvent({ kind: "conflict", taskId: payload.task_id, detail: err.detail });
        return false;
      }
      if (err instanceof ApiError) {
        this.onEvent({ kind: "rejected", taskId: payload.task_id, detail: err.detail });
        return false;
      }
      throw err;
    }
  }

  /** Try to deliver everything queued; stops at the first connectivity
   *  failure, keeping the remainder for the next flush. */
  async flush(): Promise<number> {
    let delivered = 0;
    while (this.pending.length > 0) {
      const payload = this.pending[0];
      try {
        const result = await this.client.submitJudgment(payload);
        this.onEvent({ kind: "submitted", taskId: payload.task_id, recordId: result.record_id });
        delivered += 1;
      } catch (err) {
        if (err instanceof OfflineError) {
          return delivered; // still offline; keep the queue intact
        }
        if (err instanceof ApiError && err.status === 409) {
          this.onEvent({ kind: "conflict", taskId: payload.task_id, detail: err.detail });
        } else if (err instanceof ApiError) {
          this.onEvent({ kind: "rejected", taskId: payload.task_id, detail: err.detail });
        } else {
          throw err;
        }
      }
      this.pending.shift();
    }
    return delivered;
  }
}
