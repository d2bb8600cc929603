import { describe, expect, it } from "vitest";

import { AnnotationClient, ApiError, OfflineError } from "../src/api.js";
import { QueueEvent, SubmissionQueue } from "../src/queue.js";
import type { JudgmentPayload } from "../src/types.js";

function payload(taskId: string): JudgmentPayload {
  return { annotator_id: "w1", task_id: taskId, q1: true, q2: false, q3: false, q4: true, quality: 0.5 };
}

/** Client stub whose submitJudgment behavior is scripted per call. */
function scriptedClient(script: Array<"ok" | "offline" | "conflict" | "invalid">) {
  let call = 0;
  const client = new AnnotationClient("", (() => {}) as unknown as typeof fetch);
  client.submitJudgment = async () => {
    const action = script[Math.min(call, script.length - 1)];
    call += 1;
    if (action === "offline") throw new OfflineError("network down");
    if (action === "conflict") throw new ApiError(409, "already judged");
    if (action === "invalid") throw new ApiError(422, "bad payload");
    return { record_id: call };
  };
  return client;
}

describe("submission queue", () => {
  it("delivers immediately when online", async () => {
    const events: QueueEvent[] = [];
    const queue = new SubmissionQueue(scriptedClient(["ok"]), (e) => events.push(e));
    expect(await queue.submit(payload("t1"))).toBe(true);
    expect(queue.pendingCount).toBe(0);
    expect(events[0].kind).toBe("submitted");
  });

  it("queues on connectivity failure and flushes on reconnect", async () => {
    const events: QueueEvent[] = [];
    const queue = new SubmissionQueue(scriptedClient(["offline", "offline", "ok", "ok"]), (e) =>
      events.push(e),
    );
    expect(await queue.submit(payload("t1"))).toBe(false);
    expect(await queue.submit(payload("t2"))).toBe(false);
    expect(queue.pendingCount).toBe(2);
    const delivered = await queue.flush();
    expect(delivered).toBe(2);
    expect(queue.pendingCount).toBe(0);
    expect(events.map((e) => e.kind)).toEqual(["queued", "queued", "submitted", "submitted"]);
  });

  it("keeps the queue when still offline at flush time", async () => {
    const queue = new SubmissionQueue(scriptedClient(["offline"]));
    await queue.submit(payload("t1"));
    expect(await queue.flush()).toBe(0);
    expect(queue.pendingCount).toBe(1);
  });

  it("never queues the same task twice", async () => {
    const queue = new SubmissionQueue(scriptedClient(["offline"]));
    await queue.submit(payload("t1"));
    await queue.submit(payload("t1"));
    expect(queue.pendingCount).toBe(1);
  });

  it("drops conflicting entries instead of retrying them", async () => {
    const events: QueueEvent[] = [];
    const queue = new SubmissionQueue(scriptedClient(["offline", "conflict"]), (e) => events.push(e));
    await queue.submit(payload("t1"));
    expect(await queue.flush()).toBe(0);
    expect(queue.pendingCount).toBe(0);
    expect(events.at(-1)?.kind).toBe("conflict");
  });

  it("surfaces validation rejections", async () => {
    const events: QueueEvent[] = [];
    const queue = new SubmissionQueue(scriptedClient(["invalid"]), (e) => events.push(e));
    expect(await queue.submit(payload("t1"))).toBe(false);
    expect(events[0].kind).toBe("rejected");
  });
});
