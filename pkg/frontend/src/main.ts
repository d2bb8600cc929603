import { AnnotationClient } from "./api.js";
import { SubmissionQueue } from "./queue.js";
import { AppContext, runFlow } from "./ui.js";

function annotatorIdFromUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("annotator") ?? `anon-${Math.random().toString(36).slice(2, 10)}`;
}

export function bootstrap(root: HTMLElement, baseUrl = ""): AppContext {
  const client = new AnnotationClient(baseUrl);
  const queue = new SubmissionQueue(client);
  const ctx: AppContext = {
    root,
    client,
    queue,
    annotatorId: annotatorIdFromUrl(),
    completed: 0,
  };
  window.addEventListener("online", () => void queue.flush());
  void runFlow(ctx);
  return ctx;
}

const mount = document.getElementById("app");
if (mount) {
  bootstrap(mount);
}
