// DOM rendering for the annotation workbench: a two-pane task view (claim
// and article left, judgment controls right, revealed after reading) plus
// the batched qualification flow.

import { AnnotationClient } from "./api.js";
import { SubmissionQueue } from "./queue.js";
import {
  BinaryKey,
  TaskViewState,
  buildPayload,
  canSubmit,
  markSubmitted,
  newTaskState,
  reveal,
  setAnswer,
  setQualityStep,
} from "./state.js";
import {
  AnnotationTask,
  BINARY_QUESTIONS,
  QUALITY_STEPS,
  QualificationAnswer,
  qualityFromStep,
} from "./types.js";

export interface AppContext {
  root: HTMLElement;
  client: AnnotationClient;
  queue: SubmissionQueue;
  annotatorId: string;
  completed: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function banner(root: HTMLElement, message: string, cls: string) {
  const note = el("div", { class: `banner ${cls}`, role: "status" }, message);
  root.prepend(note);
}

export function renderDone(ctx: AppContext) {
  ctx.root.innerHTML = "";
  ctx.root.append(
    el("h2", {}, "All done"),
    el("p", { class: "progress" }, `You completed ${ctx.completed} judgments. Thank you!`),
  );
}

export function renderError(ctx: AppContext, message: string, retry: () => void) {
  ctx.root.innerHTML = "";
  const button = el("button", { class: "retry" }, "Retry");
  button.addEventListener("click", retry);
  ctx.root.append(el("div", { class: "banner error" }, message), button);
}

// --- main task -------------------------------------------------------------

export function renderTask(ctx: AppContext, task: AnnotationTask, onDone: () => void) {
  let state: TaskViewState = newTaskState(task);
  ctx.root.innerHTML = "";

  const layout = el("div", { class: "layout" });
  const left = el("section", { class: "pane reading" });
  const right = el("section", { class: "pane judgment hidden" });
  layout.append(left, right);
  ctx.root.append(layout);

  // left pane: claim, scrollable article, generated explanation
  left.append(el("h2", {}, "Claim"), el("p", { class: "claim" }, task.claim));
  const article = el("div", { class: "article", style: "overflow-y: auto; max-height: 60vh" });
  for (const para of task.article_text.split("\n")) {
    article.append(el("p", {}, para));
  }
  left.append(el("h3", {}, "Fact-check article"), article);
  left.append(
    el("h3", {}, "Generated explanation"),
    el("blockquote", { class: "explanation" }, task.generated_explanation),
  );
  const revealButton = el("button", { class: "reveal" }, "I have read the claim and explanation");
  left.append(revealButton);

  // right pane: four binary questions, the rating slider, submit
  const form = el("form", { class: "judgment-form" });
  const submit = el("button", { class: "submit", type: "submit", disabled: "" }, "Submit judgment");

  const sync = () => {
    if (canSubmit(state)) submit.removeAttribute("disabled");
    else submit.setAttribute("disabled", "");
  };

  for (const question of BINARY_QUESTIONS) {
    const row = el("fieldset", { class: `question ${question.key}` });
    row.append(el("legend", {}, question.label));
    for (const value of [true, false]) {
      const label = el("label", {}, value ? "yes" : "no");
      const input = el("input", {
        type: "radio",
        name: question.key,
        value: String(value),
      });
      input.addEventListener("change", () => {
        state = setAnswer(state, question.key as BinaryKey, value);
        sync();
      });
      label.prepend(input);
      row.append(label);
    }
    form.append(row);
  }

  const sliderRow = el("fieldset", { class: "question quality" });
  sliderRow.append(el("legend", {}, "Overall quality"));
  const slider = el("input", {
    type: "range",
    name: "quality",
    min: "0",
    max: String(QUALITY_STEPS - 1),
    step: "1",
    value: "0",
    "data-touched": "false",
  });
  const sliderValue = el("output", {}, "unrated");
  slider.addEventListener("input", () => {
    state = setQualityStep(state, Number(slider.value));
    slider.setAttribute("data-touched", "true");
    sliderValue.textContent = qualityFromStep(Number(slider.value)).toFixed(2);
    sync();
  });
  sliderRow.append(slider, sliderValue);
  form.append(sliderRow, submit);
  right.append(el("h2", {}, "Your judgment"), form);

  const pending = ctx.queue.pendingCount > 0 ? ` (${ctx.queue.pendingCount} pending sync)` : "";
  const progress = el(
    "p",
    { class: "progress" },
    `${ctx.completed} judgments completed this session${pending}`,
  );
  ctx.root.append(progress);

  revealButton.addEventListener("click", (event) => {
    event.preventDefault();
    state = reveal(state);
    right.classList.remove("hidden");
    revealButton.setAttribute("disabled", "");
    sync();
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!canSubmit(state)) return;
    const payload = buildPayload(state, ctx.annotatorId);
    state = markSubmitted(state);
    sync();
    void ctx.queue.submit(payload).then((delivered) => {
      if (delivered) {
        ctx.completed += 1;
        onDone();
      } else if (ctx.queue.pendingCount > 0) {
        banner(ctx.root, "Saved locally; will sync when back online.", "pending");
        ctx.completed += 1;
        onDone();
      } else {
        banner(ctx.root, "This task was already submitted.", "conflict");
        onDone();
      }
    });
  });
}

// --- qualification ----------------------------------------------------------

export function renderQualification(
  ctx: AppContext,
  tasks: AnnotationTask[],
  onDone: (qualified: boolean) => void,
) {
  const answers: QualificationAnswer[] = [];
  let index = 0;

  const step = () => {
    if (index >= tasks.length) {
      void ctx.client.qualify(ctx.annotatorId, answers).then((qualified) => {
        ctx.root.innerHTML = "";
        banner(ctx.root, qualified ? "You are qualified." : "Qualification not passed.", "qual");
        onDone(qualified);
      });
      return;
    }
    const task = tasks[index];
    renderTaskForm(ctx, task, `Qualification ${index + 1} of ${tasks.length}`, (answer) => {
      answers.push(answer);
      index += 1;
      step();
    });
  };
  step();
}

function renderTaskForm(
  ctx: AppContext,
  task: AnnotationTask,
  heading: string,
  onAnswer: (answer: QualificationAnswer) => void,
) {
  let state: TaskViewState = reveal(newTaskState(task));
  ctx.root.innerHTML = "";
  ctx.root.append(el("h2", {}, heading), el("p", { class: "claim" }, task.claim));
  const article = el("div", { class: "article" });
  for (const para of task.article_text.split("\n")) article.append(el("p", {}, para));
  ctx.root.append(article, el("blockquote", { class: "explanation" }, task.generated_explanation));

  const form = el("form", { class: "judgment-form qualification" });
  const next = el("button", { type: "submit", disabled: "" }, "Next");
  const sync = () => {
    if (canSubmit(state)) next.removeAttribute("disabled");
    else next.setAttribute("disabled", "");
  };
  for (const question of BINARY_QUESTIONS) {
    const row = el("fieldset", { class: `question ${question.key}` });
    row.append(el("legend", {}, question.label));
    for (const value of [true, false]) {
      const label = el("label", {}, value ? "yes" : "no");
      const input = el("input", { type: "radio", name: question.key, value: String(value) });
      input.addEventListener("change", () => {
        state = setAnswer(state, question.key as BinaryKey, value);
        sync();
      });
      label.prepend(input);
      row.append(label);
    }
    form.append(row);
  }
  const slider = el("input", {
    type: "range", name: "quality", min: "0", max: String(QUALITY_STEPS - 1), step: "1", value: "0",
  });
  slider.addEventListener("input", () => {
    state = setQualityStep(state, Number(slider.value));
    sync();
  });
  const sliderRow = el("fieldset", { class: "question quality" });
  sliderRow.append(el("legend", {}, "Overall quality"), slider);
  form.append(sliderRow, next);
  ctx.root.append(form);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!canSubmit(state)) return;
    const payload = buildPayload(state, ctx.annotatorId);
    onAnswer({
      task_id: task.task_id,
      q1: payload.q1,
      q2: payload.q2,
      q3: payload.q3,
      q4: payload.q4,
      quality: payload.quality,
    });
  });
}

// --- top-level flow ------------------------------------------------------------

export async function runFlow(ctx: AppContext): Promise<void> {
  let batch;
  try {
    batch = await ctx.client.nextTask(ctx.annotatorId);
  } catch (err) {
    renderError(ctx, `Could not reach the annotation service: ${err}`, () => void runFlow(ctx));
    return;
  }
  if (batch === null) {
    renderDone(ctx);
    return;
  }
  if (batch.phase === "qualification") {
    renderQualification(ctx, batch.tasks, (qualified) => {
      if (qualified) void runFlow(ctx);
      else renderDone(ctx);
    });
    return;
  }
  renderTask(ctx, batch.tasks[0], () => void runFlow(ctx));
}
