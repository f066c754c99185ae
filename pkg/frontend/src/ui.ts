/** Framework-free DOM layer.
 *
 * One listener session per page: fetch the assignment named by the query
 * string, walk the screens in order starting at the first unsubmitted
 * one, and re-render per screen. Slider moves update state and the
 * numeric readout in place (no rebuild, so focus is kept). All rules
 * live in state.ts; this file only wires events to transitions.
 */

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type { Assignment, Screen } from "./types.js";
import {
  ScreenState,
  blockers,
  canSubmit,
  clampScore,
  completionCode,
  confirmRatings,
  initScreen,
  isComplete,
  markPlayed,
  markReferencePlayed,
  resumeIndex,
  setSlider,
  submissionPayload,
} from "./state.js";

const INSTRUCTIONS: Record<Assignment["aspect"], string> = {
  naturalness: "Rate how natural each sample sounds, from 0 (bad) to 100 (excellent).",
  speaker_similarity:
    "Rate how closely each sample's voice matches the reference, from 0 (different person) to 100 (same person).",
  accent_similarity:
    "Rate how well each sample carries the expected accent, from 0 (wrong accent) to 100 (native).",
};

type Attrs = Record<string, string>;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Attrs = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

function message(doc: Document, kind: string, text: string): HTMLElement {
  return el(doc, "p", { class: `notice ${kind}`, "data-role": `${kind}-message` }, [text]);
}

export class SessionView {
  private index: number;
  private state!: ScreenState;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: Api,
    private readonly assignment: Assignment,
  ) {
    this.index = resumeIndex(assignment.progress, assignment.screens.length);
  }

  start(): void {
    if (isComplete(this.index, this.assignment.screens.length)) {
      this.renderCompletion();
    } else {
      this.renderScreen();
    }
  }

  private screen(): Screen {
    return this.assignment.screens[this.index];
  }

  private renderScreen(): void {
    const doc = this.root.ownerDocument;
    const a = this.assignment;
    this.state = initScreen(this.screen(), a.default_slider);
    this.root.replaceChildren();

    const head = el(doc, "header", {}, [
      el(doc, "h1", {}, [`Listening test ${a.test_id}`]),
      el(doc, "p", { "data-role": "progress" }, [
        `Screen ${this.index + 1} of ${a.screens.length}`,
      ]),
      el(doc, "p", { class: "instructions" }, [INSTRUCTIONS[a.aspect]]),
    ]);
    this.root.append(head);

    if (a.show_reference && this.screen().reference_url) {
      this.root.append(this.referenceRow(doc));
    }

    const list = el(doc, "div", { class: "stimuli" });
    for (const stimulus of this.screen().stimuli) {
      list.append(this.stimulusRow(doc, stimulus.label, stimulus.audio_url));
    }
    this.root.append(list);

    const confirm = el(doc, "input", {
      type: "checkbox",
      id: "confirm-ratings",
      "data-role": "confirm",
    }) as HTMLInputElement;
    confirm.addEventListener("change", () => {
      if (confirm.checked) this.update(confirmRatings(this.state));
    });
    this.root.append(
      el(doc, "label", { class: "confirm", for: "confirm-ratings" }, [
        confirm,
        " the ratings are final as set",
      ]),
    );

    const submit = el(doc, "button", { "data-role": "submit", disabled: "" }, [
      "Submit screen",
    ]) as HTMLButtonElement;
    submit.addEventListener("click", () => void this.submit());
    this.root.append(
      el(doc, "div", { class: "actions" }, [
        submit,
        el(doc, "ul", { "data-role": "blockers", class: "blockers" }),
        el(doc, "div", { "data-role": "status" }),
      ]),
    );
    this.sync();
  }

  private referenceRow(doc: Document): HTMLElement {
    const audio = el(doc, "audio", {
      controls: "",
      preload: "none",
      src: this.screen().reference_url as string,
      "data-role": "reference-audio",
    });
    audio.addEventListener("play", () => this.update(markReferencePlayed(this.state)));
    return el(doc, "section", { class: "reference" }, [
      el(doc, "h2", {}, ["Reference"]),
      audio,
      el(doc, "span", { class: "played-flag", "data-role": "reference-played" }),
    ]);
  }

  private stimulusRow(doc: Document, label: string, url: string): HTMLElement {
    const audio = el(doc, "audio", {
      controls: "",
      preload: "none",
      src: url,
      "data-label": label,
    });
    audio.addEventListener("play", () => this.update(markPlayed(this.state, label)));

    const slider = el(doc, "input", {
      type: "range",
      min: "0",
      max: "100",
      step: "1",
      value: String(this.state.sliders[label]),
      "data-label": label,
      "aria-label": `score for sample ${label}`,
    }) as HTMLInputElement;
    const readout = el(doc, "input", {
      type: "number",
      min: "0",
      max: "100",
      step: "1",
      value: String(this.state.sliders[label]),
      "data-readout": label,
      "aria-label": `score for sample ${label}, numeric`,
    }) as HTMLInputElement;

    slider.addEventListener("input", () => {
      const next = setSlider(this.state, label, Number(slider.value));
      readout.value = String(next.sliders[label]);
      this.update(next);
    });
    readout.addEventListener("input", () => {
      const typed = Number(readout.value);
      if (readout.value === "" || !Number.isFinite(typed)) return;
      const next = setSlider(this.state, label, typed);
      slider.value = String(next.sliders[label]);
      this.update(next);
    });
    readout.addEventListener("change", () => {
      readout.value = String(this.state.sliders[label]);
    });

    return el(doc, "section", { class: "stimulus", "data-row": label }, [
      el(doc, "h2", {}, [`Sample ${label}`]),
      audio,
      el(doc, "span", { class: "played-flag", "data-played": label }),
      el(doc, "div", { class: "scoring" }, [slider, readout]),
    ]);
  }

  private update(next: ScreenState): void {
    this.state = next;
    this.sync();
  }

  /** Refresh gating indicators from state without rebuilding inputs. */
  private sync(): void {
    const doc = this.root.ownerDocument;
    for (const label of this.state.labels) {
      const flag = this.root.querySelector(`[data-played="${label}"]`);
      if (flag) flag.textContent = this.state.played[label] ? "played" : "not played yet";
    }
    const refFlag = this.root.querySelector(`[data-role="reference-played"]`);
    if (refFlag) {
      refFlag.textContent = this.state.referencePlayed ? "played" : "not played yet";
    }
    const list = this.root.querySelector(`[data-role="blockers"]`) as HTMLElement;
    list.replaceChildren(...blockers(this.state).map((b) => el(doc, "li", {}, [b])));
    const submit = this.root.querySelector(`[data-role="submit"]`) as HTMLButtonElement;
    submit.disabled = !canSubmit(this.state);
  }

  private async submit(): Promise<void> {
    if (!canSubmit(this.state)) return;
    const doc = this.root.ownerDocument;
    const status = this.root.querySelector(`[data-role="status"]`) as HTMLElement;
    const submit = this.root.querySelector(`[data-role="submit"]`) as HTMLButtonElement;
    submit.disabled = true;
    status.replaceChildren();
    try {
      // a duplicate means a previous attempt landed: advance either way
      await this.api.submitScreen(
        this.assignment.test_id,
        submissionPayload(this.state, this.assignment.listener_id),
      );
    } catch (err) {
      if (err instanceof ApiError && err.retryable) {
        const retry = el(doc, "button", { "data-role": "retry" }, ["Try again"]);
        retry.addEventListener("click", () => void this.submit());
        status.replaceChildren(message(doc, "retry", `not saved: ${err.message}`), retry);
        submit.disabled = !canSubmit(this.state);
        return;
      }
      status.replaceChildren(
        message(doc, "error", err instanceof Error ? err.message : String(err)),
      );
      return;
    }
    this.state = { ...this.state, submitted: true };
    this.index += 1;
    if (isComplete(this.index, this.assignment.screens.length)) {
      this.renderCompletion();
    } else {
      this.renderScreen();
    }
  }

  private renderCompletion(): void {
    const doc = this.root.ownerDocument;
    const a = this.assignment;
    this.root.replaceChildren(
      el(doc, "header", {}, [el(doc, "h1", {}, ["All screens submitted"])]),
      el(doc, "p", {}, [
        "Thank you. Give this completion code to the test organizer:",
      ]),
      el(doc, "p", { class: "code", "data-role": "completion-code" }, [
        completionCode(a.test_id, a.listener_id),
      ]),
    );
  }
}

export async function runApp(
  root: HTMLElement,
  api: Api,
  params: URLSearchParams,
): Promise<void> {
  const doc = root.ownerDocument;
  const testId = params.get("test");
  const listenerId = params.get("listener");
  if (!testId || !listenerId) {
    root.replaceChildren(
      message(
        doc,
        "error",
        "missing query parameters: open this page as ?test=<id>&listener=<your token>",
      ),
    );
    return;
  }
  let assignment: Assignment;
  try {
    assignment = await api.loadAssignment(testId, listenerId);
  } catch (err) {
    const text = err instanceof Error ? err.message : String(err);
    root.replaceChildren(message(doc, "error", text));
    return;
  }
  new SessionView(root, api, assignment).start();
}
