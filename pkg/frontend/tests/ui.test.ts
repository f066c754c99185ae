import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import type { Api, SubmitResult } from "../src/api.js";
import { completionCode } from "../src/state.js";
import type { Assignment, ScreenPayload } from "../src/types.js";
import { runApp } from "../src/ui.js";
import { fire, makePage, q, qa, until } from "./dom.js";

function assignment(overrides: Partial<Assignment> = {}): Assignment {
  const screens = ["utt1", "utt2"].map((utt) => ({
    utterance_id: utt,
    stimuli: ["A", "B", "C"].map((label) => ({
      label,
      audio_url: `/tests/demo/audio/${utt}-${label}`,
    })),
    reference_url: null,
  }));
  return {
    test_id: "demo",
    listener_id: "l1",
    aspect: "naturalness",
    show_reference: false,
    default_slider: 40,
    screens,
    progress: 0,
    ...overrides,
  };
}

interface FakeApi extends Api {
  submissions: ScreenPayload[];
}

function fakeApi(view: Assignment, failures = 0): FakeApi {
  let remainingFailures = failures;
  const submissions: ScreenPayload[] = [];
  return {
    submissions,
    async loadAssignment() {
      return view;
    },
    async submitScreen(_testId, payload) {
      if (remainingFailures > 0) {
        remainingFailures -= 1;
        throw new ApiError("cannot reach the test service", null, true);
      }
      submissions.push(payload);
      return "stored" as SubmitResult;
    },
  };
}

const PARAMS = new URLSearchParams("test=demo&listener=l1");

function playAll(page: ReturnType<typeof makePage>): void {
  for (const audio of qa(page.root, "audio[data-label]")) fire(page, audio, "play");
}

function rateAll(page: ReturnType<typeof makePage>, value: number): void {
  for (const slider of qa<HTMLInputElement>(page.root, 'input[type="range"]')) {
    slider.value = String(value);
    fire(page, slider, "input");
  }
}

function submitButton(page: ReturnType<typeof makePage>): HTMLButtonElement {
  return q<HTMLButtonElement>(page.root, '[data-role="submit"]');
}

describe("screen rendering", () => {
  it("shows progress and one slider row per labeled stimulus", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), PARAMS);
    expect(q(page.root, '[data-role="progress"]').textContent).toBe("Screen 1 of 2");
    const sliders = qa<HTMLInputElement>(page.root, 'input[type="range"]');
    expect(sliders.map((s) => s.getAttribute("data-label"))).toEqual(["A", "B", "C"]);
    for (const slider of sliders) {
      expect(slider.getAttribute("min")).toBe("0");
      expect(slider.getAttribute("max")).toBe("100");
      expect(slider.getAttribute("step")).toBe("1");
      expect(slider.value).toBe("40");
    }
    expect(page.root.textContent).not.toContain("sys_");
  });

  it("requires both query parameters", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), new URLSearchParams("test=demo"));
    expect(q(page.root, '[data-role="error-message"]').textContent).toContain(
      "listener",
    );
  });

  it("shows a terminal message for an unknown test", async () => {
    const page = makePage();
    const api: Api = {
      async loadAssignment() {
        throw new ApiError("no test 'demo'", 404, false);
      },
      async submitScreen() {
        throw new Error("unreachable");
      },
    };
    await runApp(page.root, api, PARAMS);
    expect(q(page.root, '[data-role="error-message"]').textContent).toBe(
      "no test 'demo'",
    );
  });
});

describe("submission gating", () => {
  it("keeps submit disabled until everything is played and rated", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), PARAMS);
    const submit = submitButton(page);
    expect(submit.disabled).toBe(true);

    playAll(page);
    expect(submit.disabled).toBe(true);
    expect(q(page.root, '[data-role="blockers"]').textContent).toContain("slider");

    rateAll(page, 62);
    expect(submit.disabled).toBe(false);
    expect(q(page.root, '[data-role="blockers"]').textContent).toBe("");
  });

  it("lists playback among the blockers until every sample was played", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), PARAMS);
    rateAll(page, 10);
    expect(q(page.root, '[data-role="blockers"]').textContent).toContain("play every");
    expect(submitButton(page).disabled).toBe(true);
  });

  it("accepts confirmed defaults instead of slider movement", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), PARAMS);
    playAll(page);
    const confirm = q<HTMLInputElement>(page.root, '[data-role="confirm"]');
    confirm.checked = true;
    fire(page, confirm, "change");
    expect(submitButton(page).disabled).toBe(false);
  });

  it("requires the reference to be played when the test shows one", async () => {
    const view = assignment({ show_reference: true, aspect: "speaker_similarity" });
    for (const screen of view.screens) screen.reference_url = "/tests/demo/audio/ref";
    const page = makePage();
    await runApp(page.root, fakeApi(view), PARAMS);
    playAll(page);
    rateAll(page, 55);
    expect(submitButton(page).disabled).toBe(true);
    fire(page, q(page.root, '[data-role="reference-audio"]'), "play");
    expect(submitButton(page).disabled).toBe(false);
  });
});

describe("numeric readouts", () => {
  it("mirrors slider moves and clamps typed values to [0, 100] integers", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment()), PARAMS);
    const slider = q<HTMLInputElement>(page.root, 'input[data-label="A"][type="range"]');
    const readout = q<HTMLInputElement>(page.root, 'input[data-readout="A"]');

    slider.value = "73";
    fire(page, slider, "input");
    expect(readout.value).toBe("73");

    readout.value = "150";
    fire(page, readout, "input");
    expect(slider.value).toBe("100");
    readout.value = "7.6";
    fire(page, readout, "input");
    expect(slider.value).toBe("8");
    fire(page, readout, "change");
    expect(readout.value).toBe("8");
  });
});

describe("screen flow", () => {
  it("submits displayed values verbatim and advances to the next screen", async () => {
    const page = makePage();
    const api = fakeApi(assignment());
    await runApp(page.root, api, PARAMS);
    playAll(page);
    const sliders = qa<HTMLInputElement>(page.root, 'input[type="range"]');
    const wanted = { A: 91, B: 8, C: 45 };
    for (const slider of sliders) {
      const label = slider.getAttribute("data-label") as keyof typeof wanted;
      slider.value = String(wanted[label]);
      fire(page, slider, "input");
    }
    submitButton(page).click();
    await until(
      () => q(page.root, '[data-role="progress"]').textContent === "Screen 2 of 2",
      "screen 2",
    );
    expect(api.submissions).toEqual([
      { listener_id: "l1", utterance_id: "utt1", scores: wanted },
    ]);
  });

  it("resumes at the first unsubmitted screen", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment({ progress: 1 })), PARAMS);
    expect(q(page.root, '[data-role="progress"]').textContent).toBe("Screen 2 of 2");
  });

  it("treats a duplicate response as already stored and advances", async () => {
    const page = makePage();
    const api = fakeApi(assignment());
    api.submitScreen = async () => "duplicate";
    await runApp(page.root, api, PARAMS);
    playAll(page);
    rateAll(page, 30);
    submitButton(page).click();
    await until(
      () => q(page.root, '[data-role="progress"]').textContent === "Screen 2 of 2",
      "screen 2",
    );
  });

  it("offers a retry that preserves the ratings when the network drops", async () => {
    const page = makePage();
    const api = fakeApi(assignment(), 1);
    await runApp(page.root, api, PARAMS);
    playAll(page);
    rateAll(page, 77);
    submitButton(page).click();
    await until(
      () => page.root.querySelector('[data-role="retry"]') !== null,
      "retry prompt",
    );
    expect(q(page.root, '[data-role="retry-message"]').textContent).toContain(
      "not saved",
    );
    for (const slider of qa<HTMLInputElement>(page.root, 'input[type="range"]')) {
      expect(slider.value).toBe("77");
    }
    q<HTMLButtonElement>(page.root, '[data-role="retry"]').click();
    await until(
      () => q(page.root, '[data-role="progress"]').textContent === "Screen 2 of 2",
      "screen 2 after retry",
    );
    expect(api.submissions).toHaveLength(1);
    expect(api.submissions[0].scores).toEqual({ A: 77, B: 77, C: 77 });
  });

  it("ends on a completion code after the last screen", async () => {
    const page = makePage();
    const api = fakeApi(assignment({ progress: 1 }));
    await runApp(page.root, api, PARAMS);
    playAll(page);
    rateAll(page, 12);
    submitButton(page).click();
    await until(
      () => page.root.querySelector('[data-role="completion-code"]') !== null,
      "completion page",
    );
    expect(q(page.root, '[data-role="completion-code"]').textContent).toBe(
      completionCode("demo", "l1"),
    );
  });

  it("goes straight to the completion page when everything was already rated", async () => {
    const page = makePage();
    await runApp(page.root, fakeApi(assignment({ progress: 2 })), PARAMS);
    expect(q(page.root, '[data-role="completion-code"]').textContent).toBe(
      completionCode("demo", "l1"),
    );
  });
});
