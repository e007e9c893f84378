/**
 * Annotation UI: one active trial at a time.
 *
 * Flow: enter a participant id once, then loop trial -> judgment -> next
 * trial until the server reports the pool is drained. Pairwise trials show
 * two blinded panes with A / B / Tie controls; likert trials show a single
 * document with a five-point scale. Submit stays disabled until a response
 * is chosen, and each displayed trial can be submitted exactly once.
 */

import { AbResponse, ApiClient, ApiError, Mode, TrialPayload } from "./api.js";
import { paragraphs } from "./paragraphs.js";

const PARTICIPANT_KEY = "paraseg.participant";
const SCALE_CAPTIONS: Record<number, string> = {
  1: "Poor",
  2: "Fair",
  3: "Okay",
  4: "Good",
  5: "Excellent",
};

export class App {
  private participant = "";
  private mode: Mode = "ab";
  private trial: TrialPayload | null = null;
  private selection: AbResponse | number | null = null;
  private submitting = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly storage: Storage = window.sessionStorage,
  ) {}

  start(): void {
    const saved = this.storage.getItem(PARTICIPANT_KEY);
    if (saved) {
      this.participant = saved;
      void this.loadNextTrial();
    } else {
      this.renderParticipantForm();
    }
  }

  // --- view plumbing -------------------------------------------------------

  private clear(): HTMLElement {
    this.root.replaceChildren();
    return this.root;
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
      node.className = className;
    }
    if (text !== undefined) {
      node.textContent = text;
    }
    return node;
  }

  private renderPane(text: string, heading?: string): HTMLElement {
    const pane = this.el("section", "pane");
    if (heading !== undefined) {
      pane.appendChild(this.el("h3", "pane-label", heading));
    }
    const body = this.el("div", "pane-body");
    for (const block of paragraphs(text)) {
      body.appendChild(this.el("p", "para", block));
    }
    pane.appendChild(body);
    return pane;
  }

  // --- screens --------------------------------------------------------------

  private renderParticipantForm(): void {
    const container = this.clear();
    const form = this.el("form", "participant-form");
    form.appendChild(this.el("h2", undefined, "Join the study"));

    const input = this.el("input");
    input.type = "text";
    input.placeholder = "participant id";
    input.id = "participant-input";
    form.appendChild(input);

    const modeSelect = this.el("select");
    modeSelect.id = "mode-select";
    for (const value of ["ab", "likert"] as Mode[]) {
      const option = this.el("option");
      option.value = value;
      option.textContent = value === "ab" ? "side-by-side comparison" : "1-5 rating";
      modeSelect.appendChild(option);
    }
    form.appendChild(modeSelect);

    const begin = this.el("button", "primary", "Start");
    begin.type = "submit";
    form.appendChild(begin);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const id = input.value.trim();
      if (!id) {
        return;
      }
      this.participant = id;
      this.mode = modeSelect.value as Mode;
      this.storage.setItem(PARTICIPANT_KEY, id);
      void this.loadNextTrial();
    });
    container.appendChild(form);
  }

  private renderDone(): void {
    const container = this.clear();
    const card = this.el("div", "card done");
    card.appendChild(this.el("h2", undefined, "All done"));
    card.appendChild(
      this.el(
        "p",
        undefined,
        "There are no more trials for you in this mode. Thank you!",
      ),
    );
    const other: Mode = this.mode === "ab" ? "likert" : "ab";
    const switchButton = this.el(
      "button",
      "secondary",
      other === "ab" ? "Try the comparisons" : "Try the ratings",
    );
    switchButton.addEventListener("click", () => {
      this.mode = other;
      void this.loadNextTrial();
    });
    card.appendChild(switchButton);
    container.appendChild(card);
  }

  private renderError(message: string, retry: () => void): void {
    const container = this.clear();
    const card = this.el("div", "card error");
    card.appendChild(this.el("h2", undefined, "Something went wrong"));
    card.appendChild(this.el("p", "error-message", message));
    const retryButton = this.el("button", "primary retry", "Retry");
    retryButton.addEventListener("click", retry);
    card.appendChild(retryButton);
    container.appendChild(card);
  }

  private renderTrial(): void {
    const trial = this.trial;
    if (trial === null) {
      return;
    }
    const container = this.clear();
    const header = this.el("header", "trial-header");
    header.appendChild(
      this.el(
        "h2",
        undefined,
        trial.mode === "ab"
          ? "Which segmentation reads better?"
          : "How good is this paragraph segmentation?",
      ),
    );
    header.appendChild(this.el("span", "participant-tag", this.participant));
    container.appendChild(header);

    if (trial.mode === "ab") {
      container.appendChild(this.renderAbBody(trial));
    } else {
      container.appendChild(this.renderLikertBody(trial));
    }

    const controls = this.el("div", "controls");
    const submit = this.el("button", "primary submit", "Submit");
    submit.disabled = true;
    submit.addEventListener("click", () => void this.submit(submit));
    controls.appendChild(submit);
    container.appendChild(controls);
    this.enableSubmit();
  }

  private renderAbBody(trial: TrialPayload): HTMLElement {
    const body = this.el("div", "ab-body");
    const panes = this.el("div", "panes");
    for (const rendering of trial.renderings) {
      panes.appendChild(this.renderPane(rendering.text, rendering.side));
    }
    body.appendChild(panes);

    const choices = this.el("div", "choices");
    const options: Array<[AbResponse, string]> = [
      ["A", "A is better"],
      ["B", "B is better"],
      ["TIE", "Tie"],
    ];
    for (const [value, caption] of options) {
      const button = this.el("button", "choice", caption);
      button.dataset.value = value;
      if (this.selection === value) {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => {
        this.selection = value;
        for (const sibling of Array.from(choices.children)) {
          sibling.classList.toggle(
            "selected",
            (sibling as HTMLElement).dataset.value === value,
          );
        }
        this.enableSubmit();
      });
      choices.appendChild(button);
    }
    body.appendChild(choices);
    return body;
  }

  private renderLikertBody(trial: TrialPayload): HTMLElement {
    const body = this.el("div", "likert-body");
    body.appendChild(this.renderPane(trial.renderings[0]?.text ?? ""));

    const scale = this.el("div", "scale");
    for (let value = 1; value <= 5; value += 1) {
      const label = this.el("label", "scale-option");
      const radio = this.el("input");
      radio.type = "radio";
      radio.name = "rating";
      radio.value = String(value);
      radio.checked = this.selection === value;
      radio.addEventListener("change", () => {
        this.selection = value;
        this.enableSubmit();
      });
      label.appendChild(radio);
      label.appendChild(
        this.el("span", undefined, `${value} = ${SCALE_CAPTIONS[value]}`),
      );
      scale.appendChild(label);
    }
    body.appendChild(scale);
    return body;
  }

  // --- actions ---------------------------------------------------------------

  private enableSubmit(): void {
    const submit = this.root.querySelector<HTMLButtonElement>("button.submit");
    if (submit) {
      submit.disabled = this.selection === null || this.submitting;
    }
  }

  private async loadNextTrial(): Promise<void> {
    this.trial = null;
    this.selection = null;
    this.submitting = false;
    try {
      const trial = await this.client.nextTrial(this.participant, this.mode);
      if (trial === null) {
        this.renderDone();
        return;
      }
      this.trial = trial;
      this.renderTrial();
    } catch (error) {
      this.renderError(describe(error), () => void this.loadNextTrial());
    }
  }

  private async submit(button: HTMLButtonElement): Promise<void> {
    if (this.trial === null || this.selection === null || this.submitting) {
      return;
    }
    this.submitting = true;
    button.disabled = true;
    const trialId = this.trial.trial_id;
    const answer = this.selection;
    try {
      await this.client.submitJudgment(trialId, answer);
      this.trial = null;
      await this.loadNextTrial();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Already recorded server-side; surface it and move on.
        this.trial = null;
        this.renderError(`This trial was already judged: ${error.message}`, () =>
          void this.loadNextTrial(),
        );
      } else {
        this.submitting = false;
        this.renderError(describe(error), () => {
          this.renderTrial();
          // Selection survives the retry; re-enable the fresh submit button.
          this.enableSubmit();
        });
      }
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.message;
  }
  if (error instanceof Error) {
    return `Could not reach the study server (${error.message}).`;
  }
  return "Could not reach the study server.";
}
