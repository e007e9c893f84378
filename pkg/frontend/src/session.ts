/**
 * Scripted annotation session: pull trials until the pool drains, answer
 * each one with the supplied policy, submit, repeat. The e2e test drives a
 * whole study through this; it is also handy for smoke-testing a live
 * service from the console.
 */

import { AbResponse, ApiClient, Mode, TrialPayload } from "./api.js";

export interface CompletedTrial {
  trial: TrialPayload;
  answer: AbResponse | number;
}

export type RespondFn = (trial: TrialPayload, index: number) => AbResponse | number;

export async function runScriptedSession(
  client: ApiClient,
  participant: string,
  mode: Mode,
  respond: RespondFn,
  maxTrials = 1000,
): Promise<CompletedTrial[]> {
  const completed: CompletedTrial[] = [];
  for (let index = 0; index < maxTrials; index += 1) {
    const trial = await client.nextTrial(participant, mode);
    if (trial === null) {
      return completed;
    }
    const answer = respond(trial, index);
    await client.submitJudgment(trial.trial_id, answer);
    completed.push({ trial, answer });
  }
  throw new Error(`session did not drain the pool within ${maxTrials} trials`);
}

/** Deterministic default policy: cycle through the pairwise options. */
export function cyclingResponder(trial: TrialPayload, index: number): AbResponse | number {
  if (trial.mode === "likert") {
    return (index % 5) + 1;
  }
  const options: AbResponse[] = ["A", "B", "TIE"];
  return options[index % options.length] ?? "TIE";
}
