// Pure session-view state. Every resolved status here was echoed by the
// server; the view never invents one, and consent always starts unchecked.

import type { ClassifyResponse, FeedbackResponse, SessionStateResponse } from './api.js';

export type SessionStatus =
  | { kind: 'awaiting' }
  | { kind: 'resolved'; provenance: string; final: string | null; late: boolean }
  | { kind: 'error'; message: string };

export interface SessionView {
  sessionId: string;
  predicted: string;
  t1Seconds: number;
  deadline: number;
  labelSetVersion: number;
  labelOptions: string[];
  consentChecked: boolean;
  status: SessionStatus;
}

export function sessionFromClassify(resp: ClassifyResponse): SessionView {
  return {
    sessionId: resp.session_id,
    predicted: resp.predicted,
    t1Seconds: resp.t1_seconds,
    deadline: resp.deadline,
    labelSetVersion: resp.label_set_version,
    // The scores map is keyed by exactly the session's label-set version,
    // so the options can never drift from what the server will accept.
    labelOptions: Object.keys(resp.scores),
    consentChecked: false, // never pre-checked, never remembered
    status: { kind: 'awaiting' },
  };
}

export function errorView(status: number): SessionStatus {
  if (status === 422) return { kind: 'error', message: 'No face detected; nothing to classify.' };
  if (status === 503) return { kind: 'error', message: 'No model is registered yet.' };
  return { kind: 'error', message: `Request failed (${status}).` };
}

export function withConsent(view: SessionView, checked: boolean): SessionView {
  return { ...view, consentChecked: checked };
}

export function withFeedback(view: SessionView, resp: FeedbackResponse): SessionView {
  return {
    ...view,
    status: { kind: 'resolved', provenance: resp.provenance, final: resp.final, late: resp.late },
  };
}

export function withPolledState(view: SessionView, state: SessionStateResponse): SessionView {
  if (state.status !== 'resolved' || state.provenance === undefined) {
    return view; // still awaiting on the server: nothing to show yet
  }
  return {
    ...view,
    status: {
      kind: 'resolved',
      provenance: state.provenance,
      final: state.final ?? null,
      late: false,
    },
  };
}

export function isResolved(view: SessionView): boolean {
  return view.status.kind === 'resolved';
}

/** Labels offered for correction: the session's options minus the prediction. */
export function correctionOptions(view: SessionView): string[] {
  return view.labelOptions.filter((label) => label !== view.predicted);
}
