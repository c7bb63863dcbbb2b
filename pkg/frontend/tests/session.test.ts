import { describe, expect, it } from 'vitest';

import type { ClassifyResponse } from '../src/api.js';
import {
  correctionOptions,
  errorView,
  sessionFromClassify,
  withConsent,
  withFeedback,
  withPolledState,
} from '../src/session.js';

const CLASSIFY: ClassifyResponse = {
  session_id: 's-1',
  record_id: 'rec-1',
  predicted: 'man',
  scores: { man: 0.9, woman: 0.1, 'non-binary': 0 },
  t1_seconds: 5,
  deadline: 1005,
  usage: 'advisory-only',
  label_set_version: 1,
};

describe('sessionFromClassify', () => {
  it('builds an awaiting view with consent unchecked and options from the scores map', () => {
    const view = sessionFromClassify(CLASSIFY);
    expect(view.status).toEqual({ kind: 'awaiting' });
    expect(view.consentChecked).toBe(false);
    expect(view.labelOptions).toEqual(['man', 'woman', 'non-binary']);
    expect(view.labelSetVersion).toBe(1);
  });

  it('never remembers consent across sessions', () => {
    const first = withConsent(sessionFromClassify(CLASSIFY), true);
    expect(first.consentChecked).toBe(true);
    const second = sessionFromClassify({ ...CLASSIFY, session_id: 's-2' });
    expect(second.consentChecked).toBe(false);
  });

  it('offers every label except the prediction for correction', () => {
    const view = sessionFromClassify(CLASSIFY);
    expect(correctionOptions(view)).toEqual(['woman', 'non-binary']);
  });
});

describe('withFeedback', () => {
  it('echoes the server resolution, including the late flag', () => {
    const view = sessionFromClassify(CLASSIFY);
    const resolved = withFeedback(view, {
      session_id: 's-1',
      final: 'woman',
      provenance: 'user_corrected',
      resolved_at: 1002,
      late: false,
      stored: false,
    });
    expect(resolved.status).toEqual({
      kind: 'resolved',
      provenance: 'user_corrected',
      final: 'woman',
      late: false,
    });
    const late = withFeedback(view, {
      session_id: 's-1',
      final: 'man',
      provenance: 'auto_confirmed',
      resolved_at: 1005,
      late: true,
      stored: false,
    });
    expect(late.status).toEqual({
      kind: 'resolved',
      provenance: 'auto_confirmed',
      final: 'man',
      late: true,
    });
  });
});

describe('withPolledState', () => {
  const base = {
    session_id: 's-1',
    record_id: 'rec-1',
    predicted: 'man',
    t1_seconds: 5,
    deadline: 1005,
    label_set_version: 1,
  };

  it('stays awaiting until the server says resolved', () => {
    const view = sessionFromClassify(CLASSIFY);
    const same = withPolledState(view, { ...base, status: 'awaiting' });
    expect(same.status).toEqual({ kind: 'awaiting' });
  });

  it('cannot fabricate a resolution: provenance must come from the server', () => {
    const view = sessionFromClassify(CLASSIFY);
    const missing = withPolledState(view, { ...base, status: 'resolved' });
    expect(missing.status).toEqual({ kind: 'awaiting' });
    const real = withPolledState(view, {
      ...base,
      status: 'resolved',
      provenance: 'auto_confirmed',
      final: 'man',
      resolved_at: 1005,
    });
    expect(real.status).toEqual({
      kind: 'resolved',
      provenance: 'auto_confirmed',
      final: 'man',
      late: false,
    });
  });
});

describe('errorView', () => {
  it('maps the two service failure modes to readable panels', () => {
    expect(errorView(422).kind).toBe('error');
    expect((errorView(422) as { message: string }).message).toMatch(/face/i);
    expect((errorView(503) as { message: string }).message).toMatch(/model/i);
    expect((errorView(500) as { message: string }).message).toMatch(/500/);
  });
});
