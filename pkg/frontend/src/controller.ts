// Wires the API client, the session view, and the DOM together. One
// controller per page region; a browser tab runs exactly one live session
// at a time and nothing is shared across tabs.

import { ApiError, DECLINE_TOKEN, FairloopClient } from './api.js';
import { anchorFrom, startTicker, type Ticker } from './countdown.js';
import { renderMetrics, renderSession, updateCountdown } from './dom.js';
import {
  errorView,
  isResolved,
  sessionFromClassify,
  withConsent,
  withFeedback,
  withPolledState,
  type SessionView,
} from './session.js';

export class SessionController {
  view: SessionView | null = null;
  private ticker: Ticker | null = null;
  private pollHandle: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly client: FairloopClient,
    private readonly container: HTMLElement,
    private readonly pollMs = 150,
  ) {}

  async start(raw: number[], recordId?: string): Promise<void> {
    this.stopTimers();
    try {
      const classified = await this.client.classify(raw, recordId);
      this.view = sessionFromClassify(classified);
      this.render();
      this.ticker = startTicker(
        anchorFrom(classified),
        (remaining) => updateCountdown(this.container, remaining),
        () => this.pollUntilResolved(),
      );
    } catch (err) {
      this.view = null;
      const status = err instanceof ApiError ? err.status : 0;
      this.container.replaceChildren();
      renderSession(
        this.container,
        {
          sessionId: '',
          predicted: '',
          t1Seconds: 0,
          deadline: 0,
          labelSetVersion: 0,
          labelOptions: [],
          consentChecked: false,
          status: errorView(status),
        },
        this.handlers(),
      );
    }
  }

  async confirm(): Promise<void> {
    await this.submit('');
  }

  async correct(label: string): Promise<void> {
    await this.submit(label);
  }

  async decline(): Promise<void> {
    await this.submit(DECLINE_TOKEN);
  }

  setConsent(checked: boolean): void {
    if (this.view) this.view = withConsent(this.view, checked);
  }

  private async submit(label: string): Promise<void> {
    if (!this.view || isResolved(this.view)) return;
    const resp = await this.client.submitFeedback(
      this.view.sessionId,
      label,
      this.view.consentChecked,
    );
    this.view = withFeedback(this.view, resp);
    this.stopTimers();
    this.render();
  }

  private pollUntilResolved(): void {
    if (this.pollHandle !== null) return;
    this.pollHandle = setInterval(async () => {
      if (!this.view) return;
      const state = await this.client.sessionState(this.view.sessionId);
      const next = withPolledState(this.view, state);
      if (isResolved(next)) {
        this.view = next;
        this.stopTimers();
        this.render();
      }
    }, this.pollMs);
  }

  private stopTimers(): void {
    this.ticker?.stop();
    this.ticker = null;
    if (this.pollHandle !== null) {
      clearInterval(this.pollHandle);
      this.pollHandle = null;
    }
  }

  private handlers() {
    return {
      onConfirm: () => void this.confirm(),
      onCorrect: (label: string) => void this.correct(label),
      onDecline: () => void this.decline(),
      onConsentChange: (checked: boolean) => this.setConsent(checked),
    };
  }

  private render(): void {
    if (this.view) renderSession(this.container, this.view, this.handlers());
  }
}

export class MetricsController {
  constructor(
    private readonly client: FairloopClient,
    private readonly container: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    try {
      renderMetrics(this.container, await this.client.metrics());
    } catch {
      renderMetrics(this.container, null);
    }
  }
}
