// Typed client for the feedback-loop service. All console traffic goes
// through these endpoints; the UI never touches files or invents state.

export interface ClassifyResponse {
  session_id: string;
  record_id: string;
  predicted: string;
  scores: Record<string, number>;
  t1_seconds: number;
  deadline: number;
  usage: string;
  label_set_version: number;
}

export interface FeedbackResponse {
  session_id: string;
  final: string | null;
  provenance: string;
  resolved_at: number;
  late: boolean;
  stored: boolean;
}

export interface SessionStateResponse {
  session_id: string;
  record_id: string;
  predicted: string;
  t1_seconds: number;
  deadline: number;
  label_set_version: number;
  status: 'awaiting' | 'resolved';
  final?: string | null;
  provenance?: string;
  resolved_at?: number;
}

export interface LabelsResponse {
  version: number;
  labels: string[];
}

export interface MetricsPoint {
  t: number;
  accuracy: number;
  incompleteness: number;
  utility: number;
}

export interface TprEntry {
  epoch: number;
  group: string;
  total: number;
  correct: number;
  tpr: number;
}

export interface MetricsResponse {
  series: MetricsPoint[];
  tpr_by_group: Record<string, number>;
  tpr_history: TprEntry[];
  unknown_labels: Record<string, number>;
}

export const DECLINE_TOKEN = 'DECLINE';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.detail) detail = JSON.stringify(body.detail);
    } catch {
      // keep statusText
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class FairloopClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async classify(raw: number[], id?: string): Promise<ClassifyResponse> {
    const resp = await this.fetchFn(this.url('/classify'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(id ? { raw, id } : { raw }),
    });
    return asJson<ClassifyResponse>(resp);
  }

  async submitFeedback(sessionId: string, label: string, consent: boolean): Promise<FeedbackResponse> {
    const resp = await this.fetchFn(this.url(`/sessions/${sessionId}/feedback`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ label, consent }),
    });
    return asJson<FeedbackResponse>(resp);
  }

  async sessionState(sessionId: string): Promise<SessionStateResponse> {
    return asJson<SessionStateResponse>(await this.fetchFn(this.url(`/sessions/${sessionId}`)));
  }

  async labels(): Promise<LabelsResponse> {
    return asJson<LabelsResponse>(await this.fetchFn(this.url('/labels')));
  }

  async metrics(): Promise<MetricsResponse> {
    return asJson<MetricsResponse>(await this.fetchFn(this.url('/metrics')));
  }
}
