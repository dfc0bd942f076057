// Typed client for the questionnaire service endpoints.

export type Side = 'left' | 'right';

export interface QuestionPayload {
  question_id: string;
  left: number[][];
  right: number[][];
}

export interface SessionPayload {
  session_id: string;
  questions: QuestionPayload[];
}

export interface QuestionResult {
  question_id: string;
  correct: boolean;
  source_model: string;
}

export interface ResultPayload {
  score: number;
  per_question: QuestionResult[];
  duration_s: number;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    const body = await response.text().catch(() => '');
    throw new ApiError(`${init?.method ?? 'GET'} ${url} -> ${response.status} ${body}`, response.status);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  createSession(): Promise<SessionPayload> {
    return request<SessionPayload>(`${this.baseUrl}/api/sessions`, { method: 'POST' });
  }

  async submitAnswer(sessionId: string, questionId: string, side: Side): Promise<boolean> {
    const body = await request<{ accepted: boolean }>(
      `${this.baseUrl}/api/sessions/${encodeURIComponent(sessionId)}/answers`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ question_id: questionId, chosen_side: side }),
      },
    );
    return body.accepted;
  }

  fetchResult(sessionId: string): Promise<ResultPayload> {
    return request<ResultPayload>(
      `${this.baseUrl}/api/sessions/${encodeURIComponent(sessionId)}/result`,
    );
  }
}
