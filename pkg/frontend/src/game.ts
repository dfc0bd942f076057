// Forced-choice game flow: fetch a session, present one question at a time,
// submit each click, then show the server-reported score. One request is in
// flight at a time and a question cannot be answered twice client-side.

import { ApiClient, QuestionPayload, ResultPayload, Side, SessionPayload } from './api.js';

export interface GameView {
  showQuestion(index: number, total: number, question: QuestionPayload): void;
  showScore(result: ResultPayload): void;
  showError(message: string, retry: () => void): void;
}

export class GameController {
  private session: SessionPayload | null = null;
  private index = 0;
  private busy = false;
  private finished = false;

  constructor(
    private readonly api: ApiClient,
    private readonly view: GameView,
  ) {}

  get currentIndex(): number {
    return this.index;
  }

  get isFinished(): boolean {
    return this.finished;
  }

  get sessionId(): string | null {
    return this.session?.session_id ?? null;
  }

  async start(): Promise<void> {
    this.busy = true;
    try {
      this.session = await this.api.createSession();
      this.index = 0;
      this.finished = false;
    } catch (err) {
      this.view.showError(String(err), () => void this.start());
      return;
    } finally {
      this.busy = false;
    }
    this.presentCurrent();
  }

  private presentCurrent(): void {
    if (!this.session) return;
    this.view.showQuestion(this.index, this.session.questions.length, this.session.questions[this.index]);
  }

  async choose(side: Side): Promise<void> {
    if (!this.session || this.busy || this.finished) {
      return; // ignore clicks while a request is in flight or after the end
    }
    const question = this.session.questions[this.index];
    this.busy = true;
    try {
      await this.api.submitAnswer(this.session.session_id, question.question_id, side);
    } catch (err) {
      this.busy = false;
      this.view.showError(String(err), () => void this.choose(side));
      return;
    }
    this.busy = false;
    this.index += 1;
    if (this.index < this.session.questions.length) {
      this.presentCurrent();
      return;
    }
    await this.finish();
  }

  private async finish(): Promise<void> {
    if (!this.session) return;
    this.busy = true;
    try {
      const result = await this.api.fetchResult(this.session.session_id);
      this.finished = true;
      this.view.showScore(result);
    } catch (err) {
      this.view.showError(String(err), () => void this.finish());
    } finally {
      this.busy = false;
    }
  }
}
