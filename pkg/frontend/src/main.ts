// DOM wiring: two clickable charts, a progress line, and the score screen.

import { ApiClient, QuestionPayload, ResultPayload } from './api.js';
import { drawCandles } from './candles.js';
import { GameController, GameView } from './game.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderPanel(canvas: HTMLCanvasElement, window: number[][]): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  try {
    drawCandles(ctx, window, canvas.width, canvas.height);
  } catch (err) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = '#d73027';
    ctx.fillText(`bad chart payload: ${String(err)}`, 10, 20);
  }
}

class DomView implements GameView {
  private readonly progress = el<HTMLElement>('progress');
  private readonly question = el<HTMLElement>('question');
  private readonly scorePanel = el<HTMLElement>('score-panel');
  private readonly scoreText = el<HTMLElement>('score-text');
  private readonly errorPanel = el<HTMLElement>('error-panel');
  private readonly errorText = el<HTMLElement>('error-text');
  private readonly retryButton = el<HTMLButtonElement>('retry');
  private readonly left = el<HTMLCanvasElement>('left-chart');
  private readonly right = el<HTMLCanvasElement>('right-chart');

  showQuestion(index: number, total: number, q: QuestionPayload): void {
    this.errorPanel.hidden = true;
    this.scorePanel.hidden = true;
    this.question.hidden = false;
    this.progress.textContent = `Question ${index + 1} of ${total}`;
    renderPanel(this.left, q.left);
    renderPanel(this.right, q.right);
  }

  showScore(result: ResultPayload): void {
    this.question.hidden = true;
    this.errorPanel.hidden = true;
    this.scorePanel.hidden = false;
    const correct = result.per_question.filter((q) => q.correct).length;
    this.scoreText.textContent =
      `You spotted the real chart ${correct} of ${result.per_question.length} times ` +
      `(${(100 * result.score).toFixed(0)}%).`;
  }

  showError(message: string, retry: () => void): void {
    this.errorPanel.hidden = false;
    this.errorText.textContent = message;
    this.retryButton.onclick = () => retry();
  }
}

function start(): void {
  const view = new DomView();
  const controller = new GameController(new ApiClient(''), view);
  el<HTMLElement>('left-panel').addEventListener('click', () => void controller.choose('left'));
  el<HTMLElement>('right-panel').addEventListener('click', () => void controller.choose('right'));
  void controller.start();
}

document.addEventListener('DOMContentLoaded', start);
