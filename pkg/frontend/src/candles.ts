// Candlestick chart geometry and canvas drawing.
//
// Layout is a pure function of the OHLC array and the canvas size, so the
// same window always produces the same drawing. Up bars render hollow with a
// green stroke, down bars filled red, dojis as a single horizontal line.

export interface Bar {
  open: number;
  high: number;
  low: number;
  close: number;
}

export interface CandleGlyph {
  centerX: number;
  wickTopY: number;
  wickBottomY: number;
  bodyTopY: number;
  bodyBottomY: number;
  bodyWidth: number;
  kind: 'up' | 'down' | 'doji';
}

export class MalformedWindow extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'MalformedWindow';
  }
}

export function toBars(window: unknown): Bar[] {
  if (!Array.isArray(window) || window.length === 0) {
    throw new MalformedWindow('window must be a non-empty array');
  }
  return window.map((row, i) => {
    if (!Array.isArray(row) || row.length !== 4 || row.some((v) => typeof v !== 'number' || !isFinite(v))) {
      throw new MalformedWindow(`bar ${i} must be four finite numbers`);
    }
    const [open, high, low, close] = row as number[];
    if (high < Math.max(open, close) || low > Math.min(open, close)) {
      throw new MalformedWindow(`bar ${i}: high/low do not bound open/close`);
    }
    return { open, high, low, close };
  });
}

export function layoutCandles(
  bars: Bar[],
  width: number,
  height: number,
  pad = 8,
): CandleGlyph[] {
  const lows = bars.map((b) => b.low);
  const highs = bars.map((b) => b.high);
  const min = Math.min(...lows);
  const max = Math.max(...highs);
  const span = max - min || 1; // constant window still renders (flat line)
  const innerHeight = height - 2 * pad;
  const toY = (price: number) => pad + ((max - price) / span) * innerHeight;
  const slot = width / bars.length;
  const bodyWidth = Math.max(2, slot * 0.6);

  return bars.map((bar, i) => {
    const kind = bar.close > bar.open ? 'up' : bar.close < bar.open ? 'down' : 'doji';
    return {
      centerX: slot * (i + 0.5),
      wickTopY: toY(bar.high),
      wickBottomY: toY(bar.low),
      bodyTopY: toY(Math.max(bar.open, bar.close)),
      bodyBottomY: toY(Math.min(bar.open, bar.close)),
      bodyWidth,
      kind,
    };
  });
}

const COLORS = { up: '#1a9850', down: '#d73027', doji: '#555555', wick: '#444444' };

export function drawCandles(
  ctx: CanvasRenderingContext2D,
  window: number[][],
  width: number,
  height: number,
): void {
  const glyphs = layoutCandles(toBars(window), width, height);
  ctx.clearRect(0, 0, width, height);
  for (const g of glyphs) {
    ctx.strokeStyle = COLORS.wick;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(g.centerX, g.wickTopY);
    ctx.lineTo(g.centerX, g.wickBottomY);
    ctx.stroke();

    const left = g.centerX - g.bodyWidth / 2;
    if (g.kind === 'doji') {
      ctx.strokeStyle = COLORS.doji;
      ctx.beginPath();
      ctx.moveTo(left, g.bodyTopY);
      ctx.lineTo(left + g.bodyWidth, g.bodyTopY);
      ctx.stroke();
    } else if (g.kind === 'up') {
      // hollow body for up bars
      ctx.fillStyle = '#ffffff';
      ctx.fillRect(left, g.bodyTopY, g.bodyWidth, Math.max(1, g.bodyBottomY - g.bodyTopY));
      ctx.strokeStyle = COLORS.up;
      ctx.strokeRect(left, g.bodyTopY, g.bodyWidth, Math.max(1, g.bodyBottomY - g.bodyTopY));
    } else {
      ctx.fillStyle = COLORS.down;
      ctx.fillRect(left, g.bodyTopY, g.bodyWidth, Math.max(1, g.bodyBottomY - g.bodyTopY));
    }
  }
}
