// Countdown derived from the server's deadline, never from a timer the
// client started on its own clock: local skew can make the display
// pessimistic, but it can never show time the server will not honor.

export interface CountdownAnchor {
  /** Server-side deadline (epoch seconds). */
  deadline: number;
  /** Server-side session open time: deadline - t1. */
  openedAt: number;
}

export function anchorFrom(resp: { deadline: number; t1_seconds: number }): CountdownAnchor {
  return { deadline: resp.deadline, openedAt: resp.deadline - resp.t1_seconds };
}

/**
 * Seconds left on the window, given seconds elapsed since the response
 * arrived (a local monotonic measurement). Clamped at zero.
 */
export function remainingSeconds(anchor: CountdownAnchor, elapsedSeconds: number): number {
  const serverNow = anchor.openedAt + elapsedSeconds;
  return Math.max(0, anchor.deadline - serverNow);
}

export function formatSeconds(remaining: number): string {
  return remaining.toFixed(1) + 's';
}

export interface Ticker {
  stop(): void;
}

/**
 * Drive a countdown callback every `intervalMs` until it hits zero.
 * `now` is injectable for tests; defaults to Date.now.
 */
export function startTicker(
  anchor: CountdownAnchor,
  onTick: (remaining: number) => void,
  onExpired: () => void,
  intervalMs = 100,
  now: () => number = Date.now,
): Ticker {
  const startedAt = now();
  const tick = () => {
    const elapsed = (now() - startedAt) / 1000;
    const remaining = remainingSeconds(anchor, elapsed);
    onTick(remaining);
    if (remaining <= 0) {
      clearInterval(handle);
      onExpired();
    }
  };
  const handle = setInterval(tick, intervalMs);
  onTick(remainingSeconds(anchor, 0));
  return {
    stop() {
      clearInterval(handle);
    },
  };
}
