// Browser entry point: one live-session panel plus the metrics dashboard.

import { FairloopClient } from './api.js';
import { MetricsController, SessionController } from './controller.js';

const DIM = 16;

function randomRecord(): number[] {
  // Box-Muller standard normals: a plausible demo feature vector.
  const out: number[] = [];
  while (out.length < DIM) {
    const u = Math.random() || 1e-12;
    const v = Math.random();
    out.push(Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v));
    out.push(Math.sqrt(-2 * Math.log(u)) * Math.sin(2 * Math.PI * v));
  }
  return out.slice(0, DIM);
}

function main(): void {
  const base = (document.getElementById('base-url') as HTMLInputElement | null)?.value
    ?? 'http://localhost:8000';
  const client = new FairloopClient(base);
  const sessionContainer = document.getElementById('session')!;
  const metricsContainer = document.getElementById('metrics')!;
  const sessions = new SessionController(client, sessionContainer);
  const metrics = new MetricsController(client, metricsContainer);

  document.getElementById('new-session')!.addEventListener('click', () => {
    void sessions.start(randomRecord());
  });
  document.getElementById('refresh-metrics')!.addEventListener('click', () => {
    void metrics.refresh();
  });
  void metrics.refresh();
}

main();
