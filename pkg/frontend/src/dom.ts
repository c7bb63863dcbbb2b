// Plain-DOM rendering. Elements carry data-role attributes so scripted
// tests can drive the console the way a user would.

import { formatSeconds } from './countdown.js';
import {
  DEFAULT_GEOMETRY,
  formatPercent,
  hasData,
  polylinePoints,
  scaleSeries,
  seriesFrom,
  tprRows,
} from './metrics.js';
import { correctionOptions, type SessionView } from './session.js';
import type { MetricsResponse } from './api.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface SessionHandlers {
  onConfirm(): void;
  onCorrect(label: string): void;
  onDecline(): void;
  onConsentChange(checked: boolean): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  role?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (role) node.setAttribute('data-role', role);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSession(
  container: HTMLElement,
  view: SessionView,
  handlers: SessionHandlers,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const panel = el(doc, 'section', 'session-panel');
  container.appendChild(panel);

  if (view.status.kind === 'error') {
    const error = el(doc, 'div', 'error-panel', view.status.message);
    panel.appendChild(error);
    return;
  }

  panel.appendChild(el(doc, 'h2', 'predicted', `Predicted label: ${view.predicted}`));
  panel.appendChild(
    el(doc, 'p', undefined, 'This output is advisory-only. Confirm, correct, or decline below.'),
  );

  const countdown = el(doc, 'div', 'countdown', formatSeconds(view.t1Seconds));
  panel.appendChild(countdown);

  if (view.status.kind === 'resolved') {
    countdown.textContent = formatSeconds(0);
    const { provenance, final, late } = view.status;
    const resolved = el(doc, 'div', 'resolution');
    resolved.appendChild(
      el(doc, 'strong', 'final-label', final === null ? 'no label (declined)' : final),
    );
    resolved.appendChild(el(doc, 'span', 'provenance', ` via ${provenance}`));
    if (late) {
      resolved.appendChild(
        el(doc, 'em', 'late-flag', ' — feedback arrived late; the standing resolution applies'),
      );
    }
    panel.appendChild(resolved);
    return;
  }

  // Awaiting: the three actions are equally prominent.
  const actions = el(doc, 'div', 'actions');
  panel.appendChild(actions);

  const confirm = el(doc, 'button', 'confirm', 'Confirm');
  confirm.addEventListener('click', () => handlers.onConfirm());
  actions.appendChild(confirm);

  const picker = el(doc, 'select', 'label-picker');
  for (const label of correctionOptions(view)) {
    const option = doc.createElement('option');
    option.value = label;
    option.textContent = label;
    picker.appendChild(option);
  }
  const correct = el(doc, 'button', 'correct', 'Correct');
  correct.addEventListener('click', () => handlers.onCorrect(picker.value));
  actions.appendChild(picker);
  actions.appendChild(correct);

  const decline = el(doc, 'button', 'decline', 'Decline');
  decline.addEventListener('click', () => handlers.onDecline());
  actions.appendChild(decline);

  const consentWrap = el(doc, 'label', 'consent-wrap');
  const consent = doc.createElement('input');
  consent.type = 'checkbox';
  consent.setAttribute('data-role', 'consent');
  consent.checked = view.consentChecked;
  consent.addEventListener('change', () => handlers.onConsentChange(consent.checked));
  consentWrap.appendChild(consent);
  consentWrap.appendChild(
    doc.createTextNode(' I consent to this resolution being used to improve the model'),
  );
  panel.appendChild(consentWrap);
}

export function updateCountdown(container: HTMLElement, remaining: number): void {
  const node = container.querySelector('[data-role=countdown]');
  if (node) node.textContent = formatSeconds(remaining);
}

export function renderMetrics(container: HTMLElement, metrics: MetricsResponse | null): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const panel = el(doc, 'section', 'metrics-panel');
  container.appendChild(panel);

  if (metrics === null || !hasData(metrics)) {
    panel.appendChild(el(doc, 'div', 'empty-state', 'No metrics yet. Run the simulator.'));
    return;
  }

  const charts = el(doc, 'div', 'charts');
  panel.appendChild(charts);
  for (const spec of seriesFrom(metrics)) {
    const figure = el(doc, 'figure', `chart-${spec.name}`);
    figure.appendChild(el(doc, 'figcaption', undefined, spec.name));
    const svg = doc.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('width', String(DEFAULT_GEOMETRY.width));
    svg.setAttribute('height', String(DEFAULT_GEOMETRY.height));
    const points = scaleSeries(spec.pairs);
    if (points.length === 1) {
      const dot = doc.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(points[0].x));
      dot.setAttribute('cy', String(points[0].y));
      dot.setAttribute('r', '3');
      svg.appendChild(dot);
    } else if (points.length > 1) {
      const line = doc.createElementNS(SVG_NS, 'polyline');
      line.setAttribute('points', polylinePoints(points));
      line.setAttribute('fill', 'none');
      line.setAttribute('stroke', 'currentColor');
      svg.appendChild(line);
    }
    figure.appendChild(svg);
    charts.appendChild(figure);
  }

  const table = el(doc, 'table', 'tpr-table');
  const head = doc.createElement('tr');
  head.appendChild(el(doc, 'th', undefined, 'group'));
  head.appendChild(el(doc, 'th', undefined, 'TPR'));
  table.appendChild(head);
  for (const row of tprRows(metrics.tpr_by_group)) {
    const tr = doc.createElement('tr');
    tr.setAttribute('data-group', row.group);
    tr.appendChild(el(doc, 'td', undefined, row.group));
    tr.appendChild(el(doc, 'td', undefined, formatPercent(row.tpr)));
    table.appendChild(tr);
  }
  panel.appendChild(table);
}
