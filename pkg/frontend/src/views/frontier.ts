/** Frontier view: achievable (damping ratio, decay rate) curve, the droop
 * each point costs, the user's target, the dominated (feasible) region, and
 * the projected design point with its droop readout.
 *
 * The projected point and the droop value are taken from the /v1/tune
 * response (`achieved`, `d_b`); this view lays out pixels and never
 * recomputes them.
 */

import type { FrontierResponse, TuneResponse } from "../api.js";
import { escapeHtml, fmt, fmtSig } from "../format.js";
import { axisBox, linearScale, niceTicks, polyline } from "./svg.js";

export interface FrontierViewInput {
  frontier: FrontierResponse;
  targets: { cosPsiD: number; alphaD: number };
  tune: TuneResponse | null;
  error?: string | null;
}

const W = 560;
const H = 360;
const PAD = 44;

/** Upper boundary of the dominated region: for each damping ratio the best
 * decay any frontier point with at least that damping offers (suffix max
 * over the sampled points; pure data manipulation). */
export function feasibleBoundary(frontier: FrontierResponse):
    { cos: number[]; alpha: number[] } {
  const pts = [...frontier.points].sort((a, b) => a.cos_psi - b.cos_psi);
  const cos = pts.map((p) => p.cos_psi);
  const alpha = pts.map((p) => p.alpha);
  for (let i = alpha.length - 2; i >= 0; i--) {
    alpha[i] = Math.max(alpha[i], alpha[i + 1]);
  }
  return { cos, alpha };
}

export function renderFrontierView(input: FrontierViewInput): string {
  const { frontier, targets, tune } = input;
  const sx = linearScale([0, 1], [PAD, W - PAD]);
  const alphaTop = frontier.alpha_max * 1.15;
  const sy = linearScale([0, alphaTop], [H - PAD, PAD]);
  const dbMax = Math.max(...frontier.points.map((p) => p.d_b), 1);
  const sdb = linearScale([0, dbMax], [H - PAD, PAD]);

  const parts: string[] = [];
  parts.push(axisBox(W, H, PAD));
  for (const v of niceTicks(0, 1)) {
    parts.push(`<text class="tick" x="${sx(v)}" y="${H - PAD + 16}" ` +
      `text-anchor="middle">${fmt(v, 1)}</text>`);
  }
  for (const v of niceTicks(0, alphaTop)) {
    parts.push(`<text class="tick" x="${PAD - 6}" y="${sy(v) + 4}" ` +
      `text-anchor="end">${fmtSig(v, 2)}</text>`);
  }

  // Dominated (feasible-target) region under the suffix-max boundary.
  const bound = feasibleBoundary(frontier);
  const shade = [`${sx(0).toFixed(2)},${sy(bound.alpha[0]).toFixed(2)}`];
  for (let i = 0; i < bound.cos.length; i++) {
    shade.push(`${sx(bound.cos[i]).toFixed(2)},` +
               `${sy(bound.alpha[i]).toFixed(2)}`);
  }
  shade.push(`${sx(bound.cos[bound.cos.length - 1]).toFixed(2)},` +
             `${sy(0).toFixed(2)}`);
  shade.push(`${sx(0).toFixed(2)},${sy(0).toFixed(2)}`);
  parts.push(`<polygon class="feasible" points="${shade.join(" ")}"/>`);

  // The frontier itself (path order: linear, curved, vertical).
  parts.push(polyline(frontier.points.map((p) => p.cos_psi),
                      frontier.points.map((p) => p.alpha), sx, sy,
                      'class="frontier-curve"'));
  // Droop cost on the secondary axis.
  parts.push(polyline(frontier.points.map((p) => p.cos_psi),
                      frontier.points.map((p) => p.d_b), sx, sdb,
                      'class="droop-curve"'));
  parts.push(`<text class="tick" x="${W - PAD + 6}" ` +
    `y="${sdb(dbMax) + 4}">${fmtSig(dbMax, 3)} pu</text>`);

  // Target marker.
  const tx = sx(targets.cosPsiD);
  const ty = sy(targets.alphaD);
  parts.push(`<g class="target-marker" data-cos="${targets.cosPsiD}" ` +
    `data-alpha="${targets.alphaD}">` +
    `<line x1="${tx - 6}" y1="${ty}" x2="${tx + 6}" y2="${ty}"/>` +
    `<line x1="${tx}" y1="${ty - 6}" x2="${tx}" y2="${ty + 6}"/></g>`);

  // Projected design point straight from the tune response.
  if (tune) {
    const px = sx(tune.achieved.cos_psi_bar);
    const py = sy(tune.achieved.alpha_bar);
    parts.push(`<circle class="projection-marker" r="5" cx="${px}" ` +
      `cy="${py}" data-cos="${tune.achieved.cos_psi_bar}" ` +
      `data-alpha="${tune.achieved.alpha_bar}" data-db="${tune.d_b}"/>`);
    parts.push(`<line class="projection-link" x1="${tx}" y1="${ty}" ` +
      `x2="${px}" y2="${py}"/>`);
  }

  parts.push(`<text class="axis-label" x="${W / 2}" y="${H - 8}" ` +
    `text-anchor="middle">minimum damping ratio</text>`);
  parts.push(`<text class="axis-label" x="14" y="${H / 2}" ` +
    `transform="rotate(-90 14 ${H / 2})" text-anchor="middle">` +
    `minimum decay rate (1/s)</text>`);

  const readout = tune
    ? `<div class="readout" data-field="d_b">required d_b = ` +
      `<strong>${fmt(tune.d_b, 2)}</strong> pu ` +
      `<span class="detail">(osc ${fmt(tune.d_b_osc, 2)}, ` +
      `coi ${fmt(tune.d_b_coi, 2)}; regime ${escapeHtml(tune.regime)}; ` +
      `achieved damping ${fmt(tune.achieved.cos_psi_bar, 4)}, ` +
      `decay ${fmt(tune.achieved.alpha_bar, 4)} 1/s; ` +
      `companion m_v_min ${fmt(tune.m_v_min, 2)} s)</span></div>`
    : `<div class="readout" data-field="d_b">enter targets to tune</div>`;
  const error = input.error
    ? `<div class="error" role="alert">${escapeHtml(input.error)}</div>`
    : "";
  return `<section class="view frontier-view">
  <h2>Achievable frontier</h2>
  ${error}${readout}
  <svg viewBox="0 0 ${W} ${H}" width="${W}" height="${H}"
       role="img" aria-label="achievable damping and decay frontier">
  ${parts.join("\n  ")}
  </svg>
</section>`;
}
