/** Response view: per-bus frequency traces, the COI trace, inverter power,
 * the service-fitted decay envelope, and the two controllers side by side
 * with the rate-comparison verdict badge. */

import type { CompareResponse, EnvelopeDto, SeriesDto,
              SimulatePayload } from "../api.js";
import { fmt, fmtSig } from "../format.js";
import { axisBox, linearScale, polyline } from "./svg.js";

const W = 460;
const H = 260;
const PAD = 36;

/** Normalize both payload shapes into named series. */
export function extractSeries(payload: SimulatePayload):
    Record<string, SeriesDto> {
  if (payload.downsampled && payload.series) {
    return payload.series;
  }
  const t = payload.t ?? [];
  const out: Record<string, SeriesDto> = {
    coi: { t, v: payload.coi ?? [] },
  };
  (payload.omega ?? []).forEach((v, i) => {
    out[`omega_${i + 1}`] = { t, v };
  });
  (payload.p_inv ?? []).forEach((v, i) => {
    out[`pinv_${i + 1}`] = { t, v };
  });
  return out;
}

function panel(title: string, payload: SimulatePayload, steady: number,
               envelope: EnvelopeDto | null): string {
  const series = extractSeries(payload);
  const omegaKeys = Object.keys(series)
    .filter((k) => k.startsWith("omega_")).sort();
  const pinvKeys = Object.keys(series)
    .filter((k) => k.startsWith("pinv_")).sort();
  const all = omegaKeys.concat(["coi"]).map((k) => series[k]);
  const tMax = Math.max(...all.map((s) => s.t[s.t.length - 1] ?? 1));
  const vAbs = Math.max(...all.flatMap((s) => s.v.map(Math.abs)), 1e-9);
  const sx = linearScale([0, tMax], [PAD, W - PAD]);
  const sy = linearScale([-1.15 * vAbs, 1.15 * vAbs], [H - PAD, PAD]);

  const parts: string[] = [axisBox(W, H, PAD)];
  parts.push(`<line class="axis-line" x1="${PAD}" y1="${sy(0)}" ` +
    `x2="${W - PAD}" y2="${sy(0)}"/>`);
  parts.push(`<line class="steady-line" x1="${PAD}" y1="${sy(steady)}" ` +
    `x2="${W - PAD}" y2="${sy(steady)}" data-steady="${steady}"/>`);
  omegaKeys.forEach((k, i) => {
    parts.push(polyline(series[k].t, series[k].v, sx, sy,
                        `class="bus-trace bus-${i + 1}"`));
  });
  parts.push(polyline(series.coi.t, series.coi.v, sx, sy,
                      'class="coi-trace"'));
  if (envelope) {
    // Visualization of the service-fitted envelope parameters.
    const t0 = series.coi.t[0] ?? 0;
    const ts: number[] = [];
    const up: number[] = [];
    const dn: number[] = [];
    for (let i = 0; i <= 120; i++) {
      const t = t0 + ((tMax - t0) * i) / 120;
      const e = envelope.amplitude * Math.exp(-envelope.rate * (t - t0));
      ts.push(t);
      up.push(steady + e);
      dn.push(steady - e);
    }
    parts.push(polyline(ts, up, sx, sy,
                        `class="envelope" data-rate="${envelope.rate}"`));
    parts.push(polyline(ts, dn, sx, sy, 'class="envelope"'));
  }

  const pparts: string[] = [axisBox(W, 150, PAD)];
  const pAbs = Math.max(
    ...pinvKeys.flatMap((k) => series[k].v.map(Math.abs)), 1e-9);
  const psy = linearScale([-1.15 * pAbs, 1.15 * pAbs], [150 - PAD, 18]);
  pinvKeys.forEach((k, i) => {
    pparts.push(polyline(series[k].t, series[k].v, sx, psy,
                         `class="pinv-trace bus-${i + 1}"`));
  });

  const envText = envelope
    ? `fitted envelope rate <strong data-field="rate">` +
      `${fmtSig(envelope.rate, 4)}</strong> 1/s`
    : "";
  return `<div class="response-panel" data-controller="${title}">
    <h3>${title}</h3>
    <div class="detail">${envText}; steady state ${fmtSig(steady, 4)} pu
    ${payload.downsampled ? "(downsampled)" : ""}</div>
    <svg viewBox="0 0 ${W} ${H}" width="${W}" height="${H}" role="img"
         aria-label="frequency deviations under ${title}">
    ${parts.join("\n    ")}
    </svg>
    <svg viewBox="0 0 ${W} 150" width="${W}" height="150" role="img"
         aria-label="inverter power under ${title}">
    ${pparts.join("\n    ")}
    </svg>
  </div>`;
}

export function renderResponseView(compare: CompareResponse | null,
                                   single: SimulatePayload | null = null,
                                   steadySingle = 0): string {
  if (!compare) {
    const body = single
      ? panel(single.meta.controller.kind, single, steadySingle, null)
      : `<div class="detail">run a simulation to see trajectories</div>`;
    return `<section class="view response-view">
  <h2>Step response</h2>
  ${body}
</section>`;
  }
  const verdictClass = compare.faster === "fs" ? "fs-faster" : "vi-faster";
  const badge = `<div class="verdict-badge ${verdictClass}" ` +
    `data-lhs="${compare.rate_comparison.lhs}" ` +
    `data-holds="${compare.rate_comparison.holds}">` +
    `${compare.faster.toUpperCase()} converges faster ` +
    `(criterion ${fmt(compare.rate_comparison.lhs, 2)} ` +
    `${compare.rate_comparison.holds ? ">" : "&le;"} 2; ` +
    `fitted ${fmtSig(compare.fs.envelope.rate, 3)} vs ` +
    `${fmtSig(compare.vi.envelope.rate, 3)} 1/s)</div>`;
  return `<section class="view response-view">
  <h2>Step response: droop shaping vs virtual inertia
      (d_b = ${fmt(compare.controllers.d_b, 2)} pu,
       m_v = ${fmt(compare.controllers.m_v, 2)} s)</h2>
  ${badge}
  <div class="response-grid">
  ${panel("fs", compare.fs.response, compare.fs.steady_state,
          compare.fs.envelope)}
  ${panel("vi", compare.vi.response, compare.vi.steady_state,
          compare.vi.envelope)}
  </div>
</section>`;
}
