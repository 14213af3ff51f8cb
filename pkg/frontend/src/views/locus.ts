/** Locus view: pole trajectories in the complex plane, markers where the
 * network mode gains land on the branches, and the stability-region wedge
 * drawn from exactly the (alpha, psi) the service's region check used. */

import type { LocusResponse, RegionDto } from "../api.js";
import { fmtSig } from "../format.js";
import { axisBox, linearScale, niceTicks, polyline } from "./svg.js";

export interface LocusViewInput {
  locus: LocusResponse;
  region: RegionDto | null;
  controllerLabel: string;
}

const W = 560;
const H = 420;
const PAD = 44;

/** Branch point nearest to each mode gain (index lookup, no solving). */
export function modeMarkers(locus: LocusResponse):
    { lam: number; re: number; im: number; branch: number }[] {
  const out: { lam: number; re: number; im: number; branch: number }[] = [];
  for (const lam of locus.mode_gains) {
    for (const b of locus.branches) {
      let best = 0;
      let bestErr = Infinity;
      for (let j = 0; j < b.gains.length; j++) {
        const err = Math.abs(b.gains[j] - lam);
        if (err < bestErr) {
          bestErr = err;
          best = j;
        }
      }
      out.push({ lam, re: b.re[best], im: b.im[best], branch: b.branch_id });
    }
  }
  return out;
}

export function renderLocusView(input: LocusViewInput): string {
  const { locus, region } = input;
  const res = locus.branches.flatMap((b) => b.re);
  const ims = locus.branches.flatMap((b) => b.im);
  const roots = locus.geometry.open_poles.concat(locus.geometry.open_zeros);
  const allRe = res.concat(roots.map((p) => p.re),
                           region ? [-region.alpha] : []);
  const allIm = ims.concat(roots.map((p) => p.im));
  const imSpan = Math.max(...allIm.map(Math.abs), 1) * 1.1;
  const reLo = Math.min(...allRe) * 1.1;
  const reHi = Math.max(0.05 * Math.abs(reLo), ...allRe.map((r) => r * 1.1));
  const sx = linearScale([reLo, reHi], [PAD, W - PAD]);
  const sy = linearScale([-imSpan, imSpan], [H - PAD, PAD]);

  const parts: string[] = [];
  parts.push(axisBox(W, H, PAD));
  parts.push(`<line class="axis-line" x1="${sx(0)}" y1="${PAD}" ` +
    `x2="${sx(0)}" y2="${H - PAD}"/>`);
  parts.push(`<line class="axis-line" x1="${PAD}" y1="${sy(0)}" ` +
    `x2="${W - PAD}" y2="${sy(0)}"/>`);
  for (const v of niceTicks(reLo, reHi, 6)) {
    parts.push(`<text class="tick" x="${sx(v)}" y="${H - PAD + 16}" ` +
      `text-anchor="middle">${fmtSig(v, 2)}</text>`);
  }
  for (const v of niceTicks(-imSpan, imSpan, 6)) {
    parts.push(`<text class="tick" x="${PAD - 6}" y="${sy(v) + 4}" ` +
      `text-anchor="end">${fmtSig(v, 2)}</text>`);
  }

  // Stability-region wedge: Re <= -alpha plus the damping rays at +-psi
  // from the negative real axis, rendered from the service's own region.
  if (region) {
    const xAlpha = sx(-region.alpha);
    parts.push(`<g class="region-wedge" data-alpha="${region.alpha}" ` +
      `data-psi-deg="${region.psi_deg}" data-cos-psi="${region.cos_psi}">`);
    parts.push(`<line class="wedge-edge" x1="${xAlpha}" y1="${PAD}" ` +
      `x2="${xAlpha}" y2="${H - PAD}"/>`);
    const slope = Math.tan((region.psi_deg * Math.PI) / 180);
    const xEnd = reLo;
    for (const sign of [1, -1]) {
      const yEnd = sign * slope * -xEnd;
      parts.push(`<line class="wedge-edge" x1="${sx(0)}" y1="${sy(0)}" ` +
        `x2="${sx(xEnd)}" y2="${sy(Math.max(-imSpan,
                                            Math.min(imSpan, yEnd)))}"/>`);
    }
    parts.push("</g>");
  }

  for (const b of locus.branches) {
    parts.push(polyline(b.re, b.im, sx, sy,
                        `class="branch branch-${b.branch_id}"`));
  }
  for (const p of locus.geometry.open_poles) {
    const x = sx(p.re);
    const y = sy(p.im);
    parts.push(`<g class="open-pole"><line x1="${x - 5}" y1="${y - 5}" ` +
      `x2="${x + 5}" y2="${y + 5}"/><line x1="${x - 5}" y1="${y + 5}" ` +
      `x2="${x + 5}" y2="${y - 5}"/></g>`);
  }
  for (const z of locus.geometry.open_zeros) {
    parts.push(`<circle class="open-zero" r="5" cx="${sx(z.re)}" ` +
      `cy="${sy(z.im)}"/>`);
  }
  for (const m of modeMarkers(locus)) {
    parts.push(`<circle class="mode-marker" r="4" cx="${sx(m.re)}" ` +
      `cy="${sy(m.im)}" data-lambda="${m.lam}" data-re="${m.re}" ` +
      `data-im="${m.im}"><title>gain ${fmtSig(m.lam, 5)}</title></circle>`);
  }

  return `<section class="view locus-view">
  <h2>Root locus (${input.controllerLabel})</h2>
  <div class="detail">asymptote center ${fmtSig(locus.geometry.sigma_a, 4)};
  break points ${locus.geometry.break_points.map((b) => fmtSig(b, 4))
    .join(", ") || "none"}</div>
  <svg viewBox="0 0 ${W} ${H}" width="${W}" height="${H}"
       role="img" aria-label="root locus">
  ${parts.join("\n  ")}
  </svg>
</section>`;
}
