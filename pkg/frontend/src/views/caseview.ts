/** Case view: scaled-Laplacian spectrum and per-bus machine parameters. */

import type { SpectrumResponse } from "../api.js";
import { fmtSig } from "../format.js";

export function renderCaseView(spectrum: SpectrumResponse | null): string {
  if (!spectrum) {
    return `<section class="view case-view"><h2>Case</h2>
  <div class="detail">select a case to inspect it</div></section>`;
  }
  const lamRows = spectrum.lambda.map((lam, i) => {
    const tag = i === 0 ? "common mode"
      : i === 1 ? "Fiedler (lambda_2)"
      : i === spectrum.lambda.length - 1 ? "top mode (lambda_n)" : "";
    return `<tr><td>${i + 1}</td>` +
      `<td data-field="lambda_${i + 1}">${fmtSig(lam, 6)}</td>` +
      `<td>${tag}</td></tr>`;
  }).join("\n    ");
  const busRows = spectrum.buses.map((b, i) =>
    `<tr><td>${b.id}</td><td>${fmtSig(b.m, 4)}</td>` +
    `<td>${fmtSig(b.d, 4)}</td><td>${fmtSig(b.d_t, 4)}</td>` +
    `<td>${fmtSig(b.tau, 4)}</td>` +
    `<td>${fmtSig(spectrum.r[i], 4)}</td></tr>`).join("\n    ");
  const p = spectrum.params;
  return `<section class="view case-view">
  <h2>Case <span class="mono">${spectrum.case_hash}</span></h2>
  <div class="detail">f0 = ${spectrum.f0} Hz; representative machine:
  m = ${fmtSig(p.m, 4)} s, d = ${fmtSig(p.d, 4)} pu,
  d_t = ${fmtSig(p.d_t, 4)} pu, tau = ${fmtSig(p.tau, 4)} s</div>
  <table class="spectrum-table">
    <thead><tr><th>k</th><th>eigenvalue (pu)</th><th></th></tr></thead>
    <tbody>
    ${lamRows}
    </tbody>
  </table>
  <table class="bus-table">
    <thead><tr><th>bus</th><th>m (s)</th><th>d (pu)</th>
    <th>d_t (pu)</th><th>tau (s)</th><th>r_i</th></tr></thead>
    <tbody>
    ${busRows}
    </tbody>
  </table>
</section>`;
}
