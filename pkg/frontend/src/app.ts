/** DOM glue: wires the session store, the /v1 client, and the four views.
 * Every edit schedules a refresh through a latest-wins gate, so a stale
 * response can never overwrite a newer one. */

import { ApiClient, ApiError, LatestWins } from "./api.js";
import { SessionStore, targetsToDto, validateTargets } from "./state.js";
import { renderCaseView } from "./views/caseview.js";
import { renderFrontierView } from "./views/frontier.js";
import { renderLocusView } from "./views/locus.js";
import { renderResponseView } from "./views/response.js";

const CONTROLS = `
<header>
  <h1>gridshape tuning explorer</h1>
  <div class="controls">
    <label>case
      <select id="case-select"></select>
    </label>
    <label>min damping ratio cos&psi;<sub>d</sub>
      <input id="in-cospsi" type="number" step="0.01" min="0.01" max="1">
    </label>
    <label>min decay rate &alpha;<sub>d</sub> (1/s)
      <input id="in-alpha" type="number" step="0.05" min="0.01">
    </label>
    <label>max imbalance &Delta;P (pu)
      <input id="in-dp" type="number" step="0.05" min="0">
    </label>
    <label>COI budget &Delta;&omega;<sub>d</sub> (mHz)
      <input id="in-dwd" type="number" step="10" min="1">
    </label>
    <label class="toggle">security droop override
      <input id="in-coi-override" type="checkbox">
    </label>
    <label>controller
      <select id="controller-select">
        <option value="fs">droop shaping (fs)</option>
        <option value="vi">virtual inertia (vi)</option>
      </select>
    </label>
  </div>
  <div id="status" class="status"></div>
</header>
<main>
  <div id="view-frontier"></div>
  <div id="view-locus"></div>
  <div id="view-response"></div>
  <div id="view-case"></div>
</main>`;

export interface App {
  store: SessionStore;
  refresh: () => Promise<void>;
  selectCase: (id: string) => Promise<void>;
}

export function mountApp(root: HTMLElement, api: ApiClient): App {
  root.innerHTML = CONTROLS;
  const store = new SessionStore();
  const gate = new LatestWins();
  const $ = <T extends HTMLElement>(sel: string): T => {
    const el = root.querySelector(sel);
    if (!el) throw new Error(`missing element ${sel}`);
    return el as T;
  };

  const inputs = {
    cospsi: $<HTMLInputElement>("#in-cospsi"),
    alpha: $<HTMLInputElement>("#in-alpha"),
    dp: $<HTMLInputElement>("#in-dp"),
    dwd: $<HTMLInputElement>("#in-dwd"),
    coi: $<HTMLInputElement>("#in-coi-override"),
    controller: $<HTMLSelectElement>("#controller-select"),
    caseSel: $<HTMLSelectElement>("#case-select"),
  };

  function syncInputs(): void {
    const s = store.get();
    inputs.cospsi.value = String(s.targets.cosPsiD);
    inputs.alpha.value = String(s.targets.alphaD);
    inputs.dp.value = String(s.targets.deltaP);
    inputs.dwd.value = String(s.targets.deltaOmegaMhz);
    inputs.coi.checked = s.coiOverride;
    inputs.controller.value = s.controller;
  }

  function renderAll(): void {
    const s = store.get();
    const r = s.results;
    $("#status").textContent = s.error ?? "";
    $("#view-case").innerHTML = renderCaseView(r.spectrum ?? null);
    if (r.frontier) {
      $("#view-frontier").innerHTML = renderFrontierView({
        frontier: r.frontier,
        targets: { cosPsiD: s.targets.cosPsiD, alphaD: s.targets.alphaD },
        tune: r.tune ?? null,
        error: s.error,
      });
    }
    if (r.locus) {
      $("#view-locus").innerHTML = renderLocusView({
        locus: r.locus,
        region: r.analyze?.region ?? null,
        controllerLabel: s.controller,
      });
    }
    $("#view-response").innerHTML = renderResponseView(r.compare ?? null);
  }

  async function refresh(): Promise<void> {
    const s = store.get();
    if (!s.caseId) return;
    const bad = validateTargets(s.targets,
                                s.results.frontier?.alpha_max ?? null);
    if (bad) {
      store.update({ error: bad });
      renderAll();
      return;
    }
    const caseId = s.caseId;
    const result = await gate.run(async () => {
      const targets = targetsToDto(s.targets);
      const tune = await api.tune(caseId, targets,
                                  s.coiOverride ? 0 : null);
      const controller = s.controller === "vi"
        ? { kind: "vi" as const, d_b: tune.d_b, m_v: tune.m_v_min }
        : { kind: "fs" as const, d_b: tune.d_b };
      const region = { alpha: s.targets.alphaD,
                       cos_psi: s.targets.cosPsiD };
      const n = s.results.spectrum?.buses.length ?? 0;
      const u0 = Array.from({ length: n },
                            (_, i) => (i === 0 ? -0.2 : 0));
      const [locus, analyze, compare] = await Promise.all([
        api.locus(caseId, controller),
        api.analyze(caseId, controller, region),
        api.compare(caseId, tune.d_b, u0, { t_end: 120, dt: 0.05 }),
      ]);
      return { tune, locus, analyze, compare };
    }).catch((err: unknown) => {
      const msg = err instanceof ApiError
        ? `${err.message}${err.detail && "violated_bound" in err.detail
            ? ` [${String(err.detail.violated_bound)}]` : ""}`
        : String(err);
      store.update({ error: msg });
      renderAll();
      return null;
    });
    if (result) {
      store.update({ error: null });
      store.mergeResults(result);
      renderAll();
    }
  }

  async function selectCase(id: string): Promise<void> {
    store.update({ caseId: id, results: {}, error: null });
    const [spectrum, frontier] = await Promise.all([
      api.spectrum(id), api.frontier(id),
    ]);
    store.mergeResults({ spectrum, frontier });
    renderAll();
    await refresh();
  }

  function bindNumber(input: HTMLInputElement,
                      apply: (v: number) => void): void {
    input.addEventListener("input", () => {
      const v = Number(input.value);
      if (Number.isFinite(v)) {
        apply(v);
        void refresh();
      }
    });
  }

  bindNumber(inputs.cospsi, (v) => store.update({
    targets: { ...store.get().targets, cosPsiD: v } }));
  bindNumber(inputs.alpha, (v) => store.update({
    targets: { ...store.get().targets, alphaD: v } }));
  bindNumber(inputs.dp, (v) => store.update({
    targets: { ...store.get().targets, deltaP: v } }));
  bindNumber(inputs.dwd, (v) => store.update({
    targets: { ...store.get().targets, deltaOmegaMhz: v } }));
  inputs.coi.addEventListener("change", () => {
    store.update({ coiOverride: inputs.coi.checked });
    void refresh();
  });
  inputs.controller.addEventListener("change", () => {
    store.update({
      controller: inputs.controller.value as "fs" | "vi" });
    void refresh();
  });
  inputs.caseSel.addEventListener("change", () => {
    void selectCase(inputs.caseSel.value);
  });

  void (async () => {
    try {
      const { cases } = await api.listCases();
      inputs.caseSel.innerHTML = cases.map(
        (c) => `<option value="${c.id}">${c.id} (${c.n} buses, ` +
          `${c.f0} Hz)</option>`).join("");
      syncInputs();
      if (cases.length > 0) {
        await selectCase(cases[0].id);
      } else {
        store.update({ error: "no cases uploaded; POST one to /v1/cases" });
        renderAll();
      }
    } catch (err) {
      store.update({ error: `service unreachable: ${String(err)}` });
      renderAll();
    }
  })();

  syncInputs();
  return { store, refresh, selectCase };
}
