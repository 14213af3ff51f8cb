import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name),
                                 "utf8")) as T;
}

/** Poll until the predicate holds (for async app initialization). */
export async function waitFor(pred: () => boolean, ms = 2000): Promise<void> {
  const start = Date.now();
  while (!pred()) {
    if (Date.now() - start > ms) throw new Error("waitFor timed out");
    await new Promise((r) => setTimeout(r, 5));
  }
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

/** Fetch stub serving recorded fixtures; records every request it sees. */
export function fixtureFetch(log: RecordedRequest[]):
    (input: string, init?: RequestInit) => Promise<Response> {
  const routes: [RegExp, string, string][] = [
    [/\/v1\/cases$/, "GET", "cases.json"],
    [/\/v1\/cases\/[^/]+\/spectrum$/, "GET", "spectrum.json"],
    [/\/v1\/frontier/, "GET", "frontier.json"],
    [/\/v1\/tune$/, "POST", "tune_reference.json"],
    [/\/v1\/locus$/, "POST", "locus_fs.json"],
    [/\/v1\/analyze$/, "POST", "analyze_fs.json"],
    [/\/v1\/compare$/, "POST", "compare.json"],
    [/\/v1\/simulate$/, "POST", "simulate_full.json"],
    [/\/v1\/health$/, "GET", ""],
  ];
  return async (input: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    log.push({
      url: input,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    for (const [re, m, file] of routes) {
      if (m === method && re.test(input)) {
        const payload = file === "" ? { status: "ok" } : fixture(file);
        return new Response(JSON.stringify(payload), {
          status: 200, headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ code: "unknown_case",
                                         message: `no route ${input}` }),
                        { status: 404 });
  };
}
