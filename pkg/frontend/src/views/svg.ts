/** Minimal SVG scaffolding shared by the views (pixel mapping only). */

export interface Scale {
  (x: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number],
                            range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

export function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale,
                         attrs: string): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = sx(xs[i]);
    const y = sy(ys[i]);
    if (Number.isFinite(x) && Number.isFinite(y)) {
      pts.push(`${x.toFixed(2)},${y.toFixed(2)}`);
    }
  }
  return `<polyline fill="none" ${attrs} points="${pts.join(" ")}"/>`;
}

export function axisBox(width: number, height: number, pad: number): string {
  return `<rect x="${pad}" y="${pad}" width="${width - 2 * pad}" ` +
    `height="${height - 2 * pad}" class="axis-box"/>`;
}

export function niceTicks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const start = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += s) out.push(v);
  return out;
}
